"""Who serves which rally, and how a run of rallies splits into serve blocks."""

from __future__ import annotations

from typing import NamedTuple

from .core import Player, ScoringSystem


class ServeDecomposition(NamedTuple):
    K: int  # complete blocks of m serves
    R: int  # serves in the trailing partial block, 0 <= R < m
    k1: int  # complete blocks served by the first server
    k2: int  # complete blocks served by the other player
    trailing_server: Player


def decompose(total_rallies: int, m: int) -> ServeDecomposition:
    """Split ``total_rallies`` of an A-set into serve blocks of length ``m``.

    The trailing partial block (possibly empty) belongs to A when ``K`` is even
    and to B when it is odd.
    """
    if total_rallies < 0:
        raise ValueError("total_rallies must be >= 0")
    K, R = divmod(total_rallies, m)
    return ServeDecomposition(K, R, (K + 1) // 2, K // 2, Player.A if K % 2 == 0 else Player.B)


def server_of_rally(
    rally_index: int,
    system: ScoringSystem,
    first_server: Player = Player.A,
    tie_reached_after: int | None = None,
) -> Player:
    """Server of the 1-based ``rally_index``.

    Serve passes every ``m`` rallies until the tie; after ``tie_reached_after``
    rallies it passes every rally, starting with whoever the block rotation
    would have put on serve next.
    """
    if rally_index < 1:
        raise ValueError("rally_index is 1-based")
    first_server = Player.parse(first_server)
    if tie_reached_after is not None:
        if tie_reached_after != system.tie_rallies:
            raise ValueError(f"the tie is reached after {system.tie_rallies} rallies, not {tie_reached_after}")
        if rally_index > tie_reached_after:
            at_tie = _block_server(tie_reached_after + 1, system.m, first_server)
            extra = rally_index - tie_reached_after - 1
            return at_tie if extra % 2 == 0 else at_tie.other()
    return _block_server(rally_index, system.m, first_server)


def _block_server(rally_index: int, m: int, first_server: Player) -> Player:
    block = (rally_index - 1) // m
    return first_server if block % 2 == 0 else first_server.other()
