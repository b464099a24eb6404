"""Match-level results (first to G sets) and scoring-system comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Player, RallyModel, ScoringSystem
from .pmf import Pmf
from .setstats import DEFAULT_TRUNCATION, joint_winner_duration, set_win_probs, winner_moments


@dataclass(frozen=True)
class MatchQuery:
    system: ScoringSystem
    model: RallyModel
    first_server: Player = Player.A

    def __post_init__(self):
        object.__setattr__(self, "first_server", Player.parse(self.first_server))

    def set_server(self, a_sets: int, b_sets: int) -> Player:
        """First server of the set played at set score ``a_sets``-``b_sets``."""
        # set k (0-based) opens with the match's first server when k is even
        k = a_sets + b_sets
        return self.first_server if k % 2 == 0 else self.first_server.other()


def _live_states(G: int):
    """Non-terminal set scores in an order where predecessors come first."""
    for total in range(2 * G - 1):
        for a in range(max(0, total - G + 1), min(total, G - 1) + 1):
            yield a, total - a


def match_win_prob(query: MatchQuery) -> float:
    """Probability that A is first to win G sets."""
    G = query.system.G
    per_server = {s: set_win_probs(query.system, query.model, s)[0] for s in Player}
    reach = {(0, 0): 1.0}
    won = []
    for a, b in _live_states(G):
        mass = reach.pop((a, b), 0.0)
        if mass == 0.0:
            continue
        q = per_server[query.set_server(a, b)]
        if a + 1 == G:
            won.append(mass * q)
        else:
            reach[(a + 1, b)] = reach.get((a + 1, b), 0.0) + mass * q
        if b + 1 < G:
            reach[(a, b + 1)] = reach.get((a, b + 1), 0.0) + mass * (1.0 - q)
    return math.fsum(won)


def banach_match_prob(q: float, G: int) -> float:
    """First-to-G race with a constant per-set probability ``q``."""
    return math.fsum(math.comb(G - 1 + k, k) * q**G * (1.0 - q) ** k for k in range(G))


def match_duration_pmf(query: MatchQuery, truncation: float = DEFAULT_TRUNCATION) -> Pmf:
    """Law of the total number of rallies in the match.

    Sets are independent given their first server, so each set-score path
    convolves the per-set (winner, duration) laws.
    """
    G = query.system.G
    laws = {s: joint_winner_duration(query.system, query.model, s, truncation) for s in Player}
    states: dict[tuple[int, int], dict[int, float]] = {(0, 0): {0: 1.0}}
    final: dict[int, float] = {}
    tail = 0.0
    for a, b in _live_states(G):
        cur = states.pop((a, b), None)
        if not cur:
            continue
        joint, set_tail = laws[query.set_server(a, b)]
        tail += math.fsum(cur.values()) * set_tail
        for (winner, d), v in joint.items():
            if v == 0.0:
                continue
            na, nb = (a + 1, b) if winner is Player.A else (a, b + 1)
            dest = final if G in (na, nb) else states.setdefault((na, nb), {})
            for t, w in cur.items():
                dest[t + d] = dest.get(t + d, 0.0) + w * v
    return Pmf(final, tail)


def match_duration_moments(query: MatchQuery) -> tuple[float, float]:
    """Exact mean and variance of the match length."""
    G = query.system.G
    wm = {s: winner_moments(query.system, query.model, s) for s in Player}
    # per state: (P, E[T; state], E[T^2; state])
    states = {(0, 0): (1.0, 0.0, 0.0)}
    done = [0.0, 0.0]
    for a, b in _live_states(G):
        if (a, b) not in states:
            continue
        p, m1, m2 = states.pop((a, b))
        for winner, w in wm[query.set_server(a, b)].items():
            np_ = p * w.prob
            nm1 = m1 * w.prob + p * w.m1
            nm2 = m2 * w.prob + 2.0 * m1 * w.m1 + p * w.m2
            na, nb = (a + 1, b) if winner is Player.A else (a, b + 1)
            if G in (na, nb):
                done[0] += nm1
                done[1] += nm2
            else:
                old = states.get((na, nb), (0.0, 0.0, 0.0))
                states[(na, nb)] = (old[0] + np_, old[1] + nm1, old[2] + nm2)
    mean = done[0]
    return mean, max(done[1] - mean * mean, 0.0)


@dataclass(frozen=True)
class ComparisonRow:
    old_system: ScoringSystem
    new_system: ScoringSystem
    model: RallyModel
    win_prob_old: float
    win_prob_new: float
    mean_old: float
    mean_new: float
    std_old: float
    std_new: float

    @property
    def ratio_mean(self) -> float:
        return self.mean_old / self.mean_new

    @property
    def ratio_std(self) -> float:
        return self.std_old / self.std_new


def compare_systems(old: ScoringSystem, new: ScoringSystem, model_grid, first_server: Player = Player.A):
    """Win probabilities and old-over-new duration ratios at every model in the grid."""
    rows = []
    for model in model_grid:
        q_old, q_new = MatchQuery(old, model, first_server), MatchQuery(new, model, first_server)
        mo, vo = match_duration_moments(q_old)
        mn, vn = match_duration_moments(q_new)
        rows.append(
            ComparisonRow(old, new, model, match_win_prob(q_old), match_win_prob(q_new),
                          mo, mn, math.sqrt(vo), math.sqrt(vn))
        )
    return rows
