"""Set-level results: who wins, on what score, and after how many rallies."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .combinatorics import ScoreEventQuery, score_prob
from .core import Phase, Player, RallyModel, ScoreState, ScoringSystem, swap_roles
from .pmf import Pmf
from .serve import server_of_rally
from .tie import TieNeverResolves, TieParameters, tie_extra_moments, tie_win_probs

DEFAULT_TRUNCATION = 1e-12


class SetAlreadyDecided(ValueError):
    pass


def _a_view(model: RallyModel, first_server: Player) -> RallyModel:
    """Model seen by whoever serves first; B-sets reuse the A-set formulas."""
    return model if Player.parse(first_server) is Player.A else swap_roles(model)


def _orient(pair, first_server: Player):
    # results for the first server's side, flipped back to (A, B) order
    return pair if Player.parse(first_server) is Player.A else pair[::-1]


def _regular_finishes(n: int, model: RallyModel, m: int):
    """A-set probabilities of winning on (n, k) and losing on (k, n), k <= n-2."""
    wins = [score_prob(ScoreEventQuery(n, k, Player.A), model, m) for k in range(n - 1)]
    losses = [score_prob(ScoreEventQuery(k, n, Player.B), model, m) for k in range(n - 1)]
    return wins, losses


def tie_reach_prob(system: ScoringSystem, model: RallyModel, first_server: Player = Player.A) -> float:
    """Probability that the set reaches (n-1, n-1)."""
    mod = _a_view(model, first_server)
    n, m = system.n, system.m
    return score_prob(ScoreEventQuery(n - 1, n - 1, Player.A), mod, m) + score_prob(
        ScoreEventQuery(n - 1, n - 1, Player.B), mod, m
    )


def _tie_split(system: ScoringSystem, model: RallyModel) -> tuple[float, float, float]:
    """(P[tie], P[A wins | tie], P[B wins | tie]) for an A-set."""
    p_tie = tie_reach_prob(system, model)
    if p_tie == 0.0:
        return 0.0, 0.0, 0.0
    wa, wb = tie_win_probs(model)
    return p_tie, wa, wb


def set_win_probs(system: ScoringSystem, model: RallyModel, first_server: Player = Player.A) -> tuple[float, float]:
    """Probabilities that A and B win a set whose first rally ``first_server`` serves."""
    mod = _a_view(model, first_server)
    wins, losses = _regular_finishes(system.n, mod, system.m)
    p_tie, wa, wb = _tie_split(system, mod)
    pa = math.fsum(wins) + p_tie * wa
    pb = math.fsum(losses) + p_tie * wb
    return _orient((pa, pb), first_server)


@dataclass(frozen=True)
class FinalScoreDistribution:
    """Final-score law keyed by ``(winner, loser_points)``.

    ``loser_points <= n - 2`` is a regular finish on (n, k); larger values are
    tie finishes where the winner has ``loser_points + 2``, i.e. the set ended
    after ``2 * (loser_points - n + 2)`` post-tie rallies.
    """

    n: int
    probs: dict[tuple[Player, int], float]
    tail: float

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def score(self, winner: Player, loser_points: int) -> tuple[int, int]:
        w = max(self.n, loser_points + 2)
        return (w, loser_points) if winner is Player.A else (loser_points, w)

    def by_score(self) -> dict[tuple[int, int], float]:
        return {self.score(w, k): v for (w, k), v in self.probs.items()}

    def win_prob(self, player: Player) -> float:
        return math.fsum(v for (w, _), v in self.probs.items() if w is player)


def _tie_pairs(model: RallyModel, threshold: float):
    """Yield (ell, P[2*ell post-tie rallies]) until the remaining mass < threshold."""
    t = TieParameters.from_model(model)
    if t.stuck:
        raise TieNeverResolves("tie never resolves: every post-tie pair is split")
    ell, tail = 0, 1.0
    while tail >= threshold:
        ell += 1
        yield ell, t.resolve * t.r ** (ell - 1)
        tail = t.r**ell
        if ell > 10_000_000:  # pragma: no cover
            raise RuntimeError("tie expansion did not converge")


def final_score_distribution(
    system: ScoringSystem,
    model: RallyModel,
    first_server: Player = Player.A,
    tie_truncation: float = DEFAULT_TRUNCATION,
) -> FinalScoreDistribution:
    first_server = Player.parse(first_server)
    mod = _a_view(model, first_server)
    n = system.n
    first, second = first_server, first_server.other()
    wins, losses = _regular_finishes(n, mod, system.m)
    probs: dict[tuple[Player, int], float] = {}
    for k in range(n - 1):
        probs[(first, k)] = wins[k]
        probs[(second, k)] = losses[k]
    p_tie, wa, wb = _tie_split(system, mod)
    tail = 0.0
    if p_tie > 0.0:
        for ell, mass in _tie_pairs(mod, tie_truncation / p_tie):
            k = n - 2 + ell
            probs[(first, k)] = p_tie * mass * wa
            probs[(second, k)] = p_tie * mass * wb
        tail = p_tie * TieParameters.from_model(mod).r ** ell
    return FinalScoreDistribution(n, probs, tail)


def joint_winner_duration(
    system: ScoringSystem,
    model: RallyModel,
    first_server: Player = Player.A,
    truncation: float = DEFAULT_TRUNCATION,
) -> tuple[dict[tuple[Player, int], float], float]:
    """Mass of (winner, number of rallies) and the truncated tail mass."""
    fsd = final_score_distribution(system, model, first_server, truncation)
    out = {}
    for (w, k), v in fsd.probs.items():
        # every rally scores a point, so duration = winner points + loser points
        out[(w, max(system.n, k + 2) + k)] = v
    return out, fsd.tail


def duration_pmf(
    system: ScoringSystem,
    model: RallyModel,
    first_server: Player = Player.A,
    truncation: float = DEFAULT_TRUNCATION,
) -> Pmf:
    """Law of the number of rallies in a set."""
    joint, tail = joint_winner_duration(system, model, first_server, truncation)
    masses: dict[int, float] = {}
    for (_, d), v in joint.items():
        masses[d] = masses.get(d, 0.0) + v
    for d in range(system.n, 2 * system.n):
        masses.setdefault(d, 0.0)
    return Pmf(masses, tail)


@dataclass(frozen=True)
class WinnerMoments:
    """Per-winner partial moments: P[W], E[D; W], E[D^2; W]."""

    prob: float
    m1: float
    m2: float


def winner_moments(
    system: ScoringSystem, model: RallyModel, first_server: Player = Player.A
) -> dict[Player, WinnerMoments]:
    """Exact partial moments of the set duration split by winner."""
    first_server = Player.parse(first_server)
    mod = _a_view(model, first_server)
    n = system.n
    wins, losses = _regular_finishes(n, mod, system.m)
    p_tie, wa, wb = _tie_split(system, mod)
    if p_tie > 0.0:
        mu, var = tie_extra_moments(mod)
        base = 2 * (n - 1)
        e1 = base + mu
        e2 = base * base + 2 * base * mu + var + mu * mu
    else:
        e1 = e2 = 0.0
    res = {}
    for who, regular, w in ((first_server, wins, wa), (first_server.other(), losses, wb)):
        pt = p_tie * w
        res[who] = WinnerMoments(
            math.fsum(regular) + pt,
            math.fsum([(n + k) * v for k, v in enumerate(regular)] + [pt * e1]),
            math.fsum([(n + k) ** 2 * v for k, v in enumerate(regular)] + [pt * e2]),
        )
    return res


def duration_moments(
    system: ScoringSystem, model: RallyModel, first_server: Player = Player.A
) -> tuple[float, float]:
    """Mean and variance of the set duration (closed form, no truncation)."""
    wm = winner_moments(system, model, first_server).values()
    m1 = math.fsum(w.m1 for w in wm)
    m2 = math.fsum(w.m2 for w in wm)
    return m1, max(m2 - m1 * m1, 0.0)


def win_prob_from_score(
    system: ScoringSystem,
    model: RallyModel,
    first_server: Player = Player.A,
    state: ScoreState = ScoreState(0, 0),
) -> float:
    """Probability that A wins the set from a live score.

    Pre-tie scores are solved by backward induction from the finishing
    scores; post-tie scores through the level / A+1 / B+1 first-step system.
    """
    first_server = Player.parse(first_server)
    state.check(system)
    if state.is_terminal(system):
        raise SetAlreadyDecided("set already decided")
    n = system.n
    a, b = state.alpha, state.beta
    if a >= n - 1 and b >= n - 1:
        return _tie_value(system, model, first_server, a, b)
    value = backward_values(system, model, first_server)[(a, b)]
    if math.isnan(value):
        raise TieNeverResolves("tie never resolves: every post-tie pair is split")
    return value


def _tie_value(system, model, first_server, a, b) -> float:
    level_a = _tie_level(model)
    if a == b:
        return level_a
    server = server_of_rally(a + b + 1, system, first_server, system.tie_rallies)
    x = model.a_wins_rally(server)
    if a > b:
        return x + (1.0 - x) * level_a
    return x * level_a


def _tie_level(model: RallyModel) -> float:
    t = TieParameters.from_model(model)
    if t.stuck:
        raise TieNeverResolves("tie never resolves: every post-tie pair is split")
    return tie_win_probs(model)[0]


def backward_values(
    system: ScoringSystem, model: RallyModel, first_server: Player = Player.A
) -> dict[tuple[int, int], float]:
    """A's winning chances from every pre-tie score (alpha, beta), alpha, beta <= n-1."""
    n = system.n
    first_server = Player.parse(first_server)
    v: dict[tuple[int, int], float] = {}
    for a in range(n + 1):
        for b in range(n + 1):
            if a == n and b <= n - 2:
                v[(a, b)] = 1.0
            elif b == n and a <= n - 2:
                v[(a, b)] = 0.0
    v[(n - 1, n - 1)] = _tie_level(model) if _reaches_tie(system, model, first_server) else math.nan
    for total in range(2 * n - 3, -1, -1):
        for a in range(max(0, total - n + 1), min(total, n - 1) + 1):
            b = total - a
            x = model.a_wins_rally(server_of_rally(total + 1, system, first_server))
            up, down = v[(a + 1, b)], v[(a, b + 1)]
            # 0 * nan must stay 0 for unreachable branches of degenerate models
            v[(a, b)] = (x * up if x else 0.0) + ((1.0 - x) * down if x != 1.0 else 0.0)
    return {k: val for k, val in v.items() if k[0] <= n - 1 and k[1] <= n - 1}


def _reaches_tie(system, model, first_server) -> bool:
    try:
        _tie_level(model)
        return True
    except TieNeverResolves:
        return False
