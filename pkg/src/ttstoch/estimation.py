"""Estimating (p_a, p_b) from observed sets."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .combinatorics import event_prob
from .core import Player, ScoreState, ScoringSystem


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class ServeCountData:
    a_own_serve_wins: int
    a_own_serves: int
    b_own_serve_wins: int
    b_own_serves: int

    def __post_init__(self):
        for wins, serves in ((self.a_own_serve_wins, self.a_own_serves), (self.b_own_serve_wins, self.b_own_serves)):
            if serves < 0 or wins < 0 or wins > serves:
                raise ValueError(f"inconsistent serve tally: {wins} won of {serves}")

    def __add__(self, other: "ServeCountData") -> "ServeCountData":
        return ServeCountData(
            self.a_own_serve_wins + other.a_own_serve_wins,
            self.a_own_serves + other.a_own_serves,
            self.b_own_serve_wins + other.b_own_serve_wins,
            self.b_own_serves + other.b_own_serves,
        )


@dataclass(frozen=True)
class ServeCountEstimate:
    p_a: float
    p_b: float
    se_a: float
    se_b: float
    warnings: tuple[str, ...] = ()


def mle_serve_counts(data: ServeCountData) -> ServeCountEstimate:
    """Own-serve win ratios, with binomial standard errors."""
    if data.a_own_serves < 1 or data.b_own_serves < 1:
        raise InsufficientData("insufficient data: each player needs at least one serve")
    pa = data.a_own_serve_wins / data.a_own_serves
    pb = data.b_own_serve_wins / data.b_own_serves
    warnings = []
    for name, v in (("p_a", pa), ("p_b", pb)):
        if v in (0.0, 1.0):
            warnings.append(f"{name} estimate is degenerate ({v:g})")
    return ServeCountEstimate(
        pa,
        pb,
        math.sqrt(pa * (1 - pa) / data.a_own_serves),
        math.sqrt(pb * (1 - pb) / data.b_own_serves),
        tuple(warnings),
    )


@dataclass(frozen=True)
class ScoreObservation:
    """A finished set: its rules, who served first and the final score."""

    system: ScoringSystem
    first_server: Player
    score_a: int
    score_b: int

    def __post_init__(self):
        object.__setattr__(self, "first_server", Player.parse(self.first_server))
        if not ScoreState(self.score_a, self.score_b).is_terminal(self.system):
            raise ValueError(f"{self.score_a}-{self.score_b} is not a final score for n={self.system.n}")
        n = self.system.n
        lo, hi = sorted((self.score_a, self.score_b))
        if hi != max(n, lo + 2):
            raise ValueError(f"{self.score_a}-{self.score_b} cannot be reached under n={n}")


def observation_prob(obs: ScoreObservation, p_a, p_b):
    """Probability of the observed final score; broadcasts over arrays of p_a, p_b."""
    # a B-set is an A-set with the players' labels exchanged
    if obs.first_server is Player.A:
        first, second, s1, s2 = p_a, p_b, obs.score_a, obs.score_b
    else:
        first, second, s1, s2 = p_b, p_a, obs.score_b, obs.score_a
    n, m = obs.system.n, obs.system.m
    first_wins = s1 > s2
    lo = min(s1, s2)
    if lo <= n - 2:
        if first_wins:
            return event_prob(n, lo, Player.A, first, second, m)
        return event_prob(lo, n, Player.B, first, second, m)
    ell = lo - n + 2
    p_tie = event_prob(n - 1, n - 1, Player.A, first, second, m) + event_prob(n - 1, n - 1, Player.B, first, second, m)
    pair = first * (1.0 - second) if first_wins else (1.0 - first) * second
    r = (1.0 - first) * (1.0 - second) + first * second
    return p_tie * pair * np.power(r, ell - 1)


def log_likelihood(observations, p_a, p_b):
    """Sum of per-observation log-probabilities (``-inf`` where impossible)."""
    counts = Counter(observations)
    total = 0.0
    with np.errstate(divide="ignore"):
        for obs, c in sorted(counts.items(), key=lambda kv: _obs_key(kv[0])):
            total = total + c * np.log(observation_prob(obs, p_a, p_b))
    return total


def _obs_key(o: ScoreObservation):
    return (o.system.m, o.system.n, o.first_server.value, o.score_a, o.score_b)


@dataclass
class ScoreMle:
    p_a: float
    p_b: float
    log_likelihood: float
    grid_best: tuple[float, float]
    grid_log_likelihood: float
    tied_points: int
    at_boundary: bool
    surface: np.ndarray = field(repr=False)
    axis: np.ndarray = field(repr=False)


def _golden(f, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Maximize a unimodal ``f`` on [lo, hi]."""
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2


def mle_from_scores(
    observations,
    step: float = 0.01,
    lo: float = 0.01,
    hi: float = 0.99,
    sweeps: int = 3,
    no_server: bool = False,
) -> ScoreMle:
    """Maximum-likelihood (p_a, p_b) from final scores alone.

    A grid search over ``[lo, hi]^2`` picks the starting point (ties go to the
    grid point nearest the centroid of the tied points), then golden-section
    passes along each axis refine it within one grid step. With
    ``no_server`` the search runs along p_b = 1 - p_a.
    """
    observations = list(observations)
    if not observations:
        raise InsufficientData("need at least one observation")
    if not (0.0 <= lo <= hi <= 1.0 and step > 0):
        raise ValueError("grid needs 0 <= lo <= hi <= 1 and a positive step")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    axis = np.round(lo + step * np.arange(count), 12)

    if no_server:
        surf = np.asarray(log_likelihood(observations, axis, 1.0 - axis), dtype=float)
    else:
        pa, pb = np.meshgrid(axis, axis, indexing="ij")
        surf = np.asarray(log_likelihood(observations, pa, pb), dtype=float)
    best = np.max(surf)
    if not np.isfinite(best):
        raise InsufficientData("observations have probability 0 at every grid point")
    tied = np.argwhere(surf == best)
    centroid = tied.mean(axis=0)
    start = tuple(tied[np.argmin(((tied - centroid) ** 2).sum(axis=1))])

    def ll(x, y):
        return float(log_likelihood(observations, x, y))

    if no_server:
        x0 = axis[start[0]]
        x = _golden(lambda v: ll(v, 1.0 - v), max(0.0, x0 - step), min(1.0, x0 + step))
        if ll(x, 1.0 - x) < best:
            x = x0
        pa_hat, pb_hat = x, 1.0 - x
        grid_best = (float(x0), float(1.0 - x0))
    else:
        x, y = float(axis[start[0]]), float(axis[start[1]])
        grid_best = (x, y)
        for _ in range(sweeps):
            nx = _golden(lambda v: ll(v, y), max(0.0, grid_best[0] - step), min(1.0, grid_best[0] + step))
            if ll(nx, y) >= ll(x, y):
                x = nx
            ny = _golden(lambda v: ll(x, v), max(0.0, grid_best[1] - step), min(1.0, grid_best[1] + step))
            if ll(x, ny) >= ll(x, y):
                y = ny
        pa_hat, pb_hat = x, y
    final = ll(pa_hat, pb_hat)
    edge = (axis[0], axis[-1])
    at_boundary = any(v[i] in edge for v in (grid_best,) for i in range(2))
    return ScoreMle(float(pa_hat), float(pb_hat), final, grid_best, float(best), len(tied),
                    bool(at_boundary), surf, axis)
