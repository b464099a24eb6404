"""Exact probabilities of passing through a score with a given last scorer.

All results are for an A-set (A serves the first block of ``m`` rallies).
B-set quantities follow from :func:`ttstoch.core.swap_roles` with the score
and the last scorer mirrored.

``j`` always counts the points A won on A's own serve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import Player, RallyModel, swap_roles
from .serve import decompose


@dataclass(frozen=True)
class ScoreEventQuery:
    """Event: after ``alpha + beta`` rallies the score is (alpha, beta) and
    ``last_scorer`` won the final rally."""

    alpha: int
    beta: int
    last_scorer: Player
    first_server: Player = Player.A

    def __post_init__(self):
        object.__setattr__(self, "last_scorer", Player.parse(self.last_scorer))
        object.__setattr__(self, "first_server", Player.parse(self.first_server))
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("scores must be non-negative")
        if self.last_scorer is Player.A and self.alpha < 1:
            raise ValueError("A cannot have scored the last point with alpha = 0")
        if self.last_scorer is Player.B and self.beta < 1:
            raise ValueError("B cannot have scored the last point with beta = 0")

    def mirrored(self) -> "ScoreEventQuery":
        """The same event described with the players' labels exchanged."""
        return ScoreEventQuery(self.beta, self.alpha, self.last_scorer.other(), self.first_server.other())


class ComponentIndexRange(NamedTuple):
    j_min: int
    j_max: int

    @property
    def empty(self) -> bool:
        return self.j_min > self.j_max

    def __iter__(self):
        return iter(range(self.j_min, self.j_max + 1))

    def __len__(self):
        return max(0, self.j_max - self.j_min + 1)


@lru_cache(maxsize=None)
def binom(n: int, k: int) -> float:
    """Binomial coefficient as a float; zero outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0.0
    return float(math.comb(n, k))


class _Layout(NamedTuple):
    a_serves: int
    b_serves: int
    last_server: Player


def _layout(total: int, m: int) -> _Layout:
    d = decompose(total, m)
    if d.R > 0:
        last = d.trailing_server
    else:
        # the last rally closes complete block K, odd blocks belong to A
        last = Player.A if d.K % 2 == 1 else Player.B
    a_serves = d.k1 * m + (d.R if d.trailing_server is Player.A else 0)
    return _Layout(a_serves, total - a_serves, last)


def index_range(query: ScoreEventQuery, m: int) -> ComponentIndexRange:
    """Feasible values of ``j`` for an A-set event, one branch per case of the
    Euclidean division ``alpha + beta = K*m + R`` and the last scorer."""
    if query.first_server is not Player.A:
        raise ValueError("index_range is defined for A-sets; mirror the query first")
    a = query.alpha
    d = decompose(a + query.beta, m)
    K, R = d.K, d.R
    hi = -(-K // 2) * m  # ceil(K/2) * m
    lo = (K // 2) * m  # floor(K/2) * m
    last_a = query.last_scorer is Player.A
    if R == 0 and K % 2 == 0:
        if last_a:
            return ComponentIndexRange(max(0, a - lo), min(a - 1, lo))
        return ComponentIndexRange(max(0, a - lo + 1), min(a, lo))
    if R == 0:
        if last_a:
            return ComponentIndexRange(max(1, a - lo), min(a, hi))
        return ComponentIndexRange(max(0, a - lo), min(a, hi - 1))
    if K % 2 == 0:
        if last_a:
            return ComponentIndexRange(max(1, a - lo), min(a, lo + R))
        return ComponentIndexRange(max(0, a - lo), min(a, lo + R - 1))
    if last_a:
        return ComponentIndexRange(max(0, a - lo - R), min(a - 1, hi))
    return ComponentIndexRange(max(0, a - lo - R + 1), min(a, hi))


def _component(alpha, total, last_a, j, p_a, p_b, m):
    sa, sb, last = _layout(total, m)
    delta = 1 if last_a else 0
    if last is Player.A:
        # the final rally is an A serve with a fixed outcome
        c = binom(sa - 1, j - delta) * binom(sb, alpha - j)
    else:
        c = binom(sa, j) * binom(sb - 1, alpha - j - delta)
    if c == 0.0:
        return 0.0 * p_a
    return (
        c
        * np.power(p_a, j)
        * np.power(1.0 - p_a, sa - j)
        * np.power(1.0 - p_b, alpha - j)
        * np.power(p_b, sb - alpha + j)
    )


def component_prob(query: ScoreEventQuery, j: int, model: RallyModel, m: int) -> float:
    """Probability of an A-set event with A winning exactly ``j`` rallies on own serve.

    Zero when ``j`` is outside :func:`index_range`.
    """
    r = index_range(query, m)
    if not r.j_min <= j <= r.j_max:
        return 0.0
    return float(_component(query.alpha, query.alpha + query.beta, query.last_scorer is Player.A,
                            j, model.p_a, model.p_b, m))


def event_prob(alpha: int, beta: int, last_scorer: Player, p_a, p_b, m: int):
    """Sum of the components over the feasible ``j`` for an A-set.

    ``p_a`` and ``p_b`` may be floats or broadcastable numpy arrays, which is
    what the likelihood grid search relies on.
    """
    q = ScoreEventQuery(alpha, beta, last_scorer)
    total = alpha + beta
    last_a = q.last_scorer is Player.A
    acc = 0.0 * np.asarray(p_a, dtype=float) * np.asarray(p_b, dtype=float)
    for j in index_range(q, m):
        acc = acc + _component(alpha, total, last_a, j, p_a, p_b, m)
    return acc


def score_prob(query: ScoreEventQuery, model: RallyModel, m: int) -> float:
    """Probability that a set passes through ``(alpha, beta)`` with the given
    last scorer, ignoring whether the set would already have ended."""
    if query.first_server is Player.B:
        query = query.mirrored()
        model = swap_roles(model)
    return float(event_prob(query.alpha, query.beta, query.last_scorer, model.p_a, model.p_b, m))


def no_server_score_prob(alpha: int, beta: int, last_scorer: Player, p: float) -> float:
    """Closed form when every rally is a Bernoulli(p) trial for A."""
    last_scorer = Player.parse(last_scorer)
    ScoreEventQuery(alpha, beta, last_scorer)
    k = alpha - 1 if last_scorer is Player.A else alpha
    return binom(alpha + beta - 1, k) * p**alpha * (1.0 - p) ** beta
