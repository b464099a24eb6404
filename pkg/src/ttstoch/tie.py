"""Play after the (n-1, n-1) tie: serve alternates and a two-point lead wins.

Every pair of post-tie rallies has one serve from each player, so it ends the
set for A with probability ``p_a (1 - p_b)``, for B with ``(1 - p_a) p_b``, and
otherwise returns to level with probability ``r``. Who serves first after the
tie does not matter.
"""

from __future__ import annotations

from typing import NamedTuple

from .core import RallyModel
from .pmf import Pmf


class TieNeverResolves(ArithmeticError):
    pass


class TieParameters(NamedTuple):
    win_pair_a: float
    win_pair_b: float
    r: float

    @classmethod
    def from_model(cls, model: RallyModel) -> "TieParameters":
        pa, pb = model.p_a, model.p_b
        return cls(pa * (1.0 - pb), (1.0 - pa) * pb, (1.0 - pa) * (1.0 - pb) + pa * pb)

    @property
    def resolve(self) -> float:
        """Probability that one pair of rallies ends the set."""
        return self.win_pair_a + self.win_pair_b

    @property
    def stuck(self) -> bool:
        return self.resolve == 0.0


def _params(model: RallyModel) -> TieParameters:
    t = TieParameters.from_model(model)
    if t.stuck:
        raise TieNeverResolves("tie never resolves: every post-tie pair is split")
    return t


def tie_win_probs(model: RallyModel) -> tuple[float, float]:
    """Probabilities that A and B win the set from the tie."""
    if not model.server_dependent:
        p = model.p
        den = 1.0 - 2.0 * p * (1.0 - p)
        return p * p / den, (1.0 - p) ** 2 / den
    t = _params(model)
    s = t.resolve
    return t.win_pair_a / s, t.win_pair_b / s


def tie_extra_duration_pmf(model: RallyModel, ell: int) -> float:
    """Probability that exactly ``2 * ell`` rallies follow the tie."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    t = TieParameters.from_model(model)
    return t.resolve * t.r ** (ell - 1)


def tie_extra_moments(model: RallyModel) -> tuple[float, float]:
    """Mean and variance of the number of post-tie rallies."""
    t = _params(model)
    q = t.resolve
    return 2.0 / q, 4.0 * t.r / (q * q)


def tie_extra_pmf(model: RallyModel, threshold: float = 1e-12, max_pairs: int = 1_000_000) -> Pmf:
    """Materialize the post-tie rally count until the tail mass drops below ``threshold``."""
    t = _params(model)
    masses = {}
    tail = 1.0
    ell = 0
    while tail >= threshold and ell < max_pairs:
        ell += 1
        masses[2 * ell] = t.resolve * t.r ** (ell - 1)
        tail = t.r**ell
    return Pmf(masses, tail)
