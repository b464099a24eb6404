"""A finite probability mass function with explicit truncation bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Pmf:
    """Mass over integer outcomes; ``tail`` is the probability left out beyond
    the last materialized outcome."""

    masses: dict[int, float] = field(default_factory=dict)
    tail: float = 0.0

    def total(self) -> float:
        return math.fsum(self.masses.values())

    def __getitem__(self, k: int) -> float:
        return self.masses.get(k, 0.0)

    def support(self) -> list[int]:
        return sorted(k for k, v in self.masses.items() if v > 0.0)

    def items(self):
        return sorted(self.masses.items())

    def moments(self) -> tuple[float, float]:
        """Mean and variance of the materialized part, renormalized."""
        tot = self.total()
        mean = math.fsum(k * v for k, v in self.masses.items()) / tot
        var = math.fsum((k - mean) ** 2 * v for k, v in self.masses.items()) / tot
        return mean, var


def convolve(a: Pmf, b: Pmf) -> Pmf:
    """Law of the sum of two independent variables; tails add up to first order."""
    out: dict[int, float] = {}
    for i, x in a.masses.items():
        if x == 0.0:
            continue
        for j, y in b.masses.items():
            out[i + j] = out.get(i + j, 0.0) + x * y
    ta, tb = a.tail, b.tail
    # mass lost when either factor is truncated: 1 - (1-ta)(1-tb)
    return Pmf(out, ta + tb - ta * tb)
