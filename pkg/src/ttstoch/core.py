"""Domain types shared by every module: scoring rules, rally models, players."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Player(enum.Enum):
    A = "A"
    B = "B"

    def other(self) -> "Player":
        return Player.B if self is Player.A else Player.A

    @classmethod
    def parse(cls, value: "Player | str") -> "Player":
        if isinstance(value, Player):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"player must be 'A' or 'B', got {value!r}") from None


class Phase(enum.Enum):
    PRE_TIE = "pre-tie"
    TIE = "tie"


@dataclass(frozen=True)
class ScoringSystem:
    """The (m, n, G) rules: serve blocks of ``m``, ``n`` points per set, ``G`` sets per match."""

    m: int
    n: int
    G: int = 1

    def __post_init__(self):
        for name in ("m", "n", "G"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError(f"{name} must be an int, got {v!r}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.G < 1:
            raise ValueError(f"G must be >= 1, got {self.G}")

    @property
    def m_divides_n_minus_1(self) -> bool:
        return (self.n - 1) % self.m == 0

    @property
    def tie_rallies(self) -> int:
        """Number of rallies played when the score reaches (n-1, n-1)."""
        return 2 * (self.n - 1)

    def __str__(self):
        return f"({self.m},{self.n},{self.G})"


def _check_prob(name: str, v: float) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


@dataclass(frozen=True)
class RallyModel:
    """Per-rally win probabilities.

    ``p_a`` is the chance A wins a rally A serves, ``p_b`` the chance B wins a
    rally B serves. The no-server model stores ``p_a = p`` and ``p_b = 1 - p``.
    """

    p_a: float
    p_b: float
    server_dependent: bool = True

    def __post_init__(self):
        object.__setattr__(self, "p_a", _check_prob("p_a", self.p_a))
        object.__setattr__(self, "p_b", _check_prob("p_b", self.p_b))
        if not self.server_dependent and self.p_a + self.p_b != 1.0:
            raise ValueError("a no-server model needs p_a + p_b == 1")

    @classmethod
    def server(cls, p_a: float, p_b: float) -> "RallyModel":
        return cls(p_a, p_b, True)

    @classmethod
    def no_server(cls, p: float) -> "RallyModel":
        p = _check_prob("p", p)
        # p + (1 - p) == 1 holds exactly in binary64 for every p in [0, 1]
        return cls(p, 1.0 - p, False)

    @property
    def p(self) -> float:
        """A's rally-win probability in the no-server model."""
        if self.server_dependent:
            raise AttributeError("p is only defined for a no-server model")
        return self.p_a

    @property
    def is_degenerate(self) -> bool:
        return self.p_a in (0.0, 1.0) or self.p_b in (0.0, 1.0)

    def a_wins_rally(self, server: Player) -> float:
        """Probability A wins a rally served by ``server``."""
        return self.p_a if server is Player.A else 1.0 - self.p_b


def swap_roles(model: RallyModel) -> RallyModel:
    """View the model from B's side of the table."""
    return RallyModel(model.p_b, model.p_a, model.server_dependent)


@dataclass(frozen=True)
class ScoreState:
    alpha: int
    beta: int
    phase: Phase = Phase.PRE_TIE

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("scores must be non-negative")

    def check(self, system: ScoringSystem) -> None:
        """Raise if the state cannot occur as a live score under ``system``."""
        n = system.n
        if self.phase is Phase.PRE_TIE:
            if not (self.alpha <= n - 1 or self.beta <= n - 1):
                raise ValueError(f"pre-tie state {self.alpha}-{self.beta} impossible for n={n}")
        else:
            if self.alpha < n - 1 or self.beta < n - 1 or abs(self.alpha - self.beta) > 1:
                raise ValueError(f"tie state {self.alpha}-{self.beta} impossible for n={n}")

    def is_terminal(self, system: ScoringSystem) -> bool:
        n = system.n
        hi, lo = max(self.alpha, self.beta), min(self.alpha, self.beta)
        if lo <= n - 2:
            return hi >= n
        return hi - lo >= 2


@dataclass
class ValidationReport:
    ok: bool = True
    warnings: list[str] = field(default_factory=list)


def validate(system: ScoringSystem, model: RallyModel) -> ValidationReport:
    """Check a system/model pair. Errors raise; soft problems become warnings."""
    if not isinstance(system, ScoringSystem) or not isinstance(model, RallyModel):
        raise TypeError("validate expects a ScoringSystem and a RallyModel")
    report = ValidationReport()
    if not system.m_divides_n_minus_1:
        report.warnings.append(
            f"(n-1) mod m = {(system.n - 1) % system.m}: set-win probability "
            "depends on who serves first"
        )
    if model.is_degenerate:
        report.warnings.append("degenerate model: a rally probability is exactly 0 or 1")
    return report
