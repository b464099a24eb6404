"""Independent checks on the closed forms: a seeded Monte Carlo simulator and
an exact dynamic program over score states.

Neither uses the combinatorial formulas; both play the rules rally by rally.

Random numbers come from numpy's PCG64. Trials are split into fixed chunks of
``CHUNK`` and chunk ``i`` draws from ``SeedSequence(seed, spawn_key=(i,))``,
so results depend only on (seed, trials), not on how chunks are scheduled.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Phase, Player, RallyModel, ScoreState, ScoringSystem
from .serve import server_of_rally

CHUNK = 100_000
DEFAULT_RALLY_CAP = 1_000_000


class RallyCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int
    system: ScoringSystem
    model: RallyModel
    first_server: Player = Player.A
    rally_cap: int = DEFAULT_RALLY_CAP
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "first_server", Player.parse(self.first_server))


@dataclass
class SimSummary:
    trials: int
    wins_a: int
    mean_duration: float
    duration_histogram: dict[int, int]
    final_score_histogram: dict[tuple[int, int], int]
    # player -> (points won on own serve, own serves)
    serve_tallies: dict[Player, tuple[int, int]] = field(default_factory=dict)

    @property
    def win_rate(self) -> float:
        return self.wins_a / self.trials

    def duration_std(self) -> float:
        n = sum(self.duration_histogram.values())
        var = sum(c * (d - self.mean_duration) ** 2 for d, c in self.duration_histogram.items()) / n
        return math.sqrt(var)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "wins_a": self.wins_a,
            "win_rate": self.win_rate,
            "mean_duration": self.mean_duration,
            "duration_histogram": {str(k): v for k, v in sorted(self.duration_histogram.items())},
            "final_score_histogram": {f"{a}-{b}": v for (a, b), v in sorted(self.final_score_histogram.items())},
            "serve_tallies": {p.value: {"won": w, "served": s} for p, (w, s) in sorted(
                self.serve_tallies.items(), key=lambda kv: kv[0].value)},
        }


class _Chunk:
    """Raw per-trial arrays for one chunk of simulated sets or matches."""

    def __init__(self, size: int):
        self.a_won = np.zeros(size, dtype=bool)
        self.duration = np.zeros(size, dtype=np.int64)
        self.score_a = np.zeros(size, dtype=np.int64)
        self.score_b = np.zeros(size, dtype=np.int64)
        self.tallies = np.zeros(4, dtype=np.int64)  # A won, A served, B won, B served


def _play_sets(rng, system: ScoringSystem, model: RallyModel, first_server: Player, size: int, cap: int):
    """Play ``size`` independent sets in lockstep; the server depends only on the rally index."""
    n = system.n
    tie_at = system.tie_rallies
    a = np.zeros(size, dtype=np.int64)
    b = np.zeros(size, dtype=np.int64)
    live = np.arange(size)
    duration = np.zeros(size, dtype=np.int64)
    tallies = np.zeros(4, dtype=np.int64)
    t = 0
    while live.size:
        t += 1
        if t > cap:
            raise RallyCapExceeded(f"a set exceeded {cap} rallies")
        server = server_of_rally(t, system, first_server, tie_at if t > tie_at else None)
        p_a_wins = model.a_wins_rally(server)
        u = rng.random(live.size)
        a_point = u < p_a_wins
        a[live] += a_point
        b[live] += ~a_point
        won = int(a_point.sum())
        if server is Player.A:
            tallies[0] += won
            tallies[1] += live.size
        else:
            tallies[2] += live.size - won
            tallies[3] += live.size
        la, lb = a[live], b[live]
        done = ((la >= n) | (lb >= n)) & (np.abs(la - lb) >= 2)
        if done.any():
            duration[live[done]] = t
            live = live[~done]
    return a, b, duration, tallies


def _run_chunk(cfg: SimConfig, index: int, size: int, sets: bool) -> _Chunk:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(index,)))
    out = _Chunk(size)
    if sets:
        a, b, d, tal = _play_sets(rng, cfg.system, cfg.model, cfg.first_server, size, cfg.rally_cap)
        out.a_won, out.duration, out.score_a, out.score_b, out.tallies = a > b, d, a, b, tal
        return out
    G = cfg.system.G
    live = np.arange(size)
    k = 0
    while live.size:
        server = cfg.first_server if k % 2 == 0 else cfg.first_server.other()
        a, b, d, tal = _play_sets(rng, cfg.system, cfg.model, server, live.size, cfg.rally_cap)
        out.duration[live] += d
        out.score_a[live] += a > b
        out.score_b[live] += b > a
        out.tallies += tal
        finished = (out.score_a[live] == G) | (out.score_b[live] == G)
        live = live[~finished]
        k += 1
    out.a_won = out.score_a == G
    return out


def _simulate(cfg: SimConfig, sets: bool) -> SimSummary:
    sizes = [min(CHUNK, cfg.trials - s) for s in range(0, cfg.trials, CHUNK)]
    jobs = list(enumerate(sizes))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            chunks = list(ex.map(lambda job: _run_chunk(cfg, job[0], job[1], sets), jobs))
    else:
        chunks = [_run_chunk(cfg, i, s, sets) for i, s in jobs]
    dur = np.concatenate([c.duration for c in chunks])
    sa = np.concatenate([c.score_a for c in chunks])
    sb = np.concatenate([c.score_b for c in chunks])
    tal = sum(c.tallies for c in chunks)
    return SimSummary(
        trials=cfg.trials,
        wins_a=int(sum(int(c.a_won.sum()) for c in chunks)),
        mean_duration=float(dur.mean()),
        duration_histogram=dict(sorted(Counter(dur.tolist()).items())),
        final_score_histogram=dict(sorted(Counter(zip(sa.tolist(), sb.tolist())).items())),
        serve_tallies={Player.A: (int(tal[0]), int(tal[1])), Player.B: (int(tal[2]), int(tal[3]))},
    )


def simulate_set(cfg: SimConfig) -> SimSummary:
    """Monte Carlo over independent sets opened by ``cfg.first_server``."""
    return _simulate(cfg, sets=True)


def simulate_match(cfg: SimConfig) -> SimSummary:
    """Monte Carlo over matches; the final-score histogram counts set scores."""
    return _simulate(cfg, sets=False)


# ---------------------------------------------------------------- exact DP


def dp_score_events(model: RallyModel, m: int, max_points: int, first_server: Player = Player.A):
    """Forward pass of the unstopped rally process with blocks of ``m`` serves.

    Returns ``{(alpha, beta): (P[reach via A's point], P[reach via B's point])}``
    for alpha, beta <= ``max_points``.
    """
    first_server = Player.parse(first_server)
    big = ScoringSystem(m, 2 * max_points + 2)  # large enough that no tie interferes
    reach = {(0, 0): 1.0}
    split: dict[tuple[int, int], tuple[float, float]] = {}
    for total in range(2 * max_points):
        x = model.a_wins_rally(server_of_rally(total + 1, big, first_server))
        for a in range(max(0, total - max_points), min(total, max_points) + 1):
            mass = reach.get((a, total - a), 0.0)
            b = total - a
            if a + 1 <= max_points:
                via_a, via_b = split.get((a + 1, b), (0.0, 0.0))
                split[(a + 1, b)] = (via_a + mass * x, via_b)
            if b + 1 <= max_points:
                via_a, via_b = split.get((a, b + 1), (0.0, 0.0))
                split[(a, b + 1)] = (via_a, via_b + mass * (1.0 - x))
        for a in range(max(0, total + 1 - max_points), min(total + 1, max_points) + 1):
            s = split.get((a, total + 1 - a))
            if s is not None:
                reach[(a, total + 1 - a)] = s[0] + s[1]
    return split


@dataclass
class DpTable:
    """Exact per-state results for one set.

    ``entries`` maps every pre-tie live state and every regular finishing
    score to (reach probability, A's win probability from there).
    ``reach_split`` splits reach probabilities by last scorer;
    ``absorbed_by_rally[t]`` is the mass of sets finished within t rallies.
    """

    system: ScoringSystem
    entries: dict[ScoreState, tuple[float, float]]
    reach_split: dict[tuple[int, int], tuple[float, float]]
    absorbed_by_rally: list[float]
    live_by_rally: list[float]

    def value(self, alpha: int, beta: int) -> float:
        return self.entries[ScoreState(alpha, beta)][1]

    def reach(self, alpha: int, beta: int) -> float:
        return self.entries[ScoreState(alpha, beta)][0]


def tie_level_value(x_first: float, x_second: float) -> float:
    """A's chance from a level post-tie score when A wins the next two rallies
    with probabilities ``x_first`` and ``x_second``.

    From level: L = x0 U + (1-x0) W, with U = x1 + (1-x1) L and W = x1 L.
    """
    den = 1.0 - x_first * (1.0 - x_second) - (1.0 - x_first) * x_second
    if den == 0.0:
        return math.nan
    return x_first * x_second / den


def dp_set_table(system: ScoringSystem, model: RallyModel, first_server: Player = Player.A) -> DpTable:
    first_server = Player.parse(first_server)
    n = system.n
    tie_at = system.tie_rallies
    x0 = model.a_wins_rally(server_of_rally(tie_at + 1, system, first_server, tie_at))
    x1 = model.a_wins_rally(server_of_rally(tie_at + 2, system, first_server, tie_at))

    def terminal(a, b):
        return (a == n and b <= n - 2) or (b == n and a <= n - 2)

    # forward
    reach = {(0, 0): 1.0}
    split: dict[tuple[int, int], tuple[float, float]] = {}
    absorbed, live = [0.0], [1.0]
    for total in range(tie_at):
        x = model.a_wins_rally(server_of_rally(total + 1, system, first_server))
        for a in range(total + 1):
            b = total - a
            mass = reach.get((a, b))
            if mass is None or terminal(a, b):
                continue
            sa = split.get((a + 1, b), (0.0, 0.0))
            split[(a + 1, b)] = (sa[0] + mass * x, sa[1])
            sb = split.get((a, b + 1), (0.0, 0.0))
            split[(a, b + 1)] = (sb[0], sb[1] + mass * (1.0 - x))
        for a in range(total + 2):
            if (a, total + 1 - a) in split:
                s = split[(a, total + 1 - a)]
                reach[(a, total + 1 - a)] = s[0] + s[1]
        t = total + 1
        absorbed.append(math.fsum(v for (a, b), v in reach.items() if terminal(a, b) and a + b <= t))
        live.append(math.fsum(v for (a, b), v in reach.items() if a + b == t and not terminal(a, b)))

    # backward
    value: dict[tuple[int, int], float] = {}
    for (a, b) in reach:
        if terminal(a, b):
            value[(a, b)] = 1.0 if a == n else 0.0
    value[(n - 1, n - 1)] = tie_level_value(x0, x1)
    for total in range(tie_at - 1, -1, -1):
        x = model.a_wins_rally(server_of_rally(total + 1, system, first_server))
        for a in range(total + 1):
            b = total - a
            if a > n - 1 or b > n - 1:
                continue
            up, down = value[(a + 1, b)], value[(a, b + 1)]
            value[(a, b)] = (x * up if x != 0.0 else 0.0) + ((1.0 - x) * down if x != 1.0 else 0.0)

    entries = {}
    for (a, b), v in value.items():
        entries[ScoreState(a, b, Phase.PRE_TIE)] = (reach.get((a, b), 0.0), v)
    return DpTable(system, entries, split, absorbed, live)
