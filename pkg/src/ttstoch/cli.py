"""Command-line front end.

Every subcommand writes a header block echoing its full configuration, then
the data rows. CSV headers are ``#`` comment lines; JSON-lines output opens
with a ``{"run_config": ...}`` record. Output goes to stdout or, with
``--out``, to a file that is only replaced once it is complete.

Exit codes: 0 success, 2 usage error, 3 numeric or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from decimal import Decimal

from . import __version__
from .core import Player, RallyModel, ScoringSystem, validate
from .estimation import InsufficientData, ScoreObservation, ServeCountData, mle_from_scores, mle_serve_counts
from .match import MatchQuery, compare_systems, match_duration_moments, match_duration_pmf, match_win_prob
from .oracle import RallyCapExceeded, SimConfig, simulate_match, simulate_set
from .setstats import (
    DEFAULT_TRUNCATION,
    duration_moments,
    duration_pmf,
    final_score_distribution,
    set_win_probs,
)
from .tie import TieNeverResolves

EXIT_USAGE = 2
EXIT_DOMAIN = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing


def parse_range(text: str) -> list[float]:
    """``0.3`` -> [0.3]; ``0.1:0.5:0.1`` -> [0.1, 0.2, 0.3, 0.4, 0.5] (inclusive)."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            lo, hi, step = (Decimal(p) for p in parts)
            if step <= 0:
                raise UsageError(f"range step must be positive: {text!r}")
            count = int((hi - lo) / step + Decimal("1e-9")) + 1
            return [float(lo + i * step) for i in range(count)]
    except ArithmeticError:
        pass
    except ValueError:
        pass
    raise UsageError(f"expected a number or lo:hi:step, got {text!r}")


def parse_system(text: str) -> ScoringSystem:
    try:
        m, n, G = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected m,n,G, got {text!r}") from None
    return ScoringSystem(m, n, G)


def _models(args) -> list[RallyModel]:
    if args.p is not None:
        if args.pa is not None or args.pb is not None or args.grid is not None:
            raise UsageError("--p (no-server model) excludes --pa/--pb/--grid")
        return [RallyModel.no_server(p) for p in parse_range(args.p)]
    if args.grid is not None:
        if args.pa is not None or args.pb is not None:
            raise UsageError("--grid excludes --pa/--pb")
        step = Decimal(args.grid)
        if not 0 < step < 1:
            raise UsageError("--grid step must lie in (0, 1)")
        axis = parse_range(f"{step}:{1 - step}:{step}")
        return [RallyModel.server(a, b) for a in axis for b in axis]
    if args.pa is None or args.pb is None:
        raise UsageError("give --pa and --pb, --grid, or --p")
    return [RallyModel.server(a, b) for a in parse_range(args.pa) for b in parse_range(args.pb)]


def _system(args) -> ScoringSystem:
    return ScoringSystem(args.m, args.n, args.G)


# ---------------------------------------------------------------- output


class Emitter:
    def __init__(self, args, config: dict):
        self.fmt = args.format
        self.precision = args.precision
        self.config = config
        self.buf = io.StringIO()
        self.columns: list[str] = []

    def num(self, v):
        if isinstance(v, float):
            if math.isnan(v) or math.isinf(v):
                return str(v)
            return f"{v:.{self.precision}g}"
        return v

    def header(self, columns: list[str]):
        self.columns = columns
        if self.fmt == "csv":
            for k, v in self.config.items():
                self.buf.write(f"# {k}={v}\n")
            csv.writer(self.buf, lineterminator="\n").writerow(columns)
        else:
            self.buf.write(json.dumps({"run_config": self.config}, sort_keys=True) + "\n")

    def row(self, values):
        values = [self.num(v) for v in values]
        if self.fmt == "csv":
            csv.writer(self.buf, lineterminator="\n").writerow(values)
        else:
            rec = {c: (float(v) if isinstance(v, str) and _is_number(v) else v) for c, v in zip(self.columns, values)}
            self.buf.write(json.dumps(rec) + "\n")

    def text(self) -> str:
        return self.buf.getvalue()


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(out))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config(args) -> dict:
    cfg = {"tool": "ttstoch", "version": __version__}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "out"):
            continue
        cfg[k] = v
    return cfg


# ---------------------------------------------------------------- commands


def cmd_set_prob(args) -> str:
    system = _system(args)
    fs = Player.parse(args.first_server)
    em = Emitter(args, _config(args))
    em.header(["m", "n", "p_a", "p_b", "first_server", "win_prob", "mean_duration", "var_duration"])
    for model in _models(args):
        validate(system, model)
        win = set_win_probs(system, model, fs)[0]
        mean, var = duration_moments(system, model, fs)
        em.row([system.m, system.n, model.p_a, model.p_b, fs.value, win, mean, var])
    return em.text()


def cmd_match_prob(args) -> str:
    system = _system(args)
    fs = Player.parse(args.first_server)
    em = Emitter(args, _config(args))
    em.header(["m", "n", "G", "p_a", "p_b", "first_server", "win_prob", "mean_duration", "var_duration"])
    for model in _models(args):
        validate(system, model)
        q = MatchQuery(system, model, fs)
        mean, var = match_duration_moments(q)
        em.row([system.m, system.n, system.G, model.p_a, model.p_b, fs.value, match_win_prob(q), mean, var])
    return em.text()


def _single_model(args) -> RallyModel:
    models = _models(args)
    if len(models) != 1:
        raise UsageError("this command takes a single parameter point")
    return models[0]


def cmd_score_dist(args) -> str:
    system = _system(args)
    model = _single_model(args)
    fs = Player.parse(args.first_server)
    dist = final_score_distribution(system, model, fs, args.truncation)
    em = Emitter(args, _config(args))
    em.header(["winner", "loser_points", "score_a", "score_b", "probability"])
    for (winner, k), v in sorted(dist.probs.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        a, b = dist.score(winner, k)
        em.row([winner.value, k, a, b, v])
    em.row(["tail", "", "", "", dist.tail])
    return em.text()


def cmd_duration_dist(args) -> str:
    system = _system(args)
    model = _single_model(args)
    fs = Player.parse(args.first_server)
    if args.match:
        pmf = match_duration_pmf(MatchQuery(system, model, fs), args.truncation)
    else:
        pmf = duration_pmf(system, model, fs, args.truncation)
    em = Emitter(args, _config(args))
    em.header(["rallies", "probability"])
    top = max(pmf.masses) if pmf.masses else 0
    for d in range(0, top + 1):
        em.row([d, pmf[d]])
    em.row(["tail", pmf.tail])
    return em.text()


def _compare_models(args) -> list[RallyModel]:
    if args.no_server:
        if args.p is None and args.grid_p is None:
            raise UsageError("--no-server needs --p or a range in --grid")
        return [RallyModel.no_server(p) for p in parse_range(args.p or args.grid_p)]
    return _models(args)


def cmd_compare(args) -> str:
    old, new = parse_system(args.old), parse_system(args.new)
    fs = Player.parse(args.first_server)
    em = Emitter(args, _config(args))
    em.header(["p_a", "p_b", "win_prob_old", "win_prob_new", "mean_old", "mean_new", "ratio_mean",
               "std_old", "std_new", "ratio_std"])
    for r in compare_systems(old, new, _compare_models(args), fs):
        em.row([r.model.p_a, r.model.p_b, r.win_prob_old, r.win_prob_new, r.mean_old, r.mean_new,
                r.ratio_mean, r.std_old, r.std_new, r.ratio_std])
    return em.text()


def cmd_simulate(args) -> str:
    system = _system(args)
    model = _single_model(args)
    cfg = SimConfig(args.trials, args.seed, system, model, Player.parse(args.first_server),
                    args.rally_cap, args.workers)
    summary = simulate_match(cfg) if args.match else simulate_set(cfg)
    config = _config(args)
    config.pop("workers", None)  # results do not depend on it
    return json.dumps({"run_config": config, "summary": summary.to_dict()}, sort_keys=True, indent=1) + "\n"


TALLY_KEYS = ("a_sw", "a_s", "b_sw", "b_s")


def read_observations(path: str):
    """Parse an estimate input file; returns (score observations, tallies or None)."""
    scores, tallies = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
                system = ScoringSystem(int(rec["m"]), int(rec["n"]), int(rec.get("G", 1)))
                scores.append(ScoreObservation(system, rec.get("first_server", "A"),
                                               int(rec["score_a"]), int(rec["score_b"])))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad observation: {exc}") from None
            present = [k in rec for k in TALLY_KEYS]
            if any(present) and not all(present):
                raise ValueError(f"{path}:{lineno}: serve tallies need all of {', '.join(TALLY_KEYS)}")
            tallies.append(ServeCountData(*(int(rec[k]) for k in TALLY_KEYS)) if all(present) else None)
    if not scores:
        raise InsufficientData(f"{path}: no observations")
    have = [t is not None for t in tallies]
    if any(have) and not all(have):
        raise ValueError(f"{path}: either every record carries serve tallies or none does")
    return scores, (tallies if all(have) else None)


def cmd_estimate(args) -> str:
    scores, tallies = read_observations(args.input)
    config = _config(args)
    if tallies is not None:
        pooled = tallies[0]
        for t in tallies[1:]:
            pooled = pooled + t
        est = mle_serve_counts(pooled)
        result = {"estimator": "serve-counts", "p_a": est.p_a, "p_b": est.p_b, "se_a": est.se_a,
                  "se_b": est.se_b, "warnings": list(est.warnings), "observations": len(tallies)}
    else:
        res = mle_from_scores(scores, step=args.step, no_server=args.no_server)
        result = {"estimator": "score-likelihood", "p_a": res.p_a, "p_b": res.p_b,
                  "log_likelihood": res.log_likelihood, "grid_best": list(res.grid_best),
                  "grid_log_likelihood": res.grid_log_likelihood, "tied_grid_points": res.tied_points,
                  "at_boundary": res.at_boundary, "observations": len(scores)}
    return json.dumps({"run_config": config, "estimate": result}, sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------- wiring


def _add_common(p, models=True):
    p.add_argument("--m", type=int, default=2, help="consecutive serves per turn")
    p.add_argument("--n", type=int, default=11, help="points to win a set")
    p.add_argument("--G", type=int, default=1, help="sets to win a match")
    p.add_argument("--first-server", default="A", choices=["A", "B"])
    if models:
        p.add_argument("--pa", help="P(A wins own serve): value or lo:hi:step")
        p.add_argument("--pb", help="P(B wins own serve): value or lo:hi:step")
        p.add_argument("--p", help="no-server model: P(A wins a rally), value or lo:hi:step")
        p.add_argument("--grid", help="step s: sweep p_a and p_b over s, 2s, ..., 1-s")
    _add_output(p)


def _add_output(p):
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--precision", type=int, default=6, help="significant digits")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--truncation", type=float, default=DEFAULT_TRUNCATION, help="tail mass left out of pmfs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ttstoch", description="Exact probabilities for (m, n, G) scoring.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("set-prob", help="set-win probability and duration moments")
    _add_common(p)
    p.set_defaults(func=cmd_set_prob)

    p = sub.add_parser("match-prob", help="match-win probability and duration moments")
    _add_common(p)
    p.set_defaults(func=cmd_match_prob)

    p = sub.add_parser("score-dist", help="final score distribution of a set")
    _add_common(p)
    p.set_defaults(func=cmd_score_dist)

    p = sub.add_parser("duration-dist", help="distribution of the number of rallies")
    _add_common(p)
    p.add_argument("--match", action="store_true", help="whole match instead of one set")
    p.set_defaults(func=cmd_duration_dist)

    p = sub.add_parser("compare", help="compare two scoring systems over a parameter grid")
    p.add_argument("--old", required=True, help="m,n,G")
    p.add_argument("--new", required=True, help="m,n,G")
    p.add_argument("--first-server", default="A", choices=["A", "B"])
    p.add_argument("--no-server", action="store_true", help="use p_a = 1 - p_b = p")
    p.add_argument("--pa")
    p.add_argument("--pb")
    p.add_argument("--p")
    p.add_argument("--grid", dest="grid_p", help="with --no-server: p range lo:hi:step")
    _add_output(p)
    p.set_defaults(func=cmd_compare, grid=None)

    p = sub.add_parser("simulate", help="seeded Monte Carlo of sets or matches (JSON)")
    _add_common(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--match", action="store_true")
    p.add_argument("--rally-cap", type=int, default=1_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate (p_a, p_b) from an observation file (JSON)")
    p.add_argument("input", help="JSON-lines file of finished sets")
    p.add_argument("--step", type=float, default=0.01, help="likelihood grid step")
    p.add_argument("--no-server", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (ValueError, ArithmeticError, TieNeverResolves, RallyCapExceeded, OSError) as exc:
        print(f"ttstoch: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    _write(text, args.out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
