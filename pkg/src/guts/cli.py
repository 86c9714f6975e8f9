"""Command-line front end.

Every subcommand writes a JSON report to stdout (or ``--out``) and,
where it produces a table, a CSV file via ``--csv``.  Exit codes: 0 on
success, 1 when ``verify`` finds a failing check, 2 on input errors and
3 on unsupported configurations.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import continuous as cg
from . import discrete as dg
from ._grid import grid
from .exceptions import GutsError, InputError, UnsupportedConfigurationError
from .montecarlo import (
    RecursiveSimConfig,
    RoundRules,
    estimate_stage_payoff,
    estimate_total_return,
)
from .recursive import MatrixGamePair, value_map_iterate

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNSUPPORTED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting so codes stay uniform."""

    def error(self, message):
        raise InputError(f"{self.format_usage().strip()}\n{self.prog}: {message}")


# ---------------------------------------------------------------- formatting


def _fmt(x):
    """Round floats to 9 significant digits, recursively."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.9g}")
    if isinstance(x, dict):
        return {str(k): _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_fmt(v) for v in x]
    return x


def _report(command: str, params: dict, results: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "parameters": _fmt(params),
        "results": _fmt(results),
    }


def _csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(f"{float(v):.9g}")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- argument types


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _sweep(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI:STEP, got {text!r}")
    if not (step > 0 and hi >= lo):
        raise argparse.ArgumentTypeError("sweep needs STEP > 0 and HI >= LO")
    return lo, hi, step


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


# ---------------------------------------------------------------- commands


def cmd_value(args):
    try:
        text = Path(args.game).read_text()
    except OSError as exc:
        raise InputError(f"cannot read game file: {exc}") from None
    game = MatrixGamePair.from_json(text)
    directions = ["lower", "upper"] if args.direction == "both" else [args.direction]
    traces = {d: value_map_iterate(game, d, args.n_max, args.tol) for d in directions}
    results = {
        d: {"limit": tr.limit, "iterations": len(tr.values) - 1,
            "converged": tr.converged, "residual": tr.residual}
        for d, tr in traces.items()
    }
    csv = None
    if args.csv:
        if len(traces) == 1:
            csv = next(iter(traces.values())).to_csv()
        else:
            rows = [(d, k, v) for d, tr in traces.items() for k, v in enumerate(tr.values)]
            csv = _csv(["direction", "n", "V_n"], rows)
    params = {"game": args.game, "direction": args.direction, "n_max": args.n_max,
              "tol": args.tol, "t": game.t, "shape": list(game.shape)}
    return params, results, csv


def cmd_payoff(args):
    ts = args.profile
    if len(ts) != args.players:
        raise InputError(f"--profile has {len(ts)} entries, expected {args.players}")
    sp, evaluator = cg.stage_payoff(ts, weenie=args.weenie)
    params = {"players": args.players, "profile": ts, "weenie": args.weenie}
    return params, {"alpha": sp.alpha, "beta": sp.beta, "evaluator": evaluator}, None


def cmd_best_response(args):
    if args.players == 2:
        rep = cg.best_response2(args.p1)
    else:
        rep = cg.best_response3(args.p1)
    results = {"value": rep.value, "minimizer": list(rep.minimizer), "branch": rep.branch,
               "formula_value": rep.formula_value}
    return {"players": args.players, "p1": args.p1}, results, None


def cmd_bloc(args):
    if args.weenie:
        sp = cg.weenie_bloc(args.n, args.p1, args.p2)
        opt = cg.weenie_threshold(args.n)
    else:
        sp = cg.bloc_n(args.n, args.p1, args.p2)
        opt = cg.symmetric_threshold(args.n)
    results = {"alpha": sp.alpha, "beta": sp.beta, "optimal_threshold": opt}
    if not args.weenie:
        results["slope_at_p2"] = cg.bloc_slope(args.n, args.p2)
        results["delta"] = cg.bloc_delta(args.n, args.p1, args.p2)
    return {"n": args.n, "p1": args.p1, "p2": args.p2, "weenie": args.weenie}, results, None


def cmd_coalition(args):
    mix = cg.coalition(args.n, args.eps, args.delta, args.C)
    lo, hi, step = args.sweep
    for v in (lo, hi):
        if not 0.0 <= v <= 1.0:
            raise InputError("sweep bounds must lie in [0, 1]")
    ps = grid(lo, hi, step)
    pay = [cg.mixed_stage_payoff(args.n, mix, p) for p in ps]
    alpha = np.array([x.alpha for x in pay])
    beta = np.array([x.beta for x in pay])
    k = int(np.argmax(alpha))
    results = {
        "atoms": [{"opponents": list(opp), "weight": w} for opp, w in mix.atoms],
        "points": len(ps),
        "max_alpha": float(alpha[k]),
        "argmax_p1": float(ps[k]),
        "beta_max": float(beta.max()),
    }
    csv = _csv(["p1", "alpha", "beta"], zip(ps, alpha, beta)) if args.csv else None
    params = {"n": args.n, "eps": args.eps, "delta": args.delta, "C": args.C,
              "sweep": list(args.sweep)}
    return params, results, csv


def cmd_simulate(args):
    if args.discrete:
        rules = RoundRules(args.players, args.weenie, "discrete", args.deck_size, args.cards)
        profile = []
        for v in args.profile:
            if v != int(v):
                raise InputError("discrete thresholds must be integer hand indices")
            profile.append(int(v))
    else:
        rules = RoundRules(args.players, args.weenie)
        profile = args.profile
    if len(profile) != args.players:
        raise InputError(f"--profile has {len(profile)} entries, expected {args.players}")
    params = {"players": args.players, "profile": profile, "samples": args.samples,
              "seed": args.seed, "weenie": args.weenie, "discrete": args.discrete}
    if args.discrete:
        params.update(cards=args.cards, deck_size=args.deck_size)
    if args.total:
        cfg = RecursiveSimConfig(args.max_rounds, args.t, args.seed)
        est = estimate_total_return(rules, profile, cfg, args.samples)
        params.update(max_rounds=args.max_rounds, t=args.t)
        results = {"total": {"mean": est.mean, "stderr": est.stderr, "samples": est.samples,
                             "truncated_fraction": est.truncated_fraction}}
    else:
        if args.samples < 1000:
            raise InputError("--samples must be at least 1000 for stage estimates")
        a, b = estimate_stage_payoff(rules, profile, args.samples, args.seed)
        results = {
            "alpha": {"mean": a.mean, "stderr": a.stderr, "samples": a.samples},
            "beta": {"mean": b.mean, "stderr": b.stderr, "samples": b.samples},
        }
    return params, results, None


def cmd_discrete_solve(args):
    params = {"cards": args.cards, "deck_size": args.deck_size}
    if args.cards == 1:
        opt = dg.optimal_1card(args.deck_size)
        names = [str(dg.Card.from_index(i)) if args.deck_size == 52 else str(i) for i in opt]
        results = {"optimal_index": opt[0], "optimal_set": list(opt), "hand_name": names[0],
                   "hand_names": names}
        return params, results, None
    if args.deck_size != 52:
        raise UnsupportedConfigurationError("two-card analysis supports the 52-card deck only")
    order = dg.build_hand_order()
    opt = dg.optimal_2card(order)
    idx = opt.indices[0] if opt.indices else None
    results = {
        "optimal_index": idx,
        "hand_name": str(order.hand(idx)) if idx else None,
        "optimal_set": list(opt.indices),
        "verified_set": list(opt.verified),
        "lowest_holding_hand": str(order.hand(idx + 1)) if idx else None,
        "window": list(opt.window),
        "expected_index": dg.EXPECTED_2CARD,
        "findings": list(opt.findings),
        "shifted_local_test": list(opt.shifted_local),
        "conditions_table": list(opt.conditions),
    }
    csv = None
    if args.csv:
        log = dg.exclusion_log(order, *opt.window)
        csv = _csv(["i1", "i2", "S_oracle", "S_closed", "case"],
                   ((r["i1"], r["i2"], r["S_oracle"], r["S_closed"], r["case"]) for r in log))
    return params, results, csv


def cmd_verify(args):
    from .verify import run_all

    checks = run_all(samples=args.samples)
    table = []
    for c in checks:
        table.append({"check": c.name, "passed": c.passed, "details": c.details,
                      "findings": c.findings})
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL'}")
        for f in c.findings:
            lines.append(f"{'':<{width}}  finding: {f}")
    print("\n".join(lines), file=sys.stderr)
    results = {"checks": table, "all_passed": all(c.passed for c in checks)}
    return {"samples": args.samples}, results, None


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report to this file")
    common.add_argument("--csv", help="write tabular output to this CSV file")

    p = _Parser(prog="guts", description="Recursive-game and Guts poker analysis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("value", parents=[common], help="iterate the value map of a matrix game")
    s.add_argument("--game", required=True, help='JSON file {"A": [[...]], "B": [[...]], "t": 1}')
    s.add_argument("--direction", choices=["lower", "upper", "both"], default="lower")
    s.add_argument("--n-max", type=_nonneg_int, default=10_000)
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_value)

    s = sub.add_parser("payoff", parents=[common], help="stage payoff of a threshold profile")
    s.add_argument("--players", type=int, required=True)
    s.add_argument("--profile", type=_float_list, required=True)
    s.add_argument("--weenie", action="store_true")
    s.set_defaults(func=cmd_payoff)

    s = sub.add_parser("best-response", parents=[common], help="opponents' best response")
    s.add_argument("--players", type=int, choices=[2, 3], required=True)
    s.add_argument("--p1", type=float, required=True)
    s.set_defaults(func=cmd_best_response)

    s = sub.add_parser("bloc", parents=[common], help="bloc-opponent stage payoff")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p1", type=float, required=True)
    s.add_argument("--p2", type=float, required=True)
    s.add_argument("--weenie", action="store_true")
    s.set_defaults(func=cmd_bloc)

    s = sub.add_parser("coalition", parents=[common], help="coalition mixture sweep")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--C", type=float, required=True)
    s.add_argument("--sweep", type=_sweep, default=(0.0, 1.0, 1e-3))
    s.set_defaults(func=cmd_coalition)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo estimates")
    s.add_argument("--players", type=int, required=True)
    s.add_argument("--profile", type=_float_list, required=True)
    s.add_argument("--samples", type=_positive_int, default=1_000_000)
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.add_argument("--total", action="store_true", help="simulate repeated play")
    s.add_argument("--max-rounds", type=_positive_int, default=64)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--weenie", action="store_true")
    s.add_argument("--discrete", action="store_true")
    s.add_argument("--cards", type=int, choices=[1, 2], default=1)
    s.add_argument("--deck-size", type=_positive_int, default=52)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("discrete", help="finite-deck analysis")
    dsub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    d = dsub.add_parser("solve", parents=[common], help="optimal discrete threshold")
    d.add_argument("--cards", type=int, choices=[1, 2], required=True)
    d.add_argument("--deck-size", type=_positive_int, default=52)
    d.set_defaults(func=cmd_discrete_solve)

    s = sub.add_parser("verify", parents=[common], help="run the verification suite")
    s.add_argument("--samples", type=_positive_int, default=1_000_000)
    s.set_defaults(func=cmd_verify)
    return p


def run(argv: Sequence[str] | None = None) -> tuple[int, dict | None]:
    """Parse ``argv``, execute the subcommand and emit its outputs."""
    try:
        args = build_parser().parse_args(argv)
        params, results, csv = args.func(args)
    except UnsupportedConfigurationError as exc:
        print(f"error: unsupported configuration: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED, None
    except (GutsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, None
    command = args.command if args.command != "discrete" else f"discrete {args.action}"
    report = _report(command, params, results)
    text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    try:
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        if args.csv and csv is not None:
            Path(args.csv).write_text(csv)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT, report
    if args.command == "verify" and not results["all_passed"]:
        return EXIT_FAIL, report
    return EXIT_OK, report


def main(argv: Sequence[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
