"""Command-line front end.

Exit codes: 0 success, 2 verification failure (for example a covering check
that does not pass), 1 any error.  Output files contain only deterministic
payload; wall time goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from symdyn import __version__
from symdyn.chaoslab import (
    decoded_pair_stats,
    induced_entropy_probe,
    itinerary_count_entropy,
    pair_stats,
    separated_set_entropy,
    subshift_pair_stats,
    word_count_entropy,
)
from symdyn.coding import CodedSubsystem, conjugacy_residual
from symdyn.errors import NotOneDimensional, SymdynError, UnknownCommand, ValidationError
from symdyn.expansion import applicable_theorems, check_covering, classify
from symdyn.hyperspace import induced_orbit
from symdyn.maps import orbit
from symdyn.regions import CompactRegion
from symdyn.scenarios import Scenario, num, resolve
from symdyn.symbolic import (
    PeriodicGenerator,
    count_words,
    is_irreducible,
    row_sum_at_least_two,
    scrambled_pair,
    spectral_radius,
    topological_entropy,
    validate_matrix,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2

DEFAULT_DELTA = 0.2
DEFAULT_EPS = 1e-3
EQUIVARIANCE_LIMIT = 1e-6


@dataclass
class RunReport:
    command: str
    scenario: dict
    payload: str
    fmt: str
    exit_code: int = EXIT_OK
    summary: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    version: str = __version__


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2, which this tool reserves for failed checks
    def error(self, message):
        raise _ArgError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="symdyn", description="Coupled-expansion and symbolic dynamics desk checks.")
    p.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    p.add_argument("scenario", nargs="?", help="built-in name (example-5.1, example-5.2) or scenario file")
    p.add_argument("--out", help="write the CSV or report here instead of stdout")
    p.add_argument("--seed", type=int, help="random seed (default: scenario seed)")
    p.add_argument("--horizon", type=int, help="verification or statistics horizon")
    p.add_argument("--depth", type=int, help="depth cap or word length")
    p.add_argument("--tol", type=float, help="decode tolerance or entropy scale")
    p.add_argument("--samples", type=int, help="sample or trial count")
    p.add_argument("--pattern", help="example-5.1 map pattern: all-f1, all-f2, alternate or e.g. 1121")
    p.add_argument("--x0", help="start point, comma separated in 2D")
    p.add_argument("--y0", help="second start point for chaos-stats")
    p.add_argument("--alpha", help="periodic symbol word for decode, e.g. 1,2")
    p.add_argument("--set", dest="set_", help="start set: 'lo:hi;lo:hi' in 1D or 'x,y;x,y' in 2D")
    p.add_argument("--steps", type=int, help="orbit length")
    p.add_argument("--start", type=int, default=0, help="start time n")
    p.add_argument("--method", default="itinerary_count", help="entropy method")
    p.add_argument("--matrix", help="transition matrix as JSON, for sft-info")
    return p


# --------------------------------------------------------------------------
# formatting


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _text(pairs: list[tuple[str, object]]) -> str:
    lines = []
    for k, v in pairs:
        if isinstance(v, float):
            v = repr(v)
        lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def _point(text: str, dim: int):
    try:
        parts = [num(t, "--x0") for t in text.split(",")]
    except ValidationError:
        raise
    if len(parts) != dim:
        raise ValidationError(f"expected {dim} coordinate(s), got {len(parts)}", "--x0", "dimension")
    return parts[0] if dim == 1 else tuple(parts)


def _word(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise ValidationError(f"cannot read symbol word {text!r}", "--alpha", "word") from None


def _coded(sc: Scenario, args) -> CodedSubsystem:
    if sc.dimension != 1:
        raise NotOneDimensional("decoding is implemented for 1D scenarios; 2D supports orbits and covering only")
    report = check_covering(sc.seq, sc.family, sc.horizon)
    tol = args.tol if args.tol is not None else sc.tolerances["decode"]
    cap = args.depth if args.depth is not None else 64
    return CodedSubsystem(sc.seq, sc.family, tol=tol, depth_cap=cap, lam=report.lambda_lower)


def _covering(sc: Scenario, args):
    kwargs = {}
    if sc.dimension == 2:
        kwargs["steps"] = sc.check_steps or None
        if args.samples:
            kwargs["lipschitz_samples"] = args.samples
    elif args.samples:
        kwargs["samples"] = args.samples
    horizon = args.horizon if args.horizon is not None else (None if sc.dimension == 2 else sc.horizon)
    if sc.dimension == 2 and args.horizon is not None:
        kwargs["steps"] = None
    return check_covering(sc.seq, sc.family, horizon, **kwargs)


# --------------------------------------------------------------------------
# commands


def cmd_sft_info(sc: Scenario | None, args) -> RunReport:
    if args.matrix:
        try:
            matrix = validate_matrix(json.loads(args.matrix))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--matrix is not JSON: {exc.msg}", "--matrix", "matrix") from None
    elif sc is not None:
        matrix = sc.matrix
    else:
        raise ValidationError("sft-info needs a scenario or --matrix", "sft-info", "arguments")
    n = args.depth or 64
    rho = spectral_radius(matrix)
    growth = count_words(matrix, n) ** (1.0 / n) if n <= 1024 else math.nan
    payload = _text(
        [
            ("matrix", json.dumps(matrix.to_list())),
            ("spectral_radius", rho),
            ("entropy", topological_entropy(matrix)),
            ("irreducible", str(is_irreducible(matrix)).lower()),
            ("row_sum_ge_2", str(row_sum_at_least_two(matrix)).lower()),
            (f"count_words_{n}", count_words(matrix, n)),
            (f"count_words_{n}_root", growth),
        ]
    )
    return RunReport("sft-info", {}, payload, "text")


def cmd_verify_expansion(sc: Scenario, args) -> RunReport:
    report = _covering(sc, args)
    payload = _csv(report.to_csv_rows())
    s = report.summary()
    summary = [f"{k}: {v}" for k, v in s.items() if k != "notes"] + [f"note: {n}" for n in s["notes"]]
    code = EXIT_OK if report.weak_ce else EXIT_FAILED
    return RunReport("verify-expansion", {}, payload, "csv", code, summary)


def cmd_decode(sc: Scenario, args) -> RunReport:
    sub = _coded(sc, args)
    word = _word(args.alpha or "1")
    gen = PeriodicGenerator(word)
    d = sub.decode(gen, args.start)
    rows = [["n", "alpha", "x", "diameter", "depth_used"], [args.start, " ".join(map(str, word)), d.x, d.diameter, d.depth_used]]
    return RunReport("decode", {}, _csv(rows), "csv", summary=[f"x: {d.x!r}", f"depth_used: {d.depth_used}"])


def cmd_itinerary(sc: Scenario, args) -> RunReport:
    sub = _coded(sc, args)
    x = _point(args.x0, 1) if args.x0 else sc.start_point[0]
    steps = args.steps or 20
    word = sub.itinerary(x, args.start, steps)
    rows = [["k", "symbol"]] + [[k, s] for k, s in enumerate(word)]
    return RunReport("itinerary", {}, _csv(rows), "csv", summary=["word: " + " ".join(map(str, word))])


def cmd_conjugacy(sc: Scenario, args) -> RunReport:
    sub = _coded(sc, args)
    res = conjugacy_residual(sub, trials=args.samples or 200, horizon=args.horizon or 64, seed=_seed(sc, args))
    payload = _text(
        [
            ("trials", res.trials),
            ("seed", res.seed),
            ("max_equivariance", res.max_equivariance),
            ("max_roundtrip", res.max_roundtrip),
            ("symbol_mismatches", res.symbol_mismatches),
            ("max_depth_used", res.max_depth),
        ]
    )
    ok = res.max_equivariance < EQUIVARIANCE_LIMIT and res.symbol_mismatches == 0
    return RunReport("conjugacy-check", {}, payload, "text", EXIT_OK if ok else EXIT_FAILED)


def cmd_orbit(sc: Scenario, args) -> RunReport:
    x0 = _point(args.x0, sc.dimension) if args.x0 else (sc.start_point if sc.dimension == 2 else sc.start_point[0])
    steps = args.steps if args.steps is not None else 5000
    o = orbit(sc.seq, x0, steps, args.start)
    if sc.dimension == 1:
        rows = [["n", "x1"]] + [[args.start + k, v] for k, v in enumerate(o)]
    else:
        rows = [["n", "x1", "x2"]] + [[args.start + k, v[0], v[1]] for k, v in enumerate(o)]
    return RunReport("orbit", {}, _csv(rows), "csv", summary=[f"rows: {len(o)}"])


def _parse_set(text: str, dim: int) -> CompactRegion:
    parts = [p for p in text.split(";") if p.strip()]
    try:
        if dim == 2:
            return CompactRegion.from_points(tuple(num(t, "--set") for t in p.split(",")) for p in parts)
        return CompactRegion.from_intervals(tuple(num(t, "--set") for t in p.split(":")) for p in parts)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"cannot read start set {text!r}: {exc}", "--set", "region") from None


def cmd_set_orbit(sc: Scenario, args) -> RunReport:
    a0 = _parse_set(args.set_, sc.dimension) if args.set_ else sc.start_region()
    steps = args.steps if args.steps is not None else 5000
    regions = induced_orbit(sc.seq, a0, steps, args.start)
    if sc.dimension == 2:
        rows = [["step", "point_index", "x", "y"]]
        for k, r in enumerate(regions):
            for j, (x, y) in enumerate(r.points):
                rows.append([args.start + k, j, x, y])
    else:
        rows = [["step", "component_count", "hull_lo", "hull_hi"]]
        for k, r in enumerate(regions):
            lo, hi = r.hull()
            rows.append([args.start + k, r.component_count, lo, hi])
    return RunReport("set-orbit", {}, _csv(rows), "csv", summary=[f"steps: {steps}"])


def cmd_chaos_stats(sc: Scenario, args) -> RunReport:
    horizon = args.horizon or 4096
    delta = DEFAULT_DELTA
    eps = args.tol if args.tol is not None else DEFAULT_EPS
    if args.x0 is not None or args.y0 is not None:
        if args.x0 is None or args.y0 is None:
            raise ValidationError("give both --x0 and --y0", "--y0", "arguments")
        x, y = _point(args.x0, sc.dimension), _point(args.y0, sc.dimension)
        stats = pair_stats(sc.seq, x, y, horizon, [eps, delta], args.start)
        rows = [["i", "d"]] + [[k, d] for k, d in enumerate(stats.distances)]
        summary = [f"{k}: {v}" for k, v in stats.summary(delta, eps).items()]
        return RunReport("chaos-stats", {}, _csv(rows), "csv", EXIT_OK, summary)
    sub = _coded(sc, args)
    alpha, beta = scrambled_pair(sc.matrix)
    dp = decoded_pair_stats(sub, alpha, beta, horizon)
    sym = subshift_pair_stats(sc.matrix, alpha, beta, horizon)
    ox, oy = dp.orbits
    rows = [["i", "x", "y", "d", "d_symbolic"]]
    rows += [[k, ox[k], oy[k], dp.stats.distances[k], sym.distances[k]] for k in range(horizon)]
    s = dp.stats.summary(delta, eps)
    summary = [f"{k}: {v}" for k, v in s.items()]
    summary += [f"symbolic_li_yorke(delta=1): {sym.li_yorke_witness(1.0)}", f"orbits_bounded: {dp.bounded}"]
    summary += [f"orbit_residual: {dp.residual!r}"]
    ok = s["li_yorke"] and s["dc"] and dp.bounded
    return RunReport("chaos-stats", {}, _csv(rows), "csv", EXIT_OK if ok else EXIT_FAILED, summary)


def cmd_entropy(sc: Scenario, args) -> RunReport:
    n = args.depth or 16
    method = args.method
    if method == "word_count":
        est = word_count_entropy(sc.matrix, n)
    elif method == "itinerary_count":
        est = itinerary_count_entropy(_coded(sc, argparse.Namespace(**{**vars(args), "depth": None})), n)
    elif method == "induced":
        sub = _coded(sc, argparse.Namespace(**{**vars(args), "depth": None}))
        est = induced_entropy_probe(sub, n, samples=args.samples or 2, seed=_seed(sc, args))
    elif method == "separated_set":
        if sc.dimension != 1:
            raise NotOneDimensional("separated_set is implemented for 1D scenarios")
        lo, hi = sc.family.union_hull()
        est = separated_set_entropy(
            sc.seq, (lo, hi), n, args.tol or 1e-2, samples=args.samples or 400, seed=_seed(sc, args),
            reference=math.log(spectral_radius(sc.matrix)),
        )
    else:
        raise ValidationError(
            f"unknown entropy method {method!r} (word_count, itinerary_count, induced, separated_set)", "--method", "method"
        )
    summary = [f"method: {est.method}", f"rate: {est.rate!r}", f"reference: {est.reference!r}", f"note: {est.note}"]
    return RunReport("entropy", {}, _csv(est.rows()), "csv", EXIT_OK, summary)


def _classify_lines(sc: Scenario, report) -> list[tuple[str, object]]:
    d = sc.declared
    results = classify(
        report,
        sc.matrix,
        equicontinuous=d.get("equicontinuous", False),
        compact_space=d.get("compact_space", False),
        restricted_base=d.get("restricted_base", False),
    )
    lines = []
    for r in results:
        preds = ", ".join(f"{k}={'yes' if v else 'no'}" for k, v in r.predicates.items())
        extra = "" if r.chaos_conclusion is None else f"; chaos={'yes' if r.chaos_conclusion else 'no'}"
        lines.append((f"theorem {r.theorem}", f"{'applicable' if r.applicable else 'not applicable'} ({preds}{extra})"))
    lines.append(("applicable", " ".join(applicable_theorems(results)) or "none"))
    return lines


def cmd_classify(sc: Scenario, args) -> RunReport:
    report = _covering(sc, args)
    payload = _text(_classify_lines(sc, report))
    return RunReport("classify", {}, payload, "text")


def cmd_report(sc: Scenario, args) -> RunReport:
    report = _covering(sc, args)
    pairs: list[tuple[str, object]] = [("scenario", sc.name), ("version", __version__), ("seed", _seed(sc, args))]
    if sc.pattern is not None:
        pairs.append(("pattern", sc.pattern))
    pairs += [
        ("spectral_radius", spectral_radius(sc.matrix)),
        ("entropy", topological_entropy(sc.matrix)),
        ("irreducible", str(is_irreducible(sc.matrix)).lower()),
        ("row_sum_ge_2", str(row_sum_at_least_two(sc.matrix)).lower()),
    ]
    for k, v in report.summary().items():
        if k == "notes":
            pairs += [("note", n) for n in v]
        else:
            pairs.append((k, v))
    pairs += list(zip(("lambda_step " + str(n) for n in report.steps), report.lambda_by_step))
    pairs += _classify_lines(sc, report)
    code = EXIT_OK if report.weak_ce else EXIT_FAILED
    if report.weak_ce and sc.dimension == 1:
        sub = CodedSubsystem(sc.seq, sc.family, tol=sc.tolerances["decode"], lam=report.lambda_lower)
        res = conjugacy_residual(sub, trials=args.samples or 50, seed=_seed(sc, args))
        pairs += [("conjugacy_max_equivariance", res.max_equivariance), ("conjugacy_symbol_mismatches", res.symbol_mismatches)]
        if res.max_equivariance >= EQUIVARIANCE_LIMIT or res.symbol_mismatches:
            code = EXIT_FAILED
    return RunReport("report", {}, _text(pairs), "text", code)


def _seed(sc: Scenario, args) -> int:
    return args.seed if args.seed is not None else sc.seed


COMMANDS: dict[str, Callable] = {
    "sft-info": cmd_sft_info,
    "verify-expansion": cmd_verify_expansion,
    "decode": cmd_decode,
    "itinerary": cmd_itinerary,
    "conjugacy-check": cmd_conjugacy,
    "orbit": cmd_orbit,
    "set-orbit": cmd_set_orbit,
    "chaos-stats": cmd_chaos_stats,
    "entropy": cmd_entropy,
    "classify": cmd_classify,
    "report": cmd_report,
}


def _threads() -> int:
    raw = os.environ.get("SYMDYN_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise ValidationError(f"SYMDYN_THREADS={raw!r} is not an integer", "SYMDYN_THREADS", "threads") from None
    if cap < 1:
        raise ValidationError("SYMDYN_THREADS must be >= 1", "SYMDYN_THREADS", "threads")
    return cap


def dispatch(command: str, scenario: str | None, args: argparse.Namespace) -> RunReport:
    """Run one command; raises SymdynError subclasses on failure."""
    if command not in COMMANDS:
        raise UnknownCommand(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    _threads()  # every computation here is serial, so any valid cap is honoured
    sc = None
    if scenario is not None:
        sc = resolve(scenario, args.pattern, args.seed)
    elif command != "sft-info":
        raise ValidationError(f"{command} needs a scenario", command, "arguments")
    start = time.perf_counter()
    report = COMMANDS[command](sc, args)
    report.wall_time = time.perf_counter() - start
    if sc is not None:
        report.scenario = {"name": sc.name, "seed": _seed(sc, args)}
    return report


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report = dispatch(args.command, args.scenario, args)
    except _ArgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SymdynError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.payload)
        for line in report.summary:
            print(line)
    else:
        sys.stdout.write(report.payload)
        for line in report.summary:
            print(line, file=sys.stderr)
    print(f"wall_time: {report.wall_time:.3f}s", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
