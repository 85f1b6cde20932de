"""Scenario files and the two built-in examples.

A scenario is a JSON document with an explicit format version.  Numbers may
be written as decimals or as exact fractions in a string ("15/16"), which are
parsed with :class:`fractions.Fraction` and then rounded once to float.
Errors carry the file name, the line of the offending key and a JSON path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from symdyn.errors import MatrixError, ParseError, SymdynError, ValidationError
from symdyn.expansion import CoveringFamily
from symdyn.maps import (
    MapSequence,
    PeriodicSequence,
    SawtoothPlaneSequence,
    example_f1,
    example_f2,
    sequence_from_dict,
)
from symdyn.regions import MERGE_TOL, Box, CompactRegion
from symdyn.symbolic import TransitionMatrix, full_matrix, validate_matrix

FORMAT = "symdyn-scenario"
VERSION = 1

DEFAULT_TOLERANCES = {"merge": MERGE_TOL, "geom": 1e-12, "decode": 1e-9}

# Example 5.1 covering sets keyed by map: (V_{1,n}, V_{2,n})
_STEP_SETS_51 = {
    "f1": ((0.0, 0.25), (0.75, 1.0)),
    "f2": ((0.0, 0.5), (1.5, 2.0)),
}
_OUTER_51 = ((0.0, 0.5), (0.75, 2.0))

FIG1_START = (0.12, 0.01)
FIG2_START = ((0.04, 0.01), (0.05, 0.01), (0.11, 0.01), (0.12, 0.02))
FACE_STEPS_52 = (0, 1, 10, 1000)


@dataclass(frozen=True)
class Scenario:
    name: str
    matrix: TransitionMatrix
    seq: MapSequence
    family: CoveringFamily
    horizon: int
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    declared: dict = field(default_factory=dict)
    pattern: str | None = None
    check_steps: tuple[int, ...] = ()
    start_point: tuple[float, ...] | None = None
    start_set: tuple[tuple[float, ...], ...] | None = None

    @property
    def dimension(self) -> int:
        return self.seq.dimension

    def start_region(self) -> CompactRegion:
        if self.start_set is None:
            raise ValidationError("scenario declares no start set", "$.start_set")
        if self.dimension == 2:
            return CompactRegion.from_points(self.start_set)
        return CompactRegion.from_intervals(self.start_set)

    def to_dict(self) -> dict:
        fam = self.family

        def cover(v):
            return v.to_list() if isinstance(v, Box) else list(v)

        out: dict[str, Any] = {
            "format": FORMAT,
            "version": VERSION,
            "name": self.name,
            "dimension": self.dimension,
            "matrix": self.matrix.to_list(),
            "maps": self.seq.to_dict(),
            "covering": {
                "mode": fam.mode,
                "outer": [cover(v) for v in fam.outer],
                "steps": [[cover(v) for v in step] for step in fam.steps],
            },
            "horizon": self.horizon,
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "declared": dict(self.declared),
        }
        if self.pattern is not None:
            out["pattern"] = self.pattern
        if self.check_steps:
            out["check_steps"] = list(self.check_steps)
        if self.start_point is not None:
            out["start_point"] = list(self.start_point)
        if self.start_set is not None:
            out["start_set"] = [list(p) for p in self.start_set]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# built-ins


def parse_pattern(spec: str) -> tuple[str, ...]:
    """"all-f1", "all-f2", "alternate" (f1 first) or a string of 1s and 2s."""
    named = {"all-f1": ("f1",), "all-f2": ("f2",), "alternate": ("f1", "f2")}
    if spec in named:
        return named[spec]
    if spec and set(spec) <= {"1", "2"}:
        return tuple(f"f{c}" for c in spec)
    raise ValidationError(
        f"pattern {spec!r} is not all-f1, all-f2, alternate or a string over {{1,2}}", "--pattern", "pattern"
    )


def example_51(pattern: str = "alternate", seed: int = 0) -> Scenario:
    kinds = parse_pattern(pattern)
    maps = (example_f1(), example_f2())
    seq = PeriodicSequence(maps, tuple(0 if k == "f1" else 1 for k in kinds))
    steps = tuple(_STEP_SETS_51[k] for k in kinds)
    fam = CoveringFamily(full_matrix(2), _OUTER_51, steps, "strict")
    return Scenario(
        name="example-5.1",
        matrix=fam.matrix,
        seq=seq,
        family=fam,
        horizon=2 * len(kinds),
        seed=seed,
        declared={"equicontinuous": True, "compact_space": True, "restricted_base": True},
        pattern=pattern,
        start_point=(0.9375,),
        start_set=((0.0, 0.25),),
    )


def example_52(seed: int = 0) -> Scenario:
    v1 = Box(-1 / 6, 1 / 6, -1 / 6, 1 / 6)
    v2 = Box(0.5, 5 / 6, 0.5, 5 / 6)
    fam = CoveringFamily(full_matrix(2), (v1, v2), ((v1, v2),), "strict")
    return Scenario(
        name="example-5.2",
        matrix=fam.matrix,
        seq=SawtoothPlaneSequence(12.0, "n/(n+1)"),
        family=fam,
        horizon=max(FACE_STEPS_52) + 1,
        seed=seed,
        declared={"equicontinuous": True, "compact_space": False, "restricted_base": True},
        check_steps=FACE_STEPS_52,
        start_point=FIG1_START,
        start_set=FIG2_START,
    )


BUILTINS = {"example-5.1": example_51, "example-5.2": example_52}


def builtin(name: str, pattern: str | None = None, seed: int = 0) -> Scenario:
    if name not in BUILTINS:
        raise ValidationError(f"unknown built-in scenario {name!r}", name, "name")
    if name == "example-5.1":
        return example_51(pattern or "alternate", seed)
    if pattern is not None:
        raise ValidationError("--pattern only applies to example-5.1", "--pattern", "pattern")
    return example_52(seed)


# --------------------------------------------------------------------------
# loading


class _Loc:
    """Builds 'file:line: $.path' locations for error messages."""

    def __init__(self, source: str, text: str):
        self.source = source
        self.lines = text.splitlines()

    def line_of(self, key: str) -> int | None:
        needle = f'"{key}"'
        for k, line in enumerate(self.lines, start=1):
            if needle in line:
                return k
        return None

    def __call__(self, path: str) -> str:
        key = path.split(".")[1].split("[")[0] if "." in path else ""
        line = self.line_of(key) if key else None
        where = f"{self.source}:{line}" if line else self.source
        return f"{where}: {path}"


def num(value: Any, where: str) -> float:
    """A decimal number or an exact fraction string such as "15/16"."""
    if isinstance(value, bool):
        raise ValidationError(f"expected a number, got {value!r}", where, "number")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"cannot read {value!r} as a decimal or p/q fraction", where, "number") from None
    else:
        raise ValidationError(f"expected a number, got {type(value).__name__}", where, "number")
    if not math.isfinite(out):
        raise ValidationError(f"number {value!r} is not finite", where, "number")
    return out


def _numbers(tree: Any, where: str) -> Any:
    """Recursively convert numeric leaves (including fraction strings)."""
    if isinstance(tree, list):
        return [_numbers(v, f"{where}[{k}]") for k, v in enumerate(tree)]
    if isinstance(tree, dict):
        return {k: (v if k in ("kind", "name", "type") else _numbers(v, f"{where}.{k}")) for k, v in tree.items()}
    if isinstance(tree, bool):
        return tree
    if isinstance(tree, str) and tree != "n/(n+1)":
        return num(tree, where)
    return tree


def _need(data: dict, key: str, loc: _Loc) -> Any:
    if key not in data:
        raise ValidationError(f"missing required field {key!r}", loc(f"$.{key}"), "required")
    return data[key]


def _cover(value: Any, dim: int, where: str):
    if dim == 1:
        if not (isinstance(value, list) and len(value) == 2):
            raise ValidationError("a 1D covering set is [lo, hi]", where, "cover-shape")
        lo, hi = num(value[0], where), num(value[1], where)
        if lo > hi:
            raise ValidationError(f"interval [{lo}, {hi}] is empty", where, "nonempty")
        return (lo, hi)
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(p, list) and len(p) == 2 for p in value)):
        raise ValidationError("a 2D covering set is [[lo1, hi1], [lo2, hi2]]", where, "cover-shape")
    (a, b), (c, d) = value
    box = Box(num(a, where), num(b, where), num(c, where), num(d, where))
    if box.lo1 > box.hi1 or box.lo2 > box.hi2:
        raise ValidationError(f"box {value} is empty", where, "nonempty")
    return box


def scenario_from_dict(data: Any, source: str = "<scenario>", text: str = "") -> Scenario:
    loc = _Loc(source, text)
    if not isinstance(data, dict):
        raise ValidationError("top level must be an object", loc("$"), "shape")
    if data.get("format", FORMAT) != FORMAT:
        raise ValidationError(f"format must be {FORMAT!r}", loc("$.format"), "format")
    version = _need(data, "version", loc)
    if version != VERSION:
        raise ValidationError(f"unsupported version {version!r}; expected {VERSION}", loc("$.version"), "version")
    name = str(data.get("name", Path(source).stem))

    raw_matrix = _need(data, "matrix", loc)
    try:
        matrix = validate_matrix(raw_matrix)
    except MatrixError as exc:
        raise ValidationError(str(exc), loc("$.matrix"), type(exc).__name__) from None
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix is not a square 0/1 array: {exc}", loc("$.matrix"), "NotBinary") from None

    dim = _need(data, "dimension", loc)
    if dim not in (1, 2):
        raise ValidationError("dimension must be 1 or 2", loc("$.dimension"), "dimension")

    try:
        seq = sequence_from_dict(_numbers(_need(data, "maps", loc), "$.maps"))
    except ValidationError as exc:
        raise ValidationError(str(exc), loc(exc.location or "$.maps"), exc.invariant) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"invalid map sequence: {exc}", loc("$.maps"), "maps") from None
    if seq.dimension != dim:
        raise ValidationError(f"maps are {seq.dimension}D but dimension is {dim}", loc("$.dimension"), "dimension")

    cov = _need(data, "covering", loc)
    if not isinstance(cov, dict):
        raise ValidationError("covering must be an object", loc("$.covering"), "shape")
    outer_raw = cov.get("outer")
    steps_raw = cov.get("steps")
    if not isinstance(outer_raw, list) or not isinstance(steps_raw, list) or not steps_raw:
        raise ValidationError("covering needs 'outer' and a nonempty 'steps' list", loc("$.covering"), "shape")
    outer = tuple(_cover(v, dim, loc(f"$.covering.outer[{k}]")) for k, v in enumerate(outer_raw))
    steps = []
    for k, step in enumerate(steps_raw):
        if not isinstance(step, list):
            raise ValidationError("each step lists one set per symbol", loc(f"$.covering.steps[{k}]"), "shape")
        steps.append(tuple(_cover(v, dim, loc(f"$.covering.steps[{k}][{j}]")) for j, v in enumerate(step)))
    if len(outer) != matrix.n_symbols:
        raise ValidationError(
            f"{len(outer)} outer sets for {matrix.n_symbols} symbols", loc("$.covering.outer"), "symbol-range"
        )
    try:
        fam = CoveringFamily(matrix, outer, tuple(steps), cov.get("mode", "strict"))
    except (SymdynError, ValueError) as exc:
        raise ValidationError(str(exc), loc("$.covering"), "covering") from None

    tol = dict(DEFAULT_TOLERANCES)
    for key, value in (data.get("tolerances") or {}).items():
        if key not in tol:
            raise ValidationError(f"unknown tolerance {key!r}", loc("$.tolerances"), "tolerances")
        tol[key] = num(value, loc(f"$.tolerances.{key}"))
    if not (0 < tol["merge"] < tol["geom"] <= tol["decode"]):
        raise ValidationError("tolerances must satisfy 0 < merge < geom <= decode", loc("$.tolerances"), "tolerances")

    horizon = _need(data, "horizon", loc)
    if not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 1:
        raise ValidationError("horizon must be a positive integer", loc("$.horizon"), "horizon")
    period = getattr(seq, "period", None)
    if period is not None and horizon % math.lcm(period, fam.period) != 0:
        raise ValidationError(
            f"joint period {math.lcm(period, fam.period)} does not divide horizon {horizon}", loc("$.horizon"), "period"
        )
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ValidationError("seed must be a nonnegative integer", loc("$.seed"), "seed")

    declared = data.get("declared") or {}
    for key, value in declared.items():
        if not isinstance(value, bool):
            raise ValidationError(f"declared.{key} must be true or false", loc(f"$.declared.{key}"), "declared")

    start_point = data.get("start_point")
    if start_point is not None:
        start_point = tuple(num(v, loc("$.start_point")) for v in start_point)
    start_set = data.get("start_set")
    if start_set is not None:
        start_set = tuple(tuple(num(v, loc("$.start_set")) for v in p) for p in start_set)
    check_steps = tuple(int(v) for v in data.get("check_steps", ()))

    return Scenario(
        name=name,
        matrix=matrix,
        seq=seq,
        family=fam,
        horizon=horizon,
        seed=seed,
        tolerances=tol,
        declared=dict(declared),
        pattern=data.get("pattern"),
        check_steps=check_steps,
        start_point=start_point,
        start_set=start_set,
    )


def loads_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None
    return scenario_from_dict(data, source, text)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read scenario file: {exc.strerror}", str(path)) from None
    return loads_scenario(text, str(path))


def resolve(name_or_path: str, pattern: str | None = None, seed: int | None = None) -> Scenario:
    """Built-in name or scenario file; --pattern rebuilds the built-in example."""
    if name_or_path in BUILTINS:
        return builtin(name_or_path, pattern, seed or 0)
    sc = load_scenario(name_or_path)
    if pattern is not None:
        raise ValidationError("--pattern only applies to the built-in example-5.1", "--pattern", "pattern")
    if seed is not None:
        sc = Scenario(**{**sc.__dict__, "seed": seed})
    return sc
