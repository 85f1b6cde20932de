"""Non-autonomous map sequences: piecewise 1D maps and planar sawtooth maps.

Every 1D expression knows its own monotone decomposition, so images and
preimages of intervals are computed exactly (closed forms) rather than by
sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from symdyn.errors import DegenerateRegion, OutOfDomain
from symdyn.regions import Box, CompactRegion, Interval

Point = Union[float, tuple[float, float]]

CONTINUITY_TOL = 1e-12


def saw2(t):
    """Sawtooth (-1)**m (t - 4m) for 4m - 2 <= t < 4m + 2; works on arrays."""
    m = np.floor((np.asarray(t, dtype=float) + 2.0) / 4.0)
    val = np.where(m % 2 == 0, 1.0, -1.0) * (t - 4.0 * m)
    return float(val) if np.ndim(val) == 0 else val


# --------------------------------------------------------------------------
# expressions


class Expr:
    kind = ""

    def value(self, t: float) -> float:
        raise NotImplementedError

    def derivative(self, t: float) -> float:
        raise NotImplementedError

    def folds(self, lo: float, hi: float) -> list[float]:
        """Interior points of (lo, hi) where monotonicity may change."""
        return []

    def inverse(self, y: float, lo: float, hi: float) -> float:
        """Solve value(t) = y on a monotone segment [lo, hi]."""
        raise NotImplementedError

    def min_abs_derivative(self, lo: float, hi: float) -> float:
        """Exact inf of |derivative| on [lo, hi]."""
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Expr):
    c: float
    kind = "constant"

    def value(self, t):
        return self.c

    def derivative(self, t):
        return 0.0

    def inverse(self, y, lo, hi):
        return lo

    def min_abs_derivative(self, lo, hi):
        return 0.0

    def params(self):
        return {"c": self.c}


@dataclass(frozen=True)
class Affine(Expr):
    """t -> p*t + q"""

    p: float
    q: float = 0.0
    kind = "affine"

    def value(self, t):
        return self.p * t + self.q

    def derivative(self, t):
        return self.p

    def inverse(self, y, lo, hi):
        return (y - self.q) / self.p

    def min_abs_derivative(self, lo, hi):
        return abs(self.p)

    def params(self):
        return {"p": self.p, "q": self.q}


@dataclass(frozen=True)
class Quadratic(Expr):
    """t -> c*t*(d - t), vertex at d/2."""

    c: float
    d: float
    kind = "quadratic"

    def value(self, t):
        return self.c * t * (self.d - t)

    def derivative(self, t):
        return self.c * (self.d - 2.0 * t)

    def folds(self, lo, hi):
        v = self.d / 2.0
        return [v] if lo < v < hi else []

    def inverse(self, y, lo, hi):
        half = self.d / 2.0
        disc = max(half * half - y / self.c, 0.0)
        root = math.sqrt(disc)
        # the small root without cancellation; the large one is d - small
        small = (y / self.c) / (half + root) if half + root != 0 else half
        if hi <= half:
            t = small
        else:
            t = self.d - small
        return min(max(t, lo), hi)

    def min_abs_derivative(self, lo, hi):
        return min(abs(self.derivative(lo)), abs(self.derivative(hi)))

    def params(self):
        return {"c": self.c, "d": self.d}


@dataclass(frozen=True)
class Sawtooth(Expr):
    """t -> saw2(scale*t)"""

    scale: float
    kind = "sawtooth"

    def value(self, t):
        return saw2(self.scale * t)

    def derivative(self, t):
        m = math.floor((self.scale * t + 2.0) / 4.0)
        return self.scale * (1.0 if m % 2 == 0 else -1.0)

    def folds(self, lo, hi):
        s = self.scale
        a, b = sorted((s * lo, s * hi))
        out = []
        m = math.ceil((a - 2.0) / 4.0)
        while 4 * m + 2 < b:
            t = (4 * m + 2) / s
            if lo < t < hi:
                out.append(t)
            m += 1
        return sorted(out)

    def inverse(self, y, lo, hi):
        mid = 0.5 * (lo + hi) * self.scale
        m = math.floor((mid + 2.0) / 4.0)
        sign = 1.0 if m % 2 == 0 else -1.0
        t = (sign * y + 4.0 * m) / self.scale
        return min(max(t, lo), hi)

    def min_abs_derivative(self, lo, hi):
        return abs(self.scale)

    def params(self):
        return {"scale": self.scale}


EXPR_KINDS = {cls.kind: cls for cls in (Constant, Affine, Quadratic, Sawtooth)}


def make_expr(kind: str, **params) -> Expr:
    try:
        return EXPR_KINDS[kind](**params)
    except KeyError:
        raise ValueError(f"unknown expression kind {kind!r}") from None


# --------------------------------------------------------------------------
# 1D maps


@dataclass(frozen=True)
class Piece1D:
    lo: float
    hi: float
    expr: Expr
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"piece domain [{self.lo}, {self.hi}] is empty or degenerate")

    def owns(self, x: float) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def monotone_segments(self, lo: float, hi: float) -> list[Interval]:
        """Split [lo, hi] (clipped to the closure of the piece) at folds."""
        lo, hi = max(lo, self.lo), min(hi, self.hi)
        if lo > hi:
            return []
        cuts = [lo] + self.expr.folds(lo, hi) + [hi]
        return list(zip(cuts, cuts[1:])) if hi > lo else [(lo, lo)]

    def to_dict(self) -> dict:
        return {
            "domain": [self.lo, self.hi],
            "closed": [self.lo_closed, self.hi_closed],
            "expr": {"kind": self.expr.kind, **self.expr.params()},
        }


@dataclass(frozen=True)
class Map1D:
    """Continuous piecewise map on a closed interval.

    Boundary points belong to the piece whose half-open domain owns them.
    Expressions are continuous on the closures of their pieces and the map is
    checked to be continuous across piece boundaries, so images and preimages
    may be computed on closed pieces.
    """

    pieces: tuple[Piece1D, ...]
    name: str = ""

    def __post_init__(self):
        pieces = tuple(sorted(self.pieces, key=lambda p: p.lo))
        object.__setattr__(self, "pieces", pieces)
        if not pieces:
            raise ValueError("a map needs at least one piece")
        for p, q in zip(pieces, pieces[1:]):
            if p.hi != q.lo:
                raise ValueError(f"pieces leave a gap or overlap at {p.hi}/{q.lo}")
            if p.hi_closed == q.lo_closed:
                raise ValueError(f"boundary {p.hi} must belong to exactly one piece")
            left, right = p.expr.value(p.hi), q.expr.value(q.lo)
            if abs(left - right) > CONTINUITY_TOL * max(1.0, abs(left)):
                raise ValueError(f"map jumps from {left} to {right} at {p.hi}")
        if not (pieces[0].lo_closed and pieces[-1].hi_closed):
            raise ValueError("declared domain must be a closed interval")

    @property
    def domain(self) -> Interval:
        return (self.pieces[0].lo, self.pieces[-1].hi)

    def piece_at(self, x: float) -> Piece1D:
        for p in self.pieces:
            if p.owns(x):
                return p
        raise OutOfDomain(f"{x} is outside the domain {self.domain}")

    def __call__(self, x: float) -> float:
        return self.piece_at(x).expr.value(x)

    def derivative(self, x: float) -> float:
        return self.piece_at(x).expr.derivative(x)

    def values(self, xs) -> np.ndarray:
        """Vectorised evaluation; points outside the domain map to NaN."""
        xs = np.asarray(xs, dtype=float)
        out = np.full(xs.shape, np.nan)
        for p in self.pieces:
            above = xs >= p.lo if p.lo_closed else xs > p.lo
            below = xs <= p.hi if p.hi_closed else xs < p.hi
            mask = above & below
            if mask.any():
                out[mask] = p.expr.value(xs[mask])
        return out

    def max_abs_derivative(self, lo: float, hi: float) -> float:
        """Exact sup of |f'| on [lo, hi].

        Every supported expression has a derivative that is affine or
        piecewise constant on a monotone segment, so the sup sits at a
        segment endpoint.
        """
        best = 0.0
        for expr, a, b in self.segments(lo, hi):
            best = max(best, abs(expr.derivative(a)), abs(expr.derivative(b)))
        return best

    def segments(self, lo: float, hi: float) -> Iterator[tuple[Expr, float, float]]:
        """Monotone segments (expr, a, b) covering [lo, hi]."""
        for p in self.pieces:
            for a, b in p.monotone_segments(lo, hi):
                yield p.expr, a, b

    def to_dict(self) -> dict:
        return {"name": self.name, "pieces": [p.to_dict() for p in self.pieces]}

    @classmethod
    def from_dict(cls, data: dict) -> Map1D:
        pieces = []
        for p in data["pieces"]:
            expr = dict(p["expr"])
            kind = expr.pop("kind")
            lo_c, hi_c = p.get("closed", [True, True])
            pieces.append(Piece1D(float(p["domain"][0]), float(p["domain"][1]), make_expr(kind, **expr), lo_c, hi_c))
        return cls(tuple(pieces), data.get("name", ""))


def image_of_interval(fmap: Map1D, iv: Interval) -> CompactRegion:
    """Exact image of a closed interval as a canonical interval union."""
    lo, hi = iv
    dlo, dhi = fmap.domain
    if lo < dlo or hi > dhi or lo > hi:
        raise OutOfDomain(f"interval {iv} not inside the domain {fmap.domain}")
    if lo == hi:
        y = fmap(lo)
        return CompactRegion(((y, y),))
    out = []
    for expr, a, b in fmap.segments(lo, hi):
        ya, yb = expr.value(a), expr.value(b)
        out.append((min(ya, yb), max(ya, yb)))
    return CompactRegion.from_intervals(out)


def image_of_region(fmap: Map1D, region: CompactRegion) -> CompactRegion:
    parts = []
    for iv in region.intervals:
        parts.extend(image_of_interval(fmap, iv).intervals)
    return CompactRegion.from_intervals(parts)


def preimage_in(fmap: Map1D, target: Interval | CompactRegion, within: Interval, tol: float = 1e-12) -> CompactRegion:
    """{x in within : fmap(x) in target}.

    Every supported expression has a closed-form inverse on its monotone
    segments, so the endpoints are exact up to rounding; ``tol`` is kept for
    interface compatibility with bisection-based expressions.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    targets = target.intervals if isinstance(target, CompactRegion) else (tuple(target),)
    lo, hi = max(within[0], fmap.domain[0]), min(within[1], fmap.domain[1])
    if lo > hi:
        return CompactRegion.empty()
    out: list[Interval] = []
    for expr, a, b in fmap.segments(lo, hi):
        ya, yb = expr.value(a), expr.value(b)
        for c, e in targets:
            if ya == yb:
                if c <= ya <= e:
                    out.append((a, b))
                continue
            y_lo, y_hi = max(c, min(ya, yb)), min(e, max(ya, yb))
            if y_lo > y_hi:
                continue
            if yb > ya:
                xa = a if y_lo == ya else expr.inverse(y_lo, a, b)
                xb = b if y_hi == yb else expr.inverse(y_hi, a, b)
            else:
                xa = a if y_hi == ya else expr.inverse(y_hi, a, b)
                xb = b if y_lo == yb else expr.inverse(y_lo, a, b)
            out.append((min(xa, xb), max(xa, xb)))
    return CompactRegion.from_intervals(out)


# --------------------------------------------------------------------------
# 2D maps


@dataclass(frozen=True)
class Map2D:
    """(x1, x2) -> (w sin x2 + saw2(k1 x1), w sin x1 + saw2(k2 x2))."""

    weight: float
    scale1: float
    scale2: float

    def __call__(self, p):
        arr = np.asarray(p, dtype=float)
        x1, x2 = arr[..., 0], arr[..., 1]
        out = np.stack(
            [self.weight * np.sin(x2) + saw2(self.scale1 * x1), self.weight * np.sin(x1) + saw2(self.scale2 * x2)],
            axis=-1,
        )
        if arr.ndim == 1:
            return (float(out[0]), float(out[1]))
        return out

    def component(self, k: int, x1, x2):
        if k == 0:
            return self.weight * np.sin(x2) + saw2(self.scale1 * np.asarray(x1, dtype=float))
        return self.weight * np.sin(x1) + saw2(self.scale2 * np.asarray(x2, dtype=float))


# --------------------------------------------------------------------------
# sequences


class MapSequence:
    """Total, deterministic rule n -> f_n."""

    dimension = 1

    def map_at(self, n: int):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PeriodicSequence(MapSequence):
    """f_n = maps[pattern[n mod len(pattern)]]."""

    maps: tuple[Map1D, ...]
    pattern: tuple[int, ...]
    dimension = 1

    def __post_init__(self):
        if not self.pattern:
            raise ValueError("pattern must be nonempty")
        for k in self.pattern:
            if not 0 <= k < len(self.maps):
                raise ValueError(f"pattern refers to map {k}, only {len(self.maps)} given")

    @property
    def period(self) -> int:
        return len(self.pattern)

    def kind_at(self, n: int) -> int:
        return self.pattern[n % len(self.pattern)]

    def map_at(self, n: int) -> Map1D:
        return self.maps[self.kind_at(n)]

    def to_dict(self):
        return {"type": "periodic", "maps": [m.to_dict() for m in self.maps], "pattern": list(self.pattern)}


@dataclass(frozen=True)
class SawtoothPlaneSequence(MapSequence):
    """F_n with weight w_n and sawtooth scale ``scale`` in both coordinates.

    ``weight`` is either a number (constant family) or ``"n/(n+1)"``.
    """

    scale: float = 12.0
    weight: float | str = "n/(n+1)"
    dimension = 2

    @property
    def period(self) -> int | None:
        """1 for a constant weight; None when the weight changes with n."""
        return None if isinstance(self.weight, str) else 1

    def weight_at(self, n: int) -> float:
        if isinstance(self.weight, str):
            if self.weight != "n/(n+1)":
                raise ValueError(f"unknown weight rule {self.weight!r}")
            return n / (n + 1.0)
        return float(self.weight)

    def map_at(self, n: int) -> Map2D:
        return Map2D(self.weight_at(n), self.scale, self.scale)

    def to_dict(self):
        return {"type": "sawtooth-plane", "scale": self.scale, "weight": self.weight}


def sequence_from_dict(data: dict) -> MapSequence:
    kind = data.get("type")
    if kind == "periodic":
        return PeriodicSequence(tuple(Map1D.from_dict(m) for m in data["maps"]), tuple(int(k) for k in data["pattern"]))
    if kind == "sawtooth-plane":
        w = data.get("weight", "n/(n+1)")
        return SawtoothPlaneSequence(float(data.get("scale", 12.0)), w if isinstance(w, str) else float(w))
    raise ValueError(f"unknown map sequence type {kind!r}")


# --------------------------------------------------------------------------
# evaluation


def evaluate(seq: MapSequence, n: int, x: Point) -> Point:
    f = seq.map_at(n)
    if seq.dimension == 1:
        return f(float(x))
    return f(x)


def compose_forward(seq: MapSequence, i: int, n: int, x: Point) -> Point:
    """f_i^n(x) = f_{i+n-1} o ... o f_i (x); identity when n == 0."""
    for k in range(n):
        try:
            x = evaluate(seq, i + k, x)
        except OutOfDomain as exc:
            raise OutOfDomain(f"orbit left the domain at step {k}: {exc}", step=k) from exc
    return x


def orbit(seq: MapSequence, x0: Point, steps: int, start: int = 0) -> np.ndarray:
    """Array of x_start, ..., x_{start+steps}; shape (steps+1,) or (steps+1, 2)."""
    out = [x0]
    x = x0
    for k in range(steps):
        try:
            x = evaluate(seq, start + k, x)
        except OutOfDomain as exc:
            raise OutOfDomain(f"orbit left the domain at step {k}: {exc}", step=k) from exc
        out.append(x)
    return np.array(out, dtype=float)


def lipschitz_band(
    seq: MapSequence,
    components: Sequence[Interval | Box],
    samples: int,
    steps: Sequence[int] = (0,),
    seed: int = 0,
) -> tuple[float, float]:
    """Sampled (inf, sup) of |f(x) - f(y)| / |x - y| within each component.

    Uses the sup norm in 2D.  The numbers are estimates from ``samples``
    random pairs per component and step, not certified bounds.
    """
    if samples < 2:
        raise DegenerateRegion("need at least 2 samples")
    rng = np.random.default_rng(seed)
    lower, upper = math.inf, 0.0
    for n in steps:
        f = seq.map_at(n)
        for comp in components:
            if isinstance(comp, Box):
                lo = np.array(comp.lows)
                hi = np.array(comp.highs)
                if np.any(hi <= lo):
                    raise DegenerateRegion(f"box {comp} has no interior")
                x = lo + (hi - lo) * rng.random((samples, 2))
                y = lo + (hi - lo) * rng.random((samples, 2))
                num = np.abs(f(x) - f(y)).max(axis=1)
                den = np.abs(x - y).max(axis=1)
            else:
                a, b = comp
                if not b > a:
                    raise DegenerateRegion(f"interval {comp} has no two distinct points")
                x = a + (b - a) * rng.random(samples)
                y = a + (b - a) * rng.random(samples)
                num = np.abs(np.array([f(v) for v in x]) - np.array([f(v) for v in y]))
                den = np.abs(x - y)
            keep = den > 0
            if not keep.any():
                raise DegenerateRegion("no two distinct samples")
            ratio = num[keep] / den[keep]
            lower = min(lower, float(ratio.min()))
            upper = max(upper, float(ratio.max()))
    return lower, upper


# --------------------------------------------------------------------------
# built-in maps


def example_f1() -> Map1D:
    """16x(1-x) on [0,1/4] and (3/4,1]; 3 on (1/4,3/4]; 0 on (1,3]."""
    q = Quadratic(16.0, 1.0)
    return Map1D(
        (
            Piece1D(0.0, 0.25, q, True, True),
            Piece1D(0.25, 0.75, Constant(3.0), False, True),
            Piece1D(0.75, 1.0, q, False, True),
            Piece1D(1.0, 3.0, Constant(0.0), False, True),
        ),
        name="f1",
    )


def example_f2() -> Map1D:
    """4x(2-x) on [0,1/2] and (3/2,2]; 3 on (1/2,3/2]; 0 on (2,3]."""
    q = Quadratic(4.0, 2.0)
    return Map1D(
        (
            Piece1D(0.0, 0.5, q, True, True),
            Piece1D(0.5, 1.5, Constant(3.0), False, True),
            Piece1D(1.5, 2.0, q, False, True),
            Piece1D(2.0, 3.0, Constant(0.0), False, True),
        ),
        name="f2",
    )


def affine_map(p: float, q: float, lo: float, hi: float, name: str = "") -> Map1D:
    return Map1D((Piece1D(lo, hi, Affine(p, q)),), name=name)
