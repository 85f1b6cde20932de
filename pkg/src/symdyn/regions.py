"""Compact regions and the Hausdorff metric.

A 1D region is a canonical finite union of closed intervals; a 2D region is a
finite point set measured in the sup norm.  Boxes are the covering sets of
2D scenarios and are kept separate from regions.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from symdyn.errors import DimensionMismatch

# Gaps narrower than this are floating-point dust and get merged.  Must stay far
# below every analysis tolerance.
MERGE_TOL = 1e-14

Interval = tuple[float, float]


def _canonical(intervals: Iterable[Sequence[float]]) -> tuple[Interval, ...]:
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    for a, b in ivs:
        if not a <= b:
            raise ValueError(f"interval [{a}, {b}] has lo > hi")
    out: list[list[float]] = []
    for a, b in ivs:
        if out and a - out[-1][1] < MERGE_TOL:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


@dataclass(frozen=True)
class CompactRegion:
    """Immutable compact set: interval union (1D) or point set (2D).

    An empty region only ever appears as the result of a preimage or an
    intersection; metric operations reject it.
    """

    intervals: tuple[Interval, ...] = ()
    points: tuple[tuple[float, float], ...] = ()

    @classmethod
    def from_intervals(cls, intervals: Iterable[Sequence[float]]) -> CompactRegion:
        return cls(intervals=_canonical(intervals))

    @classmethod
    def interval(cls, lo: float, hi: float) -> CompactRegion:
        return cls.from_intervals([(lo, hi)])

    @classmethod
    def point(cls, x: float) -> CompactRegion:
        return cls(intervals=((float(x), float(x)),))

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> CompactRegion:
        pts = tuple(sorted(set((float(p[0]), float(p[1])) for p in points)))
        return cls(points=pts)

    @classmethod
    def empty(cls) -> CompactRegion:
        return cls()

    @property
    def dim(self) -> int:
        return 2 if self.points else 1

    @property
    def is_empty(self) -> bool:
        return not self.intervals and not self.points

    @property
    def component_count(self) -> int:
        return len(self.points) if self.points else len(self.intervals)

    def hull(self) -> Interval:
        self._need_1d()
        return (self.intervals[0][0], self.intervals[-1][1])

    def diameter(self) -> float:
        if self.is_empty:
            return 0.0
        if self.dim == 1:
            lo, hi = self.hull()
            return hi - lo
        p = self.as_array()
        return float(np.max(np.abs(p[:, None, :] - p[None, :, :]).max(axis=2)))

    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)

    def _need_1d(self) -> None:
        if self.points:
            raise DimensionMismatch("operation needs a 1D region")
        if not self.intervals:
            raise ValueError("operation needs a nonempty region")

    # set algebra (1D)

    def union(self, other: CompactRegion) -> CompactRegion:
        if self.points or other.points:
            if (self.intervals or other.intervals):
                raise DimensionMismatch("cannot mix 1D and 2D regions")
            return CompactRegion.from_points(self.points + other.points)
        return CompactRegion.from_intervals(self.intervals + other.intervals)

    def intersect(self, other: CompactRegion | Interval) -> CompactRegion:
        if isinstance(other, tuple):
            other = CompactRegion.from_intervals([other])
        if self.points or other.points:
            raise DimensionMismatch("intersection is only defined for 1D regions")
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return CompactRegion.from_intervals(out)

    def contains_point(self, x: float, tol: float = 0.0) -> bool:
        return self.distance_to_point(x) <= tol

    def distance_to_point(self, x: float) -> float:
        ivs = self.intervals
        k = bisect.bisect_right(ivs, (x, math.inf))
        best = math.inf
        for idx in (k - 1, k):
            if 0 <= idx < len(ivs):
                a, b = ivs[idx]
                best = min(best, 0.0 if a <= x <= b else min(abs(x - a), abs(x - b)))
        return best

    def is_subset(self, other: CompactRegion, tol: float = 0.0) -> bool:
        """True when every point of self lies within ``tol`` of ``other``."""
        if self.is_empty:
            return True
        return directed_distance(self, other) <= tol

    def inflate(self, r: float) -> CompactRegion:
        return CompactRegion.from_intervals((a - r, b + r) for a, b in self.intervals)

    def midpoint(self) -> float:
        lo, hi = self.hull()
        return 0.5 * (lo + hi)

    def to_list(self) -> list[list[float]]:
        return [list(p) for p in (self.points or self.intervals)]


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box [lo1, hi1] x [lo2, hi2]."""

    lo1: float
    hi1: float
    lo2: float
    hi2: float

    @property
    def lows(self) -> tuple[float, float]:
        return (self.lo1, self.lo2)

    @property
    def highs(self) -> tuple[float, float]:
        return (self.hi1, self.hi2)

    def diameter(self) -> float:
        return max(self.hi1 - self.lo1, self.hi2 - self.lo2)

    def contains(self, p: Sequence[float], tol: float = 0.0) -> bool:
        return (self.lo1 - tol <= p[0] <= self.hi1 + tol) and (self.lo2 - tol <= p[1] <= self.hi2 + tol)

    def to_list(self) -> list[list[float]]:
        return [[self.lo1, self.hi1], [self.lo2, self.hi2]]


def box_distance(a: Box, b: Box) -> float:
    """Sup-norm distance between two boxes."""
    g1 = max(0.0, a.lo1 - b.hi1, b.lo1 - a.hi1)
    g2 = max(0.0, a.lo2 - b.hi2, b.lo2 - a.hi2)
    return max(g1, g2)


def interval_distance(a: Interval, b: Interval) -> float:
    return max(0.0, a[0] - b[1], b[0] - a[1])


def set_distance(a: CompactRegion, b: CompactRegion) -> float:
    """inf over x in a, y in b of |x - y| (not the Hausdorff distance)."""
    if a.dim != b.dim:
        raise DimensionMismatch("regions have different dimensions")
    if a.dim == 2:
        pa, pb = a.as_array(), b.as_array()
        return float(np.abs(pa[:, None, :] - pb[None, :, :]).max(axis=2).min())
    return min(interval_distance(p, q) for p in a.intervals for q in b.intervals)


def directed_distance(a: CompactRegion, b: CompactRegion) -> float:
    """sup_{x in a} d(x, b).

    For interval unions d(., b) is piecewise linear: zero on b, rising with
    slope 1 away from it.  On any interval of ``a`` its maximum is attained
    at an endpoint of that interval or at the midpoint of a gap of ``b``
    (where the two nearest intervals of b are equidistant), so only those
    candidates are evaluated.  Points outside the hull of b are covered by
    the endpoint candidates because d(., b) is monotone there.
    """
    if a.is_empty or b.is_empty:
        raise ValueError("directed distance needs nonempty regions")
    if a.dim != b.dim:
        raise DimensionMismatch("regions have different dimensions")
    if a.dim == 2:
        pa, pb = a.as_array(), b.as_array()
        return float(np.abs(pa[:, None, :] - pb[None, :, :]).max(axis=2).min(axis=1).max())
    candidates = [x for iv in a.intervals for x in iv]
    bi = b.intervals
    for k in range(len(bi) - 1):
        g = 0.5 * (bi[k][1] + bi[k + 1][0])
        if a.contains_point(g):
            candidates.append(g)
    return max(b.distance_to_point(x) for x in candidates)


def hausdorff(a: CompactRegion, b: CompactRegion) -> float:
    """Exact Hausdorff distance between two compact regions."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"cannot compare {a.dim}D and {b.dim}D regions")
    return max(directed_distance(a, b), directed_distance(b, a))


def hausdorff_bruteforce(a: CompactRegion, b: CompactRegion, step: float) -> float:
    """Max-min over grids of spacing ``step`` laid on each interval.

    Independent of :func:`hausdorff`; differs from it by at most ``step``.
    """

    def grid(r: CompactRegion) -> np.ndarray:
        pts = []
        for lo, hi in r.intervals:
            n = max(1, int(math.ceil((hi - lo) / step)))
            pts.append(np.linspace(lo, hi, n + 1))
        return np.concatenate(pts)

    ga, gb = grid(a), grid(b)
    dist = np.abs(ga[:, None] - gb[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))
