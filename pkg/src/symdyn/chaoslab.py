"""Finite-horizon chaos statistics and entropy estimators.

limsup and liminf of orbit distances are replaced by max and min over the
tail window [n/2, n).  Distributional fractions F(eps, k) are prefix averages
over k = n_min .. n; very short prefixes are skipped because a handful of
points says nothing about density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from symdyn.coding import CodedSubsystem
from symdyn.errors import CoveringRequired, InsufficientSamples, OrbitEscapes
from symdyn.expansion import check_covering_1d
from symdyn.maps import MapSequence, orbit, preimage_in
from symdyn.regions import CompactRegion
from symdyn.symbolic import (
    SymbolGenerator,
    TransitionMatrix,
    count_words,
    spectral_radius,
)

DC_TOL = 0.05
LY_RATIO = 1e-3
METRIC_DEPTH = 40


def default_eps_grid(separation: float, diameter: float, points: int = 16) -> np.ndarray:
    """Logarithmic grid from separation/1e3 to the domain diameter."""
    return np.geomspace(separation / 1e3, diameter, points)


def _n_min(horizon: int) -> int:
    return min(horizon, max(32, horizon // 128))


@dataclass
class PairStats:
    distances: np.ndarray
    eps_grid: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.distances = np.asarray(self.distances, dtype=float)
        self.eps_grid = np.asarray(self.eps_grid, dtype=float)
        if self.distances.size == 0:
            raise InsufficientSamples("pair statistics need at least one step")

    @property
    def horizon(self) -> int:
        return len(self.distances)

    @property
    def n_min(self) -> int:
        return _n_min(self.horizon)

    @property
    def running_min(self) -> np.ndarray:
        return np.minimum.accumulate(self.distances)

    @property
    def running_max(self) -> np.ndarray:
        return np.maximum.accumulate(self.distances)

    def _tail(self) -> np.ndarray:
        return self.distances[self.horizon // 2 :]

    @property
    def tail_min(self) -> float:
        return float(self._tail().min())

    @property
    def tail_max(self) -> float:
        return float(self._tail().max())

    def fraction(self, eps: float) -> np.ndarray:
        """F(eps, k) = #{i < k : d_i < eps} / k for k = 1..n."""
        hits = np.cumsum(self.distances < eps)
        return hits / np.arange(1, self.horizon + 1)

    def fractions(self) -> np.ndarray:
        """F over the eps grid at the full horizon."""
        return np.array([self.fraction(e)[-1] for e in self.eps_grid])

    def li_yorke_witness(self, delta: float) -> bool:
        return self.tail_min < LY_RATIO * delta and self.tail_max > delta

    def dc_witness(self, delta: float, eps: float, tol: float = DC_TOL) -> bool:
        """F(eps, .) near 1 on some prefix and F(delta, .) near 0 on another."""
        lo = self.n_min - 1
        near = self.fraction(eps)[lo:]
        far = self.fraction(delta)[lo:]
        return bool(near.max() >= 1 - tol and far.min() <= tol)

    def summary(self, delta: float, eps: float, tol: float = DC_TOL) -> dict:
        lo = self.n_min - 1
        return {
            "label": self.label,
            "horizon": self.horizon,
            "tail_min": self.tail_min,
            "tail_max": self.tail_max,
            "max_F_eps": float(self.fraction(eps)[lo:].max()),
            "min_F_delta": float(self.fraction(delta)[lo:].min()),
            "delta": delta,
            "eps": eps,
            "tol": tol,
            "n_min": self.n_min,
            "li_yorke": self.li_yorke_witness(delta),
            "dc": self.dc_witness(delta, eps, tol),
        }


def _pair_distance(ox: np.ndarray, oy: np.ndarray) -> np.ndarray:
    d = np.abs(np.asarray(ox, dtype=float) - np.asarray(oy, dtype=float))
    return d.max(axis=1) if d.ndim == 2 else d


def stats_from_orbits(ox, oy, eps_grid: Sequence[float], label: str = "") -> PairStats:
    return PairStats(_pair_distance(ox, oy), np.asarray(eps_grid, dtype=float), label)


def pair_stats(
    seq: MapSequence,
    x,
    y,
    horizon: int,
    eps_grid: Sequence[float],
    start: int = 0,
    bounds: CompactRegion | None = None,
) -> PairStats:
    """Statistics of d(f_0^i x, f_0^i y) for i < horizon by forward iteration.

    With ``bounds`` given, an orbit point outside it raises OrbitEscapes.
    """
    ox = orbit(seq, x, horizon - 1, start)
    oy = orbit(seq, y, horizon - 1, start)
    if bounds is not None:
        for o in (ox, oy):
            _check_bounded(o, bounds)
    return stats_from_orbits(ox, oy, eps_grid)


def _check_bounded(o: np.ndarray, bounds: CompactRegion, tol: float = 1e-12) -> None:
    for k, v in enumerate(o):
        if not bounds.contains_point(float(v), tol):
            raise OrbitEscapes(f"orbit point {v!r} outside {bounds.to_list()}", step=k)


@dataclass
class DecodedPair:
    stats: PairStats
    orbits: tuple[np.ndarray, np.ndarray]
    residual: float
    bounded: bool


def decoded_pair_stats(
    sub: CodedSubsystem,
    alpha: SymbolGenerator,
    beta: SymbolGenerator,
    horizon: int,
    eps_grid: Sequence[float] | None = None,
) -> DecodedPair:
    """Pair statistics for the decoded orbits of two symbol sequences.

    The orbits are x_i = h_i(shift^i alpha); the residual column records how
    far they are from being true orbits of the map sequence.
    """
    ox = sub.decoded_orbit(alpha, horizon)
    oy = sub.decoded_orbit(beta, horizon)
    if eps_grid is None:
        lo, hi = sub.fam.outer_region().hull()
        eps_grid = default_eps_grid(sub.separation, hi - lo)
    outer = sub.fam.outer_region()
    bounded = all(outer.contains_point(float(v), 1e-12) for o in (ox, oy) for v in o)
    residual = max(sub.orbit_residual(ox), sub.orbit_residual(oy))
    return DecodedPair(stats_from_orbits(ox, oy, eps_grid, "decoded"), (ox, oy), residual, bounded)


def subshift_pair_stats(
    matrix: TransitionMatrix,
    alpha: SymbolGenerator,
    beta: SymbolGenerator,
    horizon: int,
    eps_grid: Sequence[float] | None = None,
    depth: int = METRIC_DEPTH,
) -> PairStats:
    """Statistics of rho(shift^i alpha, shift^i beta), metric truncated at ``depth``."""
    a = np.array(alpha.prefix(horizon + depth))
    b = np.array(beta.prefix(horizon + depth))
    for s in np.concatenate([a, b]):
        matrix.check_symbol(int(s))
    diff = (a != b).astype(float)
    weights = np.ldexp(1.0, -np.arange(depth))
    # d_i = sum_{k<depth} diff[i+k] / 2^k
    windows = np.lib.stride_tricks.sliding_window_view(diff, depth)[:horizon]
    d = windows @ weights
    if eps_grid is None:
        eps_grid = np.geomspace(2.0**-depth, 2.0, 16)
    return PairStats(d, np.asarray(eps_grid, dtype=float), "symbolic")


# --------------------------------------------------------------------------
# entropy


@dataclass
class EntropyEstimate:
    method: str
    ns: list[int]
    values: list[float]
    rate: float
    reference: float
    note: str = ""
    counts: list[int] = field(default_factory=list)

    def rows(self) -> list[list]:
        out = [["method", "n", "count", "value", "reference"]]
        for k, (n, v) in enumerate(zip(self.ns, self.values)):
            c = self.counts[k] if self.counts else ""
            out.append([self.method, n, c, repr(float(v)), repr(float(self.reference))])
        return out


def word_count_entropy(matrix: TransitionMatrix, n_max: int) -> EntropyEstimate:
    """(1/n) log count_words(n), exact on the symbolic side."""
    ns = list(range(1, n_max + 1))
    counts = [count_words(matrix, n) for n in ns]
    values = [math.log(c) / n for c, n in zip(counts, ns)]
    return EntropyEstimate(
        "word_count", ns, values, values[-1], math.log(spectral_radius(matrix)), "exact word counts", counts
    )


def _require_covering(sub: CodedSubsystem) -> None:
    report = check_covering_1d(sub.seq, sub.fam, samples=200)
    if not report.weak_ce:
        raise CoveringRequired("the covering family fails the coupled-expansion check")


def _cell_table(sub: CodedSubsystem, n: int) -> list[tuple[tuple[int, ...], CompactRegion]]:
    """Every admissible word of length n with a nonempty cell at time 0.

    Cells are built by the backward recursion with a memo keyed by
    (suffix, start time), so each suffix cell is computed once.
    """
    cache = sub.__dict__.setdefault("_cell_tables", {})
    if n in cache:
        return cache[n]
    memo: dict[tuple[tuple[int, ...], int], CompactRegion] = {}
    mat = sub.fam.matrix

    def cell(word: tuple[int, ...], t: int) -> CompactRegion:
        key = (word, t)
        got = memo.get(key)
        if got is None:
            v = sub.fam.set_at(word[0], t)
            if len(word) == 1:
                got = CompactRegion.from_intervals([v])
            else:
                got = preimage_in(sub.seq.map_at(t), cell(word[1:], t + 1), v)
            memo[key] = got
        return got

    out = []
    stack = [(s,) for s in range(mat.n_symbols, 0, -1)]
    while stack:
        w = stack.pop()
        if len(w) == n:
            c = cell(w, 0)
            if not c.is_empty:
                out.append((w, c))
            continue
        for s in reversed(mat.successors(w[-1])):
            stack.append(w + (s,))
    cache[n] = out
    return out


def _symbols(sub: CodedSubsystem, t: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Symbol i with [lo, hi] inside V_{i,t} (0 when there is none)."""
    tol = 1e-12
    out = np.zeros(lo.shape, dtype=np.int64)
    for i, (a, b) in enumerate(sub.fam.sets_at(t), start=1):
        inside = (lo >= a - tol) & (hi <= b + tol)
        out = np.where((out == 0) & inside, i, out)
    return out


def _count_words(sub: CodedSubsystem, points: np.ndarray, n: int) -> list[int]:
    """Distinct realized words of each length 1..n for the given K samples.

    ``points`` has shape (cells, k): each row is a finite set K whose symbol at
    time t is the i with f^t(K) inside V_{i,t}.  Rows that leave the family
    drop out from that step on.
    """
    words = np.zeros((points.shape[0], n), dtype=np.int64)
    p = points.copy()
    for t in range(n):
        words[:, t] = _symbols(sub, t, p.min(axis=1), p.max(axis=1))
        if t + 1 < n:
            p = sub.seq.map_at(t).values(p)
    counts = []
    for k in range(1, n + 1):
        w = words[:, :k]
        ok = (w > 0).all(axis=1)
        counts.append(len(np.unique(w[ok], axis=0)) if ok.any() else 0)
    return counts


def itinerary_count_entropy(sub: CodedSubsystem, n_max: int) -> EntropyEstimate:
    """(1/n) log of the number of distinct itineraries of decoded cell midpoints.

    One point per nonempty cell of depth n_max - 1 forms the net; a lower
    bound in flavour, because cells that are realized but whose midpoint
    itinerary is corrupted by rounding are not counted.
    """
    _require_covering(sub)
    table = _cell_table(sub, n_max)
    if not table:
        raise InsufficientSamples("no nonempty cells")
    mids = np.array([[c.midpoint()] for _, c in table])
    counts = _count_words(sub, mids, n_max)
    return _estimate("itinerary_count", counts, sub.fam.matrix, "decoded midpoints of all nonempty cells")


def induced_entropy_probe(
    sub: CodedSubsystem, n_max: int, samples: int = 2, seed: int = 0, singleton: bool = False
) -> EntropyEstimate:
    """Itinerary counting for the induced set map.

    Each nonempty cell contributes one finite sub-region K (``samples``
    random points of the cell, or its midpoint when ``singleton``); the
    symbol at time t is the i with f^t(K) inside V_{i,t}.
    """
    _require_covering(sub)
    if samples < 1:
        raise InsufficientSamples("need at least one point per region")
    table = _cell_table(sub, n_max)
    rng = np.random.default_rng(seed)
    if singleton:
        pts = np.array([[c.midpoint()] for _, c in table])
    else:
        lo = np.array([c.hull()[0] for _, c in table])
        hi = np.array([c.hull()[1] for _, c in table])
        # interior points of the cell hull; a cell of this depth is one interval
        u = 0.25 + 0.5 * rng.random((len(table), samples))
        pts = lo[:, None] + (hi - lo)[:, None] * u
    counts = _count_words(sub, pts, n_max)
    return _estimate("induced_itinerary", counts, sub.fam.matrix, "sub-regions of nonempty cells")


def _estimate(method: str, counts: list[int], matrix: TransitionMatrix, note: str) -> EntropyEstimate:
    ns = list(range(1, len(counts) + 1))
    values = [math.log(c) / n if c > 0 else -math.inf for c, n in zip(counts, ns)]
    return EntropyEstimate(method, ns, values, values[-1], math.log(spectral_radius(matrix)), note, counts)


def separated_counts(orbits: np.ndarray, n: int, eps_list: Sequence[float]) -> list[int]:
    """Sizes of greedy (n, eps)-separated sets in the Bowen metric.

    The sets are nested: the set for the largest eps seeds the greedy pass for
    the next smaller one (an eps'-separated set is eps-separated for eps < eps'),
    so the counts are nonincreasing in eps by construction.
    """
    o = np.asarray(orbits, dtype=float)[:, :n]
    if o.ndim == 3:
        diff = np.abs(o[:, None, :, :] - o[None, :, :, :]).max(axis=3).max(axis=2)
    else:
        diff = np.abs(o[:, None, :] - o[None, :, :]).max(axis=2)
    order = sorted(range(len(eps_list)), key=lambda k: -eps_list[k])
    chosen: list[int] = []
    taken = np.zeros(o.shape[0], dtype=bool)
    counts = [0] * len(eps_list)
    for k in order:
        eps = eps_list[k]
        for idx in range(o.shape[0]):
            if not taken[idx] and (diff[idx, chosen] > eps).all():
                chosen.append(idx)
                taken[idx] = True
        counts[k] = len(chosen)
    return counts


def separated_set_entropy(
    seq: MapSequence,
    domain: tuple[float, float],
    n_max: int,
    eps: float,
    samples: int = 400,
    seed: int = 0,
    reference: float = math.nan,
) -> EntropyEstimate:
    """Heuristic growth rate of greedy (n, eps)-separated sets on sampled orbits.

    An estimator only, not the open-cover entropy.  ``rate`` is the slope of
    log count against n over the second half of the range.
    """
    if samples < 2:
        raise InsufficientSamples("need at least two sample orbits")
    rng = np.random.default_rng(seed)
    lo, hi = domain
    starts = lo + (hi - lo) * rng.random(samples)
    orbits = np.empty((samples, n_max))
    orbits[:, 0] = starts
    for t in range(1, n_max):
        f = seq.map_at(t - 1)
        prev = orbits[:, t - 1]
        orbits[:, t] = f.values(prev) if hasattr(f, "values") else [f(v) for v in prev]
    ns = list(range(1, n_max + 1))
    counts = [separated_counts(orbits, n, [eps])[0] for n in ns]
    logs = np.log(counts)
    half = max(1, n_max // 2)
    if n_max - half >= 2:
        rate = float(np.polyfit(ns[half:], logs[half:], 1)[0])
    else:
        rate = float(logs[-1] / ns[-1])
    values = [float(v) / n for v, n in zip(logs, ns)]
    return EntropyEstimate(
        "separated_set", ns, values, rate, reference,
        "estimator, not the open-cover entropy of the definition", counts,
    )


def entropy_estimate(method: str, **kwargs) -> EntropyEstimate:
    if method == "word_count":
        return word_count_entropy(kwargs["matrix"], kwargs["n_max"])
    if method == "itinerary_count":
        return itinerary_count_entropy(kwargs["sub"], kwargs["n_max"])
    if method == "separated_set":
        return separated_set_entropy(**kwargs)
    if method == "induced":
        return induced_entropy_probe(**kwargs)
    raise ValueError(f"unknown entropy method {method!r}")
