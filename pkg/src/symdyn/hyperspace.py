"""Induced set-valued dynamics and desk checks of the hyperspace results.

The hyperspace of compact subsets is never enumerated.  Its members are
exercised by sampling random compact sub-regions with a seeded generator;
each membership test on a sample is exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from symdyn.coding import CodedSubsystem
from symdyn.errors import DimensionMismatch, OutOfDomain
from symdyn.maps import Map1D, MapSequence, image_of_region, preimage_in
from symdyn.regions import CompactRegion, directed_distance, hausdorff
from symdyn.symbolic import SymbolGenerator

__all__ = [
    "CompactRegion",
    "hausdorff",
    "induced_step",
    "induced_orbit",
    "orbit_summary",
    "sample_subregion",
    "is_hyper_member",
    "hyper_cell_check",
    "induced_covering_check",
    "hausdorff_contraction_probe",
    "lipschitz_transfer_check",
]

# rounding slack for subset tests on computed images
SUBSET_TOL = 1e-12


def induced_step(seq: MapSequence, n: int, a: CompactRegion) -> CompactRegion:
    """f_n(A): exact interval-union image in 1D, pointwise image in 2D."""
    if a.is_empty:
        raise ValueError("induced map acts on nonempty compact sets")
    if seq.dimension == 1:
        if a.points:
            raise DimensionMismatch("1D sequence applied to a 2D point set")
        return image_of_region(seq.map_at(n), a)
    if a.intervals:
        raise DimensionMismatch("2D sequence applied to a 1D region")
    return CompactRegion.from_points(seq.map_at(n)(a.as_array()))


def induced_orbit(seq: MapSequence, a0: CompactRegion, steps: int, start: int = 0) -> list[CompactRegion]:
    """A_0, ..., A_steps with A_{k+1} = f_{start+k}(A_k)."""
    out = [a0]
    a = a0
    for k in range(steps):
        try:
            a = induced_step(seq, start + k, a)
        except OutOfDomain as exc:
            raise OutOfDomain(f"set orbit left the domain at step {k}: {exc}", step=k) from exc
        out.append(a)
    return out


def orbit_summary(regions: Sequence[CompactRegion]) -> list[dict]:
    rows = []
    for k, r in enumerate(regions):
        row = {"step": k, "component_count": r.component_count, "diameter": r.diameter()}
        if r.dim == 1:
            row["hull_lo"], row["hull_hi"] = r.hull()
        rows.append(row)
    return rows


def sample_subregion(region: CompactRegion, rng: np.random.Generator, max_parts: int = 3) -> CompactRegion:
    """Random nonempty compact subset of a 1D region.

    A quarter of the samples are singletons; the rest are unions of up to
    ``max_parts`` random sub-intervals of randomly chosen components.
    """
    comps = region.intervals
    if rng.random() < 0.25:
        lo, hi = comps[int(rng.integers(len(comps)))]
        x = lo + (hi - lo) * rng.random()
        return CompactRegion.point(x)
    parts = []
    for _ in range(int(rng.integers(1, max_parts + 1))):
        lo, hi = comps[int(rng.integers(len(comps)))]
        u, v = sorted(lo + (hi - lo) * rng.random(2))
        parts.append((u, v))
    return CompactRegion.from_intervals(parts)


def _member_of(k: CompactRegion, iv: tuple[float, float]) -> bool:
    lo, hi = k.hull()
    return lo >= iv[0] - SUBSET_TOL and hi <= iv[1] + SUBSET_TOL


def is_hyper_member(sub: CodedSubsystem, k: CompactRegion, prefix: Sequence[int], n: int) -> bool:
    """K in H_alpha^{m,n}: f_n^j(K) inside V_{a_j, n+j} for every j <= m."""
    for j, sym in enumerate(prefix):
        if not _member_of(k, sub.fam.set_at(sym, n + j)):
            return False
        if j + 1 < len(prefix):
            k = induced_step(sub.seq, n + j, k)
    return True


@dataclass
class HyperCellReport:
    prefix: tuple[int, ...]
    n: int
    cell: CompactRegion
    members_checked: int = 0
    member_failures: int = 0
    exterior_checked: int = 0
    exterior_accepted: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.member_failures == 0 and self.exterior_accepted == 0


def hyper_cell_check(
    sub: CodedSubsystem, prefix: Sequence[int], n: int = 0, samples: int = 50, seed: int = 0
) -> HyperCellReport:
    """Compare membership in H_alpha^{m,n} with containment in V_alpha^{m,n}.

    Sub-regions of the nested cell must be members.  Regions that add a point
    of V_{a_0,n} lying outside the cell must not be, since that point's orbit
    leaves the prescribed sets at some step.
    """
    rng = np.random.default_rng(seed)
    cell = sub.nested_cell(prefix, n)
    report = HyperCellReport(cell.prefix, n, cell.region)
    for _ in range(samples):
        k = sample_subregion(cell.region, rng)
        report.members_checked += 1
        if not is_hyper_member(sub, k, cell.prefix, n):
            report.member_failures += 1
            report.failures.append(f"member {k.to_list()} rejected")
    outer = CompactRegion.from_intervals([sub.fam.set_at(cell.prefix[0], n)])
    for _ in range(samples):
        x = _exterior_point(outer, cell.region, rng)
        if x is None:
            break
        k = sample_subregion(cell.region, rng).union(CompactRegion.point(x))
        report.exterior_checked += 1
        if is_hyper_member(sub, k, cell.prefix, n):
            report.exterior_accepted += 1
            report.failures.append(f"region with exterior point {x!r} accepted")
    return report


def _exterior_point(outer: CompactRegion, cell: CompactRegion, rng, gap: float = 1e-9, tries: int = 200):
    lo, hi = outer.hull()
    for _ in range(tries):
        x = lo + (hi - lo) * rng.random()
        if cell.distance_to_point(x) > gap:
            return x
    return None


@dataclass
class CoveringCheckRow:
    n: int
    i: int
    j: int
    samples: int
    failures: int
    worst_residual: float


def induced_covering_check(
    sub: CodedSubsystem, n: int, samples: int = 50, seed: int = 0, tol: float = 1e-9
) -> list[CoveringCheckRow]:
    """For a_ij = 1, every K in <V_{j,n+1}> has a preimage K_0 in <V_{i,n}>.

    K_0 is the exact preimage of K inside V_{i,n}; the check is that it is
    nonempty and f_n(K_0) equals K in the Hausdorff metric.  Sub-regions of
    K_0 must map into K as well (preimages of hyperspace cells).
    """
    rng = np.random.default_rng(seed)
    f = sub.seq.map_at(n)
    rows = []
    for i in range(1, sub.fam.matrix.n_symbols + 1):
        v_in = sub.fam.set_at(i, n)
        for j in sub.fam.matrix.successors(i):
            target = CompactRegion.from_intervals([sub.fam.set_at(j, n + 1)])
            fails = 0
            worst = 0.0
            for _ in range(samples):
                k = sample_subregion(target, rng)
                k0 = preimage_in(f, k, v_in)
                if k0.is_empty:
                    fails += 1
                    worst = math.inf
                    continue
                res = hausdorff(image_of_region(f, k0), k)
                inner = image_of_region(f, sample_subregion(k0, rng))
                res = max(res, directed_distance(inner, k))
                worst = max(worst, res)
                fails += res >= tol
            rows.append(CoveringCheckRow(n, i, j, samples, fails, worst))
    return rows


@dataclass
class ContractionRow:
    depth: int
    cell_diameter: float
    member_spread: float
    singleton_gap: float


def hausdorff_contraction_probe(
    sub: CodedSubsystem,
    alpha: SymbolGenerator | Sequence[int],
    depths: Sequence[int],
    n: int = 0,
    samples: int = 20,
    seed: int = 0,
) -> list[ContractionRow]:
    """Diameter of V_alpha^{m,n} against the Hausdorff spread of sampled members.

    Members include the singletons at both ends of the cell, so the spread
    equals the cell diameter whenever the sampling is correct; ``singleton_gap``
    records |H({x},{y}) - |x - y|| for those two singletons.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for m in depths:
        word = alpha.prefix(m + 1) if isinstance(alpha, SymbolGenerator) else tuple(alpha[: m + 1])
        cell = sub.nested_cell(word, n).region
        lo, hi = cell.hull()
        ends = [CompactRegion.point(lo), CompactRegion.point(hi)]
        members = ends + [sample_subregion(cell, rng) for _ in range(samples)]
        spread = max(hausdorff(a, b) for a in members for b in members)
        gap = abs(hausdorff(ends[0], ends[1]) - (hi - lo))
        rows.append(ContractionRow(m, cell.diameter(), spread, gap))
    return rows


def lipschitz_transfer_check(
    seq: MapSequence, region: CompactRegion, n: int, pairs: int = 1000, seed: int = 0
) -> tuple[int, float]:
    """Count pairs with H(f(A), f(B)) > L * H(A, B) for A, B inside ``region``.

    L is the exact sup of |f_n'| over the hull of the region, so any
    violation beyond rounding would be a bug.  Returns (violations, L).
    """
    f = seq.map_at(n)
    if not isinstance(f, Map1D):
        raise DimensionMismatch("Lipschitz transfer check is implemented for 1D maps")
    rng = np.random.default_rng(seed)
    lo, hi = region.hull()
    lip = f.max_abs_derivative(lo, hi)
    bad = 0
    for _ in range(pairs):
        a, b = sample_subregion(region, rng), sample_subregion(region, rng)
        lhs = hausdorff(image_of_region(f, a), image_of_region(f, b))
        if lhs > lip * hausdorff(a, b) + SUBSET_TOL:
            bad += 1
    return bad, lip
