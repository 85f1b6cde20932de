"""Checks for (strict) weak A-coupled-expansion of a map sequence.

Per-step covering families must be periodic; together with a periodic map
sequence that turns the "for every n" quantifier into a finite check over
one joint period, which the report records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from symdyn.errors import (
    AperiodicRule,
    DegenerateRegion,
    FaceTestInconclusive,
    NotOneDimensional,
    NotTwoDimensional,
    SeparationViolation,
)
from symdyn.maps import MapSequence, image_of_interval, lipschitz_band
from symdyn.regions import Box, CompactRegion, Interval, box_distance, directed_distance, interval_distance
from symdyn.symbolic import TransitionMatrix, is_irreducible, row_sum_at_least_two

CoverSet = Union[Interval, Box]


@dataclass(frozen=True)
class CoveringFamily:
    """Outer sets V_i and a periodic rule n -> (V_{1,n}, ..., V_{N,n}).

    ``steps[k]`` holds the sets used at every n with n % len(steps) == k.
    """

    matrix: TransitionMatrix
    outer: tuple[CoverSet, ...]
    steps: tuple[tuple[CoverSet, ...], ...]
    mode: str = "strict"

    def __post_init__(self):
        n = self.matrix.n_symbols
        if len(self.outer) != n:
            raise ValueError(f"need {n} outer sets, got {len(self.outer)}")
        if not self.steps:
            raise AperiodicRule("per-step rule needs at least one entry")
        if self.mode not in ("strict", "weak"):
            raise ValueError(f"mode must be 'strict' or 'weak', not {self.mode!r}")
        for k, sets in enumerate(self.steps):
            if len(sets) != n:
                raise ValueError(f"step {k} lists {len(sets)} sets, expected {n}")
            for i, (v, outer) in enumerate(zip(sets, self.outer)):
                if not _inside(v, outer):
                    raise ValueError(f"V_{{{i + 1},{k}}} = {v} is not inside V_{i + 1} = {outer}")

    @property
    def dimension(self) -> int:
        return 2 if isinstance(self.outer[0], Box) else 1

    @property
    def period(self) -> int:
        return len(self.steps)

    def sets_at(self, n: int) -> tuple[CoverSet, ...]:
        return self.steps[n % len(self.steps)]

    def set_at(self, i: int, n: int) -> CoverSet:
        """V_{i,n} with the symbol i in 1..N."""
        return self.steps[n % len(self.steps)][i - 1]

    def max_outer_diameter(self) -> float:
        return max(_diameter(v) for v in self.outer)

    def union_hull(self, horizon: int | None = None) -> CoverSet:
        """Hull of E = union of all V_{i,n} (one period is enough)."""
        sets = [v for step in self.steps for v in step]
        if self.dimension == 1:
            return (min(v[0] for v in sets), max(v[1] for v in sets))
        return Box(min(v.lo1 for v in sets), max(v.hi1 for v in sets), min(v.lo2 for v in sets), max(v.hi2 for v in sets))

    def outer_region(self) -> CompactRegion:
        if self.dimension != 1:
            raise NotOneDimensional("outer_region is defined for 1D families")
        return CompactRegion.from_intervals(self.outer)


def _inside(v: CoverSet, outer: CoverSet) -> bool:
    if isinstance(v, Box):
        return outer.lo1 <= v.lo1 <= v.hi1 <= outer.hi1 and outer.lo2 <= v.lo2 <= v.hi2 <= outer.hi2
    return outer[0] <= v[0] <= v[1] <= outer[1]


def _diameter(v: CoverSet) -> float:
    return v.diameter() if isinstance(v, Box) else v[1] - v[0]


def _distance(a: CoverSet, b: CoverSet) -> float:
    return box_distance(a, b) if isinstance(a, Box) else interval_distance(a, b)


@dataclass
class StepCheck:
    n: int
    i: int
    covered: bool
    margin: float
    status: str = "covered"


@dataclass
class ExpansionReport:
    horizon: int
    period: int | None
    rows: list[StepCheck]
    separation: float
    step_separation: float
    lambda_lower: float
    lambda_by_step: list[float]
    weak_ce: bool
    strict_weak_ce: bool
    h1_implied: bool
    h2_implied: bool
    step_disjoint: bool
    bounded: bool = True
    notes: list[str] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)

    def lambda_at(self, n: int) -> float:
        return self.lambda_by_step[self.steps.index(n)]

    @property
    def min_margin(self) -> float:
        return min(r.margin for r in self.rows)

    def to_csv_rows(self) -> list[list]:
        rows = [["n", "i", "covered", "margin", "status", "lambda_step"]]
        for r in sorted(self.rows, key=lambda r: (r.n, r.i)):
            lam = self.lambda_at(r.n)
            rows.append([r.n, r.i, int(r.covered), repr(float(r.margin)), r.status, repr(float(lam))])
        return rows

    def summary(self) -> dict:
        return {
            "horizon": self.horizon,
            "period": self.period,
            "weak_ce": self.weak_ce,
            "strict_weak_ce": self.strict_weak_ce,
            "H1_implied": self.h1_implied,
            "H2_implied": self.h2_implied,
            "separation": self.separation,
            "step_separation": self.step_separation,
            "lambda_lower": self.lambda_lower,
            "min_margin": self.min_margin,
            "notes": list(self.notes),
        }


# --------------------------------------------------------------------------
# separation


def separation(fam: CoveringFamily) -> tuple[float, float, bool]:
    """(outer separation, per-step separation, per-step sets disjoint).

    Raises SeparationViolation when the family breaks its declared mode.
    """
    n_sym = fam.matrix.n_symbols
    outer = min(_distance(fam.outer[i], fam.outer[j]) for i in range(n_sym) for j in range(i + 1, n_sym))
    per_step = math.inf
    disjoint = True
    for k, sets in enumerate(fam.steps):
        for i in range(n_sym):
            for j in range(i + 1, n_sym):
                d = _distance(sets[i], sets[j])
                per_step = min(per_step, d)
                if d == 0:
                    disjoint = False
                    if _overlap_interior(sets[i], sets[j]):
                        raise SeparationViolation(
                            f"V_{{{i + 1},{k}}} and V_{{{j + 1},{k}}} share interior points"
                        )
    if fam.mode == "strict" and (outer <= 0 or per_step <= 0):
        raise SeparationViolation(f"strict mode needs positive separation, got {min(outer, per_step)}")
    return outer, per_step, disjoint


def _overlap_interior(a: CoverSet, b: CoverSet) -> bool:
    if isinstance(a, Box):
        return min(a.hi1, b.hi1) > max(a.lo1, b.lo1) and min(a.hi2, b.hi2) > max(a.lo2, b.lo2)
    return min(a[1], b[1]) > max(a[0], b[0])


# --------------------------------------------------------------------------
# expansion constant


def _exact_slope_inf(fmap, iv: Interval) -> float:
    best = math.inf
    for expr, a, b in fmap.segments(iv[0], iv[1]):
        if b > a:
            best = min(best, expr.min_abs_derivative(a, b))
    return best


def step_expansion(
    seq: MapSequence, fam: CoveringFamily, n: int, samples: int = 2000, seed: int = 0
) -> float:
    """min over i of the expansion of f_n on V_{i,n} (sampled and, in 1D, exact)."""
    f = seq.map_at(n)
    best = math.inf
    for i in range(1, fam.matrix.n_symbols + 1):
        v = fam.set_at(i, n)
        lo, _ = lipschitz_band(seq, [v], samples, steps=(n,), seed=seed + 7919 * n + i)
        if fam.dimension == 1:
            lo = min(lo, _exact_slope_inf(f, v))
        best = min(best, lo)
    return best


def expansion_constant(
    seq: MapSequence, fam: CoveringFamily, horizon: int, samples: int = 2000, seed: int = 0
) -> float:
    """Lower estimate of the expansion constant over steps n < horizon.

    For 1D pieces with closed-form derivatives the exact infimum of |f'| on
    each monotone segment is included, and the smaller of the two numbers is
    used for each step.
    """
    if samples < 2:
        raise DegenerateRegion("need at least 2 samples")
    return min(step_expansion(seq, fam, n, samples, seed) for n in range(horizon))


# --------------------------------------------------------------------------
# covering


def _joint_period(seq: MapSequence, fam: CoveringFamily) -> int | None:
    """lcm of the sequence and family periods; None for an aperiodic sequence."""
    seq_period = getattr(seq, "period", None)
    if seq_period is None:
        return None
    return math.lcm(int(seq_period), fam.period)


def _finish_report(seq, fam, horizon, rows, lam_by_step, notes, steps) -> ExpansionReport:
    outer_sep, step_sep, disjoint = separation(fam)
    weak = all(r.covered for r in rows)
    lam = min(lam_by_step)
    sep = min(outer_sep, step_sep)
    bounded = all(math.isfinite(_diameter(v)) for v in fam.outer)
    return ExpansionReport(
        horizon=horizon,
        period=_joint_period(seq, fam),
        rows=sorted(rows, key=lambda r: (r.n, r.i)),
        separation=sep,
        step_separation=step_sep,
        lambda_lower=lam,
        lambda_by_step=lam_by_step,
        weak_ce=weak,
        strict_weak_ce=weak and sep > 0,
        h1_implied=weak,
        h2_implied=lam > 1 and bounded,
        step_disjoint=disjoint,
        bounded=bounded,
        notes=notes,
        steps=list(steps),
    )


def check_covering_1d(
    seq: MapSequence, fam: CoveringFamily, horizon: int | None = None, samples: int = 2000, seed: int = 0
) -> ExpansionReport:
    """Exact image test f_n(V_{i,n}) >= union of V_{j,n+1} over a_ij = 1.

    The margin of a row is how far the covered targets sit inside the image
    (negative when some target sticks out, by its directed distance).
    """
    if seq.dimension != 1 or fam.dimension != 1:
        raise NotOneDimensional("check_covering_1d needs a 1D scenario")
    period = _joint_period(seq, fam)
    if period is None:
        raise AperiodicRule("map sequence does not declare a period")
    horizon = period if horizon is None else horizon
    if period > horizon:
        raise AperiodicRule(f"joint period {period} exceeds the verification horizon {horizon}")
    rows = []
    lam_by_step = []
    a = fam.matrix
    for n in range(horizon):
        f = seq.map_at(n)
        for i in range(1, a.n_symbols + 1):
            image = image_of_interval(f, fam.set_at(i, n))
            margin = math.inf
            for j in a.successors(i):
                c, e = fam.set_at(j, n + 1)
                margin = min(margin, _containment_margin(image, (c, e)))
            rows.append(StepCheck(n, i, margin >= 0, margin, "covered" if margin >= 0 else "failed"))
        lam_by_step.append(step_expansion(seq, fam, n, samples, seed))
    notes = [f"joint period {period}: rows for n < {horizon} cover every residue, so the verdict extends to all n"]
    return _finish_report(seq, fam, horizon, rows, lam_by_step, notes, range(horizon))


def _containment_margin(image: CompactRegion, target: Interval) -> float:
    c, e = target
    for p, q in image.intervals:
        if p <= c and e <= q:
            return min(c - p, q - e)
    # not inside one component, so some point of the target (an endpoint or a
    # gap midpoint) is at positive distance from the image
    return -directed_distance(CompactRegion.interval(c, e), image)


def check_covering_2d(
    seq: MapSequence,
    fam: CoveringFamily,
    horizon: int | None = None,
    grid: int = 201,
    steps: Iterable[int] | None = None,
    lipschitz_samples: int = 4000,
    seed: int = 0,
) -> ExpansionReport:
    """Face-sign covering test for coordinate-expanding box maps.

    For the box V_{i,n} and each axis k, component k of f_n must lie strictly
    below the smallest k-coordinate of the target union on the low face and
    strictly above the largest on the high face.  The faces are sampled on
    ``grid`` points; each sampled extreme is corrected by L*h (L the sampled
    Lipschitz upper bound, h the spacing).  By the Poincare-Miranda theorem
    the image then contains the hull box of the targets.
    """
    if seq.dimension != 2 or fam.dimension != 2:
        raise NotTwoDimensional("check_covering_2d needs a 2D scenario with box covering sets")
    if grid < 2:
        raise DegenerateRegion("grid needs at least 2 points")
    period = _joint_period(seq, fam)
    if steps is None:
        if horizon is None and period is None:
            raise AperiodicRule("aperiodic sequence: pass the steps to check")
        steps = range(horizon if horizon is not None else period)
    steps = sorted(set(steps))
    horizon = max(steps) + 1
    rows = []
    lam_by_step = []
    a = fam.matrix
    inconclusive = []
    for n in steps:
        f = seq.map_at(n)
        for i in range(1, a.n_symbols + 1):
            box = fam.set_at(i, n)
            targets = [fam.set_at(j, n + 1) for j in a.successors(i)]
            t_lo = (min(t.lo1 for t in targets), min(t.lo2 for t in targets))
            t_hi = (max(t.hi1 for t in targets), max(t.hi2 for t in targets))
            _, lip = lipschitz_band(seq, [box], lipschitz_samples, steps=(n,), seed=seed + 31 * n + i)
            margin = math.inf
            raw_ok = True
            for k in (0, 1):
                other = 1 - k
                lo_o, hi_o = box.lows[other], box.highs[other]
                ts = np.linspace(lo_o, hi_o, grid)
                h = (hi_o - lo_o) / (grid - 1)
                for face, want_below in ((box.lows[k], True), (box.highs[k], False)):
                    pts = np.empty((grid, 2))
                    pts[:, k] = face
                    pts[:, other] = ts
                    vals = f(pts)[:, k]
                    if want_below:
                        raw = t_lo[k] - vals.max()
                    else:
                        raw = vals.min() - t_hi[k]
                    raw_ok = raw_ok and raw > 0
                    margin = min(margin, raw - lip * h)
            if not raw_ok:
                status = "failed"
            elif margin > 0:
                status = "covered"
            else:
                status = "inconclusive"
                inconclusive.append((n, i))
            rows.append(StepCheck(n, i, status == "covered", float(margin), status))
        lam_by_step.append(step_expansion(seq, fam, n, lipschitz_samples, seed))
    if inconclusive and all(r.status != "failed" for r in rows):
        raise FaceTestInconclusive(f"corrected face bounds overlap at (n, i) = {inconclusive}; refine the grid")
    notes = ["2D covering certified by face signs with sampled Lipschitz correction"]
    if period is None:
        notes.append(f"aperiodic sequence: verdict covers the checked steps {steps} only")
    return _finish_report(seq, fam, horizon, rows, lam_by_step, notes, steps)


def check_covering(seq: MapSequence, fam: CoveringFamily, horizon: int | None = None, **kwargs) -> ExpansionReport:
    if fam.dimension == 1:
        return check_covering_1d(seq, fam, horizon, **kwargs)
    return check_covering_2d(seq, fam, horizon, **kwargs)


# --------------------------------------------------------------------------
# theorem applicability

THEOREM_HYPOTHESES: dict[str, tuple[str, ...]] = {
    "3.3": ("outer_separated", "equicontinuous", "H1"),
    "3.4": ("outer_separated", "equicontinuous", "weak_ce"),
    "3.5": ("H1", "H2"),
    "3.6": ("outer_separated", "equicontinuous", "H1", "H2"),
    "3.7": ("outer_separated", "equicontinuous", "weak_ce", "bounded", "lambda_gt_1"),
    "3.8": ("weak_ce", "compact_space", "outer_disjoint"),
    "4.1": ("H1", "H4"),
    "4.2": ("H4", "weak_ce"),
    "4.3": ("H1", "H4", "H2"),
    "4.4": ("H1", "H3", "equicontinuous", "outer_disjoint"),
    "4.5": ("weak_ce", "H3", "equicontinuous", "outer_disjoint"),
    "4.6": ("H1", "H2", "H3"),
    "4.7": ("H1", "H3", "equicontinuous", "outer_disjoint", "H2"),
    "4.8": ("weak_ce", "H3", "equicontinuous", "outer_disjoint", "bounded", "lambda_gt_1"),
    "4.9": ("weak_ce", "compact_space", "outer_disjoint"),
}

# theorems whose chaos conclusions additionally need the matrix conditions
CHAOS_THEOREMS = ("3.6", "3.7", "4.7", "4.8")


@dataclass
class Applicability:
    theorem: str
    applicable: bool
    predicates: dict[str, bool]
    chaos_conclusion: bool | None = None


def classify(
    report: ExpansionReport,
    matrix: TransitionMatrix,
    equicontinuous: bool = True,
    compact_space: bool = True,
    restricted_base: bool = False,
) -> list[Applicability]:
    """Which theorems have every hypothesis checked (or declared) at desk scale.

    ``equicontinuous`` and ``compact_space`` are scenario declarations, not
    computed facts.  ``restricted_base`` lets the set-valued theorems use the
    union of the bounded closed outer sets as the compact base space.
    """
    preds = {
        "weak_ce": report.weak_ce,
        "H1": report.h1_implied,
        "H2": report.h2_implied,
        "bounded": report.bounded,
        "lambda_gt_1": report.lambda_lower > 1,
        "outer_separated": report.separation > 0,
        "outer_disjoint": report.separation > 0,
        "equicontinuous": equicontinuous,
        "compact_space": compact_space,
        "irreducible": is_irreducible(matrix),
        "row_sum_ge_2": row_sum_at_least_two(matrix),
    }
    preds["H3"] = compact_space or (restricted_base and report.bounded)
    preds["H4"] = preds["H3"] and report.step_disjoint
    out = []
    for thm, needs in THEOREM_HYPOTHESES.items():
        checked = {p: preds[p] for p in needs}
        ok = all(checked.values())
        chaos = None
        if thm in CHAOS_THEOREMS:
            chaos = ok and preds["irreducible"] and preds["row_sum_ge_2"]
            checked["irreducible"] = preds["irreducible"]
            checked["row_sum_ge_2"] = preds["row_sum_ge_2"]
        out.append(Applicability(thm, ok, checked, chaos))
    return out


def applicable_theorems(results: Sequence[Applicability]) -> list[str]:
    return [r.theorem for r in results if r.applicable]
