"""Symbolic coding of a 1D coupled-expanding system.

Nested cells V_alpha^{m,n} are built backwards: start from the last covering
set and pull it back one step at a time with exact preimages, intersecting
with the covering set of each earlier symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from symdyn.errors import (
    BoundaryAmbiguity,
    EmptyCell,
    NoContraction,
    NotOneDimensional,
    OrbitEscapes,
    SeparationViolation,
)
from symdyn.expansion import CoveringFamily, separation
from symdyn.maps import MapSequence, preimage_in
from symdyn.regions import CompactRegion
from symdyn.symbolic import (
    ExplicitGenerator,
    RandomAdmissibleGenerator,
    SymbolGenerator,
    check_admissible,
)

DEPTH_CAP = 64
DECODE_TOL = 1e-9
# points this close outside a covering set still count as members
MEMBER_TOL = 1e-12


@dataclass(frozen=True)
class NestedCell:
    prefix: tuple[int, ...]
    n: int
    region: CompactRegion

    @property
    def depth(self) -> int:
        return len(self.prefix) - 1

    def diameter(self) -> float:
        return self.region.diameter()


@dataclass(frozen=True)
class Decoded:
    x: float
    depth_used: int
    diameter: float


class CodedSubsystem:
    """A 1D map sequence with a covering family, ready for coding.

    ``lam`` is an optional expansion lower bound; when given, decoding starts
    at the depth where the predicted cell diameter first drops below the
    tolerance instead of at depth zero.  The result is the same cell either
    way once that depth already meets the tolerance.
    """

    def __init__(
        self,
        seq: MapSequence,
        fam: CoveringFamily,
        tol: float = DECODE_TOL,
        depth_cap: int = DEPTH_CAP,
        lam: float | None = None,
    ):
        if seq.dimension != 1 or fam.dimension != 1:
            raise NotOneDimensional("coding is implemented for 1D scenarios")
        self.seq = seq
        self.fam = fam
        self.tol = tol
        self.depth_cap = depth_cap
        self.lam = lam
        outer_sep, step_sep, _ = separation(fam)
        self.separation = min(outer_sep, step_sep)
        if self.separation <= 0:
            raise SeparationViolation("coding needs strictly separated covering sets")

    # cells

    def nested_cell(self, prefix: Sequence[int], n: int = 0) -> NestedCell:
        word = check_admissible(self.fam.matrix, prefix)
        m = len(word) - 1
        cell = CompactRegion.from_intervals([self.fam.set_at(word[m], n + m)])
        for k in range(m - 1, -1, -1):
            cell = preimage_in(self.seq.map_at(n + k), cell, self.fam.set_at(word[k], n + k))
            if cell.is_empty:
                raise EmptyCell(f"cell for {word[k:]} at time {n + k} is empty", prefix=word)
        return NestedCell(word, n, cell)

    def _start_depth(self) -> int:
        if self.lam is None or self.lam <= 1:
            return 0
        d0 = self.fam.max_outer_diameter()
        return max(0, min(self.depth_cap, int(math.ceil(math.log(d0 / self.tol) / math.log(self.lam))) - 2))

    def decode(self, alpha: SymbolGenerator | Sequence[int], n: int = 0, tol: float | None = None) -> Decoded:
        """Point of Lambda_n coded by ``alpha``: midpoint of the first cell with diameter < tol.

        A finite word can only be decoded as deep as its length allows.
        """
        tol = self.tol if tol is None else tol
        if isinstance(alpha, SymbolGenerator):
            cap = self.depth_cap
            word = lambda m: alpha.prefix(m + 1)  # noqa: E731
        else:
            alpha = tuple(alpha)
            cap = min(self.depth_cap, len(alpha) - 1)
            word = lambda m: alpha[: m + 1]  # noqa: E731
        m = min(self._start_depth(), cap) if tol == self.tol else 0
        while True:
            cell = self.nested_cell(word(m), n)
            d = cell.diameter()
            if d < tol:
                return Decoded(cell.region.midpoint(), m, d)
            if m >= cap:
                raise NoContraction(f"cell diameter {d:.3e} still >= {tol:.1e} at depth {m}")
            m += 1

    def decode_point(self, alpha, n: int = 0) -> float:
        return self.decode(alpha, n).x

    # itineraries

    def symbol_of(self, x: float, t: int, step: int = 0) -> int:
        """The unique i with x in V_{i,t} (up to MEMBER_TOL)."""
        near = []
        for i, (lo, hi) in enumerate(self.fam.sets_at(t), start=1):
            d = max(0.0, lo - x, x - hi)
            near.append((d, i))
        inside = [i for d, i in near if d <= MEMBER_TOL]
        if not inside:
            raise OrbitEscapes(f"x = {x!r} lies in no covering set at time {t}", step=step)
        if len(inside) > 1:
            raise BoundaryAmbiguity(f"x = {x!r} lies in several covering sets at time {t}", step=step)
        amb = self.separation / 1e3
        close = [i for d, i in near if d <= amb]
        if len(close) > 1:
            raise BoundaryAmbiguity(f"x = {x!r} is within {amb:.1e} of several covering sets at time {t}", step=step)
        return inside[0]

    def itinerary(self, x: float, n: int, steps: int) -> tuple[int, ...]:
        out = []
        y = float(x)
        for k in range(steps):
            out.append(self.symbol_of(y, n + k, step=k))
            if k + 1 < steps:
                y = self.seq.map_at(n + k)(y)
        return check_admissible(self.fam.matrix, out)

    def decoded_orbit(self, alpha: SymbolGenerator, horizon: int, start: int = 0) -> np.ndarray:
        """x_i = decode(shift^i alpha, start + i) for i < horizon.

        Forward iteration of one decoded point loses every digit after a few
        dozen expanding steps; decoding each shifted sequence keeps every
        orbit point accurate to the tolerance.
        """
        return np.array([self.decode(alpha.shifted(i), start + i).x for i in range(horizon)])

    def orbit_residual(self, orbit: np.ndarray, start: int = 0) -> float:
        """max |f_{start+i}(x_i) - x_{i+1}| along a decoded orbit."""
        if len(orbit) < 2:
            return 0.0
        return max(abs(self.seq.map_at(start + i)(float(orbit[i])) - float(orbit[i + 1])) for i in range(len(orbit) - 1))


@dataclass
class ConjugacyResidual:
    trials: int
    max_equivariance: float
    max_roundtrip: float
    symbol_mismatches: int
    max_depth: int
    seed: int


def conjugacy_residual(
    sub: CodedSubsystem, trials: int = 1000, horizon: int = 64, seed: int = 0
) -> ConjugacyResidual:
    """Check h_{n+1} o sigma = f_n o h_n and the itinerary round trip on random samples."""
    rng = np.random.default_rng(seed)
    eq = rt = 0.0
    mism = 0
    depth = 0
    for t in range(trials):
        alpha = RandomAdmissibleGenerator(sub.fam.matrix, seed=int(rng.integers(2**31)))
        n = int(rng.integers(horizon))
        dec = sub.decode(alpha, n)
        nxt = sub.decode(alpha.shifted(1), n + 1)
        eq = max(eq, abs(sub.seq.map_at(n)(dec.x) - nxt.x))
        word = sub.itinerary(dec.x, n, dec.depth_used + 1)
        mism += sum(a != b for a, b in zip(word, alpha.prefix(dec.depth_used + 1)))
        back = sub.decode(word, n)
        rt = max(rt, abs(back.x - dec.x))
        depth = max(depth, dec.depth_used)
    return ConjugacyResidual(trials, eq, rt, mism, depth, seed)


def equi_modulus_probe(
    sub: CodedSubsystem, depths: Sequence[int], pairs: int = 200, horizon: int = 64, seed: int = 0
) -> list[tuple[int, float]]:
    """Worst |h_n(alpha) - h_n(beta)| over random pairs agreeing on symbols 0..depth.

    The pair shares the nested cell of that depth, so the distance is bounded
    by the cell diameter.
    """
    rng = np.random.default_rng(seed)
    mat = sub.fam.matrix
    out = []
    for depth in depths:
        worst = 0.0
        for _ in range(pairs):
            alpha = RandomAdmissibleGenerator(mat, seed=int(rng.integers(2**31)))
            head = alpha.prefix(depth + 1)
            succ = mat.successors(head[-1])
            # branch at the next index whenever the matrix allows it
            nxt_a = alpha.symbol(depth + 1)
            options = [s for s in succ if s != nxt_a] or list(succ)
            first = int(options[int(rng.integers(len(options)))])
            tail = RandomAdmissibleGenerator(mat, seed=int(rng.integers(2**31)), first=first)
            beta = _concat(head, tail)
            n = int(rng.integers(horizon))
            worst = max(worst, abs(sub.decode(alpha, n).x - sub.decode(beta, n).x))
        out.append((depth, worst))
    return out


def _concat(head: tuple[int, ...], tail: SymbolGenerator) -> SymbolGenerator:
    return ExplicitGenerator(tuple(head), tail)
