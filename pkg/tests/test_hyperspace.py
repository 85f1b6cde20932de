import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symdyn.coding import CodedSubsystem
from symdyn.errors import DimensionMismatch
from symdyn.hyperspace import (
    hausdorff_contraction_probe,
    hyper_cell_check,
    induced_covering_check,
    induced_orbit,
    induced_step,
    is_hyper_member,
    lipschitz_transfer_check,
    sample_subregion,
)
from symdyn.maps import preimage_in
from symdyn.regions import CompactRegion, hausdorff
from symdyn.scenarios import example_51, example_52
from symdyn.symbolic import PeriodicGenerator

SC = example_51()
SUB = CodedSubsystem(SC.seq, SC.family)
ALL_F2 = example_51("all-f2")


@st.composite
def regions(draw, lo=0.0, hi=3.0):
    parts = []
    for _ in range(draw(st.integers(1, 3))):
        a, b = draw(st.floats(lo, hi)), draw(st.floats(lo, hi))
        parts.append((min(a, b), max(a, b)))
    return CompactRegion.from_intervals(parts)


class TestInducedMap:
    def test_paper_image(self):
        assert induced_step(SC.seq, 0, CompactRegion.interval(0, 0.25)).intervals == ((0.0, 3.0),)

    def test_singletons(self):
        for x in (0.1, 0.8, 2.5):
            img = induced_step(SC.seq, 0, CompactRegion.point(x))
            assert img.intervals == ((SC.seq.map_at(0)(x),) * 2,)

    def test_four_point_set(self):
        sc = example_52()
        a0 = sc.start_region()
        img = induced_step(sc.seq, 0, a0)
        expected = sorted(tuple(sc.seq.map_at(0)(p)) for p in sc.start_set)
        assert sorted(map(tuple, img.points)) == expected

    def test_fixed_point_orbit(self):
        orbit = induced_orbit(ALL_F2.seq, CompactRegion.point(0.0), 10)
        assert all(r.intervals == ((0.0, 0.0),) for r in orbit)

    def test_two_steps(self):
        orbit = induced_orbit(SC.seq, CompactRegion.interval(0, 0.25), 2)
        assert orbit[1].intervals == ((0.0, 3.0),)
        # exact image of [0,3] under f2, cross-checked by dense sampling
        xs = np.linspace(0, 3, 30001)
        ys = SC.seq.map_at(1).values(xs)
        lo, hi = orbit[2].hull()
        assert lo == pytest.approx(ys.min(), abs=1e-6) and hi == pytest.approx(ys.max(), abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            induced_step(SC.seq, 0, example_52().start_region())

    @settings(max_examples=200, deadline=None)
    @given(regions(), regions(), st.integers(0, 3))
    def test_functoriality(self, a, b, n):
        lhs = induced_step(SC.seq, n, a.union(b))
        rhs = induced_step(SC.seq, n, a).union(induced_step(SC.seq, n, b))
        assert hausdorff(lhs, rhs) <= 1e-12

    @pytest.mark.parametrize("n", [0, 1])
    def test_lipschitz_transfer(self, n):
        region = CompactRegion.from_intervals([SC.family.set_at(1, n), SC.family.set_at(2, n)])
        bad, lip = lipschitz_transfer_check(SC.seq, region, n, pairs=1000)
        assert bad == 0
        assert lip == (16.0 if SC.seq.kind_at(n) == 0 else 8.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_preimage_subsets_map_into_target(self, seed):
        rng = np.random.default_rng(seed)
        target = sample_subregion(CompactRegion.interval(0, 3), rng)
        for n in (0, 1):
            for i in (1, 2):
                pre = preimage_in(SC.seq.map_at(n), target, SC.family.set_at(i, n))
                if pre.is_empty:
                    continue
                for _ in range(10):
                    k = sample_subregion(pre, rng)
                    assert induced_step(SC.seq, n, k).is_subset(target, tol=1e-9)


class TestHyperCells:
    def test_prefix_12(self):
        rep = hyper_cell_check(SUB, (1, 2), 0, samples=50)
        assert rep.ok and rep.members_checked >= 50

    def test_singleton_bridge(self):
        cell = SUB.nested_cell((1, 2, 1), 0).region
        assert is_hyper_member(SUB, CompactRegion.point(cell.midpoint()), (1, 2, 1), 0)

    def test_exterior_not_member(self):
        cell = SUB.nested_cell((1, 2), 0).region
        lo, hi = SC.family.set_at(1, 0)
        outside = CompactRegion.from_intervals([cell.hull(), (lo, lo)]) if cell.hull()[0] > lo else None
        k = outside or CompactRegion.from_intervals([cell.hull(), (hi, hi)])
        assert not is_hyper_member(SUB, k, (1, 2), 0)

    @pytest.mark.parametrize("n", [0, 1])
    def test_induced_covering(self, n):
        rows = induced_covering_check(SUB, n, samples=50)
        assert len(rows) == 4
        assert all(r.failures == 0 for r in rows)

    def test_contraction_probe(self):
        rows = hausdorff_contraction_probe(SUB, PeriodicGenerator((1, 2, 2)), range(0, 10))
        for r in rows:
            bound = 0.5 * 4.0**-r.depth + 1e-12 if r.depth else SC.family.max_outer_diameter()
            assert r.cell_diameter <= bound and r.member_spread <= bound
            assert r.member_spread == pytest.approx(r.cell_diameter, abs=1e-15)
            assert r.singleton_gap == 0.0
        assert rows[0].cell_diameter == 0.25
