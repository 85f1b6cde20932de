import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import discretized_hausdorff
from symdyn.regions import CompactRegion, directed_distance, hausdorff, hausdorff_bruteforce

TOL = 1e-12


@st.composite
def regions(draw, lo=0.0, hi=3.0, max_parts=3):
    k = draw(st.integers(1, max_parts))
    parts = []
    for _ in range(k):
        a = draw(st.floats(lo, hi))
        b = draw(st.floats(lo, hi))
        parts.append((min(a, b), max(a, b)))
    return CompactRegion.from_intervals(parts)


class TestCanonical:
    def test_merge_overlaps(self):
        r = CompactRegion.from_intervals([(0, 1), (0.5, 2), (3, 4)])
        assert r.intervals == ((0.0, 2.0), (3.0, 4.0))
        assert r.component_count == 2
        assert r.hull() == (0.0, 4.0)
        assert r.measure() == 3.0

    def test_intersect_and_union(self):
        a = CompactRegion.from_intervals([(0, 1), (2, 3)])
        b = CompactRegion.interval(0.5, 2.5)
        assert a.intersect(b).intervals == ((0.5, 1.0), (2.0, 2.5))
        assert a.union(b).intervals == ((0.0, 3.0),)

    def test_empty(self):
        e = CompactRegion.empty()
        assert e.is_empty
        assert CompactRegion.interval(0, 1).intersect(CompactRegion.interval(2, 3)).is_empty


class TestHausdorff:
    def test_examples(self):
        a, b = CompactRegion.interval(0, 1), CompactRegion.interval(2, 3)
        assert hausdorff(a, b) == 2.0
        assert hausdorff(a, a) == 0.0
        assert hausdorff(CompactRegion.point(0.3), CompactRegion.point(1.7)) == pytest.approx(1.4, abs=1e-15)

    def test_directed_asymmetry(self):
        small, big = CompactRegion.interval(0, 1), CompactRegion.interval(0, 3)
        assert directed_distance(small, big) == 0.0
        assert directed_distance(big, small) == 2.0

    def test_gap_midpoint(self):
        # the far point of [0,3] from {0} U {3} is the middle of the gap
        a = CompactRegion.interval(0, 3)
        b = CompactRegion.from_intervals([(0, 0), (3, 3)])
        assert hausdorff(a, b) == 1.5

    @settings(max_examples=1000, deadline=None)
    @given(regions(), regions(), regions())
    def test_metric_axioms(self, a, b, c):
        ab = hausdorff(a, b)
        assert ab == hausdorff(b, a)
        assert hausdorff(a, a) == 0
        assert ab >= 0
        assert hausdorff(a, c) <= ab + hausdorff(b, c) + TOL

    @settings(max_examples=300, deadline=None)
    @given(regions(), regions())
    def test_matches_discretized_oracle(self, a, b):
        step = 1e-2
        exact = hausdorff(a, b)
        assert abs(exact - discretized_hausdorff(a.intervals, b.intervals, step)) <= 2 * step
        assert abs(exact - hausdorff_bruteforce(a, b, step)) <= 2 * step

    @settings(max_examples=300, deadline=None)
    @given(regions(), regions())
    def test_subset_has_zero_directed_distance(self, a, b):
        u = a.union(b)
        assert directed_distance(a, u) == 0
        assert a.is_subset(u)
