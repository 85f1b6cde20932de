import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from symdyn.errors import DegenerateRegion, OutOfDomain
from symdyn.maps import (
    Map1D,
    PeriodicSequence,
    SawtoothPlaneSequence,
    affine_map,
    compose_forward,
    evaluate,
    example_f1,
    example_f2,
    image_of_interval,
    lipschitz_band,
    orbit,
    preimage_in,
    saw2,
    sequence_from_dict,
)
from symdyn.regions import Box, CompactRegion

F1, F2 = example_f1(), example_f2()
ALL_F1 = PeriodicSequence((F1, F2), (0,))
ALL_F2 = PeriodicSequence((F1, F2), (1,))
ALT = PeriodicSequence((F1, F2), (0, 1))
PLANE = SawtoothPlaneSequence(12.0, "n/(n+1)")


def _intervals(lo=0.0, hi=3.0):
    return st.tuples(st.floats(lo, hi), st.floats(lo, hi)).map(sorted).map(tuple)


class TestEvaluate:
    def test_examples(self):
        assert evaluate(ALL_F1, 0, 0.25) == 3.0
        assert evaluate(ALL_F2, 0, 2.0) == 0.0
        for n in (0, 1, 7, 1000):
            assert tuple(evaluate(PLANE, n, (0.0, 0.0))) == (0.0, 0.0)

    def test_matches_oracle_formulas(self):
        xs = np.linspace(0, 3, 3001)
        assert np.array_equal(F1.values(xs), [oracles.f1(x) for x in xs])
        assert np.array_equal(F2.values(xs), [oracles.f2(x) for x in xs])

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            F1(3.5)

    def test_compose(self):
        assert compose_forward(ALL_F1, 0, 0, 0.3) == 0.3
        assert compose_forward(ALL_F1, 0, 2, 15 / 16) == 15 / 16
        assert compose_forward(ALL_F2, 0, 1, 1.0) == 3.0

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 3), st.integers(0, 5), st.integers(0, 5), st.integers(0, 3))
    def test_cocycle(self, x, m, n, i):
        left = compose_forward(ALT, i, m + n, x)
        right = compose_forward(ALT, i + m, n, compose_forward(ALT, i, m, x))
        assert left == right

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.001, 2.999))
    def test_continuity(self, x):
        # the example maps are continuous, so a tiny perturbation moves the
        # output by at most the Lipschitz constant (16) times the step
        h = 1e-9
        for f in (F1, F2):
            assert abs(f(x + h) - f(x)) <= 16 * h * 1.01 + 1e-15

    @settings(max_examples=300, deadline=None)
    @given(st.floats(-100, 100, allow_nan=False))
    def test_saw2_symmetries(self, t):
        assert saw2(t + 8) == pytest.approx(saw2(t), abs=1e-12)
        assert saw2(-t) == pytest.approx(-saw2(t), abs=1e-12)
        assert saw2(t) == pytest.approx(oracles.saw2(t), abs=1e-12)
        assert -2 <= saw2(t) <= 2


class TestImages:
    def test_paper_images(self):
        assert image_of_interval(F1, (0, 0.25)).intervals == ((0.0, 3.0),)
        assert image_of_interval(F1, (0.75, 1)).intervals == ((0.0, 3.0),)
        assert image_of_interval(F2, (1.5, 2)).intervals == ((0.0, 3.0),)
        assert image_of_interval(affine_map(2, 0, 0, 1), (0, 1)).intervals == ((0.0, 2.0),)

    @settings(max_examples=100, deadline=None)
    @given(_intervals())
    def test_image_matches_sampling(self, iv):
        for f in (F1, F2):
            img = image_of_interval(f, iv)
            ys = f.values(np.linspace(iv[0], iv[1], 1000))
            lo, hi = img.hull()
            assert lo <= ys.min() + 1e-12 and ys.max() <= hi + 1e-12
            # densely sampled extremes approach the exact image
            assert ys.min() - lo <= 16 * (iv[1] - iv[0]) / 999 + 1e-12
            assert hi - ys.max() <= 16 * (iv[1] - iv[0]) / 999 + 1e-12


class TestPreimage:
    def test_examples(self):
        r = preimage_in(F2, (1.75, 1.75), (1.5, 2.0))
        assert r.hull()[0] == pytest.approx(1.75, abs=1e-12)
        assert r.diameter() <= 1e-9
        assert preimage_in(F1, (0, 3), (0, 0.25)).hull() == (0.0, 0.25)
        r = preimage_in(affine_map(2, 0, 0, 1), (1, 2), (0, 1))
        assert r.intervals == ((0.5, 1.0),)

    @settings(max_examples=100, deadline=None)
    @given(_intervals(0, 3), _intervals(0, 3))
    def test_preimage_lands_in_target(self, target, within):
        for f in (F1, F2):
            r = preimage_in(f, target, within)
            for lo, hi in r.intervals:
                for x in np.linspace(lo, hi, 25):
                    assert target[0] - 1e-9 <= f(x) <= target[1] + 1e-9
                    assert within[0] - 1e-12 <= x <= within[1] + 1e-12


class TestLipschitz:
    def test_affine(self):
        seq = PeriodicSequence((affine_map(2, 0, 0, 1),), (0,))
        lo, hi = lipschitz_band(seq, [(0.0, 1.0)], 500)
        assert lo == pytest.approx(2.0, abs=1e-12) and hi == pytest.approx(2.0, abs=1e-12)

    def test_f1_lower(self):
        lo, _ = lipschitz_band(ALL_F1, [(0.0, 0.25), (0.75, 1.0)], 2000)
        assert lo >= 8

    def test_plane_band(self):
        boxes = [Box(-1 / 6, 1 / 6, -1 / 6, 1 / 6), Box(0.5, 5 / 6, 0.5, 5 / 6)]
        lo, hi = lipschitz_band(PLANE, boxes, 10_000, steps=(0, 1, 10, 1000))
        assert 10.5 <= lo and hi <= 13.5

    def test_degenerate(self):
        with pytest.raises(DegenerateRegion):
            lipschitz_band(ALL_F1, [(0.5, 0.5)], 10)


class TestOrbitsAndSerialization:
    def test_orbit_length(self):
        o = orbit(PLANE, (0.12, 0.01), 5000)
        assert o.shape == (5001, 2)
        assert tuple(o[0]) == (0.12, 0.01)

    def test_plane_map_formula(self):
        x1, x2 = 0.12, 0.01
        for n in (0, 3, 1000):
            w = n / (n + 1)
            expected = (w * math.sin(x2) + oracles.saw2(12 * x1), w * math.sin(x1) + oracles.saw2(12 * x2))
            assert evaluate(PLANE, n, (x1, x2)) == pytest.approx(expected, abs=1e-14)

    def test_roundtrip(self):
        for seq in (ALT, PLANE):
            assert sequence_from_dict(seq.to_dict()) == seq
        assert Map1D.from_dict(F1.to_dict()) == F1
