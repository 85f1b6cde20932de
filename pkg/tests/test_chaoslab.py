import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dp_count_words
from symdyn.chaoslab import (
    PairStats,
    decoded_pair_stats,
    entropy_estimate,
    induced_entropy_probe,
    itinerary_count_entropy,
    pair_stats,
    separated_counts,
    separated_set_entropy,
    subshift_pair_stats,
    word_count_entropy,
)
from symdyn.coding import CodedSubsystem
from symdyn.errors import CoveringRequired, InsufficientSamples
from symdyn.expansion import CoveringFamily
from symdyn.maps import PeriodicSequence, affine_map
from symdyn.scenarios import example_51
from symdyn.symbolic import ExplicitGenerator, PeriodicGenerator, full_matrix, scrambled_pair, validate_matrix

SC = example_51()
GOLDEN = validate_matrix([[1, 1], [1, 0]])


@pytest.fixture(scope="module")
def sub():
    return CodedSubsystem(SC.seq, SC.family)


@pytest.fixture(scope="module")
def decoded(sub):
    alpha, beta = scrambled_pair(SC.matrix)
    return alpha, beta, decoded_pair_stats(sub, alpha, beta, 4096)


class TestPairStats:
    def test_identical_points(self):
        st_ = pair_stats(SC.seq, 0.3, 0.3, 100, [1e-3, 0.1])
        assert (st_.distances == 0).all()
        assert (st_.fractions() == 1).all()
        assert not st_.li_yorke_witness(0.1)

    def test_two_fixed_points(self):
        seq = example_51("all-f1").seq
        s = pair_stats(seq, 0.0, 15 / 16, 200, [1e-3, 0.1])
        assert np.all(s.distances == 15 / 16)
        assert s.tail_max > 0.1 and not s.li_yorke_witness(0.1)

    def test_opposed_symbolic(self):
        s = subshift_pair_stats(SC.matrix, PeriodicGenerator((1, 2)), PeriodicGenerator((2, 1)), 500)
        assert s.distances == pytest.approx(np.full(500, 2.0), abs=1e-11)
        assert not s.li_yorke_witness(1.0)

    def test_equal_symbolic(self):
        a = PeriodicGenerator((1, 2, 2))
        assert (subshift_pair_stats(SC.matrix, a, a, 300).distances == 0).all()

    def test_scrambled_symbolic(self):
        alpha, beta = scrambled_pair(SC.matrix)
        s = subshift_pair_stats(SC.matrix, alpha, beta, 4096)
        assert s.li_yorke_witness(1.0)
        assert s.dc_witness(1.0, 1e-3)

    def test_empty(self):
        with pytest.raises(InsufficientSamples):
            PairStats(np.array([]), np.array([0.1]))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0, 3), min_size=1, max_size=200), st.floats(1e-4, 1), st.floats(1e-4, 1))
    def test_fraction_monotone_in_eps(self, ds, e1, e2):
        s = PairStats(np.array(ds), np.array(sorted([e1, e2])))
        lo, hi = sorted([e1, e2])
        assert (s.fraction(lo) <= s.fraction(hi)).all()
        assert (np.diff(s.fractions()) >= 0).all()

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 2), st.floats(0, 2))
    def test_symmetry(self, x, y):
        a = pair_stats(SC.seq, x, y, 60, [1e-3, 0.1, 1.0])
        b = pair_stats(SC.seq, y, x, 60, [1e-3, 0.1, 1.0])
        assert np.array_equal(a.distances, b.distances)
        assert a.summary(0.1, 1e-3) == b.summary(0.1, 1e-3)


class TestDecodedPair:
    def test_witnesses(self, decoded):
        _, _, dp = decoded
        s = dp.stats
        assert s.li_yorke_witness(0.1)
        assert s.dc_witness(0.2, 1e-3)
        assert s.tail_min < 1e-3 and s.tail_max > 0.2
        assert dp.bounded
        assert dp.residual < 1e-6

    def test_transfer_both_ways(self, sub, decoded):
        alpha, beta, dp = decoded
        # symbolic flag -> point flag
        assert subshift_pair_stats(SC.matrix, alpha, beta, 4096).li_yorke_witness(1.0)
        assert dp.stats.li_yorke_witness(0.1)
        # point orbits -> itineraries -> symbolic flag
        ox, oy = dp.orbits
        ia = tuple(sub.symbol_of(float(x), i) for i, x in enumerate(ox))
        ib = tuple(sub.symbol_of(float(y), i) for i, y in enumerate(oy))
        assert ia == alpha.prefix(4096) and ib == beta.prefix(4096)
        tail_a = ExplicitGenerator(ia, alpha.shifted(4096))
        tail_b = ExplicitGenerator(ib, beta.shifted(4096))
        assert subshift_pair_stats(SC.matrix, tail_a, tail_b, 4096).li_yorke_witness(1.0)


class TestEntropy:
    def test_word_count_full_shift(self):
        est = word_count_entropy(full_matrix(2), 20)
        assert all(v == pytest.approx(math.log(2), abs=1e-15) for v in est.values)

    def test_golden_word_count(self):
        est = word_count_entropy(GOLDEN, 32)
        assert est.counts[-1] == dp_count_words(GOLDEN.to_list(), 32) == 5702887
        assert abs(est.rate - math.log((1 + 5**0.5) / 2)) < 0.02

    def test_itinerary_count(self, sub):
        est = itinerary_count_entropy(sub, 12)
        assert est.counts == [2**n for n in range(1, 13)]
        assert est.rate == pytest.approx(math.log(2), abs=1e-12)

    def test_induced_probe(self, sub):
        est = induced_entropy_probe(sub, 12)
        assert abs(est.rate - math.log(2)) < 0.05

    def test_identity_rate_zero(self):
        seq = PeriodicSequence((affine_map(1, 0, 0, 1),), (0,))
        for eps in (1e-3, 1e-2, 0.1):
            est = separated_set_entropy(seq, (0, 1), 12, eps, samples=200)
            assert abs(est.rate) < 1e-9

    def test_dispatch(self):
        assert entropy_estimate("word_count", matrix=full_matrix(2), n_max=4).rate == pytest.approx(math.log(2))
        with pytest.raises(ValueError):
            entropy_estimate("nope")

    def test_covering_required(self):
        seq = PeriodicSequence((affine_map(1, 0, 0, 3),), (0,))
        fam = CoveringFamily(full_matrix(2), ((0, 1), (2, 3)), (((0, 1), (2, 3)),), "strict")
        with pytest.raises(CoveringRequired):
            induced_entropy_probe(CodedSubsystem(seq, fam), 4)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.lists(st.floats(1e-3, 1.0), min_size=2, max_size=5, unique=True))
    def test_separated_monotone_in_eps(self, seed, eps):
        rng = np.random.default_rng(seed)
        orbits = rng.random((60, 6))
        counts = separated_counts(orbits, 6, eps)
        by_eps = sorted(zip(eps, counts))
        assert all(c1 >= c2 for (_, c1), (_, c2) in zip(by_eps, by_eps[1:]))
