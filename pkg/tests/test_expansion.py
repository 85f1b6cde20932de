import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symdyn.errors import AperiodicRule, FaceTestInconclusive, SeparationViolation
from symdyn.expansion import (
    CoveringFamily,
    applicable_theorems,
    check_covering,
    check_covering_1d,
    check_covering_2d,
    classify,
    expansion_constant,
    separation,
)
from symdyn.hyperspace import sample_subregion
from symdyn.maps import (
    PeriodicSequence,
    SawtoothPlaneSequence,
    affine_map,
    image_of_interval,
    image_of_region,
    preimage_in,
)
from symdyn.regions import Box, CompactRegion, hausdorff, set_distance
from symdyn.scenarios import example_51, example_52
from symdyn.symbolic import full_matrix

M2 = full_matrix(2)


def _identity_case():
    seq = PeriodicSequence((affine_map(1, 0, 0, 3),), (0,))
    fam = CoveringFamily(M2, ((0, 1), (2, 3)), (((0, 1), (2, 3)),), "weak")
    return seq, fam


class TestExample51:
    @pytest.mark.parametrize("pattern", ["alternate", "all-f1", "all-f2", "1121", "2212"])
    def test_covering_any_pattern(self, pattern):
        sc = example_51(pattern)
        rep = check_covering_1d(sc.seq, sc.family, sc.horizon)
        assert sc.horizon == 2 * sc.seq.period
        assert rep.weak_ce and rep.strict_weak_ce
        assert all(r.covered for r in rep.rows)
        assert rep.separation == 0.25
        assert rep.h1_implied and rep.h2_implied

    def test_lambda_per_step_kind(self):
        sc = example_51("alternate")
        rep = check_covering(sc.seq, sc.family, sc.horizon)
        for n in rep.steps:
            expected = 8.0 if sc.seq.kind_at(n) == 0 else 4.0
            assert rep.lambda_at(n) == pytest.approx(expected, abs=1e-6)
        assert rep.lambda_lower == pytest.approx(4.0, abs=1e-6)
        assert expansion_constant(sc.seq, sc.family, sc.horizon) == pytest.approx(4.0, abs=1e-6)

    def test_affine_expansion_exact(self):
        seq = PeriodicSequence((affine_map(2, 0, 0, 1),), (0,))
        fam = CoveringFamily(M2, ((0, 0.25), (0.75, 1)), (((0, 0.25), (0.75, 1)),), "weak")
        assert expansion_constant(seq, fam, 1) == 2.0

    def test_classify(self):
        sc = example_51()
        rep = check_covering(sc.seq, sc.family, sc.horizon)
        results = classify(rep, sc.matrix, compact_space=True, restricted_base=True)
        ok = applicable_theorems(results)
        assert {"3.7", "3.8", "4.8"} <= set(ok)
        by = {r.theorem: r for r in results}
        assert by["3.7"].chaos_conclusion and by["4.8"].chaos_conclusion

    def test_csv_rows(self):
        sc = example_51()
        rows = check_covering(sc.seq, sc.family, sc.horizon).to_csv_rows()
        assert rows[0] == ["n", "i", "covered", "margin", "status", "lambda_step"]
        assert len(rows) == 1 + 2 * sc.horizon


class TestFailures:
    def test_identity_not_covered(self):
        seq, fam = _identity_case()
        rep = check_covering_1d(seq, fam, 1)
        assert not rep.weak_ce
        assert any(not r.covered for r in rep.rows)

    def test_identity_none_applicable(self):
        seq, fam = _identity_case()
        rep = check_covering_1d(seq, fam, 1)
        # no H1/H2 without covering, and every theorem needs one of them
        assert not rep.h1_implied and not rep.h2_implied
        assert applicable_theorems(classify(rep, M2)) == []

    def test_touching_sets_strict(self):
        seq = PeriodicSequence((affine_map(2, 0, 0, 1),), (0,))
        fam = CoveringFamily(M2, ((0, 0.5), (0.5, 1)), (((0, 0.5), (0.5, 1)),), "strict")
        with pytest.raises(SeparationViolation):
            check_covering_1d(seq, fam, 1)

    def test_aperiodic_2d_needs_steps(self):
        sc = example_52()
        assert sc.seq.period is None
        with pytest.raises(AperiodicRule):
            check_covering_2d(sc.seq, sc.family)


class TestExample52:
    def test_face_test_passes(self):
        sc = example_52()
        rep = check_covering_2d(sc.seq, sc.family, steps=(0, 1, 10, 1000))
        assert rep.weak_ce
        assert all(r.covered and r.margin > 0 for r in rep.rows)
        assert {r.n for r in rep.rows} == {0, 1, 10, 1000}
        assert any("aperiodic" in n for n in rep.notes)

    def test_classify(self):
        sc = example_52()
        rep = check_covering_2d(sc.seq, sc.family, steps=sc.check_steps)
        ok = set(applicable_theorems(classify(rep, sc.matrix, compact_space=False, restricted_base=True)))
        assert {"3.7", "4.8"} <= ok
        assert "3.8" not in ok and "4.9" not in ok

    def test_weakened_map_cannot_cover(self):
        v1 = Box(-1 / 6, 1 / 6, -1 / 6, 1 / 6)
        v2 = Box(0.5, 5 / 6, 0.5, 5 / 6)
        fam = CoveringFamily(M2, (v1, v2), ((v1, v2),), "strict")
        weak = SawtoothPlaneSequence(1.0, 0.0)
        try:
            rep = check_covering_2d(weak, fam, steps=(0,))
        except FaceTestInconclusive:
            return
        assert not rep.weak_ce


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(["alternate", "all-f1", "all-f2", "12", "1122"]), st.floats(0.05, 0.95))
    def test_shrinking_targets_keeps_covering(self, pattern, shrink):
        sc = example_51(pattern)
        fam = sc.family

        def shrunk(iv):
            c, r = (iv[0] + iv[1]) / 2, (iv[1] - iv[0]) / 2 * shrink
            return CompactRegion.interval(c - r, c + r)

        rep = check_covering_1d(sc.seq, fam, sc.horizon)
        for n in range(sc.horizon):
            f = sc.seq.map_at(n)
            for i in (1, 2):
                img = image_of_interval(f, fam.set_at(i, n))
                for j in (1, 2):
                    if CompactRegion.interval(*fam.set_at(j, n + 1)).is_subset(img):
                        assert shrunk(fam.set_at(j, n + 1)).is_subset(img)
        assert rep.weak_ce

    def test_strict_separation_matches_region_distance(self):
        sc = example_51()
        outer, per_step, disjoint = separation(sc.family)
        a, b = (CompactRegion.interval(*v) for v in sc.family.outer)
        assert outer > 0 and outer == set_distance(a, b) == 0.25
        assert disjoint

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_compact_subsets_have_consistent_preimages(self, seed):
        sc = example_51()
        rng = np.random.default_rng(seed)
        for n in range(sc.horizon):
            f = sc.seq.map_at(n)
            for i in (1, 2):
                for j in (1, 2):
                    k = sample_subregion(CompactRegion.interval(*sc.family.set_at(j, n + 1)), rng)
                    k0 = preimage_in(f, k.hull(), sc.family.set_at(i, n))
                    img = image_of_region(f, k0)
                    hull = CompactRegion.interval(*k.hull())
                    assert hausdorff(img, hull) <= 1e-9

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_sampled_lambda_not_below_exact(self, seed):
        from symdyn.expansion import step_expansion

        sc = example_51()
        for n in range(sc.horizon):
            lam = step_expansion(sc.seq, sc.family, n, samples=200, seed=seed)
            exact = 8.0 if sc.seq.kind_at(n) == 0 else 4.0
            assert lam == pytest.approx(exact, abs=1e-9)
