"""Family recognition, canonical parameters, MD-bar labels, exponentiality."""

import math

import numpy as np
import pytest

from orbiton import classify, families, lie_core as lc

from conftest import family_fixtures, random_gl


def _set_bracket(c, i, j, k, v):
    c[i, j, k] = v
    c[j, i, k] = -v


class TestFixtures:
    def test_default_fixtures_recognized(self):
        for name, params, g in family_fixtures():
            lab = classify.classify_md4(g)
            assert lab.family == name

    def test_parameters_canonicalized(self):
        lab = classify.classify_md4(families.build_family("g421", 2.0))
        assert lab.params == pytest.approx((0.5,), abs=1e-9)
        lab = classify.classify_md4(families.build_family("g431", 2.0, 3.0))
        assert lab.params == pytest.approx((1 / 3, 2 / 3), abs=1e-9)
        lab = classify.classify_md4(families.build_family("g432", 2.0))
        assert lab.params == pytest.approx((2.0,), abs=1e-9)

    def test_angle_fold(self):
        # phi and pi - phi give isomorphic algebras; the canonical
        # representative lives in (0, pi/2].
        a = families.canonical_params("g423", (2.0,))
        b = families.canonical_params("g423", (math.pi - 2.0,))
        assert a == pytest.approx(b, abs=1e-12)

    def test_g434_sign_fold(self):
        a = families.canonical_params("g434", (-1.5, 1.0))
        assert a == pytest.approx((1.5, math.pi - 1.0), abs=1e-12)

    def test_abelian4_is_decomposable(self):
        lab = classify.classify_md4(families.abelian(4))
        assert lab.family == "DecomposableRnPlus"
        assert lab.decomposition == (4, "abelian")


class TestBasisInvariance:
    def test_random_conjugation_small_sweep(self):
        # The full 100-change sweep runs in the acceptance suite; this is
        # the fast regression version.
        rng = np.random.default_rng(41)
        for name, params, g in family_fixtures():
            expected = families.canonical_params(name, params)
            for k in range(5):
                h = lc.change_basis(g, random_gl(rng))
                lab = classify.classify_md4(h, seed=k)
                assert lab.family == name, (name, lab.family, lab.reason)
                if expected:
                    assert lab.params == pytest.approx(expected, abs=1e-6)
                else:
                    assert lab.params is None

    def test_round_trip_from_label(self):
        rng = np.random.default_rng(42)
        for name, params, g in family_fixtures():
            lab = classify.classify_md4(lc.change_basis(g, random_gl(rng)))
            rebuilt = families.build_family(lab.family, *(lab.params or ()))
            again = classify.classify_md4(rebuilt)
            assert again.family == name
            if lab.params:
                assert again.params == pytest.approx(lab.params, abs=1e-9)


class TestRejections:
    def test_not_solvable_raises(self):
        c = np.zeros((4, 4, 4))
        _set_bracket(c, 0, 1, 2, 1.0)
        _set_bracket(c, 1, 2, 0, 1.0)
        _set_bracket(c, 2, 0, 1, 1.0)
        with pytest.raises(classify.NotSolvableError):
            classify.classify_md4(lc.validate_algebra(c))

    def test_solvable_non_md_is_labelled(self):
        # [T,X]=Y, [T,Z]=Z is solvable but the action on the derived
        # plane is singular, which no family table allows.
        c = np.zeros((4, 4, 4))
        _set_bracket(c, 3, 0, 1, 1.0)
        _set_bracket(c, 3, 2, 2, 1.0)
        lab = classify.classify_md4(lc.validate_algebra(c))
        assert lab.family == "NotMD4"
        assert lab.reason

    def test_wrong_dimension_rejected(self):
        with pytest.raises(lc.DimensionMismatch):
            classify.classify_md4(families.heisenberg3())


class TestMdBar:
    def test_labels(self):
        assert classify.classify_md_bar(families.aff_r()).tag == "AffR"
        assert classify.classify_md_bar(families.aff_c()).tag == "AffC"
        assert classify.classify_md_bar(families.heisenberg3()).tag == "NotMDBar"
        assert classify.classify_md_bar(families.abelian(3)).tag == "Abelian"

    def test_h3_witness_is_central(self):
        ok, witness = classify.is_md_bar(families.heisenberg3())
        assert not ok
        # the witness direction must bracket to zero with everything
        h = families.heisenberg3()
        w = np.asarray(witness, dtype=float)
        assert np.abs(lc.ad_matrix(h, w)).max() < 1e-12

    def test_md_bar_invariant_under_basis_change(self):
        rng = np.random.default_rng(43)
        for build, tag in ((families.aff_r, "AffR"), (families.aff_c, "AffC")):
            g = build()
            for _ in range(5):
                p = random_gl(rng, n=g.dim)
                assert classify.classify_md_bar(lc.change_basis(g, p)).tag == tag

    def test_positive_label_implies_md_bar(self):
        for build in (families.aff_r, families.aff_c):
            g = build()
            assert classify.classify_md_bar(g).tag in ("AffR", "AffC")
            ok, _ = classify.is_md_bar(g)
            assert ok

    def test_aff_c_equals_g424(self):
        assert np.array_equal(families.aff_c().c,
                              families.build_family("g424").c)


class TestExponential:
    def test_false_cases(self):
        cases = (
            ("g423", (math.pi / 2,)),
            ("g424", ()),
            ("g434", (2.0, math.pi / 2)),
            ("g441", ()),
        )
        for name, params in cases:
            ok, witness = classify.is_exponential(
                families.build_family(name, *params))
            assert not ok
            # the witness direction must have a purely imaginary
            # eigenvalue pair
            g = families.build_family(name, *params)
            eig = np.linalg.eigvals(lc.ad_matrix(g, np.asarray(witness)))
            im = eig[np.abs(eig.real) < 1e-8 * (1 + np.abs(eig).max())]
            assert np.abs(im.imag).max() > 1e-8

    def test_true_cases_at_defaults(self):
        for name, params, g in family_fixtures():
            if name in ("g424", "g441"):
                continue
            ok, _ = classify.is_exponential(g)
            assert ok, name
