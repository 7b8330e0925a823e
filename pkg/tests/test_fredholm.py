"""Log-grid discretization of the half-line operators and their indices."""

import numpy as np
import pytest

from orbiton import fredholm as fr


@pytest.fixture(scope="module")
def grid8():
    return fr.build_grid(8.0, 2048)


@pytest.fixture(scope="module")
def op1_8(grid8):
    return fr.assemble_operator(1, grid8)


@pytest.fixture(scope="module")
def grid6():
    return fr.build_grid(6.0, 1024)


class TestGrid:
    def test_measure_and_symmetry(self, grid8):
        g = grid8
        assert abs(g.weights.sum() - 32.0) < 1e-9
        assert np.all(g.weights > 0)
        assert abs(g.nodes[0] - np.exp(-8.0)) < 1e-12
        assert abs(g.nodes[2047] - np.exp(8.0)) < 1e-8
        assert np.allclose(g.nodes[:2048], -g.nodes[2048:])

    def test_endpoint_rule_small(self):
        g = fr.build_grid(2.0, 16)
        assert abs(g.nodes[0] - np.exp(-2.0)) < 1e-14
        assert abs(g.nodes[15] - np.exp(2.0)) < 1e-13
        assert abs(g.weights.sum() - 8.0) < 1e-12

    def test_bad_params(self):
        for bad in ((0.0, 64), (-1.0, 64), (8.0, 15), (float("nan"), 64),
                    (float("inf"), 64)):
            with pytest.raises(fr.BadParams):
                fr.build_grid(*bad)

    def test_json(self, grid6):
        doc = grid6.to_json()
        assert doc["L"] == 6.0 and doc["N"] == 1024


class TestAssembly:
    def test_constant_function_example(self, grid8, op1_8):
        # exact integral of |a| over [-1,1] is 1, so S1 maps 1 to
        # 1 - 2 exp(-x^2/2)
        got = op1_8.matrix @ np.ones(2 * grid8.N)
        want = 1.0 - 2.0 * np.exp(-0.5 * grid8.nodes ** 2)
        assert np.max(np.abs(got - want)) < 1e-6

    def test_parity_annihilation_exact(self, grid8, op1_8):
        # the odd kernel kills even functions and vice versa, to rounding
        op2 = fr.assemble_operator(2, grid8)
        rng = np.random.default_rng(7)
        v = rng.standard_normal(grid8.N)
        even = np.concatenate([v, v])
        odd = np.concatenate([v, -v])
        assert np.max(np.abs(op2.matrix @ even - even)) < 1e-13
        assert np.max(np.abs(op1_8.matrix @ odd - odd)) < 1e-13

    def test_grid_too_coarse(self):
        with pytest.raises(fr.GridTooCoarse):
            fr.assemble_operator(1, fr.build_grid(8.0, 16))

    def test_unknown_operator(self, grid8):
        with pytest.raises(fr.BadParams):
            fr.assemble_operator(3, grid8)

    def test_compact_tail_decays(self, grid6):
        rep = fr.assemble_operator(1, grid6).compact_tail_report()
        assert rep["ratio_50_to_1"] < 0.05


class TestOracle:
    def test_asymptotic_slopes(self, grid8):
        orc = fr.ode_kernel_oracle(grid8)
        assert abs(orc.slope_near_zero - 2.0) < 0.05
        assert abs(orc.slope_at_infinity + 2.0) < 0.05
        assert orc.window_ratio_zero < 0.05
        assert orc.window_ratio_infinity < 0.05

    def test_oracle_annihilated_by_operators(self, grid8, op1_8):
        orc = fr.ode_kernel_oracle(grid8)
        w = np.sqrt(grid8.weights)
        f1 = orc.as_kernel_vector(1)
        res1 = np.linalg.norm(w * (op1_8.matrix @ f1)) \
            / np.linalg.norm(w * f1)
        op2 = fr.assemble_operator(2, grid8)
        f2 = orc.as_kernel_vector(2)
        res2 = np.linalg.norm(w * (op2.matrix @ f2)) \
            / np.linalg.norm(w * f2)
        assert res1 < 1e-6
        assert res2 < 1e-6


class TestIndex:
    def test_s1_big_grid(self, grid8, op1_8):
        r = fr.numerical_index(op1_8)
        assert (r.dim_ker, r.dim_coker, r.index) == (1, 0, 1)
        # kernel 1-dimensionality: second singular value three orders up
        assert r.gap_ratio > 1e3
        pc = fr.parity_check(r.ker_vectors, 1)
        assert pc[0].ok and pc[0].residual < 1e-6
        orc = fr.ode_kernel_oracle(grid8)
        assert fr.kernel_cosine(grid8, r.ker_vectors[0], orc.f, 1) > 0.999

    def test_both_operators_small_grid(self, grid6):
        orc = fr.ode_kernel_oracle(grid6)
        for which in (1, 2):
            op = fr.assemble_operator(which, grid6)
            r = fr.numerical_index(op)
            assert (r.dim_ker, r.dim_coker) == (1, 0)
            assert r.gap_ratio > 1e2
            pc = fr.parity_check(r.ker_vectors, which)
            assert pc[0].ok and pc[0].residual < 1e-6
            assert fr.kernel_cosine(grid6, r.ker_vectors[0],
                                    orc.f, which) > 0.999

    def test_identity_has_zero_index(self):
        ident = fr.DiscreteOperator(grid=fr.build_grid(1.0, 16),
                                    matrix=np.eye(32), which=1)
        r = fr.numerical_index(ident)
        assert (r.dim_ker, r.dim_coker, r.index) == (0, 0, 0)

    def test_coarse_64_still_resolves(self):
        # N=64 passes the step gate; the index is already clean there
        r = fr.numerical_index(fr.assemble_operator(1, fr.build_grid(8.0, 64)))
        assert (r.dim_ker, r.dim_coker) == (1, 0)
        assert r.gap_ratio > 1e2

    def test_fixed_threshold_policy(self, grid6):
        op = fr.assemble_operator(1, grid6)
        r = fr.numerical_index(op, threshold_policy=1e-6)
        assert r.threshold == 1e-6
        assert (r.dim_ker, r.dim_coker) == (1, 0)

    def test_result_json(self, grid6):
        r = fr.numerical_index(fr.assemble_operator(2, grid6))
        doc = r.to_json()
        assert doc["index"] == doc["dim_ker"] - doc["dim_coker"]
        assert isinstance(doc["sing_vals_near_zero"], list)


class TestParity:
    def test_zero_vector_degenerate(self):
        pc = fr.parity_check([np.zeros(8)], 1)
        assert pc[0].degenerate and pc[0].ok and pc[0].residual == 0.0

    def test_pure_parities(self):
        rng = np.random.default_rng(11)
        v = rng.standard_normal(16)
        even = np.concatenate([v, v])
        odd = np.concatenate([v, -v])
        assert fr.parity_check([even], 1)[0].ok
        assert not fr.parity_check([odd], 1)[0].ok
        assert fr.parity_check([odd], 2)[0].ok
