"""Kirillov form, orbit flow, sampling, and rank stratification."""

import numpy as np

from orbiton import coadjoint as co, families, lie_core as lc

from conftest import family_fixtures


class TestKirillovForm:
    def test_real_diamond_example(self):
        g = families.build_family("g442")
        kf = co.kirillov_form(g, [1.0, 1.0, 1.0, 0.0])
        expected = np.array([
            [0.0, 1.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 0.0, 0.0],
            [-1.0, 1.0, 0.0, 0.0],
        ])
        assert np.abs(kf.matrix - expected).max() == 0.0
        assert co.orbit_dimension(g, [1.0, 1.0, 1.0, 0.0]) == 2

    def test_skew_symmetry_and_even_rank(self):
        rng = np.random.default_rng(21)
        for name, params, g in family_fixtures():
            for _ in range(50):
                F = rng.standard_normal(4)
                kf = co.kirillov_form(g, F)
                assert np.abs(kf.matrix + kf.matrix.T).max() < 1e-12
                rank = co.orbit_dimension(g, F)
                assert rank % 2 == 0

    def test_kernel_is_stabilizer(self):
        rng = np.random.default_rng(22)
        for name, params, g in family_fixtures():
            F = rng.standard_normal(4)
            kf = co.kirillov_form(g, F)
            stab = co.stabilizer_algebra(g, F)
            assert stab.dim + co.orbit_dimension(g, F) == 4
            if stab.dim:
                assert np.abs(kf.matrix @ stab.basis_matrix).max() < 1e-10

    def test_zero_functional_has_point_orbit(self):
        for name, params, g in family_fixtures():
            assert co.orbit_dimension(g, np.zeros(4)) == 0


class TestFlow:
    def test_word_then_inverse_returns(self):
        rng = np.random.default_rng(23)
        for name, params, g in family_fixtures():
            F = rng.standard_normal(4)
            word = co.random_word(g, rng)
            forward = co.coadjoint_flow(g, F, word)
            inverse = [(k, -t) for k, t in reversed(word.steps)]
            back = co.coadjoint_flow(g, forward, inverse)
            assert np.abs(back - F).max() < 1e-10

    def test_single_step_matches_exp_ad(self):
        g = families.build_family("g441")
        F = np.array([0.3, -0.7, 1.1, 0.2])
        t = 0.8
        flowed = co.coadjoint_flow(g, F, [(3, t)])
        u = np.zeros(4)
        u[3] = t
        assert np.allclose(flowed, F @ lc.exp_ad(g, u))

    def test_tangent_matches_finite_differences(self):
        # (d/dt)|0 of the one-parameter flows against the algebraic rows.
        rng = np.random.default_rng(24)
        h = 1e-5
        for name, params, g in family_fixtures():
            F = rng.standard_normal(4)
            for k in range(4):
                plus = co.coadjoint_flow(g, F, [(k, h)])
                minus = co.coadjoint_flow(g, F, [(k, -h)])
                fd = (plus - minus) / (2 * h)
                assert np.abs(fd - co.flow_tangent(g, F, k)).max() < 1e-6

    def test_tangent_rows_are_kirillov_rows(self):
        rng = np.random.default_rng(25)
        g = families.build_family("g434")
        F = rng.standard_normal(4)
        kf = co.kirillov_form(g, F)
        for k in range(4):
            assert np.allclose(co.flow_tangent(g, F, k), kf.matrix[k])


class TestSampling:
    def test_points_stay_on_orbit_rank(self):
        # rank(B_F) is constant along an orbit; 50 points from one orbit
        # must all report the same dimension.
        g = families.build_family("g442")
        F = np.array([1.0, 1.0, 1.0, 0.0])
        sample = co.sample_orbit(g, F, 50, seed=31)
        ranks = {co.orbit_dimension(g, p) for p in sample.points}
        assert ranks == {2}

    def test_est_dim_is_even_and_matches(self):
        g = families.build_family("g424")
        F = np.array([0.0, 1.0, 0.5, 0.3])
        sample = co.sample_orbit(g, F, 60, seed=32)
        assert sample.est_dim == co.orbit_dimension(g, F) == 4

    def test_seeded_reproducibility(self):
        g = families.build_family("g421", 2.0)
        F = np.array([0.2, 1.0, -0.4, 0.9])
        a = co.sample_orbit(g, F, 10, seed=5)
        b = co.sample_orbit(g, F, 10, seed=5)
        assert np.array_equal(a.points, b.points)

    def test_first_coordinate_constant_on_g421_orbits(self):
        # The first dual coordinate is a Casimir for this family: every
        # orbit keeps x = alpha.
        g = families.build_family("g421", 2.0)
        F = np.array([0.7, 1.0, -0.4, 0.9])
        sample = co.sample_orbit(g, F, 40, seed=33)
        assert np.abs(sample.points[:, 0] - 0.7).max() < 1e-9

    def test_csv_layout(self):
        g = families.build_family("g442")
        sample = co.sample_orbit(g, [1.0, 1.0, 1.0, 0.0], 3, seed=1)
        lines = sample.to_csv(g.basis_labels).strip().splitlines()
        assert lines[0] == "X,Y,Z,T"
        assert len(lines) == 4
        assert all(len(row.split(",")) == 4 for row in lines[1:])


class TestStratify:
    def test_md_property_spot(self):
        # Orbit dimensions only 0 or max over random functionals.
        rng = np.random.default_rng(34)
        for name in ("g411", "g424", "g442"):
            params = families.default_params(name)
            g = families.build_family(name, *params)
            top = 4 if name == "g424" else 2
            fs = rng.standard_normal((500, 4))
            strata = co.stratify(g, fs)
            assert set(strata) <= {0, top}
            assert sum(len(v) for v in strata.values()) == 500

    def test_zero_is_its_own_stratum(self):
        g = families.build_family("g442")
        strata = co.stratify(g, [np.zeros(4), np.array([1.0, 1, 1, 0])])
        assert len(strata[0]) == 1
        assert len(strata[2]) == 1
