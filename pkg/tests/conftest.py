"""Shared helpers: seeded random basis changes and family iteration."""

import numpy as np
import pytest

from orbiton import families


def random_gl(rng, n=4, max_cond=1e3):
    """Random invertible matrix with condition number at most max_cond.

    Orthogonal factors around a log-uniform diagonal; the mean-centered
    exponents keep the determinant scale near 1 so conjugated structure
    constants stay O(1).
    """
    while True:
        exps = rng.uniform(-1.5, 1.5, size=n)
        exps -= exps.mean()
        q1 = np.linalg.qr(rng.standard_normal((n, n)))[0]
        q2 = np.linalg.qr(rng.standard_normal((n, n)))[0]
        p = q1 @ np.diag(10.0 ** exps) @ q2
        if np.linalg.cond(p) <= max_cond:
            return p


def family_fixtures():
    """(name, params, algebra) for the 12 normal-form families at defaults."""
    out = []
    for name in families.FAMILY_ORDER:
        params = families.default_params(name)
        out.append((name, params, families.build_family(name, *params)))
    return out


@pytest.fixture(scope="session")
def fixtures_by_family():
    return {name: (params, g) for name, params, g in family_fixtures()}
