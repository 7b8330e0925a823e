"""Finite-dimensional real Lie algebras given by structure constants.

An algebra is stored as a dense rank-3 array ``c`` with
``[X_i, X_j] = sum_k c[i, j, k] X_k``.  Everything downstream (coadjoint
action, classification, orbit models) consumes this representation.
Vectors and functionals are plain float arrays of length ``dim``;
coordinates are the only semantics, labels are cosmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

__all__ = [
    "LieAlgebraError",
    "AntisymmetryViolation",
    "JacobiViolation",
    "DimensionMismatch",
    "LieAlgebra",
    "Subspace",
    "validate_algebra",
    "bracket",
    "change_basis",
    "ad_matrix",
    "exp_ad",
    "derived_subalgebra",
    "derived_series_length",
    "numeric_rank",
    "load_algebra_json",
    "algebra_to_json",
]

# Uniform rank rule: singular values below dim * sigma_max * RANK_RTOL are zero.
RANK_RTOL = 1e-10
VALIDATION_ATOL = 1e-12


class LieAlgebraError(Exception):
    pass


class AntisymmetryViolation(LieAlgebraError):
    def __init__(self, i: int, j: int, k: int, residual: float):
        self.triple = (i, j, k)
        self.residual = residual
        super().__init__(
            f"c[{i},{j},{k}] + c[{j},{i},{k}] = {residual:.3e} (must vanish)"
        )


class JacobiViolation(LieAlgebraError):
    def __init__(self, i: int, j: int, k: int, residual: float):
        self.triple = (i, j, k)
        self.residual = residual
        super().__init__(
            f"Jacobi identity fails on (X_{i}, X_{j}, X_{k}): residual {residual:.3e}"
        )


class DimensionMismatch(LieAlgebraError):
    pass


def _jacobiator(c: np.ndarray) -> np.ndarray:
    # J[i,j,l,:] = [[X_i,X_j],X_l] + [[X_j,X_l],X_i] + [[X_l,X_i],X_j]
    t1 = np.einsum("ijm,mlk->ijlk", c, c)
    t2 = np.einsum("jlm,mik->ijlk", c, c)
    t3 = np.einsum("lim,mjk->ijlk", c, c)
    return t1 + t2 + t3


@dataclass(frozen=True)
class LieAlgebra:
    """Validated structure-constant algebra.  Use :func:`validate_algebra`."""

    dim: int
    c: np.ndarray
    basis_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.c.shape != (self.dim, self.dim, self.dim):
            raise DimensionMismatch(
                f"structure array shape {self.c.shape} != ({self.dim},)*3"
            )
        if not self.basis_labels:
            object.__setattr__(
                self, "basis_labels", tuple(f"X{i}" for i in range(self.dim))
            )
        if len(self.basis_labels) != self.dim:
            raise DimensionMismatch("label count != dim")
        self.c.setflags(write=False)

    def vector(self, coords) -> np.ndarray:
        v = np.asarray(coords, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"vector shape {v.shape}, expected ({self.dim},)")
        return v


def validate_algebra(c, basis_labels=None, atol: float = VALIDATION_ATOL) -> LieAlgebra:
    """Check antisymmetry and the Jacobi identity, then wrap the constants.

    Raises :class:`AntisymmetryViolation` or :class:`JacobiViolation` carrying
    the worst offending triple and its residual.
    """
    c = np.array(c, dtype=float)
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise DimensionMismatch(f"expected a cubic rank-3 array, got shape {c.shape}")
    n = c.shape[0]

    anti = c + np.swapaxes(c, 0, 1)
    if np.abs(anti).max() > atol:
        i, j, k = np.unravel_index(np.abs(anti).argmax(), anti.shape)
        raise AntisymmetryViolation(int(i), int(j), int(k), float(anti[i, j, k]))

    jac = _jacobiator(c)
    worst = np.abs(jac).sum(axis=3)
    if worst.max() > atol:
        i, j, l = np.unravel_index(worst.argmax(), worst.shape)
        raise JacobiViolation(int(i), int(j), int(l), float(worst[i, j, l]))

    labels = tuple(basis_labels) if basis_labels is not None else ()
    return LieAlgebra(dim=n, c=c, basis_labels=labels)


def bracket(g: LieAlgebra, u, v) -> np.ndarray:
    """[u, v] in basis coordinates."""
    u = g.vector(u)
    v = g.vector(v)
    return np.einsum("i,j,ijk->k", u, v, g.c)


def change_basis(g: LieAlgebra, p: np.ndarray) -> LieAlgebra:
    """Structure constants in the basis whose j-th vector is column j of p.

    The result is antisymmetrized exactly; Jacobi holds automatically for
    an exact change of basis, so no re-validation is performed (rounding
    noise scales with cond(p) and would trip a fixed tolerance).
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (g.dim, g.dim):
        raise DimensionMismatch(f"basis matrix shape {p.shape} != ({g.dim},{g.dim})")
    pinv = np.linalg.inv(p)
    c_new = np.einsum("ia,jb,ijk,mk->abm", p, p, g.c, pinv, optimize=True)
    c_new = 0.5 * (c_new - np.swapaxes(c_new, 0, 1))
    return LieAlgebra(dim=g.dim, c=c_new)


def ad_matrix(g: LieAlgebra, u) -> np.ndarray:
    """Matrix of ad_u = [u, .]; column j holds the coordinates of [u, X_j]."""
    u = g.vector(u)
    return np.einsum("i,ijk->kj", u, g.c)


def exp_ad(g: LieAlgebra, u) -> np.ndarray:
    """exp(ad_u) by scaling-and-squaring (relative accuracy well below 1e-12)."""
    return expm(ad_matrix(g, u))


def numeric_rank(m: np.ndarray, scale_dim: int | None = None) -> int:
    """Rank by singular values with tolerance dim * sigma_max * 1e-10."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    n = scale_dim if scale_dim is not None else max(m.shape)
    tol = n * s[0] * RANK_RTOL
    return int((s > tol).sum())


@dataclass(frozen=True)
class Subspace:
    """Column span with an orthonormal basis, produced by :meth:`from_columns`."""

    ambient_dim: int
    basis_matrix: np.ndarray  # ambient_dim x r, orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis_matrix.shape[1]

    @classmethod
    def from_columns(cls, cols: np.ndarray, ambient_dim: int | None = None,
                     atol: float = 0.0) -> "Subspace":
        """Span of the columns, with the uniform SVD rank rule.

        ``atol`` is an absolute singular-value floor for callers whose
        columns may consist entirely of roundoff noise; the relative rule
        alone would promote such noise to full rank.
        """
        cols = np.atleast_2d(np.asarray(cols, dtype=float))
        if ambient_dim is None:
            ambient_dim = cols.shape[0]
        if cols.size == 0 or cols.shape[1] == 0:
            return cls(ambient_dim, np.zeros((ambient_dim, 0)))
        u, s, _ = np.linalg.svd(cols, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            return cls(ambient_dim, np.zeros((ambient_dim, 0)))
        tol = max(ambient_dim * s[0] * RANK_RTOL, atol)
        r = int((s > tol).sum())
        return cls(ambient_dim, u[:, :r].copy())

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim))

    def project(self, v: np.ndarray) -> np.ndarray:
        return self.basis_matrix @ (self.basis_matrix.T @ v)

    def residual(self, v: np.ndarray) -> float:
        """Distance of v from the subspace."""
        return float(np.linalg.norm(v - self.project(v)))

    def contains_vector(self, v, rtol: float = 1e-10) -> bool:
        v = np.asarray(v, dtype=float)
        return self.residual(v) <= rtol * (1.0 + np.linalg.norm(v))

    def contains_subspace(self, other: "Subspace", rtol: float = 1e-10) -> bool:
        if other.dim == 0:
            return True
        res = other.basis_matrix - self.basis_matrix @ (
            self.basis_matrix.T @ other.basis_matrix
        )
        return float(np.linalg.norm(res)) <= rtol * (1.0 + other.dim)

    def orthogonal_complement(self) -> "Subspace":
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        u, _, _ = np.linalg.svd(self.basis_matrix, full_matrices=True)
        return Subspace(self.ambient_dim, u[:, self.dim:].copy())


def derived_subalgebra(g: LieAlgebra, k: int = 1) -> Subspace:
    """k-th derived ideal g^(k); k=0 returns the whole algebra.

    Computed as the span of all pairwise brackets of a basis of the previous
    stage.  Bracket columns of an abelian stage are pure roundoff, so the
    rank rule gets an absolute floor tied to the size of the structure
    constants on top of the relative SVD rule.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    noise_floor = 1e-10 * (1.0 + float(np.abs(g.c).max()))
    current = Subspace.full(g.dim)
    for _ in range(k):
        b = current.basis_matrix
        r = b.shape[1]
        if r == 0:
            return current
        cols = [
            np.einsum("i,j,ijk->k", b[:, a], b[:, b2], g.c)
            for a in range(r)
            for b2 in range(a + 1, r)
        ]
        if not cols:
            return Subspace.zero(g.dim)
        current = Subspace.from_columns(np.column_stack(cols), g.dim,
                                        atol=noise_floor)
    return current


def derived_series_length(g: LieAlgebra, max_steps: int | None = None) -> int | None:
    """Steps until the derived series reaches 0, or None if it stabilizes nonzero."""
    limit = max_steps if max_steps is not None else g.dim + 1
    prev = g.dim + 1
    sub = Subspace.full(g.dim)
    for k in range(limit + 1):
        if sub.dim == 0:
            return k
        if sub.dim >= prev and k > 0:
            return None
        prev = sub.dim
        sub = derived_subalgebra(g, k + 1)
    return None


def load_algebra_json(source) -> LieAlgebra:
    """Load an algebra from the JSON bracket-table format.

    ``{"dim": n, "labels": [...], "brackets": [{"i": 0, "j": 1,
    "coeffs": {"1": 1.0}}, ...]}``; omitted entries are zero.  Only one of
    (i,j)/(j,i) may be given per pair; the loader fills the mirror image by
    antisymmetry and validates the result.
    """
    if isinstance(source, (str, bytes)):
        data = json.loads(source)
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        data = source
    n = int(data["dim"])
    labels = data.get("labels")
    c = np.zeros((n, n, n))
    seen: set[tuple[int, int]] = set()
    for entry in data.get("brackets", []):
        i, j = int(entry["i"]), int(entry["j"])
        if not (0 <= i < n and 0 <= j < n):
            raise DimensionMismatch(f"bracket index ({i},{j}) out of range for dim {n}")
        if i == j:
            raise AntisymmetryViolation(i, j, 0, 0.0)
        if (i, j) in seen or (j, i) in seen:
            raise LieAlgebraError(f"duplicate bracket entry for pair ({i},{j})")
        seen.add((i, j))
        for k_str, val in entry.get("coeffs", {}).items():
            k = int(k_str)
            if not 0 <= k < n:
                raise DimensionMismatch(f"coefficient index {k} out of range")
            c[i, j, k] = float(val)
            c[j, i, k] = -float(val)
    return validate_algebra(c, basis_labels=labels)


def algebra_to_json(g: LieAlgebra) -> dict:
    """Inverse of :func:`load_algebra_json` (upper pairs only, zeros omitted)."""
    brackets = []
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            coeffs = {
                str(k): float(g.c[i, j, k])
                for k in range(g.dim)
                if g.c[i, j, k] != 0.0
            }
            if coeffs:
                brackets.append({"i": i, "j": j, "coeffs": coeffs})
    return {
        "schema": 1,
        "dim": g.dim,
        "labels": list(g.basis_labels),
        "brackets": brackets,
    }
