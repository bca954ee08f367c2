"""Dense complex linear algebra kernels shared by all higher-level modules.

Vectors are 1-d and matrices 2-d numpy arrays with complex128 entries; real
input data is promoted so there is a single code path.  Factorizations are
delegated to LAPACK through numpy/scipy; this module enforces the pivot and
symmetry tolerances the rest of the library relies on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

#: Relative pivot threshold below which a dense factorization is declared singular.
SINGULARITY_THRESHOLD = 1e-14

#: Relative tolerance for accepting a matrix as Hermitian.
HERMITIAN_TOLERANCE = 1e-12


class SingularMatrixError(ValueError):
    """A dense factorization produced a pivot below the singularity threshold."""


def as_vector(x, n: int | None = None) -> np.ndarray:
    """Return ``x`` as a 1-d complex128 array, optionally checking its length."""
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim == 2 and 1 in v.shape:
        v = v.ravel()
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got array of shape {np.shape(x)}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got {v.shape[0]}")
    return v


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {np.shape(a)}")
    return m


def inner(x, y) -> complex:
    """Inner product x^H y; the first argument is conjugated."""
    x = as_vector(x)
    y = as_vector(y, x.shape[0])
    return complex(np.vdot(x, y))


def vector_norm(x) -> float:
    return float(np.linalg.norm(x))


def spectral_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_defect(a) -> float:
    """Spectral norm of a - a^H."""
    a = as_matrix(a)
    return spectral_norm(a - a.conj().T)


def is_hermitian(a, tol: float = HERMITIAN_TOLERANCE) -> bool:
    a = as_matrix(a)
    return hermitian_defect(a) <= tol * max(spectral_norm(a), np.finfo(float).tiny)


@dataclass(frozen=True)
class GivensRotation:
    """Unitary 2x2 rotation [[c, s], [-conj(s), c]] with real c and |c|^2+|s|^2=1."""

    c: float
    s: complex
    r: complex

    def apply(self, f: complex, g: complex) -> tuple[complex, complex]:
        return (
            self.c * f + self.s * g,
            -np.conj(self.s) * f + self.c * g,
        )


def make_givens(f: complex, g: complex) -> GivensRotation:
    """Rotation annihilating ``g`` against ``f``: it maps (f, g) to (r, 0)."""
    f = complex(f)
    g = complex(g)
    if g == 0:
        return GivensRotation(1.0, 0.0 + 0.0j, f)
    if f == 0:
        ag = abs(g)
        return GivensRotation(0.0, np.conj(g) / ag, ag)
    af = abs(f)
    d = np.hypot(af, abs(g))
    phase = f / af
    return GivensRotation(af / d, phase * np.conj(g) / d, phase * d)


def givens_qr_step(column, prior_rotations) -> tuple[np.ndarray, GivensRotation]:
    """One column update of a running QR factorization by Givens rotations.

    ``column`` holds the new nonzero column segment; ``prior_rotations[i]`` is
    applied to entries (i, i+1) in order, then a new rotation is generated to
    annihilate the last entry against the second-to-last.  Returns the updated
    column (last entry zeroed) and the new rotation.
    """
    col = np.array(column, dtype=np.complex128)
    if col.ndim != 1 or col.shape[0] < 2:
        raise ValueError("column must be a vector with at least two entries")
    rotations = list(prior_rotations)
    if len(rotations) != col.shape[0] - 2:
        raise ValueError(
            f"need {col.shape[0] - 2} prior rotations for a column of "
            f"length {col.shape[0]}, got {len(rotations)}"
        )
    for i, rot in enumerate(rotations):
        col[i], col[i + 1] = rot.apply(col[i], col[i + 1])
    rot = make_givens(col[-2], col[-1])
    col[-2] = rot.r
    col[-1] = 0.0
    return col, rot


def random_orthogonal(n: int, seed) -> np.ndarray:
    """Seeded random real orthogonal matrix, stored complex.

    QR of a standard-normal matrix with the signs of diag(R) fixed, which
    makes the draw deterministic and Haar-like.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return (q * d).astype(np.complex128)


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    """Eigenvalues in ascending order and a unitary matrix of eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eigen(a, tol: float = HERMITIAN_TOLERANCE) -> HermitianEigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix.

    Raises ValueError when the input is not Hermitian within ``tol`` relative
    to its spectral norm.  Intended as an analysis/test oracle, not for the
    solver hot path.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not is_hermitian(a, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, q = np.linalg.eigh(0.5 * (a + a.conj().T))
    return HermitianEigenDecomposition(w, q)


def lu_factor_checked(a, threshold: float = SINGULARITY_THRESHOLD, scale: float | None = None):
    """Pivoted LU factorization that raises SingularMatrixError on tiny pivots.

    ``scale`` sets the magnitude the pivots are measured against; it defaults
    to the matrix's own spectral norm but callers that know the natural size
    of the entries (e.g. a coupling matrix that may be numerically zero)
    should pass it explicitly.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    if scale is None:
        scale = spectral_norm(a)
    scale = max(scale, np.finfo(float).tiny)
    pivots = np.abs(np.diag(lu))
    if pivots.size and float(pivots.min()) < threshold * scale:
        raise SingularMatrixError(
            f"smallest pivot {pivots.min():.3e} below {threshold:g} * {scale:.3e}"
        )
    return lu, piv


def solve_dense(a, b) -> np.ndarray:
    """Solve a small dense square system, rejecting numerically singular input."""
    a = as_matrix(a)
    b = as_vector(b, a.shape[0])
    lu_piv = lu_factor_checked(a)
    return scipy.linalg.lu_solve(lu_piv, b)


def cholesky_factor_checked(e, threshold: float = SINGULARITY_THRESHOLD,
                            scale: float | None = None):
    """Cholesky factorization of a Hermitian positive definite matrix.

    Raises SingularMatrixError when the matrix is not positive definite or a
    pivot (squared diagonal of L) falls below the relative threshold; see
    :func:`lu_factor_checked` for the ``scale`` convention.
    """
    e = as_matrix(e)
    e = 0.5 * (e + e.conj().T)
    try:
        factor = scipy.linalg.cho_factor(e, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"Cholesky factorization failed: {exc}") from exc
    if scale is None:
        scale = spectral_norm(e)
    scale = max(scale, np.finfo(float).tiny)
    pivots = np.diag(factor[0]).real ** 2
    if pivots.size and float(pivots.min()) < threshold * scale:
        raise SingularMatrixError(
            f"smallest Cholesky pivot {pivots.min():.3e} below {threshold:g} * {scale:.3e}"
        )
    return factor


def orthonormal_basis(a) -> np.ndarray:
    """Orthonormal basis of the column span (SVD-based, rank-revealing)."""
    return scipy.linalg.orth(as_matrix(a))


def principal_angles(x, y) -> np.ndarray:
    """Principal angles in radians between the column spans of x and y, ascending.

    Uses the combined sine/cosine formulation, which stays accurate for
    angles near zero where a plain arccos of singular values loses half the
    working precision.
    """
    angles = scipy.linalg.subspace_angles(as_matrix(x), as_matrix(y))
    return np.sort(np.clip(angles, 0.0, np.pi / 2))
