"""Breakdown predicates, breakdown-guess construction and spectral checks.

These are analysis-side tools: they form dense projected matrices, run dense
factorizations and eigendecompositions, and are not meant for the solver hot
path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import linalg
from .projection import Deflator, GalerkinMode

#: Singular values of the subspace coupling below this declare a nontrivial
#: intersection between the deflation space and the orthogonal complement of
#: its image.
INTERSECTION_THRESHOLD = 1e-10


class GuessInvalidError(ValueError):
    """The requested breakdown guess does not satisfy the breakdown geometry."""


class NotInvariantError(ValueError):
    """The basis does not span an invariant subspace to the required accuracy."""


class VerificationFailedError(AssertionError):
    """A spectral verification found eigenvalues outside the tolerance."""

    def __init__(self, message, max_mismatch):
        super().__init__(message)
        self.max_mismatch = max_mismatch


@dataclass(frozen=True)
class BreakdownDiagnosis:
    """Geometry report for a (matrix, deflation basis) pair.

    ``smallest_indicator`` is the smallest singular value of the coupling
    between orthonormal bases of the deflation space and of its image; it
    vanishes exactly when some deflation vector is orthogonal to the whole
    image, the condition under which left-projected minimal-residual runs
    can break down.  The largest principal angle between the two subspaces is
    arccos of that value.
    """

    intersection_nontrivial: bool
    smallest_indicator: float
    largest_principal_angle_rad: float

    @property
    def largest_principal_angle_deg(self) -> float:
        return float(np.degrees(self.largest_principal_angle_rad))


def diagnose_breakdown(a, u, threshold: float = INTERSECTION_THRESHOLD) -> BreakdownDiagnosis:
    """Decide whether the deflation space intersects the orthogonal complement
    of its image under ``a``."""
    a = linalg.as_matrix(a)
    u = linalg.as_matrix(u)
    k = u.shape[1]
    qu = linalg.orthonormal_basis(u)
    if qu.shape[1] != k:
        raise ValueError("deflation basis is rank deficient")
    qau = linalg.orthonormal_basis(a @ u)
    s = scipy.linalg.svd(qau.conj().T @ qu, compute_uv=False)
    smallest = float(s.min()) if s.size else 0.0
    angle = float(np.arccos(np.clip(smallest, 0.0, 1.0)))
    return BreakdownDiagnosis(
        intersection_nontrivial=smallest < threshold,
        smallest_indicator=smallest,
        largest_principal_angle_rad=angle,
    )


def breakdown_initial_guess(a, b, u, coefficients, tol: float = 1e-8) -> np.ndarray:
    """Initial guess that forces a first-step breakdown of the left-projected run.

    The guess solves a x0 = b - v for v the given combination of basis
    columns; it is valid only when v lies in the orthogonal complement of the
    image of the basis (then the initial deflated residual equals v and is
    annihilated by the deflated operator).  Raises GuessInvalidError when the
    basis does not realize that geometry.
    """
    a = linalg.as_matrix(a)
    u = linalg.as_matrix(u)
    b = linalg.as_vector(b, a.shape[0])
    coefficients = linalg.as_vector(coefficients, u.shape[1])
    v = u @ coefficients
    vnorm = linalg.vector_norm(v)
    if vnorm == 0.0:
        raise GuessInvalidError("the coefficient vector must combine to a nonzero vector")
    d = Deflator(a, u, GalerkinMode.RESIDUAL_MINIMIZING)
    # v must be a fixed point of the residual projector (equivalently v is
    # orthogonal to the image of the basis); the projected image of v is then
    # zero identically.
    defect = linalg.vector_norm(d.project_residual(v) - v)
    if defect > tol * vnorm:
        raise GuessInvalidError(
            f"basis combination is not orthogonal to its image "
            f"(defect {defect:.3e} vs {tol:g} * {vnorm:.3e})"
        )
    image_defect = linalg.vector_norm(d.project_residual(a @ v))
    scale = linalg.spectral_norm(a) * vnorm
    if image_defect > tol * max(scale, np.finfo(float).tiny):
        raise GuessInvalidError(
            f"projected image of the combination does not vanish ({image_defect:.3e})"
        )
    return linalg.solve_dense(a, b - v)


@dataclass(frozen=True)
class SpectrumCheck:
    """Result of comparing the deflated operator's spectrum to prediction."""

    computed: np.ndarray
    expected: np.ndarray
    max_mismatch: float
    tolerance: float
    passed: bool


def check_deflated_spectrum(a, u, mode: GalerkinMode,
                            tol_factor: float = 1e-8) -> SpectrumCheck:
    """Verify that deflating an invariant subspace moves exactly its
    eigenvalues to zero and leaves the rest of the spectrum intact.

    Requires a Hermitian matrix and a basis spanning an exact invariant
    subspace; forms the dense left-projected matrix and compares its spectrum
    (as a multiset) against {0 with the basis dimension's multiplicity} plus
    the non-deflated eigenvalues.  Raises VerificationFailedError on mismatch
    beyond ``tol_factor`` times the matrix norm.
    """
    a = linalg.as_matrix(a)
    u = linalg.as_matrix(u)
    k = u.shape[1]
    if not linalg.is_hermitian(a):
        raise ValueError("spectral verification requires a Hermitian matrix")
    theta = _invariant_eigenvalues(a, u)
    d = Deflator(a, u, mode, allow_indefinite=True)
    deflated = d.dense_deflated_matrix()
    anorm = linalg.spectral_norm(a)
    tolerance = tol_factor * max(anorm, np.finfo(float).tiny)
    if linalg.hermitian_defect(deflated) > tolerance:
        raise NotInvariantError(
            "deflated matrix is not Hermitian; the basis cannot span an "
            "invariant subspace of a Hermitian matrix"
        )
    computed = np.sort(linalg.hermitian_eigen(deflated, tol=np.inf).eigenvalues)
    full = np.sort(linalg.hermitian_eigen(a).eigenvalues)
    remaining = _remove_matched(full, theta, tolerance)
    expected = np.sort(np.concatenate([np.zeros(k), remaining]))
    max_mismatch = float(np.max(np.abs(computed - expected)))
    if max_mismatch > tolerance:
        raise VerificationFailedError(
            f"deflated spectrum mismatch {max_mismatch:.3e} exceeds {tolerance:.3e}",
            max_mismatch,
        )
    return SpectrumCheck(computed, expected, max_mismatch, tolerance, True)


def effective_condition_number(a, u, invariance_tol: float = 1e-10) -> float:
    """Condition number of the deflated operator restricted to its image.

    For a Hermitian positive definite matrix and a basis spanning an exact
    invariant subspace, this is the ratio of the extreme eigenvalues that
    survive deflation; it never exceeds the condition number of the matrix
    itself.  Raises NotInvariantError when the basis fails the invariance
    check.
    """
    a = linalg.as_matrix(a)
    u = linalg.as_matrix(u)
    eig = linalg.hermitian_eigen(a)
    if eig.eigenvalues[0] <= 0:
        raise ValueError("effective condition number requires a positive definite matrix")
    theta = _invariant_eigenvalues(a, u, invariance_tol)
    anorm = linalg.spectral_norm(a)
    remaining = _remove_matched(np.sort(eig.eigenvalues), theta,
                                1e-8 * max(anorm, np.finfo(float).tiny))
    if remaining.size == 0:
        raise ValueError("deflation removed the entire spectrum")
    kappa = float(remaining.max() / remaining.min())
    return kappa


def _invariant_eigenvalues(a, u, tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of ``a`` restricted to span(u); fails if not invariant."""
    q = linalg.orthonormal_basis(u)
    if q.shape[1] != u.shape[1]:
        raise ValueError("basis is rank deficient")
    aq = a @ q
    restriction = q.conj().T @ aq
    defect = linalg.spectral_norm(aq - q @ restriction)
    scale = max(linalg.spectral_norm(a), np.finfo(float).tiny)
    if defect > tol * scale:
        raise NotInvariantError(
            f"basis is not invariant: residual {defect:.3e} vs {tol:g} * {scale:.3e}"
        )
    return np.sort(linalg.hermitian_eigen(restriction, tol=1e-8).eigenvalues)


def _remove_matched(values: np.ndarray, removed: np.ndarray, tol: float) -> np.ndarray:
    """Multiset difference with nearest-match pairing."""
    values = list(values)
    for r in removed:
        idx = int(np.argmin([abs(v - r) for v in values]))
        if abs(values[idx] - r) > max(tol, 1e-6 * max(abs(r), 1.0)):
            raise NotInvariantError(
                f"eigenvalue {r:.6g} of the restriction is not in the spectrum"
            )
        values.pop(idx)
    return np.asarray(values)


def krylov_basis(op, v, n: int) -> np.ndarray:
    """Orthonormal basis of the order-n Krylov space of (op, v) via Arnoldi."""
    v = linalg.as_vector(v)
    nv = linalg.vector_norm(v)
    if nv == 0:
        raise ValueError("Krylov start vector must be nonzero")
    basis = [v / nv]
    for _ in range(1, n):
        w = op.apply(basis[-1]) if hasattr(op, "apply") else np.asarray(op) @ basis[-1]
        for q in basis:
            w = w - np.vdot(q, w) * q
        nw = linalg.vector_norm(w)
        if nw <= 1e-12 * nv:
            break
        basis.append(w / nw)
    return np.column_stack(basis)
