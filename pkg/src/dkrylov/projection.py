"""Deflation apparatus built from an augmentation basis.

Given a square matrix ``a`` and a basis ``u`` of the augmentation space, the
:class:`Deflator` factorizes the small coupling matrix once and then provides
the projector actions and every iterate-correction formula the deflated
solvers need.  Two Galerkin modes are supported: residual-orthogonal (test
space equals the search space; requires a Hermitian positive definite matrix)
and residual-minimizing (test space is the matrix image of the search space;
works for any nonsingular matrix).
"""

from __future__ import annotations

import enum

import numpy as np
import scipy.linalg

from . import linalg
from .linalg import SingularMatrixError


class GalerkinMode(enum.Enum):
    """Which test space the underlying Galerkin condition uses."""

    #: Residual orthogonal to the search space itself (orthogonal-residual methods).
    RESIDUAL_ORTHOGONAL = "residual-orthogonal"
    #: Residual orthogonal to the image of the search space (minimal-residual methods).
    RESIDUAL_MINIMIZING = "residual-minimizing"


class SingularCouplingError(SingularMatrixError):
    """The coupling matrix of the augmentation basis is numerically singular.

    This is the hard precondition of the whole construction; it fails e.g.
    when the basis is rank deficient, or in residual-orthogonal mode when the
    basis is chosen so that u^H a u vanishes.
    """


class ModeMismatchError(ValueError):
    """An operation was requested in a Galerkin mode that does not support it."""


class Deflator:
    """Projection and correction toolbox for one (matrix, basis, mode) triple.

    The thin product w = a @ u and a factorization of the k-by-k coupling
    matrix are cached at construction, so every projector application costs a
    small solve plus thin matrix-vector products; the projected matrix is
    never formed.  The matrix ``a`` is kept by reference and must not be
    mutated afterwards.  Instances are immutable apart from the diagnostic
    apply counters.
    """

    def __init__(self, a, u, mode: GalerkinMode, *,
                 allow_indefinite: bool = False,
                 orthonormalize: bool = False):
        a = linalg.as_matrix(a)
        if a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        n = a.shape[0]
        u = linalg.as_matrix(u)
        if u.shape[0] != n:
            raise ValueError(f"basis has {u.shape[0]} rows, expected {n}")
        k = u.shape[1]
        if not 0 < k < n:
            raise ValueError(f"basis dimension must satisfy 0 < k < {n}, got {k}")
        if not (np.isfinite(a).all() and np.isfinite(u).all()):
            raise ValueError("matrix and basis entries must be finite")
        self.a = a
        self.mode = mode
        self.dim = n
        self.k = k
        self.a_hermitian = linalg.is_hermitian(a)
        self.orthonormalized = bool(orthonormalize)

        if orthonormalize:
            q = linalg.orthonormal_basis(u)
            if q.shape[1] != k:
                raise SingularCouplingError("augmentation basis is rank deficient")
            u = q
        self.u = u
        self.w = a @ u

        # The coupling matrix can be numerically zero for adversarial bases,
        # so the singularity test measures its pivots against the natural
        # problem scale rather than against the coupling matrix itself.
        a_norm = linalg.spectral_norm(a)
        u_norm = linalg.spectral_norm(self.u)
        if mode is GalerkinMode.RESIDUAL_ORTHOGONAL:
            if not allow_indefinite:
                self._require_hpd(a)
            self._bu = self.u
            self.coupling = self.u.conj().T @ self.w
            coupling_scale = a_norm * u_norm**2
            factor_fn = (linalg.lu_factor_checked if allow_indefinite
                         else linalg.cholesky_factor_checked)
        elif mode is GalerkinMode.RESIDUAL_MINIMIZING:
            self._bu = self.w
            self.coupling = self.w.conj().T @ self.w
            coupling_scale = (a_norm * u_norm) ** 2
            factor_fn = linalg.cholesky_factor_checked
        else:
            raise ValueError(f"unknown mode {mode!r}")

        try:
            factorization = factor_fn(self.coupling, scale=coupling_scale)
        except SingularMatrixError as exc:
            raise SingularCouplingError(
                f"coupling matrix is numerically singular ({exc})"
            ) from exc
        if factor_fn is linalg.cholesky_factor_checked:
            self._solve_coupling = lambda rhs: scipy.linalg.cho_solve(factorization, rhs)
        else:
            self._solve_coupling = lambda rhs: scipy.linalg.lu_solve(factorization, rhs)

        # Orthonormal image basis of w: with it the residual projector is
        # v - c (c^H v), a numerically robust alternative to the coupled solve.
        self._c = None
        if mode is GalerkinMode.RESIDUAL_MINIMIZING and orthonormalize:
            q, _ = np.linalg.qr(self.w)
            self._c = q

        self.apply_counts = {"project_residual": 0, "project_solution": 0,
                             "coarse_solve": 0, "corrections": 0}

    @staticmethod
    def _require_hpd(a):
        if not linalg.is_hermitian(a):
            raise ValueError(
                "residual-orthogonal mode requires a Hermitian positive definite "
                "matrix (pass allow_indefinite=True to override)"
            )
        try:
            linalg.cholesky_factor_checked(a)
        except SingularMatrixError as exc:
            raise ValueError(
                "residual-orthogonal mode requires a Hermitian positive definite "
                "matrix (pass allow_indefinite=True to override)"
            ) from exc

    # -- projector actions -------------------------------------------------

    def coarse_solve(self, v) -> np.ndarray:
        """Augmentation-space correction u (u^H b^H a u)^-1 u^H v."""
        v = linalg.as_vector(v, self.dim)
        self.apply_counts["coarse_solve"] += 1
        return self.u @ self._solve_coupling(self.u.conj().T @ v)

    def project_residual(self, v, use_orthonormal_image: bool | None = None) -> np.ndarray:
        """Residual projector: annihilates the image of the basis under ``a``.

        In residual-minimizing mode with an orthonormalized basis the action
        is computed from an orthonormal basis of that image instead of the
        coupled solve; both paths agree to roundoff.
        """
        v = linalg.as_vector(v, self.dim)
        self.apply_counts["project_residual"] += 1
        if use_orthonormal_image is None:
            use_orthonormal_image = self._c is not None
        if use_orthonormal_image:
            if self._c is None:
                raise ModeMismatchError(
                    "orthonormal-image projection requires residual-minimizing "
                    "mode with orthonormalize=True"
                )
            return v - self._c @ (self._c.conj().T @ v)
        return v - self.w @ self._solve_coupling(self._bu.conj().T @ v)

    def project_solution(self, v) -> np.ndarray:
        """Solution-space projector: annihilates the augmentation space itself."""
        v = linalg.as_vector(v, self.dim)
        self.apply_counts["project_solution"] += 1
        return v - self.u @ self._solve_coupling(self._bu.conj().T @ (self.a @ v))

    # -- right-hand sides for the deflated systems --------------------------

    def projected_rhs(self, b) -> np.ndarray:
        """Right-hand side of the left-projected system."""
        return self.project_residual(b)

    def two_sided_rhs(self, b) -> np.ndarray:
        """Right-hand side of the two-sided projected (Hermitian) system."""
        self._require_minimizing("two_sided_rhs")
        b = linalg.as_vector(b, self.dim)
        amb = self.a @ (self.a @ self.coarse_solve(b))
        return self.project_residual(b - amb)

    # -- iterate corrections -------------------------------------------------

    def correct_iterate(self, x_hat, b) -> np.ndarray:
        """Map a left-projected-system iterate to an original-system iterate.

        The corrected iterate x satisfies b - a x = projected residual of
        x_hat, so an exact deflated solution is mapped to the exact solution.
        """
        x_hat = linalg.as_vector(x_hat, self.dim)
        b = linalg.as_vector(b, self.dim)
        self.apply_counts["corrections"] += 1
        residual = b - self.a @ x_hat
        return x_hat + self.u @ self._solve_coupling(self._bu.conj().T @ residual)

    def correct_two_sided_iterate(self, x_bar, b) -> np.ndarray:
        """Map a two-sided-projected-system iterate to an original-system iterate."""
        self._require_minimizing("correct_two_sided_iterate")
        x_bar = linalg.as_vector(x_bar, self.dim)
        b = linalg.as_vector(b, self.dim)
        self.apply_counts["corrections"] += 1
        ub = self._solve_coupling(self.u.conj().T @ b)
        inner_term = self.project_residual(x_bar) + self.w @ ub
        coarse = self.u @ self._solve_coupling(self.u.conj().T @ (self.a @ b))
        return self.project_solution(inner_term) + coarse

    def adapted_initial_guess(self, x0, b) -> np.ndarray:
        """Initial guess that makes the left-projected run match the two-sided one."""
        self._require_minimizing("adapted_initial_guess")
        x0 = linalg.as_vector(x0, self.dim)
        b = linalg.as_vector(b, self.dim)
        return self.project_residual(x0) + self.w @ self._solve_coupling(self.u.conj().T @ b)

    def initial_correction(self, x_prev, b) -> np.ndarray:
        """Shift an initial guess so its residual is orthogonal to the basis.

        Residual-orthogonal mode only; the returned guess leaves an exact
        solution untouched.
        """
        if self.mode is not GalerkinMode.RESIDUAL_ORTHOGONAL:
            raise ModeMismatchError("initial_correction requires residual-orthogonal mode")
        x_prev = linalg.as_vector(x_prev, self.dim)
        b = linalg.as_vector(b, self.dim)
        return x_prev + self.coarse_solve(b - self.a @ x_prev)

    def dense_deflated_matrix(self) -> np.ndarray:
        """Densely formed left-projected matrix, for analysis and tests only."""
        return self.a - self.w @ self._solve_coupling(self._bu.conj().T @ self.a)

    def _require_minimizing(self, name: str):
        if self.mode is not GalerkinMode.RESIDUAL_MINIMIZING:
            raise ModeMismatchError(f"{name} requires residual-minimizing mode")

    def __repr__(self):
        return (f"<Deflator dim={self.dim} k={self.k} mode={self.mode.value}"
                f"{' orthonormalized' if self.orthonormalized else ''}>")
