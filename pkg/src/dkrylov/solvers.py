"""Base Krylov iterations: CG, MINRES and GMRES over a LinearOperator.

All three solvers record the explicitly computed residual norm ||b - op x_n||
per iteration by default (recurrence estimates are kept alongside for
cross-checking), classify termination into converged / breakdown / stagnated /
max-iterations, and never silently return a breakdown as success.

A *breakdown* is the singular-system failure mode: the Krylov basis cannot be
continued while the residual is still above tolerance.  When the continuation
vector vanishes at a step where the residual already meets the tolerance, the
run is a lucky termination and is reported as converged.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .operators import LinearOperator, dense_operator

#: Consecutive-iteration window of the stagnation rule.
STAGNATION_WINDOW = 50

#: Minimum improvement factor of the best residual over one window; less
#: improvement than this while above tolerance flags stagnation.
STAGNATION_FACTOR = 10.0 ** (-1.0 / STAGNATION_WINDOW)


class IndefiniteOperatorError(RuntimeError):
    """CG observed a direction of negative curvature; the operator is not
    positive semidefinite."""


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    BREAKDOWN = "breakdown"
    STAGNATED = "stagnated"
    MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class SolveConfig:
    """Tolerances and bookkeeping switches shared by all solvers.

    ``residual_tolerance`` is relative to max(||r0||, ||b||).
    ``breakdown_threshold`` is the relative cutoff below which a Lanczos or
    Arnoldi continuation vector counts as vanished.
    """

    residual_tolerance: float = 1e-10
    max_iterations: int = 1000
    breakdown_threshold: float = 1e-13
    record_history: bool = True
    explicit_residuals: bool = True
    reorthogonalize: bool = False

    def __post_init__(self):
        if self.residual_tolerance <= 0:
            raise ValueError("residual_tolerance must be positive")
        if self.breakdown_threshold <= 0:
            raise ValueError("breakdown_threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class SolveReport:
    """Outcome of one solver run.

    ``residual_norms[i]`` is the residual norm at iteration i (index 0 holds
    the initial residual); ``iterates``, when history recording is on, is the
    matching list of approximations.  After a breakdown the report is frozen
    at the last valid iterate and ``breakdown_iteration`` names the step that
    failed.
    """

    final_iterate: np.ndarray
    residual_norms: np.ndarray
    status: SolveStatus
    iterations_used: int
    breakdown_iteration: int | None = None
    recurrence_residual_norms: np.ndarray | None = None
    iterates: list | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    def relative_residual_norms(self) -> np.ndarray:
        """Residual history normalized by the initial residual norm."""
        r0 = self.residual_norms[0]
        if r0 == 0.0:
            return np.zeros_like(self.residual_norms)
        return self.residual_norms / r0


class _Run:
    """Shared recording / termination bookkeeping for one solver run."""

    def __init__(self, op, b, x0, cfg):
        self.op = op
        self.b = b
        self.cfg = cfg
        self.x = x0.copy()
        self.residual_norms = []
        self.recurrence_norms = []
        self.iterates = [] if cfg.record_history else None
        self.best = []

    def record(self, x, recurrence_norm) -> float:
        if self.cfg.explicit_residuals:
            explicit = linalg.vector_norm(self.b - self.op.apply(x))
        else:
            explicit = recurrence_norm
        self.residual_norms.append(explicit)
        self.recurrence_norms.append(recurrence_norm)
        if self.iterates is not None:
            self.iterates.append(x.copy())
        prev_best = self.best[-1] if self.best else math.inf
        self.best.append(min(prev_best, explicit))
        return explicit

    def start(self, r0_norm) -> float:
        self.denominator = max(r0_norm, linalg.vector_norm(self.b),
                               np.finfo(float).tiny)
        return self.record(self.x, r0_norm)

    def tol_reached(self, value) -> bool:
        return value <= self.cfg.residual_tolerance * self.denominator

    def stagnated(self) -> bool:
        n = len(self.best) - 1
        if n < STAGNATION_WINDOW:
            return False
        current = self.best[-1]
        if self.tol_reached(current):
            return False
        return current > self.best[-1 - STAGNATION_WINDOW] * STAGNATION_FACTOR

    def report(self, status, x, breakdown_iteration=None, diagnostics=None) -> SolveReport:
        return SolveReport(
            final_iterate=x,
            residual_norms=np.asarray(self.residual_norms, dtype=float),
            status=status,
            iterations_used=len(self.residual_norms) - 1,
            breakdown_iteration=breakdown_iteration,
            recurrence_residual_norms=np.asarray(self.recurrence_norms, dtype=float),
            iterates=self.iterates,
            diagnostics=diagnostics or {},
        )


def _prepare(op, b, x0, cfg):
    if isinstance(op, np.ndarray):
        op = dense_operator(op)
    if not isinstance(op, LinearOperator):
        raise TypeError("op must be a LinearOperator or a square ndarray")
    b = linalg.as_vector(b, op.dim)
    x0 = np.zeros(op.dim, dtype=np.complex128) if x0 is None else linalg.as_vector(x0, op.dim)
    cfg = cfg or SolveConfig()
    return op, b, x0, cfg


def cg_solve(op, b, x0=None, cfg: SolveConfig | None = None) -> SolveReport:
    """Conjugate gradients for Hermitian positive (semi)definite operators.

    On a consistent positive semidefinite system the iteration is well defined
    until termination.  A direction of significantly negative curvature raises
    :class:`IndefiniteOperatorError`; a vanishing curvature with the residual
    still above tolerance is reported as a breakdown (this cannot happen on a
    consistent semidefinite system).
    """
    op, b, x0, cfg = _prepare(op, b, x0, cfg)
    if op.hermitian is not True:
        raise ValueError("cg_solve requires an operator flagged hermitian")

    run = _Run(op, b, x0, cfg)
    x = run.x
    r = b - op.apply(x)
    r0_norm = linalg.vector_norm(r)
    value = run.start(r0_norm)
    if run.tol_reached(value):
        return run.report(SolveStatus.CONVERGED, x)

    residual_vectors = [r.copy()] if cfg.record_history else None
    p = r.copy()
    rho = np.vdot(r, r).real
    for iteration in range(1, cfg.max_iterations + 1):
        ap = op.apply(p)
        curvature = np.vdot(p, ap).real
        scale = linalg.vector_norm(p) * linalg.vector_norm(ap)
        if curvature <= 0.0:
            if curvature < -1e-12 * scale:
                raise IndefiniteOperatorError(
                    f"negative curvature {curvature:.3e} at iteration {iteration}"
                )
            if run.tol_reached(run.residual_norms[-1]):
                return run.report(SolveStatus.CONVERGED, x, diagnostics=_cg_diag(residual_vectors))
            return run.report(SolveStatus.BREAKDOWN, x, breakdown_iteration=iteration,
                              diagnostics=_cg_diag(residual_vectors))
        alpha = rho / curvature
        x = x + alpha * p
        r = r - alpha * ap
        rho_next = np.vdot(r, r).real
        if residual_vectors is not None:
            residual_vectors.append(r.copy())
        value = run.record(x, math.sqrt(max(rho_next, 0.0)))
        if run.tol_reached(value):
            return run.report(SolveStatus.CONVERGED, x, diagnostics=_cg_diag(residual_vectors))
        if run.stagnated():
            return run.report(SolveStatus.STAGNATED, x, diagnostics=_cg_diag(residual_vectors))
        p = r + (rho_next / rho) * p
        rho = rho_next
    return run.report(SolveStatus.MAX_ITERATIONS, x, diagnostics=_cg_diag(residual_vectors))


def _cg_diag(residual_vectors):
    if residual_vectors is None:
        return {}
    return {"residual_vectors": residual_vectors}


def minres_solve(op, b, x0=None, cfg: SolveConfig | None = None) -> SolveReport:
    """Minimal residual method via the three-term Lanczos recurrence.

    The tridiagonal least-squares problem is updated with Givens rotations;
    only the last two basis vectors and solution directions are kept unless
    full reorthogonalization is requested.  Works for Hermitian indefinite
    and singular operators; on a singular inconsistent system the run ends in
    a breakdown once the Krylov space is exhausted.
    """
    op, b, x0, cfg = _prepare(op, b, x0, cfg)
    if op.hermitian is not True:
        raise ValueError("minres_solve requires an operator flagged hermitian")

    run = _Run(op, b, x0, cfg)
    x = run.x
    r0 = b - op.apply(x)
    beta1 = linalg.vector_norm(r0)
    value = run.start(beta1)
    if run.tol_reached(value):
        return run.report(SolveStatus.CONVERGED, x)

    v_prev = np.zeros_like(r0)
    v = r0 / beta1
    basis = [v.copy()] if (cfg.record_history or cfg.reorthogonalize) else None
    dir_prev = np.zeros_like(r0)
    dir_prev2 = np.zeros_like(r0)
    rotations: list[linalg.GivensRotation] = []
    eta = complex(beta1)
    beta = 0.0

    for iteration in range(1, cfg.max_iterations + 1):
        av = op.apply(v)
        alpha = np.vdot(v, av).real
        w = av - alpha * v
        if iteration > 1:
            w = w - beta * v_prev
        if cfg.reorthogonalize and basis:
            vn = np.column_stack(basis)
            w = w - vn @ (vn.conj().T @ w)
        beta_next = linalg.vector_norm(w)

        if iteration == 1:
            column = np.array([alpha, beta_next])
            priors = []
        elif iteration == 2:
            column = np.array([beta, alpha, beta_next])
            priors = rotations[-1:]
        else:
            column = np.array([0.0, beta, alpha, beta_next])
            priors = rotations[-2:]
        updated, rot = linalg.givens_qr_step(column, priors)
        gamma = updated[-2]
        delta = updated[-3] if iteration >= 2 else 0.0
        epsilon = updated[-4] if iteration >= 3 else 0.0
        eta_next = -np.conj(rot.s) * eta

        vanished = beta_next <= cfg.breakdown_threshold * beta1
        if vanished:
            # The Krylov space cannot be continued.  The step is committed
            # only if the rank of the least-squares problem supports it and
            # it actually lands at the tolerance (lucky termination);
            # otherwise the run is frozen at the last valid iterate.
            usable = abs(gamma) > np.finfo(float).tiny
            if usable and run.tol_reached(abs(eta_next)):
                direction = (v - delta * dir_prev - epsilon * dir_prev2) / gamma
                x = x + (rot.c * eta) * direction
                run.record(x, abs(eta_next))
                return run.report(SolveStatus.CONVERGED, x, diagnostics=_lanczos_diag(basis))
            if run.tol_reached(abs(eta)):
                return run.report(SolveStatus.CONVERGED, x, diagnostics=_lanczos_diag(basis))
            return run.report(SolveStatus.BREAKDOWN, x, breakdown_iteration=iteration,
                              diagnostics=_lanczos_diag(basis))

        rotations.append(rot)
        direction = (v - delta * dir_prev - epsilon * dir_prev2) / gamma
        x = x + (rot.c * eta) * direction
        eta = eta_next
        dir_prev2 = dir_prev
        dir_prev = direction

        value = run.record(x, abs(eta))
        if run.tol_reached(value):
            return run.report(SolveStatus.CONVERGED, x, diagnostics=_lanczos_diag(basis))
        if run.stagnated():
            return run.report(SolveStatus.STAGNATED, x, diagnostics=_lanczos_diag(basis))

        v_prev = v
        v = w / beta_next
        beta = beta_next
        if basis is not None:
            basis.append(v.copy())
    return run.report(SolveStatus.MAX_ITERATIONS, x, diagnostics=_lanczos_diag(basis))


def _lanczos_diag(basis):
    if not basis:
        return {}
    vn = np.column_stack(basis)
    gram = vn.conj().T @ vn
    drift = linalg.spectral_norm(gram - np.eye(gram.shape[0]))
    return {"basis_orthogonality_drift": drift}


def gmres_solve(op, b, x0=None, cfg: SolveConfig | None = None) -> SolveReport:
    """GMRES with a full Arnoldi recurrence (no restarting).

    Modified Gram-Schmidt orthogonalization (twice when reorthogonalization
    is requested), Givens-rotation update of the Hessenberg least-squares
    problem, and explicit per-iteration residuals.  Applicable to any square
    operator; breakdowns can occur only on singular systems.
    """
    op, b, x0, cfg = _prepare(op, b, x0, cfg)

    run = _Run(op, b, x0, cfg)
    x = run.x
    r0 = b - op.apply(x)
    beta1 = linalg.vector_norm(r0)
    value = run.start(beta1)
    if run.tol_reached(value):
        return run.report(SolveStatus.CONVERGED, x)

    basis = [r0 / beta1]
    r_columns: list[np.ndarray] = []   # triangular factor, column-major
    rotations: list[linalg.GivensRotation] = []
    g = [complex(beta1)]               # rotated right-hand side

    def assemble(j):
        # Solve the j-by-j triangular system and expand into the full space.
        y = np.zeros(j, dtype=np.complex128)
        for col in range(j - 1, -1, -1):
            acc = g[col]
            for row in range(col + 1, j):
                acc -= r_columns[row][col] * y[row]
            y[col] = acc / r_columns[col][col]
        correction = np.zeros(op.dim, dtype=np.complex128)
        for col in range(j):
            correction += y[col] * basis[col]
        return x0 + correction

    for iteration in range(1, cfg.max_iterations + 1):
        j = iteration - 1
        w = op.apply(basis[j])
        h = np.zeros(j + 2, dtype=np.complex128)
        for i in range(j + 1):
            h[i] = np.vdot(basis[i], w)
            w = w - h[i] * basis[i]
        if cfg.reorthogonalize:
            for i in range(j + 1):
                correction = np.vdot(basis[i], w)
                h[i] += correction
                w = w - correction * basis[i]
        h_next = linalg.vector_norm(w)
        h[j + 1] = h_next

        updated, rot = linalg.givens_qr_step(h, rotations)
        gamma = updated[-2]
        g_rotated, g_next = rot.apply(g[-1], 0.0)
        recurrence_norm = abs(g_next)

        vanished = h_next <= cfg.breakdown_threshold * beta1
        if vanished:
            # Invariant subspace reached: commit the final column only for a
            # genuine lucky termination, otherwise freeze at the last iterate.
            usable = abs(gamma) > np.finfo(float).tiny
            if usable and run.tol_reached(recurrence_norm):
                rotations.append(rot)
                r_columns.append(updated[:-1])
                g[-1] = g_rotated
                g.append(g_next)
                x = assemble(iteration)
                run.record(x, recurrence_norm)
                return run.report(SolveStatus.CONVERGED, x, diagnostics=_arnoldi_diag(basis))
            if run.tol_reached(abs(g[-1])):
                return run.report(SolveStatus.CONVERGED, x, diagnostics=_arnoldi_diag(basis))
            return run.report(SolveStatus.BREAKDOWN, x, breakdown_iteration=iteration,
                              diagnostics=_arnoldi_diag(basis))

        rotations.append(rot)
        r_columns.append(updated[:-1])
        g[-1] = g_rotated
        g.append(g_next)

        x = assemble(iteration)
        value = run.record(x, recurrence_norm)
        if run.tol_reached(value):
            return run.report(SolveStatus.CONVERGED, x, diagnostics=_arnoldi_diag(basis))
        if run.stagnated():
            return run.report(SolveStatus.STAGNATED, x, diagnostics=_arnoldi_diag(basis))
        basis.append(w / h_next)
    return run.report(SolveStatus.MAX_ITERATIONS, x, diagnostics=_arnoldi_diag(basis))


def _arnoldi_diag(basis):
    vn = np.column_stack(basis)
    gram = vn.conj().T @ vn
    drift = linalg.spectral_norm(gram - np.eye(gram.shape[0]))
    return {"basis_orthogonality_drift": drift}


def with_overrides(cfg: SolveConfig, **kwargs) -> SolveConfig:
    """Copy of a config with selected fields replaced."""
    return replace(cfg, **kwargs)
