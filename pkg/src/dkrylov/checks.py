"""Seeded property suites behind the ``check`` command.

Each suite runs a batch of randomized instances, measures the worst violation
of every identity it covers, and returns a JSON-ready report.  The pytest
suite drives the same functions, so the command-line checks and the tests can
never drift apart.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .analysis import (breakdown_initial_guess, check_deflated_spectrum,
                       diagnose_breakdown)
from .deflated import (deflated_gmres, deflated_minres,
                       deflated_minres_adapted_guess, rminres_deflation_only,
                       rminres_explicit)
from .problems import (breakdown_prone_basis, eigenvector_basis,
                       symmetric_indefinite_problem)
from .projection import Deflator, GalerkinMode
from .solvers import SolveConfig, SolveStatus

SUITES = ("projections", "equivalence", "spectrum", "breakdown")


def run_suite(name: str, seed: int = 0) -> dict:
    if name == "projections":
        return projection_suite(seed)
    if name == "equivalence":
        return equivalence_suite(seed)
    if name == "spectrum":
        return spectrum_suite(seed)
    if name == "breakdown":
        return breakdown_suite(seed)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


def _check(name, violation, tolerance):
    return {
        "name": name,
        "max_violation": float(violation),
        "tolerance": float(tolerance),
        "passed": bool(violation <= tolerance),
    }


def _finish(name, seed, checks):
    return {
        "suite": name,
        "seed": seed,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }


def _random_hpd(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g @ g.conj().T + n * np.eye(n)).astype(np.complex128)


def _random_hermitian(rng, n):
    """Indefinite Hermitian with eigenvalue magnitudes in [0.5, 3].

    Keeping the spectrum away from zero keeps minimal-residual runs short,
    so the exact-arithmetic curve equalities are not drowned in the
    orthogonality drift of long three-term recurrences.
    """
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(g)
    lam = rng.uniform(1.0, 2.5, n) * rng.choice([-1.0, 1.0], n)
    a = (q * lam) @ q.conj().T
    return (0.5 * (a + a.conj().T)).astype(np.complex128)


def _random_nonsingular(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + n * np.eye(n)).astype(np.complex128)


def _random_basis(rng, n, k):
    return (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))).astype(np.complex128)


def projection_suite(seed: int = 0, instances: int = 20) -> dict:
    """Projector identities on random instances in both Galerkin modes."""
    rng = np.random.default_rng(seed)
    tol = 1e-12
    worst: dict[str, float] = {}

    def track(name, value):
        worst[name] = max(worst.get(name, 0.0), value)

    for index in range(instances):
        n = int(rng.integers(10, 61))
        k = int(rng.integers(1, min(9, n)))
        for mode in GalerkinMode:
            if mode is GalerkinMode.RESIDUAL_ORTHOGONAL:
                a = _random_hpd(rng, n)
            else:
                a = _random_nonsingular(rng, n)
            u = _random_basis(rng, n, k)
            d = Deflator(a, u, mode)
            v = _random_basis(rng, n, 1).ravel()
            y = _random_basis(rng, k, 1).ravel()
            anorm = linalg.spectral_norm(a)
            vnorm = linalg.vector_norm(v)
            scale = max(anorm * vnorm, 1.0)

            pv = d.project_residual(v)
            track("residual_projector_idempotent",
                  linalg.vector_norm(d.project_residual(pv) - pv) / scale)
            track("residual_projector_kills_image",
                  linalg.vector_norm(d.project_residual(a @ (u @ y)))
                  / max(anorm * linalg.vector_norm(u @ y), 1e-300))
            bu = u if mode is GalerkinMode.RESIDUAL_ORTHOGONAL else d.w
            track("residual_projector_range",
                  linalg.vector_norm(bu.conj().T @ pv)
                  / max(linalg.spectral_norm(bu) * vnorm, 1e-300))

            qv = d.project_solution(v)
            track("solution_projector_idempotent",
                  linalg.vector_norm(d.project_solution(qv) - qv) / scale)
            track("solution_projector_kills_basis",
                  linalg.vector_norm(d.project_solution(u @ y))
                  / max(linalg.spectral_norm(u) * linalg.vector_norm(y), 1e-300))
            track("solution_projector_range",
                  linalg.vector_norm(bu.conj().T @ (a @ qv))
                  / max(anorm * linalg.spectral_norm(bu) * vnorm, 1e-300))

            track("projector_intertwining",
                  linalg.vector_norm(d.project_residual(a @ v) - a @ qv) / scale)
            if mode is GalerkinMode.RESIDUAL_MINIMIZING:
                w2 = _random_basis(rng, n, 1).ravel()
                defect = abs(linalg.inner(pv, w2) - linalg.inner(v, d.project_residual(w2)))
                track("residual_projector_self_adjoint",
                      defect / max(vnorm * linalg.vector_norm(w2), 1e-300))

    checks = [_check(name, value, tol) for name, value in sorted(worst.items())]
    return _finish("projections", seed, checks)


def equivalence_suite(seed: int = 0, instances: int = 10) -> dict:
    """Curve equalities between the mathematically equivalent variants."""
    rng = np.random.default_rng(seed)
    tol = 1e-8
    cfg = SolveConfig(residual_tolerance=1e-10, max_iterations=400)
    dev_explicit = 0.0
    dev_gmres = 0.0
    dev_adapted = 0.0
    for index in range(instances):
        n = int(rng.integers(30, 81))
        k = int(rng.integers(2, 7))
        a = _random_hermitian(rng, n)
        u = _random_basis(rng, n, k)
        b = _random_basis(rng, n, 1).ravel()
        b /= linalg.vector_norm(b)
        x0 = _random_basis(rng, n, 1).ravel() if index % 2 else None

        r_exp = rminres_explicit(a, b, u, x0, cfg)
        r_only = rminres_deflation_only(a, b, u, x0, cfg)
        r_free = deflated_minres(a, b, u, x0, cfg)
        r_adap = deflated_minres_adapted_guess(a, b, u, x0, cfg)
        r_gm = deflated_gmres(a, b, u, x0, cfg)

        dev_explicit = max(dev_explicit, curve_deviation(r_exp, r_only))
        dev_gmres = max(dev_gmres, curve_deviation(r_gm, r_only))
        dev_adapted = max(dev_adapted, curve_deviation(r_adap, r_free))
    checks = [
        _check("explicit_vs_deflation_only", dev_explicit, tol),
        _check("gmres_vs_deflation_only", dev_gmres, tol),
        _check("adapted_guess_vs_two_sided", dev_adapted, tol),
    ]
    return _finish("equivalence", seed, checks)


def curve_deviation(ra, rb) -> float:
    """Max pointwise distance of two residual curves, relative to the start.

    Curves of different lengths (stopping criteria may fire at different
    steps) are compared on the common prefix; the tail of the longer run only
    counts as deviation where it rises above the last common value, i.e. a
    run that merely kept converging past the other's stop is not penalized.
    """
    na = np.asarray(ra.original_residual_norms, dtype=float)
    nb = np.asarray(rb.original_residual_norms, dtype=float)
    r0 = max(na[0], nb[0], np.finfo(float).tiny)
    m = min(len(na), len(nb))
    dev = float(np.max(np.abs(na[:m] - nb[:m]))) / r0
    longer = na if len(na) > len(nb) else nb
    if len(longer) > m:
        worst_tail = float(np.max(longer[m:]))
        dev = max(dev, max(0.0, worst_tail - longer[m - 1]) / r0)
    return dev


def spectrum_suite(seed: int = 0, instances: int = 5) -> dict:
    """Deflated-spectrum verification on invariant subspaces."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    tol = 1e-8
    p = symmetric_indefinite_problem(50, seed=seed)
    u = eigenvector_basis(p, list(range(1, 6)) + list(range(51, 56)))
    result = check_deflated_spectrum(p.a, u, GalerkinMode.RESIDUAL_MINIMIZING)
    worst = max(worst, result.max_mismatch / max(linalg.spectral_norm(p.a), 1.0))
    for _ in range(instances):
        n = int(rng.integers(20, 61))
        k = int(rng.integers(1, 8))
        a = _random_hpd(rng, n)
        eig = linalg.hermitian_eigen(a)
        u = eig.eigenvectors[:, :k]
        for mode in GalerkinMode:
            result = check_deflated_spectrum(a, u, mode)
            worst = max(worst, result.max_mismatch / max(linalg.spectral_norm(a), 1.0))
    checks = [_check("deflated_spectrum_multiset", worst, tol)]
    return _finish("spectrum", seed, checks)


def breakdown_suite(seed: int = 0, pairs: int = 12, guesses_per_invariant: int = 4) -> dict:
    """Soundness of the breakdown predicate in both directions.

    Flagged instances must admit a constructible first-step breakdown guess;
    exactly invariant deflation spaces must never break down from random
    initial guesses.
    """
    rng = np.random.default_rng(seed)
    cfg = SolveConfig(residual_tolerance=1e-10, max_iterations=300)
    flagged_failures = 0
    flagged_total = 0
    invariant_breakdowns = 0
    invariant_runs = 0
    false_flags = 0
    for index in range(pairs):
        m = int(rng.integers(10, 31))
        p = symmetric_indefinite_problem(m, seed=int(rng.integers(0, 2**31)))
        k = int(rng.integers(1, min(6, m - 1)))
        start = int(rng.integers(1, m - k)) if m - k > 1 else 1
        idx = range(start, start + k)

        u_break = breakdown_prone_basis(p, idx)
        flagged_total += 1
        diag = diagnose_breakdown(p.a, u_break)
        if not diag.intersection_nontrivial:
            flagged_failures += 1
            continue
        coeff = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        x0 = breakdown_initial_guess(p.a, p.b, u_break, coeff)
        rep = rminres_deflation_only(p.a, p.b, u_break, x0, cfg)
        if not (rep.status is SolveStatus.BREAKDOWN
                and rep.deflated_report.breakdown_iteration == 1):
            flagged_failures += 1

        u_inv = eigenvector_basis(p, idx)
        diag_inv = diagnose_breakdown(p.a, u_inv)
        if diag_inv.intersection_nontrivial:
            false_flags += 1
        for _ in range(guesses_per_invariant):
            x0r = rng.standard_normal(2 * m) + 1j * rng.standard_normal(2 * m)
            rep = rminres_deflation_only(p.a, p.b, u_inv, x0r, cfg)
            invariant_runs += 1
            if rep.status is SolveStatus.BREAKDOWN:
                invariant_breakdowns += 1
    checks = [
        _check("flagged_pairs_break_down_at_step_one", flagged_failures, 0),
        _check("invariant_bases_never_flagged", false_flags, 0),
        _check(f"invariant_bases_never_break_down_({invariant_runs}_runs)",
               invariant_breakdowns, 0),
    ]
    return _finish("breakdown", seed, checks)
