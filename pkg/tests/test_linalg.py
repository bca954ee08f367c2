import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dkrylov import linalg


def fsum_inner(x, y):
    """Extended-precision summation oracle for the inner product."""
    re = math.fsum((xi.conjugate() * yi).real for xi, yi in zip(x, y))
    im = math.fsum((xi.conjugate() * yi).imag for xi, yi in zip(x, y))
    return complex(re, im)


class TestInner:
    def test_orthonormal_basis_vectors(self):
        assert linalg.inner([1, 0], [0, 1]) == 0

    def test_conjugation_forces_real_norm(self):
        assert linalg.inner([1j, 0], [1j, 0]) == pytest.approx(1.0)

    def test_matches_summation_oracle(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        assert linalg.inner(x, y) == pytest.approx(fsum_inner(x, y), abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            linalg.inner([1, 2], [1, 2, 3])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_conjugate_symmetry(self, n, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert linalg.inner(x, y) == pytest.approx(np.conj(linalg.inner(y, x)))


class TestGivens:
    def test_three_four_five(self):
        col, rot = linalg.givens_qr_step([3.0, 4.0], [])
        assert rot.c == pytest.approx(0.6)
        assert rot.s == pytest.approx(0.8)
        np.testing.assert_allclose(col, [5.0, 0.0], atol=1e-15)

    def test_already_triangular_gives_identity(self):
        col, rot = linalg.givens_qr_step([1.0, 0.0], [])
        assert rot.c == 1.0 and rot.s == 0.0
        np.testing.assert_allclose(col, [1.0, 0.0])

    def test_unitarity(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            f, g = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            rot = linalg.make_givens(f, g)
            assert abs(rot.c) ** 2 + abs(rot.s) ** 2 == pytest.approx(1.0, abs=1e-14)
            r, zero = rot.apply(f, g)
            assert abs(zero) <= 1e-14 * math.hypot(abs(f), abs(g))
            assert abs(r) == pytest.approx(math.hypot(abs(f), abs(g)), abs=1e-13)

    def test_prior_rotations_then_annihilation(self):
        rng = np.random.default_rng(5)
        column = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        priors = [linalg.make_givens(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
                  for _ in range(2)]
        updated, rot = linalg.givens_qr_step(column, priors)
        assert abs(updated[-1]) <= 1e-14 * np.linalg.norm(column)
        # rotations preserve the norm
        assert np.linalg.norm(updated) == pytest.approx(np.linalg.norm(column), rel=1e-13)

    def test_qr_of_hessenberg_matches_normal_equations(self):
        # Running the rotation cascade down a Hessenberg matrix must produce a
        # triangular factor with R^H R = H^H H, matching the dense QR oracle.
        rng = np.random.default_rng(11)
        n = 6
        h = np.triu(rng.standard_normal((n + 1, n)) + 1j * rng.standard_normal((n + 1, n)), -1)
        rotations = []
        r_cols = []
        for j in range(n):
            col = h[: j + 2, j].copy()
            updated, rot = linalg.givens_qr_step(col, rotations)
            rotations.append(rot)
            r_cols.append(updated[:-1])
        r = np.zeros((n, n), dtype=complex)
        for j, col in enumerate(r_cols):
            r[: j + 1, j] = col
        np.testing.assert_allclose(r.conj().T @ r, h.conj().T @ h, atol=1e-12)

    def test_prior_count_validated(self):
        with pytest.raises(ValueError):
            linalg.givens_qr_step([1.0, 2.0, 3.0], [])


class TestRandomOrthogonal:
    def test_one_by_one(self):
        w = linalg.random_orthogonal(1, 0)
        assert abs(abs(w[0, 0]) - 1.0) < 1e-15

    def test_orthogonality_large(self):
        w = linalg.random_orthogonal(100, 7)
        assert linalg.spectral_norm(w.conj().T @ w - np.eye(100)) <= 1e-12

    def test_deterministic(self):
        a = linalg.random_orthogonal(40, 123)
        b = linalg.random_orthogonal(40, 123)
        assert np.array_equal(a, b)

    def test_unit_columns(self):
        w = linalg.random_orthogonal(60, 2)
        norms = np.linalg.norm(w, axis=0)
        np.testing.assert_allclose(norms, 1.0, atol=1e-13)


class TestHermitianEigen:
    def test_diagonal(self):
        eig = linalg.hermitian_eigen(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(eig.eigenvalues, [1.0, 2.0, 3.0], atol=1e-14)

    def test_exchange(self):
        eig = linalg.hermitian_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(eig.eigenvalues, [-1.0, 1.0], atol=1e-14)

    def test_square_root_spectrum(self):
        from dkrylov import symmetric_indefinite_problem
        p = symmetric_indefinite_problem(50, seed=3)
        eig = linalg.hermitian_eigen(p.a)
        expected = np.sort(np.concatenate([np.sqrt(np.arange(1, 51)),
                                           -np.sqrt(np.arange(1, 51))]))
        np.testing.assert_allclose(eig.eigenvalues, expected, atol=1e-10)

    def test_reconstruction_and_unitarity(self):
        rng = np.random.default_rng(17)
        for n in (5, 60, 200):
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            a = 0.5 * (g + g.conj().T)
            eig = linalg.hermitian_eigen(a)
            q, lam = eig.eigenvectors, eig.eigenvalues
            anorm = linalg.spectral_norm(a)
            assert linalg.spectral_norm(q.conj().T @ q - np.eye(n)) <= 1e-12
            assert linalg.spectral_norm((q * lam) @ q.conj().T - a) <= 1e-10 * anorm
            residual = linalg.spectral_norm(a @ q - q * lam)
            assert residual <= 1e-10 * anorm

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            linalg.hermitian_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSolveDense:
    def test_identity(self):
        b = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(linalg.solve_dense(np.eye(3), b), b)

    def test_diagonal(self):
        x = linalg.solve_dense(np.diag([2.0, 4.0]), [2.0, 8.0])
        np.testing.assert_allclose(x, [1.0, 2.0], atol=1e-15)

    def test_multiply_back(self):
        rng = np.random.default_rng(10)
        a = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10)) + 10 * np.eye(10)
        b = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        x = linalg.solve_dense(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-12 * np.linalg.norm(b) * np.linalg.cond(a)

    def test_singular_raises(self):
        a = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(linalg.SingularMatrixError):
            linalg.solve_dense(a, [1.0, 0.0])


class TestPrincipalAngles:
    def test_identical_spans(self):
        u = np.array([[1.0], [1.0], [1.0]])
        assert linalg.principal_angles(u, 2 * u)[0] == pytest.approx(0.0, abs=1e-8)

    def test_orthogonal_spans(self):
        u = np.array([[1.0], [0.0], [0.0]])
        v = np.array([[0.0], [1.0], [0.0]])
        assert linalg.principal_angles(u, v)[-1] == pytest.approx(np.pi / 2)
