import numpy as np
import pytest

from latentwalk.linalg import jacobi_eigh, sym_matrix_sqrt


def random_psd(rng, n):
    a = rng.standard_normal((n, n))
    return a.T @ a


class TestJacobi:
    def test_diagonal_passthrough(self):
        vals, vecs = jacobi_eigh(np.diag([4.0, 9.0, 1.0]))
        assert sorted(vals) == pytest.approx([1.0, 4.0, 9.0])
        assert np.allclose(np.abs(vecs), np.eye(3))

    def test_matches_library_eigensolver(self, rng):
        # independent oracle: numpy's LAPACK-backed eigh
        for n in (2, 4, 6, 9):
            m = random_psd(rng, n)
            vals, vecs = jacobi_eigh(m)
            ref = np.sort(np.linalg.eigvalsh(m))
            assert np.allclose(np.sort(vals), ref, rtol=1e-10, atol=1e-10)
            # reconstruction and orthonormality
            assert np.allclose(vecs @ np.diag(vals) @ vecs.T, m, atol=1e-9)
            assert np.allclose(vecs.T @ vecs, np.eye(n), atol=1e-10)

    def test_indefinite_matrix(self, rng):
        m = rng.standard_normal((5, 5))
        m = 0.5 * (m + m.T)
        vals, vecs = jacobi_eigh(m)
        assert np.allclose(np.sort(vals), np.sort(np.linalg.eigvalsh(m)), atol=1e-10)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError, match="square"):
            jacobi_eigh(np.ones((2, 3)))


class TestSymMatrixSqrt:
    def test_diagonal(self):
        s = sym_matrix_sqrt(np.diag([4.0, 9.0]))
        assert np.allclose(s, np.diag([2.0, 3.0]), atol=1e-12)

    def test_identity(self):
        assert np.allclose(sym_matrix_sqrt(np.eye(4)), np.eye(4), atol=1e-12)

    def test_reconstruction_random_psd(self, rng):
        for _ in range(10):
            m = random_psd(rng, 6)
            s = sym_matrix_sqrt(m)
            assert np.max(np.abs(s @ s - m)) < 1e-6
            assert np.array_equal(s, s.T)
            assert np.min(np.linalg.eigvalsh(s)) > -1e-8

    def test_tiny_negative_clamped(self):
        m = np.diag([1.0, -5e-9])
        s = sym_matrix_sqrt(m)
        assert s[1, 1] == 0.0

    def test_strongly_negative_rejected(self):
        with pytest.raises(ValueError, match="negative eigenvalue"):
            sym_matrix_sqrt(np.diag([1.0, -0.5]))

    def test_nonsymmetric_rejected(self):
        m = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError, match="not symmetric"):
            sym_matrix_sqrt(m)
