"""Symmetric eigendecomposition and PSD matrix square root, self-contained.

The Frechet feature distance needs the square root of a symmetric PSD
matrix; it is computed here through a cyclic Jacobi eigendecomposition so the
metric stack carries no linear-algebra dependency beyond numpy arrays. Tests
cross-check against library eigensolvers as the independent oracle.
"""

from __future__ import annotations

import numpy as np

__all__ = ["jacobi_eigh", "sym_matrix_sqrt"]


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 64):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps all upper-triangle pivots in row order, zeroing each with a Givens
    rotation, until the off-diagonal Frobenius mass drops below
    ``tol * ||A||_F``. Returns ``(eigenvalues, eigenvectors)`` with
    eigenvectors in columns, unsorted.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v

    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return np.zeros(n), v
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a[offdiag]))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-20 * norm:
                    continue
                # rotation angle zeroing a[p, q]; small-angle branch avoids
                # overflow of theta^2 when the pivot is tiny
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-36 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = a[:, p].copy()
                rot_q = a[:, q].copy()
                a[:, p] = c * rot_p - s * rot_q
                a[:, q] = s * rot_p + c * rot_q
                rot_p = a[p, :].copy()
                rot_q = a[q, :].copy()
                a[p, :] = c * rot_p - s * rot_q
                a[q, :] = s * rot_p + c * rot_q
                rot_p = v[:, p].copy()
                rot_q = v[:, q].copy()
                v[:, p] = c * rot_p - s * rot_q
                v[:, q] = s * rot_p + c * rot_q
    else:
        raise RuntimeError(f"Jacobi sweep did not converge in {max_sweeps} sweeps")
    return a.diagonal().copy(), v


def sym_matrix_sqrt(matrix: np.ndarray, sym_tol: float = 1e-6,
                    neg_tol: float = 1e-8) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix.

    The input must be symmetric to within ``sym_tol``; eigenvalues in
    ``[-neg_tol, 0)`` are round-off and clamp to zero, anything more negative
    is rejected. The result is exactly symmetric.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > sym_tol:
        raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym:.3g})")
    sym = 0.5 * (m + m.T)
    eigvals, eigvecs = jacobi_eigh(sym)
    if np.any(eigvals < -neg_tol):
        worst = float(eigvals.min())
        raise ValueError(f"matrix has a strongly negative eigenvalue ({worst:.3g})")
    roots = np.sqrt(np.maximum(eigvals, 0.0))
    s = (eigvecs * roots) @ eigvecs.T
    return 0.5 * (s + s.T)
