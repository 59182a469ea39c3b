"""Symmetric-matrix kernels used by the SPD manifold.

The eigensolver is a batched two-sided cyclic Jacobi iteration. Jacobi is
used instead of LAPACK because it resolves the eigenvalues of graded
positive definite matrices ``E H E`` (``E`` diagonal) to high *relative*
accuracy, which the far-ray distance computations in :mod:`.spd` rely on.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["jacobi_eigh", "sym_fn", "sym", "sqrt_and_inv_sqrt"]


def sym(a: np.ndarray) -> np.ndarray:
    """Symmetric part of a batch of square matrices."""
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigendecomposition of symmetric matrices by cyclic Jacobi sweeps.

    Parameters
    ----------
    a : array_like, shape (..., n, n)
        Symmetric matrices. Only the symmetric part is used. ``longdouble``
        input is processed in extended precision.
    tol : float
        A pair ``(p, q)`` is considered annihilated once
        ``|a_pq| <= tol * sqrt(|a_pp a_qq|)``.
    max_sweeps : int
        Hard cap on the number of full sweeps.

    Returns
    -------
    w : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    v : ndarray, shape (..., n, n)
        Orthonormal eigenvectors stored column-wise, ``a = v diag(w) v^T``.
    """
    a = np.array(a)
    # extended precision inputs stay extended (used for graded far-ray spectra)
    a = sym(a.astype(np.result_type(a.dtype, np.float64)))
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n, dtype=a.dtype), a.shape).copy()
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for _ in range(max_sweeps):
        done = True
        for p, q in pairs:
            apq = a[..., p, q]
            app = a[..., p, p]
            aqq = a[..., q, q]
            # product of roots: app * aqq overflows for strongly graded input
            active = np.abs(apq) > tol * np.sqrt(np.abs(app)) * np.sqrt(np.abs(aqq))
            if not np.any(active):
                continue
            done = False
            safe = np.where(active, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            sgn = np.where(theta >= 0.0, 1.0, -1.0)
            t = sgn / (np.abs(theta) + np.hypot(1.0, theta))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            new_pp = app - t * apq
            new_qq = aqq + t * apq

            cc = c[..., None]
            ss = s[..., None]
            col_p = a[..., :, p].copy()
            col_q = a[..., :, q].copy()
            a[..., :, p] = cc * col_p - ss * col_q
            a[..., :, q] = ss * col_p + cc * col_q
            row_p = a[..., p, :].copy()
            row_q = a[..., q, :].copy()
            a[..., p, :] = cc * row_p - ss * row_q
            a[..., q, :] = ss * row_p + cc * row_q
            a[..., p, p] = new_pp
            a[..., q, q] = new_qq
            a[..., p, q] = 0.0
            a[..., q, p] = 0.0

            vp = v[..., :, p].copy()
            vq = v[..., :, q].copy()
            v[..., :, p] = cc * vp - ss * vq
            v[..., :, q] = ss * vp + cc * vq
        if done:
            break

    w = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def sym_fn(x, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar map to a symmetric matrix through its eigenbasis.

    ``sym_fn(x, np.log)`` is the matrix logarithm, ``sym_fn(x, np.exp)`` the
    matrix exponential and so on. Raises ``ValueError`` when ``fn`` is not
    finite at some eigenvalue (for instance the log of a nonpositive one).
    """
    w, v = jacobi_eigh(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        fw = np.asarray(fn(w), dtype=float)
    if not np.all(np.isfinite(fw)):
        raise ValueError("function is undefined at an eigenvalue of the matrix")
    return sym((v * fw[..., None, :]) @ np.swapaxes(v, -1, -2))


def sqrt_and_inv_sqrt(x):
    """Return ``(x^{1/2}, x^{-1/2})`` from a single eigendecomposition."""
    w, v = jacobi_eigh(x)
    if np.any(w <= 0.0):
        raise ValueError("matrix is not positive definite")
    vt = np.swapaxes(v, -1, -2)
    r = np.sqrt(w)
    return sym((v * r[..., None, :]) @ vt), sym((v / r[..., None, :]) @ vt)
