"""Small dense linear algebra: Jacobi eigensolver, Takagi factors, LU det/inverse.

Everything here targets matrices of dimension <= ~64 (adjacency matrices of
preprocessed graphs, their doubled 2M x 2M encodings, feature covariances).
``det`` and ``lu_factor`` are batched over leading axes so the Torontonian can
evaluate thousands of small determinants in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYM_TOL = 1e-12
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
COND_LIMIT = 1e12


class ConvergenceError(RuntimeError):
    pass


class SingularMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class TakagiFactors:
    """``A = U @ diag(lambdas) @ U.T`` with unitary ``U`` and ``lambdas`` descending."""

    U: np.ndarray
    lambdas: np.ndarray


def _as_symmetric(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if not np.allclose(A, A.T, rtol=0.0, atol=SYM_TOL * scale):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (A + A.T)


def sym_eig(A, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``A @ V[:, i] == w[i] * V[:, i]``. Eigenvalues are
    ordered by descending magnitude, positive before negative on ties, so
    ``[[0, 1], [1, 0]]`` gives ``(1, -1)``.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||A||_F)``.
    """
    a = _as_symmetric(A).copy()
    d = a.shape[0]
    V = np.eye(d)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    def off_norm():
        return float(np.linalg.norm(a[~np.eye(d, dtype=bool)]))

    sweeps = 0
    while off_norm() >= threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                with np.errstate(over="ignore"):
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if not np.isfinite(theta):
                    # entry far below the diagonal gap; dropping it is exact to round-off
                    a[p, q] = a[q, p] = 0.0
                    continue
                with np.errstate(over="ignore"):
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq

    w = np.diag(a).copy()
    order = np.lexsort((-w, -np.abs(w)))
    return w[order], V[:, order]


def takagi(A) -> TakagiFactors:
    """Takagi factorization of a real symmetric matrix.

    Built on ``sym_eig``: ``lambda_i = |mu_i|`` and the column for a negative
    eigenvalue is multiplied by ``1j`` so that ``u u^T = -v v^T``.
    """
    w, V = sym_eig(A)
    U = V.astype(complex)
    U[:, w < 0] *= 1j
    return TakagiFactors(U=U, lambdas=np.abs(w))


def lu_factor(A):
    """Batched LU factorization with partial pivoting.

    ``A`` has shape ``(..., n, n)``. Returns ``(lu, perm, sign)`` where ``lu``
    packs unit-lower L below the diagonal and U on/above it, ``perm[..., k]``
    is the original row now at position ``k``, and ``sign`` is the permutation
    parity. Zero pivots are left in place (the matrix is singular).
    """
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    dtype = np.result_type(A.dtype, float)
    batch_shape = A.shape[:-2]
    n = A.shape[-1]
    lu = A.astype(dtype, copy=True).reshape(-1, n, n)
    B = lu.shape[0]
    rows = np.arange(B)
    perm = np.tile(np.arange(n), (B, 1))
    sign = np.ones(B)
    for k in range(n):
        piv = k + np.argmax(np.abs(lu[:, k:, k]), axis=1)
        swap = piv != k
        if swap.any():
            r, p = rows[swap], piv[swap]
            tmp = lu[r, k, :].copy()
            lu[r, k, :] = lu[r, p, :]
            lu[r, p, :] = tmp
            tmp = perm[r, k].copy()
            perm[r, k] = perm[r, p]
            perm[r, p] = tmp
            sign[swap] *= -1.0
        if k == n - 1:
            break
        pivot = lu[:, k, k]
        safe = np.where(pivot == 0, 1.0, pivot)
        f = lu[:, k + 1 :, k] / safe[:, None]
        f[pivot == 0] = 0.0
        lu[:, k + 1 :, k] = f
        lu[:, k + 1 :, k + 1 :] -= f[:, :, None] * lu[:, None, k, k + 1 :]
    return (
        lu.reshape(batch_shape + (n, n)),
        perm.reshape(batch_shape + (n,)),
        sign.reshape(batch_shape),
    )


def det(A):
    """Determinant via LU with partial pivoting; batched over leading axes."""
    A = np.asarray(A)
    if A.shape[-1] == 0:
        return np.ones(A.shape[:-2]) if A.ndim > 2 else 1.0
    lu, _, sign = lu_factor(A)
    d = sign * np.prod(np.diagonal(lu, axis1=-2, axis2=-1), axis=-1)
    return d if A.ndim > 2 else d.item()


def inverse(A) -> np.ndarray:
    """Inverse of a single well-conditioned square matrix.

    Raises ``SingularMatrixError`` on a zero pivot or when the 1-norm condition
    estimate exceeds ``COND_LIMIT``.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("inverse expects a single square matrix")
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.result_type(A.dtype, float))
    lu, perm, _ = lu_factor(A)
    diag = np.diagonal(lu)
    if np.any(diag == 0):
        raise SingularMatrixError("matrix is singular")
    # Solve L Y = P I, then U X = Y, column block at once.
    Y = np.eye(n, dtype=lu.dtype)[perm]
    for i in range(1, n):
        Y[i] -= lu[i, :i] @ Y[:i]
    X = Y
    for i in range(n - 1, -1, -1):
        X[i] = (X[i] - lu[i, i + 1 :] @ X[i + 1 :]) / lu[i, i]
    cond = np.linalg.norm(A, 1) * np.linalg.norm(X, 1)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(f"matrix is ill-conditioned (cond ~ {cond:.3g})")
    return X
