"""Hafnian and Torontonian matrix functions plus the two submatrix-induction rules."""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .linalg import SingularMatrixError, det

HAFNIAN_MAX_DIM = 16
TORONTONIAN_MAX_MODES = 26
NEG_DET_TOL = 1e-12
_CHUNK = 4096


def hafnian(A) -> float:
    """Sum over perfect matchings of ``prod A[u, v]``.

    The lowest unmatched index is always paired first and sub-results are
    memoized on the bitmask of unmatched indices, so each of the (2k-1)!!
    matchings is counted exactly once. Dimension 0 gives 1.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError("hafnian needs a square matrix")
    if n % 2:
        raise ValueError(f"hafnian needs an even dimension, got {n}")
    if n > HAFNIAN_MAX_DIM:
        raise ValueError(f"hafnian enumeration capped at dimension {HAFNIAN_MAX_DIM}")
    a = A.tolist()

    @lru_cache(maxsize=None)
    def haf(mask: int):
        if mask == 0:
            return 1.0
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        total = 0.0
        m = rest
        while m:
            j = (m & -m).bit_length() - 1
            m &= m - 1
            if a[i][j] != 0:
                total += a[i][j] * haf(rest & ~(1 << j))
        return total

    return haf((1 << n) - 1)


def hafnian_repeated(A, n) -> float:
    """``hafnian(induce_pnr(A, n))`` without materializing the repeated matrix.

    Copies of a repeated row are interchangeable, so the recursion runs over
    count vectors: the first remaining copy of mode ``i`` pairs with one of the
    ``n_j`` copies of mode ``j`` (``n_i - 1`` copies when ``j == i``).
    """
    A = np.asarray(A)
    counts = tuple(int(x) for x in n)
    if len(counts) != A.shape[0]:
        raise ValueError(f"pattern length {len(counts)} != matrix size {A.shape[0]}")
    if any(x < 0 for x in counts):
        raise ValueError("photon counts must be nonnegative")
    if sum(counts) % 2:
        return 0.0
    a = A.tolist()
    M = len(counts)

    @lru_cache(maxsize=None)
    def haf(c):
        for i in range(M):
            if c[i]:
                break
        else:
            return 1.0
        total = 0.0
        for j in range(i, M):
            mult = c[j] - 1 if j == i else c[j]
            if mult <= 0 or a[i][j] == 0:
                continue
            nxt = list(c)
            nxt[i] -= 1
            nxt[j] -= 1
            total += mult * a[i][j] * haf(tuple(nxt))
        return total

    return haf(counts)


def induce_pnr(A, n) -> np.ndarray:
    """Delete row/column ``i`` when ``n_i = 0``, repeat it ``n_i`` times otherwise."""
    A = np.asarray(A)
    n = np.asarray(n, dtype=int)
    if n.shape != (A.shape[0],):
        raise ValueError(f"pattern length {n.size} != matrix size {A.shape[0]}")
    if np.any(n < 0):
        raise ValueError("photon counts must be nonnegative")
    idx = np.repeat(np.arange(A.shape[0]), n)
    return A[np.ix_(idx, idx)]


def pair_indices(modes, M: int) -> np.ndarray:
    """Indices ``[modes..., modes + M...]`` of the doubled 2M x 2M layout."""
    modes = np.asarray(modes, dtype=int)
    return np.concatenate([modes, modes + M])


def induce_binary(X, b) -> np.ndarray:
    """Keep row/column pairs ``(i, i+M)`` of clicked modes, drop the rest."""
    X = np.asarray(X)
    b = np.asarray(b, dtype=int)
    M = X.shape[0] // 2
    if X.shape[0] != 2 * M or b.shape != (M,):
        raise ValueError(f"pattern length {b.size} does not match a {X.shape[0]}x{X.shape[0]} block matrix")
    if np.any((b != 0) & (b != 1)):
        raise ValueError("binary pattern entries must be 0 or 1")
    idx = pair_indices(np.flatnonzero(b), M)
    return X[np.ix_(idx, idx)]


def _iter_subset_dets(O: np.ndarray, N: int, sizes):
    """Yield ``(combos, det(I - O_Z))`` chunks for subsets ``Z`` of the given sizes."""
    for k in sizes:
        eye = np.eye(2 * k)
        it = itertools.combinations(range(N), k)
        while True:
            chunk = list(itertools.islice(it, _CHUNK))
            if not chunk:
                break
            combos = np.array(chunk, dtype=int)
            idx = np.concatenate([combos, combos + N], axis=1)
            sub = O[idx[:, :, None], idx[:, None, :]]
            yield combos, np.real(det(eye - sub))


def _subset_dets(O: np.ndarray, N: int) -> np.ndarray:
    """``det(I - O_Z)`` for every subset ``Z`` of ``range(N)``, indexed by bitmask."""
    out = np.empty(1 << N)
    out[0] = 1.0
    for combos, dets in _iter_subset_dets(O, N, range(1, N + 1)):
        out[np.sum(1 << combos, axis=1)] = dets
    return out


def popcounts(N: int) -> np.ndarray:
    """Number of set bits of every mask in ``range(2**N)``."""
    masks = np.arange(1 << N)
    sizes = np.zeros(1 << N, dtype=np.int64)
    for k in range(N):
        sizes += (masks >> k) & 1
    return sizes


def _inv_sqrt(dets: np.ndarray) -> np.ndarray:
    bad = dets < -NEG_DET_TOL
    if np.any(bad):
        raise ValueError(f"negative determinant {dets[bad].min():.3g} under square root")
    if np.any(dets <= 0):
        # a clamped round-off negative is still a zero determinant
        raise SingularMatrixError("I - O_Z is singular")
    return 1.0 / np.sqrt(dets)


def torontonian(O) -> float:
    """Torontonian of a 2N x 2N matrix in ``[clicked..., clicked + N...]`` layout.

    ``sum over Z subset of [N] of (-1)^(N - |Z|) / sqrt(det(I - O_Z))``. The
    sign runs on the complement size, so the full set enters with ``+1`` and the
    result is nonnegative for physical inputs at every ``N``. Terms are combined
    with ``math.fsum``, which makes the value independent of summation order.
    """
    O = np.asarray(O)
    dim = O.shape[0]
    if O.ndim != 2 or O.shape[1] != dim or dim % 2:
        raise ValueError(f"torontonian needs an even square matrix, got {O.shape}")
    N = dim // 2
    if N == 0:
        return 1.0
    if N > TORONTONIAN_MAX_MODES:
        raise ValueError(f"torontonian capped at {TORONTONIAN_MAX_MODES} clicked modes")
    terms = _inv_sqrt(_subset_dets(O, N))
    sizes = popcounts(N)
    signs = np.where((N - sizes) % 2, -1.0, 1.0)
    return math.fsum((signs * terms).tolist())


def vacuum_weights(O, N: int) -> np.ndarray:
    """``1/sqrt(det(I - O_Z))`` for all subsets ``Z`` of ``range(N)``, by bitmask."""
    return _inv_sqrt(_subset_dets(np.asarray(O), N))


def vacuum_weight_sums(O, N: int, max_size: int) -> list:
    """``sum over |Z| = j of 1/sqrt(det(I - O_Z))`` for ``j = 0..max_size``."""
    O = np.asarray(O)
    sums = [1.0]
    for k in range(1, max_size + 1):
        parts = []
        for _, dets in _iter_subset_dets(O, N, [k]):
            parts.extend(_inv_sqrt(dets).tolist())
        sums.append(math.fsum(parts))
    return sums
