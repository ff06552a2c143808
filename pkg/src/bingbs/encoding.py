"""Encode a graph as a pure Gaussian state with a target mean photon number.

Convention: covariance in the complex (a, a^dagger) basis with vacuum ``I/2``,
so ``Sigma = Q - I/2``. The doubled adjacency ``A_tilde = c (A + A)`` (direct
sum) always includes the rescaling constant ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graphio import Graph
from .linalg import det, inverse, takagi
from .matfun import pair_indices

BISECT_TOL = 1e-9
BISECT_MAX_ITER = 200
UPPER_MARGIN = 1e-12


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianEncoding:
    """Simulated device state.

    Full encodings carry the graph data (``A``, ``c``, ``A_tilde``, ``r``,
    ``lambdas``). Encodings returned by :func:`reduce` describe a marginal
    (generally mixed) state and only carry ``Q``, ``Sigma`` and ``O``; their
    ``modes`` lists the original 0-based mode indices they keep.
    """

    Q: np.ndarray
    Sigma: np.ndarray
    O: np.ndarray
    nbar: float
    modes: tuple
    A: np.ndarray | None = None
    c: float | None = None
    A_tilde: np.ndarray | None = None
    r: np.ndarray | None = None
    lambdas: np.ndarray | None = None
    graph_id: int = 0

    @property
    def M(self) -> int:
        return self.Q.shape[0] // 2

    @cached_property
    def sqrt_det_Q(self) -> float:
        return float(np.sqrt(det(self.Q)))

    @property
    def vacuum_probability(self) -> float:
        return 1.0 / self.sqrt_det_Q

    @property
    def is_full(self) -> bool:
        return self.A is not None


def x_matrix(M: int) -> np.ndarray:
    """Block swap ``[[0, I], [I, 0]]`` of size 2M."""
    X = np.zeros((2 * M, 2 * M))
    X[:M, M:] = np.eye(M)
    X[M:, :M] = np.eye(M)
    return X


def mean_photon_number(lambdas, c: float) -> float:
    x = (c * np.asarray(lambdas, dtype=float)) ** 2
    return float(np.sum(x / (1.0 - x)))


def choose_c(lambdas, nbar_target: float) -> float:
    """Bisect ``c`` on ``(0, 1/lambda_max)`` until the mean photon number hits the target."""
    lambdas = np.asarray(lambdas, dtype=float)
    if nbar_target <= 0:
        raise EncodingError("target mean photon number must be positive")
    lam_max = float(np.max(lambdas, initial=0.0))
    if lam_max <= 0:
        raise EncodingError("empty spectrum: no rescaling reaches a positive mean photon number")
    lo, hi = 0.0, (1.0 - UPPER_MARGIN) / lam_max
    if mean_photon_number(lambdas, hi) < nbar_target:
        raise EncodingError(f"mean photon number {nbar_target} unreachable below 1/lambda_max")
    c = 0.5 * (lo + hi)
    for _ in range(BISECT_MAX_ITER):
        c = 0.5 * (lo + hi)
        n = mean_photon_number(lambdas, c)
        if abs(n - nbar_target) < BISECT_TOL:
            break
        if n < nbar_target:
            lo = c
        else:
            hi = c
    return c


def encode(g: Graph | np.ndarray, nbar_target: float = 5.0) -> GaussianEncoding:
    A = g.adjacency if isinstance(g, Graph) else np.asarray(g, dtype=float)
    graph_id = g.id if isinstance(g, Graph) else 0
    M = A.shape[0]
    lambdas = takagi(A).lambdas
    c = choose_c(lambdas, nbar_target)
    A_tilde = c * np.block([[A, np.zeros((M, M))], [np.zeros((M, M)), A]])
    O = x_matrix(M) @ A_tilde
    Q = inverse(np.eye(2 * M) - O)
    Q = 0.5 * (Q + Q.T)
    r = np.arctanh(c * lambdas)
    return GaussianEncoding(
        Q=Q,
        Sigma=Q - np.eye(2 * M) / 2,
        O=O,
        nbar=float(np.sum(np.sinh(r) ** 2)),
        modes=tuple(range(M)),
        A=A,
        c=c,
        A_tilde=A_tilde,
        r=r,
        lambdas=lambdas,
        graph_id=graph_id,
    )


def vacuum_encoding(M: int, graph_id: int = 0) -> GaussianEncoding:
    """The unsqueezed ``M``-mode state; what an edgeless graph leaves the device in."""
    I = np.eye(2 * M)
    return GaussianEncoding(
        Q=I,
        Sigma=I / 2,
        O=np.zeros((2 * M, 2 * M)),
        nbar=0.0,
        modes=tuple(range(M)),
        graph_id=graph_id,
    )


def reduce(enc: GaussianEncoding, modes) -> GaussianEncoding:
    """Marginal state on an ordered subset of modes (0-based indices).

    ``Sigma_s`` keeps rows/columns ``{i, i + M}``; ``Q_s = Sigma_s + I/2`` and
    ``O_s = I - Q_s^{-1}``.
    """
    modes = tuple(int(m) for m in modes)
    if not modes:
        raise EncodingError("cannot reduce to an empty set of modes")
    if len(set(modes)) != len(modes) or min(modes) < 0 or max(modes) >= enc.M:
        raise EncodingError(f"invalid mode subset {modes} for {enc.M} modes")
    k = len(modes)
    if modes == tuple(range(enc.M)):
        return enc
    idx = pair_indices(modes, enc.M)
    Sigma = enc.Sigma[np.ix_(idx, idx)]
    Q = Sigma + np.eye(2 * k) / 2
    O = np.eye(2 * k) - inverse(Q)
    diag = np.diag(Q)
    nbar = float(np.sum(0.5 * (diag[:k] + diag[k:]) - 1.0))
    return GaussianEncoding(
        Q=Q,
        Sigma=Sigma,
        O=O,
        nbar=nbar,
        modes=tuple(enc.modes[m] for m in modes),
        graph_id=enc.graph_id,
    )


def encoding_to_dict(enc: GaussianEncoding) -> dict:
    out = {
        "graph_id": enc.graph_id,
        "modes": list(enc.modes),
        "nbar": enc.nbar,
        "Q": enc.Q.tolist(),
        "Sigma": enc.Sigma.tolist(),
        "O": enc.O.tolist(),
    }
    if enc.is_full:
        out.update(c=enc.c, r=enc.r.tolist(), lambdas=enc.lambdas.tolist())
    return out
