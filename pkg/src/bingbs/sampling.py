"""Exact chain-rule sampling of binary detection events.

Mode ``k`` is drawn from its conditional given the already drawn prefix,
``P(b_k = 0 | prefix) = p(prefix + [0]) / p(prefix)``, where every prefix
probability comes from the Torontonian of the marginal state on modes
``1..k``. Samples that share a prefix share the conditional, so each level
evaluates one Torontonian per distinct prefix and caches it.

Random numbers come from a Philox counter-based generator keyed by ``seed``.
Sample ``i`` consumes the doubles at positions ``[i*B, i*B + M)`` of the stream
with ``B = 4 * ceil(M / 4)``, so any single sample can be regenerated by
advancing the counter (see :func:`sample_uniforms`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import GaussianEncoding, reduce
from .probability import NU_MODES, binary_probability

CLAMP_TOL = 1e-10


class SamplingError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SampleBatch:
    samples: np.ndarray  # (S, modes) uint8
    seed: int
    S: int
    enc_id: int = 0

    def lines(self) -> list[str]:
        return ["".join(map(str, row)) for row in self.samples.tolist()]


def _block(M: int) -> int:
    return 4 * -(-M // 4)


def sample_uniforms(seed: int, S: int, M: int, start: int = 0) -> np.ndarray:
    """Uniforms for samples ``start .. start+S-1``, shape ``(S, M)``."""
    B = _block(M)
    bitgen = np.random.Philox(key=seed)
    if start:
        bitgen.advance(start * B // 4)
    return np.random.Generator(bitgen).random((S, B))[:, :M]


class PrefixTable:
    """Memoized prefix probabilities ``p(b_1..b_k)`` of one encoding."""

    def __init__(self, enc: GaussianEncoding):
        self.enc = enc
        self._marginals: dict[int, GaussianEncoding] = {}
        self._cache: dict[tuple, float] = {(0, 0): 1.0}

    def marginal(self, k: int) -> GaussianEncoding:
        if k not in self._marginals:
            self._marginals[k] = reduce(self.enc, range(k))
        return self._marginals[k]

    def prob(self, k: int, code: int) -> float:
        """Probability of the length-``k`` prefix whose bits (MSB first) form ``code``."""
        key = (k, code)
        if key not in self._cache:
            bits = [(code >> (k - 1 - j)) & 1 for j in range(k)]
            self._cache[key] = binary_probability(self.marginal(k), bits)
        return self._cache[key]

    def conditional_zero(self, k: int, code: int) -> float:
        """``P(b_{k+1} = 0 | prefix)`` for a length-``k`` prefix."""
        parent = self.prob(k, code)
        if parent <= 0.0:
            raise SamplingError(f"prefix {code:0{k}b} has zero probability")
        p0 = self.prob(k + 1, code << 1)
        q = p0 / parent
        if q < -CLAMP_TOL or q > 1 + CLAMP_TOL:
            raise SamplingError(f"conditional {q!r} outside [0, 1] at mode {k + 1}")
        return min(max(q, 0.0), 1.0)


def sample_binary(
    enc: GaussianEncoding,
    S: int,
    seed: int,
    n_modes: int | None = None,
    table: PrefixTable | None = None,
) -> SampleBatch:
    """Draw ``S`` binary events with probabilities exactly ``binary_probability``.

    ``n_modes`` stops after the first ``n_modes`` modes; the result equals the
    first columns of the full-length batch for the same seed.
    """
    if S < 1:
        raise ValueError("S must be >= 1")
    M = enc.M
    K = M if n_modes is None else n_modes
    if not 1 <= K <= M:
        raise ValueError(f"n_modes must lie in [1, {M}]")
    table = table or PrefixTable(enc)
    U = sample_uniforms(seed, S, M)
    codes = np.zeros(S, dtype=np.int64)
    out = np.zeros((S, K), dtype=np.uint8)
    for k in range(K):
        uniq, inv = np.unique(codes, return_inverse=True)
        q0 = np.array([table.conditional_zero(k, int(c)) for c in uniq])
        bit = (U[:, k] >= q0[inv]).astype(np.int64)
        out[:, k] = bit
        codes = (codes << 1) | bit
    return SampleBatch(samples=out, seed=seed, S=S, enc_id=enc.graph_id)


def empirical_distribution(batch: SampleBatch, grouping: str = "mu", max_clicks: int | None = None) -> np.ndarray:
    """Coarse-grained frequencies of a batch.

    ``"mu"``: ``f_i = S_i / S`` for ``i = 0..max_clicks``, where ``S_i`` counts
    samples with exactly ``i`` clicks; samples above ``max_clicks`` land in no
    bin. ``"nu"``: frequency of each first-five-mode pattern, MSB = mode 1.
    """
    X = np.asarray(batch.samples)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    S = X.shape[0]
    if grouping == "mu":
        N = X.shape[1] if max_clicks is None else max_clicks
        counts = np.bincount(X.sum(axis=1), minlength=X.shape[1] + 1)
        return counts[: N + 1] / S
    if grouping == "nu":
        if X.shape[1] < NU_MODES:
            raise ValueError(f"nu grouping needs at least {NU_MODES} modes")
        weights = 1 << np.arange(NU_MODES - 1, -1, -1)
        idx = X[:, :NU_MODES].astype(np.int64) @ weights
        return np.bincount(idx, minlength=1 << NU_MODES) / S
    raise ValueError(f"unknown grouping {grouping!r}")
