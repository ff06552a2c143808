"""Exact detection probabilities: PNR (Hafnian), binary (Torontonian), mu/nu groupings.

Binary patterns are indexed with the leftmost mode as the most significant bit,
so pattern ``(b_1, ..., b_M)`` sits at ``sum_k b_k 2^(M-k)``; every exact
enumeration walks patterns in that (lexicographic) order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .encoding import GaussianEncoding, reduce
from .matfun import (
    hafnian_repeated,
    induce_binary,
    popcounts,
    torontonian,
    vacuum_weight_sums,
    vacuum_weights,
)

PNR_MAX_PHOTONS = 40
MU_TERM_BUDGET = 10**8
NU_MODES = 5
PROB_TOL = 1e-8


def pattern_bits(index: int, M: int) -> tuple:
    return tuple((index >> (M - 1 - k)) & 1 for k in range(M))


def pattern_index(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def all_patterns(M: int) -> np.ndarray:
    """All 2^M binary patterns in lexicographic order, shape ``(2^M, M)``."""
    idx = np.arange(1 << M)
    return ((idx[:, None] >> (M - 1 - np.arange(M))) & 1).astype(np.int8)


def _clip_probability(p: float) -> float:
    if p < -PROB_TOL or p > 1 + PROB_TOL:
        raise ArithmeticError(f"probability {p:.3g} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def pnr_probability(enc: GaussianEncoding, n, max_photons: int = PNR_MAX_PHOTONS) -> float:
    """``Haf((cA)_n)^2 / (n! sqrt(det Q))``; zero for an odd photon total."""
    if not enc.is_full:
        raise ValueError("PNR probabilities need a full (pure) encoding")
    n = [int(x) for x in n]
    if len(n) != enc.M or min(n, default=0) < 0:
        raise ValueError(f"PNR event must have {enc.M} nonnegative counts")
    total = sum(n)
    if total % 2:
        return 0.0
    if total > max_photons:
        raise ValueError(f"{total} photons exceeds the enumeration cap of {max_photons}")
    haf = hafnian_repeated(enc.c * enc.A, n)
    nfact = math.prod(math.factorial(k) for k in n)
    return haf * haf / (nfact * enc.sqrt_det_Q)


def binary_probability(enc: GaussianEncoding, b) -> float:
    """``Tor(O_b) / sqrt(det Q)`` with ``O_b`` the clicked-mode block of ``O``."""
    b = np.asarray(b, dtype=int)
    if b.shape != (enc.M,):
        raise ValueError(f"pattern length {b.size} != {enc.M} modes")
    return _clip_probability(torontonian(induce_binary(enc.O, b)) / enc.sqrt_det_Q)


def binary_distribution(enc: GaussianEncoding, method: str = "torontonian") -> np.ndarray:
    """Full distribution over the 2^M binary patterns, lexicographic order.

    ``"torontonian"`` evaluates each pattern independently. ``"mobius"`` first
    computes the no-click probability of every complement set, ``w(Z) =
    1/sqrt(det Q det(I - O_Z))``, then inverts the subset-sum relation with a
    Moebius transform; it needs 2^M determinants instead of 3^M.
    """
    M = enc.M
    if method == "torontonian":
        return np.array([binary_probability(enc, b) for b in all_patterns(M)])
    if method != "mobius":
        raise ValueError(f"unknown method {method!r}")
    # bit k of a subset mask <-> mode k; converted to pattern order at the end
    f = vacuum_weights(enc.O, M) / enc.sqrt_det_Q
    for k in range(M):
        bit = 1 << k
        hi = np.arange(1 << M)
        hi = hi[(hi & bit) != 0]
        f[hi] -= f[hi ^ bit]
    masks = np.arange(1 << M)
    rev = np.zeros(1 << M, dtype=np.int64)
    for k in range(M):
        rev |= ((masks >> k) & 1) << (M - 1 - k)
    out = np.empty(1 << M)
    out[rev] = f
    if np.any(out < -PROB_TOL):
        raise ArithmeticError("negative probability in Moebius inversion")
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    partial_sum: float
    gap: float
    terms: int


def pnr_events_for(b, cutoff: int):
    """PNR events with positive counts exactly on the clicked modes of ``b`` and total <= cutoff."""
    b = [int(x) for x in b]
    clicked = [i for i, x in enumerate(b) if x]
    k = len(clicked)
    if k == 0:
        yield tuple(0 for _ in b)
        return
    for total in range(k, cutoff + 1):
        # compositions of total into k positive parts
        for cuts in itertools.combinations(range(1, total), k - 1):
            parts = [e - s for s, e in zip((0,) + cuts, cuts + (total,))]
            n = [0] * len(b)
            for i, p in zip(clicked, parts):
                n[i] = p
            yield tuple(n)


def verify_binary_pnr_identity(enc: GaussianEncoding, b, photon_cutoff: int) -> IdentityCheck:
    """Compare the Torontonian probability of ``b`` with its truncated Hafnian series."""
    if photon_cutoff > PNR_MAX_PHOTONS:
        raise ValueError(f"photon cutoff capped at {PNR_MAX_PHOTONS}")
    lhs = binary_probability(enc, b)
    terms = [pnr_probability(enc, n) for n in pnr_events_for(b, photon_cutoff) if sum(n) % 2 == 0]
    partial = math.fsum(terms)
    return IdentityCheck(lhs=lhs, partial_sum=partial, gap=lhs - partial, terms=len(terms))


def mu_term_count(M: int, max_clicks: int) -> int:
    return sum(math.comb(M, i) * 2**i for i in range(max_clicks + 1))


def exact_mu_distribution(enc: GaussianEncoding, max_clicks: int, method: str = "patterns") -> np.ndarray:
    """``f_i = P(exactly i clicks)`` for ``i = 0..max_clicks``; not renormalized.

    ``"patterns"`` sums ``binary_probability`` over every pattern with ``i``
    clicks. ``"subsets"`` regroups the same inclusion-exclusion sum by the
    Torontonian subset ``Z``: ``f_i = sum_j (-1)^(i-j) C(M-j, i-j) W_j`` where
    ``W_j`` adds ``w(Z)`` over ``|Z| = j``. Both agree to round-off.
    """
    M = enc.M
    if not 0 <= max_clicks <= M:
        raise ValueError(f"max_clicks must lie in [0, {M}]")
    if method == "patterns":
        if mu_term_count(M, max_clicks) > MU_TERM_BUDGET:
            raise ValueError("combinatorial budget exceeded for pattern enumeration")
        f = np.zeros(max_clicks + 1)
        for i in range(max_clicks + 1):
            acc = []
            for clicked in itertools.combinations(range(M), i):
                b = np.zeros(M, dtype=int)
                b[list(clicked)] = 1
                acc.append(binary_probability(enc, b))
            f[i] = math.fsum(acc)
        return f
    if method != "subsets":
        raise ValueError(f"unknown method {method!r}")
    W = [w / enc.sqrt_det_Q for w in vacuum_weight_sums(enc.O, M, max_clicks)]
    f = np.array(
        [
            math.fsum((-1) ** (i - j) * math.comb(M - j, i - j) * W[j] for j in range(i + 1))
            for i in range(max_clicks + 1)
        ]
    )
    return np.clip(f, 0.0, 1.0)


def exact_nu_distribution(enc: GaussianEncoding, n_modes: int = NU_MODES) -> np.ndarray:
    """Marginal distribution of the first ``n_modes`` modes (32 entries for 5 modes)."""
    if enc.M < n_modes:
        raise ValueError(f"nu features need at least {n_modes} modes, got {enc.M}")
    marg = reduce(enc, range(n_modes))
    return np.array([binary_probability(marg, b) for b in all_patterns(n_modes)])


def click_counts(M: int) -> np.ndarray:
    """Click count of each pattern in lexicographic order."""
    return popcounts(M)
