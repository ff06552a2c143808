"""Outcome counting and sample-complexity bounds.

All counts are exact Python integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache


def sample_size(omega: int, epsilon: float, delta: float) -> int:
    """Samples needed so the empirical distribution over ``omega`` outcomes is
    within L1 distance ``epsilon`` with probability at least ``1 - delta``:
    ``ceil(2 (ln 2 * omega + ln(1/delta)) / epsilon^2)``.
    """
    if omega < 1:
        raise ValueError("omega must be >= 1")
    if not 0 < epsilon < 2:
        raise ValueError("epsilon must lie in (0, 2)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return max(1, math.ceil(2 * (math.log(2) * omega + math.log(1 / delta)) / epsilon**2))


def count_weak_compositions(n: int, M: int) -> int:
    """Ordered ``M``-tuples of nonnegative integers summing to ``n``."""
    if n < 0 or M < 1:
        raise ValueError("need n >= 0 and M >= 1")
    return math.comb(n + M - 1, M - 1)


@lru_cache(maxsize=None)
def count_partitions_exact(n: int, parts_max: int) -> int:
    """Partitions of ``n`` into at most ``parts_max`` parts (order ignored).

    Equivalently, PNR orbits of ``n`` photons over ``parts_max`` modes.
    """
    if n < 0 or parts_max < 0:
        raise ValueError("need n >= 0 and parts_max >= 0")
    k = min(parts_max, n)
    # p[m] = partitions of m into parts of size <= j, built up over j (conjugate view)
    p = [1] + [0] * n
    for j in range(1, k + 1):
        for m in range(j, n + 1):
            p[m] += p[m - j]
    return p[n]


def count_partitions_into(n: int, M: int) -> int:
    """Partitions of ``n`` into exactly ``M`` positive parts."""
    if M == 0:
        return int(n == 0)
    if n < M:
        return 0
    return count_partitions_exact(n - M, M)


def partitions_asymptotic(n: int, M: int) -> float:
    """``exp(pi sqrt(2(n-M)/3)) / (4 sqrt(3) (n-M))`` for ``M <= n <= 2M``."""
    if not M <= n <= 2 * M or n - M <= 1:
        raise ValueError("asymptotic form only valid for M <= n <= 2M with n - M > 1")
    k = n - M
    return math.exp(math.pi * math.sqrt(2 * k / 3)) / (4 * math.sqrt(3) * k)


def count_binary_events(M: int) -> int:
    if M < 0:
        raise ValueError("M must be >= 0")
    by_clicks = sum(math.comb(M, i) for i in range(M + 1))
    if by_clicks != 2**M:
        raise AssertionError("binomial sum disagrees with 2^M")
    return by_clicks


@dataclass
class LemmaReport:
    name: str
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_lemma_b(M_range) -> LemmaReport:
    """``C(n+M-1, M-1) >= floor(sqrt M)^floor(sqrt M)`` at ``n = floor(sqrt M)``."""
    report = LemmaReport("weak compositions outgrow floor(sqrt M)^floor(sqrt M)")
    for M in M_range:
        if M < 4:
            raise ValueError("lemma check needs M >= 4")
        n = math.isqrt(M)
        lhs = count_weak_compositions(n, M)
        if lhs < n**n:
            report.violations.append((M, lhs, n**n))
        report.checked += 1
    return report


def verify_lemma_c(k: int, n_range) -> LemmaReport:
    """``C(n, k) / n^k`` tends to ``1/k!``.

    Checks the ratio is within 1% of ``1/k!`` at the largest ``n`` and
    nondecreasing over ``n >= k^2``. Ratios are exact fractions.
    """
    from fractions import Fraction

    ns = sorted(n_range)
    if not ns or ns[0] < k:
        raise ValueError("need n >= k")
    report = LemmaReport(f"C(n,{k})/n^{k} -> 1/{k}!")
    target = Fraction(1, math.factorial(k))
    prev = None
    for n in ns:
        ratio = Fraction(math.comb(n, k), n**k)
        if n >= k * k and prev is not None and ratio < prev:
            report.violations.append(("not monotone", n, float(ratio)))
        if n >= k * k:
            prev = ratio
        report.checked += 1
    top = Fraction(math.comb(ns[-1], k), ns[-1] ** k)
    if abs(top - target) > target / 100:
        report.violations.append(("ratio not within 1%", ns[-1], float(top)))
    return report
