import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bingbs.encoding import encode, reduce
from bingbs.probability import (
    all_patterns,
    binary_distribution,
    binary_probability,
    click_counts,
    exact_mu_distribution,
    exact_nu_distribution,
    pattern_bits,
    pattern_index,
    pnr_events_for,
    pnr_probability,
    verify_binary_pnr_identity,
)
from conftest import random_connected_graph
from oracles import click_probability_numpy, hafnian_pairing


def test_pattern_order():
    P = all_patterns(3)
    assert P[1].tolist() == [0, 0, 1] and P[4].tolist() == [1, 0, 0]
    assert pattern_index([1, 0, 1]) == 5 and pattern_bits(5, 3) == (1, 0, 1)
    assert click_counts(3).tolist() == [0, 1, 1, 2, 1, 2, 2, 3]


def test_single_edge_distribution(single_edge):
    enc = encode(single_edge, 5.0)
    for method in ("torontonian", "mobius"):
        np.testing.assert_allclose(binary_distribution(enc, method), [2 / 7, 0, 0, 5 / 7], atol=1e-9)


def test_single_edge_pnr(single_edge):
    enc = encode(single_edge, 5.0)
    for k in range(11):
        assert pnr_probability(enc, [k, k]) == pytest.approx((2 / 7) * (5 / 7) ** k, abs=1e-9)
    assert pnr_probability(enc, [1, 2]) == 0.0
    assert pnr_probability(enc, [2, 0]) == 0.0


def test_single_edge_identity_gap_is_geometric_tail(single_edge):
    enc = encode(single_edge, 5.0)
    chk = verify_binary_pnr_identity(enc, [1, 1], 40)
    c2 = enc.c**2
    assert chk.gap == pytest.approx(c2**21, abs=1e-12)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_binary_probability_matches_vacuum_projector_oracle(M, seed):
    rng = np.random.default_rng(seed)
    enc = encode(random_connected_graph(rng, M), float(rng.uniform(0.5, 6)))
    b = (rng.random(M) < 0.5).astype(int)
    assert binary_probability(enc, b) == pytest.approx(click_probability_numpy(enc.Q, b), abs=1e-10)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_distribution_normalized_and_methods_agree(M, seed):
    enc = encode(random_connected_graph(np.random.default_rng(seed), M), 5.0)
    p = binary_distribution(enc)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)
    assert p.min() >= 0
    np.testing.assert_allclose(binary_distribution(enc, "mobius"), p, atol=1e-12)


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_pnr_matches_pairing_hafnian(M, seed):
    rng = np.random.default_rng(seed)
    enc = encode(random_connected_graph(rng, M), 2.0)
    n = rng.integers(0, 3, size=M)
    if n.sum() % 2:
        n[0] += 1
    idx = np.repeat(np.arange(M), n)
    h = hafnian_pairing((enc.c * enc.A)[np.ix_(idx, idx)])
    ref = h * h / (math.prod(math.factorial(int(k)) for k in n) * math.sqrt(np.linalg.det(enc.Q)))
    assert pnr_probability(enc, n) == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_pnr_needs_full_encoding(k4):
    with pytest.raises(ValueError):
        pnr_probability(reduce(encode(k4), [0, 1]), [1, 1])
    with pytest.raises(ValueError):
        pnr_probability(encode(k4), [1, 1])


def test_pnr_events_enumeration():
    ev = list(pnr_events_for([1, 0, 1], 4))
    assert all(e[1] == 0 and e[0] > 0 and e[2] > 0 and sum(e) <= 4 for e in ev)
    assert len(ev) == 1 + 2 + 3  # totals 2, 3, 4
    assert list(pnr_events_for([0, 0], 10)) == [(0, 0)]


@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_identity_gap_nonnegative_and_monotone(M, seed):
    rng = np.random.default_rng(seed)
    enc = encode(random_connected_graph(rng, M), 1.0)
    b = (rng.random(M) < 0.5).astype(int)
    gaps = [verify_binary_pnr_identity(enc, b, cut).gap for cut in (2, 4, 6, 8)]
    assert min(gaps) >= -1e-12
    assert all(x >= y - 1e-12 for x, y in zip(gaps, gaps[1:]))


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_mu_routes_agree_and_deficit(M, seed):
    enc = encode(random_connected_graph(np.random.default_rng(seed), M), 5.0)
    N = min(M, 6)
    a = exact_mu_distribution(enc, N, "patterns")
    b = exact_mu_distribution(enc, N, "subsets")
    np.testing.assert_allclose(a, b, atol=1e-10)
    p = binary_distribution(enc)
    clicks = click_counts(M)
    assert 1 - a.sum() == pytest.approx(p[clicks > N].sum(), abs=1e-10)


@given(st.integers(5, 8), st.integers(0, 2**32 - 1))
def test_nu_equals_summed_out_distribution(M, seed):
    enc = encode(random_connected_graph(np.random.default_rng(seed), M), 5.0)
    nu = exact_nu_distribution(enc)
    p = binary_distribution(enc, "mobius")
    summed = p.reshape(32, -1).sum(axis=1)
    np.testing.assert_allclose(nu, summed, atol=1e-9)


def test_nu_needs_five_modes(k4):
    with pytest.raises(ValueError):
        exact_nu_distribution(encode(k4))


def test_pattern_length_checked(k4):
    with pytest.raises(ValueError):
        binary_probability(encode(k4), [1, 0])
