"""Goodness of fit of the chain-rule sampler against exact click probabilities.

Runs a chi-square test at large S and counts how often the empirical nu
distribution at the default S lands within L1 distance epsilon of the exact one.
"""

import argparse

import numpy as np
from scipy.stats import chisquare

from bingbs.combinatorics import sample_size
from bingbs.encoding import encode
from bingbs.graphio import erdos_renyi
from bingbs.probability import binary_distribution, exact_nu_distribution
from bingbs.sampling import PrefixTable, empirical_distribution, sample_binary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, default=8)
    ap.add_argument("--S", type=int, default=10**6)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--epsilon", type=float, default=0.06)
    ap.add_argument("--delta", type=float, default=0.01)
    args = ap.parse_args()

    g = erdos_renyi(args.M, 0.5, seed=1)
    enc = encode(g, 5.0)
    p = binary_distribution(enc, method="mobius")
    table = PrefixTable(enc)
    batch = sample_binary(enc, args.S, seed=0, table=table)
    idx = batch.samples.astype(np.int64) @ (1 << np.arange(args.M - 1, -1, -1))
    obs = np.bincount(idx, minlength=1 << args.M)
    keep = p > 0
    stat, pval = chisquare(obs[keep], p[keep] * args.S)
    print(f"M={args.M} S={args.S}: chi2={stat:.1f} p={pval:.3f} impossible-pattern hits={int(obs[~keep].sum())}")

    S_nu = sample_size(32, args.epsilon, args.delta)
    nu = exact_nu_distribution(enc)
    gaps = [
        np.abs(empirical_distribution(sample_binary(enc, S_nu, seed=s, n_modes=5, table=table), "nu") - nu).sum()
        for s in range(args.seeds)
    ]
    inside = sum(gap <= args.epsilon for gap in gaps)
    print(f"nu at S={S_nu}: {inside}/{args.seeds} seeds within L1 {args.epsilon} (max gap {max(gaps):.4f})")


if __name__ == "__main__":
    main()
