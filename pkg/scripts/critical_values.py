"""Simulated 5% critical values of the eigenvalue rank tests, k = 3, n = 100.

    python scripts/critical_values.py [--reps 100000] [--method plugin|oracle]
"""
import argparse
import sys

import numpy as np

from rankpca import mc, scores

SCORES = ("vdw", "tscore:5", "tscore:3", "tscore:1", "sign", "wilcoxon", "spearman")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=100_000)
    ap.add_argument("--method", choices=mc.CV_METHODS, default="plugin")
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args(argv)
    Ks = [scores.parse_score(s, 3) for s in SCORES]
    cv = mc.simulate_critical_values(Ks, "eigval", 3, 100, args.reps, 0.05, seed=args.seed,
                                     lam0=np.array([10.0, 4.0, 1.0]), method=args.method)
    for s in SCORES:
        print(f"{s:<10}{cv[s]:9.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
