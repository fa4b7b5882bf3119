"""Print the ARE grid of rank tests with respect to pseudo-Gaussian tests.

    python scripts/reproduce_table1.py [--csv out.csv]
"""
import argparse
import csv
import sys

from rankpca import elliptic, scores

SCORES = ["vdw", "wilcoxon", "spearman", "sign"]
FAMILIES = ["t:5", "t:8", "t:12", "gaussian", "e:2", "e:3", "e:5"]


def grid(ks=(2, 3, 4, 6, 10)):
    for name in SCORES:
        for k in ks:
            K = scores.parse_score(name, k)
            yield [name, k] + [scores.are_ratio(K, elliptic.parse_family(f, k)) for f in FAMILIES]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", help="also write the grid as CSV")
    args = ap.parse_args(argv)
    rows = list(grid())
    print(f"{'score':<10}{'k':>3} " + "".join(f"{f:>9}" for f in FAMILIES))
    for r in rows:
        print(f"{r[0]:<10}{r[1]:>3} " + "".join(f"{v:9.3f}" for v in r[2:]))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["score", "k"] + FAMILIES)
            w.writerows([r[:2] + [repr(v) for v in r[2:]] for r in rows])
    return 0


if __name__ == "__main__":
    sys.exit(main())
