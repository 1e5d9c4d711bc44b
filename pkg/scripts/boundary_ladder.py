"""Boundary functional eps^{-s+delta} int_{dist<eps} u+ for the counterexample.

Prints one CSV row per (s, delta, eps). With delta = 0 the values settle at
2^s / s; with delta > 0 they shrink like eps^delta.
"""
from __future__ import annotations

import argparse
import csv
import sys

from stablemp import functions as fn
from stablemp.geometry import Interval
from stablemp.verifier import boundary_functional


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--s", type=float, nargs="+", default=[0.3, 0.5, 0.7])
    p.add_argument("--delta", type=float, nargs="+", default=[0.0, 0.1])
    p.add_argument("--ladder", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125, 0.00625])
    args = p.parse_args(argv)

    line = Interval(-1.0, 1.0)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["s", "delta", "eps", "value", "limit_2s_over_s"])
    for s in args.s:
        u = fn.counterexample(s)
        for delta in args.delta:
            lad = boundary_functional(u, line, s, args.ladder, delta=delta)
            for eps, v in zip(lad.eps, lad.values):
                out.writerow([s, delta, eps, f"{v:.10g}", f"{2**s / s:.10g}"])
            print(f"# s={s} delta={delta} ratio={lad.ratio:.4f} verdict={lad.verdict}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
