"""Galerkin solves of A_s phi = 1 on (-1, 1) under mesh refinement.

Reports the fitted boundary exponent beta and the error against the closed
form phi = (1 - x^2)^s / K_s, with K_s measured by pointwise evaluation.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from stablemp import functions as fn
from stablemp.geometry import Interval
from stablemp.operator import StableOperator, apply_pointwise
from stablemp.solver import boundary_decay_fit, solve_dirichlet
from stablemp.spectral import SpectralMeasure


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--s", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    p.add_argument("--nodes", type=int, nargs="+", default=[65, 129, 257, 513])
    args = p.parse_args(argv)

    line = Interval(-1.0, 1.0)
    x = np.linspace(-0.9, 0.9, 19)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["s", "n_nodes", "beta", "max_rel_err", "residual"])
    for s in args.s:
        op = StableOperator(s, SpectralMeasure.uniform(1, 2.0))
        k_s = float(apply_pointwise(op, fn.power_profile(s), np.array([0.0]))[0])
        exact = (1 - x**2) ** s / k_s
        for n in args.nodes:
            sol = solve_dirichlet(op, line, fn.constant(1.0), n_nodes=n)
            err = float(np.max(np.abs(sol(x) - exact) / exact))
            beta = boundary_decay_fit(sol).beta
            out.writerow([s, n, f"{beta:.4f}", f"{err:.3e}", f"{sol.residual:.1e}"])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
