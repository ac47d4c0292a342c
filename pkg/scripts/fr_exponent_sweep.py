#!/usr/bin/env python3
"""Sweep the boundary-integral growth exponents and print the fitted slopes.

Reproduces the exponent regressions at configurable sample counts; useful
for picking Monte-Carlo budgets before trusting a slope.
"""

import argparse
import time

import numpy as np

from berglab.domain import unit_ball
from berglab.gauge import exponent_regression, fr_integral


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1, help="complex dimension (ball)")
    parser.add_argument("--samples", type=int, default=300000)
    parser.add_argument("--k-lo", type=int, default=9)
    parser.add_argument("--k-hi", type=int, default=14)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    dom = unit_ball(args.n, theta=0.25)
    depths = [2.0**-k for k in range(args.k_lo, args.k_hi + 1)]
    for a in (1.0, 0.5, -0.5):
        t0 = time.time()
        ests, errs = [], []
        for i, t in enumerate(depths):
            z = np.zeros(args.n, complex)
            z[0] = np.sqrt(1 - t)
            res = fr_integral(dom, z, kappa=0.0, a=a, samples=args.samples, seed=args.seed + i)
            ests.append(res["estimate"])
            errs.append(res["stderr"])
        fit = exponent_regression(depths, ests)
        print(
            f"a={a:+.1f}: slope {fit['slope']:+.4f} (target {-max(a,0):+.1f}), "
            f"r2 {fit['r2']:.5f}, {time.time() - t0:.1f}s"
        )
        for t, e, s in zip(depths, ests, errs):
            print(f"   -r={t:.2e}  estimate {e:12.4f}  stderr {s:.4f}")


if __name__ == "__main__":
    main()
