#!/usr/bin/env python3
"""Trend of the minimal perturbation weight as the degree grows.

For a polynomial nonnegative on the unit box, the weight needed on the
1 + sum x_j^(2r) perturbation shrinks to zero as r grows.  This script
tabulates the computed weights for a few targets so the decay is visible,
including the closed-form column for the pure-monomial perturbation of
1 - x^2 where (r-1)^(r-1) / r^r is exact.
"""

import argparse

from sosperturb import Polynomial, epsilon_star, parse, theta_big


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r-max", type=int, default=10)
    args = ap.parse_args()

    f = parse("1 - x1^2", 1)
    print(f"target: 1 - x1^2 on [-1, 1]")
    print(f"{'r':>3} {'monomial weight':>16} {'closed form':>14} "
          f"{'box weight':>12} {'gap':>9}")
    for r in range(2, args.r_max + 1):
        mono = epsilon_star(f, r, Polynomial.monomial(1, (2 * r,)))
        box = epsilon_star(f, r, theta_big(1, r))
        closed = (r - 1) ** (r - 1) / r ** r
        print(f"{r:>3} {mono.min_eps:>16.9f} {closed:>14.9f} "
              f"{box.min_eps:>12.9f} {box.gap:>9.1e}")

    motz = parse("1 + x1^2*x2^2*(x1^2 + x2^2 - 3)", 2)
    print("\ntarget: the Motzkin polynomial (nonnegative, not a sum of squares)")
    print(f"{'r':>3} {'monomial weight':>16} {'sufficient 2^(4-2r)':>20}")
    for r in range(3, min(args.r_max, 6) + 1):
        res = epsilon_star(motz, r, Polynomial.monomial(2, (2 * r, 0)))
        print(f"{r:>3} {res.min_eps:>16.9f} {2.0 ** (4 - 2 * r):>20.9f}")


if __name__ == "__main__":
    main()
