#!/usr/bin/env python3
"""Weight trend for preordering membership on a cuspidal description.

The set {x : (1 - x^2)^3 >= 0} is the interval [-1, 1], but with this
generator 1 - x^2 itself admits no finite-degree decomposition: at every
fixed degree a positive perturbation weight is required.  The weight decays
as the degree budget grows; this script prints the measured trend and the
degree at which a few concrete weights are first covered.
"""

import argparse

from sosperturb import (SemialgebraicSystem, THETA_SMALL, epsilon_star_preorder,
                        membership, parse, theta_small)
from sosperturb.errors import SolverFailureError


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r-max", type=int, default=7)
    args = ap.parse_args()

    system = SemialgebraicSystem([parse("(1 - x1^2)^3", 1)], True,
                                 note="interval with a cuspidal generator")
    f = parse("1 - x1^2", 1)

    print("minimal weight for membership of 1 - x1^2 + eps * theta_r:")
    print(f"{'r':>3} {'min_eps':>14} {'gap':>9}")
    for r in range(1, args.r_max + 1):
        try:
            res = epsilon_star_preorder(f, r, theta_small(1, r), system)
            print(f"{r:>3} {res.min_eps:>14.9f} {res.gap:>9.1e}")
        except SolverFailureError as exc:
            print(f"{r:>3} {'(' + str(exc) + ')':>14}")

    for eps in (0.5, 0.1, 0.05):
        cert = membership(f, eps, THETA_SMALL, system, 12)
        print(f"eps={eps}: decomposition found at r={cert.r}, "
              f"residual {cert.residual_linf:.2e}, "
              f"{len(cert.terms)} product terms")


if __name__ == "__main__":
    main()
