"""Empirical probe of the certification degree over random polynomials.

Samples polynomials with coefficients uniform in [-N, N] on all monomials
of degree <= d, keeps those nonnegative on a 33^n grid over the unit box (a
cheap necessary filter, not a certificate), and runs the degree sweep on
each.  The running maximum of the minimal degrees estimates how the
required perturbation degree scales with (n, d, N, eps); no reference
values exist for it, so the output is exploratory.

A sample that passes the grid but exhausts the sweep is retried once with
its grid minimum added (it may dip negative between grid points); such
shifts are counted and flagged per row, never silently absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import NoSamplesAcceptedError, NotFoundWithinRMaxError
from .polynomials import Polynomial, multidegrees_upto
from .rng import SplitMix64
from .sdp import SolverSettings
from .sos import THETA_BIG, minimal_r

GRID_POINTS_PER_AXIS = 33


@dataclass
class ProbeRow:
    index: int
    status: str                  # accepted | rejected
    grid_min: float
    shifted: bool = False
    found_r: Optional[int] = None
    min_eps: Optional[float] = None

    def to_obj(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "grid_min": self.grid_min,
            "shifted": self.shifted,
            "found_r": self.found_r,
            "min_eps": self.min_eps,
        }


@dataclass
class ProbeReport:
    n_vars: int
    degree: int
    coeff_bound: float
    eps: float
    samples: int
    seed: int
    r_max: int
    rows: List[ProbeRow] = field(default_factory=list)

    @property
    def max_r(self) -> Optional[int]:
        found = [row.found_r for row in self.rows if row.found_r is not None]
        return max(found) if found else None

    def counts(self) -> dict:
        return {
            "accepted": sum(1 for r in self.rows if r.status == "accepted"),
            "rejected": sum(1 for r in self.rows if r.status == "rejected"),
            "certified": sum(1 for r in self.rows if r.found_r is not None),
            "shifted": sum(1 for r in self.rows if r.shifted),
            "unresolved": sum(
                1 for r in self.rows
                if r.status == "accepted" and r.found_r is None),
        }

    def to_obj(self) -> dict:
        return {
            "nvars": self.n_vars,
            "degree": self.degree,
            "coeff_bound": self.coeff_bound,
            "eps": self.eps,
            "samples": self.samples,
            "seed": self.seed,
            "r_max": self.r_max,
            "rows": [row.to_obj() for row in self.rows],
            "counts": self.counts(),
            "max_r": self.max_r,
        }


def _random_polynomial(rng: SplitMix64, n: int, d: int, bound: float) -> Polynomial:
    # draws happen in graded lex order so a seed pins the sample set
    terms = {}
    for alpha in multidegrees_upto(n, d):
        terms[alpha] = rng.uniform(-bound, bound)
    return Polynomial(n, terms)


def _grid_minimum(f: Polynomial, n: int) -> float:
    axes = [np.linspace(-1.0, 1.0, GRID_POINTS_PER_AXIS)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    values = np.zeros(points.shape[0])
    for alpha, c in f.sorted_terms():
        term = np.full(points.shape[0], c)
        for i, e in enumerate(alpha):
            if e:
                term = term * points[:, i] ** e
        values += term
    return float(values.min())


def run_probe(
    n: int,
    d: int,
    coeff_bound: float,
    eps: float,
    samples: int,
    seed: int,
    r_max: int = 10,
    settings: SolverSettings = SolverSettings(),
) -> ProbeReport:
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    rng = SplitMix64(seed)
    report = ProbeReport(n, d, coeff_bound, eps, samples, seed, r_max)

    for index in range(samples):
        f = _random_polynomial(rng, n, d, coeff_bound)
        grid_min = _grid_minimum(f, n)
        if grid_min < 0.0:
            report.rows.append(ProbeRow(index, "rejected", grid_min))
            continue
        row = ProbeRow(index, "accepted", grid_min)
        try:
            res = minimal_r(f, eps, THETA_BIG, r_max, settings)
            row.found_r = res.r
            row.min_eps = res.min_eps
        except NotFoundWithinRMaxError:
            row.shifted = True
            lifted = f + Polynomial.constant(n, grid_min)
            try:
                res = minimal_r(lifted, eps, THETA_BIG, r_max, settings)
                row.found_r = res.r
                row.min_eps = res.min_eps
            except NotFoundWithinRMaxError:
                pass
        report.rows.append(row)

    if not any(row.status == "accepted" for row in report.rows):
        raise NoSamplesAcceptedError(
            f"all {samples} samples were negative somewhere on the grid")
    return report
