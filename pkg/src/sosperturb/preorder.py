"""Membership in truncated preorderings of semialgebraic descriptions.

A description is a finite list of generators g_1..g_s; the associated set is
where all generators are nonnegative.  The degree-2r truncated preordering
collects sums over e in {0,1}^s of sigma_e * g_1^e1 * ... * g_s^es with
sigma_e a sum of squares and deg(sigma_e g^e) <= 2r.  Note this is the
truncation by the degree of the individual products, which differs in
general from intersecting the full preordering with the degree-2r space.

Membership of f + eps*p is one block-diagonal SDP: a Gram block per
admissible exponent tuple e, sized to the degree budget left after g^e, and
one matching constraint per monomial of degree <= 2r.  The weight-
minimizing variant adds the same 1x1 eps block as the plain squares engine;
its dual vector, negated, is the optimal moment functional subject to the
localizing PSD conditions, one per admissible e.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import (DegreeTooLowError, DimensionMismatchError,
                     NotFoundWithinRMaxError, SolverFailureError,
                     TooManyGeneratorsError)
from .moments import MomentVector
from .parsing import parse, unparse
from .polynomials import MonomialBasis, Polynomial, multidegrees_upto
from .sdp import ConstraintRow, SdpProblem, SolveStatus, SolverSettings, solve
from .sos import (DEFAULT_CLIP_TOL, SOS_DECISION_TOL, ApproximationResult,
                  GramCertificate, PerturbationKind, THETA_BIG, THETA_SMALL,
                  gram_polynomial, perturbation_polynomial)

log = logging.getLogger(__name__)

MAX_GENERATORS = 10


@dataclass
class SemialgebraicSystem:
    """Finite generator list plus the user's moment-problem assertion.

    Whether every functional nonnegative on the preordering integrates
    against a measure on the set is not decidable here; the flag records
    the user's claim and `note` its provenance (e.g. compactness).
    """

    generators: List[Polynomial]
    assert_moment_problem: bool = False
    note: str = ""

    def __post_init__(self):
        if not self.generators:
            raise ValueError("at least one generator is required")
        if len(self.generators) > MAX_GENERATORS:
            raise TooManyGeneratorsError(
                f"{len(self.generators)} generators exceed the cap of {MAX_GENERATORS}")
        n = self.generators[0].n_vars
        for g in self.generators:
            if g.n_vars != n:
                raise DimensionMismatchError("generators disagree on n_vars")
            if g.is_zero:
                raise ValueError("the zero polynomial cannot be a generator")

    @property
    def n_vars(self) -> int:
        return self.generators[0].n_vars


def load_system(text: str) -> SemialgebraicSystem:
    """Parse the line-oriented description format.

    Header `nvars <n>`, then `moment_problem asserted|unknown`, an optional
    `note <text>` line, then one generator per line in the polynomial
    grammar.  Blank lines and lines starting with '#' are skipped.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 3:
        raise ValueError("system description needs nvars, moment_problem and generators")
    if not lines[0].startswith("nvars "):
        raise ValueError("first line must be 'nvars <n>'")
    n_vars = int(lines[0].split()[1])
    if not lines[1].startswith("moment_problem "):
        raise ValueError("second line must be 'moment_problem asserted|unknown'")
    flag = lines[1].split(None, 1)[1].strip()
    if flag not in ("asserted", "unknown"):
        raise ValueError(f"moment_problem must be asserted or unknown, got {flag!r}")
    note = ""
    rest = lines[2:]
    if rest and rest[0].startswith("note "):
        note = rest[0][5:].strip()
        rest = rest[1:]
    generators = [parse(ln, n_vars) for ln in rest]
    return SemialgebraicSystem(generators, flag == "asserted", note)


def dump_system(system: SemialgebraicSystem) -> str:
    lines = [f"nvars {system.n_vars}",
             f"moment_problem {'asserted' if system.assert_moment_problem else 'unknown'}"]
    if system.note:
        lines.append(f"note {system.note}")
    lines.extend(unparse(g) for g in system.generators)
    return "\n".join(lines) + "\n"


def enumerate_products(
    system: SemialgebraicSystem, two_r: int
) -> List[Tuple[Tuple[int, ...], Polynomial]]:
    """Admissible exponent tuples e with deg(g^e) <= two_r and the expanded
    products, in little-endian counting order (e_1 is the fastest bit), so
    the trivial product e = 0 comes first.

    Distinct tuples with identical products are kept as separate entries.
    """
    if two_r < 0:
        raise ValueError("two_r must be >= 0")
    s = len(system.generators)
    degs = [g.degree() for g in system.generators]
    out: List[Tuple[Tuple[int, ...], Polynomial]] = []
    for code in range(1 << s):
        e = tuple((code >> i) & 1 for i in range(s))
        deg = sum(d for d, ei in zip(degs, e) if ei)
        if deg > two_r:
            continue
        product = Polynomial.constant(system.n_vars, 1.0)
        for g, ei in zip(system.generators, e):
            if ei:
                product = product * g
        out.append((e, product))
    return out


def _product_blocks(
    f: Polynomial, p: Polynomial, system: SemialgebraicSystem, r: int
) -> Tuple[List[Tuple[Tuple[int, ...], Polynomial, MonomialBasis]], List[ConstraintRow]]:
    """Shared assembly: per-product Gram blocks and the matching rows.

    Rows carry only the product-block coefficients; callers add the eps
    column and right-hand sides.
    """
    if f.degree() > 2 * r:
        raise DegreeTooLowError(f"degree {f.degree()} target needs 2r >= {f.degree()}")
    if p.degree() > 2 * r:
        raise DegreeTooLowError(f"degree {p.degree()} perturbation needs 2r >= {p.degree()}")
    if f.n_vars != system.n_vars:
        raise DimensionMismatchError(
            f"target has {f.n_vars} variables, system has {system.n_vars}")
    blocks = []
    for e, product in enumerate_products(system, 2 * r):
        m_e = (2 * r - product.degree()) // 2
        blocks.append((e, product, MonomialBasis.build(f.n_vars, m_e)))

    gammas = multidegrees_upto(f.n_vars, 2 * r)
    rows = []
    for gamma in gammas:
        mats: Dict[int, np.ndarray] = {}
        for bi, (e, product, basis) in enumerate(blocks):
            n = len(basis)
            mat = np.zeros((n, n))
            nonzero = False
            for i in range(n):
                for j in range(i, n):
                    rest = tuple(
                        g - a - b for g, a, b in
                        zip(gamma, basis.entries[i], basis.entries[j]))
                    if any(x < 0 for x in rest):
                        continue
                    c = product.coeff(rest)
                    if c == 0.0:
                        continue
                    mat[i, j] += c
                    if i != j:
                        mat[j, i] += c
                    nonzero = True
            if nonzero:
                mats[bi] = mat
        rows.append(ConstraintRow(mats, None, 0.0))
    return blocks, rows


def build_preorder_sdp(
    f: Polynomial,
    eps: float,
    p: Polynomial,
    system: SemialgebraicSystem,
    r: int,
) -> SdpProblem:
    """Feasibility program: does f + eps*p decompose at degree 2r?

    Zero objective; one Gram block per admissible product.
    """
    blocks, rows = _product_blocks(f, p, system, r)
    target = f + p.scale(eps)
    gammas = multidegrees_upto(f.n_vars, 2 * r)
    for row, gamma in zip(rows, gammas):
        row.rhs = target.coeff(gamma)
    sizes = [len(basis) for _, _, basis in blocks]
    return SdpProblem.from_rows(sizes, 0, rows, {})


def epsilon_star_preorder(
    f: Polynomial,
    r: int,
    p: Polynomial,
    system: SemialgebraicSystem,
    settings: SolverSettings = SolverSettings(),
) -> ApproximationResult:
    """Minimal weight eps putting f + eps*p in the degree-2r truncation.

    The dual of the assembled program is the moment-side problem: minimize
    L(f) over functionals with L(p) <= 1 whose localizing matrix for every
    admissible product is PSD; its value is reported as eps_star and cross-
    checked against the primal optimum.  No certificate is attached here;
    membership() builds one for a concrete weight.  The solve runs on the
    variable rescaling that balances the perturbation's coefficient spread
    and the moment functional is transformed back afterwards.
    """
    system_n, _ = _normalized_system(system)
    blocks, rows = _product_blocks(f, p, system_n, r)
    eps_index = len(blocks)
    for row, gamma in zip(rows, multidegrees_upto(f.n_vars, 2 * r)):
        c = p.coeff(gamma)
        if c != 0.0:
            row.blocks[eps_index] = np.array([[-c]])
        row.rhs = f.coeff(gamma)
    sizes = [len(basis) for _, _, basis in blocks] + [1]
    problem = SdpProblem.from_rows(
        sizes, 0, rows, {eps_index: np.array([[1.0]])})
    sol = solve(problem, settings)
    if sol.status is not SolveStatus.OPTIMAL:
        raise SolverFailureError(
            f"solver returned {sol.status.value} for the preorder weight program at r={r}",
            sol)
    min_eps = sol.dual_objective
    gap = abs(sol.primal_objective - sol.dual_objective)
    if gap > 1e-6:
        raise SolverFailureError(
            f"preorder primal and moment optima disagree by {gap:.3e}", sol)
    gammas = multidegrees_upto(f.n_vars, 2 * r)
    moments = MomentVector(
        f.n_vars, 2 * r,
        {g: -float(v) for g, v in zip(gammas, sol.dual_vector)})
    return ApproximationResult(
        r=r,
        eps_star=-min_eps,
        min_eps=min_eps,
        certificate=None,
        dual_moments=moments,
        gap=gap,
    )


def _normalized_system(
    system: SemialgebraicSystem,
) -> Tuple[SemialgebraicSystem, List[float]]:
    """Generators scaled to unit max coefficient, plus the norms taken out.

    The normalization factor moves into the matching sigma block and is
    divided back out of its Gram matrix after the solve; it keeps the
    constraint data O(1) regardless of how the generators were written.
    """
    gens = []
    norms = []
    for g in system.generators:
        norm = max(abs(c) for c in g.terms.values())
        gens.append(g.scale(1.0 / norm))
        norms.append(norm)
    return SemialgebraicSystem(
        gens, system.assert_moment_problem, system.note), norms


def _term_norm(e: Tuple[int, ...], norms: List[float]) -> float:
    out = 1.0
    for ei, c in zip(e, norms):
        if ei:
            out *= c
    return out


@dataclass
class PreorderTerm:
    exponents: Tuple[int, ...]
    product: Polynomial
    sigma: GramCertificate


@dataclass
class PreorderCertificate:
    """Explicit decomposition f + eps*p = sum_e sigma_e * g^e.

    residual_linf compares the reconstruction, assembled from the extracted
    squares of every sigma_e by plain polynomial arithmetic, against the
    target; nothing is taken from the solver on trust.
    """

    r: int
    eps_star: float
    min_eps: float
    gap: float
    kind: str
    annotation: str
    terms: List[PreorderTerm]
    residual_linf: float
    warnings: List[str]
    target: Polynomial = field(repr=False)

    def to_obj(self) -> dict:
        return {
            "r": self.r,
            "eps_star": self.eps_star,
            "min_eps": self.min_eps,
            "gap": self.gap,
            "kind": self.kind,
            "annotation": self.annotation,
            "terms": [
                {
                    "e": list(t.exponents),
                    "product": t.product.to_obj(),
                    "sigma": t.sigma.to_obj(),
                }
                for t in self.terms
            ],
            "residual_linf": self.residual_linf,
            "warnings": self.warnings,
        }


def _reconstruct(terms: Sequence[PreorderTerm], n_vars: int) -> Polynomial:
    total = Polynomial.zero(n_vars)
    for t in terms:
        sigma = Polynomial.zero(n_vars)
        for h in t.sigma.squares:
            sigma = sigma + h * h
        total = total + sigma * t.product
    return total


def _kind_annotation(kind: PerturbationKind, n_vars: int) -> str:
    if kind == THETA_SMALL:
        return ("certifies nonnegativity of the target polynomial on the "
                "described set")
    if kind == THETA_BIG:
        return ("certifies nonnegativity of the target polynomial only on "
                f"the intersection of the described set with [-1,1]^{n_vars}")
    return "custom perturbation: no nonnegativity claim attached"


def membership(
    f: Polynomial,
    eps: float,
    kind: PerturbationKind,
    system: SemialgebraicSystem,
    r_max: int,
    settings: SolverSettings = SolverSettings(),
    clip_tol: float = DEFAULT_CLIP_TOL,
) -> PreorderCertificate:
    """Search the smallest degree at which f + eps*p_r decomposes.

    Runs the weight program at each degree; at the first degree whose
    minimal weight is covered by eps, re-solves the feasibility program for
    the requested weight and extracts per-product square decompositions.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    warnings: List[str] = []
    if not system.assert_moment_problem:
        warnings.append(
            "moment problem hypothesis not asserted: the degree sweep is a "
            "best effort and may miss memberships that hold at every degree")

    r_start = max((f.degree() + 1) // 2, 0)
    if kind == THETA_BIG:
        r_start = max(r_start, 1)
    if r_max < r_start:
        raise ValueError(f"r_max={r_max} is below the starting degree {r_start}")

    trajectory: List[dict] = []
    for r in range(r_start, r_max + 1):
        p = perturbation_polynomial(kind, f.n_vars, r)
        if p.degree() > 2 * r:
            trajectory.append({"r": r, "min_eps": None, "status": "degree-too-low"})
            continue
        try:
            base = epsilon_star_preorder(f, r, p, system, settings)
        except SolverFailureError as exc:
            sol = exc.solution
            status = ("infeasible"
                      if sol is not None and sol.status is SolveStatus.PRIMAL_LIKELY_INFEASIBLE
                      else "solver-failed")
            trajectory.append({"r": r, "min_eps": None, "status": status})
            continue
        trajectory.append({"r": r, "min_eps": base.min_eps, "status": "ok"})
        if eps < base.min_eps - SOS_DECISION_TOL:
            continue

        system_n, norms = _normalized_system(system)
        blocks, rows = _product_blocks(f, p, system_n, r)
        target = f + p.scale(eps)
        for row, gamma in zip(rows, multidegrees_upto(f.n_vars, 2 * r)):
            row.rhs = target.coeff(gamma)
        sizes = [len(basis) for _, _, basis in blocks]
        sol = solve(SdpProblem.from_rows(sizes, 0, rows, {}), settings)
        if sol.status is not SolveStatus.OPTIMAL:
            trajectory[-1]["status"] = "weight-ok-decomposition-failed"
            continue

        products = enumerate_products(system, 2 * r)
        terms = []
        for bi, (e, _normalized_product, basis) in enumerate(blocks):
            gram = sol.primal_blocks[bi] / _term_norm(e, norms)
            sigma_target = gram_polynomial(basis, gram)
            sigma = GramCertificate.from_gram(basis, gram, sigma_target, clip_tol)
            terms.append(PreorderTerm(e, products[bi][1], sigma))
        reconstruction = _reconstruct(terms, f.n_vars)
        keys = set(reconstruction.terms) | set(target.terms)
        residual = max(
            (abs(reconstruction.coeff(a) - target.coeff(a)) for a in keys),
            default=0.0)
        return PreorderCertificate(
            r=r,
            eps_star=base.eps_star,
            min_eps=base.min_eps,
            gap=base.gap,
            kind=kind if isinstance(kind, str) else "custom",
            annotation=_kind_annotation(kind, f.n_vars),
            terms=terms,
            residual_linf=residual,
            warnings=warnings,
            target=target,
        )
    raise NotFoundWithinRMaxError(
        f"no degree r <= {r_max} admits the requested weight", trajectory)


def verify_preorder_obj(obj: dict, target: Polynomial) -> dict:
    """Re-check a serialized decomposition without the solver.

    Both routes run on polynomial arithmetic alone: the per-term Gram forms
    and the per-term squares are each expanded against the stored products
    and compared with the target coefficient-wise.
    """
    from .sos import coefficient_distance, decode_gram_obj

    total_gram = Polynomial.zero(target.n_vars)
    total_squares = Polynomial.zero(target.n_vars)
    for term in obj["terms"]:
        product = Polynomial.from_obj(term["product"], target.n_vars)
        basis, gram, squares = decode_gram_obj(term["sigma"], target.n_vars)
        total_gram = total_gram + gram_polynomial(basis, gram) * product
        sq = Polynomial.zero(target.n_vars)
        for h in squares:
            sq = sq + h * h
        total_squares = total_squares + sq * product
    residual_gram = coefficient_distance(total_gram, target)
    residual_squares = coefficient_distance(total_squares, target)
    return {
        "residual_gram": residual_gram,
        "residual_squares": residual_squares,
        "residual_linf": max(residual_gram, residual_squares),
    }
