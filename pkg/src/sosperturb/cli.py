"""Command-line front end.

Exit codes follow one contract everywhere: 0 for success or membership,
1 for a definite negative answer (not a sum of squares, nothing found
within the degree cap, a failed re-verification), 2 for usage errors,
malformed input, or numerical failure.  All commands are deterministic:
identical invocations produce byte-identical output, and --json emits the
same data the human rendering shows.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from typing import List, Optional

import click

from .errors import (DegreeTooLowError, DimensionMismatchError,
                     IncompleteMomentsError, NoSamplesAcceptedError,
                     NotFoundWithinRMaxError, NotPsdError, ParseError,
                     SolverFailureError, TooManyGeneratorsError)
from .parsing import parse, unparse
from .polynomials import Polynomial
from .preorder import load_system, membership, verify_preorder_obj
from .probe import run_probe
from .sdp import SolverSettings
from .sos import (THETA_BIG, THETA_SMALL, approximate_on_box, epsilon_star,
                  is_sos, minimal_r, perturbation_polynomial,
                  verify_certificate_obj)

_USAGE_ERRORS = (
    ParseError, DimensionMismatchError, DegreeTooLowError,
    TooManyGeneratorsError, NotPsdError, IncompleteMomentsError,
    SolverFailureError, NoSamplesAcceptedError, ValueError, OSError,
)


def _setup_logging() -> None:
    level_name = os.environ.get("SOSPERTURB_LOG", "").upper()
    if level_name:
        level = getattr(logging, level_name, None)
        if isinstance(level, int):
            logging.basicConfig(
                level=level, format="%(name)s %(levelname)s %(message)s")


@click.group()
def main() -> None:
    """Certificates of polynomial nonnegativity via perturbed sums of squares."""
    _setup_logging()


def _poly_options(fn):
    fn = click.option("--poly-file", type=click.Path(exists=True, dir_okay=False),
                      help="Read the polynomial from a file.")(fn)
    fn = click.option("-f", "--poly", "poly_text", help="Polynomial expression.")(fn)
    fn = click.option("-n", "--nvars", type=int, help="Number of variables.")(fn)
    return fn


def _solver_options(fn):
    fn = click.option("--feas-tol", type=float, default=1e-8, show_default=True,
                      help="Feasibility tolerance of the embedded solver.")(fn)
    fn = click.option("--gap-tol", type=float, default=1e-8, show_default=True,
                      help="Duality gap tolerance of the embedded solver.")(fn)
    return fn


def _output_options(fn):
    fn = click.option("-o", "--output", type=click.Path(dir_okay=False),
                      help="Write the report to a file instead of stdout.")(fn)
    fn = click.option("--json", "as_json", is_flag=True,
                      help="Emit the report as JSON.")(fn)
    return fn


def _settings(gap_tol: float, feas_tol: float) -> SolverSettings:
    return SolverSettings(gap_tolerance=gap_tol, feas_tolerance=feas_tol)


def _load_poly(nvars: Optional[int], poly_text: Optional[str],
               poly_file: Optional[str]) -> Polynomial:
    if nvars is None:
        raise click.UsageError("-n/--nvars is required")
    if (poly_text is None) == (poly_file is None):
        raise click.UsageError("provide exactly one of -f/--poly or --poly-file")
    if poly_file is not None:
        with open(poly_file, "r", encoding="utf-8") as handle:
            poly_text = handle.read()
    return parse(poly_text, nvars)


def _perturbation(value: str):
    """Resolve a --perturbation value to (kind, descriptor dict)."""
    if value == "theta-big":
        return THETA_BIG, {"kind": "theta-big"}
    if value == "theta-small":
        return THETA_SMALL, {"kind": "theta-small"}
    if value.startswith("custom:"):
        path = value[len("custom:"):]
        with open(path, "r", encoding="utf-8") as handle:
            template = handle.read().strip()

        def family(n: int, r: int) -> Polynomial:
            text = template.replace("{2r}", str(2 * r)).replace("{r}", str(r))
            return parse(text, n)

        return family, {"kind": "custom", "template": template}
    raise click.UsageError(
        f"--perturbation must be theta-big, theta-small or custom:<file>, got {value!r}")


def _emit(report: dict, human: List[str], as_json: bool, output: Optional[str]) -> None:
    text = json.dumps(report, indent=2) + "\n" if as_json else "\n".join(human) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(2)


def _certificate_report(res) -> dict:
    obj = {
        "r": res.r,
        "eps_star": res.eps_star,
        "min_eps": res.min_eps,
        "gap": res.gap,
    }
    if res.certificate is not None:
        obj.update(res.certificate.to_obj())
    if res.trajectory is not None:
        obj["trajectory"] = res.trajectory
    return obj


def _trajectory_lines(trajectory) -> List[str]:
    lines = []
    for entry in trajectory:
        if entry["min_eps"] is None:
            lines.append(f"  r={entry['r']}: {entry['status']}")
        else:
            lines.append(f"  r={entry['r']}: min_eps={entry['min_eps']:.9g}")
    return lines


@main.command("check-sos")
@_poly_options
@_solver_options
@_output_options
def cmd_check_sos(nvars, poly_text, poly_file, gap_tol, feas_tol, as_json, output):
    """Decide whether a polynomial is a sum of squares."""
    try:
        f = _load_poly(nvars, poly_text, poly_file)
        ok, cert = is_sos(f, _settings(gap_tol, feas_tol))
    except _USAGE_ERRORS as exc:
        _fail(exc)
    report = {
        "command": "check-sos",
        "nvars": f.n_vars,
        "poly": unparse(f),
        "sos": ok,
    }
    human = [f"polynomial: {report['poly']}",
             f"sum of squares: {'yes' if ok else 'no'}"]
    if cert is not None:
        report["certificate"] = {"r": cert.basis.max_degree, **cert.to_obj()}
        human.append(f"squares: {len(cert.squares)}")
        human.append(f"residual: {cert.residual_linf:.3e}")
    _emit(report, human, as_json, output)
    sys.exit(0 if ok else 1)


@main.command("epsilon-star")
@_poly_options
@click.option("-r", "relaxation_r", type=int, required=True,
              help="Half-degree of the squares basis.")
@click.option("--perturbation", default="theta-big", show_default=True)
@_solver_options
@_output_options
def cmd_epsilon_star(nvars, poly_text, poly_file, relaxation_r, perturbation,
                     gap_tol, feas_tol, as_json, output):
    """Minimal perturbation weight at a fixed degree."""
    try:
        f = _load_poly(nvars, poly_text, poly_file)
        kind, desc = _perturbation(perturbation)
        p = perturbation_polynomial(kind, f.n_vars, relaxation_r)
        res = epsilon_star(f, relaxation_r, p, _settings(gap_tol, feas_tol))
    except _USAGE_ERRORS as exc:
        _fail(exc)
    report = {
        "command": "epsilon-star",
        "nvars": f.n_vars,
        "poly": unparse(f),
        "perturbation": desc,
        **_certificate_report(res),
        "dual_moments": res.dual_moments.to_obj(),
    }
    human = [
        f"polynomial: {report['poly']}",
        f"r: {res.r}",
        f"eps_star: {res.eps_star:.9g}",
        f"min_eps: {res.min_eps:.9g}",
        f"gap: {res.gap:.3e}",
        f"certificate residual: {res.certificate.residual_linf:.3e}",
    ]
    _emit(report, human, as_json, output)
    sys.exit(0)


def _sweep_command(f, eps, kind, desc, r_max, box_scale, settings,
                   as_json, output, command):
    try:
        if command == "approximate":
            res = approximate_on_box(f, eps, box_scale, r_max, settings)
        else:
            res = minimal_r(f, eps, kind, r_max, settings)
    except NotFoundWithinRMaxError as exc:
        report = {
            "command": command,
            "nvars": f.n_vars,
            "poly": unparse(f),
            "perturbation": desc,
            "eps": eps,
            "found": False,
            "trajectory": exc.trajectory,
        }
        human = [f"no degree r <= {r_max} admits eps={eps:.9g}; trajectory:"]
        human.extend(_trajectory_lines(exc.trajectory))
        _emit(report, human, as_json, output)
        sys.exit(1)
    except _USAGE_ERRORS as exc:
        _fail(exc)
    report = {
        "command": command,
        "nvars": f.n_vars,
        "poly": unparse(f),
        "perturbation": desc,
        "eps": eps,
        "found": True,
        **_certificate_report(res),
    }
    if command == "approximate":
        report["box_scale"] = box_scale
    human = [
        f"polynomial: {report['poly']}",
        f"found r: {res.r}",
        f"min_eps at r: {res.min_eps:.9g}",
        f"certificate residual: {res.certificate.residual_linf:.3e}",
        "trajectory:",
    ]
    human.extend(_trajectory_lines(res.trajectory or []))
    _emit(report, human, as_json, output)
    sys.exit(0)


@main.command("minimal-r")
@_poly_options
@click.option("--eps", type=float, required=True, help="Perturbation weight.")
@click.option("--perturbation", default="theta-big", show_default=True)
@click.option("--r-max", type=int, default=10, show_default=True)
@_solver_options
@_output_options
def cmd_minimal_r(nvars, poly_text, poly_file, eps, perturbation, r_max,
                  gap_tol, feas_tol, as_json, output):
    """Smallest degree whose minimal weight is covered by eps."""
    try:
        f = _load_poly(nvars, poly_text, poly_file)
        kind, desc = _perturbation(perturbation)
    except _USAGE_ERRORS as exc:
        _fail(exc)
    _sweep_command(f, eps, kind, desc, r_max, 1.0,
                   _settings(gap_tol, feas_tol), as_json, output, "minimal-r")


@main.command("approximate")
@_poly_options
@click.option("--eps", type=float, required=True, help="Perturbation weight.")
@click.option("--box-scale", type=float, default=1.0, show_default=True,
              help="Half-width of the certification box [-l, l]^n.")
@click.option("--r-max", type=int, default=10, show_default=True)
@_solver_options
@_output_options
def cmd_approximate(nvars, poly_text, poly_file, eps, box_scale, r_max,
                    gap_tol, feas_tol, as_json, output):
    """Certify nonnegativity on a box via the rescaled sweep."""
    try:
        f = _load_poly(nvars, poly_text, poly_file)
    except _USAGE_ERRORS as exc:
        _fail(exc)
    _sweep_command(f, eps, THETA_BIG, {"kind": "theta-big"}, r_max, box_scale,
                   _settings(gap_tol, feas_tol), as_json, output, "approximate")


@main.command("preorder-membership")
@_poly_options
@click.option("--eps", type=float, required=True, help="Perturbation weight.")
@click.option("--perturbation", default="theta-small", show_default=True,
              type=click.Choice(["theta-big", "theta-small"]))
@click.option("--system", "system_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Semialgebraic system description file.")
@click.option("--r-max", type=int, default=10, show_default=True)
@_solver_options
@_output_options
def cmd_preorder_membership(nvars, poly_text, poly_file, eps, perturbation,
                            system_file, r_max, gap_tol, feas_tol, as_json, output):
    """Decompose f + eps*p over the system's truncated preordering."""
    try:
        with open(system_file, "r", encoding="utf-8") as handle:
            system = load_system(handle.read())
        if nvars is not None and nvars != system.n_vars:
            raise DimensionMismatchError(
                f"-n {nvars} disagrees with the system's nvars {system.n_vars}")
        f = _load_poly(system.n_vars, poly_text, poly_file)
        kind = THETA_BIG if perturbation == "theta-big" else THETA_SMALL
        cert = membership(f, eps, kind, system, r_max, _settings(gap_tol, feas_tol))
    except NotFoundWithinRMaxError as exc:
        report = {
            "command": "preorder-membership",
            "nvars": system.n_vars,
            "poly": unparse(f),
            "perturbation": {"kind": perturbation},
            "eps": eps,
            "found": False,
            "trajectory": exc.trajectory,
        }
        human = [f"no degree r <= {r_max} admits eps={eps:.9g}; trajectory:"]
        human.extend(_trajectory_lines(exc.trajectory))
        _emit(report, human, as_json, output)
        sys.exit(1)
    except _USAGE_ERRORS as exc:
        _fail(exc)
    report = {
        "command": "preorder-membership",
        "nvars": system.n_vars,
        "poly": unparse(f),
        "eps": eps,
        "found": True,
        **cert.to_obj(),
    }
    human = [
        f"polynomial: {report['poly']}",
        f"found r: {cert.r}",
        f"min_eps at r: {cert.min_eps:.9g}",
        f"terms: {len(cert.terms)}",
        f"reconstruction residual: {cert.residual_linf:.3e}",
        f"note: {cert.annotation}",
    ]
    human.extend(f"warning: {w}" for w in cert.warnings)
    _emit(report, human, as_json, output)
    sys.exit(0)


@main.command("degree-probe")
@click.option("-n", "--nvars", type=int, required=True)
@click.option("-d", "--degree", type=int, required=True,
              help="Max total degree of sampled polynomials.")
@click.option("-N", "--coeff-bound", type=float, required=True,
              help="Coefficients are uniform in [-N, N].")
@click.option("--eps", type=float, required=True)
@click.option("--samples", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--r-max", type=int, default=10, show_default=True)
@_solver_options
@_output_options
def cmd_degree_probe(nvars, degree, coeff_bound, eps, samples, seed, r_max,
                     gap_tol, feas_tol, as_json, output):
    """Estimate the certification degree over random nonnegative samples."""
    try:
        report_data = run_probe(nvars, degree, coeff_bound, eps, samples, seed,
                                r_max, _settings(gap_tol, feas_tol))
    except _USAGE_ERRORS as exc:
        _fail(exc)
    report = {"command": "degree-probe", **report_data.to_obj()}
    human = [
        f"samples: {samples}  seed: {seed}",
        f"{'idx':>4} {'status':>9} {'grid_min':>12} {'shifted':>8} {'r':>5}",
    ]
    for row in report_data.rows:
        r_text = str(row.found_r) if row.found_r is not None else "-"
        human.append(
            f"{row.index:>4} {row.status:>9} {row.grid_min:>12.5f} "
            f"{str(row.shifted):>8} {r_text:>5}")
    counts = report_data.counts()
    human.append(f"accepted: {counts['accepted']}  rejected: {counts['rejected']}  "
                 f"shifted: {counts['shifted']}  unresolved: {counts['unresolved']}")
    human.append(f"max r: {report_data.max_r}")
    _emit(report, human, as_json, output)
    sys.exit(0)


@main.command("verify")
@_poly_options
@click.option("--certificate", "certificate_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--eps", type=float, default=0.0, show_default=True,
              help="Perturbation weight the certificate claims.")
@click.option("--perturbation", default="theta-big", show_default=True)
@click.option("--residual-tol", type=float, default=1e-6, show_default=True)
@_output_options
def cmd_verify(nvars, poly_text, poly_file, certificate_file, eps,
               perturbation, residual_tol, as_json, output):
    """Re-check a serialized certificate without the solver."""
    try:
        f = _load_poly(nvars, poly_text, poly_file)
        with open(certificate_file, "r", encoding="utf-8") as handle:
            obj = json.load(handle)
        if "certificate" in obj and isinstance(obj["certificate"], dict):
            obj = {**obj, **obj["certificate"]}
        if eps != 0.0:
            kind, _ = _perturbation(perturbation)
            p = perturbation_polynomial(kind, f.n_vars, int(obj["r"]))
            target = f + p.scale(eps)
        else:
            target = f
        if "terms" in obj:
            result = verify_preorder_obj(obj, target)
        else:
            result = verify_certificate_obj(obj, target)
    except (*_USAGE_ERRORS, KeyError, json.JSONDecodeError) as exc:
        _fail(exc)
    ok = result["residual_linf"] <= residual_tol
    report = {
        "command": "verify",
        "nvars": f.n_vars,
        "poly": unparse(f),
        "eps": eps,
        **result,
        "accepted": ok,
    }
    human = [
        f"residual (gram route): {result['residual_gram']:.3e}",
        f"residual (squares route): {result['residual_squares']:.3e}",
        f"verdict: {'accepted' if ok else 'REJECTED'}",
    ]
    _emit(report, human, as_json, output)
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
