"""Dense primal-dual interior-point solver for small block SDPs.

Problem form (minimization convention):

    minimize    sum_b <C_b, X_b>  +  d . u
    subject to  sum_b <A_(i,b), X_b>  +  F[i,:] . u  =  b_i,   i = 1..m
                X_b positive semidefinite,   u free

and its dual

    maximize    b . y
    subject to  sum_i y_i A_(i,b)  +  S_b  =  C_b,   S_b PSD
                F^T y  =  d.

The iteration is Mehrotra-style predictor-corrector path following with
Nesterov-Todd scaling.  Per block the scaling matrix is

    W = L (L^T S L)^{-1/2} L^T,      X = L L^T (Cholesky),

which satisfies W S W = X, and the linearized complementarity equation is

    dX + W dS W = Rc,    Rc = sigma*mu*S^{-1} - X - symm(dXa dSa S^{-1})

with (dXa, dSa) the affine direction.  Eliminating dX and dS leaves the
Schur system in (dy, du)

    [ M   F ] [dy]   [h1]           M_ij = sum_b <A_i, W A_j W>
    [ F^T 0 ] [du] = [rf]

solved by dense Cholesky of M plus a small solve on the free block, so free
scalar variables never pass through a PSD reformulation.

Everything is deterministic: fixed initialization (identity scaled by
1 + max|b_i|), no randomization, and the same inputs take the same branch
sequence.  Infeasibility is reported heuristically when the dual objective
diverges; no Farkas certificate is produced.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import ConvergenceFailureError

log = logging.getLogger(__name__)

_SYMMETRY_TOL = 1e-12


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    NUMERICAL_TROUBLE = "NumericalTrouble"
    PRIMAL_LIKELY_INFEASIBLE = "PrimalLikelyInfeasible"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class SolverSettings:
    gap_tolerance: float = 1e-8
    feas_tolerance: float = 1e-8
    max_iterations: int = 200
    infeasibility_threshold: float = 1e8
    max_block_size: int = 400
    collect_trace: bool = False

    def __post_init__(self):
        if self.gap_tolerance <= 0 or self.feas_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.infeasibility_threshold <= 0:
            raise ValueError("infeasibility_threshold must be positive")


@dataclass
class ConstraintRow:
    """One linear equality: sum_b <blocks[b], X_b> + free . u = rhs."""

    blocks: Dict[int, np.ndarray]
    free: Optional[np.ndarray]
    rhs: float


class SdpProblem:
    """Immutable standard-form problem; build via from_rows."""

    def __init__(self, block_sizes, n_free, A, F, b, C, d):
        self.block_sizes: Tuple[int, ...] = tuple(block_sizes)
        self.n_free = int(n_free)
        self.A = A          # list over blocks of (m, nb, nb) arrays
        self.F = F          # (m, n_free)
        self.b = b          # (m,)
        self.C = C          # list of (nb, nb)
        self.d = d          # (n_free,)

    @property
    def n_constraints(self) -> int:
        return self.b.shape[0]

    @staticmethod
    def from_rows(
        block_sizes: Sequence[int],
        n_free: int,
        rows: Sequence[ConstraintRow],
        objective_blocks: Dict[int, np.ndarray],
        objective_free: Optional[np.ndarray] = None,
    ) -> "SdpProblem":
        """Validate, symmetrize, deduplicate and pack constraint rows.

        Exact duplicate rows (identical coefficients and right-hand side)
        are removed; at least one row must remain.
        """
        block_sizes = tuple(int(s) for s in block_sizes)
        if any(s < 1 for s in block_sizes):
            raise ValueError("block sizes must be positive")
        if not rows:
            raise ValueError("at least one constraint row is required")

        def checked(mat: np.ndarray, nb: int) -> np.ndarray:
            mat = np.asarray(mat, dtype=float)
            if mat.shape != (nb, nb):
                raise ValueError(f"coefficient matrix shape {mat.shape} != ({nb},{nb})")
            if np.max(np.abs(mat - mat.T), initial=0.0) > _SYMMETRY_TOL * (1 + np.max(np.abs(mat), initial=0.0)):
                raise ValueError("coefficient matrix is not symmetric")
            return 0.5 * (mat + mat.T)

        packed = []
        seen = set()
        for row in rows:
            mats = []
            for bi, nb in enumerate(block_sizes):
                mat = row.blocks.get(bi)
                mats.append(checked(mat, nb) if mat is not None else np.zeros((nb, nb)))
            fr = np.zeros(n_free)
            if row.free is not None:
                fr = np.asarray(row.free, dtype=float).reshape(n_free)
            key = (
                tuple(m.tobytes() for m in mats),
                fr.tobytes(),
                float(row.rhs).hex(),
            )
            if key in seen:
                continue
            seen.add(key)
            packed.append((mats, fr, float(row.rhs)))

        m = len(packed)
        A = [np.zeros((m, nb, nb)) for nb in block_sizes]
        F = np.zeros((m, n_free))
        b = np.zeros(m)
        for i, (mats, fr, rhs) in enumerate(packed):
            for bi in range(len(block_sizes)):
                A[bi][i] = mats[bi]
            F[i] = fr
            b[i] = rhs

        C = []
        for bi, nb in enumerate(block_sizes):
            mat = objective_blocks.get(bi)
            C.append(checked(mat, nb) if mat is not None else np.zeros((nb, nb)))
        d = np.zeros(n_free)
        if objective_free is not None:
            d = np.asarray(objective_free, dtype=float).reshape(n_free)
        return SdpProblem(block_sizes, n_free, A, F, b, C, d)


@dataclass
class SdpSolution:
    status: SolveStatus
    primal_blocks: List[np.ndarray]
    free_values: np.ndarray
    dual_vector: np.ndarray
    primal_objective: float
    dual_objective: float
    gap: float                      # relative gap |pobj - dobj| / (1 + max |obj|)
    iterations: int
    trace: Optional[List[Tuple[float, float]]] = field(default=None)


def _sym(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.T)


def _apply_A(A: List[np.ndarray], X: List[np.ndarray]) -> np.ndarray:
    out = None
    for Ab, Xb in zip(A, X):
        v = np.einsum("ijk,jk->i", Ab, Xb)
        out = v if out is None else out + v
    return out


def _apply_At(A: List[np.ndarray], y: np.ndarray) -> List[np.ndarray]:
    return [np.einsum("i,ijk->jk", y, Ab) for Ab in A]


def _chol_lower(M: np.ndarray):
    """Lower Cholesky factor in the array's own dtype, or None.

    Runs column by column with vector inner products so it works for
    longdouble, which LAPACK does not cover.
    """
    n = M.shape[0]
    L = np.zeros_like(M)
    for j in range(n):
        d = M[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0:
            return None
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def _factorize(M: np.ndarray):
    if M.dtype == np.longdouble:
        return _chol_lower(M)
    try:
        return cho_factor(M, lower=True)
    except np.linalg.LinAlgError:
        return None


def _backsolve(factor, rhs):
    if isinstance(factor, np.ndarray):
        L = factor
        y = np.array(rhs, dtype=L.dtype, copy=True)
        n = L.shape[0]
        for i in range(n):
            y[i] = (y[i] - L[i, :i] @ y[:i]) / L[i, i]
        for i in range(n - 1, -1, -1):
            y[i] = (y[i] - L[i + 1:, i] @ y[i + 1:]) / L[i, i]
        return y
    return cho_solve(factor, rhs)


def _max_step(chol_lower: np.ndarray, direction: np.ndarray) -> float:
    """Largest t with M + t*D still positive definite, M = L L^T."""
    t1 = solve_triangular(chol_lower, direction, lower=True)
    B = solve_triangular(chol_lower, t1.T, lower=True).T
    lam = float(np.linalg.eigvalsh(_sym(B))[0])
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def solve(problem: SdpProblem, settings: SolverSettings = SolverSettings()) -> SdpSolution:
    """Run the interior-point iteration on a standard-form problem."""
    if max(problem.block_sizes) > settings.max_block_size:
        raise ValueError(
            f"largest block {max(problem.block_sizes)} exceeds cap {settings.max_block_size}")

    A, F, b, C, d = problem.A, problem.F, problem.b, problem.C, problem.d
    m = problem.n_constraints
    k = problem.n_free
    sizes = problem.block_sizes
    nu = float(sum(sizes))

    b_scale = 1.0 + np.max(np.abs(b), initial=0.0)
    c_scale = 1.0 + max(np.max(np.abs(Cb), initial=0.0) for Cb in C)
    d_scale = 1.0 + np.max(np.abs(d), initial=0.0)

    eta = b_scale
    X = [eta * np.eye(nb) for nb in sizes]
    S = [eta * np.eye(nb) for nb in sizes]
    y = np.zeros(m)
    u = np.zeros(k)

    # extended-precision direction algebra for small systems; larger ones
    # stay in double where LAPACK-backed routines dominate the cost
    use_extended = m <= 96 and max(sizes) <= 28
    work_dtype = np.longdouble if use_extended else np.float64
    A_w = [Ab.astype(work_dtype) for Ab in A]

    trace: Optional[List[Tuple[float, float]]] = [] if settings.collect_trace else None
    status = SolveStatus.ITERATION_LIMIT
    iterations = 0

    def objectives() -> Tuple[float, float]:
        pobj = sum(float(np.tensordot(Cb, Xb)) for Cb, Xb in zip(C, X)) + float(d @ u)
        dobj = float(b @ y)
        return pobj, dobj

    def rel_gap(pobj: float, dobj: float) -> float:
        return abs(pobj - dobj) / (1.0 + max(abs(pobj), abs(dobj)))

    for iterations in range(1, settings.max_iterations + 1):
        rp = b - _apply_A(A, X) - F @ u
        Aty = _apply_At(A, y)
        Rd = [Cb - At - Sb for Cb, At, Sb in zip(C, Aty, S)]
        rf = d - F.T @ y

        pobj, dobj = objectives()
        if trace is not None:
            trace.append((pobj, dobj))

        prim_res = np.max(np.abs(rp)) / b_scale
        dual_res = max(np.max(np.abs(Rb), initial=0.0) for Rb in Rd) / c_scale
        free_res = np.max(np.abs(rf), initial=0.0) / d_scale
        gap = rel_gap(pobj, dobj)

        log.debug("iter %d pobj=%.9g dobj=%.9g prim=%.2e dual=%.2e free=%.2e",
                  iterations, pobj, dobj, prim_res, dual_res, free_res)

        if (gap <= settings.gap_tolerance
                and prim_res <= settings.feas_tolerance
                and dual_res <= settings.feas_tolerance
                and free_res <= settings.feas_tolerance):
            status = SolveStatus.OPTIMAL
            break
        if dobj > settings.infeasibility_threshold:
            status = SolveStatus.PRIMAL_LIKELY_INFEASIBLE
            break

        # Nesterov-Todd scaling per block, via the SVD of Ls^T Lx: with
        # Ls^T Lx = U Sig V^T one has W = Lx V Sig^{-1} V^T Lx^T, computed
        # without squaring the conditioning of either factor.
        try:
            Lx = [np.linalg.cholesky(Xb) for Xb in X]
            Ls = [np.linalg.cholesky(Sb) for Sb in S]
        except np.linalg.LinAlgError:
            status = SolveStatus.NUMERICAL_TROUBLE
            break
        W = []
        ok = True
        for Lxb, Lsb in zip(Lx, Ls):
            try:
                _, sig, Vt = np.linalg.svd(Lsb.T @ Lxb)
            except np.linalg.LinAlgError:
                ok = False
                break
            if sig[-1] <= 0:
                ok = False
                break
            G = Lxb @ (Vt.T * (1.0 / np.sqrt(sig)))
            W.append(_sym(G @ G.T))
        if not ok:
            status = SolveStatus.NUMERICAL_TROUBLE
            break

        # Schur complement M_ij = sum_b <A_i, W A_j W>.  Small systems run
        # the whole direction algebra in extended precision: the Schur
        # conditioning grows with the inverse barrier parameter and plain
        # double stops short of tight tolerances on ill-conditioned bases.
        W_w = [Wb.astype(work_dtype) for Wb in W]
        Mmat = np.zeros((m, m), dtype=work_dtype)
        for Ab, Wb in zip(A_w, W_w):
            T = np.einsum("pq,jqr,rs->jps", Wb, Ab, Wb, optimize=True)
            Mmat += np.einsum("ipq,jpq->ij", Ab, T, optimize=True)

        # Jacobi-scaled Cholesky with a ridge escalation fallback
        dg = np.diag(Mmat).copy()
        dg[dg <= 0] = 1.0
        D = np.sqrt(dg)
        Msc = Mmat / np.outer(D, D)
        factor = None
        for ridge in (0.0, 1e-14, 1e-12, 1e-10, 1e-8):
            factor = _factorize(Msc + ridge * np.eye(m, dtype=work_dtype))
            if factor is not None:
                break
        if factor is None:
            status = SolveStatus.NUMERICAL_TROUBLE
            break

        def m_solve(rhs):
            scale = D if rhs.ndim == 1 else D[:, None]
            return _backsolve(factor, rhs / scale) / scale

        F_w = F.astype(work_dtype)

        def solve_kkt(h1, h2) -> Tuple[np.ndarray, np.ndarray]:
            def once(r1, r2):
                if k == 0:
                    return m_solve(r1), np.zeros(0, dtype=work_dtype)
                Z = m_solve(F_w)
                G = F_w.T @ Z
                try:
                    du = np.linalg.solve(
                        G.astype(float), np.asarray(Z.T @ r1 - r2, dtype=float))
                except np.linalg.LinAlgError:
                    raise _KktFailure()
                dy = m_solve(r1 - F_w @ du)
                return dy, du.astype(work_dtype)

            dy, du = once(h1, h2)
            for _ in range(3):
                r1 = h1 - Mmat @ dy - (F_w @ du if k else 0.0)
                r2 = (h2 - F_w.T @ dy) if k else np.zeros(0, dtype=work_dtype)
                if np.max(np.abs(r1), initial=0.0) <= 1e-15 * (1.0 + np.max(np.abs(h1), initial=0.0)):
                    break
                ddy, ddu = once(r1, r2)
                dy = dy + ddy
                du = du + ddu
            return dy, du

        def direction(Rc: List[np.ndarray]) -> Tuple:
            h1 = rp.astype(work_dtype)
            Rc_w = [Rcb.astype(work_dtype) for Rcb in Rc]
            Rd_w = [Rdb.astype(work_dtype) for Rdb in Rd]
            for Ab, Rcb, Rdb, Wb in zip(A_w, Rc_w, Rd_w, W_w):
                h1 -= np.einsum("ijk,jk->i", Ab, Rcb)
                h1 += np.einsum("ijk,jk->i", Ab, _sym(Wb @ Rdb @ Wb))
            dy, du = solve_kkt(h1, rf.astype(work_dtype))
            dS_w = [
                _sym(Rdb - np.einsum("i,ijk->jk", dy, Ab))
                for Rdb, Ab in zip(Rd_w, A_w)
            ]
            dX_w = [
                _sym(Rcb - Wb @ dSb @ Wb)
                for Rcb, dSb, Wb in zip(Rc_w, dS_w, W_w)
            ]
            dX = [np.asarray(Db, dtype=float) for Db in dX_w]
            dS = [np.asarray(Db, dtype=float) for Db in dS_w]
            return dX, dS, np.asarray(dy, dtype=float), np.asarray(du, dtype=float)

        mu = sum(float(np.tensordot(Xb, Sb)) for Xb, Sb in zip(X, S)) / nu

        try:
            # predictor (affine scaling)
            dXa, dSa, _, _ = direction([-Xb for Xb in X])
            ap_aff = min(1.0, min(_max_step(L, D) for L, D in zip(Lx, dXa)))
            ad_aff = min(1.0, min(_max_step(L, D) for L, D in zip(Ls, dSa)))
            mu_aff = sum(
                float(np.tensordot(Xb + ap_aff * dXb, Sb + ad_aff * dSb))
                for Xb, dXb, Sb, dSb in zip(X, dXa, S, dSa)) / nu
            sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)

            Sinv = [cho_solve((Lsb, True), np.eye(Lsb.shape[0])) for Lsb in Ls]

            # corrector with Mehrotra second-order term
            Rc = [
                sigma * mu * Sib - Xb - _sym(dXb @ dSb @ Sib)
                for Xb, Sib, dXb, dSb in zip(X, Sinv, dXa, dSa)
            ]
            dX, dS, dy, du = direction(Rc)
            ap_raw = min(_max_step(L, D) for L, D in zip(Lx, dX))
            ad_raw = min(_max_step(L, D) for L, D in zip(Ls, dS))

            # corrector rejection: when the second-order term shortens the
            # step badly, fall back to a centered first-order direction
            if min(ap_raw, ad_raw) < 0.2 * min(ap_aff, ad_aff):
                sigma = max(sigma, 0.5)
                Rc = [sigma * mu * Sib - Xb for Xb, Sib in zip(X, Sinv)]
                dX, dS, dy, du = direction(Rc)
                ap_raw = min(_max_step(L, D) for L, D in zip(Lx, dX))
                ad_raw = min(_max_step(L, D) for L, D in zip(Ls, dS))
        except _KktFailure:
            status = SolveStatus.NUMERICAL_TROUBLE
            break

        # adaptive fraction to boundary: conservative when the affine step
        # is short, aggressive when a full step is available
        frac = 0.9 + 0.09 * min(1.0, min(ap_aff, ad_aff))
        ap = min(1.0, frac * ap_raw)
        ad = min(1.0, frac * ad_raw)
        log.debug("    sigma=%.3e mu=%.3e ap=%.3e ad=%.3e", sigma, mu, ap, ad)
        if max(ap, ad) < 1e-10:
            status = SolveStatus.NUMERICAL_TROUBLE
            break

        # backtrack if rounding pushed an iterate off the PD cone
        for _ in range(60):
            Xn = [_sym(Xb + ap * dXb) for Xb, dXb in zip(X, dX)]
            Sn = [_sym(Sb + ad * dSb) for Sb, dSb in zip(S, dS)]
            try:
                for Mb in (*Xn, *Sn):
                    np.linalg.cholesky(Mb)
                break
            except np.linalg.LinAlgError:
                ap *= 0.5
                ad *= 0.5
        else:
            status = SolveStatus.NUMERICAL_TROUBLE
            break

        X = Xn
        u = u + ap * du
        y = y + ad * dy
        S = Sn

    pobj, dobj = objectives()
    return SdpSolution(
        status=status,
        primal_blocks=X,
        free_values=u,
        dual_vector=y,
        primal_objective=pobj,
        dual_objective=dobj,
        gap=rel_gap(pobj, dobj),
        iterations=iterations,
        trace=trace,
    )


class _KktFailure(Exception):
    pass


# -- dense symmetric eigen helpers -------------------------------------------


def _check_symmetric(mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    scale = 1.0 + np.max(np.abs(mat), initial=0.0)
    if np.max(np.abs(mat - mat.T), initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    return _sym(mat)

def min_eigenvalue(mat: np.ndarray) -> float:
    mat = _check_symmetric(mat)
    try:
        return float(np.linalg.eigvalsh(mat)[0])
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(str(exc)) from exc


def eigendecompose(mat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues ascending with orthonormal eigenvector columns."""
    mat = _check_symmetric(mat)
    try:
        w, Q = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(str(exc)) from exc
    return w, Q


# -- debug dump ----------------------------------------------------------------


def dump_problem(problem: SdpProblem) -> str:
    """Sparse text rendering for cross-checks against external solvers.

    Line 1: `blocks n1 n2 ...`; line 2: `free k`.  Then one line per nonzero
    upper-triangle coefficient, `i b row col value`, where i = 0 denotes the
    objective and i = 1..m the constraints, and b = 0 addresses free-variable
    coefficients (col fixed to 0).  Right-hand sides follow as `rhs i value`.
    Not a stable interchange format.
    """
    lines = ["blocks " + " ".join(str(s) for s in problem.block_sizes),
             f"free {problem.n_free}"]

    def emit(i: int, mats: List[np.ndarray], fr: Optional[np.ndarray]) -> None:
        if fr is not None:
            for j, v in enumerate(fr):
                if v != 0.0:
                    lines.append(f"{i} 0 {j} 0 {float(v)!r}")
        for bi, mat in enumerate(mats):
            rows, cols = np.nonzero(np.triu(mat))
            for r, c in zip(rows, cols):
                lines.append(f"{i} {bi + 1} {int(r)} {int(c)} {float(mat[r, c])!r}")

    emit(0, problem.C, problem.d)
    for i in range(problem.n_constraints):
        emit(i + 1, [Ab[i] for Ab in problem.A], problem.F[i])
    for i in range(problem.n_constraints):
        lines.append(f"rhs {i + 1} {float(problem.b[i])!r}")
    return "\n".join(lines) + "\n"
