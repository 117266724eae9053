"""Dense bounded-variable simplex, phase-1 feasibility check and a bisection driver.

Programs are stated in a canonical maximisation form::

    maximize    c @ x
    subject to  A[i] @ x  (<=, =, >=)  b[i]
                lower <= x <= upper        (entries may be +/- inf)

Internally every row ``i`` receives a logical variable ``w_i = A[i] @ x`` whose
bounds encode the relation, so the working system is ``A x - w = 0`` with all
variables boxed.  The basis inverse is kept as an explicit dense matrix with
rank-one (product form) updates and periodic reinversion.  Pricing is Dantzig
with a two-pass Harris ratio test, falling back to Bland's rule once the
degenerate-pivot count exceeds ``stall_factor * (rows + cols)``.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

LE, EQ, GE = "<=", "=", ">="
_RELATIONS = (LE, EQ, GE)


class LpError(Exception):
    """Malformed program (dimension mismatch, inverted bounds, bad relation)."""


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_ERROR = "numerical_error"


@dataclass(frozen=True)
class SolverOptions:
    pivot_tol: float = 1e-10
    feas_tol: float = 1e-8
    dual_tol: float = 1e-9
    harris_tol: float = 1e-9
    stall_factor: int = 5
    refactor_every: int = 400
    max_iter_factor: int = 60

    @classmethod
    def from_env(cls) -> "SolverOptions":
        """Defaults overridden by ``SHARED_ESS_PIVOT_TOL`` / ``_FEAS_TOL`` / ``_DUAL_TOL``."""
        kw = {}
        for name in ("pivot_tol", "feas_tol", "dual_tol"):
            raw = os.environ.get("SHARED_ESS_" + name.upper())
            if raw:
                kw[name] = float(raw)
        return cls(**kw)


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Maximisation LP with explicit infinite bounds.

    ``matrix`` is a dense ``(rows, cols)`` array; ``relations`` holds one of
    ``"<="``, ``"="``, ``">="`` per row.
    """

    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    matrix: np.ndarray
    relations: tuple[str, ...]
    rhs: np.ndarray
    var_names: tuple[str, ...] | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.size
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        A = np.asarray(self.matrix, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        b = np.asarray(self.rhs, dtype=float).ravel()
        rel = tuple(self.relations)
        if lo.size != n or hi.size != n:
            raise LpError(f"bounds have length {lo.size}/{hi.size}, expected {n}")
        if A.ndim != 2 or A.shape[1] != n:
            raise LpError(f"constraint matrix has shape {A.shape}, expected (*, {n})")
        if b.size != A.shape[0] or len(rel) != A.shape[0]:
            raise LpError("rhs/relations length does not match constraint rows")
        bad = [r for r in rel if r not in _RELATIONS]
        if bad:
            raise LpError(f"unknown relation {bad[0]!r}")
        if np.any(lo > hi):
            j = int(np.flatnonzero(lo > hi)[0])
            raise LpError(f"variable {j} has lower bound {lo[j]} > upper bound {hi[j]}")
        if np.any(np.isnan(c)) or np.any(np.isnan(A)) or np.any(~np.isfinite(b)):
            raise LpError("objective, matrix and rhs must be finite")
        if np.any(np.isinf(c)) or np.any(np.isinf(A)):
            raise LpError("objective and matrix must be finite")
        if self.var_names is not None and len(self.var_names) != n:
            raise LpError("var_names length does not match objective")
        for name, val in (("objective", c), ("lower", lo), ("upper", hi), ("matrix", A), ("rhs", b)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "relations", rel)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def constraints(self):
        for row, rel, rhs in zip(self.matrix, self.relations, self.rhs):
            yield row, rel, float(rhs)

    def with_objective(self, objective) -> "LinearProgram":
        return LinearProgram(objective, self.lower, self.upper, self.matrix,
                             self.relations, self.rhs, self.var_names)

    def residual(self, x) -> float:
        """Largest violation of any row relation or variable bound at ``x``."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        if self.num_vars:
            worst = max(worst, float(np.max(np.maximum(self.lower - x, 0.0))),
                        float(np.max(np.maximum(x - self.upper, 0.0))))
        if self.num_rows:
            act = self.matrix @ x
            rel = np.asarray(self.relations)
            gap = act - self.rhs
            viol = np.where(rel == LE, np.maximum(gap, 0.0),
                            np.where(rel == GE, np.maximum(-gap, 0.0), np.abs(gap)))
            worst = max(worst, float(viol.max()))
        return worst

    def rhs_norm(self) -> float:
        return float(np.max(np.abs(self.rhs))) if self.num_rows else 0.0


@dataclass
class LpSolution:
    status: Status
    primal: np.ndarray
    objective_value: float
    max_primal_residual: float
    dual_gap_bound: float
    dual_bound: float = math.nan
    iterations: int = 0
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class FeasibilityResult:
    feasible: bool
    point: np.ndarray | None
    max_residual: float
    iterations: int = 0
    status: Status = Status.OPTIMAL

    def __bool__(self):
        return self.feasible


class _Breakdown(Exception):
    pass


# ---------------------------------------------------------------------------
# Tableau-free revised simplex


class _Simplex:
    def __init__(self, lp: LinearProgram, opts: SolverOptions):
        self.lp = lp
        self.opts = opts
        self.n = lp.num_vars
        A, rlo, rhi, infeasible_row = _merge_rows(lp)
        self.presolve_infeasible = infeasible_row
        self.m = A.shape[0]
        self.scale = 1.0 + lp.rhs_norm()
        self.ftol = opts.feas_tol * self.scale
        self.iterations = 0

        n, m = self.n, self.m
        lo = np.concatenate([lp.lower, rlo])
        hi = np.concatenate([lp.upper, rhi])
        x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
        x[n:] = 0.0
        act = A @ x[:n] if m else np.zeros(0)

        # Rows whose activity at the starting point violates the logical's
        # bounds get an artificial column; the logical sits at the nearer bound.
        below = act < rlo - self.ftol * 1e-3
        above = act > rhi + self.ftol * 1e-3
        bad = np.flatnonzero(below | above)
        self.nart = bad.size
        sign = np.where(above[bad], -1.0, 1.0)
        # row i:  A x - w + sign * art = 0, art = (w - A x) / sign >= 0
        target = np.where(above[bad], rhi[bad], rlo[bad])

        cols = [sp.csc_matrix(A), -sp.identity(m, format="csc")]
        if self.nart:
            art = sp.csc_matrix((sign, (bad, np.arange(self.nart))), shape=(m, self.nart))
            cols.append(art)
        self.Af = sp.hstack(cols, format="csc")
        self.Af.sort_indices()
        self.AT = self.Af.T.tocsr()
        ncol = n + m + self.nart
        self.ncol = ncol
        self.lo = np.concatenate([lo, np.zeros(self.nart)])
        self.hi = np.concatenate([hi, np.full(self.nart, np.inf)])
        self.x = np.concatenate([x, np.zeros(self.nart)])

        head = n + np.arange(m)
        if self.nart:
            self.x[n + bad] = target
            head[bad] = n + m + np.arange(self.nart)
        self.head = head
        self.basic = np.zeros(ncol, dtype=bool)
        self.basic[head] = True
        self.x[n:n + m] = np.where(self.basic[n:n + m], act, self.x[n:n + m])
        self.Binv = None
        self.cost = np.zeros(ncol)
        self.d = np.zeros(ncol)
        self.stall_limit = opts.stall_factor * (m + n)
        self.max_iter = max(1000, opts.max_iter_factor * (m + n))
        self._refactor()

    # -- linear algebra ------------------------------------------------------

    def _refactor(self):
        try:
            self.Binv = self._invert_basis()
        except np.linalg.LinAlgError as exc:
            raise _Breakdown(f"singular basis: {exc}") from exc
        if not np.all(np.isfinite(self.Binv)):
            raise _Breakdown("non-finite basis inverse")
        self.since_refactor = 0
        self._recompute_primal()
        self._recompute_duals()

    def _invert_basis(self):
        """Dense inverse exploiting the unit (logical/artificial) basis columns.

        With structural basics ``S`` occupying rows ``R`` and unit columns
        ``sigma_i e_i`` covering the remaining rows ``U``, only the square block
        ``A[R, S]`` needs a dense inverse.
        """
        m, n = self.m, self.n
        Binv = np.zeros((m, m))
        if m == 0:
            return Binv
        head = self.head
        unit = head >= n
        upos = np.flatnonzero(unit)
        spos = np.flatnonzero(~unit)
        ucols = head[upos]
        # row covered by each unit column, and its scale
        urow = np.where(ucols < n + m, ucols - n, 0)
        usig = np.full(upos.size, -1.0)
        art = ucols >= n + m
        if art.any():
            sub = self.Af[:, ucols[art]]
            urow[art] = sub.indices
            usig[art] = sub.data
        covered = np.zeros(m, dtype=bool)
        covered[urow] = True
        R = np.flatnonzero(~covered)
        if R.size != spos.size:
            raise np.linalg.LinAlgError("unit columns do not leave a square block")
        if spos.size:
            AS = self.Af[:, head[spos]]
            inv_RS = np.linalg.inv(AS[R].toarray())
            Binv[np.ix_(spos, R)] = inv_RS
            AUS = AS[urow]
            Binv[np.ix_(upos, R)] = -(AUS @ inv_RS) / usig[:, None]
        Binv[upos, urow] = 1.0 / usig
        return Binv

    def _recompute_primal(self):
        if self.m == 0:
            return
        xn = np.where(self.basic, 0.0, self.x)
        self.x[self.head] = -(self.Binv @ (self.Af @ xn))

    def _recompute_duals(self):
        if self.m == 0:
            self.d = self.cost.copy()
            return
        y = self.cost[self.head] @ self.Binv
        self.d = self.cost - self.AT @ y
        self.d[self.head] = 0.0

    def _column(self, j):
        a, b = self.Af.indptr[j], self.Af.indptr[j + 1]
        idx = self.Af.indices[a:b]
        return self.Binv[:, idx] @ self.Af.data[a:b]

    def _pivot(self, r, q, w):
        piv = w[r]
        rho = self.Binv[r].copy()
        alpha = self.AT @ rho
        dq = self.d[q]
        self.d -= (dq / piv) * alpha
        nz = np.flatnonzero(np.abs(w) > 1e-14)
        rowp = rho / piv
        if nz.size:
            self.Binv[nz] -= np.outer(w[nz], rowp)
        self.Binv[r] = rowp
        leaving = self.head[r]
        self.basic[leaving] = False
        self.basic[q] = True
        self.head[r] = q
        self.d[self.head] = 0.0
        self.since_refactor += 1

    # -- iteration -----------------------------------------------------------

    def _choose_entering(self, bland, dtol):
        nb = ~self.basic
        d = self.d
        inc = nb & (d > dtol) & (self.x < self.hi)
        dec = nb & (d < -dtol) & (self.x > self.lo)
        score = np.where(inc, d, 0.0) - np.where(dec, d, 0.0)
        if bland:
            cand = np.flatnonzero(score)
            return int(cand[0]) if cand.size else -1
        q = int(np.argmax(score))
        return q if score[q] > 0.0 else -1

    def _ratio(self, w, direction, bland):
        """Returns (theta, leaving row or -1, leaving bound value)."""
        opts = self.opts
        delta = -direction * w
        xb = self.x[self.head]
        lob = self.lo[self.head]
        hib = self.hi[self.head]
        dec = delta < -opts.pivot_tol
        inc = delta > opts.pivot_tol
        room = np.full(self.m, np.inf)
        room[dec] = xb[dec] - lob[dec]
        room[inc] = hib[inc] - xb[inc]
        mag = np.abs(delta)
        active = (dec | inc) & np.isfinite(room)
        if not active.any():
            return math.inf, -1, 0.0
        idx = np.flatnonzero(active)
        rm = np.maximum(room[idx], 0.0)
        mg = mag[idx]
        if bland:
            th = rm / mg
            tmin = th.min()
            ties = idx[th <= tmin + 1e-12 * (1.0 + tmin)]
            # smallest variable index among tied basics
            r = int(ties[np.argmin(self.head[ties])])
            theta = tmin
        else:
            tmax = ((rm + opts.harris_tol) / mg).min()
            th = rm / mg
            ok = th <= tmax
            sel = idx[ok]
            r = int(sel[np.argmax(mag[sel])])
            theta = max(room[r], 0.0) / mag[r]
        bound = lob[r] if dec[r] else hib[r]
        return theta, r, bound

    def run(self, cost) -> Status:
        """Maximise ``cost @ x`` from the current basic feasible point."""
        self.cost = np.asarray(cost, dtype=float)
        self._recompute_duals()
        cscale = float(np.max(np.abs(self.cost))) if self.ncol else 0.0
        dtol = self.opts.dual_tol * (cscale if cscale > 0 else 1.0)
        bland = False
        stall = 0
        verified = False
        while True:
            if self.iterations >= self.max_iter:
                raise _Breakdown(f"iteration limit {self.max_iter} reached")
            if self.since_refactor >= self.opts.refactor_every:
                self._refactor()
            q = self._choose_entering(bland, dtol)
            if q < 0:
                if verified:
                    return Status.OPTIMAL
                # confirm with a fresh factorisation before declaring optimality
                self._refactor()
                verified = True
                continue
            verified = False
            direction = 1.0 if self.d[q] > 0 else -1.0
            w = self._column(q)
            theta, r, bound = self._ratio(w, direction, bland)
            flip = self.hi[q] - self.lo[q]
            if math.isinf(theta) and math.isinf(flip):
                return Status.UNBOUNDED
            self.iterations += 1
            if flip <= theta:
                theta = flip
                self.x[self.head] -= direction * theta * w
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
            else:
                self.x[self.head] -= direction * theta * w
                self.x[q] += direction * theta
                leaving = self.head[r]
                self._pivot(r, q, w)
                self.x[leaving] = bound
            if theta <= 1e-12:
                stall += 1
                if not bland and stall > self.stall_limit:
                    log.debug("switching to Bland's rule after %d degenerate pivots", stall)
                    bland = True
            else:
                stall = 0
                bland = False
            if self.since_refactor and self.since_refactor % 50 == 0:
                self._recompute_primal()
                self._recompute_duals()

    # -- phases --------------------------------------------------------------

    def phase1(self) -> bool:
        if self.nart == 0:
            return True
        cost = np.zeros(self.ncol)
        cost[self.n + self.m:] = -1.0
        self.run(cost)
        infeas = float(np.sum(np.maximum(self.x[self.n + self.m:], 0.0)))
        if infeas > self.ftol:
            return False
        self.hi[self.n + self.m:] = 0.0
        nb = ~self.basic[self.n + self.m:]
        self.x[self.n + self.m:][nb] = 0.0
        return True

    def structural(self):
        return self.x[: self.n].copy()

    def dual_bound(self):
        """Weak-duality upper bound on ``cost @ x`` from the current multipliers."""
        self._recompute_duals()
        d = self.d
        cscale = float(np.max(np.abs(self.cost))) if self.ncol else 0.0
        dtol = self.opts.dual_tol * (cscale if cscale > 0 else 1.0)
        small = np.abs(d) <= dtol
        bound = np.where(d > 0, self.hi, self.lo)
        with np.errstate(invalid="ignore", over="ignore"):
            contrib = np.where(small & self.basic, d * self.x, d * bound)
        # tiny reduced costs against an infinite side carry no weight
        contrib = np.where(small & ~np.isfinite(bound), 0.0, contrib)
        if not np.all(np.isfinite(contrib)):
            return math.inf
        return float(np.sum(contrib))


def _merge_rows(lp: LinearProgram):
    """Collapse identical coefficient rows into one ranged row.

    Returns the reduced matrix, logical lower/upper bounds, and a flag for an
    empty or merged row whose bounds are contradictory.
    """
    m = lp.num_rows
    n = lp.num_vars
    rel = np.asarray(lp.relations)
    b = lp.rhs
    lo = np.where(rel == LE, -np.inf, b)
    hi = np.where(rel == GE, np.inf, b)
    if m == 0:
        return np.zeros((0, n)), np.zeros(0), np.zeros(0), False
    groups: dict[bytes, int] = {}
    inverse = np.empty(m, dtype=int)
    for i, row in enumerate(lp.matrix):
        inverse[i] = groups.setdefault(row.tobytes(), len(groups))
    k = len(groups)
    _, first = np.unique(inverse, return_index=True)
    uniq = lp.matrix[first]
    rlo = np.full(k, -np.inf)
    rhi = np.full(k, np.inf)
    np.maximum.at(rlo, inverse, lo)
    np.minimum.at(rhi, inverse, hi)
    tol = 1e-9 * (1.0 + lp.rhs_norm())
    bad = rlo > rhi + tol
    empty = ~np.any(uniq != 0.0, axis=1)
    bad |= empty & ((rlo > tol) | (rhi < -tol))
    keep = ~empty
    uniq, rlo, rhi = uniq[keep], rlo[keep], rhi[keep]
    crossed = rlo > rhi
    mid = 0.5 * (rlo + rhi)
    rlo = np.where(crossed, mid, rlo)
    rhi = np.where(crossed, mid, rhi)
    return uniq, rlo, rhi, bool(bad.any())


def _finish(lp: LinearProgram, engine: _Simplex, status: Status, message=""):
    x = engine.structural()
    obj = float(lp.objective @ x)
    res = lp.residual(x)
    gap = math.nan
    dual = math.nan
    if status is Status.OPTIMAL:
        dual = engine.dual_bound()
        gap = max(dual - obj, 0.0) if math.isfinite(dual) else math.inf
    return LpSolution(status, x, obj, res, gap, dual, engine.iterations, message)


def _infeasible(lp, iterations=0, message="phase 1 optimum has positive infeasibility"):
    return LpSolution(Status.INFEASIBLE, np.full(lp.num_vars, np.nan), math.nan,
                      math.inf, math.nan, math.nan, iterations, message)


def solve_lp(lp: LinearProgram, options: SolverOptions | None = None) -> LpSolution:
    """Solve ``lp`` to optimality or report infeasibility/unboundedness.

    An optimal answer is returned only after a fresh reinversion confirms the
    reduced-cost conditions and the primal residual is within
    ``feas_tol * (1 + max|rhs|)``; anything else is ``NUMERICAL_ERROR``.
    """
    opts = options or SolverOptions.from_env()
    engine = _Simplex(lp, opts)
    if engine.presolve_infeasible:
        return _infeasible(lp, message="contradictory duplicate or empty rows")
    try:
        if not engine.phase1():
            return _infeasible(lp, engine.iterations)
        cost = np.zeros(engine.ncol)
        cost[: engine.n] = lp.objective
        status = engine.run(cost)
    except _Breakdown as exc:
        return LpSolution(Status.NUMERICAL_ERROR, engine.structural(), math.nan, math.inf,
                          math.nan, math.nan, engine.iterations, str(exc))
    sol = _finish(lp, engine, status)
    if status is Status.OPTIMAL:
        tol = opts.feas_tol * engine.scale
        gap_tol = opts.feas_tol * (1.0 + abs(sol.objective_value))
        if sol.max_primal_residual > tol or not sol.dual_gap_bound <= gap_tol:
            sol.status = Status.NUMERICAL_ERROR
            sol.message = (f"certificate failed: residual {sol.max_primal_residual:.3g}, "
                           f"dual gap {sol.dual_gap_bound:.3g}")
    return sol


def check_feasibility(lp: LinearProgram, options: SolverOptions | None = None) -> FeasibilityResult:
    """Phase-1 only: find any point satisfying the constraints of ``lp``."""
    opts = options or SolverOptions.from_env()
    engine = _Simplex(lp, opts)
    if engine.presolve_infeasible:
        return FeasibilityResult(False, None, math.inf, 0, Status.INFEASIBLE)
    try:
        ok = engine.phase1()
    except _Breakdown:
        return FeasibilityResult(False, None, math.inf, engine.iterations, Status.NUMERICAL_ERROR)
    if not ok:
        return FeasibilityResult(False, None, math.inf, engine.iterations, Status.INFEASIBLE)
    x = engine.structural()
    res = lp.residual(x)
    if res > opts.feas_tol * engine.scale:
        return FeasibilityResult(False, x, res, engine.iterations, Status.NUMERICAL_ERROR)
    return FeasibilityResult(True, x, res, engine.iterations)


def bisect_max(feasible_at: Callable[[float], bool], t_lo: float, t_hi: float, tol: float) -> float:
    """Largest ``t`` in ``[t_lo, t_hi]`` accepted by a monotone predicate, to within ``tol``.

    ``feasible_at(t_lo)`` must hold.  On return ``feasible_at(t)`` is true and
    either ``t == t_hi`` or some ``t' <= t + tol`` was rejected.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if t_hi < t_lo:
        raise ValueError(f"empty bracket [{t_lo}, {t_hi}]")
    if not feasible_at(t_lo):
        raise ValueError(f"predicate is false at the lower end t_lo={t_lo}")
    if t_hi == t_lo or feasible_at(t_hi):
        return t_hi
    lo, hi = t_lo, t_hi
    while hi - lo > tol:
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        if feasible_at(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_bisection_steps(t_lo: float, t_hi: float, tol: float) -> int:
    """Upper bound on predicate evaluations made by :func:`bisect_max`."""
    if t_hi <= t_lo:
        return 2
    return max(0, math.ceil(math.log2((t_hi - t_lo) / tol))) + 2


def format_lp(lp: LinearProgram) -> str:
    """Plain-text dump: objective, bounds, then one constraint per line.

    Only nonzero coefficients are written, as ``coef*name`` terms; numbers use
    the shortest form that reads back exactly.
    """
    names = lp.var_names or tuple(f"x{j}" for j in range(lp.num_vars))

    def terms(row):
        nz = np.flatnonzero(row)
        if nz.size == 0:
            return "0"
        return " ".join(f"{row[j]:+}*{names[j]}" for j in nz)

    lines = [f"# vars {lp.num_vars} rows {lp.num_rows}", "maximize " + terms(lp.objective), "bounds"]
    for j, name in enumerate(names):
        lines.append(f"  {lp.lower[j]} <= {name} <= {lp.upper[j]}")
    lines.append("subject to")
    for i, (row, rel, rhs) in enumerate(lp.constraints):
        lines.append(f"  r{i}: {terms(row)} {rel} {rhs}")
    return "\n".join(lines) + "\n"


def parse_lp_dump(text: str) -> LinearProgram:
    """Inverse of :func:`format_lp`."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    n, m = int(head[2]), int(head[4])
    names: list[str] = []
    lower = np.zeros(n)
    upper = np.zeros(n)
    i = lines.index("bounds") + 1
    for j in range(n):
        lo_s, _, name, _, hi_s = lines[i + j].split()
        names.append(name)
        lower[j], upper[j] = float(lo_s), float(hi_s)
    index = {nm: j for j, nm in enumerate(names)}

    def parse_terms(tokens: Sequence[str]):
        row = np.zeros(n)
        for tok in tokens:
            if tok == "0":
                continue
            coef, name = tok.split("*", 1)
            row[index[name]] = float(coef)
        return row

    objective = parse_terms(lines[1].split()[1:])
    A = np.zeros((m, n))
    rel, rhs = [], []
    start = lines.index("subject to") + 1
    for k in range(m):
        toks = lines[start + k].split()[1:]
        A[k] = parse_terms(toks[:-2])
        rel.append(toks[-2])
        rhs.append(float(toks[-1]))
    return LinearProgram(objective, lower, upper, A, tuple(rel), np.array(rhs), tuple(names))
