"""Dense linear programming and the cutting-plane driver

``solve_lp`` is a two-phase revised simplex on numpy arrays (Dantzig pricing,
Bland's rule once pivots stall). ``cutting_plane`` adds separator cuts to a
master LP until none is violated; the cut pool is what the configuration LP
solvers turn back into primal columns.

Duals are shadow prices: d(optimal value)/d(rhs) for each constraint, in the
LP's own sense.
"""
from dataclasses import dataclass, field
from itertools import count
from typing import Callable, Dict, Hashable, List, Optional, Sequence
import logging
import os

import numpy as np

from universal_cover.config import get_settings
from universal_cover.errors import InvalidInputError, LPInfeasibleError, LPUnboundedError, SolverError

logger = logging.getLogger('universal_cover')

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-8
COST_TOL = 1e-9
CUT_TOL = 1e-7
DEGENERATE_SWITCH = 50

RELATIONS = ('<=', '>=', '=')

_dump_counter = count()


@dataclass
class Constraint:
    """Sparse row: sum(coeffs[j] * x_j) <relation> rhs"""
    coeffs: Dict[int, float]
    relation: str
    rhs: float
    tag: Optional[Hashable] = None

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise InvalidInputError(f"Unknown relation '{self.relation}'")

    def activity(self, x: np.ndarray) -> float:
        return float(sum(c * x[j] for j, c in self.coeffs.items()))

    def violation(self, x: np.ndarray) -> float:
        """Amount by which x violates the row (<= 0 when satisfied)"""
        lhs = self.activity(x)
        if self.relation == '<=':
            return lhs - self.rhs
        if self.relation == '>=':
            return self.rhs - lhs
        return abs(lhs - self.rhs)


@dataclass
class LinearProgram:
    """Objective, rows and variable bounds (lower bounds must be finite)"""
    objective: np.ndarray
    sense: str = 'min'
    constraints: List[Constraint] = field(default_factory=list)
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    names: Optional[List[str]] = None
    name: str = 'lp'

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.size
        if self.sense not in ('min', 'max'):
            raise InvalidInputError(f"Objective sense must be 'min' or 'max', got '{self.sense}'")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.lower.size != n or self.upper.size != n:
            raise InvalidInputError("Bound vectors must match the number of variables")
        if not np.all(np.isfinite(self.lower)):
            raise InvalidInputError("Lower bounds must be finite")
        if not np.all(np.isfinite(self.objective)):
            raise InvalidInputError("Objective coefficients must be finite")

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def add(self, constraint: Constraint) -> int:
        for j, c in constraint.coeffs.items():
            if j < 0 or j >= self.num_vars:
                raise InvalidInputError(f"Constraint references variable {j} of {self.num_vars}")
            if not np.isfinite(c):
                raise InvalidInputError("Constraint coefficients must be finite")
        if not np.isfinite(constraint.rhs):
            raise InvalidInputError("Constraint rhs must be finite")
        self.constraints.append(constraint)
        return len(self.constraints) - 1

    def var_name(self, j: int) -> str:
        return self.names[j] if self.names else f"x{j}"


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    duals: np.ndarray
    iterations: int = 0


@dataclass
class CutPool:
    """Constraints added by a cutting-plane run, keyed by tag"""
    cuts: List[Constraint] = field(default_factory=list)
    tags: set = field(default_factory=set)

    def add(self, cut: Constraint) -> bool:
        if cut.tag is not None and cut.tag in self.tags:
            return False
        self.cuts.append(cut)
        if cut.tag is not None:
            self.tags.add(cut.tag)
        return True

    def __len__(self) -> int:
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)


@dataclass
class CuttingPlaneResult:
    x: np.ndarray
    value: float
    pool: CutPool
    rounds: int
    lp: LPResult


def _standard_form(lp: LinearProgram):
    """Rows of A x = b, x >= 0, b >= 0 plus the bookkeeping to map results back"""
    n = lp.num_vars
    rows, rhs, kinds, origin = [], [], [], []
    for i, con in enumerate(lp.constraints):
        row = np.zeros(n)
        for j, c in con.coeffs.items():
            row[j] += c
        rows.append(row)
        rhs.append(con.rhs - row @ lp.lower)
        kinds.append(con.relation)
        origin.append(i)
    for j in range(n):
        if np.isfinite(lp.upper[j]):
            row = np.zeros(n)
            row[j] = 1.0
            rows.append(row)
            rhs.append(lp.upper[j] - lp.lower[j])
            kinds.append('<=')
            origin.append(-1)
    m = len(rows)
    n_slack = sum(1 for k in kinds if k != '=')
    A = np.zeros((m, n + n_slack))
    b = np.array(rhs, dtype=float)
    slack_col = [-1] * m
    s = n
    for i in range(m):
        A[i, :n] = rows[i]
        if kinds[i] == '<=':
            A[i, s] = 1.0
            slack_col[i] = s
            s += 1
        elif kinds[i] == '>=':
            A[i, s] = -1.0
            slack_col[i] = s
            s += 1
    sign = np.ones(m)
    for i in range(m):
        if b[i] < 0:
            A[i] = -A[i]
            b[i] = -b[i]
            sign[i] = -1.0
    c = np.zeros(n + n_slack)
    c[:n] = lp.objective if lp.sense == 'min' else -lp.objective
    return A, b, c, sign, slack_col, origin


def _simplex(A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: List[int],
             allowed: np.ndarray, max_iter: int):
    """Primal revised simplex from a feasible basis; returns (basis, iterations)"""
    m = A.shape[0]
    degenerate = 0
    bland = False
    for it in range(max_iter):
        B = A[:, basis]
        x_b = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        reduced = c - A.T @ y
        reduced[basis] = 0.0
        reduced[~allowed] = 0.0
        candidates = np.flatnonzero(reduced < -COST_TOL)
        if candidates.size == 0:
            return basis, it
        entering = int(candidates[0]) if bland else int(candidates[np.argmin(reduced[candidates])])
        d = np.linalg.solve(B, A[:, entering])
        rows = np.flatnonzero(d > PIVOT_TOL)
        if rows.size == 0:
            raise LPUnboundedError("LP objective is unbounded", diagnostics={'iterations': it})
        ratios = np.maximum(x_b[rows], 0.0) / d[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL]
        leaving = int(min(ties, key=lambda r: basis[r]))
        if best <= PIVOT_TOL:
            degenerate += 1
            if degenerate >= DEGENERATE_SWITCH and not bland:
                logger.debug(f"Simplex switched to Bland's rule after {degenerate} degenerate pivots")
                bland = True
        else:
            degenerate = 0
        basis[leaving] = entering
    raise SolverError(f"Simplex exceeded {max_iter} iterations", diagnostics={'rows': m})


def _solve_simplex(lp: LinearProgram) -> LPResult:
    A, b, c, sign, slack_col, origin = _standard_form(lp)
    m, n_std = A.shape
    n = lp.num_vars

    if m == 0:
        obj = c
        if np.any(obj < -COST_TOL):
            raise LPUnboundedError("LP objective is unbounded")
        x = lp.lower.copy()
        return LPResult(x=x, value=float(lp.objective @ x), duals=np.zeros(0))

    # Initial basis: slack columns with +1 where available, artificials elsewhere
    basis: List[int] = []
    art_rows = []
    for i in range(m):
        s = slack_col[i]
        if s >= 0 and A[i, s] > 0:
            basis.append(s)
        else:
            basis.append(-1)
            art_rows.append(i)
    n_art = len(art_rows)
    A_full = np.hstack([A, np.zeros((m, n_art))])
    for k, i in enumerate(art_rows):
        A_full[i, n_std + k] = 1.0
        basis[i] = n_std + k
    total = n_std + n_art
    max_iter = 50 * (m + total) + 1000
    iterations = 0

    if n_art:
        c1 = np.zeros(total)
        c1[n_std:] = 1.0
        basis, its = _simplex(A_full, b, c1, basis, np.ones(total, dtype=bool), max_iter)
        iterations += its
        x_b = np.linalg.solve(A_full[:, basis], b)
        infeas = float(sum(x_b[r] for r in range(m) if basis[r] >= n_std))
        if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max())):
            raise LPInfeasibleError(f"LP is infeasible (phase one residual {infeas:.3e})",
                                    diagnostics={'residual': infeas})
        # Drive artificials out of the basis; a row without a replacement is redundant
        for r in range(m):
            if basis[r] < n_std:
                continue
            B_inv_row = np.linalg.solve(A_full[:, basis].T, np.eye(m)[r])
            tableau_row = B_inv_row @ A_full[:, :n_std]
            for j in np.flatnonzero(np.abs(tableau_row) > FEAS_TOL):
                if j not in basis:
                    basis[r] = int(j)
                    break

    c2 = np.zeros(total)
    c2[:n_std] = c
    allowed = np.zeros(total, dtype=bool)
    allowed[:n_std] = True
    basis, its = _simplex(A_full, b, c2, basis, allowed, max_iter)
    iterations += its

    B = A_full[:, basis]
    x_b = np.linalg.solve(B, b)
    x_std = np.zeros(total)
    x_std[basis] = x_b
    x = np.maximum(x_std[:n], 0.0) + lp.lower
    y = np.linalg.solve(B.T, c2[basis])
    flip = 1.0 if lp.sense == 'min' else -1.0
    duals = np.zeros(len(lp.constraints))
    for i in range(m):
        if origin[i] >= 0:
            duals[origin[i]] = flip * sign[i] * y[i]
    return LPResult(x=x, value=float(lp.objective @ x), duals=duals, iterations=iterations)


def _solve_highs(lp: LinearProgram) -> LPResult:
    from scipy.optimize import linprog

    n = lp.num_vars
    c = lp.objective if lp.sense == 'min' else -lp.objective
    ub_rows, ub_rhs, ub_map, eq_rows, eq_rhs, eq_map = [], [], [], [], [], []
    for i, con in enumerate(lp.constraints):
        row = np.zeros(n)
        for j, v in con.coeffs.items():
            row[j] += v
        if con.relation == '<=':
            ub_rows.append(row); ub_rhs.append(con.rhs); ub_map.append((i, 1.0))
        elif con.relation == '>=':
            ub_rows.append(-row); ub_rhs.append(-con.rhs); ub_map.append((i, -1.0))
        else:
            eq_rows.append(row); eq_rhs.append(con.rhs); eq_map.append(i)
    bounds = [(lp.lower[j], None if np.isinf(lp.upper[j]) else lp.upper[j]) for j in range(n)]
    res = linprog(c,
                  A_ub=np.array(ub_rows) if ub_rows else None, b_ub=np.array(ub_rhs) if ub_rows else None,
                  A_eq=np.array(eq_rows) if eq_rows else None, b_eq=np.array(eq_rhs) if eq_rows else None,
                  bounds=bounds, method='highs')
    if res.status == 2:
        raise LPInfeasibleError("LP is infeasible (HiGHS)")
    if res.status == 3:
        raise LPUnboundedError("LP objective is unbounded (HiGHS)")
    if res.status != 0:
        raise SolverError(f"HiGHS failed: {res.message}", diagnostics={'status': res.status})
    flip = 1.0 if lp.sense == 'min' else -1.0
    duals = np.zeros(len(lp.constraints))
    for k, (i, s) in enumerate(ub_map):
        duals[i] = flip * s * res.ineqlin.marginals[k]
    for k, i in enumerate(eq_map):
        duals[i] = flip * res.eqlin.marginals[k]
    x = np.asarray(res.x, dtype=float)
    return LPResult(x=x, value=float(lp.objective @ x), duals=duals, iterations=int(res.nit))


def solve_lp(lp: LinearProgram, backend: Optional[str] = None) -> LPResult:
    """Optimal primal point, value and constraint duals of ``lp``"""
    settings = get_settings()
    backend = backend or settings.lp_backend
    if settings.dump_lp_dir:
        os.makedirs(settings.dump_lp_dir, exist_ok=True)
        write_lp(lp, os.path.join(settings.dump_lp_dir, f"{lp.name}-{next(_dump_counter):05d}.lp"))
    if backend == 'simplex':
        result = _solve_simplex(lp)
    elif backend == 'highs':
        result = _solve_highs(lp)
    else:
        raise InvalidInputError(f"Unknown LP backend '{backend}'")
    logger.debug(f"Solved {lp.name}: {lp.num_vars} vars, {len(lp.constraints)} rows, "
                 f"value={result.value:.9g}, iterations={result.iterations}")
    return result


def cutting_plane(master: LinearProgram,
                  separator: Callable[[np.ndarray], Sequence[Constraint]],
                  max_rounds: Optional[int] = None,
                  size_hint: Optional[int] = None,
                  backend: Optional[str] = None) -> CuttingPlaneResult:
    """Solve ``master``, ask ``separator`` for violated rows, repeat until none

    The master must be bounded on its own; rows already in the pool are never re-added.
    """
    n = size_hint if size_hint is not None else master.num_vars
    cap = max_rounds if max_rounds is not None else 10 * 2 ** min(n, 16)
    pool = CutPool()
    for rounds in range(1, cap + 1):
        result = solve_lp(master, backend=backend)
        cuts = [c for c in separator(result.x) if c.violation(result.x) > CUT_TOL]
        added = 0
        for cut in cuts:
            if pool.add(cut):
                master.add(cut)
                added += 1
        logger.debug(f"Cutting plane round {rounds}: value={result.value:.9g}, {added} new cuts")
        if added:
            continue
        if cuts:
            raise SolverError("Separator returned only cuts already in the pool",
                              best=result.x, diagnostics={'rounds': rounds, 'pool': len(pool)})
        logger.info(f"Cutting plane converged in {rounds} rounds with {len(pool)} cuts, value={result.value:.9g}")
        return CuttingPlaneResult(x=result.x, value=result.value, pool=pool, rounds=rounds, lp=result)
    raise SolverError(f"Cutting plane exceeded {cap} rounds", best=None,
                      diagnostics={'rounds': cap, 'pool': len(pool)})


def _term(coef: float, name: str, first: bool) -> str:
    sign = '-' if coef < 0 else ('' if first else '+')
    return f"{sign} {abs(coef):.12g} {name}".strip()


def write_lp(lp: LinearProgram, path: str) -> None:
    """Write ``lp`` in CPLEX-LP text format"""
    lines = ['Maximize' if lp.sense == 'max' else 'Minimize']
    obj = [_term(c, lp.var_name(j), k == 0) for k, (j, c) in enumerate((j, c) for j, c in enumerate(lp.objective) if c)]
    lines.append(' obj: ' + (' '.join(obj) if obj else f"0 {lp.var_name(0)}" if lp.num_vars else '0'))
    lines.append('Subject To')
    for i, con in enumerate(lp.constraints):
        terms = [_term(c, lp.var_name(j), k == 0) for k, (j, c) in enumerate(sorted(con.coeffs.items()))]
        lhs = ' '.join(terms) if terms else f"0 {lp.var_name(0)}"
        lines.append(f" c{i}: {lhs} {con.relation} {con.rhs:.12g}")
    lines.append('Bounds')
    for j in range(lp.num_vars):
        upper = 'inf' if np.isinf(lp.upper[j]) else f"{lp.upper[j]:.12g}"
        lines.append(f" {lp.lower[j]:.12g} <= {lp.var_name(j)} <= {upper}")
    lines.append('End')
    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')
