"""Self-contained dense linear programming.

Two-phase primal simplex on a dense numpy tableau.  Dantzig pricing with a
permanent switch to Bland's rule when the objective stalls, so cycling is
impossible in theory; the iteration cap is still enforced and raises rather
than returning a wrong answer.  Intended problem sizes are at most a few
hundred variables, which is why there is no sparse machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_PIVOT_EPS = 1e-10


class LpError(RuntimeError):
    pass


class CyclingError(LpError):
    """Iteration cap exceeded; reported as an error, never as a result."""


@dataclass
class LpProblem:
    objective: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    lower: np.ndarray | None = None   # default 0; -inf allowed (free below)
    upper: np.ndarray | None = None   # default +inf
    sense: str = "min"

    def __post_init__(self):
        self.objective = np.atleast_1d(np.asarray(self.objective, dtype=float))
        n = self.objective.shape[0]
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")

        def as_mat(a, b, what):
            if a is None or (hasattr(a, "__len__") and len(a) == 0):
                return np.zeros((0, n)), np.zeros(0)
            a = np.atleast_2d(np.asarray(a, dtype=float))
            b = np.atleast_1d(np.asarray(b, dtype=float))
            if a.shape[1] != n or a.shape[0] != b.shape[0]:
                raise ValueError(f"{what} dimensions inconsistent: {a.shape} vs {b.shape}")
            return a, b

        self.a_eq, self.b_eq = as_mat(self.a_eq, self.b_eq, "equality")
        self.a_ub, self.b_ub = as_mat(self.a_ub, self.b_ub, "inequality")
        self.lower = (np.zeros(n) if self.lower is None
                      else np.atleast_1d(np.asarray(self.lower, dtype=float)))
        self.upper = (np.full(n, np.inf) if self.upper is None
                      else np.atleast_1d(np.asarray(self.upper, dtype=float)))
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bound vectors must match objective length")
        if np.any(self.lower > self.upper + 1e-15):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n(self) -> int:
        return self.objective.shape[0]


@dataclass
class LpSolution:
    status: str               # optimal | infeasible | unbounded
    x: np.ndarray | None
    objective: float | None
    residual: float
    iterations: int = 0


def _residual(problem: LpProblem, x: np.ndarray) -> float:
    res = 0.0
    if problem.a_eq.shape[0]:
        res = max(res, float(np.max(np.abs(problem.a_eq @ x - problem.b_eq))))
    if problem.a_ub.shape[0]:
        res = max(res, float(np.max(problem.a_ub @ x - problem.b_ub, initial=0.0)))
    finite_lo = np.isfinite(problem.lower)
    if finite_lo.any():
        res = max(res, float(np.max(problem.lower[finite_lo] - x[finite_lo], initial=0.0)))
    finite_up = np.isfinite(problem.upper)
    if finite_up.any():
        res = max(res, float(np.max(x[finite_up] - problem.upper[finite_up], initial=0.0)))
    return res


class _Tableau:
    """Standard-form simplex state: A x = b, x >= 0, b >= 0."""

    def __init__(self, a: np.ndarray, b: np.ndarray, verbose: bool):
        neg = b < 0
        a = a.copy()
        b = b.copy()
        a[neg] *= -1.0
        b[neg] *= -1.0
        self.m, self.n = a.shape
        self.verbose = verbose
        # columns: [structural | artificial], last col = rhs
        self.tab = np.hstack([a, np.eye(self.m), b[:, None]])
        self.basis = list(range(self.n, self.n + self.m))
        self.iterations = 0

    def _pivot(self, row: int, col: int):
        t = self.tab
        t[row] = t[row] / t[row, col]
        other = np.arange(self.m) != row
        t[other] -= np.outer(t[other, col], t[row])
        self.basis[row] = col

    def _reduced_costs(self, cost: np.ndarray):
        cb = cost[self.basis]
        z = cb @ self.tab[:, :-1] - cost
        return z

    def _ratio_row(self, col: int) -> int | None:
        colv = self.tab[:, col]
        rhs = self.tab[:, -1]
        # prefer well-scaled pivot elements; fall back to tiny ones only
        # when nothing better blocks the column
        mask = colv > 1e-7
        if not mask.any():
            mask = colv > _PIVOT_EPS
            if not mask.any():
                return None
        ratios = np.full(self.m, np.inf)
        ratios[mask] = rhs[mask] / colv[mask]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12)
        # smallest basic index among ties (lexicographic anti-cycling aid)
        return int(min(ties, key=lambda r: self.basis[r]))

    def run(self, cost: np.ndarray, allowed: np.ndarray, max_iters: int) -> str:
        """Minimize cost over the current basis; allowed masks enterable columns."""
        bland = False
        stall = 0
        last_obj = np.inf
        while True:
            if self.iterations >= max_iters:
                raise CyclingError(f"simplex iteration cap {max_iters} exceeded")
            z = self._reduced_costs(cost)
            z[~allowed] = 0.0
            if bland:
                cands = np.flatnonzero(z > 1e-9)
                if cands.size == 0:
                    return "optimal"
                col = int(cands[0])
            else:
                col = int(np.argmax(z))
                if z[col] <= 1e-9:
                    return "optimal"
            row = self._ratio_row(col)
            if row is None:
                return "unbounded"
            self._pivot(row, col)
            self.iterations += 1
            obj = float(cost[self.basis] @ self.tab[:, -1])
            if obj < last_obj - 1e-12:
                stall = 0
            else:
                stall += 1
                if stall >= 50 and not bland:
                    bland = True
            if self.iterations >= 2000:
                bland = True
            last_obj = obj
            if self.verbose:
                print(f"iter {self.iterations}: enter {col}, leave row {row}, obj {obj:.12g}")


def _reduce_equalities(a: np.ndarray, b: np.ndarray, tol: float):
    """Row-reduce the system a x = b, dropping dependent rows.  Returns
    (a2, b2, feasible); feasible False means an inconsistent 0 = c row
    appeared.  Row operations preserve the solution set exactly, and the
    reduced system removes the stuck artificials that make the phase-1
    simplex stall on degenerate inputs."""
    m = a.shape[0]
    aug = np.hstack([a, b[:, None]]).astype(float)
    rank = 0
    for col in range(a.shape[1]):
        if rank == m:
            break
        piv = rank + int(np.argmax(np.abs(aug[rank:, col])))
        if abs(aug[piv, col]) <= 1e-11:
            continue
        if piv != rank:
            aug[[rank, piv]] = aug[[piv, rank]]
        aug[rank] = aug[rank] / aug[rank, col]
        others = np.abs(aug[:, col]) > 0
        others[rank] = False
        aug[others] -= np.outer(aug[others, col], aug[rank])
        rank += 1
    if rank < m:
        worst = float(np.max(np.abs(aug[rank:, -1]), initial=0.0))
        if worst > max(tol, 1e-7):
            return None, None, False
    return aug[:rank, :-1], aug[:rank, -1], True


def _solve_standard(a: np.ndarray, b: np.ndarray, c: np.ndarray,
                    tol: float, max_iters: int, verbose: bool):
    """min c x s.t. a x = b, x >= 0.  Returns (status, x, iterations)."""
    a, b, feasible = _reduce_equalities(a, b, tol)
    if not feasible:
        return "infeasible", None, 0
    m, n = a.shape
    tb = _Tableau(a, b, verbose)
    art = np.zeros(n + m)
    art[n:] = 1.0
    allowed = np.ones(n + m, dtype=bool)
    status = tb.run(art, allowed, max_iters)
    assert status == "optimal"  # phase 1 is bounded below by 0
    phase1 = float(art[tb.basis] @ tb.tab[:, -1])
    if phase1 > max(tol, 1e-7):
        return "infeasible", None, tb.iterations

    # drive artificials out of the basis; a row that cannot pivot is redundant
    drop = []
    for r in range(tb.m):
        if tb.basis[r] >= n:
            piv_cols = np.flatnonzero(np.abs(tb.tab[r, :n]) > 1e-7)
            if piv_cols.size:
                tb._pivot(r, int(piv_cols[0]))
            else:
                drop.append(r)
    if drop:
        keep = [r for r in range(tb.m) if r not in set(drop)]
        tb.tab = tb.tab[keep]
        tb.basis = [tb.basis[r] for r in keep]
        tb.m = len(keep)

    cost2 = np.concatenate([c, np.zeros(m)])
    allowed = np.zeros(n + m, dtype=bool)
    allowed[:n] = True
    status = tb.run(cost2, allowed, max_iters)
    if status == "unbounded":
        return "unbounded", None, tb.iterations
    x = np.zeros(n)
    for r, j in enumerate(tb.basis):
        if j < n:
            x[j] = tb.tab[r, -1]
    return "optimal", x, tb.iterations


def solve(problem: LpProblem, tol: float = 1e-9,
          max_iters: int | None = None, verbose: bool = False) -> LpSolution:
    """Solve an LpProblem.  Deterministic: identical input, identical output."""
    n = problem.n
    c = problem.objective.copy()
    if problem.sense == "max":
        c = -c

    lo = problem.lower
    up = problem.upper
    free = ~np.isfinite(lo)

    # variable layout after shift/split: one column per bounded-below var,
    # two (plus, minus) per free var
    cols = []
    for j in range(n):
        cols.append(("pos", j))
        if free[j]:
            cols.append(("neg", j))
    ncols = len(cols)

    def expand(mat: np.ndarray) -> np.ndarray:
        out = np.zeros((mat.shape[0], ncols))
        for k, (kind, j) in enumerate(cols):
            out[:, k] = mat[:, j] if kind == "pos" else -mat[:, j]
        return out

    shift = np.where(free, 0.0, lo)

    a_eq = problem.a_eq
    b_eq = problem.b_eq - (a_eq @ shift if a_eq.shape[0] else 0.0)
    a_ub_rows = [problem.a_ub]
    b_ub_rows = [problem.b_ub - (problem.a_ub @ shift if problem.a_ub.shape[0] else 0.0)]
    fin_up = np.isfinite(up)
    if fin_up.any():
        # upper bounds become inequality rows on the shifted variables
        idx = np.flatnonzero(fin_up)
        rows = np.zeros((idx.size, n))
        rows[np.arange(idx.size), idx] = 1.0
        a_ub_rows.append(rows)
        b_ub_rows.append(up[idx] - shift[idx])
    a_ub = np.vstack([r for r in a_ub_rows if r.shape[0]]) if any(r.shape[0] for r in a_ub_rows) else np.zeros((0, n))
    b_ub = np.concatenate([r for r in b_ub_rows if r.shape[0]]) if a_ub.shape[0] else np.zeros(0)

    ea_eq = expand(a_eq) if a_eq.shape[0] else np.zeros((0, ncols))
    ea_ub = expand(a_ub) if a_ub.shape[0] else np.zeros((0, ncols))
    n_slack = ea_ub.shape[0]
    a_std = np.vstack([
        np.hstack([ea_eq, np.zeros((ea_eq.shape[0], n_slack))]),
        np.hstack([ea_ub, np.eye(n_slack)]),
    ]) if (ea_eq.shape[0] or n_slack) else np.zeros((0, ncols))
    b_std = np.concatenate([b_eq, b_ub])
    c_std = np.zeros(ncols + n_slack)
    for k, (kind, j) in enumerate(cols):
        c_std[k] = c[j] if kind == "pos" else -c[j]

    if a_std.shape[0] == 0:
        # no constraints at all: optimum at the shifted origin unless some
        # cost pushes a variable to +inf
        if np.any(c_std < -1e-12):
            return LpSolution("unbounded", None, None, residual=np.inf)
        x = shift.copy()
        obj = float(problem.objective @ x)
        return LpSolution("optimal", x, obj, _residual(problem, x))

    if max_iters is None:
        max_iters = max(5000, 200 * (a_std.shape[0] + a_std.shape[1]))

    status, xs, iters = _solve_standard(a_std, b_std, c_std, tol, max_iters, verbose)
    if status != "optimal":
        return LpSolution(status, None, None, residual=np.inf, iterations=iters)

    x = shift.copy()
    for k, (kind, j) in enumerate(cols):
        if kind == "pos":
            x[j] += xs[k]
        else:
            x[j] -= xs[k]
    obj = float(problem.objective @ x)
    return LpSolution("optimal", x, obj, _residual(problem, x), iterations=iters)
