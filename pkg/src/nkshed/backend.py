"""Thin LP/MILP layer over scipy's HiGHS interface.

Rows are stored in one of two canonical senses: equalities and
greater-or-equal rows. For a minimization LP the dual of a ``>=`` row is
then nonnegative, which is the convention the load-shed duals and their
upper bounds are stated in. HiGHS is simplex-based, so LP duals are exact
basic solutions, and runs are deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

__all__ = ["Model", "Solution", "BackendError", "OPTIMAL", "INFEASIBLE", "UNBOUNDED"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
FAILED = "failed"

_LP_STATUS = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}


class BackendError(RuntimeError):
    """Solver returned something other than what the caller required."""


@dataclass
class Solution:
    status: str
    objective: float
    x: np.ndarray
    dual_eq: np.ndarray | None = None
    dual_ge: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class Model:
    """Incrementally built linear model, solvable as an LP or a MILP."""

    def __init__(self, name: str = ""):
        self.name = name
        self._obj: list[float] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._integer: list[bool] = []
        # Row triplets, split by sense.
        self._eq_rows: list[tuple[np.ndarray, np.ndarray, float]] = []
        self._ge_rows: list[tuple[np.ndarray, np.ndarray, float]] = []

    # -- variables ---------------------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self._obj)

    def add_var(self, lb: float = 0.0, ub: float = np.inf, obj: float = 0.0,
                integer: bool = False) -> int:
        self._obj.append(obj)
        self._lb.append(lb)
        self._ub.append(ub)
        self._integer.append(integer)
        return len(self._obj) - 1

    def add_vars(self, n: int, lb=0.0, ub=np.inf, obj=0.0, integer=False) -> np.ndarray:
        """Append a block of n variables; scalar or per-variable bounds/costs."""
        start = len(self._obj)
        self._obj.extend(np.broadcast_to(obj, n).astype(float))
        self._lb.extend(np.broadcast_to(lb, n).astype(float))
        self._ub.extend(np.broadcast_to(ub, n).astype(float))
        self._integer.extend(bool(i) for i in np.broadcast_to(integer, n))
        return np.arange(start, start + n)

    def set_objective_coef(self, col: int, coef: float) -> None:
        self._obj[col] = coef

    # -- rows --------------------------------------------------------------------

    @staticmethod
    def _row(cols, vals) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(cols, dtype=int)
        v = np.asarray(vals, dtype=float)
        if c.shape != v.shape:
            raise ValueError("cols and vals must have equal length")
        return c, v

    def add_eq(self, cols, vals, rhs: float) -> int:
        c, v = self._row(cols, vals)
        self._eq_rows.append((c, v, float(rhs)))
        return len(self._eq_rows) - 1

    def add_ge(self, cols, vals, rhs: float) -> int:
        c, v = self._row(cols, vals)
        self._ge_rows.append((c, v, float(rhs)))
        return len(self._ge_rows) - 1

    def add_le(self, cols, vals, rhs: float) -> int:
        c, v = self._row(cols, vals)
        return self.add_ge(c, -v, -float(rhs))

    def add_range(self, cols, vals, lo: float, hi: float) -> None:
        """lo <= a.x <= hi as a pair of >= rows."""
        c, v = self._row(cols, vals)
        self.add_ge(c, v, lo)
        self.add_ge(c, -v, -hi)

    def _stack(self, rows) -> tuple[sparse.csr_matrix, np.ndarray]:
        n = self.num_vars
        if not rows:
            return sparse.csr_matrix((0, n)), np.zeros(0)
        data, ri, ci = [], [], []
        rhs = np.empty(len(rows))
        for r, (cols, vals, b) in enumerate(rows):
            ri.extend([r] * len(cols))
            ci.extend(cols)
            data.extend(vals)
            rhs[r] = b
        mat = sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))
        return mat, rhs

    # -- solves ------------------------------------------------------------------

    def solve_lp(self, require_optimal: bool = True) -> Solution:
        """Solve the continuous relaxation; integer markers are ignored.

        Duals follow the canonical sign convention: for a minimization the
        returned ``dual_ge`` entries are >= 0 and ``dual_eq`` entries are the
        usual free equality multipliers d(objective)/d(rhs).
        """
        a_eq, b_eq = self._stack(self._eq_rows)
        a_ge, b_ge = self._stack(self._ge_rows)
        res = linprog(
            c=np.asarray(self._obj),
            A_ub=-a_ge if a_ge.shape[0] else None,
            b_ub=-b_ge if a_ge.shape[0] else None,
            A_eq=a_eq if a_eq.shape[0] else None,
            b_eq=b_eq if a_eq.shape[0] else None,
            bounds=list(zip(self._lb, self._ub)),
            method="highs",
        )
        status = _LP_STATUS.get(res.status, FAILED)
        if status != OPTIMAL:
            if require_optimal:
                raise BackendError(f"LP {self.name or '(unnamed)'}: {status} ({res.message})")
            return Solution(status, np.nan, np.zeros(self.num_vars))
        dual_eq = np.asarray(res.eqlin.marginals) if a_eq.shape[0] else np.zeros(0)
        # ge rows were negated into <= form, so the canonical dual is -marginal.
        dual_ge = -np.asarray(res.ineqlin.marginals) if a_ge.shape[0] else np.zeros(0)
        return Solution(OPTIMAL, float(res.fun), np.asarray(res.x), dual_eq, dual_ge)

    def solve_milp(self, require_optimal: bool = True) -> Solution:
        rows = self._eq_rows + self._ge_rows
        n_eq = len(self._eq_rows)
        mat, rhs = self._stack(rows)
        lo = rhs.copy()
        hi = np.where(np.arange(len(rows)) < n_eq, rhs, np.inf)
        constraints = [LinearConstraint(mat, lo, hi)] if len(rows) else []
        res = milp(
            c=np.asarray(self._obj),
            constraints=constraints,
            integrality=np.asarray(self._integer, dtype=int),
            bounds=Bounds(np.asarray(self._lb), np.asarray(self._ub)),
        )
        status = _LP_STATUS.get(res.status, FAILED)
        if status != OPTIMAL:
            if require_optimal:
                raise BackendError(f"MILP {self.name or '(unnamed)'}: {status} ({res.message})")
            return Solution(status, np.nan, np.zeros(self.num_vars))
        return Solution(OPTIMAL, float(res.fun), np.asarray(res.x))
