"""Dense two-phase simplex method with Bland's anti-cycling rule.

Problems here are desk-sized (a few dozen variables), so a plain tableau
implementation is fast enough and keeps every pivot inspectable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

PIVOT_TOL = 1e-9


class LpError(Exception):
    """Base class for LP failures."""


class InfeasibleError(LpError):
    """Raised when the feasible set is empty."""


class UnboundedError(LpError):
    """Raised when the objective is unbounded on the feasible set."""


@dataclass
class LpProblem:
    """``sense`` c.x subject to A_ub x <= b_ub, A_eq x = b_eq, lo <= x <= hi.

    ``bounds`` is a sequence of (lo, hi) pairs, ``None`` meaning infinite.
    When omitted every variable is non-negative.
    """

    objective: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    sense: str = "max"
    bounds: Optional[Sequence[tuple]] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        self.A_ub, self.b_ub = _rows(self.A_ub, self.b_ub, n, "A_ub")
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n, "A_eq")
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        if self.bounds is None:
            self.bounds = [(0.0, None)] * n
        elif len(self.bounds) != n:
            raise ValueError("one (lo, hi) pair per variable required")


@dataclass
class LpResult:
    value: float
    x: np.ndarray


def _rows(A, b, n, name):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[0] == 0:
        return np.zeros((0, n)), np.zeros(0)
    if A.shape != (b.size, n):
        raise ValueError(f"{name} has shape {A.shape}, expected ({b.size}, {n})")
    return A, b


def _pivot(T, i, j):
    T[i] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i])


def _iterate(T, basis, allowed, tol, max_iter):
    m = T.shape[0] - 1
    for _ in range(max_iter):
        costs = T[-1, :allowed]
        entering = np.flatnonzero(costs < -tol)
        if entering.size == 0:
            return
        j = entering[0]
        col = T[:m, j]
        pos = col > tol
        if not pos.any():
            raise UnboundedError("objective is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * (1.0 + abs(best)))
        i = ties[np.argmin(basis[ties])]
        _pivot(T, i, j)
        basis[i] = j
    raise LpError(f"simplex did not terminate within {max_iter} pivots")


def _standard_form(p: LpProblem):
    """Rewrite x = x0 + M y with y >= 0; returns (x0, M, extra ub rows)."""
    n = p.objective.size
    x0 = np.zeros(n)
    cols = []
    caps = []
    for j, (lo, hi) in enumerate(p.bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if lo > hi:
            raise InfeasibleError(f"variable {j} has empty bounds [{lo}, {hi}]")
        if np.isfinite(lo):
            x0[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                caps.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            x0[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    M = np.zeros((n, len(cols)))
    for k, (j, s) in enumerate(cols):
        M[j, k] = s
    return x0, M, caps


def lp_solve(p: LpProblem, tol: float = PIVOT_TOL, max_iter: int = 50_000) -> LpResult:
    """Solve ``p`` exactly up to floating point; raises on infeasible/unbounded."""
    x0, M, caps = _standard_form(p)
    ny = M.shape[1]
    A_ub = p.A_ub @ M
    b_ub = p.b_ub - p.A_ub @ x0
    if caps:
        extra = np.zeros((len(caps), ny))
        for r, (k, cap) in enumerate(caps):
            extra[r, k] = 1.0
        A_ub = np.vstack([A_ub, extra])
        b_ub = np.concatenate([b_ub, [cap for _, cap in caps]])
    A_eq = p.A_eq @ M
    b_eq = p.b_eq - p.A_eq @ x0

    n_ub = A_ub.shape[0]
    n_eq = A_eq.shape[0]
    m = n_ub + n_eq
    nvar = ny + n_ub
    A = np.zeros((m, nvar))
    A[:n_ub, :ny] = A_ub
    A[:n_ub, ny:] = np.eye(n_ub)
    A[n_ub:, :ny] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    c = p.objective @ M
    if p.sense == "max":
        c = -c
    c_full = np.concatenate([c, np.zeros(n_ub)])

    # phase 1 with one artificial per row
    T = np.zeros((m + 1, nvar + m + 1))
    T[:m, :nvar] = A
    T[:m, nvar:nvar + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :nvar] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(nvar, nvar + m)
    _iterate(T, basis, nvar, tol, max_iter)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -T[-1, -1] > 1e-7 * scale:
        raise InfeasibleError("constraints are infeasible")

    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= nvar:
            row = T[i, :nvar]
            cand = np.flatnonzero(np.abs(row) > tol)
            if cand.size:
                _pivot(T, i, cand[0])
                basis[i] = cand[0]
            else:
                keep[i] = False
    rows = np.flatnonzero(keep)
    T2 = np.zeros((rows.size + 1, nvar + 1))
    T2[:-1, :nvar] = T[rows, :nvar]
    T2[:-1, -1] = T[rows, -1]
    basis = basis[rows]
    T2[-1, :nvar] = c_full
    for i, j in enumerate(basis):
        if c_full[j] != 0.0:
            T2[-1] -= c_full[j] * T2[i]
    _iterate(T2, basis, nvar, tol, max_iter)

    y = np.zeros(nvar)
    y[basis] = T2[:-1, -1]
    x = x0 + M @ y[:ny]
    value = float(p.objective @ x)
    return LpResult(value=value, x=x)
