"""Two-sided bounds for Gelfand, Kolmogorov, Bernstein, Hilbert and
approximation numbers of an operator on a convex body.

Every bound carries a flag saying whether it is certified. Upper bounds are
always values of concrete feasible objects (a kernel, a subspace, a map), so
they are certified whenever those values are evaluated exactly. Lower bounds
come from inscribed balls, compressions, closed forms or exhaustive searches.
"""
from __future__ import annotations

import csv
import enum
import io
import itertools
import math
import time
import weakref
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, QhullError

from .lp import LpError, LpProblem, lp_solve
from .numerics import (InscribedBall, NotInjectiveError, SearchConfig, _diff_data,
                       _seminorm_ball_vertices, _support_numbers,
                       chebyshev_center, fit_scaled_ellipsoid, inscribed_ball,
                       max_seminorm_on_section, nullspace, polytope_vertices,
                       section_vertices, unit_ball_hrep)
from .spaces import (Functional, Instance, LpBall, NormTag, Subspace, l2_to_norm, norm_eval,
                     operator_norm_to_l2)
from .witness import (ChainVariant, _greedy_steps, admissible_variants, assemble,
                      certify_chain, containment_ok, contraction_ok)

EXACT_GAP = 1e-6
GRID_SIZE = 3600
MAX_COMBOS = 2000
REFINE_BUDGET = 200


class WidthKind(enum.Enum):
    GELFAND = "gelfand"
    KOLMOGOROV = "kolmogorov"
    BERNSTEIN = "bernstein"
    HILBERT = "hilbert"
    APPROXIMATION = "approximation"

    @classmethod
    def parse(cls, text) -> "WidthKind":
        if isinstance(text, WidthKind):
            return text
        key = str(text).strip().lower()
        for k in cls:
            if k.value == key or k.value[0] == key:
                return k
        raise ValueError(f"unknown width kind {text!r}")


@dataclass(frozen=True)
class AllLinear:
    def key(self):
        return "all"


@dataclass(frozen=True, eq=False)
class FiniteSet:
    functionals: tuple

    def __post_init__(self):
        fs = tuple(f if isinstance(f, Functional) else Functional(f) for f in self.functionals)
        if not fs:
            raise ValueError("admissible information set must be nonempty")
        object.__setattr__(self, "functionals", fs)

    def key(self):
        return tuple(tuple(np.round(f.coefficients, 12)) for f in self.functionals)

    def contains(self, f: Functional, tol: float = 1e-12) -> bool:
        return any(np.array_equal(f.coefficients, g.coefficients) or
                   np.abs(f.coefficients - g.coefficients).max() <= tol
                   for g in self.functionals)


InfoClass = Union[AllLinear, FiniteSet]
ALL_LINEAR = AllLinear()


def standard_information(dim: int, dual_norm: NormTag = NormTag.LINF) -> FiniteSet:
    """Coordinate evaluations x -> x_i."""
    return FiniteSet(tuple(Functional(np.eye(dim)[i], dual_norm) for i in range(dim)))


@dataclass
class Bounds:
    kind: WidthKind
    n: int
    lower: float
    upper: float
    lower_certified: bool
    upper_certified: bool
    lower_witness: dict = field(default_factory=dict)
    upper_witness: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    wall_ms: float = 0.0

    def __post_init__(self):
        if self.lower > self.upper + 1e-7:
            raise AssertionError(f"{self.kind.value} n={self.n}: lower {self.lower} "
                                 f"exceeds upper {self.upper}")

    @property
    def exact(self) -> bool:
        return (self.lower_certified and self.upper_certified
                and self.upper - self.lower <= EXACT_GAP)

    @property
    def certified(self) -> bool:
        return self.lower_certified and self.upper_certified

    def scaled(self, factor):
        return Bounds(self.kind, self.n, factor * self.lower, factor * self.upper,
                      self.lower_certified, self.upper_certified)


# --------------------------------------------------------------------------
# caching and small helpers

_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _memo(inst, key, compute):
    slot = _CACHE.setdefault(inst, {})
    if key not in slot:
        slot[key] = compute()
    return slot[key]


def _is_l2_ball(inst: Instance):
    core, off = inst.body.core()
    if isinstance(core, LpBall) and core.norm is NormTag.L2:
        return core.radius, off
    return None


def _span_D(inst: Instance) -> np.ndarray:
    """Orthonormal basis of the direction space of the body."""
    if _is_l2_ball(inst):
        return np.eye(inst.body.dim)
    return _diff_data(inst.body).W


def _rank(M: np.ndarray, tol: float = 1e-10) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _padded_sigma(S: np.ndarray, k: int) -> float:
    s = np.linalg.svd(S, compute_uv=False)
    return float(s[k]) if k < s.size else 0.0


def _orthonormal(M: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(M)
    return Q[:, :_rank(M)] if M.size else Q


def _complete(Q: np.ndarray, d: int) -> np.ndarray:
    """Extend orthonormal columns Q to an orthonormal basis of R^d."""
    if Q.shape[1] == 0:
        return np.eye(d)
    U, _, _ = np.linalg.svd(Q, full_matrices=True)
    return np.hstack([Q, U[:, Q.shape[1]:]])


def _section_value(inst: Instance, Q: np.ndarray) -> float:
    """Section supremum on span(Q), evaluated by the fastest exact route."""
    sub = Subspace(Q, inst.body.dim)
    ball = _is_l2_ball(inst)
    if ball or Q.shape[1] == 0:
        return max_seminorm_on_section(inst, sub, want_pair=False).value
    P = section_vertices(inst.body, sub)
    t = inst.op.target_norm
    return float(max(norm_eval(inst.S @ p, t) for p in P))


def _kernel_functionals(Q: np.ndarray, d: int) -> np.ndarray:
    """Rows spanning the annihilator of span(Q)."""
    return Subspace(Q, d).complement().basis.T if Q.shape[1] else np.eye(d)


def _rotation_search(evaluate, Q0: np.ndarray, k: int, budget: int, maximize: bool):
    """Coordinate-rotation descent over k-frames inside R^dim.

    Rotates the span of the first k columns of the orthonormal Q0 towards the
    remaining columns, one Givens plane at a time, halving the angle when no
    plane improves. Returns (best value, best full basis).
    """
    d = Q0.shape[0]
    sign = -1.0 if maximize else 1.0
    Q = Q0.copy()
    best = sign * evaluate(Q[:, :k])
    evals = 1
    if k == 0 or k == d:
        return sign * best, Q
    theta = 0.4
    while theta > 1e-4 and evals < budget:
        improved = False
        for i in range(k):
            for j in range(k, d):
                for s in (1.0, -1.0):
                    c, sn = math.cos(s * theta), math.sin(s * theta)
                    Qn = Q.copy()
                    Qn[:, i] = c * Q[:, i] + sn * Q[:, j]
                    Qn[:, j] = -sn * Q[:, i] + c * Q[:, j]
                    try:
                        v = sign * evaluate(Qn[:, :k])
                    except (NotInjectiveError, LpError, ValueError, QhullError):
                        v = math.inf
                    evals += 1
                    if v < best - 1e-12 * max(1.0, abs(best)):
                        best, Q, improved = v, Qn, True
                        break
                    if evals >= budget:
                        break
                if evals >= budget:
                    break
            if evals >= budget:
                break
        if not improved:
            theta /= 2
    return sign * best, Q


def _polish(evaluate, Q: np.ndarray, k: int, budget: int):
    """Nelder-Mead refinement of the span of Q[:, :k] (minimisation)."""
    d = Q.shape[0]
    if k == 0 or k == d:
        return evaluate(Q[:, :k]), Q

    def frame(x):
        return _orthonormal(x.reshape(d, k))

    def f(x):
        F = frame(x)
        if F.shape[1] < k:
            return math.inf
        try:
            return evaluate(F)
        except (NotInjectiveError, LpError, ValueError, QhullError):
            return math.inf

    x0 = Q[:, :k].ravel()
    out = minimize(f, x0, method="Nelder-Mead",
                   options={"maxfev": budget, "xatol": 1e-11, "fatol": 1e-13})
    F = frame(out.x)
    if out.fun < f(x0) and F.shape[1] == k:
        return float(out.fun), _complete(F, d)
    return f(x0), Q


def _snap(evaluate, Q: np.ndarray, k: int, best: float):
    """Try rational roundings of the frame; polytopal optima often sit there."""
    d = Q.shape[0]
    F = Q[:, :k]
    scale = np.abs(F).max(axis=0)
    for q in range(1, 7):
        G = np.round(F / scale * q)
        if _rank(G) < k:
            continue
        C = _orthonormal(G)
        try:
            v = evaluate(C)
        except (NotInjectiveError, LpError, ValueError, QhullError):
            continue
        if v < best:
            best, Q = v, _complete(C, d)
    return best, Q


def _random_frame(rng, d: int, k: int) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return Q


def _coordinate_frames(d: int, k: int, limit: int = 60):
    if math.comb(d, k) > limit:
        return []
    out = []
    for idx in itertools.combinations(range(d), k):
        rest = [i for i in range(d) if i not in idx]
        out.append(np.eye(d)[:, list(idx) + rest])
    return out


# --------------------------------------------------------------------------
# Gelfand numbers

def _exact_zero_gelfand(inst: Instance, n: int):
    """A codimension-n kernel killing S on the body, or None."""
    W = _span_D(inst)
    SW = inst.S @ W
    if n < _rank(SW):
        return None
    d = inst.body.dim
    # kernel = (W cap ker S) + W-perp
    if W.shape[1]:
        _, s, Vt = np.linalg.svd(SW, full_matrices=True)
        r = _rank(SW)
        K = W @ Vt[r:].T
    else:
        K = np.zeros((d, 0))
    Wp = Subspace(W, d).complement().basis if W.shape[1] < d else np.zeros((d, 0))
    M = np.hstack([K, Wp])
    rows = _kernel_functionals(M, d) if M.shape[1] else np.eye(d)
    rows = _pad_rows(rows, n, d)
    return rows


def _pad_rows(rows: np.ndarray, n: int, d: int) -> np.ndarray:
    """Exactly n functionals whose kernel lies inside the kernel of ``rows``."""
    rows = rows.reshape(-1, d)
    if rows.shape[0] > n:
        raise ValueError("too many functionals")
    if rows.shape[0] == n:
        return rows
    extra = Subspace.span(rows, d).complement().basis.T if rows.size else np.eye(d)
    need = n - rows.shape[0]
    if extra.shape[0] >= need:
        return np.vstack([rows, extra[:need]])
    return np.vstack([rows, np.tile(rows[:1] if rows.size else np.eye(d)[:1], (need, 1))])


def _edge_min(a: np.ndarray, b: np.ndarray, t: NormTag) -> tuple[float, float]:
    """min over tau in [0, 1] of ||a + tau b||_t (convex in tau)."""
    if t is NormTag.L2:
        bb = b @ b
        tau = 0.0 if bb == 0 else min(1.0, max(0.0, -(a @ b) / bb))
        return float(np.linalg.norm(a + tau * b)), tau
    taus = [0.0, 1.0]
    with np.errstate(divide="ignore", invalid="ignore"):
        taus += list(-a / b)
        for i, j in itertools.combinations(range(a.size), 2):
            for s in (1.0, -1.0):
                den = b[i] - s * b[j]
                if den != 0:
                    taus.append(-(a[i] - s * a[j]) / den)
    taus = np.array([x for x in taus if np.isfinite(x) and -1e-12 <= x <= 1 + 1e-12])
    taus = np.clip(taus, 0.0, 1.0)
    vals = np.array([norm_eval(a + x * b, t) for x in taus])
    i = int(np.argmin(vals))
    return float(vals[i]), float(taus[i])


def _perp2(z: np.ndarray) -> np.ndarray:
    return np.array([-z[1], z[0]])


def _breakpoint_directions(S: np.ndarray, t: NormTag) -> np.ndarray:
    """Unit u in R^2 where the piece of u -> ||S u||_t changes."""
    zs = list(S)
    if t is NormTag.LINF:
        for i, j in itertools.combinations(range(S.shape[0]), 2):
            zs += [S[i] - S[j], S[i] + S[j]]
    out = []
    for z in zs:
        nz = np.linalg.norm(z)
        if nz > 1e-14:
            u = _perp2(z) / nz
            out += [u, -u]
    return np.array(out).reshape(-1, 2)


def _gelfand_plane(inst: Instance) -> tuple[float, np.ndarray]:
    """Exact c_1 in dimension two: the minimum of ||S p|| over the boundary of D."""
    S, t = inst.S, inst.op.target_norm
    ball = _is_l2_ball(inst)
    if ball:
        R, _ = ball
        U = _breakpoint_directions(S, t)
        if t is NormTag.L2 or U.shape[0] == 0:
            _, s, Vt = np.linalg.svd(S)
            return R * _padded_sigma(S, 1), R * Vt[-1]
        vals = np.array([norm_eval(S @ u, t) for u in U])
        i = int(np.argmin(vals))
        return R * float(vals[i]), R * U[i]
    V = _diff_data(inst.body).vertices
    order = ConvexHull(V).vertices
    best = (math.inf, None)
    for k in range(len(order)):
        x0, x1 = V[order[k]], V[order[(k + 1) % len(order)]]
        val, tau = _edge_min(S @ x0, S @ (x1 - x0), t)
        if val < best[0]:
            best = (val, x0 + tau * (x1 - x0))
    return best


def _gelfand_inradius(inst: Instance) -> tuple[float, np.ndarray]:
    """Exact c_{d-1} for a full-dimensional D: its inradius in the seminorm ||S .||."""
    dd = _diff_data(inst.body)
    T = inst.S @ dd.W
    t = inst.op.target_norm
    hk = _support_numbers(T, t, dd.A)
    ratios = dd.b / hk
    i = int(np.argmin(ratios))
    r = float(ratios[i])
    a = dd.A[i]
    if t is NormTag.L2:
        z = np.linalg.solve(T.T @ T, a)
        z /= math.sqrt(a @ z)
    else:
        Z = _seminorm_ball_vertices(T, t)
        z = Z[int(np.argmax(Z @ a))]
    return r, dd.W @ (r * z)


def _gelfand_search(inst: Instance, n: int, cfg: SearchConfig):
    """Heuristic minimisation over codimension-n kernels; returns (value, kernel Q)."""
    d = inst.body.dim
    k = d - n
    S = inst.S
    cands = []
    _, _, Vt = np.linalg.svd(S, full_matrices=True)
    cands.append(np.hstack([Vt[n:].T, Vt[:n].T]))
    steps = _greedy_steps(inst, n, ChainVariant.GENERAL, cfg)
    if len(steps) == n and n:
        Lrows = np.vstack([s.L.coefficients for s in steps])
        K = nullspace(list(Lrows), d).basis
        if K.shape[1] == k:
            cands.append(_complete(K, d))
    cands += [np.roll(F, 0, axis=1) for F in _coordinate_frames(d, k)]
    for j in range(min(cfg.restarts, 16)):
        cands.append(_random_frame(cfg.rng(1000 + j), d, k))

    def ev(Q):
        return _section_value(inst, Q)

    scored = sorted(((ev(Q[:, :k]), i) for i, Q in enumerate(cands)))
    best_val, best_Q = math.inf, None
    for val, i in scored[:2]:
        v, Q = _rotation_search(ev, cands[i], k, min(cfg.max_iters, REFINE_BUDGET), False)
        if v < best_val:
            best_val, best_Q = v, Q
    best_val, best_Q = _polish(ev, best_Q, k, min(cfg.max_iters, REFINE_BUDGET))
    best_val, best_Q = _snap(ev, best_Q, k, best_val)
    return best_val, best_Q[:, :k]


def _gelfand_upper(inst: Instance, n: int, cfg: SearchConfig):
    """(upper value, functionals, exact?) for AllLinear information."""
    def compute():
        d = inst.body.dim
        t = inst.op.target_norm
        ball = _is_l2_ball(inst)
        zero = _exact_zero_gelfand(inst, n)
        if zero is not None:
            return 0.0, zero, True, "rank"
        if n == 0:
            res = max_seminorm_on_section(inst, Subspace.full(d), cfg, want_pair=False)
            return res.value, np.zeros((0, d)), res.exact, "diameter"
        if ball and t is NormTag.L2:
            R, _ = ball
            _, _, Vt = np.linalg.svd(inst.S, full_matrices=True)
            return R * _padded_sigma(inst.S, n), Vt[:n], True, "svd"
        if d == 2 and n == 1:
            val, p = _gelfand_plane(inst)
            rows = _kernel_functionals(p[:, None] / np.linalg.norm(p), d)
            up = max_seminorm_on_section(inst, nullspace(list(rows), d), cfg, want_pair=False)
            if up.exact and up.value - val <= EXACT_GAP:
                return up.value, rows, True, "plane-boundary"
            return up.value, rows, False, "plane-boundary"
        if n == d - 1 and not ball and _diff_data(inst.body).W.shape[1] == d:
            val, p = _gelfand_inradius(inst)
            rows = _kernel_functionals(p[:, None] / np.linalg.norm(p), d)
            up = max_seminorm_on_section(inst, nullspace(list(rows), d), cfg, want_pair=False)
            return up.value, rows, up.exact and abs(up.value - val) <= EXACT_GAP, "inradius"
        val, Q = _gelfand_search(inst, n, cfg)
        rows = _kernel_functionals(Q, d)
        up = max_seminorm_on_section(inst, Subspace(Q, d), cfg, want_pair=False)
        prev_val, prev_rows, _, _ = _gelfand_upper(inst, n - 1, cfg)
        if prev_val < up.value:
            return prev_val, _pad_rows(prev_rows, n, d), False, "monotone"
        return up.value, rows, False, "search"
    return _memo(inst, ("gelfand-upper", n, cfg), compute)


def _gelfand_finite(inst: Instance, n: int, info: FiniteSet, cfg: SearchConfig):
    d = inst.body.dim
    F = [f.coefficients for f in info.functionals]
    k = min(n, len(F))
    combos = list(itertools.combinations(range(len(F)), k))
    exhaustive = len(combos) <= MAX_COMBOS
    if not exhaustive:
        rng = cfg.rng(7)
        pick = rng.choice(len(combos), MAX_COMBOS, replace=False)
        combos = [combos[i] for i in sorted(pick)]
    best = (math.inf, None, True)
    all_exact = True
    for combo in combos:
        rows = [F[i] for i in combo]
        res = max_seminorm_on_section(inst, nullspace(rows, d), cfg, want_pair=False)
        all_exact &= res.exact
        if res.value < best[0] - 1e-15:
            best = (res.value, np.array(rows).reshape(-1, d), res.exact)
    return best[0], best[1], exhaustive and all_exact


def gelfand(inst: Instance, n: int, info: InfoClass = ALL_LINEAR,
            cfg: SearchConfig = SearchConfig()) -> Bounds:
    """Bounds on c_n(S, F), optionally with functionals restricted to a finite set."""
    if n < 0:
        raise ValueError("n must be non-negative")

    def compute():
        t0 = time.perf_counter()
        if isinstance(info, FiniteSet) and n > 0:
            up, rows, exact = _gelfand_finite(inst, n, info, cfg)
            method = "finite-exhaustive" if exact else "finite-sampled"
        else:
            up, rows, exact, method = _gelfand_upper(inst, n, cfg)
        if exact:
            lo, lw = up, {"method": method}
        else:
            lo, lw = _certified_lower(inst, n, cfg)
        b = Bounds(WidthKind.GELFAND, n, min(lo, up), up, True, True, lw,
                   {"method": method, "functionals": rows})
        b.wall_ms = (time.perf_counter() - t0) * 1e3
        return b
    return _memo(inst, ("gelfand", n, info.key(), cfg), compute)


def _certified_lower(inst: Instance, n: int, cfg: SearchConfig):
    """max of the Bernstein and Hilbert lower bounds (both below c_n)."""
    b, bw = _bernstein_lower(inst, n, cfg)
    h, hw = _hilbert_lower(inst, n, cfg)
    if h > b:
        return h, {"method": "hilbert", **hw}
    return b, {"method": "bernstein", **bw}


# --------------------------------------------------------------------------
# Bernstein numbers

def _bernstein_eval(inst: Instance, W: np.ndarray, Vc: np.ndarray, cfg) -> InscribedBall:
    return inscribed_ball(inst, (None, Subspace(_orthonormal(W @ Vc), inst.body.dim)), cfg)


def _bernstein_lower(inst: Instance, n: int, cfg: SearchConfig):
    def compute():
        W = _span_D(inst)
        r = W.shape[1]
        k = n + 1
        SW = inst.S @ W
        if k > _rank(SW):
            return 0.0, {"method": "rank"}
        cands = []
        _, _, Vt = np.linalg.svd(SW, full_matrices=True)
        cands.append(Vt.T)
        steps = _greedy_steps(inst, k, ChainVariant.GENERAL, cfg)
        if len(steps) == k:
            P = W.T @ np.column_stack([s.p for s in steps])
            if _rank(P) == k:
                cands.append(_complete(_orthonormal(P), r))
        if r == inst.body.dim:
            cands += [W.T @ F for F in _coordinate_frames(r, k)]
        for j in range(min(cfg.restarts, 12)):
            cands.append(_random_frame(cfg.rng(2000 + j), r, k))

        def ev(Vc):
            return _bernstein_eval(inst, W, Vc, cfg).radius

        scored = []
        for i, Q in enumerate(cands):
            try:
                scored.append((-ev(Q[:, :k]), i))
            except (NotInjectiveError, LpError, ValueError):
                continue
        if not scored:
            return 0.0, {"method": "none"}
        scored.sort()
        best_val, best_Q = -math.inf, None
        if k == r:
            best_val, best_Q = -scored[0][0], cands[scored[0][1]]
        else:
            for val, i in scored[:2]:
                v, Q = _rotation_search(ev, cands[i], k, min(cfg.max_iters, REFINE_BUDGET), True)
                if v > best_val:
                    best_val, best_Q = v, Q
        ball = _bernstein_eval(inst, W, best_Q[:, :k], cfg)
        return ball.radius, {"method": "inscribed-ball", "center": ball.center,
                             "basis": ball.basis}
    return _memo(inst, ("bernstein-lower", n, cfg), compute)


def bernstein(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()) -> Bounds:
    """Bounds on b_n(S, F): inscribed (n+1)-dimensional balls of ||S .||."""
    if n < 0:
        raise ValueError("n must be non-negative")

    def compute():
        t0 = time.perf_counter()
        lo, lw = _bernstein_lower(inst, n, cfg)
        W = _span_D(inst)
        ball = _is_l2_ball(inst)
        if lw["method"] == "rank":
            up, method = 0.0, "rank"
        elif ball and inst.op.target_norm is NormTag.L2:
            up, method = ball[0] * _padded_sigma(inst.S, n), "svd"
        elif n + 1 == W.shape[1]:
            up, method = lo, "unique-subspace"
        elif n == 0:
            up, method = _gelfand_upper(inst, 0, cfg)[0], "diameter"
        else:
            up, method = _gelfand_upper(inst, n, cfg)[0], "gelfand-upper"
            if n > 0:
                up = min(up, bernstein(inst, n - 1, cfg).upper)
        b = Bounds(WidthKind.BERNSTEIN, n, min(lo, up), up, True, True, lw,
                   {"method": method})
        b.wall_ms = (time.perf_counter() - t0) * 1e3
        return b
    return _memo(inst, ("bernstein", n, cfg), compute)


# --------------------------------------------------------------------------
# Hilbert numbers

def _best_contraction(Y: np.ndarray, t: NormTag, N: int) -> list[np.ndarray]:
    """Candidate contractions B : (R^m, t) -> l2^N for the image matrix Y = S A."""
    m = Y.shape[0]
    U, _, _ = np.linalg.svd(Y, full_matrices=True)
    out = []
    for B0 in (U[:, :N].T, np.eye(m)):
        nb = operator_norm_to_l2(B0, t)
        if nb > 0:
            out.append(B0 / nb)
    return out


def _compression_score(inst: Instance, A: np.ndarray, B: np.ndarray, g: np.ndarray,
                       n: int) -> float:
    if A.shape[1] < n + 1 or B.shape[0] < n + 1:
        return 0.0
    if not (containment_ok(inst, A, g, samples=0) and contraction_ok(inst, B)):
        return 0.0
    return _padded_sigma(B @ inst.S @ A, n)


def _hilbert_lower(inst: Instance, n: int, cfg: SearchConfig):
    def compute():
        S, t = inst.S, inst.op.target_norm
        d = inst.body.dim
        best = (0.0, {"method": "none"})

        def consider(val, wit):
            nonlocal best
            if val > best[0] + 1e-15:
                best = (val, wit)

        # chains of every admissible variant and length
        for v in admissible_variants(inst):
            steps = _greedy_steps(inst, min(d, n + 3), v, cfg)
            for N in range(n + 1, len(steps) + 1):
                ch = assemble(inst, steps[:N], v, 1e-3)
                cert = certify_chain(ch, inst)
                if cert.containment_ok and cert.contraction_ok:
                    consider(float(cert.per_step_hilbert_lb[n]),
                             {"method": f"chain-{v.value}", "N": N, "A": ch.A, "B": ch.B,
                              "shift": ch.shift})
        # inscribed ball turned into an ellipsoid
        r, bw = _bernstein_lower(inst, n, cfg)
        if r > 0 and "basis" in bw:
            Wv = bw["basis"]
            T = S @ Wv
            Uq, Rq = np.linalg.qr(T)
            A0 = Wv @ np.linalg.inv(Rq)
            scale = r / l2_to_norm(Uq, t)
            A = scale * A0
            for B in _best_contraction(S @ A, t, n + 1):
                consider(_compression_score(inst, A, B, bw["center"], n),
                         {"method": "bernstein-ellipsoid", "A": A, "B": B, "shift": bw["center"]})
        # singular frames and random frames
        W = _span_D(inst)
        _, _, Vt = np.linalg.svd(S @ W, full_matrices=True)
        frames = [W @ Vt.T]
        for j in range(min(cfg.restarts, 6)):
            frames.append(W @ _random_frame(cfg.rng(3000 + j), W.shape[1], n + 1))
        for F in frames:
            if F.shape[1] < n + 1:
                continue
            A0 = F[:, :n + 1]
            alpha, g = fit_scaled_ellipsoid(inst.body, A0)
            if alpha <= 0:
                continue
            A = alpha * A0
            for B in _best_contraction(S @ A, t, n + 1):
                consider(_compression_score(inst, A, B, g, n),
                         {"method": "frame", "A": A, "B": B, "shift": g})
        return best
    return _memo(inst, ("hilbert-lower", n, cfg), compute)


def _l1_half_diameter(inst: Instance) -> float:
    """sup of ||S p||_1 over p in D, or inf when too costly to certify."""
    core, _ = inst.body.core()
    S = inst.S
    if isinstance(core, LpBall) and core.norm is NormTag.L2:
        if S.shape[0] > 16:
            return math.inf
        E = np.array(list(itertools.product((-1.0, 1.0), repeat=S.shape[0])))
        return core.radius * float(np.linalg.norm(E @ S, axis=1).max())
    try:
        V = core.vertices() @ S.T
    except (ValueError, QhullError, LpError):
        return math.inf
    if V.shape[0] > 2000:
        return math.inf
    return max(float(np.abs(V - v).sum(axis=1).max()) for v in V) / 2


def _hilbert_volume_upper(inst: Instance, n: int) -> float:
    """h_n <= (1/2) omega_k^(1/k) sup_D ||S p||_1 with k = n + 1.

    Columns of B have l2 norm at most 1 since ||y||_t <= ||y||_1, so by
    Cauchy-Binet det(B S A) is at most the volume of a zonotope whose polar
    contains A(B_2); Blaschke-Santalo closes the bound.
    """
    k = n + 1
    log_omega = 0.5 * k * math.log(math.pi) - math.lgamma(k / 2 + 1)
    return 0.5 * math.exp(log_omega / k) * _l1_half_diameter(inst)


def hilbert(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()) -> Bounds:
    """Bounds on h_n(S, F) via certified compressions B S A."""
    if n < 0:
        raise ValueError("n must be non-negative")

    def compute():
        t0 = time.perf_counter()
        lo, lw = _hilbert_lower(inst, n, cfg)
        bb = bernstein(inst, n, cfg)
        up, uw = bb.upper, {"method": "bernstein-upper"}
        vol = _hilbert_volume_upper(inst, n)
        if vol < up:
            up, uw = vol, {"method": "volume"}
        b = Bounds(WidthKind.HILBERT, n, min(lo, up), up, True, True, lw, uw)
        b.wall_ms = (time.perf_counter() - t0) * 1e3
        return b
    return _memo(inst, ("hilbert", n, cfg), compute)


# --------------------------------------------------------------------------
# Kolmogorov widths

def _body_points(inst: Instance) -> np.ndarray:
    core, off = inst.body.core()
    return core.vertices() + off


def _kolmogorov_distance(inst: Instance, M: np.ndarray, shift: Optional[np.ndarray] = None):
    """(sup_f dist(S f - shift, span M), exact?) in the target norm."""
    S, t = inst.S, inst.op.target_norm
    m = S.shape[0]
    shift = np.zeros(m) if shift is None else shift
    ball = _is_l2_ball(inst)
    Pm = M @ M.T if M.shape[1] else np.zeros((m, m))
    if t is NormTag.L2:
        Rm = np.eye(m) - Pm
        if ball:
            R, o = ball
            a = Rm @ (S @ o - shift)
            B = Rm @ S
            nB = np.linalg.norm(B, 2)
            if np.linalg.norm(a) <= 1e-12 * max(1.0, nB):
                return R * nB, True
            return float(np.linalg.norm(a) + R * nB), False
        Y = _body_points(inst) @ S.T - shift
        return float(np.linalg.norm(Y @ Rm.T, axis=1).max()), True
    # polyhedral target: dual vertices of the annihilator section
    Mc = Subspace(M, m).complement().basis if M.shape[1] else np.eye(m)
    if Mc.shape[1] == 0:
        return 0.0, True
    A0, b0 = unit_ball_hrep(t.dual, m)
    Z = polytope_vertices(A0 @ Mc, b0, interior=np.zeros(Mc.shape[1]))
    Lam = Z @ Mc.T
    G = Lam @ S
    if ball:
        R, o = ball
        vals = G @ o + R * np.linalg.norm(G, axis=1) - Lam @ shift
    else:
        vals = np.max(G @ _body_points(inst).T, axis=1) - Lam @ shift
    return float(max(vals.max(), 0.0)), True


def _kolmogorov_plane(inst: Instance):
    """Exact d_1 for a two-dimensional target and a polytopal body."""
    S, t = inst.S, inst.op.target_norm
    V = _body_points(inst)
    Y = V @ S.T
    zs = [Y[a] - Y[b] for a, b in itertools.combinations(range(len(Y)), 2)]
    zs += [Y[a] + Y[b] for a in range(len(Y)) for b in range(a, len(Y))]
    if t is not NormTag.L2:
        zs += [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0]),
               np.array([1.0, -1.0])]
    best = (math.inf, None)
    for z in zs:
        nz = np.linalg.norm(z)
        if nz < 1e-14:
            continue
        nu = z / nz  # the breakpoint normal is perpendicular to z, so M = span{z}
        val, _ = _kolmogorov_distance(inst, nu[:, None])
        if val < best[0]:
            best = (val, nu[:, None])
    return best


def _kolmogorov_search(inst: Instance, n: int, cfg: SearchConfig):
    S = inst.S
    m = S.shape[0]
    U, _, _ = np.linalg.svd(S, full_matrices=True)
    cands = [U]
    steps = _greedy_steps(inst, n, ChainVariant.GENERAL, cfg)
    if len(steps) == n and n:
        Y = S @ np.column_stack([s.p for s in steps])
        if _rank(Y) == n:
            cands.append(_complete(_orthonormal(Y), m))
    cands += _coordinate_frames(m, n)
    for j in range(min(cfg.restarts, 12)):
        cands.append(_random_frame(cfg.rng(4000 + j), m, n))

    def ev(Q):
        return _kolmogorov_distance(inst, Q)[0]

    scored = sorted((ev(Q[:, :n]), i) for i, Q in enumerate(cands))
    best_val, best_Q = math.inf, None
    for val, i in scored[:2]:
        v, Q = _rotation_search(ev, cands[i], n, min(cfg.max_iters, REFINE_BUDGET), False)
        if v < best_val:
            best_val, best_Q = v, Q
    best_val, best_Q = _polish(ev, best_Q, n, min(cfg.max_iters, REFINE_BUDGET))
    best_val, best_Q = _snap(ev, best_Q, n, best_val)
    return best_val, best_Q[:, :n]


def _image_span_rank(inst: Instance) -> tuple[int, np.ndarray]:
    ball = _is_l2_ball(inst)
    S = inst.S
    if ball:
        Y = np.hstack([S, (S @ ball[1])[:, None]])
    else:
        Y = S @ _body_points(inst).T
    r = _rank(Y)
    U, _, _ = np.linalg.svd(Y, full_matrices=True) if Y.size else (np.eye(S.shape[0]), 0, 0)
    return r, U[:, :r]


def kolmogorov(inst: Instance, n: int, cfg: SearchConfig = SearchConfig(),
               affine: bool = False) -> Bounds:
    """Bounds on d_n(S, F): distance of S(F) from the best n-dimensional subspace."""
    if n < 0:
        raise ValueError("n must be non-negative")

    def compute():
        t0 = time.perf_counter()
        S, t = inst.S, inst.op.target_norm
        m = S.shape[0]
        ball = _is_l2_ball(inst)
        r, span = _image_span_rank(inst)
        exact_lower = None
        if n >= r:
            up, M, up_exact, method = 0.0, span, True, "rank"
            exact_lower = 0.0
        elif n == 0:
            up, up_exact = _kolmogorov_distance(inst, np.zeros((m, 0)))
            M, method = np.zeros((m, 0)), "norm"
            if up_exact:
                exact_lower = up
        elif ball and t is NormTag.L2 and np.linalg.norm(ball[1]) == 0:
            U, _, _ = np.linalg.svd(S, full_matrices=True)
            M = U[:, :n]
            up, up_exact, method = ball[0] * _padded_sigma(S, n), True, "svd"
            exact_lower = up
        elif m == 2 and n == 1 and not ball:
            up, M = _kolmogorov_plane(inst)
            up_exact, method = True, "plane-breakpoints"
            exact_lower = up
        else:
            up, M = _kolmogorov_search(inst, n, cfg)
            up, up_exact = _kolmogorov_distance(inst, M)
            method = "search"
            if n > 0:
                prev = kolmogorov(inst, n - 1, cfg)
                if prev.upper < up:
                    up, method = prev.upper, "monotone"
        if exact_lower is not None:
            lo, lw = exact_lower, {"method": method}
        else:
            lo, lw = _bernstein_lower(inst, n, cfg)
            lw = {"method": "bernstein", **lw}
            if t is NormTag.L2:
                g = gelfand(inst, n, ALL_LINEAR, cfg)
                if g.lower > lo:
                    lo, lw = g.lower, {"method": "gelfand"}
        extra = {}
        if affine:
            c = inst.body.symmetry_center()
            if c is None:
                c = ball[1] if ball else _body_points(inst).mean(axis=0)
            extra["affine_upper"] = min(up, _kolmogorov_distance(inst, M, S @ c)[0])
        b = Bounds(WidthKind.KOLMOGOROV, n, min(lo, up), up, True, True, lw,
                   {"method": method, "subspace": M}, extra)
        b.wall_ms = (time.perf_counter() - t0) * 1e3
        return b
    return _memo(inst, ("kolmogorov", n, cfg, affine), compute)


# --------------------------------------------------------------------------
# approximation numbers

def _affine_error(inst: Instance, L: np.ndarray):
    """Best affine map phi0 + G L f for fixed functionals L: (error, G, phi0, exact)."""
    S, t = inst.S, inst.op.target_norm
    m = S.shape[0]
    V = _body_points(inst)
    n = L.shape[0]
    X = V @ L.T          # k x n observations
    Y = V @ S.T          # k x m targets
    k = V.shape[0]
    nG = m * n
    if t is NormTag.LINF:
        # variables: G (m*n), phi0 (m), s
        nv = nG + m + 1
        rows, rhs = [], []
        for j in range(k):
            for i in range(m):
                r = np.zeros(nv)
                r[i * n:(i + 1) * n] = X[j]
                r[nG + i] = 1.0
                r[-1] = -1.0
                rows.append(r.copy())
                rhs.append(Y[j, i])
                r[:nG + m] *= -1
                rows.append(r)
                rhs.append(-Y[j, i])
        bounds = [(None, None)] * (nG + m) + [(0.0, None)]
        obj = np.zeros(nv)
        obj[-1] = 1.0
        res = lp_solve(LpProblem(obj, np.array(rows), np.array(rhs), sense="min",
                                 bounds=bounds))
        G = res.x[:nG].reshape(m, n)
        phi0 = res.x[nG:nG + m]
    elif t is NormTag.L1:
        nv = nG + m + k * m + 1
        rows, rhs = [], []
        for j in range(k):
            for i in range(m):
                u = nG + m + j * m + i
                r = np.zeros(nv)
                r[i * n:(i + 1) * n] = X[j]
                r[nG + i] = 1.0
                r[u] = -1.0
                rows.append(r.copy())
                rhs.append(Y[j, i])
                r[:nG + m] *= -1
                rows.append(r)
                rhs.append(-Y[j, i])
            tot = np.zeros(nv)
            tot[nG + m + j * m:nG + m + (j + 1) * m] = 1.0
            tot[-1] = -1.0
            rows.append(tot)
            rhs.append(0.0)
        bounds = [(None, None)] * (nG + m) + [(0.0, None)] * (k * m + 1)
        obj = np.zeros(nv)
        obj[-1] = 1.0
        res = lp_solve(LpProblem(obj, np.array(rows), np.array(rhs), sense="min",
                                 bounds=bounds))
        G = res.x[:nG].reshape(m, n)
        phi0 = res.x[nG:nG + m]
    else:
        G0 = np.linalg.lstsq(np.hstack([X, np.ones((k, 1))]), Y, rcond=None)[0]
        x0 = np.concatenate([G0[:n].T.ravel(), G0[n], [0.0]])

        def resid(x):
            G = x[:nG].reshape(m, n)
            return Y - X @ G.T - x[nG:nG + m]

        x0[-1] = float(np.sum(resid(x0) ** 2, axis=1).max())

        def cons(x):
            return x[-1] - np.sum(resid(x) ** 2, axis=1)

        out = minimize(lambda x: x[-1], x0, constraints=[{"type": "ineq", "fun": cons}],
                       method="SLSQP", options={"maxiter": 300, "ftol": 1e-14})
        x = out.x if np.all(np.isfinite(out.x)) else x0
        G = x[:nG].reshape(m, n)
        phi0 = x[nG:nG + m]
    err = float(max(norm_eval(Y[j] - G @ X[j] - phi0, t) for j in range(k)))
    return err, G, phi0


def approximation(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()) -> Bounds:
    """Bounds on a_n(S, F): best worst-case error of affine rank-n maps."""
    if n < 0:
        raise ValueError("n must be non-negative")

    def compute():
        t0 = time.perf_counter()
        S, t = inst.S, inst.op.target_norm
        d = inst.body.dim
        ball = _is_l2_ball(inst)
        g = gelfand(inst, n, ALL_LINEAR, cfg)
        W = _span_D(inst)
        if n >= _rank(S @ W):
            up, method, wit = 0.0, "rank", {}
        elif ball:
            R, o = ball
            L = g.upper_witness["functionals"]
            Q = nullspace(list(L), d).basis
            Pi = np.eye(d) - Q @ Q.T
            up = R * l2_to_norm(S @ Q, t)
            up, method = max(up, g.upper), "kernel-projection"
            wit = {"linear": S @ Pi, "phi0": S @ (o - Pi @ o)}
        elif n == 0:
            cc = chebyshev_center(inst, [], [], cfg)
            up, method, wit = cc.radius, "chebyshev", {"phi0": cc.center}
            if cc.exact:
                b = Bounds(WidthKind.APPROXIMATION, 0, cc.radius, cc.radius, True, True,
                           {"method": "chebyshev"}, wit)
                b.wall_ms = (time.perf_counter() - t0) * 1e3
                return b
        else:
            Ls = [g.upper_witness["functionals"]]
            _, _, Vt = np.linalg.svd(S)
            Ls.append(Vt[:n])
            steps = _greedy_steps(inst, n, ChainVariant.GENERAL, cfg)
            if len(steps) == n:
                Ls.append(np.vstack([s.L.coefficients for s in steps]))
            Ls += [F[:, :n].T for F in _coordinate_frames(d, n, limit=20)]
            def ev(Q):
                return _affine_error(inst, Q.T)[0]

            frames = [_complete(_orthonormal(L.T), d) for L in Ls if _rank(L) == n]
            scored = []
            for i, F in enumerate(frames):
                try:
                    scored.append((ev(F[:, :n]), i))
                except LpError:
                    continue
            scored.sort()
            v, Q = _rotation_search(ev, frames[scored[0][1]], n,
                                    min(cfg.max_iters, REFINE_BUDGET // 2), False)
            v, Q = _snap(ev, Q, n, v)
            L = Q[:, :n].T
            err, G, phi0 = _affine_error(inst, L)
            best = (err, {"linear": G @ L, "phi0": phi0, "functionals": L})
            up, wit = best
            method = "affine-fit"
            prev = approximation(inst, n - 1, cfg)
            if prev.upper < up:
                up, method = prev.upper, "monotone"
        lo = g.lower
        lw = {"method": "gelfand-lower"}
        b = Bounds(WidthKind.APPROXIMATION, n, min(lo, up), up, g.lower_certified, True,
                   lw, {"method": method, **wit})
        b.wall_ms = (time.perf_counter() - t0) * 1e3
        return b
    return _memo(inst, ("approximation", n, cfg), compute)


# --------------------------------------------------------------------------
# the Hilbert-Hilbert oracle and dispatch

def singular_widths(inst: Instance) -> np.ndarray:
    """r * sigma_{k+1}(S), k = 0..d-1, for an l2 ball with l2 norms."""
    ball = _is_l2_ball(inst)
    if not (ball and inst.op.target_norm is NormTag.L2 and inst.op.source_norm is NormTag.L2):
        raise ValueError("singular widths need l2 norms and an l2-ball body")
    d = inst.body.dim
    s = np.linalg.svd(inst.S, compute_uv=False)
    out = np.zeros(d)
    out[:min(d, s.size)] = s[:d]
    return ball[0] * out


_DISPATCH = {
    WidthKind.GELFAND: lambda inst, n, cfg, info: gelfand(inst, n, info, cfg),
    WidthKind.KOLMOGOROV: lambda inst, n, cfg, info: kolmogorov(inst, n, cfg),
    WidthKind.BERNSTEIN: lambda inst, n, cfg, info: bernstein(inst, n, cfg),
    WidthKind.HILBERT: lambda inst, n, cfg, info: hilbert(inst, n, cfg),
    WidthKind.APPROXIMATION: lambda inst, n, cfg, info: approximation(inst, n, cfg),
}


def compute_width(inst: Instance, kind, n: int, cfg: SearchConfig = SearchConfig(),
                  info: InfoClass = ALL_LINEAR) -> Bounds:
    return _DISPATCH[WidthKind.parse(kind)](inst, n, cfg, info)


CSV_COLUMNS = ["instance", "kind", "n", "lower", "upper", "exact", "certified", "wall_ms"]


def bounds_to_csv(rows: Sequence[tuple], deterministic: bool = False) -> str:
    """rows: (instance name, Bounds) pairs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for name, b in rows:
        w.writerow([name, b.kind.value, b.n, f"{b.lower:.12g}", f"{b.upper:.12g}",
                    str(b.exact).lower(), str(b.certified).lower(),
                    "0" if deterministic else f"{b.wall_ms:.3f}"])
    return buf.getvalue()
