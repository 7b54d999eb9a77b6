"""Solvers shared by the width estimators.

The central primitive is the section supremum

    sup { ||S p|| : p in D, p in V },   D = (F - F) / 2,

which is the inner problem of every Gelfand-type quantity. For polytopes it is
solved exactly by enumerating the vertices of the section (a convex function
peaks at a vertex) or, for an l-infinity target, by one LP per coordinate.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import HalfspaceIntersection, QhullError

from .lp import InfeasibleError, LpError, LpProblem, LpResult, UnboundedError, lp_solve
from .polytope import (TooManyCombinations, affine_rank, enumerate_vertices,
                       hrep_from_points, unique_rows)
from .spaces import (ConvexBody, Functional, HPolytope, Instance, LpBall, NormTag,
                     Simplex, Subspace, VPolytope, half_difference_body, l2_to_norm,
                     norm_eval, norming_functional, sign_vectors)

__all__ = [
    "SearchConfig", "SectionResult", "InscribedBall", "ChebyshevResult", "HRep",
    "NotInjectiveError", "InconsistentObservationError",
    "svd", "nullspace", "lp_solve", "LpProblem", "LpResult", "InfeasibleError",
    "UnboundedError", "body_hrep", "section_vertices", "max_seminorm_on_section",
    "section_pair", "inscribed_ball", "chebyshev_center", "polytope_vertices",
    "fit_scaled_ellipsoid", "unit_ball_hrep",
]

INJECTIVITY_TOL = 1e-10
CONTAIN_TOL = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 64
    max_iters: int = 500
    tol: float = 1e-8
    seed: int = 42

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def rng(self, counter: int = 0) -> np.random.Generator:
        """Independent stream for restart number ``counter``."""
        return np.random.default_rng([self.seed & (2**63 - 1), counter])


class NotInjectiveError(ValueError):
    """S is (numerically) not injective on the requested subspace."""


class InconsistentObservationError(ValueError):
    """No element of the body matches the observed information."""


# --------------------------------------------------------------------------
# linear algebra

def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``m = U diag(s) Vt`` with ``s`` descending."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return np.linalg.svd(m, full_matrices=True)


def nullspace(rows: Sequence, dim: int, tol: float = 1e-10) -> Subspace:
    """Joint kernel of the given functionals (or coefficient rows)."""
    R = [r.coefficients if isinstance(r, Functional) else np.asarray(r, float).ravel()
         for r in rows]
    if not R:
        return Subspace.full(dim)
    M = np.vstack(R)
    if M.shape[1] != dim:
        raise ValueError("functional dimension does not match the ambient space")
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tol * max(1.0, s[0]))) if s.size else 0
    return Subspace(Vt[rank:].T, dim)


def _rank(M, tol=1e-10) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _canonical_sign(p: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(p) > 1e-12)
    if nz.size and p[nz[0]] < 0:
        return -p
    return p


# --------------------------------------------------------------------------
# body descriptions

_BODY_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _memo(obj, key, compute):
    slot = _BODY_CACHE.setdefault(obj, {})
    if key not in slot:
        slot[key] = compute()
    return slot[key]


@dataclass(frozen=True)
class HRep:
    """{x : A x <= b, E x = e} with unit-norm rows of A."""

    A: np.ndarray
    b: np.ndarray
    E: np.ndarray
    e: np.ndarray

    def slack(self, x) -> float:
        x = np.asarray(x, dtype=float)
        s = float(np.max(self.A @ x - self.b, initial=-np.inf))
        if self.E.shape[0]:
            s = max(s, float(np.abs(self.E @ x - self.e).max()))
        return s


def _affine_hrep(V: np.ndarray) -> HRep:
    d = V.shape[1]
    if affine_rank(V) == d:
        A, b = hrep_from_points(V)
        return HRep(A, b, np.zeros((0, d)), np.zeros(0))
    c0 = V.mean(axis=0)
    _, s, Vt = np.linalg.svd(V - c0)
    r = int(np.sum(s > 1e-10 * max(1.0, s[0]))) if s.size else 0
    Wf, Wc = Vt[:r].T, Vt[r:].T
    E = Wc.T
    e = E @ c0
    if r == 0:
        return HRep(np.zeros((0, d)), np.zeros(0), E, e)
    Ar, br = hrep_from_points((V - c0) @ Wf)
    A = Ar @ Wf.T
    return HRep(A, br + A @ c0, E, e)


def body_hrep(body: ConvexBody) -> HRep:
    """Facet description of a polytopal body (equalities for flat bodies)."""
    def build():
        core, off = body.core()
        d = body.dim
        if isinstance(core, LpBall) and core.norm is NormTag.L2:
            raise TypeError("an l2 ball has no facet description")
        if isinstance(core, VPolytope):
            h = _affine_hrep(core.vertices())
        else:
            A, b = core.hrep()
            h = HRep(A, b, np.zeros((0, d)), np.zeros(0))
        return HRep(h.A, h.b + h.A @ off, h.E, h.e + h.E @ off)
    return _memo(body, "hrep", build)


@dataclass(frozen=True)
class _BodyLP:
    """f = P z + o with z constrained by (A_ub, b_ub, A_eq, b_eq, bounds)."""

    P: np.ndarray
    o: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    bounds: list


def _body_lp(body: ConvexBody) -> _BodyLP:
    def build():
        core, off = body.core()
        d = body.dim
        if isinstance(core, LpBall):
            r = core.radius
            if core.norm is NormTag.LINF:
                return _BodyLP(np.eye(d), off, np.zeros((0, d)), np.zeros(0),
                               np.zeros((0, d)), np.zeros(0), [(-r, r)] * d)
            if core.norm is NormTag.L1:
                P = np.hstack([np.eye(d), -np.eye(d)])
                return _BodyLP(P, off, np.ones((1, 2 * d)), np.array([r]),
                               np.zeros((0, 2 * d)), np.zeros(0), [(0.0, None)] * (2 * d))
            raise TypeError("an l2 ball is not an LP body")
        if isinstance(core, Simplex):
            return _BodyLP(np.eye(d), off, np.ones((1, d)), np.array([1.0]),
                           np.zeros((0, d)), np.zeros(0), [(0.0, None)] * d)
        if isinstance(core, VPolytope):
            V = core.vertices()
            k = V.shape[0]
            return _BodyLP(V.T, off, np.zeros((0, k)), np.zeros(0),
                           np.ones((1, k)), np.array([1.0]), [(0.0, None)] * k)
        if isinstance(core, HPolytope):
            A, b = core.hrep()
            return _BodyLP(np.eye(d), off, A, b, np.zeros((0, d)), np.zeros(0),
                           [(None, None)] * d)
        raise TypeError(f"no LP description for {type(core).__name__}")
    return _memo(body, "lp", build)


def _pair_lp(body: ConvexBody, C: np.ndarray, objective_dir: np.ndarray,
             target_p: Optional[np.ndarray] = None):
    """LP over (f, g) in F x F with C^T (f - g) = 0.

    Maximises objective_dir . (f - g)/2, or, with ``target_p``, minimises the
    l-infinity distance of (f - g)/2 to target_p. Returns (value, p, f, g).
    """
    bl = _body_lp(body)
    d, nv = bl.P.shape
    nz = 2 * nv
    ub_blocks, ub_rhs, eq_blocks, eq_rhs = [], [], [], []
    for side in (0, 1):
        if bl.A_ub.shape[0]:
            blk = np.zeros((bl.A_ub.shape[0], nz))
            blk[:, side * nv:(side + 1) * nv] = bl.A_ub
            ub_blocks.append(blk)
            ub_rhs.append(bl.b_ub)
        if bl.A_eq.shape[0]:
            blk = np.zeros((bl.A_eq.shape[0], nz))
            blk[:, side * nv:(side + 1) * nv] = bl.A_eq
            eq_blocks.append(blk)
            eq_rhs.append(bl.b_eq)
    Pdiff = np.hstack([bl.P, -bl.P]) / 2.0
    if C.shape[1]:
        eq_blocks.append(C.T @ Pdiff)
        eq_rhs.append(np.zeros(C.shape[1]))
    bounds = list(bl.bounds) * 2
    if target_p is None:
        c = objective_dir @ Pdiff
        sense = "max"
    else:
        # extra variable s >= |Pdiff z - target_p|_inf
        nz += 1
        ub_blocks = [np.hstack([B, np.zeros((B.shape[0], 1))]) for B in ub_blocks]
        eq_blocks = [np.hstack([B, np.zeros((B.shape[0], 1))]) for B in eq_blocks]
        ub_blocks.append(np.hstack([Pdiff, -np.ones((d, 1))]))
        ub_rhs.append(target_p)
        ub_blocks.append(np.hstack([-Pdiff, -np.ones((d, 1))]))
        ub_rhs.append(-target_p)
        bounds.append((0.0, None))
        c = np.zeros(nz)
        c[-1] = 1.0
        sense = "min"
    A_ub = np.vstack(ub_blocks) if ub_blocks else None
    b_ub = np.concatenate(ub_rhs) if ub_rhs else None
    A_eq = np.vstack(eq_blocks) if eq_blocks else None
    b_eq = np.concatenate(eq_rhs) if eq_rhs else None
    res = lp_solve(LpProblem(c, A_ub, b_ub, A_eq, b_eq, sense, bounds))
    z = res.x
    f = bl.P @ z[:nv] + bl.o
    g = bl.P @ z[nv:2 * nv] + bl.o
    return res.value, (f - g) / 2.0, f, g


# --------------------------------------------------------------------------
# half-difference body and its sections

@dataclass(frozen=True)
class _DiffData:
    W: np.ndarray       # orthonormal basis of span(D), d x r
    A: np.ndarray       # facets of D in W-coordinates
    b: np.ndarray
    vertices: np.ndarray


def _diff_data(body: ConvexBody) -> _DiffData:
    core, _ = body.core()

    def build():
        if not core.is_polytope:
            raise TypeError("section vertices need a polytopal body")
        V = half_difference_body(core).vertices()
        d = core.dim
        if V.shape[0] == 0 or np.abs(V).max() < 1e-14:
            return _DiffData(np.zeros((d, 0)), np.zeros((0, 0)), np.zeros(0), V)
        _, s, Vt = np.linalg.svd(V, full_matrices=False)
        r = int(np.sum(s > 1e-10 * max(1.0, s[0])))
        W = Vt[:r].T
        A, b = hrep_from_points(V @ W)
        return _DiffData(W, A, b, V)

    return _memo(core, "diff", build)


def polytope_vertices(A: np.ndarray, b: np.ndarray, interior: Optional[np.ndarray] = None,
                      tol: float = 1e-9) -> np.ndarray:
    """Vertices of the bounded polytope {u : A u <= b}.

    Uses qhull halfspace intersection around an interior point; degenerate
    (flat) polytopes fall back to brute-force active-set enumeration.
    Raises InfeasibleError for an empty set.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    k = A.shape[1]
    if k == 0:
        if np.all(b >= -tol):
            return np.zeros((1, 0))
        raise InfeasibleError("empty polytope")
    nrm = np.linalg.norm(A, axis=1)
    zero = nrm < 1e-13
    if np.any(b[zero] < -tol):
        raise InfeasibleError("empty polytope")
    A, b, nrm = A[~zero], b[~zero], nrm[~zero]
    A, b = A / nrm[:, None], b / nrm
    if k == 1:
        a = A[:, 0]
        hi = np.min(b[a > 0] / a[a > 0]) if np.any(a > 0) else np.inf
        lo = np.max(b[a < 0] / a[a < 0]) if np.any(a < 0) else -np.inf
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise UnboundedError("unbounded polytope")
        if lo > hi + tol:
            raise InfeasibleError("empty polytope")
        return unique_rows(np.array([[lo], [max(lo, hi)]]))
    if interior is None:
        # Chebyshev centre of the polytope: max s with A u + s <= b
        c = np.zeros(k + 1)
        c[-1] = 1.0
        bounds = [(None, None)] * k + [(None, 1.0)]
        res = lp_solve(LpProblem(c, np.hstack([A, np.ones((A.shape[0], 1))]), b,
                                 bounds=bounds))
        if res.value < -tol:
            raise InfeasibleError("empty polytope")
        depth = res.value
        interior = res.x[:k]
    else:
        depth = float(np.min(b - A @ interior))
    if depth > 1e-9:
        try:
            hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), interior)
            pts = hs.intersections
            pts = pts[np.all(np.isfinite(pts), axis=1)]
            return unique_rows(pts, decimals=9)
        except QhullError:
            pass
    return enumerate_vertices(A, b, tol=max(tol, 1e-9))


def section_vertices(body: ConvexBody, sub: Subspace) -> np.ndarray:
    """Vertices of D intersected with ``sub`` (D the half-difference body)."""
    dd = _diff_data(body)
    d = body.dim
    if dd.W.shape[1] == 0:
        return np.zeros((1, d))
    Q = sub.basis
    Pc = np.eye(d) - Q @ Q.T
    N = nullspace(list(Pc @ dd.W), dd.W.shape[1]).basis if Q.shape[1] < d else \
        np.eye(dd.W.shape[1])
    if N.shape[1] == 0:
        return np.zeros((1, d))
    U = polytope_vertices(dd.A @ N, dd.b, interior=np.zeros(N.shape[1]))
    return U @ (dd.W @ N).T


@dataclass
class SectionResult:
    value: float
    p: np.ndarray
    f: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    exact: bool = True
    method: str = ""


def _complement(sub: Subspace) -> np.ndarray:
    return sub.complement().basis


def max_seminorm_on_section(inst: Instance, sub: Subspace,
                            cfg: SearchConfig = SearchConfig(),
                            want_pair: bool = True) -> SectionResult:
    """sup ||S p|| over p in D intersected with ``sub``."""
    body, S, t = inst.body, inst.S, inst.op.target_norm
    d = body.dim
    if sub.ambient_dim != d:
        raise ValueError("subspace lives in the wrong ambient space")
    core, off = body.core()
    Q = sub.basis
    if Q.shape[1] == 0:
        res = SectionResult(0.0, np.zeros(d), exact=True, method="trivial")
    elif isinstance(core, LpBall) and core.norm is NormTag.L2:
        res = _ball_section(core.radius, S, Q, t, cfg)
    elif t is NormTag.LINF:
        res = _linf_section_lp(inst, sub)
    else:
        try:
            P = section_vertices(body, sub)
            vals = np.array([norm_eval(S @ p, t) for p in P])
            i = int(np.argmax(vals))
            res = SectionResult(float(vals[i]), _canonical_sign(P[i]), exact=True,
                                method="section-vertices")
        except (TooManyCombinations, QhullError, LpError):
            res = _ascent(inst, sub, cfg)
    if want_pair and res.f is None:
        res.f, res.g = section_pair(inst, res.p)
        # restate p exactly as (f - g)/2 so downstream identities hold
        p2 = (res.f - res.g) / 2.0
        if np.abs(p2 - res.p).max() < 1e-7:
            res.p = p2
            res.value = norm_eval(S @ p2, t)
    return res


def _ball_section(R, S, Q, t, cfg) -> SectionResult:
    T = S @ Q
    if t is NormTag.L2:
        _, s, Vt = np.linalg.svd(T, full_matrices=False)
        u = Vt[0]
        value = R * s[0]
    elif t is NormTag.LINF:
        rn = np.linalg.norm(T, axis=1)
        i = int(np.argmax(rn))
        value = R * rn[i]
        u = T[i] / rn[i] if rn[i] > 0 else np.zeros(T.shape[1])
    else:
        if T.shape[0] > 20:
            return _ball_l1_ascent(R, S, Q, cfg)
        signs = sign_vectors(T.shape[0], half=True)
        W = signs @ T
        nw = np.linalg.norm(W, axis=1)
        i = int(np.argmax(nw))
        value = R * nw[i]
        u = W[i] / nw[i] if nw[i] > 0 else np.zeros(T.shape[1])
    p = _canonical_sign(R * (Q @ u))
    return SectionResult(float(value), p, exact=True, method="ball-closed-form")


def _ball_l1_ascent(R, S, Q, cfg) -> SectionResult:
    T = S @ Q
    best, best_u = -1.0, None
    for k in range(cfg.restarts):
        u = cfg.rng(k).standard_normal(T.shape[1])
        u /= np.linalg.norm(u)
        for _ in range(cfg.max_iters):
            s = np.where(T @ u < 0, -1.0, 1.0)
            w = T.T @ s
            nu = w / np.linalg.norm(w)
            if np.linalg.norm(nu - u) < cfg.tol:
                break
            u = nu
        v = np.abs(T @ u).sum()
        if v > best + 1e-15:
            best, best_u = v, u
    p = _canonical_sign(R * (Q @ best_u))
    return SectionResult(R * best, p, exact=False, method="heuristic-ascent")


def _linf_section_lp(inst: Instance, sub: Subspace) -> SectionResult:
    S = inst.S
    C = _complement(sub)
    best = None
    for i in range(S.shape[0]):
        val, p, f, g = _pair_lp(inst.body, C, S[i])
        if best is None or val > best[0] + 1e-12:
            best = (val, p, f, g)
    val, p, f, g = best
    if p[np.flatnonzero(np.abs(p) > 1e-12)[:1]].sum() < 0:
        p, f, g = -p, g, f
    return SectionResult(float(norm_eval(S @ p, NormTag.LINF)), p, f, g, True, "coordinate-lp")


def _section_argmax_linear(inst: Instance, sub: Subspace, w: np.ndarray) -> np.ndarray:
    """argmax of w . p over p in D intersected with sub."""
    core, _ = inst.body.core()
    if isinstance(core, LpBall) and core.norm is NormTag.L2:
        Q = sub.basis
        v = Q @ (Q.T @ w)
        n = np.linalg.norm(v)
        return core.radius * v / n if n > 0 else np.zeros_like(w)
    _, p, _, _ = _pair_lp(inst.body, _complement(sub), w)
    return p


def _ascent(inst: Instance, sub: Subspace, cfg: SearchConfig) -> SectionResult:
    """Linearisation ascent with random restarts; a local maximum only."""
    S, t = inst.S, inst.op.target_norm
    best = (-1.0, None)
    for k in range(min(cfg.restarts, 8)):
        w = cfg.rng(k).standard_normal(inst.body.dim)
        p = _section_argmax_linear(inst, sub, w)
        val = norm_eval(S @ p, t)
        for _ in range(cfg.max_iters):
            y = S @ p
            if not np.any(np.abs(y) > 1e-15):
                break
            lam = norming_functional(y, t)
            p_new = _section_argmax_linear(inst, sub, S.T @ lam.coefficients)
            v_new = norm_eval(S @ p_new, t)
            if v_new <= val * (1 + cfg.tol):
                break
            p, val = p_new, v_new
        if val > best[0] + 1e-15:
            best = (val, p)
    return SectionResult(float(best[0]), _canonical_sign(best[1]), exact=False,
                         method="heuristic-ascent")


def section_pair(inst: Instance, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """f, g in F with (f - g)/2 = p (p assumed to lie in D)."""
    body = inst.body
    core, off = body.core()
    c = body.symmetry_center()
    if c is not None:
        return c + p, c - p
    _, _, f, g = _pair_lp(body, np.zeros((body.dim, 0)), np.zeros(body.dim), target_p=p)
    return f, g


# --------------------------------------------------------------------------
# inscribed balls

@dataclass
class InscribedBall:
    radius: float
    center: np.ndarray
    certified: bool
    basis: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def unit_ball_hrep(t: NormTag, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Facets of the unit ball of (R^m, ||.||_t) for polyhedral t."""
    if t is NormTag.LINF:
        return np.vstack([np.eye(m), -np.eye(m)]), np.ones(2 * m)
    if t is NormTag.L1:
        return sign_vectors(m), np.ones(2 ** m)
    raise TypeError("l2 unit ball is not a polytope")


def _seminorm_ball_vertices(T: np.ndarray, t: NormTag) -> np.ndarray:
    """Vertices of {z : ||T z||_t <= 1} for injective T and polyhedral t."""
    A0, b0 = unit_ball_hrep(t, T.shape[0])
    return polytope_vertices(A0 @ T, b0, interior=np.zeros(T.shape[1]))


def _support_numbers(T: np.ndarray, t: NormTag, dirs: np.ndarray) -> np.ndarray:
    """h_K(w) for each row w of ``dirs``, K = {z : ||T z||_t <= 1}."""
    if t is NormTag.L2:
        Tp = np.linalg.pinv(T)
        return np.linalg.norm(dirs @ Tp, axis=1)
    Z = _seminorm_ball_vertices(T, t)
    return np.max(dirs @ Z.T, axis=1)


def inscribed_ball(inst: Instance, affine: tuple, cfg: SearchConfig = SearchConfig()
                   ) -> InscribedBall:
    """Largest ball of ||S .|| inside F along an affine plane.

    ``affine = (point, sub)``; with point None the centre is free, otherwise
    it is constrained to point + sub.
    """
    point, sub = affine
    S, t = inst.S, inst.op.target_norm
    W = sub.basis
    k = W.shape[1]
    d = inst.body.dim
    if k == 0:
        raise ValueError("ball subspace must be nontrivial")
    T = S @ W
    smin = np.linalg.svd(T, compute_uv=False)[-1] if T.shape[0] >= k else 0.0
    if smin <= INJECTIVITY_TOL:
        raise NotInjectiveError("S must be injective on the subspace (smallest "
                                f"singular value {smin:.3g})")
    core, off = inst.body.core()
    if isinstance(core, LpBall) and core.norm is NormTag.L2:
        if t is NormTag.L2:
            rho = 1.0 / smin
        else:
            Z = _seminorm_ball_vertices(T, t)
            rho = float(np.linalg.norm(Z, axis=1).max())
        if point is None:
            center = off.copy()
            perp = 0.0
        else:
            a = np.asarray(point, float) - off
            a_perp = a - W @ (W.T @ a)
            perp = float(np.linalg.norm(a_perp))
            center = off + a_perp
        if perp >= core.radius:
            return InscribedBall(0.0, center, True, W)
        r = np.sqrt(core.radius ** 2 - perp ** 2) / rho
        return InscribedBall(float(r), center, True, W)

    h = body_hrep(inst.body)
    if h.E.shape[0] and np.abs(h.E @ W).max() > 1e-9:
        c = _any_point(inst.body) if point is None else np.asarray(point, float)
        return InscribedBall(0.0, c, True, W)
    hk = _support_numbers(T, t, h.A @ W)
    if point is None:
        base, Cmap = np.zeros(d), np.eye(d)
    else:
        base, Cmap = np.asarray(point, float), W
    nc = Cmap.shape[1]
    A_ub = np.hstack([h.A @ Cmap, hk[:, None]])
    b_ub = h.b - h.A @ base
    A_eq = b_eq = None
    if h.E.shape[0]:
        A_eq = np.hstack([h.E @ Cmap, np.zeros((h.E.shape[0], 1))])
        b_eq = h.e - h.E @ base
    obj = np.zeros(nc + 1)
    obj[-1] = 1.0
    try:
        res = lp_solve(LpProblem(obj, A_ub, b_ub, A_eq, b_eq, "max",
                                 [(None, None)] * nc + [(0.0, None)]))
    except InfeasibleError:
        raise ValueError("the affine plane misses the body") from None
    center = base + Cmap @ res.x[:nc]
    # certified radius: recompute from the facet slacks
    slack = h.b - h.A @ center
    if np.any(slack < -CONTAIN_TOL):
        return InscribedBall(0.0, center, False, W)
    pos = hk > 1e-14
    r = float(np.min(np.maximum(slack[pos], 0.0) / hk[pos])) if pos.any() else float(res.x[-1])
    return InscribedBall(r, center, True, W)


def _any_point(body: ConvexBody) -> np.ndarray:
    c = body.symmetry_center()
    if c is not None:
        return c
    core, off = body.core()
    return core.vertices()[0] + off


def fit_scaled_ellipsoid(body: ConvexBody, A0: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest alpha and shift g with alpha * A0(B_l2) + g inside the body."""
    core, off = body.core()
    d, N = A0.shape
    if isinstance(core, LpBall) and core.norm is NormTag.L2:
        nA = np.linalg.norm(A0, 2)
        return (core.radius / nA if nA > 0 else 0.0), off.copy()
    h = body_hrep(body)
    if h.E.shape[0] and np.abs(h.E @ A0).max() > 1e-9:
        return 0.0, _any_point(body)
    hk = np.linalg.norm(h.A @ A0, axis=1)
    A_ub = np.hstack([h.A, hk[:, None]])
    A_eq = b_eq = None
    if h.E.shape[0]:
        A_eq = np.hstack([h.E, np.zeros((h.E.shape[0], 1))])
        b_eq = h.e
    obj = np.zeros(d + 1)
    obj[-1] = 1.0
    res = lp_solve(LpProblem(obj, A_ub, h.b, A_eq, b_eq, "max",
                             [(None, None)] * d + [(0.0, None)]))
    g = res.x[:d]
    slack = h.b - h.A @ g
    pos = hk > 1e-14
    alpha = float(np.min(np.maximum(slack[pos], 0) / hk[pos])) if pos.any() else res.x[-1]
    return alpha, g


# --------------------------------------------------------------------------
# Chebyshev centres of consistent sets

@dataclass
class ChebyshevResult:
    center: np.ndarray
    radius: float
    exact: bool
    vertices: Optional[np.ndarray] = None


def consistent_vertices(body: ConvexBody, N: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vertices of {f in body : N f = y} for a polytopal body."""
    h = body_hrep(body)
    d = body.dim
    Eq = np.vstack([h.E, N]) if N.size else h.E
    eq = np.concatenate([h.e, y]) if N.size else h.e
    if Eq.shape[0]:
        x0, *_ = np.linalg.lstsq(Eq, eq, rcond=None)
        if np.abs(Eq @ x0 - eq).max() > 1e-8 * max(1.0, np.abs(eq).max()):
            raise InconsistentObservationError("observations are inconsistent")
        Q = nullspace(list(Eq), d).basis
    else:
        x0, Q = np.zeros(d), np.eye(d)
    try:
        U = polytope_vertices(h.A @ Q, h.b - h.A @ x0)
    except InfeasibleError:
        raise InconsistentObservationError("no element of the body matches the "
                                           "observations") from None
    return x0 + U @ Q.T


def chebyshev_center(inst: Instance, rows, y, cfg: SearchConfig = SearchConfig()
                     ) -> ChebyshevResult:
    """Centre and radius of S({f in F : N f = y}) in the target norm."""
    S, t = inst.S, inst.op.target_norm
    d = inst.body.dim
    N = np.array([r.coefficients if isinstance(r, Functional) else np.asarray(r, float)
                  for r in rows]).reshape(-1, d)
    y = np.asarray(y, dtype=float).ravel()
    if y.size != N.shape[0]:
        raise ValueError("one observed value per functional is required")
    core, off = inst.body.core()
    if isinstance(core, LpBall) and core.norm is NormTag.L2:
        R = core.radius
        if N.shape[0]:
            x0, *_ = np.linalg.lstsq(N, y, rcond=None)
            if np.abs(N @ x0 - y).max() > 1e-8 * max(1.0, np.abs(y).max()):
                raise InconsistentObservationError("observations are inconsistent")
            Q = nullspace(list(N), d).basis
            x0 = x0 + Q @ (Q.T @ (off - x0))
        else:
            x0, Q = off.copy(), np.eye(d)
        dist = np.linalg.norm(x0 - off)
        if dist > R * (1 + 1e-12):
            raise InconsistentObservationError("observations lie outside the ball")
        rho = np.sqrt(max(R ** 2 - dist ** 2, 0.0))
        return ChebyshevResult(S @ x0, float(rho * l2_to_norm(S @ Q, t)), True)

    V = consistent_vertices(inst.body, N, y)
    Y = V @ S.T
    if t is NormTag.LINF:
        lo, hi = Y.min(axis=0), Y.max(axis=0)
        center = (lo + hi) / 2
        return ChebyshevResult(center, float(np.max(hi - lo) / 2), True, V)
    if t is NormTag.L1:
        center, radius = _l1_center(Y)
        return ChebyshevResult(center, radius, True, V)
    center = _l2_center(Y)
    radius = float(np.linalg.norm(Y - center, axis=1).max())
    return ChebyshevResult(center, radius, False, V)


def _l1_center(Y: np.ndarray) -> tuple[np.ndarray, float]:
    k, m = Y.shape
    # variables: c (m, free), u (k*m, >= 0), rho
    nv = m + k * m + 1
    rows, rhs = [], []
    for j in range(k):
        for i in range(m):
            col = m + j * m + i
            r1 = np.zeros(nv)
            r1[i] = -1.0
            r1[col] = -1.0
            rows.append(r1)
            rhs.append(-Y[j, i])
            r2 = np.zeros(nv)
            r2[i] = 1.0
            r2[col] = -1.0
            rows.append(r2)
            rhs.append(Y[j, i])
        r3 = np.zeros(nv)
        r3[m + j * m:m + (j + 1) * m] = 1.0
        r3[-1] = -1.0
        rows.append(r3)
        rhs.append(0.0)
    obj = np.zeros(nv)
    obj[-1] = 1.0
    bounds = [(None, None)] * m + [(0.0, None)] * (k * m + 1)
    res = lp_solve(LpProblem(obj, np.array(rows), np.array(rhs), sense="min", bounds=bounds))
    c = res.x[:m]
    return c, float(np.abs(Y - c).sum(axis=1).max())


def _l2_center(Y: np.ndarray) -> np.ndarray:
    """Minimal enclosing ball centre of the rows of Y."""
    if Y.shape[0] == 1:
        return Y[0].copy()
    c0 = (Y.min(axis=0) + Y.max(axis=0)) / 2
    r0 = float(np.sum((Y - c0) ** 2, axis=1).max())
    x0 = np.concatenate([c0, [r0]])
    cons = {"type": "ineq",
            "fun": lambda x: x[-1] - np.sum((Y - x[:-1]) ** 2, axis=1),
            "jac": lambda x: np.hstack([2 * (Y - x[:-1]), np.ones((Y.shape[0], 1))])}
    res = minimize(lambda x: x[-1], x0, jac=lambda x: np.eye(len(x))[-1],
                   constraints=[cons], method="SLSQP",
                   options={"maxiter": 500, "ftol": 1e-14})
    c = res.x[:-1]
    if np.linalg.norm(Y - c, axis=1).max() > np.linalg.norm(Y - c0, axis=1).max():
        return c0
    return c
