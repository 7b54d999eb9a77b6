"""Finite-dimensional sequence spaces, operators and convex bodies.

Everything is real. Norms are restricted to l1, l2 and l-infinity, which is
what makes every support/membership question below answerable exactly.
"""
from __future__ import annotations

import enum
import itertools
import weakref
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lp import InfeasibleError, LpProblem, UnboundedError, lp_solve
from .polytope import enumerate_vertices, hrep_from_points, hull_vertices

MEMBERSHIP_TOL = 1e-9


class NormTag(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self) -> "NormTag":
        return _DUAL[self]

    @classmethod
    def parse(cls, text) -> "NormTag":
        if isinstance(text, NormTag):
            return text
        key = str(text).strip().lower()
        aliases = {"l1": cls.L1, "1": cls.L1, "l2": cls.L2, "2": cls.L2,
                   "linf": cls.LINF, "inf": cls.LINF, "l_inf": cls.LINF}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown norm {text!r}; expected l1, l2 or linf") from None


_DUAL = {NormTag.L1: NormTag.LINF, NormTag.L2: NormTag.L2, NormTag.LINF: NormTag.L1}
_ORD = {NormTag.L1: 1, NormTag.L2: 2, NormTag.LINF: np.inf}


def norm_eval(v, t: NormTag) -> float:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.linalg.norm(v.ravel(), _ORD[t]))


def operator_norm_to_l2(B: np.ndarray, t: NormTag) -> float:
    """Norm of B : (R^m, ||.||_t) -> l2^k.

    Exact for l1 (largest column) and l2 (spectral). For linf the maximum of
    ||Bs||_2 over sign vectors is exact up to m = 20 and replaced by the sum of
    column norms (an upper bound) beyond that.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.size == 0:
        return 0.0
    if t is NormTag.L2:
        return float(np.linalg.norm(B, 2))
    if t is NormTag.L1:
        return float(np.linalg.norm(B, axis=0).max())
    m = B.shape[1]
    if m > 20:
        return float(np.linalg.norm(B, axis=0).sum())
    signs = sign_vectors(m)
    return float(np.linalg.norm(signs @ B.T, axis=1).max())


def l2_to_norm(T: np.ndarray, t: NormTag) -> float:
    """Norm of T : l2^k -> (R^m, ||.||_t), exact for all three targets."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if T.size == 0:
        return 0.0
    if t is NormTag.L2:
        return float(np.linalg.norm(T, 2))
    if t is NormTag.LINF:
        return float(np.linalg.norm(T, axis=1).max())
    return float(np.linalg.norm(sign_vectors(T.shape[0], half=True) @ T, axis=1).max())


def sign_vectors(m: int, half: bool = False) -> np.ndarray:
    """All vectors in {-1, 1}^m; with ``half`` only those with first entry +1."""
    if m == 0:
        return np.ones((1, 0))
    rows = np.array(list(itertools.product((1.0, -1.0), repeat=m)))
    if half:
        rows = rows[rows[:, 0] > 0]
    return rows


@dataclass(frozen=True, eq=False)
class Functional:
    """A linear functional x -> coefficients . x, measured in ``dual_norm``."""

    coefficients: np.ndarray
    dual_norm: NormTag = NormTag.L2

    def __post_init__(self):
        object.__setattr__(self, "coefficients",
                           np.asarray(self.coefficients, dtype=float).ravel())

    def __call__(self, x) -> float:
        return float(self.coefficients @ np.asarray(x, dtype=float))

    @property
    def norm(self) -> float:
        return norm_eval(self.coefficients, self.dual_norm)

    def __neg__(self):
        return Functional(-self.coefficients, self.dual_norm)


def norming_functional(y, t: NormTag) -> Functional:
    """lambda in the dual unit ball with lambda(y) = ||y||_t.

    Ties in linf go to the smallest index; zero coordinates in l1 get sign +1.
    """
    y = np.asarray(y, dtype=float).ravel()
    if not np.any(y):
        raise ValueError("the zero vector has no unique norming functional")
    if t is NormTag.L2:
        # rescale first so subnormal inputs do not underflow
        z = y / np.max(np.abs(y))
        coef = z / np.linalg.norm(z)
    elif t is NormTag.LINF:
        i = int(np.argmax(np.abs(y)))
        coef = np.zeros_like(y)
        coef[i] = 1.0 if y[i] > 0 else -1.0
    else:
        coef = np.where(y < 0, -1.0, 1.0)
    return Functional(coef, t.dual)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense matrix S : (R^d, source_norm) -> (R^m, target_norm)."""

    matrix: np.ndarray
    source_norm: NormTag = NormTag.L2
    target_norm: NormTag = NormTag.L2

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if M.ndim != 2 or min(M.shape) < 1:
            raise ValueError("operator matrix must be a non-empty 2-d array")
        if not np.all(np.isfinite(M)):
            raise ValueError("operator matrix has non-finite entries")
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "source_norm", NormTag.parse(self.source_norm))
        object.__setattr__(self, "target_norm", NormTag.parse(self.target_norm))

    @property
    def source_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def target_dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x):
        return self.matrix @ np.asarray(x, dtype=float)

    def scaled(self, factor: float) -> "Operator":
        return Operator(factor * self.matrix, self.source_norm, self.target_norm)

    def rank(self, tol: float = 1e-10) -> int:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(s > tol * max(1.0, s[0])))


# --------------------------------------------------------------------------
# convex bodies

_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _cached(body, key, compute):
    slot = _CACHE.setdefault(body, {})
    if key not in slot:
        slot[key] = compute()
    return slot[key]


class ConvexBody:
    """Nonempty compact convex subset of R^dim."""

    dim: int
    is_polytope: bool = True

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def support(self, direction) -> float:
        raise NotImplementedError

    def vertices(self) -> np.ndarray:
        raise TypeError(f"{type(self).__name__} is not a polytope")

    def hrep(self) -> tuple[np.ndarray, np.ndarray]:
        raise TypeError(f"{type(self).__name__} is not a polytope")

    def symmetry_center(self) -> Optional[np.ndarray]:
        """Center c with body - c = c - body, or None."""
        raise NotImplementedError

    @property
    def is_symmetric(self) -> bool:
        return self.symmetry_center() is not None

    def core(self) -> tuple["ConvexBody", np.ndarray]:
        """Strip translations: returns (inner body, total offset)."""
        return self, np.zeros(self.dim)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class LpBall(ConvexBody):
    norm: NormTag
    radius: float
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "norm", NormTag.parse(self.norm))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")

    @property
    def is_polytope(self) -> bool:
        return self.norm is not NormTag.L2

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return norm_eval(x, self.norm) <= self.radius + tol

    def support(self, direction):
        return self.radius * norm_eval(_coef(direction), self.norm.dual)

    def vertices(self):
        r, d = self.radius, self.dim
        if self.norm is NormTag.L1:
            V = np.zeros((2 * d, d))
            for i in range(d):
                V[2 * i, i] = r
                V[2 * i + 1, i] = -r
            return V
        if self.norm is NormTag.LINF:
            return r * sign_vectors(d)
        return super().vertices()

    def hrep(self):
        r, d = self.radius, self.dim
        if self.norm is NormTag.L1:
            S = sign_vectors(d)
            return S / np.sqrt(d), np.full(len(S), r / np.sqrt(d))
        if self.norm is NormTag.LINF:
            return np.vstack([np.eye(d), -np.eye(d)]), np.full(2 * d, r)
        return super().hrep()

    def symmetry_center(self):
        return np.zeros(self.dim)

    def to_json(self):
        return {"type": "lp_ball", "norm": self.norm.value, "radius": self.radius,
                "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Simplex(ConvexBody):
    """{x >= 0, sum(x) <= 1} in R^dim."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= -tol) and x.sum() <= 1.0 + tol)

    def support(self, direction):
        return max(0.0, float(np.max(_coef(direction))))

    def vertices(self):
        return np.vstack([np.zeros(self.dim), np.eye(self.dim)])

    def hrep(self):
        d = self.dim
        A = np.vstack([-np.eye(d), np.ones((1, d)) / np.sqrt(d)])
        b = np.concatenate([np.zeros(d), [1.0 / np.sqrt(d)]])
        return A, b

    def symmetry_center(self):
        return np.array([0.5]) if self.dim == 1 else None

    def to_json(self):
        return {"type": "simplex", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class VPolytope(ConvexBody):
    """Convex hull of a finite point list (rows)."""

    points: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        if P.shape[0] == 0 or P.shape[1] == 0:
            raise ValueError("vertex list must be nonempty")
        if not np.all(np.isfinite(P)):
            raise ValueError("vertices must be finite")
        object.__setattr__(self, "points", P)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        V = self.points
        k, d = V.shape
        # min s  s.t. |x - V^T w|_inf <= s, w in the unit simplex
        c = np.zeros(k + 1)
        c[-1] = 1.0
        A_ub = np.block([[-V.T, -np.ones((d, 1))], [V.T, -np.ones((d, 1))]])
        b_ub = np.concatenate([-x, x])
        A_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
        res = lp_solve(LpProblem(c, A_ub, b_ub, A_eq, [1.0], "min"))
        return res.value <= tol

    def support(self, direction):
        return float(np.max(self.points @ _coef(direction)))

    def vertices(self):
        return _cached(self, "vertices", lambda: hull_vertices(self.points))

    def hrep(self):
        return _cached(self, "hrep", lambda: hrep_from_points(self.vertices()))

    def symmetry_center(self):
        return _cached(self, "center", lambda: _vertex_symmetry(self.vertices()))

    def to_json(self):
        return {"type": "vpolytope", "vertices": self.points.tolist()}


@dataclass(frozen=True, eq=False)
class HPolytope(ConvexBody):
    """{x : A x <= b}; nonemptiness and boundedness are checked by LP."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise ValueError("A and b have inconsistent sizes")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        d = A.shape[1]
        free = [(None, None)] * d
        try:
            for i in range(d):
                for s in (1.0, -1.0):
                    e = np.zeros(d)
                    e[i] = s
                    lp_solve(LpProblem(e, A, b, bounds=free))
        except InfeasibleError:
            raise ValueError("H-polytope is empty") from None
        except UnboundedError:
            raise ValueError("H-polytope is unbounded") from None

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        nrm = np.linalg.norm(self.A, axis=1)
        return bool(np.all(self.A @ x - self.b <= tol * np.maximum(nrm, 1e-300)))

    def support(self, direction):
        res = lp_solve(LpProblem(_coef(direction), self.A, self.b,
                                 bounds=[(None, None)] * self.dim))
        return res.value

    def vertices(self):
        return _cached(self, "vertices", lambda: enumerate_vertices(self.A, self.b))

    def hrep(self):
        nrm = np.linalg.norm(self.A, axis=1)
        keep = nrm > 0
        return self.A[keep] / nrm[keep, None], self.b[keep] / nrm[keep]

    def symmetry_center(self):
        return _cached(self, "center", lambda: _vertex_symmetry(self.vertices()))

    def to_json(self):
        return {"type": "hpolytope", "A": self.A.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True, eq=False)
class Shifted(ConvexBody):
    inner: ConvexBody
    offset: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.offset, dtype=float).ravel()
        if o.size != self.inner.dim:
            raise ValueError("offset dimension does not match the inner body")
        object.__setattr__(self, "offset", o)

    @property
    def dim(self) -> int:
        return self.inner.dim

    @property
    def is_polytope(self) -> bool:
        return self.inner.is_polytope

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return self.inner.contains(np.asarray(x, dtype=float) - self.offset, tol)

    def support(self, direction):
        f = _coef(direction)
        return self.inner.support(f) + float(f @ self.offset)

    def vertices(self):
        return self.inner.vertices() + self.offset

    def hrep(self):
        A, b = self.inner.hrep()
        return A, b + A @ self.offset

    def symmetry_center(self):
        c = self.inner.symmetry_center()
        return None if c is None else c + self.offset

    def core(self):
        inner, off = self.inner.core()
        return inner, off + self.offset

    def to_json(self):
        return {"type": "shifted", "inner": self.inner.to_json(),
                "offset": self.offset.tolist()}


def _coef(direction) -> np.ndarray:
    if isinstance(direction, Functional):
        return direction.coefficients
    return np.asarray(direction, dtype=float).ravel()


def _vertex_symmetry(V: np.ndarray) -> Optional[np.ndarray]:
    c = V.mean(axis=0)
    R = np.round(2 * c - V, 8) + 0.0
    key = np.round(V, 8) + 0.0
    if {tuple(r) for r in R} == {tuple(r) for r in key}:
        return c
    return None


def membership(body: ConvexBody, x, tol: float = MEMBERSHIP_TOL) -> bool:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != body.dim:
        raise ValueError(f"point has dimension {x.size}, body has {body.dim}")
    return body.contains(x, tol)


def support_value(body: ConvexBody, f) -> float:
    f = _coef(f)
    if f.size != body.dim:
        raise ValueError(f"functional has dimension {f.size}, body has {body.dim}")
    return body.support(f)


def half_difference_body(body: ConvexBody) -> ConvexBody:
    """{(f - g)/2 : f, g in body}: a symmetric body centred at the origin."""
    core, _ = body.core()
    if isinstance(core, LpBall):
        return core
    if not core.is_polytope:
        raise TypeError(f"half-difference of {type(core).__name__} is unsupported")

    def build():
        V = core.vertices()
        P = (V[:, None, :] - V[None, :, :]).reshape(-1, V.shape[1]) / 2.0
        return VPolytope(hull_vertices(P))

    return _cached(core, "half_difference", build)


# --------------------------------------------------------------------------
# instances and subspaces

@dataclass(frozen=True, eq=False)
class Instance:
    """The pair (operator, body) together with an optional label."""

    op: Operator
    body: ConvexBody
    name: str = ""

    def __post_init__(self):
        if self.body.dim != self.op.source_dim:
            raise ValueError(f"body dimension {self.body.dim} does not match "
                             f"operator source dimension {self.op.source_dim}")

    @property
    def S(self) -> np.ndarray:
        return self.op.matrix

    def scaled(self, factor: float) -> "Instance":
        return Instance(self.op.scaled(factor), self.body, self.name)

    def to_json(self) -> dict:
        out = {"matrix": self.op.matrix.tolist(),
               "source_norm": self.op.source_norm.value,
               "target_norm": self.op.target_norm.value,
               "body": self.body.to_json()}
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: dict, name: str = "") -> "Instance":
        for key in ("matrix", "body"):
            if key not in data:
                raise ValueError(f"instance is missing field {key!r}")
        op = Operator(np.asarray(data["matrix"], dtype=float),
                      NormTag.parse(data.get("source_norm", "l2")),
                      NormTag.parse(data.get("target_norm", "l2")))
        body = body_from_json(data["body"], op.source_dim)
        return cls(op, body, data.get("name", name))


def body_from_json(spec: dict, dim: Optional[int] = None) -> ConvexBody:
    try:
        kind = spec["type"]
    except (KeyError, TypeError):
        raise ValueError("body needs a 'type' field") from None
    if kind == "lp_ball":
        d = spec.get("dim", dim)
        if d is None:
            raise ValueError("lp_ball needs 'dim'")
        return LpBall(NormTag.parse(spec.get("norm", "l2")),
                      float(spec.get("radius", 1.0)), int(d))
    if kind == "simplex":
        return Simplex(int(spec.get("dim", dim)))
    if kind == "vpolytope":
        return VPolytope(np.asarray(spec["vertices"], dtype=float))
    if kind == "hpolytope":
        return HPolytope(np.asarray(spec["A"], dtype=float),
                         np.asarray(spec["b"], dtype=float))
    if kind == "shifted":
        return Shifted(body_from_json(spec["inner"], dim),
                       np.asarray(spec["offset"], dtype=float))
    raise ValueError(f"unknown body type {kind!r}")


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace given by an orthonormal basis (columns)."""

    basis: np.ndarray
    ambient_dim: int = field(default=-1)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        amb = self.ambient_dim if self.ambient_dim >= 0 else B.shape[0]
        if B.shape[0] != amb:
            raise ValueError("basis rows must equal the ambient dimension")
        if B.shape[1] and np.abs(B.T @ B - np.eye(B.shape[1])).max() > 1e-10:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "ambient_dim", amb)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def full(cls, d: int) -> "Subspace":
        return cls(np.eye(d), d)

    @classmethod
    def span(cls, vectors, ambient_dim: int, tol: float = 1e-10) -> "Subspace":
        """Orthonormal basis of the span of the given vectors (rows)."""
        V = np.asarray(vectors, dtype=float).reshape(-1, ambient_dim)
        if V.shape[0] == 0:
            return cls(np.zeros((ambient_dim, 0)), ambient_dim)
        U, s, _ = np.linalg.svd(V.T, full_matrices=False)
        r = int(np.sum(s > tol * max(1.0, s[0])))
        return cls(U[:, :r], ambient_dim)

    def complement(self) -> "Subspace":
        d = self.ambient_dim
        if self.dim == 0:
            return Subspace.full(d)
        U, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(U[:, self.dim:], d)

    def project(self, x):
        return self.basis @ (self.basis.T @ np.asarray(x, dtype=float))
