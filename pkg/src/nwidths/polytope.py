"""Vertex/facet conversions for small full-dimensional polytopes."""
from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np
from scipy.spatial import ConvexHull, QhullError

MAX_COMBOS = 400_000


class TooManyCombinations(ValueError):
    """Vertex enumeration would exceed the combinatorial budget."""


def unique_rows(P: np.ndarray, decimals: int = 9) -> np.ndarray:
    """Deduplicate rows up to rounding, keeping lexicographic order."""
    if P.shape[0] == 0:
        return P
    key = np.round(P, decimals) + 0.0
    _, idx = np.unique(key, axis=0, return_index=True)
    return P[idx]


def enumerate_vertices(A: np.ndarray, b: np.ndarray, tol: float = 1e-9,
                       max_combos: int = MAX_COMBOS) -> np.ndarray:
    """All vertices of {z : A z <= b}, by brute force over active sets.

    Returns an array of shape (count, k). An unbounded or empty set may yield
    an empty array; callers are expected to pass bounded polyhedra.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    k = A.shape[1]
    if k == 0:
        return np.zeros((1, 0)) if np.all(b >= -tol) else np.zeros((0, 0))
    nrows = A.shape[0]
    if comb(nrows, k) > max_combos:
        raise TooManyCombinations(f"C({nrows},{k}) active sets exceeds budget")
    found = []
    slack = tol * (1.0 + np.abs(b))
    chunk = 20_000
    it = combinations(range(nrows), k)
    while True:
        idx = np.array([c for _, c in zip(range(chunk), it)], dtype=int)
        if idx.size == 0:
            break
        M = A[idx]
        rhs = b[idx]
        sv = np.linalg.svd(M, compute_uv=False)
        ok = sv[:, -1] > 1e-11 * np.maximum(sv[:, 0], 1.0)
        if not ok.any():
            continue
        z = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        feas = np.all(z @ A.T <= b + slack, axis=1)
        if feas.any():
            found.append(z[feas])
    if not found:
        return np.zeros((0, k))
    return unique_rows(np.vstack(found))


def affine_rank(P: np.ndarray, tol: float = 1e-10) -> int:
    if P.shape[0] <= 1:
        return 0
    D = P[1:] - P[0]
    s = np.linalg.svd(D, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def hrep_from_points(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Facet description (A, b) with unit-norm rows of conv(P).

    The hull must be full-dimensional.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    d = P.shape[1]
    if affine_rank(P) < d:
        raise ValueError("polytope is not full-dimensional")
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([P.max(), -P.min()])
    try:
        hull = ConvexHull(P)
    except QhullError as exc:  # pragma: no cover - degenerate input
        raise ValueError(f"convex hull failed: {exc}") from exc
    eq = hull.equations
    A = eq[:, :-1]
    b = -eq[:, -1]
    nrm = np.linalg.norm(A, axis=1)
    A = A / nrm[:, None]
    b = b / nrm
    H = unique_rows(np.hstack([A, b[:, None]]), decimals=8)
    return H[:, :-1], H[:, -1]


def hull_vertices(P: np.ndarray) -> np.ndarray:
    """Extreme points of conv(P) in lexicographic order."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    d = P.shape[1]
    if P.shape[0] <= 1:
        return P.copy()
    if d == 1:
        return np.array([[P.min()], [P.max()]])
    if affine_rank(P) < d:
        # lower-dimensional hull: reduce within the affine span
        c = P.mean(axis=0)
        _, s, Vt = np.linalg.svd(P - c)
        r = int(np.sum(s > 1e-10 * max(1.0, s[0])))
        if r == 0:
            return P[:1].copy()
        Z = (P - c) @ Vt[:r].T
        keep = _extreme_indices(Z)
        return unique_rows(P[keep])
    return unique_rows(P[_extreme_indices(P)])


def _extreme_indices(Z):
    if Z.shape[1] == 1:
        return np.array([np.argmin(Z[:, 0]), np.argmax(Z[:, 0])])
    return ConvexHull(Z).vertices
