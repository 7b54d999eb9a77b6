"""Independent reference computations used to freeze expected values.

Nothing here imports the package under test; everything is brute force on
top of numpy and scipy.
"""
import itertools

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

GRID = 3600


def norm(v, kind):
    return float(np.linalg.norm(v, {"l1": 1, "l2": 2, "linf": np.inf}[kind]))


def half_differences(V):
    V = np.asarray(V, float)
    return np.array([(a - b) / 2 for a in V for b in V])


def radial_extent(P, w):
    """max s with s*w in conv(P), by LP over convex weights."""
    k, d = P.shape
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_eq = np.zeros((d + 1, k + 1))
    A_eq[:d, :k] = P.T
    A_eq[:d, -1] = -w
    A_eq[d, :k] = 1.0
    b_eq = np.zeros(d + 1)
    b_eq[d] = 1.0
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k + [(None, None)])
    assert res.status == 0
    return res.x[-1]


def grid_gelfand_plane(S, V, kind, grid=GRID):
    """min over functionals u of the section sup of ||S p|| on D cap ker(u), d = 2."""
    D = half_differences(V)
    best = np.inf
    for th in np.arange(grid) * np.pi / grid:
        w = np.array([-np.sin(th), np.cos(th)])
        s = radial_extent(D, w)
        best = min(best, s * norm(S @ w, kind))
    return best


def grid_kolmogorov_plane(Y, kind, grid=GRID):
    """min over lines M in R^2 of max_y dist(y, M) for the point set Y."""
    best = np.inf
    for th in np.arange(grid) * np.pi / grid:
        u = np.array([np.cos(th), np.sin(th)])
        worst = 0.0
        for y in Y:
            if kind == "l2":
                dist = np.linalg.norm(y - (y @ u) * u)
            else:
                taus = [0.0] + [y[i] / u[i] for i in range(2) if abs(u[i]) > 1e-15]
                if kind == "linf" and abs(u[0] + u[1]) > 1e-15:
                    taus.append((y[0] + y[1]) / (u[0] + u[1]))
                if kind == "linf" and abs(u[0] - u[1]) > 1e-15:
                    taus.append((y[0] - y[1]) / (u[0] - u[1]))
                dist = min(norm(y - t * u, kind) for t in taus)
            worst = max(worst, dist)
        best = min(best, worst)
    return best


def inradius(V):
    """Euclidean inradius of conv(V) (full-dimensional) via the Chebyshev LP."""
    hull = ConvexHull(np.asarray(V, float))
    A = hull.equations[:, :-1]
    b = -hull.equations[:, -1]
    nrm = np.linalg.norm(A, axis=1)
    d = A.shape[1]
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([A, nrm[:, None]]), b_ub=b,
                  bounds=[(None, None)] * d + [(0, None)])
    assert res.status == 0
    return res.x[-1], res.x[:d]


def finite_gelfand(S, V, functionals, n, kind):
    """Exhaustive c_n over n-subsets of the functionals; l_inf target, one LP per coordinate."""
    assert kind == "linf"
    V = np.asarray(V, float)
    best = np.inf
    for combo in itertools.combinations(range(len(functionals)), n):
        L = np.array([functionals[i] for i in combo]).reshape(n, -1)
        val = 0.0
        for i in range(S.shape[0]):
            # max (S(f-g))_i / 2 with L f = L g, f, g in conv(V)
            k = V.shape[0]
            c = -np.concatenate([V @ S[i], -(V @ S[i])]) / 2
            A_eq = np.vstack([np.hstack([L @ V.T, -(L @ V.T)]),
                              np.hstack([np.ones(k), np.zeros(k)]),
                              np.hstack([np.zeros(k), np.ones(k)])])
            b_eq = np.concatenate([np.zeros(n), [1.0, 1.0]])
            res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * (2 * k))
            val = max(val, -res.fun)
        best = min(best, val)
    return best


def sign_vectors(m):
    return np.array(list(itertools.product((-1.0, 1.0), repeat=m)))


def random_compression_l1_linf(m, n, tries, seed):
    """Best sigma_{n+1}(B A) over random A with A(B_2) in B_l1 and ||B||_{linf->2} <= 1."""
    rng = np.random.default_rng(seed)
    signs = sign_vectors(m)
    best = 0.0
    for _ in range(tries):
        k = n + 1
        A = rng.standard_normal((m, k))
        A /= np.max(np.linalg.norm(signs @ A, axis=1))
        B = rng.standard_normal((k, m))
        B /= np.max(np.linalg.norm(signs @ B.T, axis=1))
        best = max(best, np.linalg.svd(B @ A, compute_uv=False)[n])
    return best


def vertex_pair_half_differences(V):
    """Extreme points of (F - F)/2 via the hull of pairwise half differences."""
    D = half_differences(V)
    hull = ConvexHull(D)
    P = D[hull.vertices]
    return P[np.lexsort(P.T[::-1])]
