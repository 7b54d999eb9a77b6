"""Optimal non-adaptive recovery and the sphere Monte Carlo bound."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import (InconsistentObservationError, SearchConfig, chebyshev_center,
                       max_seminorm_on_section, nullspace)
from .spaces import Functional, Instance, LpBall, NormTag
from .widths import ALL_LINEAR, FiniteSet, InfoClass, gelfand

MC_CHUNK = 10_000
Y_SAMPLES = 64


@dataclass(frozen=True, eq=False)
class InformationMap:
    functionals: tuple
    admissible: InfoClass = ALL_LINEAR

    def __post_init__(self):
        fs = tuple(f if isinstance(f, Functional) else Functional(f)
                   for f in self.functionals)
        object.__setattr__(self, "functionals", fs)
        if isinstance(self.admissible, FiniteSet):
            for f in fs:
                if not self.admissible.contains(f):
                    raise ValueError(f"functional {f.coefficients} is not admissible")

    @property
    def matrix(self) -> np.ndarray:
        if not self.functionals:
            return np.zeros((0, 0))
        return np.vstack([f.coefficients for f in self.functionals])

    def __len__(self):
        return len(self.functionals)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([f(x) for f in self.functionals])


@dataclass
class RecoveryReport:
    worst_case_error: float
    radius_of_information: float
    witnesses: tuple
    exact: bool
    lower: float
    upper: float
    method: str = ""
    center: Optional[np.ndarray] = None


def _rows(inst: Instance, info: InformationMap) -> np.ndarray:
    d = inst.body.dim
    return info.matrix.reshape(-1, d) if len(info) else np.zeros((0, d))


def optimal_recovery(inst: Instance, info: InformationMap, y,
                     cfg: SearchConfig = SearchConfig()) -> np.ndarray:
    """Centre of the image of the consistent set {f in F : N f = y}."""
    return chebyshev_center(inst, list(_rows(inst, info)), np.atleast_1d(y), cfg).center


def _observations(inst: Instance, N: np.ndarray, cfg: SearchConfig) -> list[np.ndarray]:
    core, off = inst.body.core()
    if isinstance(core, LpBall) and core.norm is NormTag.L2:
        V = off + core.radius * np.vstack([np.eye(core.dim), -np.eye(core.dim)])
    else:
        V = core.vertices() + off
    ys = [N @ v for v in V]
    rng = cfg.rng(99)
    for _ in range(Y_SAMPLES):
        w = rng.dirichlet(np.ones(V.shape[0]))
        ys.append(N @ (w @ V))
    return ys


def worst_case_error(inst: Instance, info: InformationMap,
                     cfg: SearchConfig = SearchConfig()) -> RecoveryReport:
    """Worst-case error of the centre algorithm, which equals the radius of information."""
    N = _rows(inst, info)
    d = inst.body.dim
    sec = max_seminorm_on_section(inst, nullspace(list(N), d), cfg, want_pair=True)
    core, _ = inst.body.core()
    ball = isinstance(core, LpBall) and core.norm is NormTag.L2
    wit = (sec.f, sec.g)
    if inst.op.target_norm is NormTag.LINF or ball:
        r = sec.value
        return RecoveryReport(r, r, wit, sec.exact, r, r, "kernel-section")
    # general norms: the local radius is sampled over observations
    best = sec.value
    for y in _observations(inst, N, cfg):
        try:
            cc = chebyshev_center(inst, list(N), y, cfg)
        except InconsistentObservationError:
            continue
        best = max(best, cc.radius)
    best = min(best, 2.0 * sec.value)
    return RecoveryReport(best, best, wit, False, sec.value, 2.0 * sec.value,
                          "sampled-observations")


def best_information(inst: Instance, n: int, admissible: InfoClass = ALL_LINEAR,
                     cfg: SearchConfig = SearchConfig()) -> InformationMap:
    """The functionals of the best kernel found while bounding c_n."""
    g = gelfand(inst, n, admissible, cfg)
    rows = g.upper_witness.get("functionals", np.zeros((0, inst.body.dim)))
    dual = inst.op.source_norm.dual
    if isinstance(admissible, FiniteSet):
        fs = [next(f for f in admissible.functionals
                   if np.allclose(f.coefficients, r, atol=1e-12)) for r in rows]
    else:
        fs = [Functional(r, dual) for r in rows]
    return InformationMap(tuple(fs), admissible)


@dataclass
class MonteCarloResult:
    n: int
    samples: int
    seed: int
    coord_second_moment: float
    mean_error_lb: float
    stderr: float
    stderr_error_lb: float = 0.0
    rotated: bool = False

    def to_json(self) -> dict:
        return {"n": self.n, "samples": self.samples, "seed": self.seed,
                "coord_second_moment": self.coord_second_moment,
                "mean_error_lb": self.mean_error_lb, "stderr": self.stderr}


def sphere_mc_lower_bound(n: int, samples: int, seed: int = 42,
                          rotate: bool = False) -> MonteCarloResult:
    """Uniform points on the sphere of R^{2n}, observed through n coordinates.

    coord_second_moment averages the squared mass outside the observed
    coordinates; mean_error_lb averages the radius sqrt(1 - |observed|^2).
    With ``rotate`` the observation directions are a random orthonormal frame.
    """
    if n < 1 or samples < 1:
        raise ValueError("n and samples must be positive")
    dim = 2 * n
    Q = None
    if rotate:
        Q, _ = np.linalg.qr(np.random.default_rng([seed, 2 ** 32]).standard_normal((dim, dim)))
    s1 = s2 = r1 = r2 = 0.0
    done, chunk = 0, 0
    while done < samples:
        k = min(MC_CHUNK, samples - done)
        X = np.random.default_rng([seed, chunk]).standard_normal((k, dim))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        if Q is not None:
            X = X @ Q
        obs = np.sum(X[:, :n] ** 2, axis=1)
        tail = np.sum(X[:, n:] ** 2, axis=1)
        rad = np.sqrt(np.clip(1.0 - obs, 0.0, None))
        s1 += tail.sum()
        s2 += (tail ** 2).sum()
        r1 += rad.sum()
        r2 += (rad ** 2).sum()
        done += k
        chunk += 1
    m = s1 / samples
    mr = r1 / samples

    def se(first, second):
        if samples < 2:
            return 0.0
        var = max(second / samples - first ** 2, 0.0) * samples / (samples - 1)
        return math.sqrt(var / samples)

    return MonteCarloResult(n, samples, seed, float(m), float(mr), se(m, s2),
                            se(mr, r2), rotate)
