"""Greedy witness chains and the triangular compression S_n = B S A.

Step k maximises ||S p|| over D intersected with the joint kernel M_k of the
functionals chosen so far, picks a norming functional lambda_k of S p_k and
sets L_k = lambda_k o S. Because L_j(p_k) = 0 for j < k, the compression
B S A is lower triangular and its determinant is the product of the step
values times a variant-dependent power of the chain length.
"""
from __future__ import annotations

import enum
import math
import weakref
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numerics import (CONTAIN_TOL, SearchConfig, body_hrep, max_seminorm_on_section,
                       nullspace)
from .spaces import (Functional, Instance, LpBall, NormTag, membership, norming_functional,
                     operator_norm_to_l2)

COLLAPSE_TOL = 1e-12
DEFAULT_EPS = 1e-3


class UncertifiedError(ValueError):
    """The requested quantity rests on a heuristic (non-exact) maximisation."""


class ChainVariant(enum.Enum):
    GENERAL = "general"
    SYMMETRIC_F = "symmetric_f"
    HILBERT_TARGET = "hilbert_target"
    HILBERT_SOURCE_BALL = "hilbert_source_ball"

    @classmethod
    def parse(cls, text) -> "ChainVariant":
        if isinstance(text, ChainVariant):
            return text
        key = str(text).strip().lower().replace("-", "_")
        for v in cls:
            if v.value == key or v.name.lower() == key:
                return v
        raise ValueError(f"unknown chain variant {text!r}")


def _is_source_ball(inst: Instance) -> bool:
    core, _ = inst.body.core()
    return (inst.op.source_norm is NormTag.L2 and isinstance(core, LpBall)
            and core.norm is NormTag.L2)


def admissible_variants(inst: Instance) -> list[ChainVariant]:
    out = [ChainVariant.GENERAL]
    if inst.body.is_symmetric:
        out.append(ChainVariant.SYMMETRIC_F)
    if inst.op.target_norm is NormTag.L2:
        out.append(ChainVariant.HILBERT_TARGET)
    if _is_source_ball(inst):
        out.append(ChainVariant.HILBERT_SOURCE_BALL)
    return out


def check_admissible(inst: Instance, variant: ChainVariant) -> None:
    if variant not in admissible_variants(inst):
        reasons = {
            ChainVariant.SYMMETRIC_F: "the body is not centrally symmetric",
            ChainVariant.HILBERT_TARGET: "the target norm is not l2",
            ChainVariant.HILBERT_SOURCE_BALL: "needs an l2 source norm and an l2-ball body",
        }
        raise ValueError(f"variant {variant.value} not admissible: {reasons[variant]}")


@dataclass
class ChainStep:
    p: np.ndarray
    f: np.ndarray
    g: np.ndarray
    lam: Functional
    L: Functional
    value: float
    exact: bool
    constraints: int


@dataclass
class WitnessChain:
    variant: ChainVariant
    eps: float
    steps: list
    requested: int
    A: np.ndarray
    B: np.ndarray
    shift: np.ndarray
    S_n: np.ndarray
    gamma: float
    combined: bool

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def truncated(self) -> bool:
        return self.length < self.requested

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.steps])

    def index_map(self) -> list[int]:
        """Width index whose Gelfand number step k dominates."""
        if self.variant is ChainVariant.HILBERT_SOURCE_BALL:
            return [2 * k for k in range(self.length)]
        return list(range(self.length))


_STEP_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _greedy_steps(inst: Instance, n: int, variant: ChainVariant,
                  cfg: SearchConfig) -> list[ChainStep]:
    """The first n greedy steps; prefixes are shared between calls."""
    slot = _STEP_CACHE.setdefault(inst, {})
    key = (variant is ChainVariant.HILBERT_SOURCE_BALL, cfg)
    steps, done = slot.get(key, ([], False))
    S, t = inst.S, inst.op.target_norm
    d = inst.body.dim
    src_dual = inst.op.source_norm.dual
    while len(steps) < n and not done:
        rows = [s.L.coefficients for s in steps]
        if variant is ChainVariant.HILBERT_SOURCE_BALL:
            rows += [s.p for s in steps]
        sub = nullspace(rows, d)
        res = max_seminorm_on_section(inst, sub, cfg, want_pair=True)
        if res.value < COLLAPSE_TOL:
            done = True
            break
        lam = norming_functional(S @ res.p, t)
        L = Functional(S.T @ lam.coefficients, src_dual)
        steps = steps + [ChainStep(res.p, res.f, res.g, lam, L, float(res.value),
                                   res.exact, len(rows))]
    slot[key] = (steps, done)
    return steps[:n]


def _scales(inst: Instance, variant: ChainVariant, N: int):
    """(A scale, B scale, uses body centre, gamma, combined)."""
    symmetric = inst.body.is_symmetric
    hilbert = inst.op.target_norm is NormTag.L2
    rt = math.sqrt(N)
    if variant is ChainVariant.GENERAL:
        return 1.0 / N, 1.0 / rt, False, 1.5, False
    if variant is ChainVariant.HILBERT_SOURCE_BALL:
        return 1.0, 1.0 / rt, True, 0.5, False
    if symmetric and hilbert:
        return 1.0 / rt, 1.0, True, 0.5, True
    if variant is ChainVariant.SYMMETRIC_F:
        return 1.0 / rt, 1.0 / rt, True, 1.0, False
    return 1.0 / N, 1.0, False, 1.0, False


def assemble(inst: Instance, steps: list, variant: ChainVariant, eps: float,
             requested: Optional[int] = None) -> WitnessChain:
    d, m = inst.body.dim, inst.S.shape[0]
    N = len(steps)
    if N == 0:
        z = np.zeros((0, 0))
        c = inst.body.symmetry_center()
        return WitnessChain(variant, eps, [], requested or 0, np.zeros((d, 0)),
                            np.zeros((0, m)), c if c is not None else np.zeros(d), z,
                            _scales(inst, variant, 1)[3], False)
    a, b, centred, gamma, combined = _scales(inst, variant, N)
    P = np.column_stack([s.p for s in steps])
    Lam = np.vstack([s.lam.coefficients for s in steps])
    A = a * P
    B = b * Lam
    if centred:
        shift = inst.body.symmetry_center()
    else:
        shift = np.mean([(s.f + s.g) / 2.0 for s in steps], axis=0)
    S_n = B @ inst.S @ A
    return WitnessChain(variant, eps, list(steps), requested if requested else N,
                        A, B, shift, S_n, gamma, combined)


def build_chain(inst: Instance, n: int, variant=ChainVariant.GENERAL,
                eps: float = DEFAULT_EPS, cfg: SearchConfig = SearchConfig()) -> WitnessChain:
    """Greedy chain with n requested steps (fewer if the section collapses)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if n < 1:
        raise ValueError("a chain needs at least one step")
    variant = ChainVariant.parse(variant)
    check_admissible(inst, variant)
    steps = _greedy_steps(inst, n, variant, cfg)
    return assemble(inst, steps, variant, eps, requested=n)


@dataclass
class ChainCertificate:
    containment_ok: bool
    contraction_ok: bool
    triangular_ok: bool
    det_lower: float
    det_actual: float
    sigma: np.ndarray
    per_step_hilbert_lb: np.ndarray
    gamma: float
    length: int
    log_gm_lhs: float = -math.inf
    log_gm_rhs: float = -math.inf
    steps_exact: bool = True
    notes: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.containment_ok and self.contraction_ok and self.triangular_ok

    @property
    def det_ok(self) -> bool:
        return self.det_actual >= self.det_lower - 1e-8

    @property
    def geometric_mean_ok(self) -> bool:
        return self.log_gm_lhs <= self.log_gm_rhs + 1e-9


def containment_ok(inst: Instance, A: np.ndarray, g: np.ndarray,
                   samples: int = 1000, seed: int = 0) -> bool:
    """A(B_l2) + g inside the body."""
    core, off = inst.body.core()
    if A.shape[1] == 0:
        return membership(inst.body, g)
    if isinstance(core, LpBall) and core.norm is NormTag.L2:
        ok = np.linalg.norm(g - off) + np.linalg.norm(A, 2) <= core.radius * (1 + 1e-12) + CONTAIN_TOL
        if ok and samples:
            rng = np.random.default_rng(seed)
            xi = rng.standard_normal((samples, A.shape[1]))
            xi /= np.linalg.norm(xi, axis=1, keepdims=True)
            pts = xi @ A.T + g
            ok = bool(np.all(np.linalg.norm(pts - off, axis=1) <= core.radius + CONTAIN_TOL))
        return bool(ok)
    h = body_hrep(inst.body)
    lhs = h.A @ g + np.linalg.norm(h.A @ A, axis=1)
    scale = max(1.0, float(np.abs(h.b).max(initial=0.0)))
    ok = bool(np.all(lhs <= h.b + CONTAIN_TOL * scale))
    if h.E.shape[0]:
        ok = ok and np.abs(h.E @ A).max() <= 1e-9 and np.abs(h.E @ g - h.e).max() <= 1e-9
    return ok


def contraction_ok(inst: Instance, B: np.ndarray) -> bool:
    if B.shape[0] == 0:
        return True
    return bool(operator_norm_to_l2(B, inst.op.target_norm) <= 1.0 + 1e-10)


def certify_chain(chain: WitnessChain, inst: Instance) -> ChainCertificate:
    N = chain.length
    if N == 0:
        return ChainCertificate(True, True, True, 0.0, 0.0, np.zeros(0), np.zeros(0),
                                chain.gamma, 0, notes=["empty chain"])
    cont = containment_ok(inst, chain.A, chain.shift)
    contr = contraction_ok(inst, chain.B)
    Sn = chain.S_n
    upper = np.triu(Sn, 1)
    tri = bool(np.abs(upper).max(initial=0.0) <= 1e-8 * max(1.0, np.abs(Sn).max()))
    resid = np.abs(chain.B @ inst.S @ chain.A - Sn).max()
    tri = tri and resid <= 1e-10 * max(1.0, np.abs(Sn).max())
    sigma = np.linalg.svd(Sn, compute_uv=False)
    vals = chain.values
    with np.errstate(divide="ignore"):
        log_vals = np.log(vals / (1 + chain.eps))
        log_sig = np.log(sigma)
    log_det_actual = float(np.sum(log_sig))
    log_det_lower = float(np.sum(log_vals) - chain.gamma * N * math.log(N))
    lhs = float(np.mean(log_vals))
    rhs = chain.gamma * math.log(N) + math.log(1 + chain.eps) + log_det_actual / N
    notes = []
    exact = all(s.exact for s in chain.steps)
    if not exact:
        notes.append("heuristic step maximisation")
    if chain.truncated:
        notes.append(f"chain truncated at {N} of {chain.requested} steps")
    return ChainCertificate(cont, contr, tri, math.exp(log_det_lower), math.exp(log_det_actual),
                            sigma, sigma.copy(), chain.gamma, N, lhs, rhs, exact, notes)


def chain_gelfand_lower(chain: WitnessChain, k: int) -> float:
    """Stored step value over (1 + eps), the quantity entering the determinant bound."""
    if not 0 <= k < chain.length:
        raise IndexError(f"step {k} outside chain of length {chain.length}")
    step = chain.steps[k]
    if not step.exact:
        raise UncertifiedError(f"step {k} was maximised heuristically")
    return step.value / (1 + chain.eps)


def chain_to_json(chain: WitnessChain, cert: Optional[ChainCertificate] = None) -> dict:
    out = {
        "variant": chain.variant.value,
        "eps": chain.eps,
        "gamma": chain.gamma,
        "combined": chain.combined,
        "requested": chain.requested,
        "length": chain.length,
        "index_map": chain.index_map(),
        "steps": [{"p": s.p.tolist(), "f": s.f.tolist(), "g": s.g.tolist(),
                   "lambda": s.lam.coefficients.tolist(), "L": s.L.coefficients.tolist(),
                   "value": s.value, "exact": s.exact} for s in chain.steps],
        "A": chain.A.tolist(),
        "B": chain.B.tolist(),
        "shift": np.asarray(chain.shift).tolist(),
        "S_n": chain.S_n.tolist(),
    }
    if cert is not None:
        out["certificate"] = {
            "containment_ok": bool(cert.containment_ok),
            "contraction_ok": bool(cert.contraction_ok),
            "triangular_ok": bool(cert.triangular_ok),
            "det_lower": float(cert.det_lower),
            "det_actual": float(cert.det_actual),
            "sigma": cert.sigma.tolist(),
            "per_step_hilbert_lb": cert.per_step_hilbert_lb.tolist(),
            "geometric_mean_ok": bool(cert.geometric_mean_ok),
            "notes": cert.notes,
        }
    return out
