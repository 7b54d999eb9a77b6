"""Machine checks of width inequalities on concrete instances.

Each check reads only the bound side that keeps the comparison sound: lower
bounds on the left, upper bounds on the right. A certified comparison that
fails is therefore a genuine bug, never a numerical artefact of the search.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .numerics import SearchConfig
from .recovery import best_information, sphere_mc_lower_bound, worst_case_error
from .spaces import (Instance, LpBall, NormTag, Operator, Shifted, Simplex, VPolytope)
from .widths import (ALL_LINEAR, approximation, bernstein, gelfand, hilbert, kolmogorov,
                     standard_information)
from .witness import (ChainVariant, UncertifiedError, admissible_variants, build_chain,
                      certify_chain, chain_gelfand_lower)

TOL = 1e-6


@dataclass
class InequalityReport:
    name: str
    instance: str
    n: int
    lhs: float
    rhs: float
    factor: float
    holds: Optional[bool]
    sides_certified: bool
    note: str = ""

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def failed(self) -> bool:
        return self.sides_certified and self.holds is False

    def row(self) -> dict:
        return {"name": self.name, "instance": self.instance, "n": self.n,
                "lhs": _fmt(self.lhs), "rhs": _fmt(self.rhs), "factor": _fmt(self.factor),
                "margin": _fmt(self.margin),
                "holds": "n/a" if self.holds is None else str(self.holds).lower(),
                "sides_certified": str(self.sides_certified).lower(), "note": self.note}


@dataclass
class RateReport:
    name: str
    alpha: float
    residual: float
    points: int


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _report(name, instance, n, lhs, rhs, factor=1.0, certified=True, note="") -> InequalityReport:
    return InequalityReport(name, instance, n, float(lhs), float(rhs), float(factor),
                            bool(lhs <= rhs + TOL), certified, note)


def _name(inst: Instance) -> str:
    return inst.name or "instance"


def _gamma(inst: Instance) -> float:
    """Exponent of the determinant bound for the best variant the instance admits."""
    sym = inst.body.is_symmetric
    hil = inst.op.target_norm is NormTag.L2
    if sym and hil:
        return 0.5
    if sym or hil:
        return 1.0
    return 1.5


# --------------------------------------------------------------------------
# width-level checks

def check_ordering(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()
                   ) -> list[InequalityReport]:
    h, b, c = hilbert(inst, n, cfg), bernstein(inst, n, cfg), gelfand(inst, n, ALL_LINEAR, cfg)
    return [
        _report("ordering_h_le_b", _name(inst), n, h.lower, b.upper,
                certified=h.lower_certified and b.upper_certified),
        _report("ordering_b_le_c", _name(inst), n, b.lower, c.upper,
                certified=b.lower_certified and c.upper_certified),
    ]


def check_geometric_mean(inst: Instance, n: int, variant,
                         cfg: SearchConfig = SearchConfig(), eps: float = 1e-3
                         ) -> list[InequalityReport]:
    """Certificate-level determinant and geometric-mean inequalities for a chain of length n."""
    variant = ChainVariant.parse(variant)
    name = _name(inst)
    chain = build_chain(inst, n, variant, eps, cfg)
    tag = f"[{variant.value}]"
    if chain.truncated or chain.length == 0:
        return [InequalityReport("chain_geometric_mean" + tag, name, n, 0.0, 0.0, 0.0, None,
                                 False, "chain truncated")]
    cert = certify_chain(chain, inst)
    ok = cert.valid and cert.steps_exact
    try:
        lhs = math.exp(np.mean([math.log(chain_gelfand_lower(chain, k))
                                for k in range(chain.length)]))
    except UncertifiedError:
        lhs, ok = math.exp(cert.log_gm_lhs), False
    rhs = math.exp(cert.log_gm_rhs)
    out = [
        _report("chain_certificate" + tag, name, n, 0.0 if cert.valid else 1.0, 0.0,
                certified=True, note="containment, contraction, triangularity"),
        _report("chain_determinant" + tag, name, n, cert.det_lower, cert.det_actual,
                certified=ok),
        _report("chain_geometric_mean" + tag, name, n, lhs, rhs, chain.length ** cert.gamma,
                certified=ok),
    ]
    return out


def check_singular_geometric_mean(sigma: Sequence[float], n: int, gamma: float = 0.5,
                                  name: str = "svd") -> InequalityReport:
    """sigma_n <= n^gamma (prod_{k<=n} sigma_k)^{1/n}, sigma 1-based."""
    s = np.asarray(sigma, dtype=float)[:n]
    rhs = n ** gamma * math.exp(np.mean(np.log(s)))
    return _report("svd_geometric_mean", name, n, s[n - 1], rhs, n ** gamma)


def check_width_geometric_mean(inst: Instance, N: int, cfg: SearchConfig = SearchConfig()
                               ) -> InequalityReport:
    """c_{N-1} <= N^gamma (prod_{k<N} h_k)^{1/N} with certified sides."""
    g = _gamma(inst)
    hs = [hilbert(inst, k, cfg).upper for k in range(N)]
    c = gelfand(inst, N - 1, ALL_LINEAR, cfg)
    rhs = 0.0 if min(hs) <= 0 else N ** g * math.exp(np.mean(np.log(hs)))
    return _report("width_geometric_mean", _name(inst), N - 1, c.lower, rhs, N ** g)


def check_hilbert_target(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()
                         ) -> InequalityReport:
    if inst.op.target_norm is not NormTag.L2:
        raise ValueError("the target norm must be l2")
    factor = math.sqrt(n + 1) if inst.body.is_symmetric else n + 1
    c, b = gelfand(inst, n, ALL_LINEAR, cfg), bernstein(inst, n, cfg)
    return _report("hilbert_target", _name(inst), n, c.lower, factor * b.upper, factor)


def _origin_symmetric(inst: Instance) -> bool:
    c = inst.body.symmetry_center()
    return c is not None and bool(np.abs(c).max(initial=0.0) <= 1e-12)


def _kolmogorov_lower(inst: Instance, n: int, cfg: SearchConfig) -> tuple[float, str]:
    """A lower bound on d_n that is also valid for affine approximating subspaces."""
    d = kolmogorov(inst, n, cfg)
    if _origin_symmetric(inst):
        return d.lower, ""
    lo = bernstein(inst, n, cfg).lower
    if inst.op.target_norm is NormTag.L2:
        lo = max(lo, gelfand(inst, n, ALL_LINEAR, cfg).lower)
    return min(lo, d.lower), "shift-invariant lower bound"


def check_kolmogorov_relations(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()
                               ) -> list[InequalityReport]:
    name = _name(inst)
    d = kolmogorov(inst, n, cfg)
    lo, note = _kolmogorov_lower(inst, n, cfg)
    alpha = 1.0 if inst.body.is_symmetric else 1.5
    hs = [hilbert(inst, k, cfg).upper for k in range(n + 1)]
    rhs = 0.0 if min(hs) <= 0 else (n + 1) ** alpha * math.exp(np.mean(np.log(hs)))
    out = [_report("kolmogorov_geometric_mean", name, n, lo, rhs, (n + 1) ** alpha, note=note)]
    if inst.op.target_norm is NormTag.L2:
        c = gelfand(inst, n, ALL_LINEAR, cfg)
        out.append(_report("gelfand_le_kolmogorov", name, n, c.lower, d.upper))
    if inst.body.is_symmetric:
        b = bernstein(inst, n, cfg)
        out.append(_report("kolmogorov_vs_bernstein", name, n, lo,
                           (n + 1) ** 2 * b.upper, (n + 1) ** 2, note=note))
    return out


def check_approximation_vs_gelfand(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()
                                   ) -> Optional[InequalityReport]:
    """a_n <= (1 + sqrt n) c_n for a centred ball body."""
    core, off = inst.body.core()
    if not isinstance(core, LpBall) or np.any(off != 0):
        return None
    a, c = approximation(inst, n, cfg), gelfand(inst, n, ALL_LINEAR, cfg)
    lhs = a.upper if a.exact else a.lower
    factor = 1 + math.sqrt(n)
    return _report("approximation_vs_gelfand", _name(inst), n, lhs, factor * c.upper, factor)


def check_information_monotone(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()
                               ) -> InequalityReport:
    """Unrestricted functionals never do worse than coordinate evaluations."""
    std = standard_information(inst.body.dim, inst.op.source_norm.dual)
    c_all = gelfand(inst, n, ALL_LINEAR, cfg)
    c_std = gelfand(inst, n, std, cfg)
    return _report("information_monotone", _name(inst), n, c_all.lower, c_std.upper)


def check_recovery(inst: Instance, n: int, cfg: SearchConfig = SearchConfig()
                   ) -> list[InequalityReport]:
    c = gelfand(inst, n, ALL_LINEAR, cfg)
    if not c.exact:
        return []
    rep = worst_case_error(inst, best_information(inst, n, ALL_LINEAR, cfg), cfg)
    name = _name(inst)
    return [_report("recovery_lower", name, n, c.lower, rep.worst_case_error),
            _report("recovery_upper", name, n, rep.worst_case_error, 2 * c.upper, 2.0)]


def check_carl(inst: Instance, n: int, alpha: float = 1.0,
               cfg: SearchConfig = SearchConfig()) -> InequalityReport:
    """Carl-type bound phrased through widths.

    Left: 2 c_{2n-1} from its certified lower bound, which sits in the same
    range as the deterministic error. Right: half the Hilbert upper bounds
    h_{2k}, k < n, standing in for the randomized errors.
    """
    g = _gamma(inst)
    c = gelfand(inst, 2 * n - 1, ALL_LINEAR, cfg)
    sup = max((k + 1) ** alpha * hilbert(inst, 2 * k, cfg).upper / 2 for k in range(n))
    factor = 12 ** (alpha + 1) * n ** (g - alpha)
    return _report(f"carl[alpha={alpha:g}]", _name(inst), n, 2 * c.lower, factor * sup, factor)


# --------------------------------------------------------------------------
# sequence checks

def check_regularity(z: Sequence[float], c: float, n: Optional[int] = None,
                     name: str = "sequence") -> InequalityReport:
    """(prod_{k<=n} z_k)^{1/n} <= c^4 z_n when z_k <= c z_{2k} for k <= n/2 (1-based)."""
    z = np.asarray(z, dtype=float)
    n = len(z) if n is None else n
    if n % 2 or np.any(z[:n] <= 0) or np.any(np.diff(z[:n]) > 0):
        return InequalityReport("regularity", name, n, 0, 0, c ** 4, None, False,
                                "needs even n and positive non-increasing z")
    if any(z[k - 1] > c * z[2 * k - 1] * (1 + 1e-12) for k in range(1, n // 2 + 1)):
        return InequalityReport("regularity", name, n, 0, 0, c ** 4, None, False,
                                "regularity hypothesis fails")
    gm = math.exp(np.mean(np.log(z[:n])))
    return _report("regularity", name, n, gm, c ** 4 * z[n - 1], c ** 4)


def check_superpolynomial(z: Sequence[float], n: int, name: str = "sequence"
                          ) -> InequalityReport:
    """(prod_{k<=n} z_k)^{1/n} <= sqrt(z_1 z_{n/2}) (1-based)."""
    z = np.asarray(z, dtype=float)
    if n % 2 or n < 2 or np.any(z[:n] <= 0):
        return InequalityReport("superpolynomial", name, n, 0, 0, 1, None, False,
                                "needs even n and positive z")
    gm = math.exp(np.mean(np.log(z[:n])))
    return _report("superpolynomial", name, n, gm, math.sqrt(z[0] * z[n // 2 - 1]))


def fit_rate(z: Sequence[float], name: str = "sequence") -> RateReport:
    """Least-squares slope of -log z_k against log k, k = 1, 2, ..."""
    z = np.asarray(z, dtype=float)
    if z.size < 3:
        raise ValueError("need at least three terms")
    if np.any(z <= 0):
        raise ValueError("rates need positive terms")
    x = np.log(np.arange(1, z.size + 1))
    y = -np.log(z)
    X = np.column_stack([x, np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((X @ coef - y) ** 2)))
    return RateReport(name, float(coef[0]), resid, int(z.size))


def check_monte_carlo(n: int, samples: int, seed: int) -> InequalityReport:
    mc = sphere_mc_lower_bound(n, samples, seed)
    return _report("sphere_monte_carlo", f"sphere-R{2 * n}", n,
                   mc.coord_second_moment - 3 * mc.stderr, mc.mean_error_lb,
                   note="mean radius dominates the second moment")


# --------------------------------------------------------------------------
# suite

@dataclass
class SuiteCase:
    name: str
    inst: Instance
    ns: tuple


def _instance(name, M, s, t, body) -> Instance:
    return Instance(Operator(np.asarray(M, dtype=float), NormTag.parse(s), NormTag.parse(t)),
                    body, name)


def default_suite(seed: int = 42) -> list[SuiteCase]:
    rng = np.random.default_rng([seed, 7])
    cases = [
        SuiteCase("hh-diag3", _instance("hh-diag3", np.diag([1, .5, .25]), "l2", "l2",
                                        LpBall(NormTag.L2, 1.0, 3)), (0, 1, 2)),
        SuiteCase("hh-diag4", _instance("hh-diag4", np.diag([1, .5, .25, .125]), "l2", "l2",
                                        LpBall(NormTag.L2, 1.0, 4)), (0, 1, 2, 3)),
    ]
    ranges = {2: (0, 1), 3: (0, 1, 2), 4: (1, 2)}
    for t in ("linf", "l2"):
        for m in (2, 3, 4):
            nm = f"l1-{t}-m{m}"
            cases.append(SuiteCase(nm, _instance(nm, np.eye(m), "l1", t,
                                                 LpBall(NormTag.L1, 1.0, m)), ranges[m]))
    for t in ("l2", "linf"):
        for d in (2, 3, 4):
            nm = f"simplex{d}-{t}"
            cases.append(SuiteCase(nm, _instance(nm, np.eye(d), "l2", t, Simplex(d)),
                                   ranges[d]))
    for j, t in enumerate(("l2", "linf")):
        nm = f"vpoly{j}-{t}"
        M = rng.standard_normal((3, 3))
        V = rng.standard_normal((7, 3))
        cases.append(SuiteCase(nm, _instance(nm, M, "l2", t, VPolytope(V)), (0, 1, 2)))
    cases.append(SuiteCase("shifted-cube-linf", _instance(
        "shifted-cube-linf", np.diag([1, .5, .25]), "linf", "linf",
        Shifted(LpBall(NormTag.LINF, 1.0, 3), np.array([.3, 0.0, -.2]))), (0, 1, 2)))
    cases.append(SuiteCase("shifted-simplex-l2", _instance(
        "shifted-simplex-l2", np.diag([1, .5, .25]), "l2", "l2",
        Shifted(Simplex(3), np.array([-.25, .1, 0.0]))), (0, 1, 2)))
    return cases


@dataclass
class SuiteResult:
    reports: list
    rates: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [r for r in self.reports if r.failed]

    @property
    def families(self) -> set:
        return {r.name.split("[")[0] for r in self.reports}

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["name", "instance", "n", "lhs", "rhs", "factor", "margin", "holds",
                "sides_certified", "note"]
        w = csv.DictWriter(buf, cols, lineterminator="\n")
        w.writeheader()
        for r in self.reports:
            w.writerow(r.row())
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "reports": [r.row() for r in self.reports],
            "rates": [{"name": r.name, "alpha": _fmt(r.alpha), "residual": _fmt(r.residual),
                       "points": r.points} for r in self.rates],
            "failures": len(self.failures),
        }, indent=2, sort_keys=True)


def run_case(case: SuiteCase, cfg: SearchConfig) -> list[InequalityReport]:
    inst, out = case.inst, []
    for n in case.ns:
        out += check_ordering(inst, n, cfg)
        if inst.op.target_norm is NormTag.L2:
            out.append(check_hilbert_target(inst, n, cfg))
        out += check_kolmogorov_relations(inst, n, cfg)
        rep = check_approximation_vs_gelfand(inst, n, cfg)
        if rep is not None:
            out.append(rep)
        if n >= 1:
            out.append(check_information_monotone(inst, n, cfg))
        out += check_recovery(inst, n, cfg)
    top = max(case.ns)
    out.append(check_width_geometric_mean(inst, top + 1, cfg))
    for N in (2, 3):
        if N <= inst.body.dim:
            for v in admissible_variants(inst):
                out += check_geometric_mean(inst, N, v, cfg)
    for n in range(1, (top + 1) // 2 + 1):
        out.append(check_carl(inst, n, 1.0, cfg))
    return out


def run_suite(cases: Optional[list] = None, cfg: SearchConfig = SearchConfig()) -> SuiteResult:
    cases = default_suite(cfg.seed) if cases is None else cases
    reports = []
    for case in cases:
        reports += run_case(case, cfg)
        if case.inst.op.target_norm is NormTag.L2 and case.name.startswith("hh-"):
            s = np.linalg.svd(case.inst.S, compute_uv=False)
            for n in range(2, s.size + 1):
                reports.append(check_singular_geometric_mean(s, n, 0.5, case.name))
    for alpha, c in ((0.5, math.sqrt(2)), (1.0, 2.0), (2.0, 4.0)):
        z = np.arange(1, 65, dtype=float) ** -alpha
        for n in (16, 64):
            reports.append(check_regularity(z, c, n, f"k^-{alpha:g}"))
    z = 2.0 ** -np.arange(1, 17, dtype=float)
    reports.append(check_superpolynomial(z, 8, "2^-k"))
    reports.append(check_superpolynomial(np.arange(1, 17, dtype=float) ** -2.0, 16, "k^-2"))
    for n in (1, 2, 4):
        reports.append(check_monte_carlo(n, 20_000, cfg.seed))
    rates = [fit_rate(np.arange(1, 33, dtype=float) ** -a, f"k^-{a:g}") for a in (0.5, 1, 2)]
    reports.sort(key=lambda r: (r.name, r.instance, r.n))
    return SuiteResult(reports, rates)
