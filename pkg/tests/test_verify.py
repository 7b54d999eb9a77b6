import math

import numpy as np
import pytest

from nwidths import (LpBall, NormTag, Simplex, bernstein, gelfand, hilbert, kolmogorov)
from nwidths.verify import (check_carl, check_geometric_mean, check_hilbert_target,
                            check_kolmogorov_relations, check_ordering, check_regularity,
                            check_singular_geometric_mean, check_superpolynomial, default_suite,
                            fit_rate, run_case)
from nwidths.witness import ChainVariant

from conftest import make


@pytest.fixture
def l1_cube3():
    return make(np.eye(3), "l1", "l1", LpBall(NormTag.L1, 1.0, 3), "l1-l1-3")


def diag(*s):
    return make(np.diag(s), "l2", "l2", LpBall(NormTag.L2, 1.0, len(s)), "diag")


def test_ordering_equalities_for_hilbert_diagonal(diag3):
    for n in range(3):
        reps = check_ordering(diag3, n)
        assert all(r.holds and r.sides_certified for r in reps)
        assert all(abs(r.margin) <= 1e-6 for r in reps)


def test_ordering_is_strict_for_l1_identity(l1_cube3):
    reps = check_ordering(l1_cube3, 1)
    assert all(r.holds for r in reps)
    h, b = hilbert(l1_cube3, 1), bernstein(l1_cube3, 1)
    assert b.lower == pytest.approx(1.0)
    assert h.upper < b.lower


@pytest.mark.parametrize("case", default_suite(42)[::6], ids=lambda c: c.name)
def test_ordering_holds_on_suite(case):
    for n in case.ns:
        assert not any(r.failed for r in check_ordering(case.inst, n))


def test_singular_geometric_mean_example():
    rep = check_singular_geometric_mean([1, .5, .25], 2, 0.5)
    assert rep.lhs == pytest.approx(0.5)
    assert rep.rhs == pytest.approx(math.sqrt(2) * math.sqrt(0.5))
    assert rep.holds


@pytest.mark.parametrize("inst, variant", [
    (make(np.eye(2), "l2", "l2", Simplex(2)), ChainVariant.GENERAL),
    (make(np.eye(2), "l1", "linf", LpBall(NormTag.L1, 1.0, 2)), ChainVariant.SYMMETRIC_F),
    (diag(1, .5, .25), ChainVariant.HILBERT_SOURCE_BALL),
])
def test_geometric_mean_certificates(inst, variant):
    reps = check_geometric_mean(inst, 2, variant)
    assert {r.name.split("[")[0] for r in reps} == {
        "chain_certificate", "chain_determinant", "chain_geometric_mean"}
    for r in reps:
        assert r.sides_certified and r.holds and r.margin >= -1e-12


def test_symmetric_chain_uses_exponent_one(cross2_linf):
    rep = [r for r in check_geometric_mean(cross2_linf, 2, "symmetric_f")
           if r.name.startswith("chain_geometric_mean")][0]
    assert rep.factor == pytest.approx(2.0)


def test_hilbert_target_examples(diag3, simplex2_l2):
    rep = check_hilbert_target(diag3, 1)
    assert rep.lhs == pytest.approx(0.5) and rep.rhs == pytest.approx(math.sqrt(2) * 0.5)
    assert rep.holds
    rep = check_hilbert_target(simplex2_l2, 1)
    assert rep.factor == 2 and rep.holds and rep.sides_certified
    rep = check_hilbert_target(diag3, 0)
    assert rep.factor == 1 and rep.lhs == pytest.approx(rep.rhs)
    with pytest.raises(ValueError):
        check_hilbert_target(make(np.eye(2), "l1", "linf", LpBall(NormTag.L1, 1.0, 2)), 0)


def test_kolmogorov_relation_examples(diag3, simplex2_l2):
    for n in range(3):
        reps = check_kolmogorov_relations(diag3, n)
        assert len(reps) == 3 and all(r.holds for r in reps)
    cross_l2 = make(np.eye(2), "l1", "l2", LpBall(NormTag.L1, 1.0, 2))
    assert kolmogorov(cross_l2, 1).upper == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert gelfand(cross_l2, 1).lower <= kolmogorov(cross_l2, 1).upper + 1e-9
    assert all(r.holds for r in check_kolmogorov_relations(cross_l2, 1))
    assert all(r.holds for r in check_kolmogorov_relations(simplex2_l2, 1))


@pytest.mark.parametrize("z, c, n", [
    (np.arange(1, 17, dtype=float) ** -1, 2.0, 16),
    (np.arange(1, 65, dtype=float) ** -0.5, math.sqrt(2), 64),
])
def test_regularity_examples(z, c, n):
    rep = check_regularity(z, c, n)
    assert rep.holds and rep.sides_certified


def test_regularity_constant_sequence_has_zero_margin():
    rep = check_regularity(np.full(8, 0.3), 1.0, 8)
    assert rep.holds and rep.margin == pytest.approx(0.0, abs=1e-15)


def test_regularity_hypothesis_failure_is_not_applicable():
    z = 2.0 ** -np.arange(1, 17, dtype=float)
    rep = check_regularity(z, 2.0, 16)
    assert rep.holds is None and not rep.failed
    assert check_regularity(np.arange(1, 8, dtype=float) ** -1, 2.0, 7).holds is None


@pytest.mark.parametrize("z, n", [
    (2.0 ** -np.arange(1, 17, dtype=float), 8),
    (np.arange(1, 17, dtype=float) ** -2, 16),
])
def test_superpolynomial_examples(z, n):
    assert check_superpolynomial(z, n).holds


def test_superpolynomial_constant_is_equality():
    rep = check_superpolynomial(np.full(10, 0.7), 10)
    assert rep.holds and rep.lhs == pytest.approx(rep.rhs)


def test_carl_examples(simplex2_l2):
    rep = check_carl(diag(1, .5, .25, .125), 2, 1.0)
    assert rep.holds and rep.sides_certified
    assert check_carl(diag(1, .5, .25, .125), 2, 0.0).holds
    assert check_carl(simplex2_l2, 1, 1.0).holds


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_fit_rate_examples(alpha):
    z = np.arange(1, 33, dtype=float) ** -alpha
    assert fit_rate(z).alpha == pytest.approx(alpha, abs=0.01)


def test_fit_rate_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_rate([1.0, 0.5])
    with pytest.raises(ValueError):
        fit_rate([1.0, 0.0, 0.5])


def test_run_case_reports_have_no_failures():
    case = [c for c in default_suite(42) if c.name == "simplex2-l2"][0]
    from nwidths import SearchConfig
    reps = run_case(case, SearchConfig())
    assert reps and not [r for r in reps if r.failed]
