import dataclasses

import numpy as np
import pytest

from nwidths import LpBall, NormTag, Simplex, VPolytope, gelfand, membership
from nwidths.witness import (ChainVariant, UncertifiedError, admissible_variants, build_chain,
                             certify_chain, chain_gelfand_lower, chain_to_json)

import oracles
from conftest import make

EPS = 1e-3


def instances():
    rng = np.random.default_rng(8)
    return [
        make(np.diag([1, .5, .25]), "l2", "l2", LpBall(NormTag.L2, 1.0, 3), "diag3"),
        make(np.eye(3), "l1", "linf", LpBall(NormTag.L1, 1.0, 3), "l1-linf"),
        make(np.eye(3), "l1", "l2", LpBall(NormTag.L1, 1.0, 3), "l1-l2"),
        make(np.eye(3), "l2", "l2", Simplex(3), "simplex-l2"),
        make(rng.standard_normal((3, 3)), "l2", "l1", VPolytope(rng.standard_normal((7, 3))),
             "vpoly-l1"),
    ]


CASES = [(inst, v) for inst in instances() for v in admissible_variants(inst)]
IDS = [f"{inst.name}-{v.value}" for inst, v in CASES]


def test_hilbert_source_ball_diagonal_example():
    inst = make(np.diag([1, .5]), "l2", "l2", LpBall(NormTag.L2, 1.0, 2))
    chain = build_chain(inst, 2, ChainVariant.HILBERT_SOURCE_BALL, eps=0.01)
    assert np.all(chain.values >= np.array([1, .5]) / 1.01)
    np.testing.assert_allclose(np.abs(chain.S_n), np.diag([1, .5]) / np.sqrt(2), atol=1e-9)
    assert chain.index_map() == [0, 2]


def test_single_general_step_is_half_diameter(simplex2_l2):
    chain = build_chain(simplex2_l2, 1, ChainVariant.GENERAL)
    assert chain.length == 1
    assert chain.values[0] >= gelfand(simplex2_l2, 0).upper / (1 + EPS) - 1e-12


def test_cross_polytope_symmetric_chain_values(cross2_linf):
    chain = build_chain(cross2_linf, 2, ChainVariant.SYMMETRIC_F)
    p0 = chain.steps[0].p
    assert sorted(np.abs(p0)) == [0.0, 1.0]
    # the second section sup, recomputed by the radial-extent oracle along ker(L_0)
    w = np.array([p0[1], -p0[0]])
    V = cross2_linf.body.vertices()
    expected = oracles.radial_extent(oracles.half_differences(V), w) * oracles.norm(w, "linf")
    assert chain.values[0] == pytest.approx(1.0)
    assert chain.values[1] == pytest.approx(expected, abs=1e-9)
    assert chain.values[1] == pytest.approx(1.0)


@pytest.mark.parametrize("inst, variant", CASES, ids=IDS)
def test_step_invariants(inst, variant):
    chain = build_chain(inst, 3, variant, EPS)
    dual = inst.op.target_norm.dual
    for k, s in enumerate(chain.steps):
        np.testing.assert_allclose(s.L.coefficients, s.lam.coefficients @ inst.S, atol=1e-10)
        Sp = inst.S @ s.p
        assert abs(s.lam(Sp) - s.value) <= 1e-8
        assert np.linalg.norm(s.lam.coefficients, {NormTag.L1: 1, NormTag.L2: 2,
                                                    NormTag.LINF: np.inf}[dual]) <= 1 + 1e-10
        np.testing.assert_allclose(s.p, (s.f - s.g) / 2, atol=1e-9)
        assert membership(inst.body, s.f, tol=1e-8) and membership(inst.body, s.g, tol=1e-8)
        for j in range(k):
            assert abs(chain.steps[j].L(s.p)) <= 1e-8


@pytest.mark.parametrize("inst, variant", CASES, ids=IDS)
def test_certificate_flags_and_determinant(inst, variant):
    chain = build_chain(inst, 3, variant, EPS)
    cert = certify_chain(chain, inst)
    assert cert.valid and cert.det_ok
    np.testing.assert_allclose(chain.B @ inst.S @ chain.A, chain.S_n, atol=1e-10)
    diag = np.prod(np.abs(np.diag(chain.S_n)))
    assert diag == pytest.approx(cert.det_actual, rel=1e-8)
    assert abs(np.linalg.det(chain.S_n)) == pytest.approx(cert.det_actual, rel=1e-8)


@pytest.mark.parametrize("inst, variant", CASES, ids=IDS)
def test_step_values_do_not_increase(inst, variant):
    vals = build_chain(inst, 3, variant, EPS).values
    assert np.all(np.diff(vals) <= 1e-9)


@pytest.mark.parametrize("inst, variant", CASES, ids=IDS)
def test_geometric_mean_certificate(inst, variant):
    chain = build_chain(inst, 3, variant, EPS)
    cert = certify_chain(chain, inst)
    lows = [chain_gelfand_lower(chain, k) for k in range(chain.length)]
    N = chain.length
    lhs = np.prod(lows) ** (1 / N)
    rhs = N ** chain.gamma * np.prod(cert.per_step_hilbert_lb) ** (1 / N) * (1 + EPS)
    assert lhs <= rhs * (1 + 1e-9)
    assert cert.geometric_mean_ok


def test_doubled_contraction_is_rejected(cross2_linf):
    chain = build_chain(cross2_linf, 2, ChainVariant.SYMMETRIC_F)
    bad = dataclasses.replace(chain, B=2 * chain.B, S_n=2 * chain.S_n)
    cert = certify_chain(bad, cross2_linf)
    assert not cert.contraction_ok and not cert.valid


def test_hilbert_target_images_are_orthogonal():
    inst = make(np.eye(3), "l1", "l2", LpBall(NormTag.L1, 1.0, 3))
    chain = build_chain(inst, 3, ChainVariant.HILBERT_TARGET)
    P = np.array([inst.S @ s.p for s in chain.steps])
    G = P @ P.T
    np.testing.assert_allclose(G - np.diag(np.diag(G)), 0, atol=1e-6)


def test_hilbert_source_ball_steps_are_orthogonal(diag3):
    chain = build_chain(diag3, 3, ChainVariant.HILBERT_SOURCE_BALL)
    P = np.array([s.p for s in chain.steps])
    G = P @ P.T
    np.testing.assert_allclose(G - np.diag(np.diag(G)), 0, atol=1e-8)
    assert all(s.constraints <= 2 * k for k, s in enumerate(chain.steps))


def test_hilbert_lower_bounds_track_singular_values(diag3):
    chain = build_chain(diag3, 3, ChainVariant.SYMMETRIC_F)
    cert = certify_chain(chain, diag3)
    # symmetric body and l2 target combine: a single 1/sqrt(n) remains
    assert chain.combined
    np.testing.assert_allclose(cert.per_step_hilbert_lb * np.sqrt(3), [1, .5, .25], atol=1e-6)


def test_chain_gelfand_lower_examples(diag3, cross2_linf):
    chain = build_chain(diag3, 2, ChainVariant.SYMMETRIC_F, eps=0.01)
    assert chain_gelfand_lower(chain, 1) >= 0.5 / 1.01 - 1e-12
    assert chain_gelfand_lower(chain, 0) >= gelfand(diag3, 0).upper / 1.01 - 1e-12
    chain = build_chain(cross2_linf, 2, ChainVariant.SYMMETRIC_F)
    assert chain_gelfand_lower(chain, 1) >= 0.5 / (1 + EPS)
    with pytest.raises(IndexError):
        chain_gelfand_lower(chain, 2)


def test_heuristic_step_is_refused(cross2_linf):
    chain = build_chain(cross2_linf, 1, ChainVariant.GENERAL)
    chain.steps[0].exact = False
    with pytest.raises(UncertifiedError):
        chain_gelfand_lower(chain, 0)


def test_inadmissible_variant_and_bad_eps(simplex2_l2, cross2_linf):
    with pytest.raises(ValueError):
        build_chain(simplex2_l2, 1, ChainVariant.SYMMETRIC_F)
    with pytest.raises(ValueError):
        build_chain(cross2_linf, 1, ChainVariant.HILBERT_TARGET)
    with pytest.raises(ValueError):
        build_chain(cross2_linf, 1, eps=0.0)


def test_json_dump_is_plain(cross2_linf):
    import json
    chain = build_chain(cross2_linf, 2, ChainVariant.SYMMETRIC_F)
    text = json.dumps(chain_to_json(chain, certify_chain(chain, cross2_linf)))
    assert '"containment_ok": true' in text
