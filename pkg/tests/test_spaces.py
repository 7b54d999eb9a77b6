import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nwidths import (Functional, HPolytope, Instance, LpBall, NormTag, Operator, Shifted,
                     Simplex, Subspace, VPolytope, half_difference_body, membership,
                     norm_eval, norming_functional, support_value)

import oracles

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("v, t, expected", [
    ((3, -4), "l2", 5.0),
    ((1, -2, 3), "l1", 6.0),
    ((1, -2, 3), "linf", 3.0),
])
def test_norm_eval_examples(v, t, expected):
    assert norm_eval(np.array(v, float), NormTag.parse(t)) == pytest.approx(expected)


def test_dual_is_an_involution():
    for t in NormTag:
        assert t.dual.dual is t
    assert NormTag.L1.dual is NormTag.LINF and NormTag.L2.dual is NormTag.L2


@pytest.mark.parametrize("y, t, expected", [
    ((3, -4), "l2", (0.6, -0.8)),
    ((1, -2, 3), "linf", (0, 0, 1)),
    ((1, -2, 3), "l1", (1, -1, 1)),
])
def test_norming_functional_examples(y, t, expected):
    lam = norming_functional(np.array(y, float), NormTag.parse(t))
    np.testing.assert_allclose(lam.coefficients, expected, atol=1e-15)


def test_norming_functional_ties_and_zero_coordinates():
    lam = norming_functional(np.array([2.0, -2.0, 1.0]), NormTag.LINF)
    np.testing.assert_array_equal(lam.coefficients, [1, 0, 0])
    lam = norming_functional(np.array([0.0, -1.0]), NormTag.L1)
    np.testing.assert_array_equal(lam.coefficients, [1, -1])
    with pytest.raises(ValueError):
        norming_functional(np.zeros(2), NormTag.L2)


@settings(max_examples=200, deadline=None)
@given(arrays(float, 4, elements=finite), st.sampled_from(list(NormTag)))
def test_norming_functional_property(y, t):
    if not np.any(y):
        return
    lam = norming_functional(y, t)
    assert abs(lam(y) - norm_eval(y, t)) <= 1e-12 * max(1.0, norm_eval(y, t))
    assert norm_eval(lam.coefficients, t.dual) <= 1 + 1e-12


@pytest.mark.parametrize("body, x, expected", [
    (Simplex(2), (0.3, 0.3), True),
    (Simplex(2), (0.6, 0.6), False),
    (LpBall(NormTag.L1, 1.0, 2), (1, 0), True),
])
def test_membership_examples(body, x, expected):
    assert membership(body, np.array(x, float)) is expected


@pytest.mark.parametrize("body, f, expected", [
    (LpBall(NormTag.L1, 1.0, 2), (2, 1), 2.0),
    (Simplex(2), (2, -1), 2.0),
    (LpBall(NormTag.LINF, 1.0, 2), (2, 1), 3.0),
])
def test_support_value_examples(body, f, expected):
    assert support_value(body, Functional(np.array(f, float))) == pytest.approx(expected)


def test_half_difference_examples():
    ball = LpBall(NormTag.L2, 1.0, 3)
    assert half_difference_body(ball) == ball
    seg = half_difference_body(Simplex(1))
    np.testing.assert_allclose(seg.vertices().ravel(), [-0.5, 0.5])
    hexagon = half_difference_body(Simplex(2)).vertices()
    # frozen from the vertex-pair oracle
    expected = np.array([[-.5, 0], [-.5, .5], [0, -.5], [0, .5], [.5, -.5], [.5, 0]])
    np.testing.assert_allclose(hexagon, expected, atol=1e-12)


def test_half_difference_matches_oracle_on_random_polytope():
    rng = np.random.default_rng(3)
    V = rng.standard_normal((6, 3))
    got = half_difference_body(VPolytope(V)).vertices()
    np.testing.assert_allclose(got, oracles.vertex_pair_half_differences(V), atol=1e-10)


BODIES = [
    LpBall(NormTag.L1, 1.0, 3), LpBall(NormTag.L2, 2.0, 3), LpBall(NormTag.LINF, 0.5, 3),
    Simplex(3), VPolytope(np.random.default_rng(0).standard_normal((7, 3))),
    HPolytope(np.vstack([np.eye(3), -np.eye(3), np.ones((1, 3))]),
              np.array([1, 1, 1, 0, 0, 0, 2.0])),
    Shifted(Simplex(3), np.array([1.0, -2.0, 0.5])),
]


@pytest.mark.parametrize("body", BODIES, ids=lambda b: type(b).__name__)
def test_support_is_nonnegative_width(body):
    rng = np.random.default_rng(1)
    for _ in range(50):
        f = rng.standard_normal(3)
        assert support_value(body, f) + support_value(body, -f) >= -1e-12


def test_support_width_vanishes_only_for_flat_directions():
    seg = VPolytope(np.array([[0, 0.0], [1, 0]]))
    assert support_value(seg, [0, 1]) + support_value(seg, [0, -1]) == pytest.approx(0)
    assert support_value(seg, [1, 0]) + support_value(seg, [-1, 0]) == pytest.approx(1)


@pytest.mark.parametrize("body", BODIES, ids=lambda b: type(b).__name__)
def test_half_difference_is_symmetric(body):
    D = half_difference_body(body)
    rng = np.random.default_rng(2)
    scale = max(1.0, float(np.abs(body.vertices()).max())) if body.is_polytope else 2.0
    for x in rng.uniform(-scale, scale, size=(1000, 3)):
        assert membership(D, x) == membership(D, -x)


def test_hpolytope_rejects_empty_and_unbounded():
    with pytest.raises(ValueError):
        HPolytope(np.array([[1.0], [-1.0]]), np.array([-1.0, -1.0]))
    with pytest.raises(ValueError):
        HPolytope(np.array([[1.0, 0.0]]), np.array([1.0]))


def test_operator_and_instance_validation():
    with pytest.raises(ValueError):
        Operator(np.array([[np.nan]]), NormTag.L2, NormTag.L2)
    with pytest.raises(ValueError):
        Instance(Operator(np.eye(2), NormTag.L2, NormTag.L2), Simplex(3))


def test_instance_json_round_trip():
    inst = Instance(Operator(np.diag([1, .5]), NormTag.L1, NormTag.LINF),
                    Shifted(VPolytope(np.array([[0, 0], [1, 2], [2, 0.]])), np.array([1, 1.])),
                    "tri")
    again = Instance.from_json(inst.to_json())
    assert again.to_json() == inst.to_json()
    np.testing.assert_allclose(again.body.vertices(), inst.body.vertices())


def test_subspace_requires_orthonormal_basis():
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))
    sub = Subspace.span([[1, 1, 0], [1, -1, 0]], 3)
    assert sub.dim == 2 and sub.complement().dim == 1
