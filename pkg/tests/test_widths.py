import numpy as np
import pytest

from nwidths import (ALL_LINEAR, LpBall, NormTag, Simplex, VPolytope, WidthKind,
                     approximation, bernstein, compute_width, gelfand, hilbert, kolmogorov,
                     singular_widths, standard_information)
from nwidths.witness import admissible_variants, build_chain, certify_chain

import oracles
from conftest import make

KINDS = list(WidthKind)
SQRT_HALF = np.sqrt(0.5)


def l1_ball(m, target, source="l1"):
    return make(np.eye(m), source, target, LpBall(NormTag.L1, 1.0, m), f"l1-{target}-{m}")


def simplex(d, target):
    return make(np.eye(d), "l2", target, Simplex(d), f"simplex{d}-{target}")


# --- examples ---------------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
@pytest.mark.parametrize("n, value", [(0, 1.0), (1, 0.5), (2, 0.25), (3, 0.0)])
def test_hilbert_diagonal_all_widths_exact(diag3, kind, n, value):
    b = compute_width(diag3, kind, n)
    assert b.exact
    assert b.lower == pytest.approx(value, abs=1e-9)


def test_gelfand_examples(cross2_linf):
    ident = make(np.eye(3), "l2", "l2", LpBall(NormTag.L2, 1.0, 3))
    assert gelfand(ident, 0).upper == pytest.approx(1.0)
    # frozen from the angle-grid oracle
    b = gelfand(cross2_linf, 1, ALL_LINEAR)
    assert b.exact and b.upper == pytest.approx(0.5, abs=1e-9)


def test_gelfand_standard_information(cross2_linf):
    std = standard_information(2, NormTag.LINF)
    b = gelfand(cross2_linf, 1, std)
    # frozen from the exhaustive coordinate oracle
    assert b.exact and b.upper == pytest.approx(1.0, abs=1e-9)
    assert gelfand(cross2_linf, 1, ALL_LINEAR).upper <= b.lower + 1e-12


def test_kolmogorov_examples():
    cross_l2 = make(np.eye(2), "l1", "l2", LpBall(NormTag.L1, 1.0, 2))
    # frozen from the line-direction grid oracle
    assert kolmogorov(cross_l2, 1).upper == pytest.approx(SQRT_HALF, abs=1e-6)
    for n in (3, 4):
        b = kolmogorov(l1_ball(3, "l2"), n)
        assert b.exact and b.upper == pytest.approx(0.0, abs=1e-12)


def test_bernstein_examples():
    for n in range(3):
        b = bernstein(l1_ball(3, "l1"), n)
        assert b.lower == pytest.approx(1.0, abs=1e-9)
    # frozen from the triangle-inradius oracle
    b = bernstein(simplex(2, "l2"), 1)
    assert b.lower == pytest.approx((2 - np.sqrt(2)) / 2, abs=1e-8)
    assert b.lower <= b.upper + 1e-12


def test_hilbert_number_against_chain_and_random_compressions():
    inst = l1_ball(3, "linf")
    b = hilbert(inst, 1)
    for variant in admissible_variants(inst):
        cert = certify_chain(build_chain(inst, 2, variant), inst)
        assert cert.valid
        assert b.lower >= cert.sigma[1] - 1e-9
    # frozen from 20000 random contraction pairs, seed 1
    assert 0.32932 <= b.upper + 1e-9


def test_approximation_examples(diag3):
    assert approximation(diag3, 1).upper == pytest.approx(0.5, abs=1e-9)
    ident = make(np.eye(3), "l2", "l2", LpBall(NormTag.L2, 1.0, 3))
    assert approximation(ident, 0).upper == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("target", ["l1", "l2", "linf"])
@pytest.mark.parametrize("n", [1, 2])
def test_approximation_versus_gelfand_on_balls(target, n):
    inst = l1_ball(3, target)
    a, c = approximation(inst, n), gelfand(inst, n)
    assert a.lower <= (1 + np.sqrt(n)) * c.upper + 1e-9


def test_singular_widths_examples():
    ident = make(np.eye(3), "l2", "l2", LpBall(NormTag.L2, 1.0, 3))
    np.testing.assert_allclose(singular_widths(ident), [1, 1, 1])
    d = np.diag([1, .5, .25])
    np.testing.assert_allclose(
        singular_widths(make(d, "l2", "l2", LpBall(NormTag.L2, 1.0, 3))), [1, .5, .25])
    np.testing.assert_allclose(
        singular_widths(make(d, "l2", "l2", LpBall(NormTag.L2, 2.0, 3))), [2, 1, .5])


def test_singular_widths_wrong_regime():
    with pytest.raises(ValueError):
        singular_widths(l1_ball(2, "l2"))
    with pytest.raises(ValueError):
        singular_widths(make(np.eye(2), "l2", "linf", LpBall(NormTag.L2, 1.0, 2)))


# --- properties ---------------------------------------------------------------

SUITE = [l1_ball(2, "linf"), l1_ball(3, "l2"), l1_ball(3, "l1"), simplex(2, "l2"),
         simplex(3, "linf"),
         make(np.random.default_rng(3).standard_normal((3, 3)), "l2", "l2",
              VPolytope(np.random.default_rng(4).standard_normal((6, 3))), "vpoly")]


@pytest.mark.parametrize("inst", SUITE, ids=lambda i: i.name)
def test_ordering_h_b_c(inst):
    for n in range(3):
        h, b, c = hilbert(inst, n), bernstein(inst, n), gelfand(inst, n)
        assert h.lower <= b.upper + 1e-9
        assert b.lower <= c.upper + 1e-9
        assert h.lower <= c.upper + 1e-9


@pytest.mark.parametrize("inst", SUITE, ids=lambda i: i.name)
@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
def test_monotone_in_n(inst, kind):
    vals = [compute_width(inst, kind, n) for n in range(4)]
    for a, b in zip(vals, vals[1:]):
        assert b.lower <= a.upper + 1e-9
        assert b.upper <= a.upper + 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_hilbert_ball_widths_equal_singular_values(seed):
    M = np.random.default_rng(seed).standard_normal((4, 4))
    inst = make(M, "l2", "l2", LpBall(NormTag.L2, 1.5, 4))
    sw = singular_widths(inst)
    for kind in KINDS:
        for n in range(4):
            b = compute_width(inst, kind, n)
            assert b.lower == pytest.approx(sw[n], abs=1e-6)
            assert b.upper == pytest.approx(sw[n], abs=1e-6)


def test_more_information_never_hurts(cross2_linf):
    std = standard_information(2, NormTag.LINF)
    for n in range(3):
        assert gelfand(cross2_linf, n, ALL_LINEAR).upper <= \
            gelfand(cross2_linf, n, std).lower + 1e-9


@pytest.mark.parametrize("inst", SUITE[:4], ids=lambda i: i.name)
@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
def test_homogeneous_in_the_operator(inst, kind):
    t = 2.5
    base, big = compute_width(inst, kind, 1), compute_width(inst.scaled(t), kind, 1)
    # bounds of t*S bracket t times the true value, so the brackets must overlap
    assert big.lower <= t * base.upper + 1e-7
    assert t * base.lower <= big.upper + 1e-7
    if base.exact and big.exact:
        assert big.upper == pytest.approx(t * base.upper, abs=1e-6)


# --- grid oracle ---------------------------------------------------------------

@pytest.mark.parametrize("target, kind, frozen", [
    ("linf", WidthKind.GELFAND, 0.5),
    ("l2", WidthKind.GELFAND, SQRT_HALF),
    ("l2", WidthKind.KOLMOGOROV, SQRT_HALF),
    ("linf", WidthKind.KOLMOGOROV, 0.5),
])
def test_cross_polytope_matches_grid_oracle(target, kind, frozen):
    b = compute_width(make(np.eye(2), "l1", target, LpBall(NormTag.L1, 1.0, 2)), kind, 1)
    assert b.lower <= frozen + 1e-6 and frozen - 1e-6 <= b.upper
    assert b.upper == pytest.approx(frozen, abs=1e-6)


@pytest.mark.parametrize("kind, frozen", [(WidthKind.GELFAND, 0.35355339),
                                          (WidthKind.KOLMOGOROV, SQRT_HALF)])
def test_simplex_matches_grid_oracle(kind, frozen):
    b = compute_width(simplex(2, "l2"), kind, 1)
    assert b.upper == pytest.approx(frozen, abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("target", ["l1", "l2", "linf"])
def test_planar_gelfand_against_live_grid(seed, target):
    rng = np.random.default_rng([seed, 17])
    S = rng.standard_normal((2, 2))
    V = rng.standard_normal((5, 2))
    grid = oracles.grid_gelfand_plane(S, V, target, grid=720)
    b = gelfand(make(S, "l2", target, VPolytope(V)), 1)
    # the grid minimum overshoots the true minimum by at most the grid resolution
    assert b.upper <= grid + 1e-9
    assert b.upper >= grid - 0.02 * max(1.0, grid)
