import math

import numpy as np
import pytest

from paratorus import (
    ConvergenceError,
    EstimateSpec,
    Field,
    Grid,
    PreconditionError,
    ScatteringProblem,
    SpaceSpec,
    cone_check,
    cone_data,
    evolve_linear,
    lambda_min,
    random_band_limited,
    solve_u_closed,
    solve_u_quadrature,
    u_infinity,
    verify_scattering,
)


def test_evolve_linear_single_mode():
    g = Grid(1, 32)
    f = Field.mode(g, 3, 2.0)
    out = evolve_linear(f, gamma=2.0, kind="homogeneous", t=0.5)
    assert abs(out.coef[16 + 3] - 2.0 * math.exp(-4.5)) < 1e-15
    out2 = evolve_linear(f, gamma=2.0, kind="inhomogeneous", t=0.5)
    assert abs(out2.coef[16 + 3] - 2.0 * math.exp(-5.0)) < 1e-15
    # the zero mode survives the homogeneous semigroup untouched
    c = Field.mode(g, 0, 3.0)
    assert evolve_linear(c, 2.0, "homogeneous", 1.0).coef[16] == 3.0
    with pytest.raises(PreconditionError):
        evolve_linear(f, 2.0, "homogeneous", -1.0)
    with pytest.raises(PreconditionError):
        evolve_linear(f, 2.0, "heat", 1.0)


def test_problem_validation():
    g = Grid(1, 32)
    f = random_band_limited(g, 1.0, 2.0, np.random.default_rng(61))
    h = random_band_limited(g, 1.0, 2.0, np.random.default_rng(62))
    with pytest.raises(PreconditionError):
        ScatteringProblem("wave", 2.0, f, h)
    with pytest.raises(PreconditionError):
        ScatteringProblem("homogeneous", 0.0, f, h)
    with pytest.raises(PreconditionError):
        ScatteringProblem("homogeneous", 2.0, f, random_band_limited(
            Grid(1, 64), 1.0, 2.0, np.random.default_rng(63)))
    with pytest.raises(PreconditionError):
        ScatteringProblem("homogeneous", 2.0, f, h, times=(1.0, 0.5))
    with pytest.raises(PreconditionError):
        ScatteringProblem("homogeneous", 2.0, f, h, times=(0.0, 1.0))
    biased = f + Field.mode(g, 0, 1.0)
    with pytest.raises(PreconditionError):
        ScatteringProblem("homogeneous", 2.0, biased, h)
    # the bracketed dissipation never vanishes, so a mean is fine there
    ScatteringProblem("inhomogeneous", 2.0, biased, h)


def test_single_pair_closed_form():
    g = Grid(1, 32)
    c1, c2 = 1.5, -0.5j
    prob = ScatteringProblem(
        "homogeneous", 2.0, Field.mode(g, 2, c1), Field.mode(g, 3, c2)
    )
    assert lambda_min(prob) == 13.0
    t = 0.7
    ut = solve_u_closed(prob, t)
    want = c1 * c2 * (-math.expm1(-13.0 * t)) / 13.0
    assert abs(ut.coef[32 + 5] - want) < 1e-15
    assert np.count_nonzero(ut.coef) == 1
    uinf = u_infinity(prob)
    assert abs(uinf.coef[32 + 5] - c1 * c2 / 13.0) < 1e-15
    # t = 0 gives the zero field on both paths
    assert solve_u_closed(prob, 0.0).l2() == 0.0
    assert solve_u_quadrature(prob, 0.0).l2() == 0.0


def test_quadrature_matches_closed_form():
    g = Grid(1, 32)
    rng = np.random.default_rng(64)
    f = random_band_limited(g, 1.0, 4.0, rng)
    h = random_band_limited(g, 1.0, 4.0, rng)
    prob = ScatteringProblem("homogeneous", 2.0, f, h)
    uc = solve_u_closed(prob, 0.3)
    uq = solve_u_quadrature(prob, 0.3)
    assert (uq - uc).l2() / uc.l2() < 1e-6
    with pytest.raises(ConvergenceError) as err:
        solve_u_quadrature(prob, 0.3, tol=1e-15, max_doublings=1)
    assert err.value.achieved > 0


def test_u_infinity_empty_data():
    g = Grid(1, 32)
    f = random_band_limited(g, 1.0, 2.0, np.random.default_rng(65))
    prob = ScatteringProblem("homogeneous", 2.0, f, Field.zero(g))
    assert lambda_min(prob) == math.inf
    assert u_infinity(prob).l2() == 0.0


def test_cone_data_and_check():
    g = Grid(1, 64)
    f, h = cone_data(g, delta=0.5, seed=7)
    out = cone_check(f, h, 0.5)
    assert out["ok"]
    assert out["violations"] == 0
    assert out["pairs_checked"] > 0
    # a pair with radius ratio 8 breaks the delta = 1/2 cone
    bad = cone_check(Field.mode(g, 2), Field.mode(g, 16), 0.5)
    assert not bad["ok"]
    assert bad["violations"] == 1
    with pytest.raises(PreconditionError):
        cone_data(g, delta=1.5, seed=7)
    with pytest.raises(PreconditionError):
        cone_data(Grid(1, 16), delta=0.5, seed=7, inner_radius=6.0)
    # inhomogeneous flavor measures radii through the bracket
    fi, hi = cone_data(g, delta=0.5, seed=8, kind="inhomogeneous")
    assert cone_check(fi, hi, 0.5, kind="inhomogeneous")["ok"]


def test_verify_scattering_homogeneous():
    g = Grid(1, 32)
    rng = np.random.default_rng(66)
    f = random_band_limited(g, 1.0, 2.0, rng)
    h = random_band_limited(g, 1.0, 2.0, rng)
    est = EstimateSpec(space=SpaceSpec(family="tl", p=2.0, q=2.0, s=2.5), p1=4.0, p2=4.0)
    prob = ScatteringProblem(
        "homogeneous", 2.0, f, h,
        times=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
        targets=(SpaceSpec(family="tl", p=2.0, q=2.0, s=0.5),),
        estimates=(est,),
    )
    out = verify_scattering(prob)
    assert out["lambda_min"] == 2.0
    assert out["monotone"]
    assert out["decay_rel_err"] < 0.1
    assert out["quadrature_check"][0]["rel_error"] < 1e-6
    assert len(out["target_norms"]) == 1
    tn = out["target_norms"][0]
    assert tn[-1] < tn[0]
    row = out["estimates"][0]
    assert row["budget"] == 6
    assert 0.0 < row["ratio"] < math.inf
    assert out["flags"]["gamma_even"]
    assert not out["flags"]["cone_required"]


def test_verify_scattering_inhomogeneous():
    g = Grid(1, 32)
    rng = np.random.default_rng(67)
    f = random_band_limited(g, 1.0, 2.0, rng)
    h = random_band_limited(g, 1.0, 2.0, rng)
    prob = ScatteringProblem(
        "inhomogeneous", 1.0, f, h, times=(0.5, 1.0, 1.5, 2.0)
    )
    out = verify_scattering(prob, quad_times=())
    assert abs(out["lambda_min"] - 2.0 * math.sqrt(2.0)) < 1e-12
    assert out["monotone"]
    assert out["decay_rel_err"] < 0.1
    assert out["quadrature_check"] == []
    # no estimates: the trichotomy falls through to the cone
    assert not out["flags"]["gamma_even"]
    assert out["flags"]["cone_required"]


def test_verify_scattering_gamma_beats_budget():
    g = Grid(1, 32)
    rng = np.random.default_rng(68)
    f = random_band_limited(g, 1.0, 2.0, rng)
    h = random_band_limited(g, 1.0, 2.0, rng)
    est = EstimateSpec(space=SpaceSpec(family="tl", p=2.0, q=2.0, s=7.5), p1=4.0, p2=4.0)
    prob = ScatteringProblem(
        "homogeneous", 7.0, f, h, times=(0.5,), estimates=(est,)
    )
    out = verify_scattering(prob, quad_times=())
    assert not out["flags"]["gamma_even"]
    assert out["flags"]["gamma_ge_budget"]
    assert not out["flags"]["cone_required"]
