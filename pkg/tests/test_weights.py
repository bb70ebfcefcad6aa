import math

import numpy as np
import pytest

from paratorus import (
    ExponentFunction,
    Field,
    Grid,
    PreconditionError,
    Weight,
    ap_constant,
    ball_family,
    fefferman_stein_check,
    lorentz_norm,
    lp_norm,
    maximal,
    morrey_norm,
    random_band_limited,
    variable_lp_norm,
)


def test_weight_validation():
    g = Grid(1, 64)
    with pytest.raises(PreconditionError):
        Weight.constant(g, 0.0)
    with pytest.raises(PreconditionError):
        Weight.power(g, -1.0)
    with pytest.raises(PreconditionError):
        Weight.custom(g, np.full(64, -1.0))
    with pytest.raises(PreconditionError):
        Weight.custom(g, np.ones(32))


def test_power_weight_origin_cell():
    # 1D origin cell carries the exact cell average of |x|^a
    g = Grid(1, 64)
    a = 0.5
    w = Weight.power(g, a)
    assert abs(w.values[32] - (2.0 * 64) ** (-a) / (1.0 + a)) < 1e-15
    # elsewhere it is the pointwise value
    assert abs(w.values[0] - 0.5**a) < 1e-15
    # regeneration on a refined grid matches a direct build
    w2 = w.on_grid(Grid(1, 128))
    assert np.max(np.abs(w2.values - Weight.power(Grid(1, 128), a).values)) == 0.0


def test_ap_constant_exact_cases():
    g = Grid(1, 64)
    one = Weight.constant(g, 1.0)
    for p in (1.5, 2.0, 3.0):
        assert abs(ap_constant(one, p) - 1.0) < 1e-12
    # any rescaling leaves the constant invariant
    five = Weight.constant(g, 5.0)
    assert abs(ap_constant(five, 2.0) - 1.0) < 1e-12
    # genuine weights exceed 1, monotonically in the singularity strength
    c1 = ap_constant(Weight.power(g, 0.25), 2.0)
    c2 = ap_constant(Weight.power(g, 0.5), 2.0)
    assert 1.0 < c1 < c2
    with pytest.raises(PreconditionError):
        ap_constant(one, 1.0)


def test_tau_estimate_constant_exact():
    g = Grid(1, 64)
    iv = Weight.constant(g, 3.0).tau()
    assert (iv.lo, iv.hi, iv.converged) == (1.0, 1.0, True)


def test_tau_estimate_power_weight():
    # |x|^(1/2) on the line has admissibility threshold 3/2; the scan
    # brackets where the measured constants stop growing under
    # refinement, which sits above that but well below 2.2
    g = Grid(1, 64)
    iv = Weight.power(g, 0.5).tau()
    assert iv.converged
    assert 1.5 <= iv.lo <= iv.hi <= 2.2
    assert iv.upper == iv.hi


def test_tau_estimate_blowup_marker():
    # strong singularity: constants keep growing through tau_max
    g = Grid(1, 64)
    iv = Weight.power(g, 8.0).tau()
    assert not iv.converged
    assert iv.hi == math.inf


def test_lp_norm_parseval_and_weights():
    g = Grid(1, 128)
    rng = np.random.default_rng(21)
    f = random_band_limited(g, 1.0, 10.0, rng)
    assert abs(lp_norm(f, 2.0) - f.l2()) < 1e-12
    w = Weight.constant(g, 4.0)
    assert abs(lp_norm(f, 2.0, w) - 2.0 * f.l2()) < 1e-12
    assert abs(lp_norm(f, math.inf) - np.max(np.abs(f.samples))) == 0.0
    with pytest.raises(PreconditionError):
        lp_norm(f, 0.0)
    with pytest.raises(PreconditionError):
        lp_norm(np.ones(16), 2.0)  # raw samples need a grid


def test_maximal_indicator_oracle():
    # M(1_{cell}) computed by hand from the ball family geometry
    g = Grid(1, 64)
    fam = ball_family(g)
    vals = np.zeros(64)
    vals[20] = 1.0
    out = maximal(vals, g)
    d = np.abs(np.arange(64) - 20)
    d = np.minimum(d, 64 - d)
    expect = np.full(64, 1.0 / 64.0)
    for level in fam.levels:
        h = fam.half_width(level)
        hit = d <= 2 * h
        expect[hit] = np.maximum(expect[hit], 1.0 / (2 * h + 1))
    assert np.max(np.abs(out - expect)) < 1e-12
    # M_r of an indicator is the r-th root of M
    out2 = maximal(vals, g, r=2.0)
    assert np.max(np.abs(out2 - np.sqrt(expect))) < 1e-12


def test_maximal_dominates_pointwise():
    g = Grid(1, 128)
    rng = np.random.default_rng(22)
    f = random_band_limited(g, 1.0, 20.0, rng)
    m = maximal(f)
    assert np.all(m >= np.abs(f.samples) - 1e-12)
    with pytest.raises(PreconditionError):
        maximal(f, r=0.0)


def test_lorentz_reduces_to_lp():
    g = Grid(1, 128)
    rng = np.random.default_rng(23)
    f = random_band_limited(g, 1.0, 12.0, rng)
    w = Weight.power(g, 0.5)
    for p in (1.0, 2.0, 3.5):
        assert abs(lorentz_norm(f, p, p) - lp_norm(f, p)) < 1e-12
        assert abs(lorentz_norm(f, p, p, w) - lp_norm(f, p, w)) < 1e-12


def test_lorentz_indicator_closed_form():
    g = Grid(1, 64)
    vals = np.zeros(64)
    vals[5:13] = 1.0  # measure 8/64
    m = 8.0 / 64.0
    p, t = 2.0, 4.0
    expect = (p / t) ** (1.0 / t) * m ** (1.0 / p)
    assert abs(lorentz_norm(vals, p, t, grid=g) - expect) < 1e-12
    assert abs(lorentz_norm(vals, p, math.inf, grid=g) - m ** (1.0 / p)) < 1e-12
    with pytest.raises(PreconditionError):
        lorentz_norm(vals, 0.0, 1.0, grid=g)


def test_morrey_endpoint_and_indicator():
    g = Grid(1, 64)
    one = Weight.constant(g)
    rng = np.random.default_rng(24)
    f = random_band_limited(g, 1.0, 8.0, rng)
    # t = p collapses to the plain weighted Lebesgue norm
    assert abs(morrey_norm(f, 2.0, 2.0, one) - lp_norm(f, 2.0, one)) < 1e-12
    # single-cell indicator: the single-point ball wins, giving N^(-1/t)
    vals = np.zeros(64)
    vals[10] = 1.0
    for t in (3.0, 4.0, 8.0):
        assert abs(morrey_norm(vals, 2.0, t, one, grid=g) - 64.0 ** (-1.0 / t)) < 1e-12
    with pytest.raises(PreconditionError):
        morrey_norm(f, 3.0, 2.0, one)


def test_variable_exponent_constant_case():
    g = Grid(1, 128)
    rng = np.random.default_rng(25)
    f = random_band_limited(g, 1.0, 10.0, rng)
    pfun = ExponentFunction.from_callable(g, lambda x: np.full(x.shape[:-1], 2.0))
    assert pfun.p_minus == pfun.p_plus == pfun.tau == 2.0
    assert abs(variable_lp_norm(f, pfun) - lp_norm(f, 2.0)) < 1e-8
    # Luxemburg norm is positively homogeneous
    n1 = variable_lp_norm(f, pfun)
    n3 = variable_lp_norm(3.0 * f, pfun)
    assert abs(n3 - 3.0 * n1) < 1e-7
    with pytest.raises(PreconditionError):
        ExponentFunction(g, np.full(128, 0.5))


def test_variable_exponent_oscillating():
    g = Grid(1, 128)
    pfun = ExponentFunction.from_callable(
        g, lambda x: 2.5 + 0.5 * np.sin(2.0 * np.pi * x[..., 0])
    )
    assert abs(pfun.p_minus - 2.0) < 1e-3
    assert abs(pfun.p_plus - 3.0) < 1e-3
    rng = np.random.default_rng(26)
    f = random_band_limited(g, 1.0, 10.0, rng)
    nrm = variable_lp_norm(f, pfun)
    # pinched between the constant-exponent envelopes
    assert lp_norm(f, 2.0) * 0.5 < nrm < lp_norm(f, 3.0) * 2.0
    # sample-only exponents cannot move grids
    frozen = ExponentFunction(g, pfun.values)
    with pytest.raises(PreconditionError):
        frozen.on_grid(Grid(1, 256))


def test_fefferman_stein_ratio():
    g = Grid(1, 128)
    rng = np.random.default_rng(27)
    fields = [random_band_limited(g, 2.0**j, 2.0 ** (j + 1), rng) for j in range(3)]
    w = Weight.constant(g)
    out = fefferman_stein_check(fields, p=2.0, q=2.0, r=1.0, w=w)
    assert out["hypothesis_ok"]
    assert out["warnings"] == []
    assert out["ratio"] >= 1.0  # M dominates the identity pointwise
    assert out["ratio"] < 50.0
    bad = fefferman_stein_check(fields, p=2.0, q=0.9, r=1.0, w=w)
    assert not bad["hypothesis_ok"]
    assert bad["warnings"]
    with pytest.raises(PreconditionError):
        fefferman_stein_check([], 2.0, 2.0, 1.0, w)
