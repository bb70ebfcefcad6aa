import math

import numpy as np
import pytest

from paratorus import (
    Field,
    Grid,
    LPFamily,
    PreconditionError,
    TransitionProfile,
    Weight,
    apply_direct,
    apply_paraproduct,
    build_expansion,
    cm_order_check,
    derivative_budget,
    make_symbol,
    pointwise_product,
    random_band_limited,
)


def test_symbol_library_values():
    one = make_symbol("one")
    assert one(np.array([3.0]), np.array([4.0])) == 1.0 + 0.0j
    inv = make_symbol("inverse_gamma", gamma=2.0)
    assert abs(inv(np.array([3.0]), np.array([4.0])) - 1.0 / 25.0) < 1e-15
    assert inv.order == -2.0
    inh = make_symbol("inverse_gamma_inhom", gamma=2.0)
    assert abs(inh(np.array([0.0]), np.array([0.0])) - 0.5) < 1e-15
    tr = make_symbol("scattering_transient", gamma=2.0, t=1.0)
    # at the origin pair the transient limit is t itself
    assert abs(tr(np.array([0.0]), np.array([0.0])) - 1.0) < 1e-15
    want = -math.expm1(-4.0) / 4.0
    assert abs(tr(np.array([2.0]), np.array([0.0])) - want) < 1e-15
    cone = make_symbol("cone_inverse_gamma", gamma=1.0, delta=0.5)
    # on the diagonal the cone window is fully open
    assert abs(cone(np.array([4.0]), np.array([4.0])) - 1.0 / 8.0) < 1e-12
    # far off the cone it closes entirely
    assert abs(cone(np.array([1.0]), np.array([64.0]))) == 0.0


def test_symbol_library_validation():
    with pytest.raises(PreconditionError):
        make_symbol("mystery")
    with pytest.raises(PreconditionError):
        make_symbol("inverse_gamma")
    with pytest.raises(PreconditionError):
        make_symbol("inverse_gamma", gamma=-1.0)
    with pytest.raises(PreconditionError):
        make_symbol("scattering_transient", gamma=2.0)
    with pytest.raises(PreconditionError):
        make_symbol("cone_inverse_gamma", gamma=1.0, delta=1.5)


def test_apply_direct_trivial_symbol_is_product():
    g = Grid(1, 64)
    rng = np.random.default_rng(42)
    f = random_band_limited(g, 1.0, 10.0, rng)
    h = random_band_limited(g, 1.0, 10.0, rng)
    direct = apply_direct(make_symbol("one"), f, h)
    prod = pointwise_product(f, h)
    assert direct.grid == prod.grid == g.refine(2)
    assert np.max(np.abs(direct.coef - prod.coef)) < 1e-10


def test_apply_direct_single_pairs():
    g = Grid(1, 32)
    sym = make_symbol("inverse_gamma", gamma=2.0)
    f = Field.mode(g, 3, 2.0j)
    h = Field.mode(g, -5, 1.0 + 1.0j)
    out = apply_direct(sym, f, h)
    want = (2.0j * (1.0 + 1.0j)) / 34.0
    assert abs(out.coef[32 - 2] - want) < 1e-15
    assert np.count_nonzero(out.coef) == 1
    # colliding sum frequencies accumulate
    f2 = Field.mode(g, 2) + Field.mode(g, 3)
    h2 = Field.mode(g, 5) + Field.mode(g, 4)
    out2 = apply_direct(make_symbol("one"), f2, h2)
    assert abs(out2.coef[32 + 7] - 2.0) < 1e-15
    with pytest.raises(PreconditionError):
        apply_direct(sym, Field.mode(g, 0), Field.mode(g, 0))  # singular pair
    with pytest.raises(PreconditionError):
        apply_direct(sym, f, Field.mode(Grid(1, 64), 1))


def test_cm_order_trivial_symbol():
    out = cm_order_check(make_symbol("one"), max_order=0)
    assert out["all_finite"]
    assert len(out["entries"]) == 1
    assert abs(out["entries"][0]["constant"] - 1.0) < 1e-12


def test_cm_order_inverse_gamma():
    # (|xi| + |eta|)^2 / (xi^2 + eta^2) lies in [1, 2] on the line
    out = cm_order_check(make_symbol("inverse_gamma", gamma=2.0), max_order=1)
    zero = [e for e in out["entries"] if e["total_order"] == 0][0]
    assert 1.0 - 1e-9 <= zero["constant"] <= 2.0 + 1e-9
    assert out["all_finite"]
    for e in out["entries"]:
        assert e["constant"] < 50.0
    with pytest.raises(PreconditionError):
        cm_order_check(make_symbol("one"), max_order=-1)
    with pytest.raises(PreconditionError):
        cm_order_check(make_symbol("one"), max_order=0, points=np.zeros((1, 2)))


def test_expansion_coefficients_separable_oracle():
    # sigma = 1 factorizes: c(a, b) must equal the rank-one product of
    # 1D window transforms, computable by direct quadrature
    prof = TransitionProfile()
    exp = build_expansion(make_symbol("one"), levels=[0, 1], a_max=2)
    outer = exp.period - 2.0 - exp.margin
    n = 1 << 17
    xs = -outer + (np.arange(n) + 0.5) * (2.0 * outer / n)
    win = prof.plateau(np.abs(xs), 0.0, 0.0, 2.0, outer)
    v = np.array(
        [
            np.sum(win * np.exp(-2j * np.pi * a * xs / exp.period)) * (2.0 * outer / n)
            for a in exp.a_vectors[:, 0]
        ]
    ) / exp.period
    oracle = v[:, None] * v[None, :]
    assert np.max(np.abs(exp.slab(0) - oracle)) < 1e-9
    # scale-free symbol: identical tables at every level, and the two
    # pairings share the localizer
    assert np.array_equal(exp.slab(1), exp.slab(0))
    assert np.array_equal(exp.slab(0, 1), exp.slab(0, 2))
    with pytest.raises(PreconditionError):
        exp.slab(5)


def test_expansion_homogeneous_scaling_exact():
    # degree -2 symbol: 2^(2j) c_j is one fixed table
    exp = build_expansion(make_symbol("inverse_gamma", gamma=2.0), levels=[0, 1, 2], a_max=2)
    for j in (1, 2):
        assert np.max(np.abs(4.0**j * exp.slab(j) - exp.slab(0))) == 0.0


def test_expansion_weighted_slab():
    exp = build_expansion(make_symbol("one"), levels=[0], a_max=2)
    a2 = np.sum(exp.a_vectors**2, axis=-1).astype(float)
    w = (1.0 + a2[:, None] + a2[None, :]) ** exp.weight_exponent
    assert np.max(np.abs(exp.weighted_slab(0) - w * exp.slab(0))) == 0.0
    # the weighted tail is summable: far entries stay small
    tail = np.abs(exp.weighted_slab(0))
    assert tail[0, 0] < tail[2, 2]


def test_expansion_validation():
    one = make_symbol("one")
    with pytest.raises(PreconditionError):
        build_expansion(one, levels=[0], period=4.0)  # localizer support too small
    with pytest.raises(PreconditionError):
        build_expansion(one, levels=[0], a_max=0)
    with pytest.raises(PreconditionError):
        build_expansion(one, levels=[0], weight_exponent=1)  # must exceed ndim


def test_paraproduct_reconstruction_improves():
    g = Grid(1, 32)
    fam = LPFamily(g)
    rng = np.random.default_rng(41)
    f = random_band_limited(g, 1.0, 2.0, rng)
    h = random_band_limited(g, 1.0, 2.0, rng)
    ref = pointwise_product(f, h)
    errs = []
    for a_max in (2, 4, 8):
        exp = build_expansion(make_symbol("one"), levels=list(fam.j_range), a_max=a_max)
        out = apply_paraproduct(exp, f, h, fam)
        errs.append((out - ref).l2() / ref.l2())
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.01


def test_paraproduct_singular_symbol():
    g = Grid(1, 32)
    fam = LPFamily(g)
    rng = np.random.default_rng(43)
    f = random_band_limited(g, 1.0, 2.0, rng)
    h = random_band_limited(g, 1.0, 2.0, rng)
    sym = make_symbol("inverse_gamma", gamma=2.0)
    ref = apply_direct(sym, f, h)
    exp = build_expansion(sym, levels=list(fam.j_range), a_max=8)
    out = apply_paraproduct(exp, f, h, fam)
    assert (out - ref).l2() / ref.l2() < 5e-3


def test_paraproduct_validation():
    g = Grid(1, 32)
    fam = LPFamily(g)
    f = Field.mode(g, 1)
    exp = build_expansion(make_symbol("one"), levels=[0], a_max=2)
    with pytest.raises(PreconditionError):
        apply_paraproduct(exp, f, Field.mode(Grid(1, 64), 1), fam)
    bad_level = build_expansion(make_symbol("one"), levels=[9], a_max=2)
    with pytest.raises(PreconditionError):
        apply_paraproduct(bad_level, f, f, fam)


def test_derivative_budget():
    out = derivative_budget(2.0, 2.0, 2.0, 2.0)
    assert out["budget"] == 6
    assert out["r_star"] == 1.0
    assert out["inner_min"] == 1.0
    # sub-unit q enters r* and, in the TL setting, the inner min too
    tl = derivative_budget(4.0, 4.0, 2.0, 0.5, setting="tl")
    bs = derivative_budget(4.0, 4.0, 2.0, 0.5, setting="besov")
    assert tl["budget"] == 10
    assert bs["budget"] == 8
    # weights report their admissibility intervals
    w = Weight.power(Grid(1, 64), 0.5)
    wout = derivative_budget(4.0, 4.0, 2.0, 2.0, w1=w, w2=w)
    assert wout["tau_w1"] == (w.tau().lo, w.tau().hi)
    assert wout["budget"] == 6
    with pytest.raises(PreconditionError):
        derivative_budget(2.0, 2.0, 2.0, 2.0, setting="banach")
