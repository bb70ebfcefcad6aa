"""Band-limited series assembly bounds and the pointwise lemmas behind them.

A sequence (u_j) with spectra in balls of radius D 2^j can be summed,
and the quasi-norm of the sum is controlled by the mixed norm of the
2^{js}-weighted pieces once s clears the weight-and-exponent threshold.
Alongside the assembly check live the convolution estimates (kernel
against maximal function, kernel against Lebesgue norm) and the dyadic
series inequality, each exposed as a measured constant.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid, PreconditionError, random_band_limited
from .spaces import SpaceSpec, _base_norm, _lq_pointwise, _lq_scalar, smoothness_threshold, space_norm
from .weights import Weight, lp_norm, maximal

__all__ = [
    "BandLimitedSequence",
    "generate_sequence",
    "support_check",
    "assemble_and_bound",
    "peetre_convolution_bound",
    "convolution_norm_bound",
    "dyadic_series_bound",
]


@dataclass(frozen=True)
class BandLimitedSequence:
    """Fields u_j with supp(u_j hat) inside {|k| <= D 2^j}, bit-exactly."""

    grid: Grid
    D: float
    levels: tuple
    fields: dict
    seed: int
    profile: str

    def __iter__(self):
        return ((j, self.fields[j]) for j in self.levels)

    def total(self) -> Field:
        out = Field.zero(self.grid)
        for j in self.levels:
            out = out + self.fields[j]
        return out


def generate_sequence(
    grid: Grid,
    D: float,
    j_range,
    seed: int,
    profile: str = "random",
) -> BandLimitedSequence:
    """Random or edge-concentrated band-limited sequence.

    The random profile spreads Gaussian coefficients over the whole ball
    1 <= |k| <= D 2^j; the concentrated profile keeps only the outer
    shell D 2^{j-1} <= |k| <= D 2^j, the worst case for block overlap.
    Every piece is mean-zero with unit L^2 norm.
    """
    levels = tuple(int(j) for j in j_range)
    if not levels:
        raise PreconditionError("empty scale range")
    if any(j < 0 for j in levels):
        raise PreconditionError("scales must be non-negative")
    if D <= 0:
        raise PreconditionError("D must be positive")
    jmax = max(levels)
    if D * 2**jmax > grid.size / 2 - 1:
        raise PreconditionError(
            f"ball radius D 2^j = {D * 2**jmax} exceeds the grid band {grid.size // 2 - 1}"
        )
    if profile not in ("random", "concentrated"):
        raise PreconditionError(f"unknown profile {profile!r}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    fields = {}
    for j in levels:
        hi = D * 2**j
        lo = 1.0 if profile == "random" else max(D * 2 ** (j - 1), 1.0)
        fields[j] = random_band_limited(grid, lo, hi, rng)
    return BandLimitedSequence(grid, float(D), levels, fields, int(seed), profile)


def support_check(seq: BandLimitedSequence) -> bool:
    """Bit-exact verification of the ball support invariant."""
    r = seq.grid.freq_norm
    for j in seq.levels:
        outside = r > seq.D * 2**j
        if np.any(seq.fields[j].coef[outside] != 0):
            return False
    return True


def assemble_and_bound(seq: BandLimitedSequence, spec: SpaceSpec, fam) -> dict:
    """Quasi-norm of sum u_j against the mixed norm of {2^{js} u_j}.

    TL-type specs aggregate pointwise in l^q before the base norm;
    Besov-type specs take base norms first and l^q after.  Smoothness
    below the admissibility threshold is reported as a warning, never an
    error: the sufficiency direction is what the bound asserts.
    """
    if spec.family not in ("tl", "besov"):
        raise PreconditionError("assembly bound applies to tl/besov specs")
    total = seq.total()
    lhs = space_norm(total, spec, fam)
    grid = seq.grid
    if spec.family == "tl":
        stack = np.stack(
            [2.0 ** (j * spec.s) * np.abs(seq.fields[j].samples) for j in seq.levels]
        )
        rhs = _base_norm(_lq_pointwise(stack, spec.q), grid, spec)
    else:
        vals = np.array(
            [
                2.0 ** (j * spec.s)
                * _base_norm(np.abs(seq.fields[j].samples), grid, spec)
                for j in seq.levels
            ]
        )
        rhs = _lq_scalar(vals, spec.q)
    threshold = smoothness_threshold(spec, grid.ndim)
    ok = spec.s > threshold
    return {
        "lhs": lhs,
        "rhs": rhs,
        "ratio": lhs / rhs if rhs > 0 else 0.0,
        "s": spec.s,
        "threshold": threshold,
        "hypothesis_ok": ok,
        "warnings": [] if ok else [
            f"smoothness s={spec.s} at or below threshold {threshold:.6f}"
        ],
    }


def _check_band(f: Field, radius: float, label: str) -> None:
    outside = f.grid.freq_norm > radius
    if np.any(f.coef[outside] != 0):
        k = np.argwhere((f.coef != 0) & outside)[0] - f.grid.size // 2
        raise PreconditionError(
            f"{label}: spectrum occupies k={k.tolist()} outside radius {radius}"
        )


def _convolve(phi: Field, f: Field) -> Field:
    if phi.grid != f.grid:
        raise PreconditionError("kernel and field live on different grids")
    return Field(f.grid, phi.coef * f.coef)


def peetre_convolution_bound(
    phi: Field, f: Field, A: float, R: float, r: float, d: float
) -> float:
    """Measured constant in the kernel-vs-maximal-function bound.

    sup_x |phi * f|(x) / [R^{n(1/r - 1)} A^{-n} sup (1 + |A y|)^d |phi(y)|
    M_r f(x)] for f with spectrum inside {|k| <= A R}.
    """
    if not (0 < r <= 1):
        raise PreconditionError("r must lie in (0, 1]")
    if A <= 0 or R < 1:
        raise PreconditionError("need A > 0 and R >= 1")
    n = f.grid.ndim
    if not d > n / r:
        raise PreconditionError(f"need d > n/r = {n / r}")
    _check_band(f, A * R, "peetre_convolution_bound")
    conv = np.abs(_convolve(phi, f).samples)
    if np.max(conv) == 0.0:
        return 0.0
    kernel = float(np.max((1.0 + A * phi.grid.radial_distance) ** d * np.abs(phi.samples)))
    scale = R ** (n * (1.0 / r - 1.0)) * A ** (-n) * kernel
    mrf = maximal(f, grid=f.grid, r=r)
    return float(np.max(conv / (scale * mrf)))


def convolution_norm_bound(
    phi: Field,
    f: Field,
    A: float,
    R: float,
    b: float,
    d: float,
    p: float,
    w: Weight | None = None,
) -> float:
    """Measured constant in the kernel-vs-Lebesgue-norm bound.

    ||phi * f||_{L^p(w)} / [R^{b - n} A^{-n} sup (1 + |A y|^d) |phi(y)|
    ||f||_{L^p(w)}].  The ordering d > b is structural and enforced; the
    weight-dependent part b > n / min(1, p/tau_w) is only estimable, so a
    violation warns instead of failing.
    """
    if A <= 0 or R < 1:
        raise PreconditionError("need A > 0 and R >= 1")
    if not d > b:
        raise PreconditionError(f"parameter order violated: need d > b, got d={d}, b={b}")
    n = f.grid.ndim
    floor = n / 1.0 if w is None else n / min(1.0, p / w.tau().upper)
    if not b > floor:
        _warnings.warn(
            f"hypothesis b > n/min(1, p/tau_w) = {floor:.6f} not met (b={b})",
            stacklevel=2,
        )
    _check_band(f, A * R, "convolution_norm_bound")
    lhs = lp_norm(_convolve(phi, f).samples, p, w, grid=f.grid)
    if lhs == 0.0:
        return 0.0
    kernel = float(np.max((1.0 + (A * phi.grid.radial_distance) ** d) * np.abs(phi.samples)))
    rhs = R ** (b - n) * A ** (-n) * kernel * lp_norm(f.samples, p, w, grid=f.grid)
    return lhs / rhs


def dyadic_series_bound(d_seq, tau: float, lam: float, q: float, k0: int = 0) -> dict:
    """Shifted-tail series inequality, evaluated exactly over all of Z.

    lhs = || { sum_{k >= k0} 2^{tau k} 2^{lam (j+k)} d_{j+k} }_j ||_{l^q}
    rhs = || { 2^{lam j} d_j }_j ||_{l^q}

    d is indexed 0..M and vanishes elsewhere, so every row sum is a
    finite suffix sum and the j -> -inf tail of the l^q norm is a
    geometric series summed in closed form; nothing is truncated.  The
    analytic constant is (sum_k 2^{tau q k})^{1/q} for q <= 1 and the
    triangle-inequality constant sum_k 2^{tau k} for q > 1; the measured
    lhs must not exceed analytic_constant * rhs.
    """
    if not tau < 0:
        raise PreconditionError("tau must be negative")
    if q <= 0:
        raise PreconditionError("q must be positive")
    if k0 < 0:
        raise PreconditionError("k0 must be non-negative")
    d = np.asarray(d_seq, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise PreconditionError("d must be a non-empty 1d sequence")
    if np.any(~np.isfinite(d)) or np.any(d < 0):
        raise PreconditionError("d must be finite and non-negative")
    M = d.size - 1
    idx = np.arange(M + 1)
    core = 2.0 ** ((tau + lam) * idx) * d
    suffix = np.concatenate((np.cumsum(core[::-1])[::-1], [0.0]))  # suffix[a] = sum_{i>=a}

    js = np.arange(-k0, M - k0 + 1)
    rows = 2.0 ** (-tau * js) * suffix[np.maximum(js + k0, 0)]

    rhs_terms = 2.0 ** (lam * idx) * d
    if q == math.inf:
        lhs = max(float(np.max(rows)) if rows.size else 0.0,
                  2.0 ** (tau * (k0 + 1)) * suffix[0])
        rhs = float(np.max(rhs_terms))
        constant = 2.0 ** (tau * k0) / (1.0 - 2.0**tau)
    else:
        ratio_q = 2.0 ** (tau * q)  # < 1
        tail = suffix[0] ** q * 2.0 ** (tau * q * (k0 + 1)) / (1.0 - ratio_q)
        lhs = (float(np.sum(rows**q)) + tail) ** (1.0 / q)
        rhs = float(np.sum(rhs_terms**q)) ** (1.0 / q)
        if q <= 1:
            constant = (2.0 ** (tau * q * k0) / (1.0 - ratio_q)) ** (1.0 / q)
        else:
            constant = 2.0 ** (tau * k0) / (1.0 - 2.0**tau)
    if lhs > constant * rhs * (1.0 + 1e-9):
        raise ArithmeticError(
            f"series bound violated: lhs={lhs} > {constant} * rhs={rhs}"
        )
    return {
        "lhs": lhs,
        "rhs": rhs,
        "ratio": lhs / rhs if rhs > 0 else 0.0,
        "analytic_constant": constant,
        "q": q,
        "tau": tau,
        "k0": k0,
    }
