"""Muckenhoupt weights, the dyadic ball family, maximal operators, and
weighted base-space norms (Lebesgue, Lorentz, Morrey, variable exponent).

All integrals are cell sums: int_B u = sum_{x in B} u(x) / N^n.  The
ball family is fixed once and for all: centers at every grid point,
radii 2^-l for l = 1..log2(N), membership by open torus distance
(so the smallest ball is the single containing cell), plus the whole
torus as one extra member (so sup-over-balls quantities can see the
full domain).  Both the Muckenhoupt constant and the maximal operator
are exact suprema over this family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import ndimage

from .grid import Field, Grid, PreconditionError

__all__ = [
    "BallFamily",
    "Weight",
    "ExponentFunction",
    "TauInterval",
    "ap_constant",
    "tau_w_estimate",
    "lp_norm",
    "lorentz_norm",
    "morrey_norm",
    "variable_lp_norm",
    "maximal",
    "fefferman_stein_check",
]


def _as_samples(f, grid: Grid | None = None) -> tuple[np.ndarray, Grid]:
    if isinstance(f, Field):
        return f.samples, f.grid
    arr = np.asarray(f)
    if grid is None:
        raise PreconditionError("raw sample arrays need an explicit grid")
    if arr.shape != grid.shape:
        raise PreconditionError(f"sample shape {arr.shape} does not match grid {grid.shape}")
    return arr, grid


# ----------------------------------------------------------------------
# ball family


class BallFamily:
    """The fixed dyadic ball family on a grid.

    Level l in 1..log2(N) is the open ball of radius 2^-l; level 0 marks
    the whole-torus member.  Window sums are circular (wrap mode), so
    every grid point is the center of one ball per level.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.levels = list(range(1, int(math.log2(grid.size)) + 1))
        self._footprints: dict[int, np.ndarray] = {}

    def half_width(self, level: int) -> int:
        # samples within open distance 2^-l: |offset| < N * 2^-l
        return self.grid.size // (2**level) - 1

    def footprint(self, level: int) -> np.ndarray:
        """Boolean membership stencil (offsets) for one ball, any center."""
        if level in self._footprints:
            return self._footprints[level]
        n, N = self.grid.ndim, self.grid.size
        h = self.half_width(level)
        offs = np.arange(-h, h + 1)
        if n == 1:
            fp = np.ones(2 * h + 1, dtype=bool)
        else:
            oi, oj = np.meshgrid(offs, offs, indexing="ij")
            fp = (oi**2 + oj**2) < (N / 2**level) ** 2
        self._footprints[level] = fp
        return fp

    def count(self, level: int) -> int:
        return int(np.count_nonzero(self.footprint(level)))

    def sums(self, values: np.ndarray, level: int) -> np.ndarray:
        """Circular window sums of values over the level's balls, per center."""
        fp = self.footprint(level)
        if self.grid.ndim == 1:
            return ndimage.correlate1d(
                np.asarray(values, dtype=float), np.ones(fp.shape[0]), mode="wrap"
            )
        return ndimage.correlate(
            np.asarray(values, dtype=float), fp.astype(float), mode="wrap"
        )

    def averages(self, values: np.ndarray, level: int) -> np.ndarray:
        return self.sums(values, level) / self.count(level)

    def dilated_max(self, values: np.ndarray, level: int) -> np.ndarray:
        """max over centers c within the ball of each point x (x in B(c) iff c in B(x))."""
        fp = self.footprint(level)
        if self.grid.ndim == 1:
            return ndimage.maximum_filter1d(values, size=fp.shape[0], mode="wrap")
        return ndimage.maximum_filter(values, footprint=fp, mode="wrap")


_FAMILIES: dict[tuple[int, int], BallFamily] = {}


def ball_family(grid: Grid) -> BallFamily:
    key = (grid.ndim, grid.size)
    if key not in _FAMILIES:
        _FAMILIES[key] = BallFamily(grid)
    return _FAMILIES[key]


# ----------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class TauInterval:
    """Estimated infimum of {tau : w is tau-admissible}, as an interval."""

    lo: float
    hi: float
    converged: bool = True

    @property
    def upper(self) -> float:
        return self.hi


@dataclass(frozen=True)
class Weight:
    """A positive weight sampled on a grid.

    kind records how the samples arose ("constant", "power", "custom");
    constant and power weights can regenerate themselves on any grid,
    which the admissibility scan and norm evaluation on refined grids
    rely on.  Power weights |x|^a replace the singular origin cell by
    its analytic cell average in 1D and by the value at radius 1/(2N)
    in 2D.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    kind: str = "custom"
    param: float = 0.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != self.grid.shape:
            raise PreconditionError("weight shape does not match grid")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise PreconditionError("weight must be finite and strictly positive")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "_tau_cache", {})

    @staticmethod
    def constant(grid: Grid, c: float = 1.0) -> "Weight":
        if c <= 0:
            raise PreconditionError("constant weight must be positive")
        return Weight(grid, np.full(grid.shape, float(c)), kind="constant", param=float(c))

    @staticmethod
    def power(grid: Grid, a: float) -> "Weight":
        n = grid.ndim
        if a <= -n:
            raise PreconditionError(f"|x|^a is not locally integrable for a <= -{n}")
        r = grid.radial_distance
        vals = np.where(r > 0, r, 1.0) ** a
        origin = tuple([grid.size // 2] * n)
        if n == 1:
            # exact cell average of |x|^a over the origin cell
            vals[origin] = (2.0 * grid.size) ** (-a) / (1.0 + a)
        else:
            vals[origin] = (1.0 / (2.0 * grid.size)) ** a
        return Weight(grid, vals, kind="power", param=float(a))

    @staticmethod
    def custom(grid: Grid, values: np.ndarray) -> "Weight":
        return Weight(grid, np.asarray(values, dtype=float), kind="custom")

    def on_grid(self, target: Grid) -> "Weight":
        """The same weight realized on another grid."""
        if target == self.grid:
            return self
        if target.ndim != self.grid.ndim:
            raise PreconditionError("dimension mismatch")
        if self.kind == "constant":
            return Weight.constant(target, self.param)
        if self.kind == "power":
            return Weight.power(target, self.param)
        if target.size % self.grid.size != 0:
            raise PreconditionError("custom weights only transfer to refinements")
        rep = target.size // self.grid.size
        vals = self.values
        for axis in range(self.grid.ndim):
            vals = np.repeat(vals, rep, axis=axis)
        # refined cells inherit the coarse cell value; coordinates offset by
        # half a coarse cell, so roll to keep cell containment
        return Weight(target, np.roll(vals, -(rep // 2), axis=tuple(range(self.grid.ndim))), kind="custom")

    def tau(self, **kw) -> TauInterval:
        key = tuple(sorted(kw.items()))
        cache = getattr(self, "_tau_cache")
        if key not in cache:
            cache[key] = tau_w_estimate(self, **kw)
        return cache[key]


def ap_constant(w: Weight, p: float) -> float:
    """Muckenhoupt constant over the dyadic ball family.

    sup_B (avg_B w) (avg_B w^(-1/(p-1)))^(p-1), including the whole
    torus.  Exact on the family (it is the oracle, not an estimate).
    """
    if not (1.0 < p < math.inf):
        raise PreconditionError("ap_constant needs p in (1, inf)")
    fam = ball_family(w.grid)
    dual = w.values ** (-1.0 / (p - 1.0))
    best = float(np.mean(w.values) * np.mean(dual) ** (p - 1.0))
    for level in fam.levels:
        a = fam.averages(w.values, level)
        b = fam.averages(dual, level)
        best = max(best, float(np.max(a * b ** (p - 1.0))))
    return best


def tau_w_estimate(
    w: Weight,
    tau_max: float = 8.0,
    iterations: int = 10,
    sizes: Sequence[int] | None = None,
    slope_tol: float = 0.02,
) -> TauInterval:
    """Bracket the admissibility threshold tau_w by bisection.

    A candidate tau is classified by whether the tau-constant of the
    weight stabilizes under grid refinement (fitted log-log slope of the
    constant against N below slope_tol) or keeps growing.  Constant
    weights are admissible for every exponent and return the exact
    degenerate interval [1, 1].  If even tau_max fails to stabilize the
    scan gives up and returns an unconverged [tau_max, inf) marker.
    """
    if w.kind == "constant":
        return TauInterval(1.0, 1.0)
    if sizes is None:
        sizes = (64, 128, 256, 512) if w.grid.ndim == 1 else (16, 32, 64)
    sizes = list(sizes)

    def grown(tau: float) -> bool:
        consts = []
        for N in sizes:
            wN = w.on_grid(Grid(w.grid.ndim, N)) if N != w.grid.size else w
            consts.append(ap_constant(wN, tau))
        logc = np.log(np.asarray(consts))
        logn = np.log(np.asarray(sizes, dtype=float))
        slope = float(np.polyfit(logn, logc, 1)[0])
        return slope > slope_tol

    if grown(tau_max):
        return TauInterval(tau_max, math.inf, converged=False)
    lo, hi = 1.0, tau_max
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if grown(mid):
            lo = mid
        else:
            hi = mid
    step = hi - lo
    return TauInterval(max(1.0, lo - step), min(tau_max, hi + step))


# ----------------------------------------------------------------------
# norms


def lp_norm(f, p: float, w: Weight | None = None, grid: Grid | None = None) -> float:
    """Weighted Lebesgue (quasi-)norm by cell-sum quadrature; p = inf is the max."""
    vals, g = _as_samples(f, grid if grid is not None else (w.grid if w else None))
    if p == math.inf:
        return float(np.max(np.abs(vals)))
    if not (0 < p < math.inf):
        raise PreconditionError("p must lie in (0, inf]")
    wv = 1.0 if w is None else w.on_grid(g).values
    return float(np.sum(np.abs(vals) ** p * wv) * g.cell_volume) ** (1.0 / p)


def _rearrangement(vals: np.ndarray, g: Grid, w: Weight | None):
    """Decreasing |f| values with their weighted cell measures."""
    flat = np.abs(vals).ravel()
    wv = (np.full(flat.shape, 1.0) if w is None else w.on_grid(g).values.ravel()) * g.cell_volume
    order = np.argsort(flat)[::-1]
    return flat[order], wv[order]


def lorentz_norm(f, p: float, t: float, w: Weight | None = None, grid: Grid | None = None) -> float:
    """Lorentz quasi-norm via the weighted decreasing rearrangement.

    The rearrangement of a grid field is a step function, so the layer
    integral int (tau^(1/p) f*(tau))^t dtau/tau is evaluated in closed
    form piece by piece; no quadrature error enters.
    """
    if not (0 < p < math.inf):
        raise PreconditionError("lorentz_norm needs p in (0, inf)")
    if not (0 < t):
        raise PreconditionError("lorentz_norm needs t in (0, inf]")
    vals, g = _as_samples(f, grid if grid is not None else (w.grid if w else None))
    v, m = _rearrangement(vals, g, w)
    M = np.cumsum(m)
    if t == math.inf:
        return float(np.max(v * M ** (1.0 / p)))
    Mlo = np.concatenate(([0.0], M[:-1]))
    pieces = v**t * (p / t) * (M ** (t / p) - Mlo ** (t / p))
    return float(np.sum(pieces)) ** (1.0 / t)


def morrey_norm(f, p: float, t: float, w: Weight, grid: Grid | None = None) -> float:
    """Morrey norm: sup over the ball family of w(B)^(1/t - 1/p) (int_B |f|^p w)^(1/p)."""
    if not (0 < p <= t < math.inf):
        raise PreconditionError("morrey_norm needs 0 < p <= t < inf")
    vals, g = _as_samples(f, grid if grid is not None else w.grid)
    wg = w.on_grid(g)
    fam = ball_family(g)
    fp = np.abs(vals) ** p * wg.values
    expo = 1.0 / t - 1.0 / p
    wtot = float(np.sum(wg.values)) * g.cell_volume
    best = wtot**expo * (float(np.sum(fp)) * g.cell_volume) ** (1.0 / p)
    for level in fam.levels:
        wB = fam.sums(wg.values, level) * g.cell_volume
        sB = fam.sums(fp, level) * g.cell_volume
        best = max(best, float(np.max(wB**expo * sB ** (1.0 / p))))
    return float(best)


@dataclass(frozen=True)
class ExponentFunction:
    """A variable exponent p(x) sampled on a grid.

    fn, when given, regenerates the samples on refined grids.  The
    admissibility threshold of a smooth exponent is its minimum, exposed
    as tau.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != self.grid.shape:
            raise PreconditionError("exponent shape does not match grid")
        if np.any(arr < 1.0) or not np.all(np.isfinite(arr)):
            raise PreconditionError("exponent function must be finite and >= 1")
        object.__setattr__(self, "values", arr)

    @staticmethod
    def from_callable(grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "ExponentFunction":
        vals = np.asarray(fn(grid.x_mesh), dtype=float)
        return ExponentFunction(grid, vals, fn=fn)

    @property
    def p_minus(self) -> float:
        return float(np.min(self.values))

    @property
    def p_plus(self) -> float:
        return float(np.max(self.values))

    @property
    def tau(self) -> float:
        return self.p_minus

    def on_grid(self, target: Grid) -> "ExponentFunction":
        if target == self.grid:
            return self
        if self.fn is not None:
            return ExponentFunction.from_callable(target, self.fn)
        raise PreconditionError("sample-only exponent cannot move to another grid")


def variable_lp_norm(f, pfun: ExponentFunction, grid: Grid | None = None, tol: float = 1e-10) -> float:
    """Luxemburg norm inf{lambda > 0 : int |f/lambda|^p(x) dx <= 1} by bisection."""
    vals, g = _as_samples(f, grid if grid is not None else pfun.grid)
    pv = pfun.on_grid(g).values
    absf = np.abs(vals)
    if np.max(absf) == 0.0:
        return 0.0

    def modular(lam: float) -> float:
        return float(np.sum((absf / lam) ** pv) * g.cell_volume)

    hi = float(np.max(absf))
    if modular(hi) > 1.0:  # volume is 1, so this only guards rounding
        while modular(hi) > 1.0:
            hi *= 2.0
    lo = hi
    while modular(lo) <= 1.0 and lo > hi * 1e-18:
        lo *= 0.5
    if modular(lo) <= 1.0:
        return float(lo)
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if modular(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            break
    return float(hi)


# ----------------------------------------------------------------------
# maximal operators


def maximal(f, grid: Grid | None = None, r: float = 1.0) -> np.ndarray:
    """Ball-average maximal function over the dyadic family, exactly.

    M_r(f) = (M(|f|^r))^(1/r); M itself is the r = 1 case.  Returns
    sample values on the grid.
    """
    if r <= 0:
        raise PreconditionError("r must be positive")
    vals, g = _as_samples(f, grid)
    fam = ball_family(g)
    power = np.abs(vals) ** r
    out = np.full(g.shape, float(np.mean(power)))
    for level in fam.levels:
        avg = fam.averages(power, level)
        out = np.maximum(out, fam.dilated_max(avg, level))
    return out ** (1.0 / r)


def fefferman_stein_check(
    fields: Sequence[Field],
    p: float,
    q: float,
    r: float,
    w: Weight,
) -> dict:
    """Vector-valued maximal inequality as a measured ratio.

    ratio = || (sum_j M_r(f_j)^q)^(1/q) ||_Lp(w) / || (sum_j |f_j|^q)^(1/q) ||_Lp(w)

    The hypothesis 0 < r < min(p/tau_w, q) is evaluated with the upper
    end of the weight's admissibility interval; violations set a warning
    flag but the ratio is still computed.
    """
    if not fields:
        raise PreconditionError("need at least one field")
    g = fields[0].grid
    stack_abs = np.stack([np.abs(f.samples) for f in fields])
    stack_max = np.stack([maximal(np.abs(f.samples), g, r=r) for f in fields])
    if q == math.inf:
        G = stack_abs.max(axis=0)
        GM = stack_max.max(axis=0)
    else:
        G = (stack_abs**q).sum(axis=0) ** (1.0 / q)
        GM = (stack_max**q).sum(axis=0) ** (1.0 / q)
    lhs = lp_norm(GM, p, w, grid=g)
    rhs = lp_norm(G, p, w, grid=g)
    tau = w.tau()
    ok = r < min(p / tau.upper, q)
    warnings = [] if ok else [
        f"hypothesis violated: r={r} not < min(p/tau_w, q) with tau_w upper {tau.upper:.3f}"
    ]
    return {
        "lhs": lhs,
        "rhs": rhs,
        "ratio": lhs / rhs if rhs > 0 else math.inf,
        "hypothesis_ok": ok,
        "warnings": warnings,
        "tau_interval": (tau.lo, tau.hi),
    }
