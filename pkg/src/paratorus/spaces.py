"""Smoothness-space quasi-norms built on dyadic blocks.

Homogeneous norms act on the mean-zero surrogate class (the block
ladder starts at j = 0 because grid frequencies satisfy |k| >= 1, and
every coarser block vanishes on mean-zero data).  Inhomogeneous norms
carry the low-frequency term separately.  The pointwise aggregate of a
block ladder can be measured in any of the base spaces from the weights
module, which is how the Lorentz/Morrey/variable-exponent variants
arise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dyadic import LPFamily
from .grid import Field, Grid, PreconditionError, d_s, j_s
from .weights import (
    ExponentFunction,
    Weight,
    lorentz_norm,
    lp_norm,
    morrey_norm,
    variable_lp_norm,
)

__all__ = [
    "SpaceSpec",
    "space_norm",
    "tl_norm",
    "besov_norm",
    "hardy_norm",
    "sobolev_norm",
    "lifting_check",
    "smoothness_threshold",
]

_FAMILIES = ("lebesgue", "lorentz", "morrey", "variable", "tl", "besov", "hardy", "sobolev")
_BASES = ("lebesgue", "lorentz", "morrey", "variable")


@dataclass(frozen=True)
class SpaceSpec:
    """Declarative description of a function-space quasi-norm.

    family picks the construction; base picks the scalar norm applied to
    block aggregates (for tl/besov/hardy/sobolev).  t is the secondary
    index of Lorentz and Morrey scales.  homogeneous toggles the D^s/J^s
    flavor; for hardy it selects global (homogeneous) versus local.
    """

    family: str
    p: float
    q: float = 2.0
    s: float = 0.0
    homogeneous: bool = True
    t: float | None = None
    base: str = "lebesgue"
    weight: Weight | None = None
    exponent: ExponentFunction | None = None
    hardy_method: str = "square"

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise PreconditionError(f"unknown family {self.family!r}")
        if self.base not in _BASES:
            raise PreconditionError(f"unknown base {self.base!r}")
        if self.family == "tl" and self.p == math.inf:
            raise PreconditionError("sup-integrability Triebel-Lizorkin scale is not defined")
        if self.p != math.inf and not self.p > 0:
            raise PreconditionError("p must be positive")
        if not self.q > 0:
            raise PreconditionError("q must be positive")
        needs_t = self.base in ("lorentz", "morrey") or self.family in ("lorentz", "morrey")
        if needs_t and self.t is None:
            raise PreconditionError(f"{self.family}/{self.base} needs the secondary index t")
        uses_var = self.base == "variable" or self.family == "variable"
        if uses_var and self.exponent is None:
            raise PreconditionError("variable-exponent scale needs an exponent function")
        if uses_var and self.weight is not None:
            raise PreconditionError("variable-exponent scale does not take a weight")
        if self.hardy_method not in ("square", "maximal"):
            raise PreconditionError("hardy_method must be 'square' or 'maximal'")


def _base_norm(values: np.ndarray, grid: Grid, spec: SpaceSpec) -> float:
    base = spec.base if spec.family in ("tl", "besov", "hardy", "sobolev") else spec.family
    if base == "lebesgue":
        return lp_norm(values, spec.p, spec.weight, grid=grid)
    if base == "lorentz":
        return lorentz_norm(values, spec.p, spec.t, spec.weight, grid=grid)
    if base == "morrey":
        w = spec.weight if spec.weight is not None else Weight.constant(grid)
        return morrey_norm(values, spec.p, spec.t, w, grid=grid)
    if base == "variable":
        return variable_lp_norm(values, spec.exponent, grid=grid)
    raise PreconditionError(f"unknown base {base!r}")


def _require_mean_zero(f: Field, what: str) -> None:
    if not f.is_mean_zero:
        raise PreconditionError(f"homogeneous {what} norm needs mean-zero input")


def _block_stack(f: Field, fam: LPFamily, js, s: float) -> np.ndarray:
    return np.stack(
        [2.0 ** (j * s) * np.abs(fam.delta_j(f, j).samples) for j in js]
    )


def _lq_pointwise(stack: np.ndarray, q: float) -> np.ndarray:
    if q == math.inf:
        return stack.max(axis=0)
    return (stack**q).sum(axis=0) ** (1.0 / q)


def _lq_scalar(vals: np.ndarray, q: float) -> float:
    if q == math.inf:
        return float(np.max(vals))
    return float(np.sum(np.asarray(vals) ** q) ** (1.0 / q))


def tl_norm(f: Field, spec: SpaceSpec, fam: LPFamily) -> float:
    """Triebel-Lizorkin quasi-norm: base norm of the pointwise l^q block aggregate."""
    if spec.p == math.inf:
        raise PreconditionError("sup-integrability Triebel-Lizorkin scale is not defined")
    if spec.homogeneous:
        _require_mean_zero(f, "Triebel-Lizorkin")
        G = _lq_pointwise(_block_stack(f, fam, fam.j_range, spec.s), spec.q)
        return _base_norm(G, f.grid, spec)
    low = _base_norm(np.abs(fam.s_j(f, 0).samples), f.grid, spec)
    js = [j for j in fam.j_range if j >= 1]
    G = _lq_pointwise(_block_stack(f, fam, js, spec.s), spec.q)
    return low + _base_norm(G, f.grid, spec)


def besov_norm(f: Field, spec: SpaceSpec, fam: LPFamily) -> float:
    """Besov quasi-norm: l^q over scales of base norms of blocks."""
    if spec.homogeneous:
        _require_mean_zero(f, "Besov")
        vals = np.array(
            [
                2.0 ** (j * spec.s) * _base_norm(np.abs(fam.delta_j(f, j).samples), f.grid, spec)
                for j in fam.j_range
            ]
        )
        return _lq_scalar(vals, spec.q)
    low = _base_norm(np.abs(fam.s_j(f, 0).samples), f.grid, spec)
    vals = np.array(
        [
            2.0 ** (j * spec.s) * _base_norm(np.abs(fam.delta_j(f, j).samples), f.grid, spec)
            for j in fam.j_range
            if j >= 1
        ]
    )
    return low + _lq_scalar(vals, spec.q)


def hardy_norm(
    f: Field,
    p: float,
    w: Weight | None = None,
    fam: LPFamily | None = None,
    local: bool = False,
    method: str = "square",
    base: str = "lebesgue",
    t: float | None = None,
    exponent: ExponentFunction | None = None,
) -> float:
    """Hardy quasi-norm, square-function or dilation-maximal realization.

    The square method is the q = 2 block ladder; the maximal method takes
    the pointwise sup of the ball partial sums over dyadic dilations
    (scales below 1 only, for the local space; all scales for the global
    one, whose input must be mean-zero).
    """
    if fam is None:
        raise PreconditionError("hardy_norm needs the dyadic family")
    spec = SpaceSpec(
        family="hardy", p=p, q=2.0, homogeneous=not local,
        base=base, weight=w, t=t, exponent=exponent,
    )
    if method == "square":
        inner = replace(spec, family="tl", s=0.0)
        return tl_norm(f, inner, fam)
    if method != "maximal":
        raise PreconditionError("method must be 'square' or 'maximal'")
    if not local:
        _require_mean_zero(f, "Hardy")
        js = list(fam.j_range)
    else:
        js = [j for j in fam.j_range if j >= 1]
    G = np.max(np.stack([np.abs(fam.s_j(f, j).samples) for j in js]), axis=0)
    return _base_norm(G, f.grid, spec)


def sobolev_norm(
    f: Field,
    s: float,
    p: float,
    w: Weight | None = None,
    fam: LPFamily | None = None,
    homogeneous: bool = True,
    method: str = "square",
    base: str = "lebesgue",
    t: float | None = None,
    exponent: ExponentFunction | None = None,
) -> float:
    """Hardy-Sobolev norm: Hardy norm of the s-th derivative."""
    g = d_s(f, s) if homogeneous else j_s(f, s)
    return hardy_norm(
        g, p, w, fam, local=not homogeneous, method=method, base=base, t=t, exponent=exponent
    )


def space_norm(f: Field, spec: SpaceSpec, fam: LPFamily | None = None) -> float:
    """Dispatch a SpaceSpec to its norm implementation."""
    if spec.family == "lebesgue":
        return lp_norm(f.samples, spec.p, spec.weight, grid=f.grid)
    if spec.family == "lorentz":
        return lorentz_norm(f.samples, spec.p, spec.t, spec.weight, grid=f.grid)
    if spec.family == "morrey":
        w = spec.weight if spec.weight is not None else Weight.constant(f.grid)
        return morrey_norm(f.samples, spec.p, spec.t, w, grid=f.grid)
    if spec.family == "variable":
        return variable_lp_norm(f.samples, spec.exponent, grid=f.grid)
    if fam is None:
        raise PreconditionError(f"{spec.family} norm needs the dyadic family")
    if spec.family == "tl":
        return tl_norm(f, spec, fam)
    if spec.family == "besov":
        return besov_norm(f, spec, fam)
    if spec.family == "hardy":
        return hardy_norm(
            f, spec.p, spec.weight, fam,
            local=not spec.homogeneous, method=spec.hardy_method,
            base=spec.base, t=spec.t, exponent=spec.exponent,
        )
    if spec.family == "sobolev":
        return sobolev_norm(
            f, spec.s, spec.p, spec.weight, fam,
            homogeneous=spec.homogeneous, method=spec.hardy_method,
            base=spec.base, t=spec.t, exponent=spec.exponent,
        )
    raise PreconditionError(f"unknown family {spec.family!r}")


def lifting_check(f: Field, spec: SpaceSpec, fam: LPFamily) -> dict:
    """Ratio of the s-smoothness norm to the 0-smoothness norm of the lifted field."""
    if spec.family not in ("tl", "besov"):
        raise PreconditionError("lifting_check applies to tl/besov specs")
    lifted = d_s(f, spec.s) if spec.homogeneous else j_s(f, spec.s)
    flat = replace(spec, s=0.0)
    norm_fn = tl_norm if spec.family == "tl" else besov_norm
    lhs = norm_fn(f, spec, fam)
    rhs = norm_fn(lifted, flat, fam)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "ratio": lhs / rhs if rhs > 0 else math.inf,
        "s": spec.s,
        "homogeneous": spec.homogeneous,
    }


def _weight_tau_upper(w: Weight | None) -> float:
    return 1.0 if w is None else w.tau().upper


def smoothness_threshold(spec: SpaceSpec, ndim: int) -> float:
    """Smoothness above which the representation bounds hold.

    Lebesgue base: n(1/min(p/tau_w, q, 1) - 1) for the TL scale and
    n(1/min(p/tau_w, 1) - 1) for Besov; the Lorentz base inserts its
    secondary index t into the min, the variable base replaces p/tau_w
    by the exponent's minimum.
    """
    q_part = (spec.q,) if spec.family in ("tl", "hardy", "sobolev") else ()
    base = spec.base if spec.family in ("tl", "besov", "hardy", "sobolev") else spec.family
    if base == "variable":
        lead = spec.exponent.tau
        inner = min((lead,) + q_part + (1.0,))
    elif base == "lorentz":
        lead = spec.p / _weight_tau_upper(spec.weight)
        inner = min((lead, spec.t) + q_part + (1.0,))
    else:
        lead = spec.p / _weight_tau_upper(spec.weight)
        inner = min((lead,) + q_part + (1.0,))
    return ndim * (1.0 / inner - 1.0)
