"""Periodic grid, band-limited fields, and frequency multipliers.

The computational domain is the unit torus [-1/2, 1/2)^n sampled on a
regular grid of N points per axis.  Every field is a trigonometric
polynomial

    f(x) = sum_k  fhat(k) exp(2 pi i k.x),      k in [-N/2, N/2)^n,

stored by its spectral coefficients in centered order (index i along an
axis corresponds to the integer frequency i - N/2).  Sample values live
on the points x_j = j/N - 1/2.  For band-limited data the DFT pair below
is exact, so the two views are interchangeable up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "FrequencyMultiplier",
    "apply_multiplier",
    "d_s",
    "j_s",
    "dilate",
    "random_band_limited",
    "field_to_json",
    "field_from_json",
]


class PreconditionError(ValueError):
    """An operation was called outside its declared domain."""


@dataclass(frozen=True)
class Grid:
    """Regular sampling of the torus [-1/2, 1/2)^ndim with size points per axis.

    Parameters
    ----------
    ndim : int
        Spatial dimension, 1 or 2.
    size : int
        Points per axis.  Must be a power of two, at least 16.
    """

    ndim: int
    size: int

    def __post_init__(self) -> None:
        if self.ndim not in (1, 2):
            raise PreconditionError(f"ndim must be 1 or 2, got {self.ndim}")
        n = self.size
        if n < 16 or (n & (n - 1)) != 0:
            raise PreconditionError(f"size must be a power of two >= 16, got {n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.size,) * self.ndim

    @property
    def cell_volume(self) -> float:
        return float(self.size) ** (-self.ndim)

    @property
    def x_axis(self) -> np.ndarray:
        """Sample coordinates along one axis: j/size - 1/2."""
        return np.arange(self.size) / self.size - 0.5

    @property
    def k_axis(self) -> np.ndarray:
        """Centered integer frequencies along one axis."""
        return np.arange(self.size) - self.size // 2

    @cached_property
    def freq_vectors(self) -> np.ndarray:
        """Integer frequency vector at each spectral position, shape shape + (ndim,)."""
        axes = np.meshgrid(*([self.k_axis] * self.ndim), indexing="ij")
        return np.stack(axes, axis=-1).astype(float)

    @cached_property
    def freq_norm(self) -> np.ndarray:
        """Euclidean norm |k| at each spectral position."""
        return np.sqrt(np.sum(self.freq_vectors**2, axis=-1))

    @cached_property
    def x_mesh(self) -> np.ndarray:
        """Sample coordinates at each spatial position, shape shape + (ndim,)."""
        axes = np.meshgrid(*([self.x_axis] * self.ndim), indexing="ij")
        return np.stack(axes, axis=-1)

    @cached_property
    def radial_distance(self) -> np.ndarray:
        """Torus distance from each sample to the origin."""
        return np.sqrt(np.sum(self.x_mesh**2, axis=-1))

    @cached_property
    def _sign(self) -> np.ndarray:
        # (-1)^(k_1 + ... + k_n) on centered indices; absorbs the -1/2
        # origin offset so that plain FFTs realize the stated convention.
        total = np.zeros(self.shape)
        for axis_k in np.moveaxis(self.freq_vectors, -1, 0):
            total = total + axis_k
        return np.where(np.mod(total, 2) == 0, 1.0, -1.0)

    @property
    def band_limit(self) -> int:
        """Largest |k| covered by the dyadic partition of unity: size // 4."""
        return self.size // 4

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.ndim, self.size * factor)


@dataclass(frozen=True)
class Field:
    """A trigonometric polynomial on a Grid, stored spectrally.

    coef holds the complex coefficients in centered order.  The sampled
    view is computed on demand and cached.
    """

    grid: Grid
    coef: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.coef, dtype=complex)
        if arr.shape != self.grid.shape:
            raise PreconditionError(
                f"coefficient shape {arr.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "coef", arr)

    # -- construction -------------------------------------------------

    @staticmethod
    def from_spectral(grid: Grid, coef: np.ndarray) -> "Field":
        return Field(grid, np.array(coef, dtype=complex))

    @staticmethod
    def from_samples(grid: Grid, values: np.ndarray) -> "Field":
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise PreconditionError(
                f"sample shape {values.shape} does not match grid {grid.shape}"
            )
        coef = np.fft.fftshift(np.fft.fftn(values)) / grid.size**grid.ndim
        return Field(grid, coef * grid._sign)

    @staticmethod
    def zero(grid: Grid) -> "Field":
        return Field(grid, np.zeros(grid.shape, dtype=complex))

    @staticmethod
    def mode(grid: Grid, k: Sequence[int] | int, amplitude: complex = 1.0) -> "Field":
        """Single Fourier mode amplitude * exp(2 pi i k.x)."""
        kvec = np.atleast_1d(np.asarray(k, dtype=int))
        if kvec.shape != (grid.ndim,):
            raise PreconditionError(f"mode index must have {grid.ndim} components")
        half = grid.size // 2
        if np.any(kvec < -half) or np.any(kvec >= half):
            raise PreconditionError(f"mode {kvec.tolist()} outside the grid band")
        coef = np.zeros(grid.shape, dtype=complex)
        coef[tuple(int(c) + half for c in kvec)] = amplitude
        return Field(grid, coef)

    # -- views ---------------------------------------------------------

    @cached_property
    def samples(self) -> np.ndarray:
        g = self.grid
        scaled = np.fft.ifftshift(self.coef * g._sign)
        return np.fft.ifftn(scaled) * g.size**g.ndim

    @property
    def mean_coefficient(self) -> complex:
        half = self.grid.size // 2
        return complex(self.coef[(half,) * self.grid.ndim])

    @property
    def is_mean_zero(self) -> bool:
        return self.mean_coefficient == 0

    def l2(self) -> float:
        """L^2 norm on the torus, via Parseval."""
        return float(np.sqrt(np.sum(np.abs(self.coef) ** 2)))

    # -- arithmetic ----------------------------------------------------

    def _check_same_grid(self, other: "Field") -> None:
        if other.grid != self.grid:
            raise PreconditionError("fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.coef + other.coef)

    def __sub__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.coef - other.coef)

    def __mul__(self, scalar: complex) -> "Field":
        return Field(self.grid, self.coef * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.coef)

    # -- embedding -----------------------------------------------------

    def pad_to(self, target: Grid) -> "Field":
        """Embed into a finer grid on the same torus (spectral zero-padding)."""
        if target.ndim != self.grid.ndim:
            raise PreconditionError("dimension mismatch")
        if target.size < self.grid.size:
            raise PreconditionError("target grid is coarser than the source")
        if target.size == self.grid.size:
            return Field(target, self.coef.copy())
        off = (target.size - self.grid.size) // 2
        out = np.zeros(target.shape, dtype=complex)
        sl = tuple(slice(off, off + self.grid.size) for _ in range(self.grid.ndim))
        out[sl] = self.coef
        return Field(target, out)


@dataclass(frozen=True)
class FrequencyMultiplier:
    """Diagonal operator in frequency: (T f)^(k) = m(k) fhat(k).

    func maps an array of frequency vectors, shape (..., ndim), to complex
    values of shape (...).  zero_mode selects how the k = 0 coefficient is
    treated: "func" evaluates the symbol there too, "zero" annihilates it,
    "keep" passes it through untouched.
    """

    func: Callable[[np.ndarray], np.ndarray]
    zero_mode: str = "func"
    name: str = ""

    def __post_init__(self) -> None:
        if self.zero_mode not in ("func", "zero", "keep"):
            raise PreconditionError(f"bad zero_mode {self.zero_mode!r}")

    def values_on(self, grid: Grid) -> np.ndarray:
        vals = np.asarray(self.func(grid.freq_vectors), dtype=complex)
        if vals.shape != grid.shape:
            raise PreconditionError("multiplier did not broadcast over the grid")
        center = (grid.size // 2,) * grid.ndim
        if self.zero_mode == "zero":
            vals[center] = 0.0
        elif self.zero_mode == "keep":
            vals[center] = 1.0
        if not np.all(np.isfinite(vals)):
            bad = np.argwhere(~np.isfinite(vals))[0]
            kbad = grid.freq_vectors[tuple(bad)]
            raise PreconditionError(
                f"multiplier {self.name or 'anonymous'} non-finite at k={kbad.tolist()}"
            )
        return vals


def apply_multiplier(f: Field, m: FrequencyMultiplier) -> Field:
    return Field(f.grid, f.coef * m.values_on(f.grid))


def radial_multiplier(fn: Callable[[np.ndarray], np.ndarray], **kw) -> FrequencyMultiplier:
    """Multiplier depending only on |k|."""
    return FrequencyMultiplier(
        func=lambda k: fn(np.sqrt(np.sum(np.asarray(k) ** 2, axis=-1))), **kw
    )


def d_s(f: Field, s: float) -> Field:
    """Homogeneous fractional derivative: multiplier |k|^s, k = 0 annihilated.

    Negative s requires mean-zero input (the prospective inverse of a
    positive power is only defined off the constants).
    """
    if s < 0 and not f.is_mean_zero:
        raise PreconditionError("negative-order derivative needs mean-zero input")

    def fn(r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(r > 0, r, 1.0) ** s
        return np.where(r > 0, out, 0.0)

    return apply_multiplier(f, radial_multiplier(fn, zero_mode="zero", name=f"D^{s}"))


def j_s(f: Field, s: float) -> Field:
    """Inhomogeneous (Bessel-type) derivative: multiplier (1 + |k|^2)^(s/2)."""
    return apply_multiplier(
        f, radial_multiplier(lambda r: (1.0 + r**2) ** (s / 2.0), name=f"J^{s}")
    )


def dilate(f: Field, log2_factor: int) -> Field:
    """Exact spectral dilation f(2^m x) on the torus.

    Every occupied frequency k must map to an integer in-band frequency
    2^m k; otherwise the trial is not representable and a
    PreconditionError is raised (callers may count it as skipped).
    """
    m = int(log2_factor)
    if m == 0:
        return Field(f.grid, f.coef.copy())
    g = f.grid
    half = g.size // 2
    occupied = np.argwhere(f.coef != 0)
    out = np.zeros(g.shape, dtype=complex)
    for idx in occupied:
        k = idx - half
        if m > 0:
            k2 = k * (2**m)
        else:
            step = 2 ** (-m)
            if np.any(k % step != 0):
                raise PreconditionError(
                    f"dilation 2^{m} sends k={k.tolist()} off the integer lattice"
                )
            k2 = k // step
        if np.any(k2 < -half) or np.any(k2 >= half):
            raise PreconditionError(
                f"dilation 2^{m} sends k={k.tolist()} out of band"
            )
        out[tuple(k2 + half)] += f.coef[tuple(idx)]
    return Field(g, out)


def random_band_limited(
    grid: Grid,
    radius_lo: float,
    radius_hi: float,
    rng: np.random.Generator,
    mean_zero: bool = True,
    unit_l2: bool = True,
) -> Field:
    """Random field with spectrum supported on radius_lo <= |k| <= radius_hi.

    Coefficients are i.i.d. standard complex Gaussians on the annulus,
    normalized to unit L^2 by default.
    """
    r = grid.freq_norm
    mask = (r >= radius_lo) & (r <= radius_hi)
    if mean_zero:
        center = (grid.size // 2,) * grid.ndim
        mask[center] = False
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise PreconditionError(
            f"annulus [{radius_lo}, {radius_hi}] contains no grid frequencies"
        )
    coef = np.zeros(grid.shape, dtype=complex)
    draws = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    coef[mask] = draws / np.sqrt(2.0)
    if unit_l2:
        coef /= np.sqrt(np.sum(np.abs(coef) ** 2))
    return Field(grid, coef)


# -- serialization ------------------------------------------------------


def field_to_json(f: Field) -> dict:
    """Portable spectral form: {n, N, spectral: [[k...], re, im], ...}."""
    half = f.grid.size // 2
    entries = []
    for idx in np.argwhere(f.coef != 0):
        k = (idx - half).tolist()
        c = f.coef[tuple(idx)]
        entries.append([k, float(c.real), float(c.imag)])
    return {"n": f.grid.ndim, "N": f.grid.size, "spectral": entries}


def field_from_json(data: Mapping) -> Field:
    grid = Grid(int(data["n"]), int(data["N"]))
    half = grid.size // 2
    coef = np.zeros(grid.shape, dtype=complex)
    for k, re, im in data["spectral"]:
        kvec = np.atleast_1d(np.asarray(k, dtype=int))
        if kvec.shape != (grid.ndim,):
            raise PreconditionError(f"bad frequency entry {k}")
        if np.any(kvec < -half) or np.any(kvec >= half):
            raise PreconditionError(f"frequency {k} outside the grid band")
        coef[tuple(kvec + half)] = complex(re, im)
    return Field(grid, coef)
