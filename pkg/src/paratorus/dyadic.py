"""Dyadic frequency decomposition: smooth cutoff profiles and block operators.

A single monotone transition profile chi (1 below t = 1, 0 above t = 2)
generates everything: the annulus cutoff psi_hat(xi) = chi(|xi|) -
chi(2 |xi|), the ball cutoff phi_hat(xi) = chi(|xi|), and fattened
plateau variants used where a cutoff must be identically 1 on the
support of another.  The scaled annulus cutoffs telescope,

    sum_j psi_hat(2^-j xi) = chi(2^-J |xi|) - chi(2 |xi|),

so on the grid the finite ladder j = 0..j_max tiles every frequency
with 1 <= |k| <= 2^j_max exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .grid import Field, Grid, PreconditionError

__all__ = [
    "TransitionProfile",
    "LPFamily",
    "peetre_check",
]


@dataclass(frozen=True)
class TransitionProfile:
    """Smooth monotone cutoff profile on [0, inf).

    chi(t) = 1 for t <= 1, chi(t) = 0 for t >= 2, with a C-infinity
    mollifier transition in between.  sharpness tunes the transition
    slope; construction rejects profiles whose calibration leaves the
    generated annulus cutoff without a uniform floor (chi(6/5) must stay
    <= 0.95 and chi(5/3) >= 0.05).
    """

    sharpness: float = 0.75

    def __post_init__(self) -> None:
        if not (0 < self.sharpness):
            raise PreconditionError("sharpness must be positive")
        c65, c53 = self.chi(np.array([6.0 / 5.0, 5.0 / 3.0]))
        if c65 > 0.95 or c53 < 0.05:
            raise PreconditionError(
                f"profile calibration failed: chi(6/5)={c65:.4f} (need <= 0.95), "
                f"chi(5/3)={c53:.4f} (need >= 0.05)"
            )
        t = np.linspace(0.0, 2.5, 2001)
        if np.any(np.diff(self.chi(t)) > 1e-12):
            raise PreconditionError("profile is not monotone non-increasing")

    def _bump(self, u: np.ndarray) -> np.ndarray:
        # exp(-beta/u) continued by 0 at u <= 0
        out = np.zeros_like(u, dtype=float)
        pos = u > 0
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            out[pos] = np.exp(-self.sharpness / u[pos])
        return out

    def smoothstep(self, u: np.ndarray) -> np.ndarray:
        """C-infinity rise from 0 at u <= 0 to 1 at u >= 1."""
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        a = self._bump(u)
        b = self._bump(1.0 - u)
        out = np.where(u <= 0.0, 0.0, np.where(u >= 1.0, 1.0, a / np.where(a + b > 0, a + b, 1.0)))
        return float(out[0]) if scalar else out

    def chi(self, t: np.ndarray) -> np.ndarray:
        """The transition profile itself: exactly 1 on [0, 1], exactly 0 on [2, inf)."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = self.smoothstep(2.0 - t)
        out = np.where(t <= 1.0, 1.0, np.where(t >= 2.0, 0.0, out))
        return float(out[0]) if scalar else out

    def plateau(self, t: np.ndarray, a0: float, a1: float, b1: float, b0: float) -> np.ndarray:
        """Smooth plateau: 0 off (a0, b0), exactly 1 on [a1, b1].

        a0 = a1 degenerates to a pure fall (cutoffs anchored at the origin).
        """
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if a1 > a0:
            rise = self.smoothstep((t - a0) / (a1 - a0))
        else:
            rise = np.ones_like(t)
        fall = self.smoothstep((b0 - t) / (b0 - b1))
        out = rise * fall
        out = np.where((t <= a0) & (a1 > a0), 0.0, out)
        out = np.where(t >= b0, 0.0, out)
        out = np.where((t >= a1) & (t <= b1), 1.0, out)
        return float(out[0]) if scalar else out

    @property
    def annulus_floor(self) -> float:
        """Guaranteed lower bound for psi_hat on 3/5 < |xi| < 5/3."""
        return float(min(1.0 - self.chi(6.0 / 5.0), self.chi(5.0 / 3.0)))


_KINDS = ("psi", "phi", "phi2", "psi_fat", "phi_fat", "phi2_fat")


@dataclass(frozen=True)
class LPFamily:
    """Dyadic cutoff family bound to a grid.

    Valid block scales are j in {0, ..., j_max} with
    j_max = log2(size) - 2, so the annulus of the top block stays inside
    the represented frequency band.  Construction verifies the
    telescoping partition of unity, support discipline, and the annulus
    floor on actual grid frequencies, and raises on any violation.

    fattening_margin widens the plateau cutoffs (the *_fat kinds) that
    must be identically 1 on the support of their sharp partners.
    """

    grid: Grid
    profile: TransitionProfile = field(default_factory=TransitionProfile)
    fattening_margin: float = 0.1

    def __post_init__(self) -> None:
        if not (0 < self.fattening_margin <= 0.25):
            raise PreconditionError("fattening_margin must lie in (0, 0.25]")
        object.__setattr__(self, "_cache", {})
        self._verify()

    # -- cutoff evaluation ----------------------------------------------

    @property
    def j_max(self) -> int:
        return int(math.log2(self.grid.size)) - 2

    @property
    def j_range(self) -> range:
        return range(0, self.j_max + 1)

    def cutoff(self, kind: str, t: np.ndarray) -> np.ndarray:
        """Evaluate a named radial cutoff at magnitudes t."""
        chi = self.profile.chi
        m = self.fattening_margin
        if kind == "psi":
            return chi(np.asarray(t, dtype=float)) - chi(2.0 * np.asarray(t, dtype=float))
        if kind == "phi":
            return chi(t)
        if kind == "phi2":
            return chi(2.0 * np.asarray(t, dtype=float))
        if kind == "psi_fat":
            return self.profile.plateau(t, 0.5 * (1.0 - m), 0.5, 2.0, 2.0 * (1.0 + m))
        if kind == "phi_fat":
            return self.profile.plateau(t, 0.0, 0.0, 2.0, 2.0 * (1.0 + m))
        if kind == "phi2_fat":
            return self.profile.plateau(t, 0.0, 0.0, 1.0, 1.0 + m)
        raise PreconditionError(f"unknown cutoff kind {kind!r} (choose from {_KINDS})")

    def block_values(self, j: int, kind: str = "psi") -> np.ndarray:
        """Cutoff evaluated at the scaled grid frequencies 2^-j |k|."""
        key = (j, kind)
        cache = getattr(self, "_cache")
        if key not in cache:
            cache[key] = self.cutoff(kind, self.grid.freq_norm * 2.0 ** (-j))
        return cache[key]

    def _check_scale(self, j: int) -> None:
        if j not in self.j_range:
            raise PreconditionError(
                f"scale j={j} outside the valid range 0..{self.j_max} for size {self.grid.size}"
            )

    def _check_field(self, f: Field) -> None:
        if f.grid != self.grid:
            raise PreconditionError("field grid does not match the family grid")

    # -- block operators --------------------------------------------------

    def delta_j(self, f: Field, j: int) -> Field:
        """Annulus block: multiplier psi_hat(2^-j k)."""
        self._check_field(f)
        self._check_scale(j)
        return Field(f.grid, f.coef * self.block_values(j, "psi"))

    def s_j(self, f: Field, j: int) -> Field:
        """Ball block (partial sum): multiplier phi_hat(2^-j k)."""
        self._check_field(f)
        self._check_scale(j)
        return Field(f.grid, f.coef * self.block_values(j, "phi"))

    def block(self, f: Field, j: int, kind: str = "psi") -> Field:
        self._check_field(f)
        self._check_scale(j)
        return Field(f.grid, f.coef * self.block_values(j, kind))

    def translated_block(
        self,
        f: Field,
        j: int,
        a: Sequence[float] | float,
        kind: str = "psi",
        period: float = 1.0,
    ) -> Field:
        """Block with the kernel translated by a/period in rescaled coordinates.

        The multiplier picks up the phase exp(2 pi i 2^-j k.(a/period)); the
        paraproduct synthesis uses period = L of its coefficient series,
        pointwise kernel-decay checks use period = 1.
        """
        self._check_field(f)
        self._check_scale(j)
        avec = np.atleast_1d(np.asarray(a, dtype=float))
        if avec.shape != (self.grid.ndim,):
            raise PreconditionError(f"translation must have {self.grid.ndim} components")
        if period <= 0:
            raise PreconditionError("period must be positive")
        kdota = np.tensordot(self.grid.freq_vectors, avec, axes=([-1], [0]))
        phase = np.exp(2j * np.pi * (2.0 ** (-j) / period) * kdota)
        return Field(f.grid, f.coef * self.block_values(j, kind) * phase)

    # -- construction checks ----------------------------------------------

    def partition_values(self) -> np.ndarray:
        total = np.zeros(self.grid.shape)
        for j in self.j_range:
            total = total + self.block_values(j, "psi")
        return total

    def _verify(self) -> None:
        r = self.grid.freq_norm
        band = (r >= 1.0) & (r <= 2.0**self.j_max)
        total = self.partition_values()
        err = float(np.max(np.abs(total[band] - 1.0))) if np.any(band) else 0.0
        if err > 1e-12:
            raise PreconditionError(f"partition of unity fails on the grid: error {err:.3e}")
        for j in self.j_range:
            vals = self.block_values(j, "psi")
            outside = (r <= 2.0 ** (j - 1)) | (r >= 2.0 ** (j + 1))
            if np.any(vals[outside] != 0.0):
                raise PreconditionError(f"annulus cutoff at j={j} leaks outside its support")
        floor = self.profile.annulus_floor
        for j in self.j_range:
            t = r * 2.0 ** (-j)
            ann = (t > 0.6) & (t < 5.0 / 3.0)
            if np.any(ann):
                lo = float(np.min(self.block_values(j, "psi")[ann]))
                if lo < min(0.05, floor) * (1.0 - 1e-9):
                    raise PreconditionError(
                        f"annulus floor violated at j={j}: min {lo:.4f} < {floor:.4f}"
                    )

    def overlap_l2(self) -> np.ndarray:
        """sum_j psi_hat(2^-j k)^2 over the grid (the L^2 tiling factor)."""
        total = np.zeros(self.grid.shape)
        for j in self.j_range:
            total = total + self.block_values(j, "psi") ** 2
        return total

    def overlap_l2_bounds(self) -> tuple[float, float]:
        """(min, max) of the L^2 tiling factor over in-band nonzero frequencies."""
        r = self.grid.freq_norm
        band = (r >= 1.0) & (r <= 2.0**self.j_max)
        h = self.overlap_l2()[band]
        return float(np.min(h)), float(np.max(h))


def peetre_check(
    f: Field,
    j: int,
    translations: Iterable[Sequence[float] | float],
    r: float,
    eps: float,
    fam: LPFamily,
    rhs_kind: str = "psi",
    period: float = 1.0,
) -> dict:
    """Measure the translated-block pointwise bound against the maximal function.

    For each translation a the reported ratio is

        max_x |block_j^(tau_a) f(x)| / ((1 + |a|)^(eps + n/r) M_r(block_j f)(x)).

    The denominator block defaults to the sharp annulus cutoff; pass
    rhs_kind="psi_fat" for the fattened variant.
    """
    from .weights import maximal

    if r <= 0:
        raise PreconditionError("r must be positive")
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    n = f.grid.ndim
    base = fam.block(f, j, kind=rhs_kind)
    mr = maximal(np.abs(base.samples), f.grid, r=r)
    rows = []
    worst = 0.0
    for a in translations:
        avec = np.atleast_1d(np.asarray(a, dtype=float))
        tb = fam.translated_block(f, j, avec, kind="psi", period=period)
        numer = np.abs(tb.samples)
        denom = (1.0 + float(np.linalg.norm(avec))) ** (eps + n / r) * mr
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(numer > 0, numer / denom, 0.0)
        worst_a = float(np.max(ratio))
        rows.append({"a": avec.tolist(), "max_ratio": worst_a})
        worst = max(worst, worst_a)
    return {"j": j, "r": r, "eps": eps, "rhs_kind": rhs_kind, "max_ratio": worst, "per_a": rows}
