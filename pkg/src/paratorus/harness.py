"""Experiment campaigns: trial loops, dilation sweeps, report assembly.

Every runner takes a validated ExperimentConfig and returns a plain
dict report: config echo, environment, computed thresholds, per-trial
rows, a summary, and a timestamp (the single field excluded from
byte-level reproducibility).  Randomness is drawn from per-trial
generators spawned deterministically from the campaign seed, so trial
ordering and trial count are the only things that matter.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from .bilinear import (
    apply_direct,
    build_expansion,
    derivative_budget,
    make_symbol,
)
from .config import ConfigError, ExperimentConfig
from .dyadic import LPFamily, peetre_check
from .grid import (
    Field,
    Grid,
    PreconditionError,
    dilate,
    field_from_json,
    random_band_limited,
)
from .nikolskij import (
    assemble_and_bound,
    convolution_norm_bound,
    dyadic_series_bound,
    generate_sequence,
    peetre_convolution_bound,
)
from .scattering import (
    EstimateSpec,
    ScatteringProblem,
    cone_check,
    cone_data,
    verify_scattering,
)
from .spaces import SpaceSpec, hardy_norm, smoothness_threshold, sobolev_norm, space_norm
from .weights import ExponentFunction, Weight, fefferman_stein_check

__all__ = [
    "run_experiment",
    "run_leibniz",
    "run_nikolskij",
    "run_scattering",
    "run_lemma_suite",
    "run_norm_bench",
    "apply_command",
    "coeffs_command",
    "write_report",
    "report_bytes",
    "sanitize",
]


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("paratorus")
    except Exception:
        return "unknown"


def _grid(cfg: ExperimentConfig) -> Grid:
    return Grid(cfg.dim, cfg.size)


def _weights(cfg: ExperimentConfig, grid: Grid):
    """(w1, w2, composed w); None for the unweighted run."""
    wt = cfg.weights
    if wt["kind"] == "constant":
        return None, None, None
    a1, a2 = float(wt["a1"]), float(wt["a2"])
    p = float(cfg.space["p"])
    p1 = float(cfg.space["p1"])
    p2 = float(cfg.space["p2"])
    w1 = Weight.power(grid, a1)
    w2 = Weight.power(grid, a2)
    w = Weight.power(grid, a1 * p / p1 + a2 * p / p2)
    return w1, w2, w


def _exponent(cfg: ExperimentConfig, grid: Grid) -> ExponentFunction | None:
    if cfg.space["base"] != "variable":
        return None
    p = float(cfg.space["p"])
    amp = float(cfg.space["variable_amplitude"])
    return ExponentFunction.from_callable(
        grid, lambda x: p + amp * np.sin(2.0 * np.pi * x[..., 0])
    )


def _symbol_from_cfg(cfg: ExperimentConfig):
    sym = cfg.symbol
    name = sym["name"]
    if cfg.kind == "leibniz":
        name = "one"
    if name == "one":
        return make_symbol("one")
    return make_symbol(
        name,
        gamma=float(sym["gamma"]),
        t=float(sym["t"]),
        delta=float(sym["delta"]),
    )


def _lhs_spec(cfg: ExperimentConfig, grid: Grid, w, exponent) -> SpaceSpec:
    sp = cfg.space
    t = None if sp["t"] is None else float(sp["t"])
    return SpaceSpec(
        family=sp["family"],
        p=float(sp["p"]),
        q=float(sp["q"]),
        s=float(sp["s"]),
        homogeneous=bool(sp["homogeneous"]),
        base=sp["base"],
        t=t,
        weight=None if sp["base"] == "variable" else w,
        exponent=exponent,
    )


def _seed_ints(seed: int, count: int) -> list:
    if count == 0:
        return []
    state = np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)
    return [int(v) for v in state]


def _trial_rngs(seed: int, count: int) -> list:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _strip_mean(f: Field) -> Field:
    center = (f.grid.size // 2,) * f.grid.ndim
    if f.coef[center] == 0:
        return f
    out = f.coef.copy()
    out[center] = 0.0
    return Field(f.grid, out)


def _norm_mod_mean(f: Field, spec: SpaceSpec, fam: LPFamily) -> float:
    """Space norm, with the mean projected out first for mean-blind scales."""
    blind = spec.family in ("tl", "besov", "hardy") and spec.homogeneous
    return space_norm(_strip_mean(f) if blind else f, spec, fam)


def _summary(rows, key: str = "ratio") -> dict:
    vals = [row[key] for row in rows if key in row]
    finite = [v for v in vals if math.isfinite(v)]
    return {
        "count": len(vals),
        "max": max(vals) if vals else 0.0,
        "median": float(np.median(vals)) if vals else 0.0,
        "all_finite": len(finite) == len(vals),
    }


def _per_dilation(rows) -> dict:
    out = {}
    for row in rows:
        k = str(row.get("dilation", 0))
        out[k] = max(out.get(k, 0.0), row["ratio"])
    return out


def _environment(cfg: ExperimentConfig) -> dict:
    return {
        "package": _package_version(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "grid": {"dim": cfg.dim, "size": cfg.size},
        "seed": cfg.seed,
    }


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "kind": cfg.kind,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "dim": cfg.dim,
        "size": cfg.size,
        "band": [cfg.band_lo, cfg.band_hi],
        "dilation": [cfg.k_min, cfg.k_max],
        "symbol": dict(cfg.symbol),
        "space": dict(cfg.space),
        "weights": dict(cfg.weights),
        "nikolskij": dict(cfg.nikolskij),
        "scattering": dict(cfg.scattering),
        "lemmas": dict(cfg.lemmas),
    }


def _meta() -> dict:
    return {"timestamp": datetime.now(timezone.utc).isoformat()}


def _base_report(cfg: ExperimentConfig) -> dict:
    return {
        "kind": cfg.kind,
        "config": _config_echo(cfg),
        "environment": _environment(cfg),
        "meta": _meta(),
    }


# ----------------------------------------------------------------------
# Leibniz-type campaigns


def run_leibniz(cfg: ExperimentConfig) -> dict:
    """Measured ratio campaign for the bilinear Leibniz-type inequalities.

    Per trial, a random band-limited pair is swept through the dilation
    family: the exponent labels come from the config but the family is
    realized upward from the base band (integer spectra cannot be
    dilated downward), so each labeled slice sees the same geometric
    family.  A dilation overflowing the band is counted as skipped.
    """
    grid = _grid(cfg)
    fam = LPFamily(grid)
    fine = grid.refine(2)
    fam_fine = LPFamily(fine)
    w1, w2, w = _weights(cfg, grid)
    exponent = _exponent(cfg, grid)
    sym = _symbol_from_cfg(cfg)
    m = sym.order
    lhs_spec = _lhs_spec(cfg, grid, w, exponent)
    sp = cfg.space
    p1, p2 = float(sp["p1"]), float(sp["p2"])
    hom = bool(sp["homogeneous"])
    form = sp["form"]
    rhs1_spec = replace(lhs_spec, p=p1, s=lhs_spec.s + m,
                        weight=None if exponent is not None else w1)
    rhs2_spec = replace(lhs_spec, p=p2, s=lhs_spec.s + m,
                        weight=None if exponent is not None else w2)
    setting = "tl" if lhs_spec.family == "tl" else "besov"
    budget = derivative_budget(p1, p2, lhs_spec.p, lhs_spec.q, w1, w2,
                               setting=setting, ndim=cfg.dim)
    threshold = smoothness_threshold(lhs_spec, cfg.dim)

    def hardy_kwargs():
        return dict(local=not hom, base=lhs_spec.base, t=lhs_spec.t, exponent=exponent)

    rows = []
    skipped = 0
    span = cfg.k_max - cfg.k_min
    rngs = _trial_rngs(cfg.seed, cfg.trials)
    for trial in range(cfg.trials):
        rng = rngs[trial]
        f0 = random_band_limited(grid, cfg.band_lo, cfg.band_hi, rng)
        g0 = random_band_limited(grid, cfg.band_lo, cfg.band_hi, rng)
        for label in range(cfg.k_min, cfg.k_max + 1):
            e = label - cfg.k_min
            try:
                fk = dilate(f0, e)
                gk = dilate(g0, e)
            except PreconditionError:
                skipped += 1
                continue
            tfg = apply_direct(sym, fk, gk)
            if cfg.kind == "hardy_leibniz":
                lhs = sobolev_norm(
                    tfg, lhs_spec.s, lhs_spec.p, w, fam_fine, homogeneous=hom,
                    base=lhs_spec.base, t=lhs_spec.t, exponent=exponent,
                )
                n1 = sobolev_norm(
                    fk, lhs_spec.s + m, p1, w1, fam, homogeneous=hom,
                    base=lhs_spec.base, t=lhs_spec.t, exponent=exponent,
                )
                n2 = sobolev_norm(
                    gk, lhs_spec.s + m, p2, w2, fam, homogeneous=hom,
                    base=lhs_spec.base, t=lhs_spec.t, exponent=exponent,
                )
                h1 = hardy_norm(fk, p1, w1, fam, **hardy_kwargs())
                h2 = hardy_norm(gk, p2, w2, fam, **hardy_kwargs())
                rhs1, rhs2 = n1 * h2, h1 * n2
                rhs = rhs1 + rhs2
            elif form == "linf":
                lhs = _norm_mod_mean(tfg, lhs_spec, fam_fine)
                sup_f = float(np.max(np.abs(fk.samples)))
                rhs1 = sup_f * space_norm(gk, replace(lhs_spec, s=lhs_spec.s + m), fam)
                rhs2 = 0.0
                rhs = rhs1
            else:
                lhs = _norm_mod_mean(tfg, lhs_spec, fam_fine)
                rhs1 = space_norm(fk, rhs1_spec, fam) * hardy_norm(
                    gk, p2, w2, fam, **hardy_kwargs()
                )
                rhs2 = hardy_norm(fk, p1, w1, fam, **hardy_kwargs()) * space_norm(
                    gk, rhs2_spec, fam
                )
                rhs = rhs1 + rhs2
            rows.append(
                {
                    "trial": trial,
                    "dilation": label,
                    "lhs": lhs,
                    "rhs1": rhs1,
                    "rhs2": rhs2,
                    "ratio": lhs / rhs if rhs > 0 else 0.0,
                }
            )

    report = _base_report(cfg)
    summary = _summary(rows)
    summary["skipped"] = skipped
    summary["per_dilation_max"] = _per_dilation(rows)
    report.update(
        {
            "rows": rows,
            "summary": summary,
            "thresholds": {
                "s": lhs_spec.s,
                "smoothness_threshold": threshold,
                "above_threshold": lhs_spec.s > threshold,
                "derivative_budget": budget["budget"],
                "tau_w1": budget["tau_w1"],
                "tau_w2": budget["tau_w2"],
                "symbol_order": m,
            },
            "passed": summary["all_finite"] and (cfg.trials == 0 or bool(rows)),
        }
    )
    return report


# ----------------------------------------------------------------------
# Nikolskij campaign


def run_nikolskij(cfg: ExperimentConfig) -> dict:
    grid = _grid(cfg)
    fam = LPFamily(grid)
    w = Weight.power(grid, float(cfg.weights["a1"])) if cfg.weights["kind"] == "power" else None
    exponent = _exponent(cfg, grid)
    nk = cfg.nikolskij
    sp = cfg.space
    spec = SpaceSpec(
        family=nk["family"],
        p=float(sp["p"]),
        q=float(sp["q"]),
        s=float(sp["s"]),
        homogeneous=bool(sp["homogeneous"]),
        base=sp["base"],
        t=None if sp["t"] is None else float(sp["t"]),
        weight=None if exponent is not None else w,
        exponent=exponent,
    )
    levels = range(int(nk["j_min"]), int(nk["j_max"]) + 1)
    seeds = _seed_ints(cfg.seed, cfg.trials)
    rows = []
    for trial in range(cfg.trials):
        seq = generate_sequence(grid, float(nk["D"]), levels, seeds[trial], nk["profile"])
        res = assemble_and_bound(seq, spec, fam)
        rows.append(
            {
                "trial": trial,
                "lhs": res["lhs"],
                "rhs": res["rhs"],
                "ratio": res["ratio"],
                "hypothesis_ok": res["hypothesis_ok"],
            }
        )
    report = _base_report(cfg)
    threshold = smoothness_threshold(spec, cfg.dim)
    report.update(
        {
            "rows": rows,
            "summary": _summary(rows),
            "thresholds": {
                "s": spec.s,
                "smoothness_threshold": threshold,
                "above_threshold": spec.s > threshold,
            },
            "passed": _summary(rows)["all_finite"],
        }
    )
    return report


# ----------------------------------------------------------------------
# Scattering campaign


def run_scattering(cfg: ExperimentConfig) -> dict:
    grid = _grid(cfg)
    fam = LPFamily(grid)
    sc = cfg.scattering
    w1, w2, w = _weights(cfg, grid)
    exponent = _exponent(cfg, grid)
    sp = cfg.space
    kind = sc["kind"]
    hom = kind == "homogeneous"
    lhs = SpaceSpec(
        family="tl",
        p=float(sp["p"]),
        q=float(sp["q"]),
        s=float(sp["s"]),
        homogeneous=hom,
        base=sp["base"],
        t=None if sp["t"] is None else float(sp["t"]),
        weight=None if exponent is not None else w,
        exponent=exponent,
    )
    est = EstimateSpec(space=lhs, p1=float(sp["p1"]), p2=float(sp["p2"]), w1=w1, w2=w2)
    times = tuple(float(t) for t in sc["times"])
    gamma = float(sc["gamma"])
    seeds = _seed_ints(cfg.seed, cfg.trials)
    rows = []
    sample_decay = None
    flags = None
    budget = None
    for trial in range(cfg.trials):
        if sc["cone"]:
            f, g = cone_data(grid, float(sc["delta"]), seeds[trial], kind)
            cone_ok = cone_check(f, g, float(sc["delta"]), kind)["ok"]
        else:
            rng = np.random.default_rng(seeds[trial])
            f = random_band_limited(grid, cfg.band_lo, cfg.band_hi, rng)
            g = random_band_limited(grid, cfg.band_lo, cfg.band_hi, rng)
            cone_ok = None
        problem = ScatteringProblem(
            kind=kind, gamma=gamma, f=f, g=g, times=times,
            targets=(lhs,), estimates=(est,),
            delta=float(sc["delta"]) if sc["cone"] else None,
        )
        res = verify_scattering(problem, fam, quad_tol=float(sc["quad_tol"]))
        est_row = res["estimates"][0]
        rows.append(
            {
                "trial": trial,
                "lambda_min": res["lambda_min"],
                "decay_rate": res["decay_rate"],
                "decay_rel_err": res["decay_rel_err"],
                "quad_rel_error": res["quadrature_check"][0]["rel_error"],
                "monotone": res["monotone"],
                "lhs": est_row["lhs"],
                "rhs1": est_row["rhs1"],
                "rhs2": est_row["rhs2"],
                "ratio": est_row["ratio"],
                "cone_ok": cone_ok,
            }
        )
        if trial == 0:
            sample_decay = {
                "times": res["times"],
                "l2_differences": res["l2_differences"],
                "decay_rate": res["decay_rate"],
                "lambda_min": res["lambda_min"],
            }
            flags = res["flags"]
            budget = res["estimates"][0]["budget"]
    report = _base_report(cfg)
    summary = _summary(rows)
    if rows:
        summary["max_quad_rel_error"] = max(r["quad_rel_error"] for r in rows)
        summary["all_monotone"] = all(r["monotone"] for r in rows)
        summary["max_decay_rel_err"] = max(
            (r["decay_rel_err"] for r in rows if r["decay_rel_err"] is not None),
            default=None,
        )
    report.update(
        {
            "rows": rows,
            "summary": summary,
            "sample_decay": sample_decay,
            "thresholds": {
                "gamma": gamma,
                "derivative_budget": budget,
                "flags": flags,
                "s": lhs.s,
                "smoothness_threshold": smoothness_threshold(lhs, cfg.dim),
            },
            "passed": (
                summary["all_finite"]
                and (not rows or summary["all_monotone"])
                and (not rows or summary["max_quad_rel_error"] < 1e-5)
            ),
        }
    )
    return report


# ----------------------------------------------------------------------
# Lemma suite


def run_lemma_suite(cfg: ExperimentConfig) -> dict:
    """Pointwise and series lemmas measured over a parameter grid.

    Individual violations are collected in `failures`; the suite only
    reports, leaving judgment to the caller (and exit codes to the CLI).
    """
    grid = _grid(cfg)
    fam = LPFamily(grid)
    n = grid.ndim
    failures = []
    sections = {}
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    scales = [int(j) for j in cfg.lemmas["scales"] if int(j) in fam.j_range]

    # translated-block pointwise bound
    peetre_rows = []
    f = random_band_limited(grid, 1.0, grid.band_limit / 2.0, rng)
    translations = (
        [[a] for a in (-4.0, -1.0, 0.0, 0.5, 1.0, 4.0)]
        if n == 1
        else [[a, b] for a in (-1.0, 0.0, 2.0) for b in (-2.0, 0.0, 1.0)]
    )
    for j in scales:
        res = peetre_check(f, j, translations, r=1.0, eps=1.0, fam=fam)
        peetre_rows.append({"j": j, "max_ratio": res["max_ratio"]})
        if not math.isfinite(res["max_ratio"]):
            failures.append(f"pointwise bound non-finite at j={j}")
    sections["peetre_pointwise"] = peetre_rows

    # kernel convolution bounds across the scale sweep
    conv_rows = []
    for j in scales:
        A = 2.0**j
        R = 2.0
        phi = Field(grid, fam.block_values(j, "psi").astype(complex))
        band_hi = min(A * R, grid.size / 2 - 1)
        fj = random_band_limited(grid, 1.0, band_hi, rng)
        c1 = peetre_convolution_bound(phi, fj, A, R, r=1.0, d=n + 1.0)
        c2 = convolution_norm_bound(phi, fj, A, R, b=n + 0.5, d=n + 1.5, p=2.0, w=None)
        conv_rows.append({"j": j, "peetre_constant": c1, "norm_constant": c2})
        if not (math.isfinite(c1) and math.isfinite(c2)):
            failures.append(f"convolution constant non-finite at j={j}")
    sections["convolution"] = conv_rows

    # dyadic series inequality, randomized
    series_trials = int(cfg.lemmas["series_trials"])
    series_rng = np.random.default_rng(
        np.random.SeedSequence(int(cfg.lemmas["series_seed"]))
    )
    qs = (1.0, 0.5, 2.0)
    worst_margin = 0.0
    for trial in range(series_trials):
        d = series_rng.random(12)
        q = qs[trial % len(qs)]
        k0 = trial % 3
        try:
            res = dyadic_series_bound(d, tau=-1.0, lam=0.3, q=q, k0=k0)
        except ArithmeticError as exc:
            failures.append(str(exc))
            continue
        margin = res["lhs"] / (res["analytic_constant"] * res["rhs"])
        worst_margin = max(worst_margin, margin)
    sections["series"] = {"trials": series_trials, "worst_margin": worst_margin}

    # vector-valued maximal bound
    fs_fields = [
        random_band_limited(grid, 1.0, grid.band_limit / 2.0, rng) for _ in range(4)
    ]
    fs = fefferman_stein_check(fs_fields, p=2.0, q=2.0, r=1.0, w=Weight.constant(grid))
    sections["fefferman_stein"] = {
        "ratio": fs["ratio"],
        "hypothesis_ok": fs["hypothesis_ok"],
    }
    if not math.isfinite(fs["ratio"]):
        failures.append("vector maximal ratio non-finite")

    report = _base_report(cfg)
    report.update(
        {
            "sections": sections,
            "failures": failures,
            "rows": peetre_rows + conv_rows,
            "summary": {
                "failure_count": len(failures),
                "series_worst_margin": worst_margin,
            },
            "passed": not failures,
        }
    )
    return report


# ----------------------------------------------------------------------
# Norm bench


def run_norm_bench(cfg: ExperimentConfig) -> dict:
    grid = _grid(cfg)
    fam = LPFamily(grid)
    w1, _, w = _weights(cfg, grid)
    sp = cfg.space
    p = float(sp["p"])
    q = float(sp["q"])
    s = float(sp["s"])
    t = float(sp["t"]) if sp["t"] is not None else 2.0 * p
    amp = float(sp["variable_amplitude"])
    exponent = ExponentFunction.from_callable(
        grid, lambda x: p + amp * np.sin(2.0 * np.pi * x[..., 0])
    )
    battery = [
        ("lebesgue", SpaceSpec(family="lebesgue", p=p, weight=w)),
        ("lorentz", SpaceSpec(family="lorentz", p=p, t=t, weight=w)),
        ("morrey", SpaceSpec(family="morrey", p=p, t=max(t, p), weight=w)),
        ("variable", SpaceSpec(family="variable", p=p, exponent=exponent)),
        ("tl_hom", SpaceSpec(family="tl", p=p, q=q, s=s, weight=w)),
        ("tl_inhom", SpaceSpec(family="tl", p=p, q=q, s=s, homogeneous=False, weight=w)),
        ("besov_hom", SpaceSpec(family="besov", p=p, q=q, s=s, weight=w)),
        ("hardy_square", SpaceSpec(family="hardy", p=p, weight=w)),
        ("hardy_maximal", SpaceSpec(family="hardy", p=p, weight=w, hardy_method="maximal")),
        ("sobolev", SpaceSpec(family="sobolev", p=p, s=s, weight=w)),
    ]
    rows = []
    rngs = _trial_rngs(cfg.seed, cfg.trials)
    for trial in range(cfg.trials):
        fld = random_band_limited(grid, cfg.band_lo, cfg.band_hi, rngs[trial])
        for label, spec in battery:
            rows.append(
                {"trial": trial, "norm": label, "value": space_norm(fld, spec, fam)}
            )
    finite = all(math.isfinite(r["value"]) for r in rows)
    report = _base_report(cfg)
    report.update(
        {
            "rows": rows,
            "summary": {
                "count": len(rows),
                "all_finite": finite,
                "max_value": max((r["value"] for r in rows), default=0.0),
            },
            "passed": finite,
        }
    )
    return report


# ----------------------------------------------------------------------
# one-shot commands


def apply_command(
    cfg: ExperimentConfig,
    field_path: str | None = None,
    field2_path: str | None = None,
):
    """Apply the configured symbol to a pair of fields; returns (report, result)."""
    grid = _grid(cfg)
    if field_path is not None:
        with open(field_path) as fh:
            f = field_from_json(json.load(fh))
    else:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        f = random_band_limited(grid, cfg.band_lo, cfg.band_hi, rng)
    if field2_path is not None:
        with open(field2_path) as fh:
            g = field_from_json(json.load(fh))
    else:
        rng2 = np.random.default_rng(np.random.SeedSequence(cfg.seed + 1))
        g = random_band_limited(f.grid, cfg.band_lo, cfg.band_hi, rng2)
    sym = _symbol_from_cfg(cfg)
    out = apply_direct(sym, f, g)
    report = _base_report(cfg)
    report.update(
        {
            "kind": "apply",
            "symbol": sym.name,
            "result_l2": out.l2(),
            "rows": [{"l2": out.l2(), "modes": int(np.count_nonzero(out.coef))}],
            "summary": {"all_finite": bool(np.all(np.isfinite(out.coef)))},
            "passed": bool(np.all(np.isfinite(out.coef))),
        }
    )
    return report, out


def coeffs_command(cfg: ExperimentConfig):
    """Build paraproduct coefficient tables; returns (report, expansion)."""
    grid = _grid(cfg)
    fam = LPFamily(grid)
    sym = _symbol_from_cfg(cfg)
    sy = cfg.symbol
    levels = [int(j) for j in sy["levels"]] if sy["levels"] else list(fam.j_range)
    weight_exp = int(sy["weight_exponent"]) if int(sy["weight_exponent"]) > 0 else grid.ndim + 1
    exp = build_expansion(
        sym,
        levels,
        ndim=grid.ndim,
        a_max=int(sy["a_max"]),
        weight_exponent=weight_exp,
        period=float(sy["period"]),
        margin=float(sy["margin"]),
    )
    rows = []
    for j in levels:
        c1 = exp.slab(j, 1)
        c2 = exp.slab(j, 2)
        center = exp.a_vectors.shape[0] // 2
        rows.append(
            {
                "j": j,
                "max_abs_1": float(np.max(np.abs(c1))),
                "max_abs_2": float(np.max(np.abs(c2))),
                "center_abs_1": float(np.abs(c1[center, center])),
                "scaled_center": float(2.0 ** (-j * sym.order) * np.abs(c1[center, center])),
            }
        )
    finite = all(math.isfinite(r["max_abs_1"]) for r in rows)
    report = _base_report(cfg)
    report.update(
        {
            "kind": "coeff_tables",
            "symbol": sym.name,
            "symbol_order": sym.order,
            "quad_points": exp.quad_points,
            "rows": rows,
            "summary": {"all_finite": finite, "levels": levels},
            "passed": finite,
        }
    )
    return report, exp


# ----------------------------------------------------------------------
# dispatch and serialization


_RUNNERS = {
    "leibniz": run_leibniz,
    "leibniz_cm": run_leibniz,
    "hardy_leibniz": run_leibniz,
    "nikolskij": run_nikolskij,
    "scattering": run_scattering,
    "lemma_suite": run_lemma_suite,
    "norm_bench": run_norm_bench,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    runner = _RUNNERS.get(cfg.kind)
    if runner is None:
        raise ConfigError(f"no runner for kind {cfg.kind!r}")
    return runner(cfg)


def sanitize(obj):
    """Recursively convert a report to JSON-serializable plain types."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def report_bytes(report: dict, strip_timestamp: bool = True) -> bytes:
    """Canonical JSON encoding; timestamp removed for comparisons."""
    clean = sanitize(report)
    if strip_timestamp and "meta" in clean:
        clean = dict(clean)
        clean["meta"] = {k: v for k, v in clean["meta"].items() if k != "timestamp"}
    return json.dumps(clean, indent=2, sort_keys=True).encode()


def _write_csv(rows, path: Path) -> None:
    keys = sorted({k for row in rows for k in row})
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in rows:
            writer.writerow(sanitize(row))


def write_report(
    report: dict,
    out_dir: str,
    fmt: str = "json",
    figures: bool = True,
    basename: str | None = None,
) -> dict:
    """Write the report (JSON and/or CSV) plus figures; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = basename if basename is not None else report.get("kind", "report")
    paths = {}
    if fmt in ("json", "both"):
        jpath = out / f"{base}.json"
        jpath.write_bytes(report_bytes(report, strip_timestamp=False))
        paths["json"] = str(jpath)
    if fmt in ("csv", "both"):
        cpath = out / f"{base}.csv"
        _write_csv(report.get("rows", []), cpath)
        paths["csv"] = str(cpath)
    if figures:
        from . import plots

        paths["figures"] = plots.render_report(report, out, base)
    return paths
