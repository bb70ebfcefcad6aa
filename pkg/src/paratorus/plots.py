"""Figure rendering for experiment reports (headless, PNG files)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "ratio_figure",
    "decay_figure",
    "coeff_figure",
    "norm_figure",
    "field_figure",
    "render_report",
]


def _save(fig, path: Path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return str(path)


def ratio_figure(rows, path: Path, title: str) -> str:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    trials = [r["trial"] for r in rows]
    ratios = [r["ratio"] for r in rows]
    ks = [r.get("dilation", 0) for r in rows]
    sc = ax1.scatter(trials, ratios, c=ks, cmap="viridis", s=12)
    if len(set(ks)) > 1:
        fig.colorbar(sc, ax=ax1, label="dilation")
    ax1.set_xlabel("trial")
    ax1.set_ylabel("ratio")
    ax1.set_title(title)
    per_k = {}
    for r in rows:
        k = r.get("dilation", 0)
        per_k[k] = max(per_k.get(k, 0.0), r["ratio"])
    keys = sorted(per_k)
    ax2.bar([str(k) for k in keys], [per_k[k] for k in keys])
    ax2.set_xlabel("dilation")
    ax2.set_ylabel("max ratio")
    ax2.set_title("per-dilation maxima")
    return _save(fig, path)


def decay_figure(sample, path: Path) -> str:
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ts = np.asarray(sample["times"], dtype=float)
    vs = np.asarray(sample["l2_differences"], dtype=float)
    ax.semilogy(ts, vs, "o-", label="distance to limit")
    lmin = sample.get("lambda_min")
    if lmin is not None and np.isfinite(lmin) and vs[0] > 0:
        ref = vs[0] * np.exp(-lmin * (ts - ts[0]))
        ax.semilogy(ts, ref, "--", label=f"rate {lmin:.3g} reference")
    rate = sample.get("decay_rate")
    if rate is not None:
        ax.set_title(f"fitted decay rate {rate:.4g}")
    ax.set_xlabel("t")
    ax.set_ylabel("L2 distance")
    ax.legend()
    return _save(fig, path)


def coeff_figure(rows, order: float, path: Path) -> str:
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    js = [r["j"] for r in rows]
    m1 = [r["max_abs_1"] for r in rows]
    m2 = [r["max_abs_2"] for r in rows]
    ax.semilogy(js, m1, "o-", label="table 1 max")
    ax.semilogy(js, m2, "s-", label="table 2 max")
    if m1 and m1[0] > 0:
        ref = [m1[0] * 2.0 ** (order * (j - js[0])) for j in js]
        ax.semilogy(js, ref, "--", label=f"2^(j m), m={order:g}")
    ax.set_xlabel("scale j")
    ax.set_ylabel("coefficient magnitude")
    ax.set_title("paraproduct coefficient decay")
    ax.legend()
    return _save(fig, path)


def norm_figure(rows, path: Path) -> str:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    labels = sorted({r["norm"] for r in rows})
    data = [[r["value"] for r in rows if r["norm"] == lab] for lab in labels]
    ax.boxplot(data)
    ax.set_xticks(range(1, len(labels) + 1))
    ax.set_xticklabels(labels)
    ax.set_ylabel("norm value")
    ax.set_title("norm battery")
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
    return _save(fig, path)


def field_figure(field, path: Path, title: str = "field") -> str:
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    vals = field.samples.real
    if field.grid.ndim == 1:
        ax.plot(field.grid.x_axis, vals)
        ax.set_xlabel("x")
    else:
        im = ax.imshow(
            vals, origin="lower", extent=(-0.5, 0.5, -0.5, 0.5), cmap="RdBu_r"
        )
        fig.colorbar(im, ax=ax)
    ax.set_title(title)
    return _save(fig, path)


def lemma_figure(sections, path: Path) -> str:
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    rows = sections.get("peetre_pointwise", [])
    conv = sections.get("convolution", [])
    if rows:
        ax.plot([r["j"] for r in rows], [r["max_ratio"] for r in rows],
                "o-", label="pointwise bound")
    if conv:
        ax.plot([r["j"] for r in conv], [r["peetre_constant"] for r in conv],
                "s-", label="kernel vs maximal")
        ax.plot([r["j"] for r in conv], [r["norm_constant"] for r in conv],
                "^-", label="kernel vs norm")
    ax.set_xlabel("scale j")
    ax.set_ylabel("measured constant")
    ax.set_title("lemma constants across scales")
    ax.legend()
    return _save(fig, path)


def render_report(report: dict, out_dir: Path, base: str) -> list:
    """Dispatch on report kind; returns the list of figure paths written."""
    out_dir = Path(out_dir)
    kind = report.get("kind", "")
    paths = []
    rows = report.get("rows", [])
    if kind in ("leibniz", "leibniz_cm", "hardy_leibniz", "nikolskij") and rows:
        paths.append(ratio_figure(rows, out_dir / f"{base}_ratios.png", kind))
    elif kind == "scattering" and report.get("sample_decay"):
        paths.append(decay_figure(report["sample_decay"], out_dir / f"{base}_decay.png"))
        if rows:
            paths.append(ratio_figure(rows, out_dir / f"{base}_ratios.png", kind))
    elif kind == "lemma_suite" and report.get("sections"):
        paths.append(lemma_figure(report["sections"], out_dir / f"{base}_constants.png"))
    elif kind == "norm_bench" and rows:
        paths.append(norm_figure(rows, out_dir / f"{base}_norms.png"))
    elif "symbol_order" in report and rows:
        paths.append(coeff_figure(rows, report["symbol_order"], out_dir / f"{base}_coeffs.png"))
    return paths
