"""Config validation, experiment runners, report serialization, and the CLI."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from paratorus import ConfigError, config_from_dict, field_from_json, load_config
from paratorus.cli import main
from paratorus.config import with_overrides
from paratorus.harness import (
    apply_command,
    coeffs_command,
    report_bytes,
    run_leibniz,
    run_lemma_suite,
    run_nikolskij,
    run_norm_bench,
    run_scattering,
    sanitize,
    write_report,
)


def test_config_defaults():
    cfg = config_from_dict({})
    assert cfg.kind == "leibniz"
    assert cfg.trials == 20
    assert cfg.seed == 12345
    assert (cfg.dim, cfg.size) == (1, 128)
    assert (cfg.band_lo, cfg.band_hi) == (1.0, 8.0)
    assert (cfg.k_min, cfg.k_max) == (0, 0)
    assert cfg.space["family"] == "tl"
    assert cfg.space["base"] == "lebesgue"
    assert (cfg.space["p"], cfg.space["p1"], cfg.space["p2"]) == (2.0, 4.0, 4.0)
    assert cfg.weights["kind"] == "constant"
    assert cfg.scattering["times"][0] == 0.5
    assert cfg.figures is True


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config table"):
        config_from_dict({"bogus": {}})
    with pytest.raises(ConfigError, match="unknown space option"):
        config_from_dict({"space": {"qq": 1.0}})
    with pytest.raises(ConfigError, match="unknown weights option"):
        config_from_dict({"weights": {"alpha": 0.5}})


BAD_CONFIGS = [
    {"experiment": {"kind": "bogus"}},
    {"experiment": {"trials": -1}},
    {"grid": {"dim": 3}},
    {"grid": {"size": 48}},
    {"grid": {"size": 8}},
    {"grid": {"size": 32}, "data": {"band_hi": 20.0}},
    {"data": {"band_lo": 0.0}},
    {"dilation": {"k_min": 1, "k_max": 0}},
    # integrability split 1/2 != 1/3 + 1/4
    {"space": {"p": 2.0, "p1": 3.0, "p2": 4.0}},
    {"space": {"base": "morrey", "p": 4.0, "t": 2.0, "p1": 8.0, "p2": 8.0}},
    {"space": {"base": "lorentz"}},
    {"space": {"base": "variable"}, "weights": {"kind": "power"}},
    {"space": {"base": "variable", "p": 1.2}},
    {"space": {"form": "pointwise"}},
    {"weights": {"kind": "power", "a1": -2.0}},
    {"scattering": {"times": [2.0, 1.0]}},
    {"scattering": {"times": [1.0]}},
    {"scattering": {"kind": "free"}},
    {"scattering": {"cone": True, "delta": 1.5}},
    {"grid": {"size": 32}, "nikolskij": {"j_max": 5}},
    {"nikolskij": {"j_min": 3, "j_max": 1}},
    {"lemmas": {"scales": [-1, 2]}},
]


def test_config_rejects_bad_values():
    for data in BAD_CONFIGS:
        with pytest.raises(ConfigError):
            config_from_dict(data)


def test_load_config_toml(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        "[experiment]\nkind = 'nikolskij'\ntrials = 3\nseed = 99\n"
        "[grid]\nsize = 64\n[nikolskij]\nj_max = 3\n"
    )
    cfg = load_config(str(path))
    assert cfg.kind == "nikolskij"
    assert (cfg.trials, cfg.seed, cfg.size) == (3, 99, 64)
    assert cfg.nikolskij["j_max"] == 3
    # untouched tables keep their defaults
    assert cfg.space["q"] == 2.0

    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.toml"))
    bad = tmp_path / "bad.toml"
    bad.write_text("[grid\nsize = 64")
    with pytest.raises(ConfigError, match="not valid TOML"):
        load_config(str(bad))


def test_with_overrides():
    cfg = config_from_dict({})
    out = with_overrides(cfg, seed=7, size=64, dim=2)
    assert (out.seed, out.size, out.dim) == (7, 64, 2)
    # the original is untouched
    assert (cfg.seed, cfg.size, cfg.dim) == (12345, 128, 1)
    with pytest.raises(ConfigError):
        with_overrides(cfg, size=48)


LEIBNIZ_TINY = {
    "experiment": {"kind": "leibniz", "trials": 3, "seed": 5},
    "grid": {"size": 64},
    "data": {"band_lo": 1.0, "band_hi": 2.0},
    "dilation": {"k_min": -1, "k_max": 1},
}


def test_leibniz_report_schema():
    rep = run_leibniz(config_from_dict(LEIBNIZ_TINY))
    assert rep["kind"] == "leibniz"
    assert set(rep) >= {"config", "environment", "meta", "rows", "summary", "thresholds", "passed"}
    assert len(rep["rows"]) == 9
    for row in rep["rows"]:
        assert set(row) == {"trial", "dilation", "lhs", "rhs1", "rhs2", "ratio"}
        assert row["ratio"] > 0 and math.isfinite(row["ratio"])
    summary = rep["summary"]
    assert summary["count"] == 9
    assert summary["skipped"] == 0
    assert sorted(summary["per_dilation_max"]) == ["-1", "0", "1"]
    th = rep["thresholds"]
    assert set(th) >= {"s", "smoothness_threshold", "above_threshold",
                       "derivative_budget", "symbol_order"}
    assert th["s"] == 1.0 and th["smoothness_threshold"] == 0.0
    assert th["above_threshold"] is True
    assert rep["passed"] is True


def test_leibniz_skips_overflowing_dilations():
    data = dict(LEIBNIZ_TINY)
    data["grid"] = {"size": 32}
    data["data"] = {"band_lo": 1.0, "band_hi": 4.0}
    data["dilation"] = {"k_min": 0, "k_max": 2}
    data["nikolskij"] = {"j_max": 3}
    # realized bands are [1,4], [2,8], [4,16]; the last exceeds band_limit 8
    rep = run_leibniz(config_from_dict(data))
    assert rep["summary"]["skipped"] == 3
    assert len(rep["rows"]) == 6


def test_report_determinism():
    cfg = config_from_dict(LEIBNIZ_TINY)
    a = report_bytes(run_leibniz(cfg))
    b = report_bytes(run_leibniz(cfg))
    assert a == b
    other = config_from_dict({**LEIBNIZ_TINY, "experiment": {"kind": "leibniz", "trials": 3, "seed": 6}})
    assert report_bytes(run_leibniz(other)) != a


def test_nikolskij_report():
    cfg = config_from_dict(
        {
            "experiment": {"kind": "nikolskij", "trials": 2, "seed": 11},
            "grid": {"size": 64},
            "nikolskij": {"j_max": 3},
        }
    )
    rep = run_nikolskij(cfg)
    assert rep["kind"] == "nikolskij"
    assert len(rep["rows"]) == 2
    for row in rep["rows"]:
        assert set(row) == {"trial", "lhs", "rhs", "ratio", "hypothesis_ok"}
        assert row["hypothesis_ok"] is True
        assert 0 < row["ratio"] < 10
    assert rep["thresholds"]["above_threshold"] is True
    assert rep["passed"] is True


def test_scattering_report():
    cfg = config_from_dict(
        {
            "experiment": {"kind": "scattering", "trials": 1, "seed": 3},
            "grid": {"size": 32},
            "data": {"band_lo": 1.0, "band_hi": 2.0},
            "nikolskij": {"j_max": 3},
            "scattering": {"times": [0.5, 1.0]},
        }
    )
    rep = run_scattering(cfg)
    row = rep["rows"][0]
    assert row["lambda_min"] == 2.0
    assert row["monotone"] is True
    assert row["quad_rel_error"] < 1e-5
    assert row["cone_ok"] is None
    assert rep["sample_decay"]["times"] == [0.5, 1.0]
    assert rep["thresholds"]["flags"]["gamma_even"] is True
    assert rep["summary"]["all_monotone"] is True
    assert rep["passed"] is True


def test_lemma_suite_report():
    cfg = config_from_dict(
        {
            "experiment": {"kind": "lemma_suite", "seed": 8},
            "grid": {"size": 64},
            "lemmas": {"scales": [1, 2, 3], "series_trials": 30},
        }
    )
    rep = run_lemma_suite(cfg)
    assert set(rep["sections"]) == {"peetre_pointwise", "convolution", "series", "fefferman_stein"}
    assert [r["j"] for r in rep["sections"]["peetre_pointwise"]] == [1, 2, 3]
    assert rep["sections"]["series"]["worst_margin"] <= 1.0 + 1e-9
    assert rep["sections"]["fefferman_stein"]["hypothesis_ok"] is True
    assert rep["failures"] == []
    assert rep["passed"] is True


def test_norm_bench_report():
    cfg = config_from_dict(
        {
            "experiment": {"kind": "norm_bench", "trials": 2, "seed": 4},
            "grid": {"size": 64},
            "data": {"band_lo": 1.0, "band_hi": 4.0},
        }
    )
    rep = run_norm_bench(cfg)
    labels = {r["norm"] for r in rep["rows"]}
    assert len(rep["rows"]) == 2 * len(labels)
    assert {"lebesgue", "lorentz", "morrey", "variable", "tl_hom", "besov_hom",
            "hardy_square", "sobolev"} <= labels
    assert rep["summary"]["all_finite"] is True
    assert rep["passed"] is True


def test_apply_and_coeffs_commands():
    cfg = config_from_dict(
        {
            "experiment": {"trials": 1, "seed": 6},
            "grid": {"size": 32},
            "data": {"band_lo": 1.0, "band_hi": 2.0},
            "nikolskij": {"j_max": 3},
        }
    )
    rep, out = apply_command(cfg)
    assert rep["kind"] == "apply"
    # the exact product lives on the doubled grid
    assert out.grid.size == 64
    assert rep["rows"][0]["modes"] > 0
    assert rep["passed"] is True

    cfg2 = config_from_dict(
        {
            "experiment": {"kind": "leibniz_cm"},
            "grid": {"size": 64},
            "symbol": {"name": "inverse_gamma", "gamma": 2.0, "a_max": 2, "levels": [0, 1]},
        }
    )
    rep2, exp = coeffs_command(cfg2)
    assert rep2["kind"] == "coeff_tables"
    assert rep2["symbol"] == "inverse_gamma"
    assert [r["j"] for r in rep2["rows"]] == [0, 1]
    assert rep2["quad_points"] > 0
    assert rep2["passed"] is True


def test_sanitize_and_report_bytes():
    raw = {
        "a": np.float64(1.5),
        "b": np.int32(3),
        "c": np.bool_(True),
        "d": np.array([1.0, 2.0]),
        "e": [(np.float64(0.5),)],
        "meta": {"timestamp": "now", "keep": 1},
    }
    clean = sanitize(raw)
    assert clean == {"a": 1.5, "b": 3, "c": True, "d": [1.0, 2.0], "e": [[0.5]],
                     "meta": {"timestamp": "now", "keep": 1}}
    decoded = json.loads(report_bytes(raw))
    assert "timestamp" not in decoded["meta"]
    assert json.loads(report_bytes(raw, strip_timestamp=False))["meta"]["timestamp"] == "now"


def test_write_report_files(tmp_path):
    rep = run_leibniz(config_from_dict(LEIBNIZ_TINY))
    paths = write_report(rep, str(tmp_path), fmt="both", figures=True)
    assert Path(paths["json"]).name == "leibniz.json"
    assert Path(paths["csv"]).name == "leibniz.csv"
    assert all(Path(p).exists() for p in paths.values() if isinstance(p, str))
    assert paths["figures"] and all(Path(p).exists() for p in paths["figures"])
    assert Path(paths["figures"][0]).name == "leibniz_ratios.png"
    loaded = json.loads(Path(paths["json"]).read_text())
    assert loaded["kind"] == "leibniz"
    header = Path(paths["csv"]).read_text().splitlines()[0]
    assert "ratio" in header and "dilation" in header

    bare = write_report(rep, str(tmp_path / "bare"), fmt="json", figures=False)
    assert set(bare) == {"json"}


def _write_quick_toml(path: Path) -> Path:
    path.write_text(
        "[experiment]\nkind = 'leibniz'\ntrials = 2\nseed = 17\n"
        "[grid]\nsize = 32\n"
        "[data]\nband_lo = 1.0\nband_hi = 2.0\n"
        "[nikolskij]\nj_max = 3\n"
    )
    return path


def test_cli_success(tmp_path, capsys):
    cfg = _write_quick_toml(tmp_path / "quick.toml")
    out = tmp_path / "out"
    code = main(["verify-leibniz", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert text.startswith("PASS leibniz")
    assert "max_ratio=" in text
    assert (out / "leibniz.json").exists()
    assert (out / "leibniz.csv").exists()
    assert (out / "leibniz_ratios.png").exists()


def test_cli_overrides_and_no_figures(tmp_path):
    cfg = _write_quick_toml(tmp_path / "quick.toml")
    out = tmp_path / "out"
    code = main(["verify-leibniz", "--config", str(cfg), "--out", str(out),
                 "--seed", "23", "--grid", "64", "--format", "json", "--no-figures"])
    assert code == 0
    rep = json.loads((out / "leibniz.json").read_text())
    assert rep["config"]["seed"] == 23
    assert rep["config"]["size"] == 64
    assert not (out / "leibniz.csv").exists()
    assert not list(out.glob("*.png"))


def test_cli_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[grid]\nsize = 48\n")
    assert main(["verify-leibniz", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["norm", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) == 2


def test_cli_command_sets_kind(tmp_path):
    # a config written for one campaign can drive another subcommand
    cfg = tmp_path / "n.toml"
    cfg.write_text(
        "[experiment]\nkind = 'scattering'\ntrials = 1\nseed = 2\n"
        "[grid]\nsize = 32\n[data]\nband_lo = 1.0\nband_hi = 2.0\n"
        "[nikolskij]\nj_max = 3\n"
    )
    out = tmp_path / "out"
    code = main(["norm", "--config", str(cfg), "--out", str(out), "--no-figures"])
    assert code == 0
    rep = json.loads((out / "norm_bench.json").read_text())
    assert rep["kind"] == "norm_bench"


def test_cli_apply_roundtrip(tmp_path):
    cfg = _write_quick_toml(tmp_path / "quick.toml")
    out = tmp_path / "out"
    assert main(["apply", "--config", str(cfg), "--out", str(out)]) == 0
    result = out / "apply_result.json"
    fld = field_from_json(json.loads(result.read_text()))
    assert fld.grid.size == 64
    assert (out / "apply_field.png").exists()
    # feed the produced field back as the first input
    out2 = tmp_path / "out2"
    assert main(["apply", "--config", str(cfg), "--field", str(result),
                 "--out", str(out2), "--no-figures"]) == 0
    rep = json.loads((out2 / "apply.json").read_text())
    assert rep["kind"] == "apply"


def test_cli_coeffs(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        "[experiment]\nkind = 'leibniz_cm'\n"
        "[grid]\nsize = 64\n"
        "[symbol]\nname = 'inverse_gamma'\ngamma = 2.0\na_max = 2\nlevels = [0, 1]\n"
    )
    out = tmp_path / "out"
    assert main(["coeffs", "--config", str(cfg), "--out", str(out), "--format", "json"]) == 0
    rep = json.loads((out / "coeffs.json").read_text())
    assert rep["kind"] == "coeff_tables"
    assert (out / "coeffs_coeffs.png").exists()
