"""Experiment configuration: TOML parsing, validation, defaults.

A config file is a handful of tables (experiment, grid, data, dilation,
symbol, space, weights, nikolskij, scattering, lemmas, output); every
field has a default, so the empty document is a valid smoke-test run.
Validation failures raise ConfigError, which the CLI maps to exit
code 2 so they are distinguishable from measured-assertion failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _toml

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "config_from_dict",
    "validate_config",
    "with_overrides",
]

KINDS = (
    "leibniz",
    "leibniz_cm",
    "hardy_leibniz",
    "nikolskij",
    "scattering",
    "lemma_suite",
    "norm_bench",
)

_LEIBNIZ_KINDS = ("leibniz", "leibniz_cm", "hardy_leibniz")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "leibniz"
    trials: int = 20
    seed: int = 12345
    dim: int = 1
    size: int = 128
    band_lo: float = 1.0
    band_hi: float = 8.0
    k_min: int = 0
    k_max: int = 0
    symbol: dict = field(default_factory=dict)
    space: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    nikolskij: dict = field(default_factory=dict)
    scattering: dict = field(default_factory=dict)
    lemmas: dict = field(default_factory=dict)
    figures: bool = True


_SPACE_DEFAULTS = {
    "family": "tl",
    "base": "lebesgue",
    "p": 2.0,
    "q": 2.0,
    "s": 1.0,
    "t": None,
    "p1": 4.0,
    "p2": 4.0,
    "homogeneous": True,
    "variable_amplitude": 0.5,
    "form": "symmetric",
}

_WEIGHT_DEFAULTS = {"kind": "constant", "a1": 0.5, "a2": 0.5}

_SYMBOL_DEFAULTS = {
    "name": "one",
    "gamma": 2.0,
    "t": 1.0,
    "delta": 0.5,
    "a_max": 8,
    "weight_exponent": 0,  # 0 = dim + 1
    "levels": [],          # empty = full scale range of the grid
    "period": 5.0,
    "margin": 0.1,
}

_NIKOLSKIJ_DEFAULTS = {
    "D": 1.0,
    "j_min": 0,
    "j_max": 4,
    "profile": "random",
    "family": "tl",
}

_SCATTERING_DEFAULTS = {
    "kind": "homogeneous",
    "gamma": 2.0,
    "times": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
    "cone": False,
    "delta": 0.5,
    "quad_tol": 1e-8,
}

_LEMMA_DEFAULTS = {"scales": [1, 2, 3, 4], "series_trials": 200, "series_seed": 7}


def _merged(defaults: dict, given: dict, label: str) -> dict:
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown {label} option(s): {sorted(unknown)}")
    out = dict(defaults)
    out.update(given)
    return out


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Assemble and validate a config from a parsed TOML document."""
    known = {
        "experiment", "grid", "data", "dilation", "symbol", "space",
        "weights", "nikolskij", "scattering", "lemmas", "output",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config table(s): {sorted(unknown)}")

    exp = data.get("experiment", {})
    grid = data.get("grid", {})
    band = data.get("data", {})
    dil = data.get("dilation", {})
    out = data.get("output", {})

    cfg = ExperimentConfig(
        kind=str(exp.get("kind", "leibniz")),
        trials=int(exp.get("trials", 20)),
        seed=int(exp.get("seed", 12345)),
        dim=int(grid.get("dim", 1)),
        size=int(grid.get("size", 128)),
        band_lo=float(band.get("band_lo", 1.0)),
        band_hi=float(band.get("band_hi", 8.0)),
        k_min=int(dil.get("k_min", 0)),
        k_max=int(dil.get("k_max", 0)),
        symbol=_merged(_SYMBOL_DEFAULTS, data.get("symbol", {}), "symbol"),
        space=_merged(_SPACE_DEFAULTS, data.get("space", {}), "space"),
        weights=_merged(_WEIGHT_DEFAULTS, data.get("weights", {}), "weights"),
        nikolskij=_merged(_NIKOLSKIJ_DEFAULTS, data.get("nikolskij", {}), "nikolskij"),
        scattering=_merged(_SCATTERING_DEFAULTS, data.get("scattering", {}), "scattering"),
        lemmas=_merged(_LEMMA_DEFAULTS, data.get("lemmas", {}), "lemmas"),
        figures=bool(out.get("figures", True)),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    _require(cfg.kind in KINDS, f"unknown experiment kind {cfg.kind!r}; choose from {KINDS}")
    _require(cfg.trials >= 0, "trials must be non-negative")
    _require(cfg.seed >= 0, "seed must be non-negative")
    _require(cfg.dim in (1, 2), "grid dim must be 1 or 2")
    _require(
        cfg.size >= 16 and (cfg.size & (cfg.size - 1)) == 0,
        f"grid size must be a power of two >= 16, got {cfg.size}",
    )
    _require(0 < cfg.band_lo <= cfg.band_hi, "need 0 < band_lo <= band_hi")
    _require(
        cfg.band_hi <= cfg.size // 2 - 1,
        f"band_hi {cfg.band_hi} exceeds the representable band of size {cfg.size}",
    )
    _require(cfg.k_min <= cfg.k_max, "dilation range must satisfy k_min <= k_max")

    sp = cfg.space
    _require(sp["family"] in ("tl", "besov"), "space family must be 'tl' or 'besov'")
    _require(
        sp["base"] in ("lebesgue", "lorentz", "morrey", "variable"),
        "space base must be lebesgue/lorentz/morrey/variable",
    )
    for key in ("p", "q", "p1", "p2"):
        _require(float(sp[key]) > 0, f"space {key} must be positive")
    if sp["base"] in ("lorentz", "morrey"):
        _require(sp["t"] is not None and float(sp["t"]) > 0,
                 f"{sp['base']} base needs a positive secondary index t")
        if sp["base"] == "morrey":
            _require(float(sp["p"]) <= float(sp["t"]), "morrey base needs p <= t")
    if sp["base"] == "variable":
        amp = float(sp["variable_amplitude"])
        _require(float(sp["p"]) - abs(amp) >= 1.0,
                 "variable exponent must stay >= 1: need p - |amplitude| >= 1")
        _require(cfg.weights["kind"] == "constant",
                 "variable-exponent base does not take a weight")
    _require(sp["form"] in ("symmetric", "linf"), "space form must be 'symmetric' or 'linf'")

    if cfg.kind in _LEIBNIZ_KINDS:
        p, p1, p2 = float(sp["p"]), float(sp["p1"]), float(sp["p2"])
        defect = abs(1.0 / p - 1.0 / p1 - 1.0 / p2)
        _require(
            defect <= 1e-9,
            "integrability split violates 1/p = 1/p1 + 1/p2: "
            f"1/{p} != 1/{p1} + 1/{p2} (defect {defect:.2e}); "
            "adjust p, p1, p2 so the identity holds",
        )

    wt = cfg.weights
    _require(wt["kind"] in ("constant", "power"), "weights kind must be 'constant' or 'power'")
    if wt["kind"] == "power":
        for key in ("a1", "a2"):
            _require(float(wt[key]) > -cfg.dim,
                     f"power weight exponent {key} must exceed -dim for local integrability")

    if cfg.kind == "leibniz_cm":
        _require(cfg.symbol["name"] != "", "leibniz_cm needs a symbol name")
        if cfg.symbol["name"] not in ("one",):
            _require(float(cfg.symbol["gamma"]) > 0, "symbol gamma must be positive")

    nk = cfg.nikolskij
    _require(float(nk["D"]) > 0, "nikolskij D must be positive")
    _require(0 <= int(nk["j_min"]) <= int(nk["j_max"]), "nikolskij scale range is empty")
    _require(
        float(nk["D"]) * 2 ** int(nk["j_max"]) <= cfg.size / 2 - 1,
        "nikolskij ball D*2^j_max does not fit in the grid band",
    )
    _require(nk["profile"] in ("random", "concentrated"),
             "nikolskij profile must be 'random' or 'concentrated'")
    _require(nk["family"] in ("tl", "besov"), "nikolskij family must be 'tl' or 'besov'")

    sc = cfg.scattering
    _require(sc["kind"] in ("homogeneous", "inhomogeneous"),
             "scattering kind must be 'homogeneous' or 'inhomogeneous'")
    _require(float(sc["gamma"]) > 0, "scattering gamma must be positive")
    times = [float(t) for t in sc["times"]]
    _require(len(times) >= 2, "scattering needs at least two times")
    _require(all(t > 0 for t in times), "scattering times must be positive")
    _require(all(b > a for a, b in zip(times, times[1:])),
             "scattering times must be strictly increasing")
    if sc["cone"]:
        _require(0 < float(sc["delta"]) < 1, "cone delta must lie in (0, 1)")

    lm = cfg.lemmas
    _require(all(int(s) >= 0 for s in lm["scales"]), "lemma scales must be non-negative")
    _require(int(lm["series_trials"]) >= 0, "series_trials must be non-negative")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
    return config_from_dict(data)


def with_overrides(
    cfg: ExperimentConfig,
    seed: int | None = None,
    size: int | None = None,
    dim: int | None = None,
) -> ExperimentConfig:
    """Apply CLI-level overrides and re-validate."""
    out = cfg
    if seed is not None:
        out = replace(out, seed=int(seed))
    if size is not None:
        out = replace(out, size=int(size))
    if dim is not None:
        out = replace(out, dim=int(dim))
    validate_config(out)
    return out
