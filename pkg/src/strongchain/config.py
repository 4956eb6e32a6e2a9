"""JSON run configuration for the command-line front end."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .exceptions import ChainError
from .model import ChainParams

DEFAULT_OUT_DIR = "chain_out"


class ConfigError(ChainError, ValueError):
    pass


BLOCK_KEYS = {
    "solver": {"tol_position", "residual_tol"},
    "simulation": {"t_end", "sample_dt", "dt", "init", "tol_rho"},
    "sweep": {"n_list"},
    "verify": {"suites", "theorem1_n_list", "theorem2_n_list", "oracle_n", "continuum_y", "seed"},
    "degenerate": {"y", "samples", "table_points", "tol"},
}
PARAM_KEYS = {"n_particles", "length", "mass", "damping", "pair_law", "field"}
INIT_KINDS = {"equispaced", "random", "fixed_point", "positions"}
SUITES = ("theorem1", "theorem2", "lemma2", "continuum", "oracle")

DEFAULTS = {
    "solver": {"tol_position": None, "residual_tol": None},
    "simulation": {"t_end": 50.0, "sample_dt": 0.1, "dt": None, "init": {"kind": "random", "seed": 0}, "tol_rho": 1e-4},
    "sweep": {"n_list": [50, 100, 200, 400, 800]},
    "verify": {
        "suites": list(SUITES),
        "theorem1_n_list": [50, 200, 800],
        "theorem2_n_list": [100, 200, 400],
        "oracle_n": 6,
        "continuum_y": 0.25,
        "seed": 0,
    },
    "degenerate": {"y": 0.25, "samples": 33, "table_points": 4096, "tol": 1e-6},
}


@dataclass
class RunConfig:
    params: ChainParams
    solver: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    degenerate: dict = field(default_factory=dict)
    output_dir: str = DEFAULT_OUT_DIR


def _positive(block, name, value, allow_none=False):
    if value is None and allow_none:
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{block}.{name} must be a positive number, got {value!r}")


def _merge_block(name, given):
    if not isinstance(given, dict):
        raise ConfigError(f"{name} must be an object")
    unknown = set(given) - BLOCK_KEYS[name]
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    merged = dict(DEFAULTS[name])
    merged.update(given)
    return merged


def parse_config(doc, overrides=None):
    """Validate a config document (already decoded from JSON) and apply CLI overrides."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    doc = dict(doc)
    overrides = overrides or {}
    unknown = set(doc) - PARAM_KEYS - set(BLOCK_KEYS) - {"output_dir"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")

    pdoc = {k: doc[k] for k in PARAM_KEYS if k in doc}
    pdoc.setdefault("n_particles", 50)
    pdoc.setdefault("pair_law", {"kind": "power", "alpha": 1.0, "a": 2.0})
    pdoc.setdefault("field", {"kind": "constant", "value": 0.0})
    if overrides.get("n") is not None:
        pdoc["n_particles"] = overrides["n"]
    if overrides.get("a") is not None:
        law = dict(pdoc["pair_law"])
        if law.get("kind") != "power":
            raise ConfigError("--a only applies to a power-law pair_law")
        law["a"] = overrides["a"]
        pdoc["pair_law"] = law
    if overrides.get("force_const") is not None:
        pdoc["field"] = {"kind": "constant", "value": overrides["force_const"]}
    try:
        params = ChainParams.from_dict(pdoc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid chain parameters: {exc}") from exc

    blocks = {name: _merge_block(name, doc.get(name, {})) for name in BLOCK_KEYS}
    _positive("solver", "tol_position", blocks["solver"]["tol_position"], allow_none=True)
    _positive("solver", "residual_tol", blocks["solver"]["residual_tol"], allow_none=True)
    sim = blocks["simulation"]
    for key in ("t_end", "sample_dt", "tol_rho"):
        _positive("simulation", key, sim[key])
    _positive("simulation", "dt", sim["dt"], allow_none=True)
    init = sim["init"]
    if not isinstance(init, dict) or init.get("kind") not in INIT_KINDS:
        raise ConfigError(f"simulation.init.kind must be one of {sorted(INIT_KINDS)}")
    extra = set(init) - {"kind", "seed", "positions", "velocities", "max_speed"}
    if extra:
        raise ConfigError(f"unknown keys in simulation.init: {sorted(extra)}")
    if init["kind"] == "positions" and "positions" not in init:
        raise ConfigError("simulation.init.positions is required for kind 'positions'")
    n_list = blocks["sweep"]["n_list"]
    if not isinstance(n_list, list) or not n_list or any(not isinstance(n, int) or n < 2 for n in n_list):
        raise ConfigError("sweep.n_list must be a non-empty list of integers >= 2")
    ver = blocks["verify"]
    bad = [s for s in ver["suites"] if s not in SUITES]
    if bad:
        raise ConfigError(f"unknown verify suites {bad}; choose from {list(SUITES)}")
    deg = blocks["degenerate"]
    if not (isinstance(deg["y"], (int, float)) and 0 < deg["y"] < 0.5):
        raise ConfigError("degenerate.y must lie in (0, 0.5)")
    for key in ("samples", "table_points"):
        if not isinstance(deg[key], int) or deg[key] < 2:
            raise ConfigError(f"degenerate.{key} must be an integer >= 2")

    out = overrides.get("out_dir") or doc.get("output_dir") or os.environ.get("CHAIN_OUT_DIR") or DEFAULT_OUT_DIR
    return RunConfig(params, blocks["solver"], sim, blocks["sweep"], ver, deg, str(out))


def load_config(path, overrides=None):
    if path is None:
        return parse_config({}, overrides)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(doc, overrides)
