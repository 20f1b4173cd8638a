"""Scenario files: JSON with unit-suffixed keys, converted to SI / rad/s once here.

Frequencies at the boundary are f/2pi in Hz (suffix ``_over_2pi_hz``),
lengths in metres (``_m``), temperatures in kelvin (``_k``).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import ParameterError, SchemaError, UnitError
from .params import TWO_PI, DressingParams, StandingWave

HZ = "_over_2pi_hz"

# name -> (internal field, scale to internal units, required, constraint)
PARAM_KEYS = {
    "omega1_over_2pi_hz": ("omega1", TWO_PI, True, ">=0"),
    "omega2c_over_2pi_hz": ("omega2c", TWO_PI, True, ">0"),
    "omega2sw_over_2pi_hz": ("omega2sw", TWO_PI, True, ">=0"),
    "delta_over_2pi_hz": ("delta", TWO_PI, True, "!=0"),
    "gamma_p_over_2pi_hz": ("gamma_p", TWO_PI, True, ">0"),
    "gamma_e_over_2pi_hz": ("gamma_e", TWO_PI, True, ">=0"),
    "wavelength_m": ("wavelength", 1.0, True, ">0"),
    "theta_rad": ("theta", 1.0, False, ">0"),
    "c6_over_2pi_hz_m6": ("c6", TWO_PI, False, ">0"),
    "mass_kg": ("mass", 1.0, False, ">0"),
    "v_max_factor": ("v_max_factor", 1.0, False, ">0"),
    "perturbative_threshold": ("perturbative_threshold", 1.0, False, ">0"),
}

# Bare or wrongly suffixed spellings that should get a unit hint rather than "unknown key"
_UNIT_HINTS = {
    base: key
    for key, (base, *_rest) in PARAM_KEYS.items()
    if key != base
}

TASK_DEFAULTS = {
    "potential-scan": {
        "omega2_min_over_abs_delta": 1.2,
        "omega2_max_over_abs_delta": 3.0,
        "n_intensity": 500,
        "x_half_width_m": None,
        "n_position": 201,
    },
    "lorentzian-fit": {"x_half_width_m": None, "n_position": 81},
    "spectrum": {
        "omega2_x1_over_2pi_hz": None,
        "omega2_min_over_abs_delta": 1.0,
        "omega2_max_over_abs_delta": 3.0,
        "n": 201,
    },
    "ground-state": {
        "surface": "numeric",
        "x_min_m": None,
        "x_max_m": None,
        "n": 128,
        "dt_fraction": 0.9,
        "tol_over_2pi_hz": 1e-3,
        "g_nl": 0.0,
        "max_iters": 200000,
        "mode_guess_m": None,
    },
    "loss-budget": {"gamma_target_hz": 1.0, "omega2c_over_2pi_hz": None},
    "bbr": {"temperatures_k": [300, 77, 3], "n_sites": 1, "p_r": None, "threshold": 0.82},
    "blockade": {
        "manifold_path": None,
        "n_states": 3800,
        "detuning_scale_over_2pi_hz": 1e9,
        "coupling_scale_over_2pi_hz_m3": 3e-9,
        "sparsity": 0.99,
        "r_min_m": 1.59e-7,
        "r_max_m": 1e-4,
        "n_r": 30,
        "convention": "printed",
        "n_samples": 2000,
        "periods": 10.0,
    },
    "resonance-map": {"x_min_m": None, "x_max_m": None, "n": 512, "dimensionality": 1},
}

TOP_KEYS = {"params", "tasks", "seed", "output_dir", "notes"}


@dataclass
class Scenario:
    params: DressingParams
    standing_wave: StandingWave
    tasks: dict
    seed: int = 0
    output_dir: str = "out"
    raw: dict = field(default_factory=dict)

    def task(self, name: str) -> dict:
        return self.tasks[name]


def _number(field_name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(field_name, f"expected a number, got {type(v).__name__}")
    return float(v)


def _check(field_name, v, rule):
    ok = {">0": v > 0, ">=0": v >= 0, "!=0": v != 0}[rule]
    if not ok:
        raise SchemaError(field_name, f"must be {rule.replace('!=', '!= ').replace('>=', '>= ').replace('>', '> ')}, got {v}")


def parse_params(block: dict) -> DressingParams:
    if not isinstance(block, dict):
        raise SchemaError("params", "expected an object")
    kwargs = {}
    for key, val in block.items():
        if key not in PARAM_KEYS:
            if key in _UNIT_HINTS:
                raise UnitError(f"params.{key}", f"missing unit suffix, use {_UNIT_HINTS[key]!r}")
            for base, known in _UNIT_HINTS.items():
                if key.startswith(base + "_") and not known.startswith(key):
                    raise UnitError(f"params.{key}", f"unsupported unit, use {known!r}")
            raise SchemaError(f"params.{key}", "unknown key")
        name, scale, _, rule = PARAM_KEYS[key]
        if val is None and not PARAM_KEYS[key][2]:
            continue
        v = _number(f"params.{key}", val)
        _check(f"params.{key}", v, rule)
        kwargs[name] = v * scale
    for key, (name, _, required, _) in PARAM_KEYS.items():
        if required and name not in kwargs:
            raise SchemaError(f"params.{key}", "required")
    try:
        return DressingParams(**kwargs)
    except ParameterError as exc:
        raise SchemaError("params", str(exc)) from None


def _parse_task(name: str, block) -> dict:
    defaults = TASK_DEFAULTS[name]
    if block is None:
        block = {}
    if not isinstance(block, dict):
        raise SchemaError(f"tasks.{name}", "expected an object")
    out = copy.deepcopy(defaults)
    for key, val in block.items():
        if key not in defaults:
            raise SchemaError(f"tasks.{name}.{key}", "unknown key")
        out[key] = val
    return out


def parse_config_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "expected a JSON object")
    for key in doc:
        if key not in TOP_KEYS:
            raise SchemaError(key, "unknown key")
    if "params" not in doc:
        raise SchemaError("params", "required")
    params = parse_params(doc["params"])
    tasks_in = doc.get("tasks", {}) or {}
    if not isinstance(tasks_in, dict):
        raise SchemaError("tasks", "expected an object")
    for key in tasks_in:
        if key not in TASK_DEFAULTS:
            raise SchemaError(f"tasks.{key}", "unknown task")
    tasks = {name: _parse_task(name, tasks_in.get(name)) for name in TASK_DEFAULTS}
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise SchemaError("seed", "expected a non-negative integer")
    out_dir = doc.get("output_dir", "out")
    if not isinstance(out_dir, str):
        raise SchemaError("output_dir", "expected a string")
    return Scenario(params, params.standing_wave(), tasks, seed, out_dir, copy.deepcopy(doc))


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"invalid JSON: {exc}") from None


def parse_config(path) -> Scenario:
    return parse_config_dict(load_json(path))


def params_to_config(p: DressingParams) -> dict:
    """Inverse of :func:`parse_params` in boundary units."""
    out = {}
    for key, (name, scale, required, _) in PARAM_KEYS.items():
        v = getattr(p, name)
        if v is None:
            continue
        out[key] = v / scale
    return out


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``key.path=value`` strings; values are parsed as JSON when possible."""
    doc = copy.deepcopy(doc)
    for item in overrides or []:
        if "=" not in item:
            raise SchemaError(item, "override must look like dotted.key=value")
        path, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        keys = path.strip().split(".")
        node = doc
        for k in keys[:-1]:
            nxt = node.setdefault(k, {})
            if not isinstance(nxt, dict):
                raise SchemaError(path, f"{k!r} is not an object")
            node = nxt
        node[keys[-1]] = value
    return doc


def default_config() -> dict:
    """The shipped reference scenario (see its ``notes`` block)."""
    text = resources.files("rydlat").joinpath("data/reference.json").read_text(encoding="utf-8")
    return json.loads(text)
