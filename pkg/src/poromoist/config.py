"""Strict JSON configuration loading.

A run is described by one JSON document with sections for the physics,
the saturation model, the regularization, the stepping, the grid, the
initial profiles, and the output cadence, plus optional study sections
(mms, ladder, sweep).  Validation is two-stage: a JSON schema rejects
unknown keys and out-of-range scalars, then cross-field checks catch the
couplings a schema cannot express (nu against eps, step counts dividing
the horizon, profiles dipping below their floors).  All violations are
collected into a single ValidationError instead of stopping at the first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from .discretization import Grid
from .errors import ConfigError, ParseError, ValidationError
from .model import (
    ExponentialSaturation,
    InitialData,
    PhysicalParams,
    PowerLawSaturation,
    SaturationModel,
)
from .stepper import RegularizationParams, StepConfig

__all__ = [
    "CONFIG_SCHEMA",
    "load_config",
    "validate_config",
    "apply_override",
    "Setup",
    "build_setup",
]

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_UNIT = {"type": "number", "minimum": 0, "maximum": 1}

_PROFILE_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"profile": {"const": "constant"}, "value": {"type": "number"}},
            "required": ["profile", "value"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "profile": {"const": "bump"},
                "base": {"type": "number"},
                "amplitude": {"type": "number"},
                "center": _UNIT,
                "width": _POSITIVE,
            },
            "required": ["profile", "base", "amplitude", "center", "width"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "profile": {"const": "step"},
                "left": {"type": "number"},
                "right": {"type": "number"},
                "at": _UNIT,
            },
            "required": ["profile", "left", "right", "at"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "profile": {"const": "inline"},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 4},
            },
            "required": ["profile", "values"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "physical": {
            "type": "object",
            "properties": {
                "sigma": _POSITIVE, "lambda": _POSITIVE,
                "kappa1": _POSITIVE, "kappa2": _POSITIVE,
                "alpha0": _POSITIVE, "alpha1": _POSITIVE,
                "beta0": _POSITIVE, "beta1": _POSITIVE,
                "rho_bar0": _POSITIVE, "rho_bar1": _POSITIVE,
                "theta_bar0": _POSITIVE, "theta_bar1": _POSITIVE,
                "t_end": _POSITIVE,
            },
            "required": ["sigma", "lambda", "kappa1", "kappa2", "alpha0", "alpha1",
                         "beta0", "beta1", "rho_bar0", "rho_bar1", "theta_bar0",
                         "theta_bar1", "t_end"],
            "additionalProperties": False,
        },
        "saturation": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "kind": {"const": "power_law"},
                        "c": _POSITIVE, "q": _POSITIVE, "eta": _POSITIVE,
                    },
                    "required": ["kind", "c", "q"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "kind": {"const": "exponential"},
                        "a": _POSITIVE, "b": _POSITIVE, "eta": _POSITIVE,
                    },
                    "required": ["kind", "a", "b"],
                    "additionalProperties": False,
                },
            ]
        },
        "regularization": {
            "type": "object",
            "properties": {"eps": _POSITIVE, "nu": _POSITIVE, "s": _UNIT},
            "required": ["eps", "nu"],
            "additionalProperties": False,
        },
        "stepping": {
            "type": "object",
            "properties": {
                "dt": _POSITIVE,
                "picard_tol": _POSITIVE,
                "max_picard": {"type": "integer", "minimum": 1},
                "s_ramp_steps": {"type": "integer", "minimum": 1},
                "advection": {"enum": ["upwind", "central"]},
            },
            "required": ["dt"],
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {"n": {"type": "integer", "minimum": 4}},
            "required": ["n"],
            "additionalProperties": False,
        },
        "initial": {
            "type": "object",
            "properties": {
                "rho": _PROFILE_SCHEMA,
                "theta": _PROFILE_SCHEMA,
                "theta_floor": _POSITIVE,
            },
            "required": ["rho", "theta", "theta_floor"],
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"cadence": _POSITIVE},
            "required": ["cadence"],
            "additionalProperties": False,
        },
        "mms": {
            "type": "object",
            "properties": {
                "grid_sizes": {"type": "array", "items": {"type": "integer", "minimum": 4},
                               "minItems": 2},
                "t_end": _POSITIVE,
                "steps_coarse": {"type": "integer", "minimum": 1},
                "advection": {"enum": ["upwind", "central"]},
                "eps": _POSITIVE,
                "nu": _POSITIVE,
            },
            "additionalProperties": False,
        },
        "ladder": {
            "type": "object",
            "properties": {
                "eps0": _POSITIVE,
                "rungs": {"type": "integer", "minimum": 1},
                "factor": {"type": "number", "exclusiveMinimum": 1},
                "nu_ratio": {"type": "number", "exclusiveMinimum": 0,
                             "exclusiveMaximum": 1},
                "t_end": _POSITIVE,
                "inject_non_monotone": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "axes": {
                    "type": "object",
                    "minProperties": 1,
                    "additionalProperties": {"type": "array", "minItems": 1},
                },
            },
            "required": ["axes"],
            "additionalProperties": False,
        },
    },
    "required": ["physical", "saturation", "regularization", "stepping", "grid",
                 "initial"],
    "additionalProperties": False,
}

_VALIDATOR = Draft202012Validator(CONFIG_SCHEMA)


def _error_path(err) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def _is_multiple(span: float, step: float) -> bool:
    count = span / step
    return abs(count - round(count)) <= 1e-9 * max(1.0, abs(count))


def _profile_values(spec: dict, grid: Grid) -> np.ndarray:
    x = grid.centers
    kind = spec["profile"]
    if kind == "constant":
        return np.full(grid.n, float(spec["value"]))
    if kind == "bump":
        return spec["base"] + spec["amplitude"] * np.exp(
            -((x - spec["center"]) / spec["width"])**2)
    if kind == "step":
        return np.where(x < spec["at"], float(spec["left"]), float(spec["right"]))
    if kind == "inline":
        return np.asarray(spec["values"], dtype=float)
    raise ConfigError(f"unknown profile kind {kind!r}")


def _cross_field(data: dict) -> list[tuple[str, str]]:
    bad: list[tuple[str, str]] = []
    phys = data["physical"]
    reg = data["regularization"]
    stepping = data["stepping"]

    eps, nu = reg["eps"], reg["nu"]
    if not (0 < nu < eps <= 1):
        bad.append(("regularization.nu",
                    f"requires 0 < nu < eps <= 1, got nu={nu}, eps={eps}"))
    ambient_min = min(phys["rho_bar0"], phys["rho_bar1"],
                      phys["theta_bar0"], phys["theta_bar1"])
    if eps > min(ambient_min, 1.0):
        bad.append(("regularization.eps",
                    f"eps={eps} exceeds min(ambient values, 1) = {min(ambient_min, 1.0)}"))

    sat = data["saturation"]
    if sat["kind"] == "power_law":
        eta = sat.get("eta", 1.0)
        if not sat["q"] > 1.0 + eta:
            bad.append(("saturation.q",
                        f"growth exponent must exceed 1 + eta = {1.0 + eta}, got {sat['q']}"))

    dt = stepping["dt"]
    if not _is_multiple(phys["t_end"], dt):
        bad.append(("stepping.dt",
                    f"t_end={phys['t_end']} is not an integer number of steps of dt={dt}"))
    if "output" in data and not _is_multiple(data["output"]["cadence"], dt):
        bad.append(("output.cadence",
                    f"cadence={data['output']['cadence']} is not a multiple of dt={dt}"))

    n = data["grid"]["n"]
    init = data["initial"]
    for name in ("rho", "theta"):
        spec = init[name]
        if spec["profile"] == "inline" and len(spec["values"]) != n:
            bad.append((f"initial.{name}.values",
                        f"expected {n} samples, got {len(spec['values'])}"))
    if not bad:
        grid = Grid(n)
        rho0 = _profile_values(init["rho"], grid)
        theta0 = _profile_values(init["theta"], grid)
        if np.any(rho0 < 0):
            bad.append(("initial.rho", f"profile dips to {float(np.min(rho0)):.6g} < 0"))
        if np.any(theta0 < init["theta_floor"]):
            bad.append(("initial.theta",
                        f"profile dips to {float(np.min(theta0)):.6g} below "
                        f"theta_floor={init['theta_floor']}"))
    return bad


def validate_config(data: dict) -> None:
    """Raise ValidationError listing every schema and cross-field violation."""
    violations: list[tuple[str, str]] = []
    for err in sorted(_VALIDATOR.iter_errors(data), key=_error_path):
        chosen = best_match([err]) if err.context else err
        violations.append((_error_path(chosen), chosen.message))
    if not violations:
        violations.extend(_cross_field(data))
    if violations:
        raise ValidationError(violations)


def load_config(path: str) -> dict:
    """Read, parse, and validate one JSON config file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object")
    validate_config(data)
    return data


def apply_override(data: dict, path: str, value) -> dict:
    """Return a deep copy of data with one dotted path replaced."""
    out = json.loads(json.dumps(data))
    node = out
    parts = path.split(".")
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown override path {path!r}")
        node = node[part]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ConfigError(f"unknown override path {path!r}")
    node[parts[-1]] = value
    return out


@dataclass(frozen=True)
class Setup:
    """Validated config resolved into library objects."""

    params: PhysicalParams
    model: SaturationModel
    reg: RegularizationParams
    step: StepConfig
    grid: Grid
    initial: InitialData
    cadence: float
    raw: dict


def _build_model(sat: dict) -> SaturationModel:
    if sat["kind"] == "power_law":
        return PowerLawSaturation(c=sat["c"], q=sat["q"], eta=sat.get("eta", 1.0))
    return ExponentialSaturation(a=sat["a"], b=sat["b"], eta=sat.get("eta", 1.0))


def build_setup(data: dict) -> Setup:
    """Resolve a validated config dict into the objects the solver needs."""
    validate_config(data)
    phys = data["physical"]
    kwargs = {k: float(v) for k, v in phys.items() if k != "lambda"}
    params = PhysicalParams(lam=float(phys["lambda"]), **kwargs)
    model = _build_model(data["saturation"])
    reg_cfg = data["regularization"]
    reg = RegularizationParams(eps=float(reg_cfg["eps"]), nu=float(reg_cfg["nu"]),
                               s=float(reg_cfg.get("s", 1.0)))
    stepping = data["stepping"]
    step = StepConfig(
        dt=float(stepping["dt"]),
        picard_tol=float(stepping.get("picard_tol", 1e-10)),
        max_picard=int(stepping.get("max_picard", 50)),
        s_ramp_steps=int(stepping.get("s_ramp_steps", 8)),
        advection=stepping.get("advection", "upwind"),
    )
    grid = Grid(int(data["grid"]["n"]))
    init = data["initial"]
    initial = InitialData(
        rho0=_profile_values(init["rho"], grid),
        theta0=_profile_values(init["theta"], grid),
        theta_floor=float(init["theta_floor"]),
    )
    cadence = float(data.get("output", {}).get("cadence", phys["t_end"]))
    if not math.isfinite(cadence) or cadence <= 0:
        raise ConfigError(f"cadence must be positive and finite, got {cadence}")
    return Setup(params, model, reg, step, grid, initial, cadence, data)
