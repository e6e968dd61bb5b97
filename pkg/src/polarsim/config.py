"""Experiment config parsing and validation.

Configs are JSON objects with an ``experiment`` kind, a ``seed``, and
kind-specific parameters. Parsing validates everything up front (every
diagnostic names the offending field) and builds the domain objects,
so a config that parses will run. Directions are never normalized on
the user's behalf: a non-unit vector where a unit one is required is
an error that tells you to normalize it yourself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dynamics import DetectorModel
from .epr import PairPolarizationState, pair_state, singlet_state
from .errors import (
    BlochVectorError,
    ConfigError,
    ModelError,
    PairStateError,
    PlanError,
)
from .qstate import as_bloch_vector
from .strategy import StrategyPlan, cycle_plan

KINDS = ("strategy", "dynamics", "epr", "chsh", "qkd")

_Z = [0.0, 0.0, 1.0]
_X = [1.0, 0.0, 0.0]
_Y = [0.0, 1.0, 0.0]

#: Default direction cycles for the plan generator presets.
PLAN_PRESET_DEFAULTS = {
    "strategy1": {"n": _Z, "m": _Z},
    "strategy2": {"states": [_Z, _X, _Z, _Y], "m": _Z},
    "strategy3": {"n": _Z, "observables": [_Z, _X]},
    "strategy4": {"states": [_Z, _X, _Z, _Y], "observables": [_Z, _Y]},
}


@dataclass(frozen=True)
class StrategyRun:
    plan: StrategyPlan


@dataclass(frozen=True)
class DynamicsRun:
    model: DetectorModel
    photon: np.ndarray
    t_max: float
    dt: float
    threshold: float


@dataclass(frozen=True)
class EprRun:
    state: PairPolarizationState
    settings: tuple[tuple[np.ndarray, np.ndarray], ...]
    n_events: int


@dataclass(frozen=True)
class ChshRun:
    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray
    n_per_setting: int


@dataclass(frozen=True)
class QkdRun:
    rounds: int
    epsilon: float
    sample_fraction: float
    bases: np.ndarray
    left_seed: int
    right_seed: int
    emit_keys: bool


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment: kind, master seed, domain payload, echo dict."""

    kind: str
    seed: int
    payload: object
    raw: dict


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON config document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config_dict(obj)


def load_config(path) -> ExperimentConfig:
    """Read and parse a JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_config_dict(obj) -> ExperimentConfig:
    """Validate an already-decoded config object."""
    if not isinstance(obj, dict):
        raise ConfigError(f"config must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("experiment")
    if kind not in KINDS:
        raise ConfigError(
            f"experiment: must be one of {', '.join(KINDS)}, got {kind!r}"
        )
    seed = _int_field(obj, "seed", minimum=0)
    parser = {
        "strategy": _parse_strategy,
        "dynamics": _parse_dynamics,
        "epr": _parse_epr,
        "chsh": _parse_chsh,
        "qkd": _parse_qkd,
    }[kind]
    payload, raw = parser(obj, seed)
    raw = {"experiment": kind, "seed": seed, **raw}
    return ExperimentConfig(kind=kind, seed=seed, payload=payload, raw=raw)


def _fail(field: str, message: str) -> ConfigError:
    return ConfigError(f"{field}: {message}")


def _require(obj: dict, field: str):
    if field not in obj:
        raise _fail(field, "missing required field")
    return obj[field]


def _int_field(obj: dict, field: str, *, minimum=None, default=None) -> int:
    if field not in obj:
        if default is not None:
            return default
        raise _fail(field, "missing required field")
    value = obj[field]
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(field, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise _fail(field, f"must be >= {minimum}, got {value}")
    return value


def _float_field(
    obj: dict,
    field: str,
    *,
    default=None,
    low=None,
    high=None,
    exclusive: bool = False,
) -> float:
    if field not in obj:
        if default is not None:
            return default
        raise _fail(field, "missing required field")
    value = obj[field]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(field, f"must be a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise _fail(field, f"must be finite, got {value!r}")
    if low is not None and (value <= low if exclusive else value < low):
        op = ">" if exclusive else ">="
        raise _fail(field, f"must be {op} {low}, got {value!r}")
    if high is not None and (value >= high if exclusive else value > high):
        op = "<" if exclusive else "<="
        raise _fail(field, f"must be {op} {high}, got {value!r}")
    return value


def _unit_field(value, field: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise _fail(field, f"must be a 3-vector [x, y, z], got {value!r}")
    try:
        return as_bloch_vector([float(v) for v in value], unit=True, name=field)
    except (TypeError, ValueError) as exc:
        raise _fail(field, f"entries must be numbers: {exc}") from exc
    except BlochVectorError as exc:
        raise ConfigError(f"{exc} (vectors are never normalized silently)") from exc


def _parse_strategy(obj: dict, seed: int):
    spec = _require(obj, "plan")
    if isinstance(spec, list):
        plan, raw_plan = _plan_from_pairs(spec)
    elif isinstance(spec, dict):
        plan, raw_plan = _plan_from_generator(spec)
    else:
        raise _fail("plan", "must be a list of {n, m} pairs or a generator object")
    return StrategyRun(plan=plan), {"plan": raw_plan}


def _plan_from_pairs(spec: list):
    if not spec:
        raise _fail("plan", "needs at least one {n, m} pair")
    states = []
    observables = []
    for k, entry in enumerate(spec):
        if not isinstance(entry, dict):
            raise _fail(f"plan[{k}]", f"must be an object with n and m, got {entry!r}")
        states.append(_unit_field(_require_sub(entry, "n", f"plan[{k}]"), f"plan[{k}].n"))
        observables.append(
            _unit_field(_require_sub(entry, "m", f"plan[{k}]"), f"plan[{k}].m")
        )
    try:
        plan = StrategyPlan(states=np.asarray(states), observables=np.asarray(observables))
    except PlanError as exc:
        raise _fail("plan", str(exc)) from exc
    raw = [
        {"n": list(map(float, n)), "m": list(map(float, m))}
        for n, m in zip(states, observables)
    ]
    return plan, raw


def _require_sub(entry: dict, key: str, where: str):
    if key not in entry:
        raise _fail(f"{where}.{key}", "missing required field")
    return entry[key]


def _plan_from_generator(spec: dict):
    name = spec.get("preset")
    if name not in PLAN_PRESET_DEFAULTS:
        raise _fail(
            "plan.preset",
            f"must be one of {', '.join(PLAN_PRESET_DEFAULTS)}, got {name!r}",
        )
    length = _int_field(spec, "K", minimum=1)
    params = spec.get("parameters", {})
    if not isinstance(params, dict):
        raise _fail("plan.parameters", f"must be an object, got {params!r}")
    defaults = PLAN_PRESET_DEFAULTS[name]
    unknown = set(params) - set(defaults)
    if unknown:
        raise _fail(
            "plan.parameters",
            f"unknown keys {sorted(unknown)} for {name}; allowed: {sorted(defaults)}",
        )
    merged = {**defaults, **params}
    if name == "strategy1":
        states = [_unit_field(merged["n"], "plan.parameters.n")]
        observables = [_unit_field(merged["m"], "plan.parameters.m")]
    elif name == "strategy2":
        states = _unit_list(merged["states"], "plan.parameters.states")
        observables = [_unit_field(merged["m"], "plan.parameters.m")]
    elif name == "strategy3":
        states = [_unit_field(merged["n"], "plan.parameters.n")]
        observables = _unit_list(merged["observables"], "plan.parameters.observables")
    else:
        states = _unit_list(merged["states"], "plan.parameters.states")
        observables = _unit_list(merged["observables"], "plan.parameters.observables")
    try:
        plan = cycle_plan(length, states, observables)
    except PlanError as exc:
        raise _fail("plan", str(exc)) from exc
    raw = {
        "preset": name,
        "K": length,
        "parameters": {
            key: _vector_or_list_raw(merged[key]) for key in sorted(defaults)
        },
    }
    return plan, raw


def _unit_list(value, field: str) -> list:
    if not isinstance(value, (list, tuple)) or not value:
        raise _fail(field, f"must be a non-empty list of 3-vectors, got {value!r}")
    if not all(isinstance(v, (list, tuple)) for v in value):
        raise _fail(field, "must be a list of 3-vectors")
    return [_unit_field(v, f"{field}[{i}]") for i, v in enumerate(value)]


def _vector_or_list_raw(value):
    arr = np.asarray(value, dtype=float)
    return arr.tolist()


def _parse_dynamics(obj: dict, seed: int):
    dimension = _int_field(obj, "dimension", minimum=2)
    omega = _float_field(obj, "omega")
    g0 = _float_field(obj, "g0")
    t_i = _float_field(obj, "t_i")
    t_f = _float_field(obj, "t_f")
    if not t_i < t_f:
        raise _fail("t_f", f"must exceed t_i={t_i!r}, got {t_f!r}")
    detector_init = obj.get("detector_init", "ground")
    if detector_init not in ("ground", "maximally_mixed"):
        raise _fail(
            "detector_init",
            f"must be 'ground' or 'maximally_mixed', got {detector_init!r}",
        )
    photon = _unit_field(_require(obj, "photon"), "photon")
    dt = _float_field(obj, "dt", low=0.0, exclusive=True)
    t_max = _float_field(obj, "t_max")
    if t_max <= dt:
        raise _fail("t_max", f"must exceed dt={dt!r}, got {t_max!r}")
    threshold = _float_field(obj, "threshold", low=0.0, high=1.0, exclusive=True)
    try:
        model = DetectorModel.ladder(dimension, omega, g0, t_i, t_f, detector_init)
    except ModelError as exc:
        raise ConfigError(f"model: {exc}") from exc
    raw = {
        "dimension": dimension,
        "omega": omega,
        "g0": g0,
        "t_i": t_i,
        "t_f": t_f,
        "detector_init": detector_init,
        "photon": photon.tolist(),
        "t_max": t_max,
        "dt": dt,
        "threshold": threshold,
    }
    payload = DynamicsRun(
        model=model, photon=photon, t_max=t_max, dt=dt, threshold=threshold
    )
    return payload, raw


def _parse_epr(obj: dict, seed: int):
    state_spec = _require(obj, "state")
    if not isinstance(state_spec, dict):
        raise _fail("state", f"must be an object, got {state_spec!r}")
    state_type = state_spec.get("type")
    if state_type not in ("singlet", "pair"):
        raise _fail("state.type", f"must be 'singlet' or 'pair', got {state_type!r}")
    axis = _unit_field(state_spec.get("n", _Z), "state.n")
    try:
        if state_type == "singlet":
            state = singlet_state(axis)
            raw_state = {"type": "singlet", "n": axis.tolist()}
        else:
            theta = _float_field(state_spec, "theta")
            phi = _float_field(state_spec, "phi")
            state = pair_state(theta, phi, axis)
            raw_state = {
                "type": "pair",
                "theta": theta,
                "phi": phi,
                "n": axis.tolist(),
            }
    except PairStateError as exc:
        raise ConfigError(f"state: {exc}") from exc
    settings_spec = _require(obj, "settings")
    if not isinstance(settings_spec, list) or not settings_spec:
        raise _fail("settings", "must be a non-empty list of {m_l, m_r} objects")
    settings = []
    raw_settings = []
    for i, entry in enumerate(settings_spec):
        if not isinstance(entry, dict):
            raise _fail(f"settings[{i}]", f"must be an object, got {entry!r}")
        m_l = _unit_field(_require_sub(entry, "m_l", f"settings[{i}]"), f"settings[{i}].m_l")
        m_r = _unit_field(_require_sub(entry, "m_r", f"settings[{i}]"), f"settings[{i}].m_r")
        settings.append((m_l, m_r))
        raw_settings.append({"m_l": m_l.tolist(), "m_r": m_r.tolist()})
    n_events = _int_field(obj, "N", minimum=1)
    payload = EprRun(state=state, settings=tuple(settings), n_events=n_events)
    return payload, {"state": raw_state, "settings": raw_settings, "N": n_events}


def _parse_chsh(obj: dict, seed: int):
    vectors = {}
    for field in ("a", "a_prime", "b", "b_prime"):
        vectors[field] = _unit_field(_require(obj, field), field)
    n_per_setting = _int_field(obj, "n_per_setting", minimum=1)
    payload = ChshRun(n_per_setting=n_per_setting, **vectors)
    raw = {field: vec.tolist() for field, vec in vectors.items()}
    raw["n_per_setting"] = n_per_setting
    return payload, raw


def _parse_qkd(obj: dict, seed: int):
    rounds = _int_field(obj, "rounds", minimum=1)
    epsilon = _float_field(obj, "epsilon", low=0.0, high=1.0)
    sample_fraction = _float_field(
        obj, "sample_fraction", low=0.0, high=1.0, exclusive=True
    )
    bases_spec = _require(obj, "bases")
    if not isinstance(bases_spec, list) or len(bases_spec) not in (1, 2):
        raise _fail("bases", f"must list one or two 3-vectors, got {bases_spec!r}")
    bases = np.asarray(_unit_list(bases_spec, "bases"))
    left_seed = _int_field(obj, "left_seed", minimum=0, default=seed)
    right_seed = _int_field(obj, "right_seed", minimum=0, default=seed)
    emit_keys = obj.get("emit_keys", False)
    if not isinstance(emit_keys, bool):
        raise _fail("emit_keys", f"must be true or false, got {emit_keys!r}")
    payload = QkdRun(
        rounds=rounds,
        epsilon=epsilon,
        sample_fraction=sample_fraction,
        bases=bases,
        left_seed=left_seed,
        right_seed=right_seed,
        emit_keys=emit_keys,
    )
    raw = {
        "rounds": rounds,
        "epsilon": epsilon,
        "sample_fraction": sample_fraction,
        "bases": bases.tolist(),
        "left_seed": left_seed,
        "right_seed": right_seed,
        "emit_keys": emit_keys,
    }
    return payload, raw
