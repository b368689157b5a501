"""JSON configuration files for the command-line tool.

Top-level keys (all optional except where a command needs them)::

    {
      "population": {"n1": 8000, "n2": 8000, "n_overlap": 0, "n_non": 0,
                     "response_mode": "bernoulli",
                     "sets": {"mu_B1": 0.10, "mu_I1": 0.12, "mu_B2": 0.10, "mu_I2": 0.15, ...}},
      "test":       {"alpha": 0.05, "power_target": 0.8, "sided": "one_sided_greater"},
      "design":     {"mode": "SIT_separate_controls", "exposed_control_ratio": 1.0},
      "scenario":   {"kind": "none", "params": {}},
      "run":        {"replicates": 1000, "seed": 20190804, "output_dir": "out", "format": "table", "workers": 1}
    }

``sets`` takes the SetParameters field names (``mu_B1``, ``var_B1``, ...,
``mu_Itheta``, ``var_Itheta``, ``mu_N``, ``var_N``). Variances are derived in
bernoulli mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from .model import PopulationSpec, ResponseMode, SetParameters, Sided, TestConfig
from .sim.design import ContaminationScenario, DesignKind, DesignMode, SCENARIO_PARAMS, ContaminationKind

DEFAULT_SEED = 20190804
DEFAULT_REPLICATES = 1000

_SET_KEYS = tuple(f.name for f in fields(SetParameters) if f.name != "response_mode")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _section(data: dict, key: str, path: str = "") -> dict:
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{path}{key}", "expected an object")
    return value


def _no_extras(section: dict, allowed: tuple[str, ...], path: str) -> None:
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")


def _number(section: dict, key: str, path: str, default: Any = None, integer: bool = False) -> Any:
    if key not in section:
        if default is None:
            raise ConfigError(f"{path}.{key}", "required field is missing")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{path}.{key}", f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _wrap(path: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


def parse_population(data: dict) -> PopulationSpec:
    section = _section(data, "population")
    if not section:
        raise ConfigError("population", "required section is missing")
    _no_extras(section, ("n1", "n2", "n_overlap", "n_non", "response_mode", "sets"), "population")
    sets = _section(section, "sets", "population.")
    _no_extras(sets, _SET_KEYS, "population.sets")
    values = {}
    for key, raw in sets.items():
        if raw is None:
            continue
        values[key] = _number(sets, key, "population.sets")
    for key in ("mu_B1", "mu_I1", "mu_B2", "mu_I2"):
        if key not in values:
            raise ConfigError(f"population.sets.{key}", "required field is missing")
    mode = section.get("response_mode", ResponseMode.GAUSSIAN.value)
    try:
        mode = ResponseMode(mode)
    except ValueError:
        raise ConfigError("population.response_mode", f"expected 'bernoulli' or 'gaussian', got {mode!r}") from None
    params = _wrap("population.sets", lambda: SetParameters(response_mode=mode, **values))
    n1 = _number(section, "n1", "population", integer=True)
    n2 = _number(section, "n2", "population", integer=True)
    n_o = _number(section, "n_overlap", "population", default=0, integer=True)
    n_non = _number(section, "n_non", "population", default=0, integer=True)
    return _wrap("population", lambda: PopulationSpec(n1, n2, n_o, params, n_non))


def parse_test(data: dict, overrides: dict | None = None) -> TestConfig:
    section = dict(_section(data, "test"))
    _no_extras(section, ("alpha", "power_target", "sided"), "test")
    for key, value in (overrides or {}).items():
        if value is not None:
            section[key] = value
    alpha = _number(section, "alpha", "test", default=0.05)
    target = _number(section, "power_target", "test", default=0.8)
    sided = section.get("sided", Sided.ONE_SIDED_GREATER.value)
    try:
        sided = Sided(sided)
    except ValueError:
        raise ConfigError("test.sided", f"expected 'one_sided_greater' or 'two_sided', got {sided!r}") from None
    return _wrap("test", lambda: TestConfig(alpha, target, sided))


def parse_design(data: dict) -> DesignMode:
    section = _section(data, "design")
    _no_extras(section, ("mode", "exposed_control_ratio"), "design")
    mode = section.get("mode", DesignKind.SIT_SEPARATE_CONTROLS.value)
    try:
        kind = DesignKind(mode)
    except ValueError:
        choices = ", ".join(k.value for k in DesignKind)
        raise ConfigError("design.mode", f"expected one of {choices}, got {mode!r}") from None
    ratio = _number(section, "exposed_control_ratio", "design", default=1.0)
    return _wrap("design.exposed_control_ratio", lambda: DesignMode(kind, ratio))


def parse_scenario(data: dict) -> ContaminationScenario:
    section = _section(data, "scenario")
    _no_extras(section, ("kind", "params"), "scenario")
    raw_kind = section.get("kind", ContaminationKind.NONE.value)
    try:
        kind = ContaminationKind(raw_kind)
    except ValueError:
        choices = ", ".join(k.value for k in ContaminationKind)
        raise ConfigError("scenario.kind", f"expected one of {choices}, got {raw_kind!r}") from None
    params = _section(section, "params", "scenario.")
    _no_extras(params, SCENARIO_PARAMS[kind], "scenario.params")
    values = {key: _number(params, key, "scenario.params") for key in params}
    return _wrap("scenario.params", lambda: ContaminationScenario.from_params(kind, values))


@dataclass(frozen=True)
class RunSettings:
    replicates: int = DEFAULT_REPLICATES
    seed: int = DEFAULT_SEED
    output_dir: str = "sitkit-output"
    format: str = "table"
    workers: int = 1


def parse_run(data: dict, overrides: dict | None = None) -> RunSettings:
    section = dict(_section(data, "run"))
    _no_extras(section, ("replicates", "seed", "output_dir", "format", "workers"), "run")
    for key, value in (overrides or {}).items():
        if value is not None:
            section[key] = value
    replicates = _number(section, "replicates", "run", default=DEFAULT_REPLICATES, integer=True)
    seed = _number(section, "seed", "run", default=DEFAULT_SEED, integer=True)
    workers = _number(section, "workers", "run", default=1, integer=True)
    if seed < 0:
        raise ConfigError("run.seed", "seed must be nonnegative")
    if workers < 1:
        raise ConfigError("run.workers", "need at least one worker")
    fmt = section.get("format", "table")
    if fmt not in ("table", "json"):
        raise ConfigError("run.format", f"expected 'table' or 'json', got {fmt!r}")
    output_dir = section.get("output_dir", RunSettings.output_dir)
    if not isinstance(output_dir, str):
        raise ConfigError("run.output_dir", "expected a string")
    return RunSettings(replicates, seed, output_dir, fmt, workers)


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config file ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    _no_extras(data, ("population", "test", "design", "scenario", "run"), "")
    return data
