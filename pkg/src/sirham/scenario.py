"""Scenario files: the YAML surface of the command-line tools.

A scenario bundles everything one study needs: the initial compartment
fractions, a (possibly scheduled) parameter set, one or more integration
runs, and the tolerances the ``check`` command grades against.  Parsing
is deliberately strict: unknown keys anywhere in the document are an
error, because a typo like ``t_end:`` vs ``tend:`` silently changing the
horizon is the exact failure mode a validation layer exists to prevent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .core import CompartmentState, EpidemicParams, ParamSchedule
from .errors import ScenarioError
from .integrators import RunSpec

__all__ = [
    "Scenario",
    "Tolerances",
    "default_scenario_path",
    "load_scenario",
    "parse_scenario",
]


@dataclass(frozen=True)
class Tolerances:
    """Acceptance bounds used by the ``check`` command."""

    equivalence: float = 1e-4
    h_drift: float = 1e-5
    population: float = 1e-9
    constraint: float = 1e-8


@dataclass(frozen=True)
class Scenario:
    init: CompartmentState
    schedule: ParamSchedule
    runs: tuple[RunSpec, ...]
    tolerances: Tolerances = field(default_factory=Tolerances)


def _require_mapping(node: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(node, Mapping):
        raise ScenarioError(f"{where} must be a mapping, got {type(node).__name__}")
    return node


def _check_keys(node: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(node) - allowed
    if unknown:
        raise ScenarioError(
            f"unknown key(s) in {where}: {', '.join(sorted(map(str, unknown)))}; "
            f"allowed: {', '.join(sorted(allowed))}"
        )


def _number(node: Mapping[str, Any], key: str, where: str) -> float:
    if key not in node:
        raise ScenarioError(f"{where} is missing required key '{key}'")
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}.{key} must be a number, got {value!r}")
    return float(value)


_RUN_KEYS = {
    "method",
    "formulation",
    "dt",
    "t_end",
    "label",
    "sample_stride",
    "extended_mode",
    "newton_tol",
    "newton_max_iter",
    "constraint_tol",
}


def _parse_run(node: Any, where: str) -> RunSpec:
    node = _require_mapping(node, where)
    _check_keys(node, _RUN_KEYS, where)
    for key in ("method", "formulation", "dt", "t_end"):
        if key not in node:
            raise ScenarioError(f"{where} is missing required key '{key}'")
    kwargs: dict[str, Any] = {
        "method": node["method"],
        "formulation": node["formulation"],
        "dt": _number(node, "dt", where),
        "t_end": _number(node, "t_end", where),
    }
    if "label" in node:
        if not isinstance(node["label"], str):
            raise ScenarioError(f"{where}.label must be a string")
        kwargs["label"] = node["label"]
    if "sample_stride" in node:
        stride = node["sample_stride"]
        if isinstance(stride, bool) or not isinstance(stride, int):
            raise ScenarioError(f"{where}.sample_stride must be an integer")
        kwargs["sample_stride"] = stride
    if "extended_mode" in node:
        kwargs["extended_mode"] = node["extended_mode"]
    for key in ("newton_tol", "constraint_tol"):
        if key in node:
            kwargs[key] = _number(node, key, where)
    if "newton_max_iter" in node:
        iters = node["newton_max_iter"]
        if isinstance(iters, bool) or not isinstance(iters, int):
            raise ScenarioError(f"{where}.newton_max_iter must be an integer")
        kwargs["newton_max_iter"] = iters
    try:
        return RunSpec(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def parse_scenario(document: Any) -> Scenario:
    """Validate a parsed YAML document and build the scenario objects."""
    doc = _require_mapping(document, "scenario")
    _check_keys(doc, {"init", "schedule", "run", "tolerances"}, "scenario")
    for key in ("init", "schedule", "run"):
        if key not in doc:
            raise ScenarioError(f"scenario is missing required section '{key}'")

    init_node = _require_mapping(doc["init"], "init")
    _check_keys(init_node, {"s", "i"}, "init")
    s0 = _number(init_node, "s", "init")
    i0 = _number(init_node, "i", "init")
    try:
        init = CompartmentState(s=s0, i=i0, r=1.0 - s0 - i0)
    except ValueError as exc:
        raise ScenarioError(f"init: {exc}") from exc

    sched_node = doc["schedule"]
    if not isinstance(sched_node, list) or not sched_node:
        raise ScenarioError("schedule must be a non-empty list")
    times = []
    params = []
    for k, entry in enumerate(sched_node):
        where = f"schedule[{k}]"
        entry = _require_mapping(entry, where)
        _check_keys(entry, {"t", "beta", "gamma"}, where)
        times.append(_number(entry, "t", where))
        try:
            params.append(
                EpidemicParams(
                    beta=_number(entry, "beta", where),
                    gamma=_number(entry, "gamma", where),
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from exc
    schedule = ParamSchedule(switch_times=tuple(times), params=tuple(params))

    run_node = doc["run"]
    if not isinstance(run_node, list) or not run_node:
        raise ScenarioError("run must be a non-empty list")
    runs = tuple(_parse_run(entry, f"run[{k}]") for k, entry in enumerate(run_node))
    labels = [spec.name for spec in runs]
    if len(set(labels)) != len(labels):
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        raise ScenarioError(f"duplicate run label(s): {', '.join(dupes)}")
    if not schedule.is_constant:
        for k, spec in enumerate(runs):
            if spec.formulation.clock == "tau":
                raise ScenarioError(
                    f"run[{k}] ({spec.name}): rescaled-clock formulations do "
                    "not support parameter switches scheduled in ordinary time"
                )

    tolerances = Tolerances()
    if "tolerances" in doc:
        tol_node = _require_mapping(doc["tolerances"], "tolerances")
        allowed = {"equivalence", "h_drift", "population", "constraint"}
        _check_keys(tol_node, allowed, "tolerances")
        overrides = {
            key: _number(tol_node, key, "tolerances")
            for key in allowed
            if key in tol_node
        }
        for key, value in overrides.items():
            if value <= 0.0:
                raise ScenarioError(f"tolerances.{key} must be positive, got {value}")
        tolerances = Tolerances(**overrides)

    return Scenario(init=init, schedule=schedule, runs=runs, tolerances=tolerances)


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario YAML file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"invalid YAML in {path}: {exc}") from exc
    return parse_scenario(document)


def default_scenario_path() -> Path:
    """Filesystem path of the scenario shipped with the package."""
    return Path(str(resources.files("sirham").joinpath("data", "default.yaml")))
