"""Experiment driver: one-point comparisons and parameter sweeps.

Every axis point draws ONE five-bank scenario set and evaluates both
systems on it — the monopolist's shocked assets are the summed shocked
split-bank assets — so the comparison is common-random-numbers tight.
Output is deterministic given the seed: rows are sorted, floats are
emitted with shortest round-trip repr.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from typing import Optional, Sequence

import numpy as np

from .calibration import CalibrationInputs, EconomyCalibration, derive_gdp
from .clearing import CENTRAL_BANK_LOSS_MODES, ClearingParams
from .kernels import BACKEND_NAME
from .network import build_monopoly_network, build_split_network
from .risk import (InjectionCriterion, InjectionResult, minimal_injection,
                   minimal_injection_scalar)
from .shocks import ShockModel, sample_scenarios

DEFAULT_SEED = 1337
DEFAULT_SCENARIOS = 10_000
DEFAULT_LEVELS = (0.01, 0.05, 0.10)

SWEEP_AXES = ("bankruptcy-cost", "correlation", "shock-mean")
#: default (from, to, steps) per axis
DEFAULT_SWEEP_RANGES = {
    "bankruptcy-cost": (0.0, 0.5, 11),
    "correlation": (0.0, 0.9, 10),
    "shock-mean": (0.05, 0.5, 10),
}

SWEEP_CSV_HEADER = ("axis,axis_value,system,level,total_injection,"
                    "achieved_tail_loss,scenarios,seed")
SIMULATE_CSV_HEADER = "system,scenario,loss"


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the field path."""


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(
                f"sweep.axis: must be one of {SWEEP_AXES}, got {self.axis!r}")
        if self.steps < 2:
            raise ConfigError("sweep.steps: must be at least 2")
        lo, hi = sorted((self.start, self.stop))
        domain = {"bankruptcy-cost": (0.0, 1.0),
                  "correlation": (0.0, 1.0),
                  "shock-mean": (0.0, 0.999999)}[self.axis]
        if lo < domain[0] or hi > domain[1]:
            raise ConfigError(
                f"sweep bounds [{self.start}, {self.stop}] leave the valid "
                f"domain {list(domain)} of axis {self.axis!r}")

    @classmethod
    def default_for(cls, axis: str) -> "SweepSpec":
        if axis not in DEFAULT_SWEEP_RANGES:
            raise ConfigError(
                f"sweep.axis: must be one of {SWEEP_AXES}, got {axis!r}")
        start, stop, steps = DEFAULT_SWEEP_RANGES[axis]
        return cls(axis=axis, start=start, stop=stop, steps=steps)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


_SYSTEM_CHOICES = ("monopoly", "split", "both")


@dataclass(frozen=True)
class ExperimentConfig:
    calibration: CalibrationInputs = CalibrationInputs()
    mean_drop: float = 0.27
    concentration: float = 10.0
    correlation: float = 0.25
    bankruptcy_cost: float = 0.10
    levels: tuple = DEFAULT_LEVELS
    scenarios: int = DEFAULT_SCENARIOS
    seed: int = DEFAULT_SEED
    system: str = "both"
    sweep: Optional[SweepSpec] = None
    injection_shock_exempt: bool = True
    central_bank_loss: str = "auto"

    def __post_init__(self):
        if not 0.0 <= self.bankruptcy_cost <= 1.0:
            raise ConfigError("bankruptcy_cost: must lie in [0, 1]")
        if self.scenarios < 1:
            raise ConfigError("scenarios: must be positive")
        if self.seed < 0 or self.seed >= (1 << 64):
            raise ConfigError("seed: must fit an unsigned 64-bit value")
        if self.system not in _SYSTEM_CHOICES:
            raise ConfigError(
                f"system: must be one of {_SYSTEM_CHOICES}, got {self.system!r}")
        if self.central_bank_loss not in CENTRAL_BANK_LOSS_MODES:
            raise ConfigError(
                f"central_bank_loss: must be one of {CENTRAL_BANK_LOSS_MODES}")
        levels = tuple(float(q) for q in self.levels)
        if not levels:
            raise ConfigError("levels: must not be empty")
        for q in levels:
            if not 0.0 < q < 1.0:
                raise ConfigError(f"levels: {q} lies outside (0, 1)")
        object.__setattr__(self, "levels", levels)
        # shared shock validation, surfaced with config field names
        try:
            self.shock_model()
        except ValueError as err:
            raise ConfigError(str(err)) from None

    def shock_model(self) -> ShockModel:
        return ShockModel(mean_drop=self.mean_drop,
                          concentration=self.concentration,
                          correlation=self.correlation)

    def clearing_params(self) -> ClearingParams:
        return ClearingParams.from_bankruptcy_cost(self.bankruptcy_cost)

    def systems(self) -> tuple:
        if self.system == "both":
            return ("monopoly", "split")
        return (self.system,)

    def to_dict(self) -> dict:
        out = {
            "calibration": {f.name: getattr(self.calibration, f.name)
                            for f in fields(CalibrationInputs)},
            "mean_drop": self.mean_drop,
            "concentration": self.concentration,
            "correlation": self.correlation,
            "bankruptcy_cost": self.bankruptcy_cost,
            "levels": list(self.levels),
            "scenarios": self.scenarios,
            "seed": self.seed,
            "system": self.system,
            "injection_shock_exempt": self.injection_shock_exempt,
            "central_bank_loss": self.central_bank_loss,
        }
        if self.sweep is not None:
            out["sweep"] = {"axis": self.sweep.axis, "from": self.sweep.start,
                            "to": self.sweep.stop, "steps": self.sweep.steps}
        return out


def _require_keys(data: dict, allowed, path: str) -> None:
    unknown = set(data) - set(allowed)
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"{where}{sorted(unknown)[0]}: unknown key")


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from JSON-shaped data, reporting errors by field path."""
    if not isinstance(data, dict):
        raise ConfigError("config: must be a JSON object")
    allowed = [f.name for f in fields(ExperimentConfig)]
    _require_keys(data, allowed, "")
    kwargs = dict(data)

    if "calibration" in kwargs and kwargs["calibration"] is not None:
        cal = kwargs["calibration"]
        if not isinstance(cal, dict):
            raise ConfigError("calibration: must be an object")
        _require_keys(cal, [f.name for f in fields(CalibrationInputs)],
                      "calibration")
        try:
            kwargs["calibration"] = CalibrationInputs(**cal)
        except ValueError as err:
            raise ConfigError(f"calibration: {err}") from None
    if "sweep" in kwargs and kwargs["sweep"] is not None:
        sw = kwargs["sweep"]
        if not isinstance(sw, dict):
            raise ConfigError("sweep: must be an object")
        _require_keys(sw, ("axis", "from", "to", "steps"), "sweep")
        if "axis" not in sw:
            raise ConfigError("sweep.axis: required")
        base = SweepSpec.default_for(sw["axis"])
        kwargs["sweep"] = SweepSpec(
            axis=sw["axis"],
            start=float(sw.get("from", base.start)),
            stop=float(sw.get("to", base.stop)),
            steps=int(sw.get("steps", base.steps)),
        )
    if "levels" in kwargs and kwargs["levels"] is not None:
        kwargs["levels"] = tuple(kwargs["levels"])
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    system: str
    level: float
    total_injection: float
    achieved_tail_loss: float
    scenarios: int
    seed: int

    def to_csv_line(self) -> str:
        return (f"{self.axis},{self.axis_value!r},{self.system},{self.level!r},"
                f"{self.total_injection!r},{self.achieved_tail_loss!r},"
                f"{self.scenarios},{self.seed}")

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "axis_value": self.axis_value,
            "system": self.system,
            "level": self.level,
            "total_injection": self.total_injection,
            "achieved_tail_loss": self.achieved_tail_loss,
            "scenarios": self.scenarios,
            "seed": self.seed,
        }


def _config_at_axis_value(config: ExperimentConfig, axis: str,
                          value: float) -> ExperimentConfig:
    if axis == "bankruptcy-cost":
        return replace(config, bankruptcy_cost=float(value))
    if axis == "correlation":
        return replace(config, correlation=float(value))
    return replace(config, mean_drop=float(value))


def solve_injection(system: str, calib: EconomyCalibration,
                    config: ExperimentConfig, level: float,
                    scenarios=None) -> InjectionResult:
    """One system / one level minimal injection at the config's parameters."""
    split_net = build_split_network(calib)
    if scenarios is None:
        scenarios = sample_scenarios(config.shock_model(), split_net.n_banks,
                                     config.scenarios, config.seed)
    criterion = InjectionCriterion(level=level,
                                   threshold=calib.loss_threshold_galleons)
    params = config.clearing_params()
    common = dict(injection_shock_exempt=config.injection_shock_exempt,
                  central_bank_loss=config.central_bank_loss)
    if system == "monopoly":
        mono_net = build_monopoly_network(calib)
        return minimal_injection_scalar(mono_net, scenarios, params, criterion,
                                        base_assets=split_net.external_assets,
                                        **common)
    return minimal_injection(split_net, scenarios, params, criterion, **common)


def run_sweep(config: ExperimentConfig) -> list:
    """All (axis value, system, level) minimal injections, sorted."""
    if config.sweep is None:
        raise ConfigError("sweep: required for run_sweep")
    calib = derive_gdp(config.calibration)
    split_net = build_split_network(calib)
    rows = []
    for value in config.sweep.values():
        point = _config_at_axis_value(config, config.sweep.axis, float(value))
        scenarios = sample_scenarios(point.shock_model(), split_net.n_banks,
                                     point.scenarios, point.seed)
        for system in point.systems():
            for level in sorted(point.levels):
                res = solve_injection(system, calib, point, level, scenarios)
                rows.append(SweepRow(
                    axis=config.sweep.axis,
                    axis_value=float(value),
                    system=system,
                    level=level,
                    total_injection=res.total,
                    achieved_tail_loss=res.achieved_tail_loss,
                    scenarios=point.scenarios,
                    seed=point.seed,
                ))
    rows.sort(key=lambda r: (r.axis_value, r.system, r.level))
    return rows


def compare_systems(config: ExperimentConfig) -> dict:
    """Single-point monopoly-vs-split comparison on one scenario set."""
    calib = derive_gdp(config.calibration)
    split_net = build_split_network(calib)
    scenarios = sample_scenarios(config.shock_model(), split_net.n_banks,
                                 config.scenarios, config.seed)
    levels = sorted(config.levels)
    results = {}
    for system in config.systems():
        results[system] = [
            solve_injection(system, calib, config, level, scenarios).to_dict()
            for level in levels
        ]
    out = {
        "backend": BACKEND_NAME,
        "gdp": calib.gdp_galleons,
        "loss_threshold": calib.loss_threshold_galleons,
        "config": config.to_dict(),
        "results": results,
    }
    if len(results) == 2:
        out["difference"] = [
            {"level": level,
             "value": results["split"][i]["total"] - results["monopoly"][i]["total"]}
            for i, level in enumerate(levels)
        ]
    return out


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = [SWEEP_CSV_HEADER]
    lines.extend(row.to_csv_line() for row in rows)
    return "\n".join(lines) + "\n"


def rows_to_json(config: ExperimentConfig, rows: Sequence[SweepRow]) -> str:
    payload = {
        "backend": BACKEND_NAME,
        "config": config.to_dict(),
        "rows": [row.to_dict() for row in rows],
    }
    return json.dumps(payload, indent=2) + "\n"
