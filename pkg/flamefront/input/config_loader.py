"""
Run configuration files.

A run is described by plain key=value sections:

    [grid]      half_width, cells_per_axis
    [solver]    geometry, eps, cfl_safety, extinction_threshold, max_steps,
                series_stride, dimension, radial_cells
    [kernel]    name
    [initial]   profile, cap_amplitude, perturbation_amplitude, angular_mode,
                envelope_lo, envelope_hi, M, selfsim_T
    [record]    times, dyadic, dyadic_levels, geometry_level
    [outputs]   directory, snapshots, render
    [analysis]  interior_exponent, sqrt_window, radial_comparison

Parsing is strict: an unknown section or key fails before anything runs.
"""
import configparser
import copy
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

from core.errors import ConfigurationError, FlameFrontError
from core.grid import GridSpec
from core.initdata import InitialDataSpec
from core.reaction import KERNELS, make_kernel
from core.records import SolverParams

logger = logging.getLogger(__name__)

REQUIRED = object()
SWEEP_AXES = {
    "eps": ("solver", "eps"),
    "alpha": ("initial", "perturbation_amplitude"),
    "grid": ("grid", "cells_per_axis"),
}


def _boolean(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in text.split(",") if item.strip())


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        value = text.strip()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {value!r}")
        return value

    return parse


def _fraction(text: str) -> float:
    text = text.strip()
    if "/" in text:
        numerator, denominator = text.split("/", 1)
        return float(numerator) / float(denominator)
    return float(text)


# section -> key -> (parser, default); None defaults are derived after parsing
SCHEMA: Dict[str, Dict[str, Tuple[Callable, object]]] = {
    "grid": {
        "half_width": (float, REQUIRED),
        "cells_per_axis": (int, REQUIRED),
    },
    "solver": {
        "geometry": (_choice("cartesian", "radial"), "cartesian"),
        "eps": (float, REQUIRED),
        "cfl_safety": (float, SolverParams.DEFAULT_CFL),
        "extinction_threshold": (float, None),
        "max_steps": (int, SolverParams.DEFAULT_MAX_STEPS),
        "series_stride": (int, SolverParams.DEFAULT_SERIES_STRIDE),
        "dimension": (int, 2),
        "radial_cells": (int, None),
    },
    "kernel": {
        "name": (_choice(*KERNELS), "smooth_bump"),
    },
    "initial": {
        "profile": (_choice("cap", "selfsim"), "cap"),
        "cap_amplitude": (float, 0.5),
        "perturbation_amplitude": (float, 0.0),
        "angular_mode": (int, 0),
        "envelope_lo": (float, 0.5),
        "envelope_hi": (float, 0.9),
        "M": (float, 2.0),
        "selfsim_T": (float, 1.0),
    },
    "record": {
        "times": (_float_list, ()),
        "dyadic": (_boolean, False),
        "dyadic_levels": (int, 8),
        "geometry_level": (float, None),
    },
    "outputs": {
        "directory": (str, "out"),
        "snapshots": (_choice("text", "binary", "none"), "text"),
        "render": (_boolean, False),
    },
    "analysis": {
        "interior_exponent": (_fraction, 2.0 / 3.0),
        "sqrt_window": (_float_list, (0.5, 0.95)),
        "radial_comparison": (_boolean, False),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """
    A fully resolved run configuration.

    raw keeps the strings given in the file so that overrides can be
    re-resolved with their dependent defaults; resolved holds every key,
    defaults included, for output metadata.
    """

    grid: GridSpec
    geometry: str
    eps: float
    cfl_safety: float
    extinction_threshold: float
    max_steps: int
    series_stride: int
    dimension: int
    radial_cells: int
    kernel_name: str
    initial: InitialDataSpec
    profile: str
    selfsim_T: float
    record_times: Tuple[float, ...]
    dyadic: bool
    dyadic_levels: int
    geometry_level: float
    output_directory: str
    snapshot_format: str
    render: bool
    interior_exponent: float
    sqrt_window: Tuple[float, float]
    radial_comparison: bool
    raw: Dict[str, Dict[str, str]]
    resolved: Dict[str, Dict[str, object]]
    source: str = "<string>"

    @property
    def is_radial(self) -> bool:
        return self.geometry == "radial"

    def kernel(self):
        return make_kernel(self.kernel_name)

    def solver_params(self, record_times: Optional[Tuple[float, ...]] = None) -> SolverParams:
        """SolverParams for this run, optionally with a different record schedule."""
        return SolverParams(
            eps=self.eps,
            cfl_safety=self.cfl_safety,
            record_times=self.record_times if record_times is None else record_times,
            extinction_threshold=self.extinction_threshold,
            max_steps=self.max_steps,
            series_stride=self.series_stride,
        )

    def with_override(self, axis: str, value) -> "RunConfig":
        """
        Copy of the configuration with one sweep axis replaced.

        Args:
            axis: eps, alpha or grid
            value: New value for the axis

        Raises:
            ConfigurationError: If the axis is unknown or the value invalid
        """
        if axis not in SWEEP_AXES:
            raise ConfigurationError(f"unknown sweep axis {axis!r}", key=axis)
        section, key = SWEEP_AXES[axis]
        raw = copy.deepcopy(self.raw)
        raw.setdefault(section, {})[key] = str(value)
        return _resolve(raw, self.source)

    def with_output_directory(self, directory: Union[str, Path]) -> "RunConfig":
        raw = copy.deepcopy(self.raw)
        raw.setdefault("outputs", {})["directory"] = str(directory)
        return _resolve(raw, self.source)


def _parse_sections(parser: configparser.ConfigParser) -> Dict[str, Dict[str, str]]:
    raw: Dict[str, Dict[str, str]] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown section [{section}]", key=section)
        for key, value in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown key {section}.{key}", key=f"{section}.{key}")
            raw.setdefault(section, {})[key] = value
    return raw


def _typed_values(raw: Dict[str, Dict[str, str]]) -> Dict[str, Dict[str, object]]:
    values: Dict[str, Dict[str, object]] = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (parse, default) in keys.items():
            text = raw.get(section, {}).get(key)
            if text is None:
                if default is REQUIRED:
                    raise ConfigurationError(f"missing required key {section}.{key}", key=f"{section}.{key}")
                values[section][key] = default
                continue
            try:
                values[section][key] = parse(text)
            except ValueError as exc:
                raise ConfigurationError(f"invalid value for {section}.{key}: {exc}", key=f"{section}.{key}")
    return values


def _resolve(raw: Dict[str, Dict[str, str]], source: str) -> RunConfig:
    values = _typed_values(raw)
    grid_values = values["grid"]
    solver = values["solver"]
    initial = values["initial"]
    record = values["record"]
    analysis = values["analysis"]

    eps = solver["eps"]
    if solver["extinction_threshold"] is None:
        solver["extinction_threshold"] = eps / 10.0
    if solver["radial_cells"] is None:
        solver["radial_cells"] = grid_values["cells_per_axis"] // 2
    if record["geometry_level"] is None:
        record["geometry_level"] = eps / 10.0
    if solver["geometry"] == "radial" and not 1 <= solver["dimension"] <= 6:
        raise ConfigurationError("solver.dimension must lie in 1..6", key="solver.dimension")
    if len(analysis["sqrt_window"]) != 2:
        raise ConfigurationError("analysis.sqrt_window needs two fractions", key="analysis.sqrt_window")

    try:
        grid = GridSpec(grid_values["half_width"], grid_values["cells_per_axis"])
        spec = InitialDataSpec(
            cap_amplitude=initial["cap_amplitude"],
            perturbation_amplitude=initial["perturbation_amplitude"],
            angular_mode=initial["angular_mode"],
            perturbation_envelope=(initial["envelope_lo"], initial["envelope_hi"]),
            M=initial["M"],
            dimension=solver["dimension"] if solver["geometry"] == "radial" else 2,
        )
        config = RunConfig(
            grid=grid,
            geometry=solver["geometry"],
            eps=eps,
            cfl_safety=solver["cfl_safety"],
            extinction_threshold=solver["extinction_threshold"],
            max_steps=solver["max_steps"],
            series_stride=solver["series_stride"],
            dimension=solver["dimension"],
            radial_cells=solver["radial_cells"],
            kernel_name=values["kernel"]["name"],
            initial=spec,
            profile=initial["profile"],
            selfsim_T=initial["selfsim_T"],
            record_times=tuple(record["times"]),
            dyadic=record["dyadic"],
            dyadic_levels=record["dyadic_levels"],
            geometry_level=record["geometry_level"],
            output_directory=values["outputs"]["directory"],
            snapshot_format=values["outputs"]["snapshots"],
            render=values["outputs"]["render"],
            interior_exponent=analysis["interior_exponent"],
            sqrt_window=tuple(analysis["sqrt_window"]),
            radial_comparison=analysis["radial_comparison"],
            raw=raw,
            resolved={section: {k: _jsonable(v) for k, v in keys.items()} for section, keys in values.items()},
            source=source,
        )
        config.solver_params()
    except ConfigurationError:
        raise
    except FlameFrontError as exc:
        raise ConfigurationError(f"{source}: {exc}")
    return config


def _jsonable(value):
    return list(value) if isinstance(value, tuple) else value


def load_config_string(text: str, source: str = "<string>") -> RunConfig:
    """
    Parse a configuration from text.

    Raises:
        ConfigurationError: On syntax errors, unknown or missing keys and invalid values
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}")
    return _resolve(_parse_sections(parser), source)


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Read and resolve a configuration file.

    Args:
        path: Path to the key=value file

    Returns:
        The resolved RunConfig

    Raises:
        ConfigurationError: If the file is unreadable or invalid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}")
    config = load_config_string(text, source=str(path))
    logger.info("Loaded configuration %s (%s, eps=%g)", path, config.geometry, config.eps)
    return config
