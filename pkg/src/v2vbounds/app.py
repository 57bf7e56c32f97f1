"""Command-line entry point: config ingestion, sweeps, CSV output, selfcheck.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from . import selfcheck as selfcheck_mod
from .errors import ConfigError, NoActiveLinks, NoBracket, NuisanceSingular
from .geometry import Vec2
from .scenarios import (
    PRESETS,
    DEFAULT_SWEEP_STEP,
    Measurement,
    PresetConfig,
    Requirements,
    SweepRow,
    evaluate_point,
    overtaking_sweep,
    platooning_sweep,
    scenario_crossing,
)

CSV_HEADER = (
    "q_x,q_y,d_y,n_links,peb_lat_both,peb_lon_both,"
    "peb_lat_aoa,peb_lon_aoa,oeb_both,oeb_aoa"
)

_SCENARIOS = ("overtaking", "platooning", "custom")
_MEASUREMENT_CHOICES = {"aoa": ("aoa",), "aoa+tdoa": ("aoa_tdoa",), "both": ("aoa_tdoa", "aoa")}

# Preset fields a config file may override.
_OVERRIDABLE = {
    "carrier_frequency",
    "subcarrier_spacing",
    "n_rx_elements",
    "target_snr_db",
    "n_fft",
    "n_symbols",
    "max_occupied_index",
    "k_tx",
    "vehicle_length",
    "vehicle_width",
    "lane_width",
    "noise_variance",
    "fov_blocked_halfwidth",
}

_INT_OVERRIDES = {"n_rx_elements", "n_fft", "n_symbols", "max_occupied_index", "k_tx"}


@dataclass
class RunConfig:
    """Validated run description."""

    scenario: str = "overtaking"
    preset: str = "cfg_3p5GHz"
    measurements: tuple[Measurement, ...] = ("aoa_tdoa", "aoa")
    step: float = DEFAULT_SWEEP_STEP
    out: str | None = None
    q_x: float = -3.5
    q_y_min: float = -30.0
    q_y_max: float = 30.0
    alpha_t: float = 0.0
    overrides: dict | None = None

    def resolve_preset(self) -> PresetConfig:
        overrides = dict(self.overrides or {})
        unknown = set(overrides) - _OVERRIDABLE
        if unknown:
            raise ConfigError(f"unknown override keys: {sorted(unknown)}")
        if self.preset == "custom":
            base = PRESETS["cfg_3p5GHz"]
            required = {"carrier_frequency", "subcarrier_spacing", "n_rx_elements", "target_snr_db"}
            missing = required - set(overrides)
            if missing:
                raise ConfigError(f"custom preset requires overrides: {sorted(missing)}")
            name = "custom"
        elif self.preset in PRESETS:
            base = PRESETS[self.preset]
            name = self.preset if not overrides else f"{self.preset}+overrides"
        else:
            raise ConfigError(f"unknown preset {self.preset!r}")
        for key in list(overrides):
            caster = int if key in _INT_OVERRIDES else float
            try:
                overrides[key] = caster(overrides[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"override {key} is not numeric: {overrides[key]!r}") from exc
        try:
            preset = dataclasses.replace(base, name=name, **overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        _validate_preset(preset)
        return preset

    def output_path(self) -> Path:
        if self.out:
            return Path(self.out)
        return Path(f"{self.scenario}_{self.preset}.csv")


def _validate_preset(preset: PresetConfig) -> None:
    if preset.carrier_frequency <= 0 or preset.subcarrier_spacing <= 0:
        raise ConfigError("carrier_frequency and subcarrier_spacing must be positive")
    if preset.n_rx_elements < 1 or preset.k_tx < 1 or preset.n_fft < 1 or preset.n_symbols < 1:
        raise ConfigError("counts must be >= 1")
    if preset.max_occupied_index < 1 or 2 * preset.max_occupied_index >= preset.n_fft:
        raise ConfigError("occupied subcarriers must fit strictly inside the FFT grid")
    if preset.vehicle_length <= 0 or preset.vehicle_width <= 0 or preset.lane_width <= 0:
        raise ConfigError("vehicle and lane dimensions must be positive")
    if preset.noise_variance <= 0:
        raise ConfigError("noise_variance must be positive")
    if preset.fov_blocked_halfwidth is not None and not (
        0.0 <= preset.fov_blocked_halfwidth <= math.pi
    ):
        raise ConfigError("fov_blocked_halfwidth must lie in [0, pi]")
    ratio = preset.max_occupied_index * preset.subcarrier_spacing / preset.carrier_frequency
    if ratio > 0.05:
        warnings.warn(
            f"occupied bandwidth is {ratio:.1%} of the carrier frequency; "
            "the narrowband signal model is questionable",
            stacklevel=2,
        )


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a YAML run configuration."""
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return _config_from_mapping(raw)


def _config_from_mapping(raw: dict) -> RunConfig:
    known = {f.name for f in dataclasses.fields(RunConfig)} | {"measurements"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig()
    if "scenario" in raw:
        cfg.scenario = str(raw["scenario"])
    if "preset" in raw:
        cfg.preset = str(raw["preset"])
    if "measurements" in raw:
        cfg.measurements = _parse_measurements(str(raw["measurements"]))
    for key in ("step", "q_x", "q_y_min", "q_y_max", "alpha_t"):
        if key in raw:
            try:
                setattr(cfg, key, float(raw[key]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key} is not numeric: {raw[key]!r}") from exc
    if "out" in raw and raw["out"] is not None:
        cfg.out = str(raw["out"])
    if "overrides" in raw and raw["overrides"] is not None:
        if not isinstance(raw["overrides"], dict):
            raise ConfigError("overrides must be a mapping")
        cfg.overrides = dict(raw["overrides"])
    _validate_run(cfg)
    return cfg


def _parse_measurements(text: str) -> tuple[Measurement, ...]:
    key = text.strip().lower().replace("aoa_tdoa", "aoa+tdoa")
    if key not in _MEASUREMENT_CHOICES:
        raise ConfigError(
            f"measurements must be one of {sorted(_MEASUREMENT_CHOICES)}, got {text!r}"
        )
    return _MEASUREMENT_CHOICES[key]


def _validate_run(cfg: RunConfig) -> None:
    if cfg.scenario not in _SCENARIOS:
        raise ConfigError(f"scenario must be one of {_SCENARIOS}, got {cfg.scenario!r}")
    if cfg.step <= 0:
        raise ConfigError("step must be positive")
    if cfg.q_y_min >= cfg.q_y_max:
        raise ConfigError("q_y_min must be below q_y_max")
    for key in ("q_x", "q_y_min", "q_y_max", "alpha_t", "step"):
        if not math.isfinite(getattr(cfg, key)):
            raise ConfigError(f"config key {key} must be finite")


def _format_value(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.9g}"


def emit_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    """Write sweep rows with a fixed column order and 9 significant digits."""
    if not rows:
        raise ValueError("refusing to write an empty sweep")
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                (
                    _format_value(row.q_x),
                    _format_value(row.q_y),
                    _format_value(row.d_y),
                    str(row.n_links),
                    _format_value(row.peb_lat_both),
                    _format_value(row.peb_lon_both),
                    _format_value(row.peb_lat_aoa),
                    _format_value(row.peb_lon_aoa),
                    _format_value(row.oeb_both),
                    _format_value(row.oeb_aoa),
                )
            )
        )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def _run_sweep(cfg: RunConfig, preset: PresetConfig) -> list[SweepRow]:
    if cfg.scenario == "overtaking":
        return overtaking_sweep(
            preset, cfg.q_y_min, cfg.q_y_max, cfg.step, measurements=cfg.measurements
        )
    if cfg.scenario == "platooning":
        return platooning_sweep(preset, q_y_min=cfg.q_y_min, step=cfg.step,
                                measurements=cfg.measurements)
    grid_count = int(round((cfg.q_y_max - cfg.q_y_min) / cfg.step))
    return [
        evaluate_point(
            preset,
            Vec2(cfg.q_x, cfg.q_y_min + i * cfg.step),
            alpha_t=cfg.alpha_t,
            measurements=cfg.measurements,
        )
        for i in range(grid_count + 1)
    ]


def _crossing_summary(cfg: RunConfig, preset: PresetConfig) -> list[str]:
    if cfg.scenario not in ("overtaking", "platooning"):
        return []
    requirements = Requirements()
    distance_label = "|q_y|" if cfg.scenario == "overtaking" else "d_y"
    lines = [
        f"requirement crossings, {cfg.scenario}, preset {preset.name} "
        f"(lat <= {requirements.lateral_max} m, lon <= {requirements.longitudinal_max} m):"
    ]
    for measurement, meas_label in (("aoa_tdoa", "AOA+TDOA"), ("aoa", "AOA-only")):
        if measurement not in cfg.measurements:
            continue
        for axis in ("lat", "lon"):
            try:
                crossing = scenario_crossing(preset, cfg.scenario, axis, measurement, requirements)
                text = f"met up to {distance_label} = {crossing:.2f} m"
            except NoBracket as exc:
                text = "met everywhere in range" if exc.met_everywhere else "met nowhere in range"
            lines.append(f"  {meas_label:9s} {axis}: {text}")
    return lines


def run(cfg: RunConfig) -> int:
    """Execute one validated configuration; returns the process exit code."""
    try:
        preset = cfg.resolve_preset()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        rows = _run_sweep(cfg, preset)
        bad = next(
            (row for row in rows if math.isnan(row.peb_lat_both) or math.isnan(row.peb_lat_aoa)),
            None,
        )
        if bad is not None:
            print(f"numerical failure at q_y = {bad.q_y}: NaN bound", file=sys.stderr)
            return 3
        out_path = cfg.output_path()
        emit_csv(rows, out_path)
        print(f"wrote {len(rows)} rows to {out_path}")
        for line in _crossing_summary(cfg, preset):
            print(line)
    except NoActiveLinks as exc:
        # A sweep row with no links becomes an inf row; reaching here means
        # the calibration placement itself has none.
        print(f"numerical failure: cannot calibrate preset ({exc})", file=sys.stderr)
        return 3
    except (NuisanceSingular, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="v2vbounds",
        description=(
            "Position/orientation error bounds for two-vehicle relative "
            "positioning with multi-panel antenna arrays"
        ),
    )
    parser.add_argument("--config", type=str, help="YAML run configuration")
    parser.add_argument("--scenario", choices=_SCENARIOS, help="sweep scenario")
    parser.add_argument("--preset", type=str, help="preset name (cfg_3p5GHz, cfg_28GHz, custom)")
    parser.add_argument("--out", type=str, help="output CSV path")
    parser.add_argument(
        "--measurements",
        choices=sorted(_MEASUREMENT_CHOICES),
        help="measurement sets to evaluate",
    )
    parser.add_argument("--step", type=float, help="sweep grid step in meters")
    parser.add_argument(
        "--selfcheck",
        action="store_true",
        help="run the internal consistency suites and report max errors",
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.selfcheck:
        return selfcheck_mod.run_selfcheck()
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.scenario:
            cfg.scenario = args.scenario
        if args.preset:
            cfg.preset = args.preset
        if args.out:
            cfg.out = args.out
        if args.measurements:
            cfg.measurements = _parse_measurements(args.measurements)
        if args.step is not None:
            cfg.step = args.step
        _validate_run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


def cli() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    cli()
