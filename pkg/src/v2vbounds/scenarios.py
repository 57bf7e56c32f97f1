"""Overtaking/platooning sweeps, requirement checks, and crossing search.

Two built-in configurations are provided: a 3.5 GHz / 60 kHz / 4-element
setup calibrated to 36 dB reference SNR and a 28 GHz / 240 kHz / 25-element
setup calibrated to 30 dB. Both use four corner panels per vehicle, a
2048-point grid with subcarriers -600..-1, 1..600 interleaved over the four
Tx arrays, one OFDM symbol, and unit noise variance; the transmit power is
set so the shortest side-by-side link (lateral offset one lane width) hits
the reference SNR after Rx beamforming.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Literal, Sequence

from .channel import calibrate_power, link_gains
from .errors import NoActiveLinks, NoBracket
from .fim_closed import efim_aoa_only, efim_aoa_tdoa
from .geometry import Pose, Vec2, active_links, build_cornered_vehicle, panels_with_links
from .scene import Scene
from .waveform import OfdmSpec, effective_bandwidths, interleaved_allocation

Axis = Literal["lat", "lon"]
Measurement = Literal["aoa", "aoa_tdoa"]

DEFAULT_SWEEP_STEP = 0.25  # m


@dataclass(frozen=True)
class Requirements:
    """3GPP V2X positioning accuracy requirements."""

    lateral_max: float = 0.1  # m
    longitudinal_max: float = 0.5  # m

    def __post_init__(self) -> None:
        if self.lateral_max <= 0.0 or self.longitudinal_max <= 0.0:
            raise ValueError("requirements must be positive")

    def threshold(self, axis: Axis) -> float:
        return self.lateral_max if axis == "lat" else self.longitudinal_max


@dataclass(frozen=True)
class SweepRow:
    """Bounds of both measurement sets at one relative position."""

    q_x: float
    q_y: float
    d_y: float  # bumper gap |q_y| - vehicle length (meaningful when aligned)
    n_links: int
    peb_lat_both: float
    peb_lon_both: float
    peb_lat_aoa: float
    peb_lon_aoa: float
    oeb_both: float
    oeb_aoa: float


@dataclass(frozen=True)
class PresetConfig:
    """System configuration from which scenes are built."""

    name: str
    carrier_frequency: float  # Hz
    subcarrier_spacing: float  # Hz
    n_rx_elements: int
    target_snr_db: float
    n_fft: int = 2048
    n_symbols: int = 1
    max_occupied_index: int = 600
    k_tx: int = 4
    vehicle_length: float = 4.5
    vehicle_width: float = 1.8
    lane_width: float = 3.5
    noise_variance: float = 1.0
    fov_blocked_halfwidth: float | None = None  # override, rad

    @property
    def occupied(self) -> tuple[int, ...]:
        m = self.max_occupied_index
        return tuple(range(-m, 0)) + tuple(range(1, m + 1))


PRESETS: dict[str, PresetConfig] = {
    "cfg_3p5GHz": PresetConfig(
        name="cfg_3p5GHz",
        carrier_frequency=3.5e9,
        subcarrier_spacing=60e3,
        n_rx_elements=4,
        target_snr_db=36.0,
    ),
    "cfg_28GHz": PresetConfig(
        name="cfg_28GHz",
        carrier_frequency=28e9,
        subcarrier_spacing=240e3,
        n_rx_elements=25,
        target_snr_db=30.0,
    ),
}


def _build_vehicle(preset: PresetConfig):
    wavelength = 299_792_458.0 / preset.carrier_frequency
    vehicle = build_cornered_vehicle(
        preset.vehicle_length, preset.vehicle_width, preset.n_rx_elements, wavelength
    )
    if preset.fov_blocked_halfwidth is not None:
        vehicle = replace(
            vehicle,
            panels=tuple(
                replace(p, fov_blocked_halfwidth=preset.fov_blocked_halfwidth)
                for p in vehicle.panels
            ),
        )
    return vehicle


def build_scene(
    preset: PresetConfig,
    q: Vec2,
    alpha_t: float = 0.0,
    alpha_r: float = 0.0,
    total_power: float = 1.0,
) -> Scene:
    """Scene with the Tx vehicle at the origin and the Rx vehicle at q."""
    vehicle = _build_vehicle(preset)
    ofdm = OfdmSpec(
        n_fft=preset.n_fft,
        subcarrier_spacing=preset.subcarrier_spacing,
        carrier_frequency=preset.carrier_frequency,
        occupied=preset.occupied,
        n_symbols=preset.n_symbols,
        total_power=total_power,
    )
    return Scene(
        tx_vehicle=vehicle,
        tx_pose=Pose(Vec2(0.0, 0.0), alpha_t),
        rx_vehicle=vehicle,
        rx_pose=Pose(q, alpha_r),
        ofdm=ofdm,
        allocation=interleaved_allocation(preset.occupied, preset.k_tx),
        noise_variance=preset.noise_variance,
    )


@lru_cache(maxsize=None)
def calibrated_power(preset: PresetConfig) -> float:
    """Transmit power meeting the preset's reference SNR target.

    The reference placement is side by side in neighboring lanes: lateral
    offset of one lane width, zero longitudinal offset.
    """
    reference = build_scene(preset, Vec2(-preset.lane_width, 0.0))
    return calibrate_power(reference, preset.target_snr_db)


def calibrated_scene(preset: PresetConfig, q: Vec2, alpha_t: float = 0.0) -> Scene:
    return build_scene(preset, q, alpha_t=alpha_t, total_power=calibrated_power(preset))


_INF_RESULT = (math.inf, math.inf, math.inf)


def evaluate_point(
    preset: PresetConfig,
    q: Vec2,
    alpha_t: float = 0.0,
    measurements: Sequence[Measurement] = ("aoa_tdoa", "aoa"),
) -> SweepRow:
    """Bounds for one relative placement; +inf sentinels when unsolvable.

    A placement with no LOS links (or with coincident panel pairs, which the
    visibility test treats as not visible) yields n_links = 0 and infinite
    bounds rather than an exception, so sweeps never abort.
    """
    scene = calibrated_scene(preset, q, alpha_t)
    lat_both, lon_both, oeb_both = _INF_RESULT
    lat_aoa, lon_aoa, oeb_aoa = _INF_RESULT
    try:
        links = active_links(scene)
        n_links = len(links)
        gains = link_gains(scene, links)
        if "aoa_tdoa" in measurements:
            betas = effective_bandwidths(scene.allocation, scene.ofdm)
            both = efim_aoa_tdoa(scene, links, gains, betas)
            lat_both, lon_both, oeb_both = both.peb_lat, both.peb_lon, both.oeb
        if "aoa" in measurements:
            aoa = efim_aoa_only(scene, links, gains)
            lat_aoa, lon_aoa, oeb_aoa = aoa.peb_lat, aoa.peb_lon, aoa.oeb
    except NoActiveLinks:
        n_links = 0
    return SweepRow(
        q_x=q.x,
        q_y=q.y,
        d_y=abs(q.y) - preset.vehicle_length,
        n_links=n_links,
        peb_lat_both=lat_both,
        peb_lon_both=lon_both,
        peb_lat_aoa=lat_aoa,
        peb_lon_aoa=lon_aoa,
        oeb_both=oeb_both,
        oeb_aoa=oeb_aoa,
    )


def _grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid built from integer multiples of the step."""
    if step <= 0.0:
        raise ValueError("step must be positive")
    count = int(round((stop - start) / step))
    return [start + i * step for i in range(count + 1)]


def overtaking_sweep(
    preset: PresetConfig,
    q_y_min: float = -30.0,
    q_y_max: float = 30.0,
    step: float = DEFAULT_SWEEP_STEP,
    measurements: Sequence[Measurement] = ("aoa_tdoa", "aoa"),
) -> list[SweepRow]:
    """Bounds along a pass in the neighboring lane.

    Lateral offset is held at one lane width (toward -x); the longitudinal
    offset runs over the inclusive grid [q_y_min, q_y_max].
    """
    q_x = -preset.lane_width
    return [
        evaluate_point(preset, Vec2(q_x, q_y), measurements=measurements)
        for q_y in _grid(q_y_min, q_y_max, step)
    ]


def platooning_sweep(
    preset: PresetConfig,
    q_y_min: float = -30.0,
    q_y_max: float | None = None,
    step: float = DEFAULT_SWEEP_STEP,
    measurements: Sequence[Measurement] = ("aoa_tdoa", "aoa"),
) -> list[SweepRow]:
    """Bounds for an in-lane follower at increasing bumper gaps.

    The Rx vehicle trails the Tx vehicle (negative q_y, zero lateral
    offset). The default grid starts one step beyond the touching point
    |q_y| = vehicle length, where the facing corner panels would coincide
    and the free-space gain diverges.
    """
    if q_y_max is None:
        q_y_max = -(preset.vehicle_length + step)
    return [
        evaluate_point(preset, Vec2(0.0, q_y), measurements=measurements)
        for q_y in reversed(_grid(q_y_min, q_y_max, step))
    ]


def _row_bound(row: SweepRow, axis: Axis, measurement: Measurement) -> float:
    if measurement == "aoa_tdoa":
        return row.peb_lat_both if axis == "lat" else row.peb_lon_both
    return row.peb_lat_aoa if axis == "lat" else row.peb_lon_aoa


def sweep_bound(rows: Sequence[SweepRow], axis: Axis, measurement: Measurement) -> list[float]:
    """Extract one bound column from sweep rows."""
    return [_row_bound(row, axis, measurement) for row in rows]


def requirement_crossing(
    bound_fn: Callable[[float], float],
    threshold: float,
    s_min: float,
    s_max: float,
    tol: float = 0.01,
) -> float:
    """Largest distance at which the bound still meets the threshold.

    Bisects bound_fn(s) - threshold on [s_min, s_max] to absolute tolerance
    ``tol``; the bound must be below the threshold at s_min and above it at
    s_max, otherwise NoBracket reports whether the requirement is met over
    the whole range or nowhere.
    """
    if s_min >= s_max:
        raise ValueError("require s_min < s_max")
    if bound_fn(s_max) <= threshold:
        raise NoBracket(
            f"bound stays within {threshold} up to {s_max} m", met_everywhere=True
        )
    if bound_fn(s_min) > threshold:
        raise NoBracket(
            f"bound already exceeds {threshold} at {s_min} m", met_everywhere=False
        )
    lo, hi = s_min, s_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bound_fn(mid) <= threshold:
            lo = mid
        else:
            hi = mid
    return lo


def scenario_bound_fn(
    preset: PresetConfig,
    scenario: Literal["overtaking", "platooning"],
    axis: Axis,
    measurement: Measurement,
) -> Callable[[float], float]:
    """Bound as a function of the scenario's distance parameter.

    Overtaking: parameter is the longitudinal offset q_y >= 0 at fixed
    lateral lane offset (the layout is mirror symmetric in q_y). Platooning:
    parameter is the bumper gap d_y > 0.
    """
    if scenario == "overtaking":

        def fn(s: float) -> float:
            row = evaluate_point(preset, Vec2(-preset.lane_width, s), measurements=(measurement,))
            return _row_bound(row, axis, measurement)

    elif scenario == "platooning":

        def fn(s: float) -> float:
            q_y = -(preset.vehicle_length + s)
            row = evaluate_point(preset, Vec2(0.0, q_y), measurements=(measurement,))
            return _row_bound(row, axis, measurement)

    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    return fn


def scenario_crossing(
    preset: PresetConfig,
    scenario: Literal["overtaking", "platooning"],
    axis: Axis,
    measurement: Measurement,
    requirements: Requirements = Requirements(),
    s_max: float | None = None,
    tol: float = 0.01,
) -> float:
    """Requirement-crossing distance for a built-in scenario.

    Returns the largest longitudinal offset (overtaking) or bumper gap
    (platooning) at which the requirement still holds; raises NoBracket when
    it holds everywhere or nowhere in the searched range.
    """
    if s_max is None:
        s_max = 30.0 if scenario == "overtaking" else 30.0 - preset.vehicle_length
    s_min = 0.0 if scenario == "overtaking" else 0.25
    bound_fn = scenario_bound_fn(preset, scenario, axis, measurement)
    return requirement_crossing(bound_fn, requirements.threshold(axis), s_min, s_max, tol)


def scenario_panel_counts(preset: PresetConfig, q: Vec2) -> tuple[int, int]:
    """Number of Tx and Rx panels with at least one LOS link at placement q."""
    scene = build_scene(preset, q)
    links = active_links(scene)
    tx, rx = panels_with_links(links)
    return len(tx), len(rx)
