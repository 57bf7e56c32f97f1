"""Shared fixtures and scene builders for the test suite."""

from __future__ import annotations

import math

import pytest

from v2vbounds.geometry import ArrayPanel, ElementOffset, Pose, Vec2, VehicleSpec
from v2vbounds.scene import Scene
from v2vbounds.scenarios import PRESETS
from v2vbounds.waveform import OfdmSpec, interleaved_allocation


@pytest.fixture(scope="session")
def preset_3p5():
    return PRESETS["cfg_3p5GHz"]


@pytest.fixture(scope="session")
def preset_28():
    return PRESETS["cfg_28GHz"]


def open_panel(
    mount_distance: float = 0.0,
    mount_angle: float = 0.0,
    n_elements: int = 2,
    spacing: float = 0.04,
    blocked_center: float = math.pi,
) -> ArrayPanel:
    """Panel with an unobstructed view (zero-width blocked sector).

    Elements sit at +-spacing/2 on the vehicle-frame x axis unless
    n_elements == 1.
    """
    if n_elements == 1:
        elements = (ElementOffset(0.0, 0.0),)
    else:
        half = spacing / 2.0
        elements = tuple(
            ElementOffset(half, 0.0 if i % 2 == 0 else math.pi) for i in range(n_elements)
        )
        if n_elements % 2 == 1:
            elements = elements[:-1] + (ElementOffset(0.0, 0.0),)
    return ArrayPanel(
        mount_distance=mount_distance,
        mount_angle=mount_angle,
        elements=elements,
        fov_blocked_center=blocked_center,
        fov_blocked_halfwidth=0.0,
    )


def small_scene(
    n_tx_panels: int = 2,
    n_rx_panels: int = 2,
    n_elements: int = 2,
    q: Vec2 = Vec2(17.0, 6.0),
    alpha_t: float = 0.3,
    alpha_r: float = -0.2,
    n_occupied: int = 8,
    carrier_frequency: float = 3.5e9,
    subcarrier_spacing: float = 60e3,
    n_symbols: int = 1,
    total_power: float = 1e9,
    noise_variance: float = 1.0,
) -> Scene:
    """Compact scene with guaranteed all-pairs visibility.

    Panels have open fields of view and tiny bodies, so the number of active
    links is exactly n_tx_panels * n_rx_panels.
    """
    mounts = [(0.9, 0.4), (0.9, 2.1), (0.9, -1.6), (0.9, 2.9)]
    tx_panels = tuple(
        open_panel(d, psi, n_elements=n_elements) for d, psi in mounts[:n_tx_panels]
    )
    rx_panels = tuple(
        open_panel(d, psi, n_elements=n_elements) for d, psi in mounts[:n_rx_panels]
    )
    tx = VehicleSpec(length=0.1, width=0.1, panels=tx_panels)
    rx = VehicleSpec(length=0.1, width=0.1, panels=rx_panels)
    occupied = tuple(range(-n_occupied // 2, 0)) + tuple(range(1, n_occupied // 2 + 1))
    ofdm = OfdmSpec(
        n_fft=64,
        subcarrier_spacing=subcarrier_spacing,
        carrier_frequency=carrier_frequency,
        occupied=occupied,
        n_symbols=n_symbols,
        total_power=total_power,
    )
    return Scene(
        tx_vehicle=tx,
        tx_pose=Pose(Vec2(0.0, 0.0), alpha_t),
        rx_vehicle=rx,
        rx_pose=Pose(q, alpha_r),
        ofdm=ofdm,
        allocation=interleaved_allocation(occupied, n_tx_panels),
        noise_variance=noise_variance,
    )
