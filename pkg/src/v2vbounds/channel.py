"""Free-space link gains, SNR calibration, and per-link information weights."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ZeroDistance
from .geometry import LinkSet, active_links
from .scene import Scene


@dataclass(frozen=True)
class LinkGain:
    """Complex amplitude gain and information weight of one active link."""

    h: complex  # dimensionless amplitude gain
    g: float  # 2 N_rx n_symbols total_power gamma_t |h|^2 / noise_variance
    snr_after_bf_db: float  # receive SNR after Rx beamforming, dB


def free_space_gain(distance: float, wavelength: float) -> complex:
    """Free-space amplitude gain wavelength/(4 pi d) with carrier phase."""
    if distance <= 0.0:
        raise ZeroDistance(f"distance must be positive, got {distance}")
    if wavelength <= 0.0:
        raise ValueError("wavelength must be positive")
    amplitude = wavelength / (4.0 * math.pi * distance)
    phase = -2.0 * math.pi * distance / wavelength
    return amplitude * cmath.exp(1j * phase)


def _unit_power_weight(scene: Scene, tx_panel: int, rx_panel: int, distance: float) -> float:
    """Information weight g of one link at total_power = 1."""
    h = free_space_gain(distance, scene.ofdm.wavelength)
    n_rx = scene.rx_vehicle.panels[rx_panel].n_elements
    gamma_t = scene.allocation.array_power_fractions[tx_panel]
    return 2.0 * n_rx * scene.ofdm.n_symbols * gamma_t * abs(h) ** 2 / scene.noise_variance


def link_gains(scene: Scene, links: LinkSet) -> list[LinkGain]:
    """Per-link complex gains and information weights, aligned with ``links``."""
    gains = []
    for link in links:
        h = free_space_gain(link.distance, scene.ofdm.wavelength)
        g = scene.ofdm.total_power * _unit_power_weight(
            scene, link.tx_panel, link.rx_panel, link.distance
        )
        n_sub = len(scene.allocation.per_array_sets[link.tx_panel])
        snr_db = 10.0 * math.log10(g / n_sub) if n_sub else -math.inf
        gains.append(LinkGain(h=h, g=g, snr_after_bf_db=snr_db))
    return gains


def calibrate_power(scene_at_reference: Scene, target_snr_db: float) -> float:
    """Transmit power that hits the target post-beamforming SNR.

    The target applies to g/|P_t| on the active link with the shortest
    distance (ties broken by smallest (t, r)) in the supplied reference
    scene. Independent of the scene's current total_power, so calibration is
    idempotent.
    """
    links = active_links(scene_at_reference)
    shortest = min(links, key=lambda lk: (lk.distance, lk.tx_panel, lk.rx_panel))
    unit_g = _unit_power_weight(
        scene_at_reference, shortest.tx_panel, shortest.rx_panel, shortest.distance
    )
    n_sub = len(scene_at_reference.allocation.per_array_sets[shortest.tx_panel])
    target_linear = 10.0 ** (target_snr_db / 10.0)
    return target_linear * n_sub / unit_g
