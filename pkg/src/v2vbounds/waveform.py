"""OFDM grid, subcarrier/power allocation, and effective baseband bandwidth.

Transmit symbols never appear explicitly: every bound depends on them only
through per-subcarrier energies, so allocations carry power fractions and the
symbol energy is reconstructed where needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptySet
from .geometry import SPEED_OF_LIGHT


@dataclass(frozen=True)
class OfdmSpec:
    """OFDM numerology plus total transmit power per symbol."""

    n_fft: int
    subcarrier_spacing: float  # Hz
    carrier_frequency: float  # Hz
    occupied: tuple[int, ...]  # signed subcarrier indices, sorted ascending
    n_symbols: int = 1
    total_power: float = 1.0  # W per OFDM symbol, all Tx arrays combined

    def __post_init__(self) -> None:
        object.__setattr__(self, "occupied", tuple(sorted(self.occupied)))
        if self.n_fft < 1:
            raise ValueError("n_fft must be >= 1")
        if self.subcarrier_spacing <= 0.0:
            raise ValueError("subcarrier_spacing must be positive")
        if self.carrier_frequency <= 0.0:
            raise ValueError("carrier_frequency must be positive")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        if self.total_power <= 0.0:
            raise ValueError("total_power must be positive")
        if len(self.occupied) > self.n_fft:
            raise ValueError("occupied set larger than the FFT grid")
        if len(set(self.occupied)) != len(self.occupied):
            raise ValueError("occupied indices must be unique")
        half = self.n_fft / 2.0
        if self.occupied and not (-half < self.occupied[0] and self.occupied[-1] < half):
            raise ValueError("occupied indices must lie strictly inside (-n_fft/2, n_fft/2)")

    @property
    def sample_rate(self) -> float:
        return self.n_fft * self.subcarrier_spacing

    @property
    def omega_c(self) -> float:
        """Carrier angular frequency, rad/s."""
        return 2.0 * math.pi * self.carrier_frequency

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    def omega(self, p: int) -> float:
        """Baseband angular frequency of subcarrier p (signed), rad/s."""
        return 2.0 * math.pi * p * self.subcarrier_spacing


@dataclass(frozen=True)
class Allocation:
    """Partition of the occupied subcarriers across Tx arrays with power fractions."""

    per_array_sets: tuple[tuple[int, ...], ...]
    array_power_fractions: tuple[float, ...]
    per_subcarrier_fractions: dict[int, float]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "per_array_sets", tuple(tuple(s) for s in self.per_array_sets)
        )
        object.__setattr__(
            self, "array_power_fractions", tuple(self.array_power_fractions)
        )
        if len(self.per_array_sets) != len(self.array_power_fractions):
            raise ValueError("one power fraction required per array")
        seen: set[int] = set()
        for subset in self.per_array_sets:
            overlap = seen.intersection(subset)
            if overlap:
                raise ValueError(f"subcarrier sets must be disjoint, overlap {sorted(overlap)}")
            seen.update(subset)
        if abs(sum(self.array_power_fractions) - 1.0) > 1e-12:
            raise ValueError("array power fractions must sum to 1")
        for frac in self.array_power_fractions:
            if not 0.0 <= frac <= 1.0:
                raise ValueError("array power fractions must lie in [0, 1]")
        for t, subset in enumerate(self.per_array_sets):
            if not subset:
                continue
            total = sum(self.per_subcarrier_fractions[p] for p in subset)
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"subcarrier fractions of array {t} must sum to 1")
        for frac in self.per_subcarrier_fractions.values():
            if not 0.0 <= frac <= 1.0:
                raise ValueError("subcarrier power fractions must lie in [0, 1]")

    @property
    def n_arrays(self) -> int:
        return len(self.per_array_sets)


def interleaved_allocation(occupied: Iterable[int], k_tx: int) -> Allocation:
    """Round-robin the occupied subcarriers over k_tx arrays, uniform power.

    Sorting the occupied indices ascending, the j-th (0-based) index goes to
    array j mod k_tx. Every array gets power fraction 1/k_tx, split uniformly
    over its own subcarriers.
    """
    indices = sorted(occupied)
    if not indices:
        raise EmptySet("occupied subcarrier set is empty")
    if k_tx < 1:
        raise ValueError("k_tx must be >= 1")
    sets: list[list[int]] = [[] for _ in range(k_tx)]
    for j, p in enumerate(indices):
        sets[j % k_tx].append(p)
    fractions = {p: 1.0 / len(subset) for subset in sets if subset for p in subset}
    return Allocation(
        per_array_sets=tuple(tuple(s) for s in sets),
        array_power_fractions=tuple(1.0 / k_tx for _ in range(k_tx)),
        per_subcarrier_fractions=fractions,
    )


def effective_bandwidth(alloc: Allocation, spec: OfdmSpec, t: int) -> float:
    """Power-weighted standard deviation of array t's subcarrier frequencies.

    Computed in centered (variance) form for numerical stability; rad/s.
    """
    subset = alloc.per_array_sets[t]
    if not subset:
        return 0.0
    weights = [alloc.per_subcarrier_fractions[p] for p in subset]
    omegas = [spec.omega(p) for p in subset]
    mean = sum(w * o for w, o in zip(weights, omegas))
    var = sum(w * (o - mean) ** 2 for w, o in zip(weights, omegas))
    return math.sqrt(max(var, 0.0))


def effective_bandwidths(alloc: Allocation, spec: OfdmSpec) -> tuple[float, ...]:
    """Effective baseband bandwidth of every Tx array."""
    return tuple(effective_bandwidth(alloc, spec, t) for t in range(alloc.n_arrays))
