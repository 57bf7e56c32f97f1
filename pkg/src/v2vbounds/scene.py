"""Scene container: two posed vehicles, the waveform, and the noise level."""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import PanelState, Pose, Vec2, VehicleSpec, panel_world_state
from .waveform import Allocation, OfdmSpec


@dataclass(frozen=True)
class Scene:
    """Full evaluation context for one relative placement of two vehicles.

    ``noise_variance`` is the per-antenna noise power at every Rx array; only
    the ratio total_power/noise_variance affects any bound, so it is normally
    left at 1 and the transmit power carries the calibration.
    """

    tx_vehicle: VehicleSpec
    tx_pose: Pose
    rx_vehicle: VehicleSpec
    rx_pose: Pose
    ofdm: OfdmSpec
    allocation: Allocation
    noise_variance: float = 1.0

    def __post_init__(self) -> None:
        if self.noise_variance <= 0.0:
            raise ValueError("noise_variance must be positive")
        if self.allocation.n_arrays != len(self.tx_vehicle.panels):
            raise ValueError(
                "allocation must provide one subcarrier set per Tx panel "
                f"({self.allocation.n_arrays} sets, {len(self.tx_vehicle.panels)} panels)"
            )

    @property
    def k_tx(self) -> int:
        return len(self.tx_vehicle.panels)

    @property
    def k_rx(self) -> int:
        return len(self.rx_vehicle.panels)

    def tx_panel_state(self, t: int) -> PanelState:
        return panel_world_state(self.tx_vehicle, self.tx_pose, t)

    def rx_panel_state(self, r: int) -> PanelState:
        return panel_world_state(self.rx_vehicle, self.rx_pose, r)

    def tx_panel_offset(self, t: int) -> Vec2:
        """World-frame offset of Tx panel t's centroid from the Tx reference point."""
        return self.tx_panel_state(t).centroid - self.tx_pose.position
