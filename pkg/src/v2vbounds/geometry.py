"""Vehicle, panel, and link geometry for two-vehicle antenna-array positioning.

Conventions used throughout the package:

* World frame: x is the lateral (across-lane) axis, y the longitudinal
  (along-lane) axis. Angles are measured counterclockwise from +x and are
  stored wrapped to (-pi, pi].
* Vehicle frame: the vehicle's long axis is the frame's y axis, so a vehicle
  driving "up" the road has orientation 0. Panel mount angles and element
  offset angles are expressed in this frame.
* A corner panel's field of view covers 270 degrees; the blocked 90-degree
  sector is the wedge the rectangular body subtends at that corner (the
  wedge between the two body edges meeting there). Directions exactly on the
  wedge boundary count as blocked, which makes links grazing along a body
  side invisible to the panels on that side.

All types are immutable after construction and all operations are pure
functions, so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Sequence

from .errors import CoincidentPanels, InvalidCount, NoActiveLinks

if TYPE_CHECKING:  # pragma: no cover
    from .scene import Scene

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Directions within this tolerance of a blocked-sector edge count as blocked.
_SECTOR_EDGE_TOL = 1e-12


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, math.tau)
    if wrapped <= -math.pi:
        wrapped += math.tau
    return wrapped


@dataclass(frozen=True)
class Vec2:
    """2-D point or direction in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, scale: float) -> "Vec2":
        return Vec2(self.x * scale, self.y * scale)

    __rmul__ = __mul__

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def angle(self) -> float:
        """Four-quadrant direction angle atan2(y, x)."""
        return math.atan2(self.y, self.x)

    def rotated(self, angle: float) -> "Vec2":
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def unit_dir(psi: float) -> Vec2:
    """Unit vector [cos(psi), sin(psi)]."""
    return Vec2(math.cos(psi), math.sin(psi))


def unit_perp(psi: float) -> Vec2:
    """Unit vector orthogonal to unit_dir(psi), equal to unit_dir(psi - pi/2)."""
    return unit_dir(psi - math.pi / 2.0)


@dataclass(frozen=True)
class Pose:
    """Position of a vehicle's reference point plus its heading."""

    position: Vec2
    orientation: float  # rad, normalized to (-pi, pi]

    def __post_init__(self) -> None:
        if not math.isfinite(self.orientation):
            raise ValueError("orientation must be finite")
        object.__setattr__(self, "orientation", wrap_angle(self.orientation))


@dataclass(frozen=True)
class ElementOffset:
    """Antenna element offset from the array centroid, in the vehicle frame."""

    distance: float  # m
    angle: float  # rad

    def __post_init__(self) -> None:
        if not (math.isfinite(self.distance) and math.isfinite(self.angle)):
            raise ValueError("element offset must be finite")
        if self.distance < 0.0:
            raise ValueError(f"element offset distance must be >= 0, got {self.distance}")
        object.__setattr__(self, "angle", wrap_angle(self.angle))


@dataclass(frozen=True)
class ArrayPanel:
    """One antenna array: mount point, element layout, and field of view.

    Element offsets are expressed about the array centroid, so they must sum
    to the zero vector. ``fov_blocked_center``/``fov_blocked_halfwidth``
    describe the body-blocked sector in the vehicle frame.
    """

    mount_distance: float  # m from vehicle reference point
    mount_angle: float  # rad, vehicle frame
    elements: tuple[ElementOffset, ...]
    fov_blocked_center: float  # rad, vehicle frame
    fov_blocked_halfwidth: float  # rad

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise InvalidCount("panel must have at least one element")
        if not 0.0 <= self.fov_blocked_halfwidth <= math.pi:
            raise ValueError("fov_blocked_halfwidth must lie in [0, pi]")
        cx = sum(e.distance * math.cos(e.angle) for e in self.elements) / len(self.elements)
        cy = sum(e.distance * math.sin(e.angle) for e in self.elements) / len(self.elements)
        if math.hypot(cx, cy) > 1e-12:
            raise ValueError(
                "element offsets must be centered on the centroid "
                f"(residual {math.hypot(cx, cy):.3e} m)"
            )
        object.__setattr__(self, "mount_angle", wrap_angle(self.mount_angle))
        object.__setattr__(self, "fov_blocked_center", wrap_angle(self.fov_blocked_center))

    @property
    def n_elements(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class VehicleSpec:
    """Vehicle body dimensions and its mounted antenna panels."""

    length: float  # m, along the vehicle-frame y axis
    width: float  # m
    panels: tuple[ArrayPanel, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "panels", tuple(self.panels))
        if self.length <= 0.0 or self.width <= 0.0:
            raise ValueError("vehicle length and width must be positive")
        if not self.panels:
            raise InvalidCount("vehicle must carry at least one panel")


@dataclass(frozen=True)
class Link:
    """Geometry of one Tx-panel-to-Rx-panel propagation path."""

    tx_panel: int
    rx_panel: int
    distance: float  # m
    theta_R: float  # world-frame direction from Tx panel toward Rx panel
    theta_T: float  # theta_R + pi, wrapped
    theta_R_local: float  # theta_R - alpha_R, wrapped
    theta_T_local: float  # theta_T - alpha_T, wrapped
    delay: float  # s


@dataclass(frozen=True)
class LinkSet:
    """Active LOS links of a scene, ordered by (tx_panel, rx_panel)."""

    links: tuple[Link, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "links", tuple(self.links))

    def __len__(self) -> int:
        return len(self.links)

    def __iter__(self) -> Iterator[Link]:
        return iter(self.links)

    def __getitem__(self, index: int) -> Link:
        return self.links[index]

    @property
    def reference_index(self) -> int:
        """Index of the reference link: minimum delay, ties by (t, r)."""
        return min(
            range(len(self.links)),
            key=lambda i: (self.links[i].delay, self.links[i].tx_panel, self.links[i].rx_panel),
        )


@dataclass(frozen=True)
class PanelState:
    """A panel resolved into the world frame."""

    centroid: Vec2
    elements: tuple[Vec2, ...]
    blocked_center: float  # rad, world frame
    blocked_halfwidth: float  # rad


@dataclass(frozen=True)
class BodyRect:
    """Oriented vehicle footprint used for body-blockage tests."""

    pose: Pose
    length: float
    width: float

    def _to_local(self, p: Vec2) -> Vec2:
        return (p - self.pose.position).rotated(-self.pose.orientation)

    def segment_crosses_interior(self, a: Vec2, b: Vec2) -> bool:
        """True iff the open segment a-b meets the open rectangle interior.

        Segments running along an edge or touching only a corner do not
        count as crossing.
        """
        pa = self._to_local(a)
        pb = self._to_local(b)
        hw, hl = self.width / 2.0, self.length / 2.0
        # Liang-Barsky clip of the segment against the closed rectangle.
        t0, t1 = 0.0, 1.0
        for start, delta, lo, hi in (
            (pa.x, pb.x - pa.x, -hw, hw),
            (pa.y, pb.y - pa.y, -hl, hl),
        ):
            if delta == 0.0:
                if start < lo or start > hi:
                    return False
                continue
            ta = (lo - start) / delta
            tb = (hi - start) / delta
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
            if t0 >= t1:
                return False
        # A positive-length clipped interval may still lie on the boundary;
        # probe its midpoint against the open rectangle.
        tm = 0.5 * (t0 + t1)
        mx = pa.x + tm * (pb.x - pa.x)
        my = pa.y + tm * (pb.y - pa.y)
        eps = 1e-12
        return (-hw + eps < mx < hw - eps) and (-hl + eps < my < hl - eps)


def vehicle_rect(vehicle: VehicleSpec, pose: Pose) -> BodyRect:
    return BodyRect(pose=pose, length=vehicle.length, width=vehicle.width)


def build_conformal_panel(
    n_elements: int,
    carrier_wavelength: float,
    panel_index: int,
    mount_distance: float = 0.0,
    mount_angle: float = 0.0,
) -> ArrayPanel:
    """Quarter-circle conformal array for one vehicle corner.

    For ``n_elements >= 2`` the elements sit on a circular arc of radius
    ``rho = wavelength / (4 sin(pi / (4 (n - 1))))`` (half-wavelength chord
    spacing) at angles ``pi (i - 1) / (2 (n - 1)) + (pi/2)(panel_index - 1)``,
    recentered so the offsets are expressed about their centroid. A single
    element sits exactly at the centroid. ``panel_index`` runs 1..4
    counterclockwise starting at the (+x, +y) corner; the blocked sector is
    the quadrant facing the vehicle body.
    """
    if n_elements < 1:
        raise InvalidCount(f"n_elements must be >= 1, got {n_elements}")
    if carrier_wavelength <= 0.0:
        raise ValueError("carrier_wavelength must be positive")
    if panel_index not in (1, 2, 3, 4):
        raise ValueError(f"panel_index must be in 1..4, got {panel_index}")

    sector_offset = (math.pi / 2.0) * (panel_index - 1)
    if n_elements == 1:
        offsets = (ElementOffset(0.0, 0.0),)
    else:
        rho = carrier_wavelength / (4.0 * math.sin(math.pi / (4.0 * (n_elements - 1))))
        angles = [
            math.pi * i / (2.0 * (n_elements - 1)) + sector_offset for i in range(n_elements)
        ]
        xs = [rho * math.cos(a) for a in angles]
        ys = [rho * math.sin(a) for a in angles]
        cx = sum(xs) / n_elements
        cy = sum(ys) / n_elements
        offsets = tuple(
            ElementOffset(math.hypot(x - cx, y - cy), math.atan2(y - cy, x - cx))
            for x, y in zip(xs, ys)
        )

    blocked_center = wrap_angle(math.pi / 4.0 + sector_offset + math.pi)
    return ArrayPanel(
        mount_distance=mount_distance,
        mount_angle=mount_angle,
        elements=offsets,
        fov_blocked_center=blocked_center,
        fov_blocked_halfwidth=math.pi / 4.0,
    )


def build_cornered_vehicle(
    length: float,
    width: float,
    n_elements: int,
    carrier_wavelength: float,
) -> VehicleSpec:
    """Vehicle with one conformal panel at each corner.

    Corners are numbered counterclockwise: 1 = (+w/2, +l/2), 2 = (-w/2, +l/2),
    3 = (-w/2, -l/2), 4 = (+w/2, -l/2), with +y the driving direction.
    """
    corners = (
        (width / 2.0, length / 2.0),
        (-width / 2.0, length / 2.0),
        (-width / 2.0, -length / 2.0),
        (width / 2.0, -length / 2.0),
    )
    panels = tuple(
        build_conformal_panel(
            n_elements,
            carrier_wavelength,
            panel_index=k + 1,
            mount_distance=math.hypot(cx, cy),
            mount_angle=math.atan2(cy, cx),
        )
        for k, (cx, cy) in enumerate(corners)
    )
    return VehicleSpec(length=length, width=width, panels=panels)


def panel_world_state(vehicle: VehicleSpec, pose: Pose, panel_index: int) -> PanelState:
    """Resolve a panel (0-based index) into world-frame centroid and elements."""
    panel = vehicle.panels[panel_index]
    alpha = pose.orientation
    centroid = pose.position + panel.mount_distance * unit_dir(panel.mount_angle + alpha)
    elements = tuple(
        centroid + e.distance * unit_dir(e.angle + alpha) for e in panel.elements
    )
    return PanelState(
        centroid=centroid,
        elements=elements,
        blocked_center=wrap_angle(panel.fov_blocked_center + alpha),
        blocked_halfwidth=panel.fov_blocked_halfwidth,
    )


def _in_blocked_sector(direction: float, center: float, halfwidth: float) -> bool:
    return abs(wrap_angle(direction - center)) <= halfwidth + _SECTOR_EDGE_TOL


def los_visible(
    tx_panel_state: PanelState,
    rx_panel_state: PanelState,
    tx_vehicle_rect: BodyRect,
    rx_vehicle_rect: BodyRect,
) -> bool:
    """True iff the Tx panel has line of sight to the Rx panel.

    Requires (a) the direction from the Tx panel toward the Rx panel to fall
    outside the Tx panel's blocked sector, (b) the reverse direction to fall
    outside the Rx panel's blocked sector, and (c) the open segment between
    the centroids to miss both vehicle-body interiors. Coincident centroids
    have no defined direction and are reported as not visible.
    """
    offset = rx_panel_state.centroid - tx_panel_state.centroid
    if offset.norm() < 1e-9:
        return False
    towards_rx = offset.angle()
    towards_tx = wrap_angle(towards_rx + math.pi)
    if _in_blocked_sector(
        towards_rx, tx_panel_state.blocked_center, tx_panel_state.blocked_halfwidth
    ):
        return False
    if _in_blocked_sector(
        towards_tx, rx_panel_state.blocked_center, rx_panel_state.blocked_halfwidth
    ):
        return False
    if tx_vehicle_rect.segment_crosses_interior(tx_panel_state.centroid, rx_panel_state.centroid):
        return False
    if rx_vehicle_rect.segment_crosses_interior(tx_panel_state.centroid, rx_panel_state.centroid):
        return False
    return True


def link_geometry(
    tx_centroid: Vec2,
    rx_centroid: Vec2,
    alpha_T: float,
    alpha_R: float,
    tx_panel: int = 0,
    rx_panel: int = 0,
) -> Link:
    """Distances, world/local angles, and delay for one panel pair."""
    offset = rx_centroid - tx_centroid
    distance = offset.norm()
    if distance < 1e-9:
        raise CoincidentPanels(
            f"panels ({tx_panel}, {rx_panel}) coincide: separation {distance:.3e} m"
        )
    theta_r = offset.angle()
    theta_t = wrap_angle(theta_r + math.pi)
    return Link(
        tx_panel=tx_panel,
        rx_panel=rx_panel,
        distance=distance,
        theta_R=theta_r,
        theta_T=theta_t,
        theta_R_local=wrap_angle(theta_r - alpha_R),
        theta_T_local=wrap_angle(theta_t - alpha_T),
        delay=distance / SPEED_OF_LIGHT,
    )


def active_links(scene: "Scene") -> LinkSet:
    """Enumerate all panel pairs and keep the LOS-visible ones.

    Output is ordered by (tx_panel, rx_panel). Raises NoActiveLinks when no
    pair is visible.
    """
    tx_states = [
        panel_world_state(scene.tx_vehicle, scene.tx_pose, t)
        for t in range(len(scene.tx_vehicle.panels))
    ]
    rx_states = [
        panel_world_state(scene.rx_vehicle, scene.rx_pose, r)
        for r in range(len(scene.rx_vehicle.panels))
    ]
    tx_rect = vehicle_rect(scene.tx_vehicle, scene.tx_pose)
    rx_rect = vehicle_rect(scene.rx_vehicle, scene.rx_pose)

    links = []
    for t, tx_state in enumerate(tx_states):
        for r, rx_state in enumerate(rx_states):
            if los_visible(tx_state, rx_state, tx_rect, rx_rect):
                links.append(
                    link_geometry(
                        tx_state.centroid,
                        rx_state.centroid,
                        scene.tx_pose.orientation,
                        scene.rx_pose.orientation,
                        tx_panel=t,
                        rx_panel=r,
                    )
                )
    if not links:
        raise NoActiveLinks("no Tx-Rx panel pair has line of sight")
    return LinkSet(links=tuple(links))


def panels_with_links(links: LinkSet | Sequence[Link]) -> tuple[set[int], set[int]]:
    """Sets of Tx and Rx panel indices that appear in at least one link."""
    tx = {link.tx_panel for link in links}
    rx = {link.rx_panel for link in links}
    return tx, rx
