"""Closed-form position/orientation information matrices and error bounds.

The 3x3 information matrix is laid out over [q_x, q_y, alpha_T]: lateral
position, longitudinal position, and Tx-vehicle heading. Each active link
contributes a rank-one delay (TDOA) term along the link direction and a
rank-one angle (AOA) term along the orthogonal direction, weighted by the
link SNR, the effective baseband bandwidth, and the squared array aperture
function. Referencing all delay differences to a common link costs a
weighted-mean correction, implemented here in covariance form so the result
is independent of the reference choice and numerically stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import LinkGain
from .errors import NoActiveLinks
from .geometry import SPEED_OF_LIGHT, ArrayPanel, LinkSet, unit_dir, unit_perp
from .scene import Scene

# Eigenvalues below RANK_EPS * lambda_max count as zero when ranking.
RANK_EPS = 1e-10


@dataclass(frozen=True, eq=False)
class FimResult:
    """3x3 position/orientation information matrix with extracted bounds.

    Position entries are 1/m^2, the orientation entry 1/rad^2. When the
    matrix is singular the bounds are +inf sentinels.
    """

    j_po: np.ndarray
    peb_lat: float
    peb_lon: float
    oeb: float
    rank: int
    singular: bool


def saaf(panel: ArrayPanel, theta_local: float) -> float:
    """Squared array aperture function of a panel at a vehicle-frame angle.

    Mean squared projection of the element offsets orthogonal to the arrival
    direction; zero for a single-element panel, and the quantity that scales
    the angle information of a link.
    """
    direction = unit_dir(theta_local)
    total = 0.0
    for element in panel.elements:
        total += (element.distance * unit_perp(element.angle).dot(direction)) ** 2
    return total / panel.n_elements


def bounds_from_fim(j_po: np.ndarray) -> FimResult:
    """Extract lateral/longitudinal/orientation bounds from a 3x3 EFIM."""
    sym = 0.5 * (j_po + j_po.T)
    eigvals = np.linalg.eigvalsh(sym)
    lam_max = float(eigvals[-1])
    if lam_max <= 0.0:
        rank = 0
    else:
        rank = int(np.sum(eigvals > RANK_EPS * lam_max))
    if rank < 3:
        return FimResult(
            j_po=sym, peb_lat=math.inf, peb_lon=math.inf, oeb=math.inf,
            rank=rank, singular=True,
        )
    inv = np.linalg.inv(sym)
    return FimResult(
        j_po=sym,
        peb_lat=math.sqrt(inv[0, 0]),
        peb_lon=math.sqrt(inv[1, 1]),
        oeb=math.sqrt(inv[2, 2]),
        rank=3,
        singular=False,
    )


def link_info_vectors(scene: Scene, links: LinkSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-link delay and angle information directions plus angle weights.

    Returns (v_tau, v_theta, aperture) where v_tau[k] spans the information
    of link k's absolute delay, v_theta[k] that of its arrival angle (both as
    gradients of c*delay and distance*angle w.r.t. [q_x, q_y, alpha_T]), and
    aperture[k] is the Rx panel's squared array aperture function at the
    link's local arrival angle.
    """
    n = len(links)
    v_tau = np.zeros((n, 3))
    v_theta = np.zeros((n, 3))
    aperture = np.zeros(n)
    tx_offsets = {}
    for k, link in enumerate(links):
        if link.tx_panel not in tx_offsets:
            tx_offsets[link.tx_panel] = scene.tx_panel_offset(link.tx_panel)
        offset = tx_offsets[link.tx_panel]
        u_r = unit_dir(link.theta_R)
        u_perp_t = unit_perp(link.theta_T)
        u_t = unit_dir(link.theta_T)
        v_tau[k] = (u_r.x, u_r.y, u_perp_t.dot(offset))
        v_theta[k] = (u_perp_t.x, u_perp_t.y, u_t.dot(offset))
        aperture[k] = saaf(scene.rx_vehicle.panels[link.rx_panel], link.theta_R_local)
    return v_tau, v_theta, aperture


def _angle_information(
    scene: Scene, links: LinkSet, gains: Sequence[LinkGain],
    v_theta: np.ndarray, aperture: np.ndarray,
) -> np.ndarray:
    omega_c = scene.ofdm.omega_c
    c2 = SPEED_OF_LIGHT**2
    weights = np.array(
        [
            gain.g * omega_c**2 * s / (c2 * link.distance**2)
            for link, gain, s in zip(links, gains, aperture)
        ]
    )
    return (v_theta * weights[:, None]).T @ v_theta


def efim_aoa_tdoa(
    scene: Scene,
    links: LinkSet,
    gains: Sequence[LinkGain],
    betas: Sequence[float],
) -> FimResult:
    """Closed-form EFIM using both arrival angles and delay differences.

    The delay part is the weighted covariance of the per-link delay vectors
    with weights g beta^2/c^2, which equals the sum of rank-one terms minus
    the common-reference coupling loss; with all betas zero it vanishes and
    the result reduces to the angle-only matrix.
    """
    if len(links) == 0:
        raise NoActiveLinks("cannot assemble an EFIM without active links")
    v_tau, v_theta, aperture = link_info_vectors(scene, links)
    c2 = SPEED_OF_LIGHT**2
    tau_weights = np.array(
        [gain.g * betas[link.tx_panel] ** 2 / c2 for link, gain in zip(links, gains)]
    )
    j = _angle_information(scene, links, gains, v_theta, aperture)
    total = tau_weights.sum()
    if total > 0.0:
        mean = (tau_weights[:, None] * v_tau).sum(axis=0) / total
        centered = v_tau - mean
        j = j + (centered * tau_weights[:, None]).T @ centered
    return bounds_from_fim(j)


def efim_aoa_only(scene: Scene, links: LinkSet, gains: Sequence[LinkGain]) -> FimResult:
    """Closed-form EFIM using arrival angles only."""
    if len(links) == 0:
        raise NoActiveLinks("cannot assemble an EFIM without active links")
    _, v_theta, aperture = link_info_vectors(scene, links)
    return bounds_from_fim(_angle_information(scene, links, gains, v_theta, aperture))
