"""General-path information pipeline from the received-signal model.

Assembles the Fisher information of the raw channel parameters (common
timing offset, per-link delay differences, arrival angles, and complex
gains), maps it onto position/orientation through the geometric Jacobian,
and removes nuisance parameters with a Schur complement. A central-finite-
difference twin of the channel FIM serves as a numerical oracle for the
analytic derivatives.

Parameter layout for L active links (reference link first, then the
remaining links in (t, r) order): the reference link contributes
[timing offset, angle, Re gain, Im gain], every other link
[delay difference, angle, Re gain, Im gain], 4L parameters total. The
reference link is the active link of minimum delay, ties broken by (t, r).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import LinkGain, free_space_gain
from .errors import NoActiveLinks, NuisanceSingular, SubcarrierNotAllocated
from .fim_closed import FimResult, bounds_from_fim, link_info_vectors
from .geometry import SPEED_OF_LIGHT, Link, LinkSet
from .scene import Scene

AOA_TDOA = "AOA_TDOA"
AOA_ONLY = "AOA_ONLY"

# Equilibrated condition number beyond which the nuisance block is treated
# as singular.
NUISANCE_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ChannelParamVector:
    """Ordering of the channel parameters for a set of active links."""

    link_order: tuple[int, ...]  # indices into the LinkSet, reference first
    reference: int  # index into the LinkSet

    @property
    def size(self) -> int:
        return 4 * len(self.link_order)

    def columns(self, position: int) -> tuple[int, int, int, int]:
        """Column indices (delay, angle, re gain, im gain) of the link at
        ``position`` in ``link_order``; position 0 holds the timing offset in
        the delay slot."""
        base = 4 * position
        return (base, base + 1, base + 2, base + 3)


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    """Jacobian mapping channel parameters onto the estimation parameters.

    Rows are the transformed parameters with position/orientation first;
    columns follow the ChannelParamVector layout.
    """

    matrix: np.ndarray
    variant: str
    params: ChannelParamVector

    @property
    def t_po(self) -> np.ndarray:
        return self.matrix[:3]

    @property
    def t_np(self) -> np.ndarray:
        return self.matrix[3:]


def build_param_vector(links: LinkSet, reference: int | None = None) -> ChannelParamVector:
    """Parameter ordering with the reference link first."""
    if len(links) == 0:
        raise NoActiveLinks("cannot parameterize an empty link set")
    ref = links.reference_index if reference is None else reference
    if not 0 <= ref < len(links):
        raise IndexError(f"reference link index {ref} out of range")
    rest = [i for i in range(len(links)) if i != ref]
    return ChannelParamVector(link_order=(ref, *rest), reference=ref)


def _element_arrays(scene: Scene, rx_panel: int) -> tuple[np.ndarray, np.ndarray]:
    panel = scene.rx_vehicle.panels[rx_panel]
    dist = np.array([e.distance for e in panel.elements])
    ang = np.array([e.angle for e in panel.elements])
    return dist, ang


def rx_steering(scene: Scene, rx_panel: int, theta_local: float) -> np.ndarray:
    """Rx steering vector at a vehicle-frame arrival angle."""
    dist, ang = _element_arrays(scene, rx_panel)
    phase = scene.ofdm.omega_c * dist * np.cos(ang - theta_local) / SPEED_OF_LIGHT
    return np.exp(1j * phase)


def steering_derivative_diag(scene: Scene, rx_panel: int, theta_local: float) -> np.ndarray:
    """Diagonal of the operator mapping the mean to its angle derivative."""
    dist, ang = _element_arrays(scene, rx_panel)
    # d/dtheta of the per-element phase d_i cos(psi_i - theta) * omega_c / c
    return 1j * scene.ofdm.omega_c * dist * np.sin(ang - theta_local) / SPEED_OF_LIGHT


def _symbol_amplitude(scene: Scene, tx_panel: int, p: int) -> float:
    gamma_t = scene.allocation.array_power_fractions[tx_panel]
    gamma_tp = scene.allocation.per_subcarrier_fractions[p]
    return math.sqrt(gamma_t * gamma_tp * scene.ofdm.total_power)


def mean_vector(scene: Scene, links: LinkSet, link: Link, b: int, p: int) -> np.ndarray:
    """Noiseless received vector at one Rx panel, symbol, and subcarrier.

    ``b`` is accepted for interface completeness; the pilot symbols carry
    identical energy on every OFDM symbol so the mean does not depend on it.
    """
    if p not in scene.allocation.per_array_sets[link.tx_panel]:
        raise SubcarrierNotAllocated(
            f"subcarrier {p} is not allocated to Tx array {link.tx_panel}"
        )
    if not 1 <= b <= scene.ofdm.n_symbols:
        raise IndexError(f"symbol index {b} out of range 1..{scene.ofdm.n_symbols}")
    delta_tau = link.delay - links[links.reference_index].delay
    h = free_space_gain(link.distance, scene.ofdm.wavelength)
    a = rx_steering(scene, link.rx_panel, link.theta_R_local)
    x = _symbol_amplitude(scene, link.tx_panel, p)
    return cmath.exp(-1j * scene.ofdm.omega(p) * delta_tau) * h * x * a


def _link_mean_block(
    scene: Scene, links: LinkSet, link: Link, h: complex
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean matrix over (subcarrier, element) plus omega and D arrays."""
    subset = scene.allocation.per_array_sets[link.tx_panel]
    p_arr = np.array(subset)
    omega = 2.0 * math.pi * scene.ofdm.subcarrier_spacing * p_arr
    gamma_t = scene.allocation.array_power_fractions[link.tx_panel]
    fracs = np.array([scene.allocation.per_subcarrier_fractions[p] for p in subset])
    amps = np.sqrt(gamma_t * fracs * scene.ofdm.total_power)
    delta_tau = link.delay - links[links.reference_index].delay
    a = rx_steering(scene, link.rx_panel, link.theta_R_local)
    d_diag = steering_derivative_diag(scene, link.rx_panel, link.theta_R_local)
    mean = (amps * np.exp(-1j * omega * delta_tau))[:, None] * (h * a)[None, :]
    return mean, omega, d_diag


def fim_channel(
    scene: Scene,
    links: LinkSet,
    gains: Sequence[LinkGain],
    reference: int | None = None,
) -> np.ndarray:
    """Analytic Fisher information of the channel parameters (4L x 4L).

    Links at different Rx panels or on disjoint subcarrier sets only couple
    through the shared timing offset, so the matrix is assembled link by
    link with the timing-offset row accumulating every link's delay
    derivative. ``reference`` forces a reference link (default: minimum
    delay).
    """
    if len(links) == 0:
        raise NoActiveLinks("cannot assemble a FIM without active links")
    params = build_param_vector(links, reference)
    size = params.size
    j = np.zeros((size, size))
    scale = 2.0 * scene.ofdm.n_symbols / scene.noise_variance
    for position, link_index in enumerate(params.link_order):
        link = links[link_index]
        mean, omega, d_diag = _link_mean_block(scene, links, link, gains[link_index].h)
        h = gains[link_index].h
        derivs = (
            -1j * omega[:, None] * mean,  # timing offset / delay difference
            d_diag[None, :] * mean,  # arrival angle
            mean / h,  # Re gain
            1j * mean / h,  # Im gain
        )
        block = np.empty((4, 4))
        for a_idx in range(4):
            for b_idx in range(a_idx, 4):
                val = scale * float(
                    np.sum(np.conj(derivs[a_idx]) * derivs[b_idx]).real
                )
                block[a_idx, b_idx] = val
                block[b_idx, a_idx] = val
        cols = params.columns(position)
        j[np.ix_(cols, cols)] += block
        if position > 0:
            # The timing offset shares the delay derivative on this link's
            # subcarriers.
            j[0, list(cols)] += block[0]
            j[list(cols), 0] += block[0]
            j[0, 0] += block[0, 0]
    return 0.5 * (j + j.T)


def _parameter_steps(
    scene: Scene, links: LinkSet, params: ChannelParamVector,
    gains: Sequence[LinkGain], step: float,
) -> np.ndarray:
    """Per-parameter central-difference steps scaled to each parameter."""
    steps = np.empty(params.size)
    tau_scale = 1.0 / scene.ofdm.omega_c
    for position, link_index in enumerate(params.link_order):
        cols = params.columns(position)
        h_scale = abs(gains[link_index].h)
        steps[cols[0]] = step * tau_scale
        steps[cols[1]] = step
        steps[cols[2]] = step * h_scale
        steps[cols[3]] = step * h_scale
    return steps


def _stacked_mean(
    scene: Scene, links: LinkSet, params: ChannelParamVector, phi: np.ndarray
) -> np.ndarray:
    """Concatenated noise-scaled means over all links as a function of phi."""
    tau_s = phi[0]
    pieces = []
    weight = math.sqrt(2.0 * scene.ofdm.n_symbols / scene.noise_variance)
    for position, link_index in enumerate(params.link_order):
        link = links[link_index]
        cols = params.columns(position)
        delay = tau_s + (phi[cols[0]] if position > 0 else 0.0)
        theta = phi[cols[1]]
        h = phi[cols[2]] + 1j * phi[cols[3]]
        subset = scene.allocation.per_array_sets[link.tx_panel]
        p_arr = np.array(subset)
        omega = 2.0 * math.pi * scene.ofdm.subcarrier_spacing * p_arr
        gamma_t = scene.allocation.array_power_fractions[link.tx_panel]
        fracs = np.array([scene.allocation.per_subcarrier_fractions[p] for p in subset])
        amps = np.sqrt(gamma_t * fracs * scene.ofdm.total_power)
        a = rx_steering(scene, link.rx_panel, theta)
        mean = (amps * np.exp(-1j * omega * delay))[:, None] * (h * a)[None, :]
        pieces.append(weight * mean.ravel())
    return np.concatenate(pieces)


def channel_param_values(
    scene: Scene, links: LinkSet, gains: Sequence[LinkGain],
    params: ChannelParamVector | None = None,
) -> np.ndarray:
    """Actual channel-parameter values of a scene in vector layout."""
    if params is None:
        params = build_param_vector(links)
    phi = np.zeros(params.size)
    ref_delay = links[params.reference].delay
    for position, link_index in enumerate(params.link_order):
        link = links[link_index]
        cols = params.columns(position)
        phi[cols[0]] = 0.0 if position == 0 else link.delay - ref_delay
        phi[cols[1]] = link.theta_R_local
        phi[cols[2]] = gains[link_index].h.real
        phi[cols[3]] = gains[link_index].h.imag
    return phi


def fim_channel_fd(
    scene: Scene,
    links: LinkSet,
    gains: Sequence[LinkGain],
    step: float = 1e-7,
    reference: int | None = None,
) -> np.ndarray:
    """Central-finite-difference twin of :func:`fim_channel`."""
    if step <= 0.0:
        raise ValueError("step must be positive")
    params = build_param_vector(links, reference)
    phi0 = channel_param_values(scene, links, gains, params)
    steps = _parameter_steps(scene, links, params, gains, step)
    columns = []
    for i in range(params.size):
        delta = np.zeros_like(phi0)
        delta[i] = steps[i]
        plus = _stacked_mean(scene, links, params, phi0 + delta)
        minus = _stacked_mean(scene, links, params, phi0 - delta)
        columns.append((plus - minus) / (2.0 * steps[i]))
    grad = np.column_stack(columns)
    return (grad.conj().T @ grad).real


def transform_matrix(
    scene: Scene, links: LinkSet, variant: str, reference: int | None = None
) -> TransformMatrix:
    """Geometric Jacobian from channel parameters to estimation parameters.

    For AOA_TDOA the estimation vector is [q_x, q_y, alpha_T, timing offset,
    gains...]; delay differences and angles both carry geometric rows. For
    AOA_ONLY the delay differences are kept as free nuisance parameters, so
    only the angles carry geometry.
    """
    if variant not in (AOA_TDOA, AOA_ONLY):
        raise ValueError(f"unknown variant {variant!r}")
    params = build_param_vector(links, reference)
    v_tau, v_theta, _ = link_info_vectors(scene, links)
    n_links = len(links)
    c = SPEED_OF_LIGHT

    if variant == AOA_TDOA:
        n_rows = 4 + 2 * n_links
    else:
        n_rows = 3 + 3 * n_links
    t = np.zeros((n_rows, params.size))

    # Shared rows: position/orientation (0..2) and the timing offset (3),
    # which is the delay-slot parameter of the reference link.
    t[3, 0] = 1.0
    nuisance_row = 4
    ref = params.reference
    for position, link_index in enumerate(params.link_order):
        cols = params.columns(position)
        # Angle columns carry geometry in both variants.
        t[0:3, cols[1]] = v_theta[link_index] / links[link_index].distance
        if position > 0:
            if variant == AOA_TDOA:
                t[0:3, cols[0]] = (v_tau[link_index] - v_tau[ref]) / c
            else:
                t[nuisance_row, cols[0]] = 1.0
                nuisance_row += 1
        t[nuisance_row, cols[2]] = 1.0
        t[nuisance_row + 1, cols[3]] = 1.0
        nuisance_row += 2
    return TransformMatrix(matrix=t, variant=variant, params=params)


def efim_schur(j_phi: np.ndarray, t_matrix: TransformMatrix) -> FimResult:
    """Schur-complement EFIM over position and orientation.

    The nuisance information block is Jacobi-equilibrated before the
    condition check so that the mixed parameter units (seconds, radians,
    linear gains) do not masquerade as degeneracy; a genuinely singular
    block raises NuisanceSingular rather than being pseudo-inverted.
    """
    t_po = t_matrix.t_po
    t_np = t_matrix.t_np
    a = t_po @ j_phi @ t_po.T
    b = t_po @ j_phi @ t_np.T
    n = t_np @ j_phi @ t_np.T
    n = 0.5 * (n + n.T)
    diag = np.diag(n).copy()
    if np.any(diag <= 0.0):
        raise NuisanceSingular("nuisance block has a non-positive diagonal entry")
    scale = np.sqrt(diag)
    n_eq = n / np.outer(scale, scale)
    eigvals = np.linalg.eigvalsh(n_eq)
    if eigvals[0] <= 0.0 or eigvals[-1] / eigvals[0] > NUISANCE_COND_LIMIT:
        cond = math.inf if eigvals[0] <= 0.0 else eigvals[-1] / eigvals[0]
        raise NuisanceSingular(
            f"nuisance block condition {cond:.3e} exceeds the invertibility limit"
        )
    b_eq = b / scale[None, :]
    correction = b_eq @ np.linalg.solve(n_eq, b_eq.T)
    j_po = a - correction
    return bounds_from_fim(0.5 * (j_po + j_po.T))


def efim_general(
    scene: Scene,
    links: LinkSet,
    gains: Sequence[LinkGain],
    variant: str,
    reference: int | None = None,
) -> FimResult:
    """Full general-path EFIM: channel FIM, transform, Schur complement."""
    j_phi = fim_channel(scene, links, gains, reference)
    t = transform_matrix(scene, links, variant, reference)
    return efim_schur(j_phi, t)
