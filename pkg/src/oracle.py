"""
Semi-analytic square-well oracle
A square packet on a square well, evolved exactly as a superposition of
stationary scattering states along a momentum contour that passes above the
bound-state poles.
"""
import logging
import math
from typing import List, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from src.errors import ConfigurationError, NotConvergedError, UnsupportedShapeError
from src.state import BoundState, ComplexField1D, ContourSpec, Grid1D, PacketSpec, SquareWellStates

logger = logging.getLogger(__name__)

SELF_ESTIMATE_LIMIT = 0.005
MAX_NODES = 2 ** 20
PANEL_ORDER = 32
CHUNK_ELEMENTS = 2 ** 22


def square_well_states(depth: float, half_width: float, mass: float) -> SquareWellStates:
    """
    Bound-state ladder of the square well -depth on |x| < half_width.

    With z = p' a and z0 = a sqrt(2 m depth), even states solve
    z sin z = sqrt(z0^2 - z^2) cos z and odd states z cos z = -sqrt(z0^2 - z^2) sin z.
    Roots are bracketed by a sign-change scan on (0, z0] and refined with brentq.
    """
    states = SquareWellStates(depth=depth, half_width=half_width, mass=mass)
    if depth == 0:
        return states
    z0 = half_width * math.sqrt(2.0 * mass * depth)

    def even(z: float) -> float:
        return z * math.sin(z) - math.sqrt(max(z0 * z0 - z * z, 0.0)) * math.cos(z)

    def odd(z: float) -> float:
        return z * math.cos(z) + math.sqrt(max(z0 * z0 - z * z, 0.0)) * math.sin(z)

    scan = np.linspace(1e-9 * z0, z0, max(2000, int(400 * z0)))
    found: List[BoundState] = []
    for parity, f in (("even", even), ("odd", odd)):
        values = np.array([f(z) for z in scan])
        for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
            z = brentq(f, scan[i], scan[i + 1], xtol=1e-14, rtol=4.0 * np.finfo(float).eps)
            kappa = math.sqrt(max(z0 * z0 - z * z, 0.0)) / half_width
            found.append(BoundState(kappa=kappa, energy=-kappa * kappa / (2.0 * mass), parity=parity))

    found.sort(key=lambda s: s.energy)
    expected = int(math.floor(1.0 + 2.0 * z0 / math.pi))
    if len(found) != expected:
        logger.warning("found %d bound states, level count formula gives %d", len(found), expected)
    logger.debug("square well z0=%.4f: %d bound states", z0, len(found))
    states.bound_states = found
    return states


def interior_momentum(states: SquareWellStates, p: np.ndarray) -> np.ndarray:
    return np.sqrt(np.asarray(p, dtype=np.complex128) ** 2 + 2.0 * states.mass * states.depth)


def _at_threshold_resonance(states: SquareWellStates) -> bool:
    z0 = states.half_width * math.sqrt(2.0 * states.mass * states.depth)
    ratio = z0 / (math.pi / 2.0)
    return states.depth > 0 and abs(ratio - round(ratio)) < 1e-9


def scattering_coefficients(
    states: SquareWellStates, p: Union[complex, np.ndarray]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Matching coefficients (R, A, B, T) of the left-incident stationary state.

    p may be complex; the four continuity conditions at x = -a and x = a are
    solved as a batch of 4x4 systems. At p = 0 the limits R = -1, T = 0 are used.
    """
    p_arr = np.atleast_1d(np.asarray(p, dtype=np.complex128))
    a = states.half_width
    zero = np.abs(p_arr) < 1e-12
    if np.any(zero) and _at_threshold_resonance(states):
        logger.warning("well sits at a threshold resonance; p=0 replaced by p=1e-8")
        p_arr = np.where(zero, 1e-8, p_arr)
        zero = np.zeros_like(zero)
    solve_p = np.where(zero, 1.0, p_arr)
    pp = interior_momentum(states, solve_p)

    out_plus = np.exp(1j * solve_p * a)
    out_minus = np.exp(-1j * solve_p * a)
    in_plus = np.exp(1j * pp * a)
    in_minus = np.exp(-1j * pp * a)
    nil = np.zeros_like(solve_p)

    matrix = np.stack(
        [
            np.stack([-out_plus, in_minus, in_plus, nil], axis=-1),
            np.stack([solve_p * out_plus, pp * in_minus, -pp * in_plus, nil], axis=-1),
            np.stack([nil, in_plus, in_minus, -out_plus], axis=-1),
            np.stack([nil, pp * in_plus, -pp * in_minus, -solve_p * out_plus], axis=-1),
        ],
        axis=-2,
    )
    rhs = np.stack([out_minus, solve_p * out_minus, nil, nil], axis=-1)
    coefficients = np.linalg.solve(matrix, rhs[..., np.newaxis])[..., 0]

    coefficients[zero] = np.array([-1.0, 0.0, 0.0, 0.0])
    r, amp_a, amp_b, t = (coefficients[:, i] for i in range(4))
    if np.ndim(p) == 0:
        return r[0], amp_a[0], amp_b[0], t[0]
    return r, amp_a, amp_b, t


def _stationary_matrix(
    states: SquareWellStates,
    p: np.ndarray,
    coefficients: Tuple[np.ndarray, ...],
    x: np.ndarray,
    scattered_only: bool = False,
) -> np.ndarray:
    """Phi(x, p) (or Phi - e^{ipx}) with one row per x and one column per p"""
    r, amp_a, amp_b, t = coefficients
    a = states.half_width
    pp = interior_momentum(states, p)
    xs = x[:, np.newaxis]

    # each branch is only valid on its own side; off-side overflow is discarded
    with np.errstate(over="ignore", invalid="ignore"):
        incident = np.exp(1j * xs * p)
        left = r * np.exp(-1j * xs * p)
        inside = amp_a * np.exp(1j * xs * pp) + amp_b * np.exp(-1j * xs * pp) - incident
        right = (t - 1.0) * incident
        scattered = np.where(xs < -a, left, np.where(xs > a, right, inside))
        if not scattered_only:
            scattered = scattered + incident
    return scattered


def stationary_state(
    states: SquareWellStates, p: Union[complex, np.ndarray], x: Union[float, np.ndarray]
) -> Union[complex, np.ndarray]:
    """
    Left-incident scattering eigenfunction at energy p^2 / 2m.

    e^{ipx} + R e^{-ipx} left of the well, A e^{ip'x} + B e^{-ip'x} inside and
    T e^{ipx} to the right. p and x broadcast against each other.
    """
    p_b, x_b = np.broadcast_arrays(np.asarray(p, dtype=np.complex128), np.asarray(x, dtype=float))
    flat_p = p_b.ravel()
    coefficients = scattering_coefficients(states, flat_p)
    flat_x = x_b.ravel()
    values = np.empty(flat_p.size, dtype=np.complex128)
    for i in range(flat_p.size):
        single = tuple(c[i:i + 1] for c in coefficients)
        values[i] = _stationary_matrix(states, flat_p[i:i + 1], single, flat_x[i:i + 1])[0, 0]
    if p_b.ndim == 0:
        return complex(values[0])
    return values.reshape(p_b.shape)


def transmission_resonances(states: SquareWellStates, p_max: float) -> List[float]:
    """Real momenta in (0, p_max] where 2 p' a is a multiple of pi, so |T| = 1"""
    resonances = []
    n = 1
    while True:
        p_inner = n * math.pi / (2.0 * states.half_width)
        p_sq = p_inner * p_inner - 2.0 * states.mass * states.depth
        if p_sq > 0:
            p = math.sqrt(p_sq)
            if p > p_max:
                break
            resonances.append(p)
        n += 1
    return resonances


def check_square_packet(packet: PacketSpec) -> None:
    if packet.shape != "square":
        raise UnsupportedShapeError(
            f"the contour oracle needs a square packet, got '{packet.shape}'", key="packet.shape"
        )


def packet_fourier_amplitude(packet: PacketSpec, p: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """
    Unitary Fourier amplitude of the normalized square packet.

    a(p) = C' e^{i(q-p)x0} sin((p-q)d)/(p-q) with C' = sqrt(2/pi) C e^{-iq x0}
    and C = 1/sqrt(2d); the p = q value is C' d.
    """
    check_square_packet(packet)
    d = packet.width
    c_prime = math.sqrt(2.0 / math.pi) / math.sqrt(2.0 * d) * np.exp(-1j * packet.q * packet.x0)
    shift = np.asarray(p, dtype=np.complex128) - packet.q
    # d * sinc(shift d / pi) == sin(shift d) / shift
    values = c_prime * np.exp(-1j * shift * packet.x0) * d * np.sinc(shift * d / np.pi)
    if np.ndim(p) == 0:
        return complex(values)
    return values


def gauss_legendre_panels(start: complex, stop: complex, n_nodes: int, order: int = PANEL_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on the straight segment start -> stop"""
    n_panels = max(1, int(math.ceil(n_nodes / order)))
    xi, wi = np.polynomial.legendre.leggauss(order)
    edges = start + (stop - start) * np.linspace(0.0, 1.0, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, np.newaxis] + half[:, np.newaxis] * xi[np.newaxis, :]).ravel()
    weights = (half[:, np.newaxis] * wi[np.newaxis, :]).ravel()
    return nodes, weights


def default_contour(states: SquareWellStates, packet: PacketSpec, t: float) -> ContourSpec:
    """
    p_max = q + 30/d; detour one unit above the deepest pole.

    The detour half-width keeps p_det t / m below half the gap between the
    packet and the well so the lifted integrand stays bounded.
    """
    kappa_max = max((s.kappa for s in states.bound_states), default=0.0)
    gap = abs(packet.x0) - packet.width - states.half_width
    half_width = 0.25
    if t > 0 and gap > 0:
        half_width = min(half_width, 0.5 * states.mass * gap / t)
    return ContourSpec(
        p_max=packet.q + 30.0 / packet.width,
        detour_height=kappa_max + 1.0,
        detour_half_width=half_width,
    )


def _check_contour(states: SquareWellStates, packet: PacketSpec, contour: ContourSpec) -> None:
    if contour.p_max <= packet.q + 10.0 / packet.width:
        raise ConfigurationError(
            f"p_max={contour.p_max} does not cover the packet momenta (needs > q + 10/d)", key="oracle.p_max"
        )
    kappa_max = max((s.kappa for s in states.bound_states), default=0.0)
    if contour.detour_height <= kappa_max:
        raise ConfigurationError(
            f"detour height {contour.detour_height} must exceed the deepest pole {kappa_max:.4f}",
            key="oracle.detour_height",
        )
    if contour.detour_half_width >= contour.p_max:
        raise ConfigurationError("detour half-width must be below p_max", key="oracle.p_max")


def contour_nodes(contour: ContourSpec, n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of the real axis with a rectangular detour.

    Path: -p_max -> -p_det -> -p_det + ih -> p_det + ih -> p_det -> p_max.
    """
    p_max, p_det, h = contour.p_max, contour.detour_half_width, contour.detour_height
    detour_share = max(4 * PANEL_ORDER, n_nodes // 16)
    real_share = max(2 * PANEL_ORDER, (n_nodes - 3 * detour_share) // 2)
    segments = [
        (-p_max, -p_det, real_share),
        (-p_det, -p_det + 1j * h, detour_share),
        (-p_det + 1j * h, p_det + 1j * h, detour_share),
        (p_det + 1j * h, p_det, detour_share),
        (p_det, p_max, real_share),
    ]
    parts = [gauss_legendre_panels(complex(a), complex(b), n) for a, b, n in segments]
    return np.concatenate([p for p, _ in parts]), np.concatenate([w for _, w in parts])


def _superpose(
    states: SquareWellStates,
    packet: PacketSpec,
    contour: ContourSpec,
    x: np.ndarray,
    t: float,
    n_nodes: int,
) -> np.ndarray:
    """psi(x, t) with n_nodes per path; free part on the real axis, scattered part on the contour"""
    evolution = lambda p: np.exp(-1j * p * p * t / (2.0 * states.mass))

    p_free, w_free = gauss_legendre_panels(-contour.p_max, contour.p_max, n_nodes)
    weight_free = packet_fourier_amplitude(packet, p_free) * evolution(p_free) * w_free

    p_scat, w_scat = contour_nodes(contour, n_nodes)
    weight_scat = packet_fourier_amplitude(packet, p_scat) * evolution(p_scat) * w_scat
    coefficients = scattering_coefficients(states, p_scat)

    psi = np.empty(x.size, dtype=np.complex128)
    chunk = max(1, CHUNK_ELEMENTS // max(p_free.size, p_scat.size))
    for start in range(0, x.size, chunk):
        xs = x[start:start + chunk]
        free = np.exp(1j * xs[:, np.newaxis] * p_free) @ weight_free
        scattered = _stationary_matrix(states, p_scat, coefficients, xs, scattered_only=True) @ weight_scat
        psi[start:start + chunk] = free + scattered
    return psi / math.sqrt(2.0 * math.pi)


def evolve_analytic(
    states: SquareWellStates,
    packet: PacketSpec,
    contour: ContourSpec,
    x_samples: Grid1D,
    t: float,
) -> ComplexField1D:
    """
    psi(x, t) = (1/sqrt(2pi)) int_C Phi(x, p) a(p) e^{-ip^2 t/2m} dp on x_samples.

    The node count doubles from contour.n_nodes until two successive results
    differ by less than 0.5% of max |psi|.

    Args:
        states: Square well and its bound states
        packet: Square packet launched from the left of the well
        contour: Cutoff, node count and detour geometry
        x_samples: Output grid
        t: Time

    Returns:
        psi on x_samples

    Raises:
        NotConvergedError: the self-estimate did not settle
    """
    check_square_packet(packet)
    if packet.x0 + packet.width >= -states.half_width:
        raise ConfigurationError(
            "the square packet must start entirely left of the well", key="packet.x0"
        )
    _check_contour(states, packet, contour)

    x = x_samples.nodes()
    n_nodes = contour.n_nodes
    previous = _superpose(states, packet, contour, x, t, n_nodes)
    while True:
        n_nodes *= 2
        current = _superpose(states, packet, contour, x, t, n_nodes)
        scale = float(np.max(np.abs(current)))
        change = float(np.max(np.abs(current - previous))) / scale if scale > 0 else 0.0
        logger.debug("contour quadrature t=%.4g: %d nodes, change %.3e", t, n_nodes, change)
        if change < SELF_ESTIMATE_LIMIT:
            return ComplexField1D(grid=x_samples, values=current)
        if n_nodes >= MAX_NODES:
            raise NotConvergedError(
                f"contour quadrature at t={t} still changes by {change:.2%} with {n_nodes} nodes"
            )
        previous = current


def gibbs_mask(packet: PacketSpec, x: np.ndarray, p_max: float) -> np.ndarray:
    """True away from the initial packet edges (|x - edge| > 5 / p_max)"""
    zone = 5.0 / p_max
    edges = (packet.x0 - packet.width, packet.x0 + packet.width)
    return (np.abs(x - edges[0]) > zone) & (np.abs(x - edges[1]) > zone)
