"""
Packet and well catalog
Initial wave packets and attractive wells shared by the 1D and 2D solvers
"""
import logging
import math
from typing import Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import erfc

from src.errors import ConfigurationError, LmaxInsufficientError, UnsupportedShapeError
from src.state import ComplexField1D, Grid1D, PacketSpec, PartialWaveSet, PotentialSpec

logger = logging.getLogger(__name__)

TAIL_LIMIT_1D = 1e-10
TAIL_LIMIT_2D = 1e-8
CAPTURE_LIMIT = 0.01


def eval_potential(spec: PotentialSpec, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Evaluate the well at x (or r).

    Depth is stored positive and applied with a minus sign, so the result lies
    in [-depth, 0].
    """
    x_arr = np.asarray(x, dtype=float)
    u = x_arr / spec.width
    if spec.shape == "gaussian":
        values = -spec.depth * np.exp(-u * u)
    elif spec.shape == "square":
        values = np.where(np.abs(x_arr) < spec.width, -spec.depth, 0.0)
    elif spec.shape == "lorentzian":
        values = -spec.depth / (1.0 + u * u)
    else:
        raise UnsupportedShapeError(f"unknown potential shape '{spec.shape}'", key="potential.shape")
    if np.ndim(x) == 0:
        return float(values)
    return values


def packet_profile(spec: PacketSpec, x: np.ndarray) -> np.ndarray:
    """Unnormalized 1D packet e^{iq(x-x0)} times the shape envelope"""
    s = np.asarray(x, dtype=float) - spec.x0
    carrier = np.exp(1j * spec.q * s)
    if spec.shape == "gaussian":
        envelope = np.exp(-s * s / (4.0 * spec.width ** 2))
    elif spec.shape == "square":
        envelope = (np.abs(s) < spec.width).astype(float)
    elif spec.shape == "lorentzian":
        envelope = 1.0 / (1.0 + (s / spec.width) ** 2)
    elif spec.shape == "exponential":
        envelope = np.exp(-np.abs(s) / spec.width)
    else:
        raise UnsupportedShapeError(f"unknown packet shape '{spec.shape}'", key="packet.shape")
    return carrier * envelope


def tail_mass_1d(spec: PacketSpec, grid: Grid1D) -> float:
    """Fraction of |psi|^2 that the exact packet puts outside the grid"""
    left = (spec.x0 - grid.x_min) / spec.width
    right = (grid.x_max - spec.x0) / spec.width
    if spec.shape == "gaussian":
        return float(0.5 * erfc(left / math.sqrt(2.0)) + 0.5 * erfc(right / math.sqrt(2.0)))
    if spec.shape == "square":
        return 0.0 if min(left, right) >= 1.0 else 1.0
    if spec.shape == "exponential":
        return float(0.5 * math.exp(-2.0 * left) + 0.5 * math.exp(-2.0 * right))

    # 1/(1+u^2)^2 integrates to pi/2 over the line
    def lorentz_tail(u: float) -> float:
        return (0.5 * (math.pi / 2 - math.atan(u) - u / (1.0 + u * u))) / (math.pi / 2)

    return lorentz_tail(left) + lorentz_tail(right)


def make_packet_1d(spec: PacketSpec, grid: Grid1D) -> ComplexField1D:
    """
    Sample a packet on grid and normalize it to 1 by trapezoidal quadrature.

    Args:
        spec: Packet shape, wavenumber, center and width
        grid: Target grid

    Returns:
        Normalized field
    """
    if not grid.contains(spec.x0):
        raise ConfigurationError(
            f"packet center x0={spec.x0} outside grid [{grid.x_min}, {grid.x_max}]", key="packet.x0"
        )
    tail = tail_mass_1d(spec, grid)
    if tail >= TAIL_LIMIT_1D:
        if spec.shape == "lorentzian":
            logger.warning("Lorentzian packet loses %.2e of its norm outside the grid", tail)
        else:
            raise ConfigurationError(
                f"packet tail mass {tail:.2e} outside the grid exceeds {TAIL_LIMIT_1D:g}", key="packet"
            )

    values = packet_profile(spec, grid.nodes())
    total = trapezoid(np.abs(values) ** 2, dx=grid.dx)
    if total <= 0:
        raise ConfigurationError("packet has no support on the grid", key="packet.width")
    return ComplexField1D(grid=grid, values=values / math.sqrt(total))


def angular_samples(l_max: int) -> int:
    return max(256, 8 * l_max)


def project_partial_waves(field: np.ndarray, l_max: int) -> np.ndarray:
    """
    Angular Fourier coefficients of field sampled on a uniform phi grid.

    field has shape (n_r, n_phi); the result has one row per l in
    [-l_max, l_max] holding (1/2pi) int field e^{-il phi} dphi.
    """
    n_phi = field.shape[1]
    coefficients = np.fft.fft(field, axis=1) / n_phi
    ls = np.arange(-l_max, l_max + 1)
    return coefficients[:, ls % n_phi].T.copy()


def gaussian_field_2d(spec: PacketSpec, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Unnormalized 2D Gaussian Phi_0 on the (r, phi) mesh"""
    x = r[:, np.newaxis] * np.cos(phi)[np.newaxis, :]
    y = r[:, np.newaxis] * np.sin(phi)[np.newaxis, :]
    dx = x - spec.x0
    dy = y - spec.y0
    return np.exp(1j * spec.q * dx - (dx * dx + dy * dy) / (4.0 * spec.width ** 2))


def make_packet_2d(spec: PacketSpec, radial_grid: Grid1D, l_max: int) -> PartialWaveSet:
    """
    Project a 2D Gaussian packet onto partial waves psi_l = sqrt(r) Phi_l.

    The set is normalized against the untruncated field, so sum_l int |psi_l|^2 dr
    is the captured fraction of the full norm.

    Args:
        spec: Packet with shape gaussian
        radial_grid: Grid from r = 0 to r_max
        l_max: Truncation, waves run over [-l_max, l_max]

    Returns:
        Partial-wave set

    Raises:
        LmaxInsufficientError: more than 1% of the norm lies beyond l_max
    """
    if spec.shape != "gaussian":
        raise UnsupportedShapeError(
            f"2D runs need a gaussian packet, got '{spec.shape}'", key="packet.shape"
        )
    if radial_grid.x_min != 0.0:
        raise ConfigurationError("radial grid must start at r = 0", key="evolution.r_max")

    center = math.hypot(spec.x0, spec.y0)
    margin = radial_grid.x_max - center
    tail = 1.0 if margin <= 0 else math.exp(-margin * margin / (2.0 * spec.width ** 2))
    if tail >= TAIL_LIMIT_2D:
        raise ConfigurationError(
            f"packet tail mass {tail:.2e} beyond r_max={radial_grid.x_max} exceeds {TAIL_LIMIT_2D:g}",
            key="evolution.r_max",
        )

    r = radial_grid.nodes()
    n_phi = angular_samples(l_max)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    field = gaussian_field_2d(spec, r, phi)

    # int |Phi|^2 r dr dphi / 2pi, over every angular harmonic
    full_norm = trapezoid(r * np.mean(np.abs(field) ** 2, axis=1), dx=radial_grid.dx)
    waves = np.sqrt(r)[np.newaxis, :] * project_partial_waves(field, l_max)
    waves /= math.sqrt(full_norm)

    captured = float(np.sum(trapezoid(np.abs(waves) ** 2, dx=radial_grid.dx, axis=1)))
    residual = 1.0 - captured
    logger.info("2D packet: l_max=%d, n_phi=%d, captured norm fraction %.6f", l_max, n_phi, captured)
    if residual > CAPTURE_LIMIT:
        raise LmaxInsufficientError(residual, l_max)
    return PartialWaveSet(radial_grid=radial_grid, l_max=l_max, values=waves)
