"""
One-dimensional wave-function fields and the unitary Cayley time step
Also drives every radial partial wave of the two-dimensional solver
"""
import logging
import math
from typing import List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from numba import njit, prange
from scipy.integrate import trapezoid

from src.errors import ConfigurationError, NumericStateError
from src.state import (
    ComplexField1D,
    EnergyReading,
    EvolutionParams,
    Grid1D,
    ObservableSeries,
    Observer,
    PacketSpec,
    PotentialSpec,
)

logger = logging.getLogger(__name__)


@njit(cache=True)
def _factor_tridiagonal(diag, off):
    """
    LU factors of tridiagonal systems with constant off-diagonal `off`.

    Parameters
    ----------
    diag : ndarray
        Main diagonals, one row per system, shape (n_systems, n).
    off : complex
        Value of both off-diagonals.

    Returns
    -------
    lower, pivot : ndarray
        Sub-diagonal of L and diagonal of U, same shape as diag.
    """
    n_systems, n = diag.shape
    lower = np.zeros((n_systems, n), dtype=np.complex128)
    pivot = np.empty((n_systems, n), dtype=np.complex128)
    for s in range(n_systems):
        pivot[s, 0] = diag[s, 0]
        for i in range(1, n):
            lower[s, i] = off / pivot[s, i - 1]
            pivot[s, i] = diag[s, i] - lower[s, i] * off
    return lower, pivot


@njit(cache=True, parallel=True)
def _cayley_sweep(values, rhs_diag, rhs_off, lower, pivot, off):
    """
    Advance each row of values in place by one Cayley step.

    The right-hand side (1 - iK) psi is formed on the interior nodes with the
    end nodes held at zero, then the pre-factored (1 + iK) system is solved by
    forward and backward substitution.
    """
    n_systems, n = values.shape
    m = n - 2
    for s in prange(n_systems):
        y = np.empty(m, dtype=np.complex128)
        for i in range(m):
            j = i + 1
            left = values[s, j - 1] if j > 1 else 0j
            right = values[s, j + 1] if j < n - 2 else 0j
            rhs = rhs_diag[s, i] * values[s, j] + rhs_off * (left + right)
            if i == 0:
                y[i] = rhs
            else:
                y[i] = rhs - lower[s, i] * y[i - 1]
        values[s, m] = y[m - 1] / pivot[s, m - 1]
        for i in range(m - 2, -1, -1):
            values[s, i + 1] = (y[i] - off * values[s, i + 2]) / pivot[s, i]
        values[s, 0] = 0j
        values[s, n - 1] = 0j


class CayleyPropagator:
    """
    Pre-factored Cayley operator (1 + i H dt/2)^-1 (1 - i H dt/2) on a hard-walled grid.

    H = -(1/2m) d^2/dx^2 + V with the 3-point second difference. potential_samples
    is either one value per node or a stack of rows, one per independent system
    (the radial solver passes one row per partial wave). A negative dt gives the
    exact inverse step.
    """

    def __init__(self, grid: Grid1D, potential_samples: np.ndarray, mass: float, dt: float):
        samples = np.atleast_2d(np.asarray(potential_samples, dtype=float))
        if samples.shape[-1] != grid.n_points:
            raise ConfigurationError(
                f"potential has {samples.shape[-1]} samples, grid has {grid.n_points} nodes",
                key="potential_samples",
            )
        if not np.all(np.isfinite(samples[:, 1:-1])):
            raise ConfigurationError("potential samples must be finite", key="potential_samples")

        self.grid = grid
        self.n_systems = samples.shape[0]
        kinetic = 1.0 / (mass * grid.dx ** 2)
        half = 0.5 * dt
        h_diag = kinetic + samples[:, 1:-1]
        h_off = -0.5 * kinetic

        self._lhs_off = complex(1j * half * h_off)
        self._rhs_off = complex(-1j * half * h_off)
        self._rhs_diag = np.ascontiguousarray(1.0 - 1j * half * h_diag)
        lhs_diag = np.ascontiguousarray(1.0 + 1j * half * h_diag)
        self._lower, self._pivot = _factor_tridiagonal(lhs_diag, self._lhs_off)
        logger.debug(
            "Cayley propagator: %d system(s), %d nodes, dx=%.4e, dt=%.4e",
            self.n_systems, grid.n_points, grid.dx, dt,
        )

    def step(self, values: np.ndarray) -> None:
        """Advance a (n_systems, n_points) complex array in place"""
        _cayley_sweep(values, self._rhs_diag, self._rhs_off, self._lower, self._pivot, self._lhs_off)


def check_finite(values: np.ndarray, l: Optional[int] = None) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericStateError("wave function holds non-finite amplitudes", l=l)


def cayley_step(
    psi: ComplexField1D,
    potential_samples: np.ndarray,
    params: EvolutionParams,
    backward: bool = False,
) -> ComplexField1D:
    """
    Advance psi by one unitary implicit step of params.dt (or -params.dt when backward).

    Args:
        psi: Current field; its end nodes are treated as a hard wall
        potential_samples: V at each grid node
        params: Mass and time step
        backward: Step backwards in time (exact inverse of the forward step)

    Returns:
        The field at t + dt
    """
    samples = np.asarray(potential_samples, dtype=float)
    if samples.shape != (psi.grid.n_points,):
        raise ConfigurationError(
            f"potential has shape {samples.shape}, field has {psi.grid.n_points} nodes",
            key="potential_samples",
        )
    check_finite(psi.values)

    dt = -params.dt if backward else params.dt
    propagator = CayleyPropagator(psi.grid, samples, params.mass, dt)
    values = psi.values.copy()[np.newaxis, :]
    propagator.step(values)
    return psi.with_values(values[0])


def norm(psi: ComplexField1D) -> float:
    """Trapezoidal integral of |psi|^2"""
    return float(trapezoid(np.abs(psi.values) ** 2, dx=psi.grid.dx))


def region_norm(psi: ComplexField1D, region: Tuple[float, float]) -> float:
    """Trapezoidal integral of |psi|^2 restricted to region"""
    x = psi.grid.nodes()
    mask = (x >= region[0]) & (x <= region[1])
    density = np.where(mask, np.abs(psi.values) ** 2, 0.0)
    return float(trapezoid(density, dx=psi.grid.dx))


def energy_expectation(psi: ComplexField1D, potential_samples: np.ndarray, mass: float) -> EnergyReading:
    """
    Real part of <psi|H|psi> with the discrete H used by cayley_step.

    The value is not divided by the norm; normalized flags whether the norm is
    within 1e-6 of one so the value reads as an expectation.
    """
    samples = np.asarray(potential_samples, dtype=float)
    if samples.shape != (psi.grid.n_points,):
        raise ConfigurationError(
            f"potential has shape {samples.shape}, field has {psi.grid.n_points} nodes",
            key="potential_samples",
        )
    dx = psi.grid.dx
    kinetic = 1.0 / (mass * dx ** 2)

    walled = psi.values.copy()
    walled[0] = walled[-1] = 0.0
    inner = walled[1:-1]
    h_psi = kinetic * inner - 0.5 * kinetic * (walled[:-2] + walled[2:]) + samples[1:-1] * inner
    value = float(dx * np.sum(np.conj(inner) * h_psi).real)
    return EnergyReading(value=value, normalized=abs(norm(psi) - 1.0) <= 1e-6)


def spread_width(width: float, mass: float, t: float) -> float:
    """Width of a free minimal-uncertainty packet at time t"""
    return width * math.sqrt(1.0 + (t / (2.0 * mass * width ** 2)) ** 2)


def default_spacing(potential: PotentialSpec, packet: PacketSpec) -> float:
    return min(potential.width, packet.width) / 20.0


def default_time_step(mass: float, dx: float) -> float:
    return mass * dx * dx / 2.0


def default_half_extent(packet: PacketSpec, mass: float, t_final: float) -> float:
    """Half-width L of the symmetric box [-L, L] that no relevant front reaches by t_final"""
    reach = abs(packet.q) / mass * t_final + 20.0 * spread_width(packet.width, mass, t_final)
    return max(abs(packet.x0 - 20.0), abs(packet.x0) + 20.0, reach)


def default_box(packet: PacketSpec, mass: float, t_final: float) -> Tuple[float, float]:
    half = default_half_extent(packet, mass, t_final)
    return -half, half


def default_radial_extent(packet: PacketSpec, mass: float, t_final: float) -> float:
    """r_max = |(x0, y0)| + v t_final + 20 Delta(t_final)"""
    return (
        math.hypot(packet.x0, packet.y0)
        + abs(packet.q) / mass * t_final
        + 20.0 * spread_width(packet.width, mass, t_final)
    )


def make_grid(x_min: float, x_max: float, dx: float) -> Grid1D:
    """Grid on [x_min, x_max] with spacing no larger than dx"""
    n_points = max(3, int(math.ceil((x_max - x_min) / dx - 1e-9)) + 1)
    return Grid1D(x_min=x_min, x_max=x_max, n_points=n_points)


def default_grid(
    packet: PacketSpec,
    potential: PotentialSpec,
    mass: float,
    t_final: float,
    dx: Optional[float] = None,
    x_min: Optional[float] = None,
    x_max: Optional[float] = None,
) -> Grid1D:
    """
    Box and spacing for a 1D run; unset values follow the documented defaults.

    The default box is symmetric with an odd node count so x = 0 is a node.
    """
    dx = dx or default_spacing(potential, packet)
    if x_min is None and x_max is None:
        half = default_half_extent(packet, mass, t_final)
        cells = int(math.ceil(half / dx - 1e-9))
        return Grid1D(x_min=-cells * dx, x_max=cells * dx, n_points=2 * cells + 1)
    half = default_half_extent(packet, mass, t_final)
    return make_grid(-half if x_min is None else x_min, half if x_max is None else x_max, dx)


def step_count(params: EvolutionParams) -> int:
    n_steps = int(round(params.t_final / params.dt))
    if abs(n_steps * params.dt - params.t_final) > 0.5 * params.dt:
        raise ConfigurationError(
            f"t_final={params.t_final} is not a whole number of steps dt={params.dt}", key="t_final"
        )
    return n_steps


def observer_schedule(observer: Observer, params: EvolutionParams, n_steps: int) -> Set[int]:
    """Step indices at which an observer samples"""
    steps: Set[int] = set()
    for t in observer.times:
        if t < 0 or t > params.t_final + 1e-9 * max(1.0, params.t_final):
            raise ConfigurationError(
                f"sampling time {t} outside [0, {params.t_final}]", key=observer.name
            )
        steps.add(min(int(round(t / params.dt)), n_steps))
    if observer.every is not None:
        stride = max(1, int(round(observer.every / params.dt)))
        start = int(math.ceil(observer.t_min / params.dt - 1e-9))
        steps.update(k for k in range(0, n_steps + 1, stride) if k >= start)
    return steps


def evolve(
    psi: ComplexField1D,
    potential: Union[PotentialSpec, np.ndarray],
    params: EvolutionParams,
    observers: Sequence[Observer] = (),
) -> Tuple[ComplexField1D, ObservableSeries]:
    """
    Run the Cayley time loop from t = 0 to params.t_final.

    Args:
        psi: Initial field
        potential: Well description, or potential samples on psi.grid
        params: Mass, time step, horizon
        observers: Sampling hooks; each is called with the field at its due steps

    Returns:
        Final field and the observer series
    """
    from src.model import eval_potential

    grid = psi.grid
    if isinstance(potential, PotentialSpec):
        samples = eval_potential(potential, grid.nodes())
    else:
        samples = np.asarray(potential, dtype=float)
    n_steps = step_count(params)
    schedules = [(obs, observer_schedule(obs, params, n_steps)) for obs in observers]
    check_finite(psi.values)

    propagator = CayleyPropagator(grid, samples, params.mass, params.dt)
    values = psi.values.copy()[np.newaxis, :]
    series = ObservableSeries()
    logger.info("1D evolution: %d steps of dt=%.4e on %d nodes", n_steps, params.dt, grid.n_points)

    for k in range(n_steps + 1):
        if k > 0:
            propagator.step(values)
        due = [obs for obs, steps in schedules if k in steps]
        if due:
            current = psi.with_values(values[0])
            check_finite(current.values)
            t = k * params.dt
            for obs in due:
                series.record(obs.name, t, obs.measure(current), scalar=obs.scalar)

    final = psi.with_values(values[0])
    check_finite(final.values)
    return final, series


def norm_observer(every: Optional[float] = None, times: Sequence[float] = ()) -> Observer:
    return Observer(name="norm", measure=norm, every=every, times=list(times))


def energy_observer(potential_samples: np.ndarray, mass: float, every: Optional[float] = None) -> Observer:
    samples = np.asarray(potential_samples, dtype=float)
    return Observer(
        name="energy",
        measure=lambda psi: energy_expectation(psi, samples, mass).value,
        every=every,
    )


def center_amplitude_observer(every: float, t_min: float = 0.0, x: float = 0.0) -> Observer:
    """|psi| at the node nearest x (the well center by default)"""
    return Observer(
        name="center_amplitude",
        measure=lambda psi: abs(psi.values[psi.grid.index_of(x)]),
        every=every,
        t_min=t_min,
    )


def region_fraction_observer(region: Tuple[float, float], every: float, name: str = "reflected_fraction") -> Observer:
    return Observer(
        name=name,
        measure=lambda psi: region_norm(psi, region) / max(norm(psi), 1e-300),
        every=every,
    )


def snapshot_observer(times: Sequence[float]) -> Observer:
    return Observer(name="snapshot", measure=lambda psi: psi, times=list(times), scalar=False)


def snapshot_times(series: ObservableSeries, name: str = "snapshot") -> List[float]:
    return [t for t, _ in series.records.get(name, [])]
