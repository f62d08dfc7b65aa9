"""
Two-dimensional scattering by decoupled radial evolutions
Each partial wave psi_l(r) = sqrt(r) Phi_l(r) is stepped by the 1D Cayley
propagator with its own effective potential; |Psi|(r, phi) is rebuilt on demand.
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from src.core1d import CayleyPropagator, observer_schedule, step_count
from src.errors import DomainError, NumericStateError
from src.model import eval_potential
from src.state import (
    AngularProfile,
    EvolutionParams,
    ObservableSeries,
    Observer,
    PacketSpec,
    PartialWaveSet,
    PotentialSpec,
)

logger = logging.getLogger(__name__)

ESCALATED_L_MAX = 70


def effective_potential(
    potential: PotentialSpec, l: int, mass: float, r: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """V(r) + (l^2 - 1/4) / (2 m r^2)"""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError(f"effective potential needs r > 0, got min r = {r_arr.min()}")
    values = eval_potential(potential, r_arr) + (l * l - 0.25) / (2.0 * mass * r_arr * r_arr)
    if np.ndim(r) == 0:
        return float(values)
    return values


def effective_potential_stack(potential: PotentialSpec, state: PartialWaveSet, mass: float) -> np.ndarray:
    """Effective potential for every l on the radial grid; the pinned r = 0 node holds 0"""
    r = state.radial_grid.nodes()
    stack = np.zeros((state.ls.size, r.size))
    for row, l in enumerate(state.ls):
        stack[row, 1:] = effective_potential(potential, int(l), mass, r[1:])
    return stack


def check_waves_finite(values: np.ndarray, l_max: int) -> None:
    bad = ~np.all(np.isfinite(values), axis=1)
    if np.any(bad):
        l = int(np.argmax(bad)) - l_max
        raise NumericStateError("partial wave holds non-finite amplitudes", l=l)


def with_waves(state: PartialWaveSet, values: np.ndarray) -> PartialWaveSet:
    return PartialWaveSet(radial_grid=state.radial_grid, l_max=state.l_max, values=values)


def evolve_2d(
    state: PartialWaveSet,
    potential: PotentialSpec,
    params: EvolutionParams,
    observers: Sequence[Observer] = (),
) -> Tuple[PartialWaveSet, ObservableSeries]:
    """
    Advance every partial wave independently to params.t_final.

    Args:
        state: Initial partial waves on a grid starting at r = 0
        potential: Central well
        params: Mass, time step, horizon
        observers: Sampling hooks called with the whole set

    Returns:
        Final set and the observer series

    Raises:
        NumericStateError: a wave went non-finite; the offending l is reported
    """
    n_steps = step_count(params)
    schedules = [(obs, observer_schedule(obs, params, n_steps)) for obs in observers]
    check_waves_finite(state.values, state.l_max)

    stack = effective_potential_stack(potential, state, params.mass)
    propagator = CayleyPropagator(state.radial_grid, stack, params.mass, params.dt)
    values = np.ascontiguousarray(state.values.copy())
    values[:, 0] = 0.0
    series = ObservableSeries()
    logger.info(
        "2D evolution: %d partial waves, %d steps of dt=%.4e, r_max=%.2f",
        values.shape[0], n_steps, params.dt, state.radial_grid.x_max,
    )

    for k in range(n_steps + 1):
        if k > 0:
            propagator.step(values)
        due = [obs for obs, steps in schedules if k in steps]
        if due:
            check_waves_finite(values, state.l_max)
            current = with_waves(state, values.copy())
            t = k * params.dt
            for obs in due:
                series.record(obs.name, t, obs.measure(current), scalar=obs.scalar)

    check_waves_finite(values, state.l_max)
    return with_waves(state, values), series


def per_l_norms(state: PartialWaveSet) -> np.ndarray:
    """int |psi_l|^2 dr for each l, ordered from -l_max to l_max"""
    return trapezoid(np.abs(state.values) ** 2, dx=state.radial_grid.dx, axis=1)


def total_norm(state: PartialWaveSet) -> float:
    return float(np.sum(per_l_norms(state)))


def angular_field(state: PartialWaveSet, angle: float) -> np.ndarray:
    """Sum_l psi_l(r) e^{il phi} on the radial grid, angle in degrees"""
    phase = np.exp(1j * state.ls * math.radians(angle))
    return phase @ state.values


def reconstruct_profile(
    state: PartialWaveSet,
    angle: float,
    time_label: float,
    quantity: str = "psi",
) -> AngularProfile:
    """
    |Psi| (or |Phi| = |Psi|/sqrt(r)) along a ray.

    Angle 0 is the launch direction (+x) and 180 is backscatter. Profiles of Phi
    drop the r = 0 node.
    """
    r = state.radial_grid.nodes()
    field = angular_field(state, angle)
    if quantity == "phi":
        r = r[1:]
        field = field[1:] / np.sqrt(r)
    return AngularProfile(
        time=time_label,
        angle=angle,
        coordinate=r,
        amplitude=np.abs(field),
        field=field,
        quantity=quantity,
    )


def resynthesize(state: PartialWaveSet, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """
    Phi at arbitrary points (r > 0, phi in radians) from the partial waves.

    Radial values are linearly interpolated between grid nodes.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(r <= 0):
        raise DomainError("resynthesis needs r > 0")
    nodes = state.radial_grid.nodes()
    total = np.zeros(np.broadcast(r, phi).shape, dtype=np.complex128)
    for row, l in enumerate(state.ls):
        wave = state.values[row]
        radial = np.interp(r, nodes, wave.real) + 1j * np.interp(r, nodes, wave.imag)
        total = total + radial * np.exp(1j * l * phi)
    return total / np.sqrt(r)


def escalated_l_max(packet: PacketSpec, potential: PotentialSpec, l_max: int) -> int:
    """Raise l_max to 70 when the impact parameter exceeds the well width"""
    if abs(packet.y0) > potential.width and l_max < ESCALATED_L_MAX:
        logger.warning(
            "impact parameter y0=%.3g exceeds well width %.3g; l_max raised from %d to %d",
            packet.y0, potential.width, l_max, ESCALATED_L_MAX,
        )
        return ESCALATED_L_MAX
    return l_max


def lmax_convergence_check(
    state_builder: Callable[[int], Dict[float, PartialWaveSet]],
    l_max: int,
    delta_l: int,
    angles: Sequence[float] = (0.0, 90.0, 180.0),
) -> float:
    """
    Largest profile deviation between truncations l_max and l_max + delta_l.

    Args:
        state_builder: Runs the same configuration at a given l_max and returns
            the partial-wave sets at the sampled times, keyed by time
        l_max: Base truncation
        delta_l: Increment of the comparison truncation
        angles: Rays sampled at every time, in degrees

    Returns:
        max | |Psi|_{l_max} - |Psi|_{l_max+delta_l} | / max |Psi|_{l_max+delta_l}
    """
    if delta_l == 0:
        return 0.0
    base = state_builder(l_max)
    refined = state_builder(l_max + delta_l)
    deviation = 0.0
    scale = 0.0
    for t, coarse in base.items():
        fine = refined[t]
        for angle in angles:
            a = np.abs(angular_field(coarse, angle))
            b = np.abs(angular_field(fine, angle))
            deviation = max(deviation, float(np.max(np.abs(a - b))))
            scale = max(scale, float(np.max(b)))
    result = deviation / scale if scale > 0 else 0.0
    logger.info("l_max %d vs %d: relative profile deviation %.3e", l_max, l_max + delta_l, result)
    return result


def total_norm_observer(every: float) -> Observer:
    return Observer(name="norm", measure=total_norm, every=every)


def per_l_norm_observer(every: Optional[float] = None, times: Sequence[float] = ()) -> Observer:
    return Observer(name="per_l_norm", measure=per_l_norms, every=every, times=list(times), scalar=False)


def state_observer(times: Sequence[float]) -> Observer:
    """Keeps the whole partial-wave set at the given times"""
    return Observer(name="state", measure=lambda state: state, times=list(times), scalar=False)


def sampled_states(series: ObservableSeries, name: str = "state") -> Dict[float, PartialWaveSet]:
    return {t: state for t, state in series.records.get(name, [])}


def profiles_at(
    states: Dict[float, PartialWaveSet],
    requests: Sequence[Tuple[float, float]],
    quantity: str = "psi",
    tolerance: Optional[float] = None,
) -> List[AngularProfile]:
    """
    Profiles for (angle, time) requests from sampled states.

    Each request is matched to the sampled time nearest to it.
    """
    if not states:
        return []
    times = np.array(sorted(states))
    profiles = []
    for angle, t in requests:
        nearest = float(times[np.argmin(np.abs(times - t))])
        if tolerance is not None and abs(nearest - t) > tolerance:
            logger.warning("no state sampled near t=%.4g (nearest %.4g)", t, nearest)
            continue
        profiles.append(reconstruct_profile(states[nearest], angle, t, quantity=quantity))
    return profiles
