"""
Two-dimensional run node for the wave-packet simulator
Evolves the partial waves, writes angular profiles and per-l norms
"""
import logging
import math
import os
from typing import Any, Dict, List, Tuple

from src.config import expand_variants
from src.core1d import default_radial_extent, default_spacing, default_time_step, make_grid
from src.errors import WellPacketError
from src.model import make_packet_2d
from src.nodes.status import failed_update
from src.radial2d import (
    escalated_l_max,
    evolve_2d,
    lmax_convergence_check,
    per_l_norm_observer,
    profiles_at,
    sampled_states,
    state_observer,
    total_norm,
    total_norm_observer,
)
from src.state import EvolutionParams, GateResult, Grid1D, Observer, RunConfig, SimulationState
from src.utils_save_output import write_lnorms, write_observables, write_profile

logger = logging.getLogger(__name__)

NORM_DRIFT_LIMIT = 1e-4
LMAX_DEVIATION_LIMIT = 0.01


def prepare_2d(config: RunConfig) -> Tuple[Grid1D, EvolutionParams, int]:
    """Radial grid, step parameters and partial-wave truncation for a 2D run"""
    evolution = config.evolution
    dr = evolution.dx or default_spacing(config.potential, config.packet)
    r_max = evolution.r_max or default_radial_extent(config.packet, evolution.mass, evolution.t_final)
    grid = make_grid(0.0, r_max, dr)
    dt = evolution.dt or default_time_step(evolution.mass, grid.dx)
    params = EvolutionParams(mass=evolution.mass, dt=dt, t_final=evolution.t_final)
    l_max = escalated_l_max(config.packet, config.potential, evolution.l_max)
    return grid, params, l_max


def profile_requests(config: RunConfig) -> List[Tuple[float, float]]:
    """(angle, time) pairs; backscatter at t_final when none are configured"""
    if config.output.profiles:
        return [(p.angle, p.time) for p in config.output.profiles]
    return [(180.0, config.evolution.t_final)]


def run2d_node(state: SimulationState) -> Dict[str, Any]:
    """
    Run node that evolves every 2D variant of the configuration.

    Args:
        state: Current workflow state

    Returns:
        Updated state with angular profiles, series and the norm and l_max gates
    """
    config = state["config"]
    output_dir = state["output_dir"]

    try:
        profiles = []
        series_by_variant = {}
        grid_info: Dict[str, Any] = {}
        drifts = []
        deviations = []

        for label, variant in expand_variants(config):
            directory = os.path.join(output_dir, label) if label else output_dir
            grid, params, l_max = prepare_2d(variant)
            packet = variant.packet
            if math.hypot(packet.x0, packet.y0) < 3.0 * variant.potential.width:
                logger.warning("packet starts within the range of the well (|(x0, y0)| < 3w)")

            requests = profile_requests(variant)
            times = sorted({t for _, t in requests})
            observers: List[Observer] = [state_observer(times)]
            every = variant.output.observe_every
            for name in variant.output.observables:
                if name == "norm":
                    observers.append(total_norm_observer(every))
                elif name == "per_l_norm":
                    observers.append(per_l_norm_observer(times=times))
                elif name != "energy":
                    logger.warning("observable '%s' is not sampled in 2D runs", name)

            initial = make_packet_2d(packet, grid, l_max)
            final, series = evolve_2d(initial, variant.potential, params, observers)
            states = sampled_states(series)

            for profile in profiles_at(states, requests, quantity=variant.output.profile_field):
                write_profile(directory, profile)
                profiles.append((label, profile))
            for t, norms in series.records.get("per_l_norm", []):
                write_lnorms(directory, initial.ls, norms, t)
            write_observables(directory, series)
            series_by_variant[label] = series

            initial_norm = total_norm(initial)
            drifts.append(abs(total_norm(final) - initial_norm) / initial_norm)

            if variant.analysis.check_lmax:
                def build(l: int, variant=variant, grid=grid, params=params, l_max=l_max, states=states, times=times):
                    if l == l_max:
                        return states
                    waves = make_packet_2d(variant.packet, grid, l)
                    _, sampled = evolve_2d(waves, variant.potential, params, [state_observer(times)])
                    return sampled_states(sampled)

                deviations.append(lmax_convergence_check(build, l_max, variant.analysis.delta_l))

            prefix = f"{label}." if label else ""
            grid_info.update({
                f"{prefix}r_max": grid.x_max,
                f"{prefix}n_points": grid.n_points,
                f"{prefix}dr": grid.dx,
                f"{prefix}dt": params.dt,
                f"{prefix}l_max": l_max,
            })
            logger.info("2D variant '%s' done, norm drift %.3e", label or "base", drifts[-1])

        drift = max(drifts)
        gates = dict(state.get("gates") or {})
        gates["norm_drift"] = GateResult(value=drift, threshold=NORM_DRIFT_LIMIT, passed=drift < NORM_DRIFT_LIMIT)
        if deviations:
            worst = max(deviations)
            gates["lmax_convergence"] = GateResult(
                value=worst, threshold=LMAX_DEVIATION_LIMIT, passed=worst < LMAX_DEVIATION_LIMIT
            )
        return {
            "profiles": profiles,
            "series": series_by_variant,
            "grid_info": grid_info,
            "gates": gates,
            "simulation_status": "completed",
            "workflow_status": "simulated",
            "messages": [
                {
                    "role": "system",
                    "content": f"2D evolution completed: {len(series_by_variant)} run(s), {len(profiles)} profile(s), norm drift {drift:.3e}"
                }
            ]
        }

    except WellPacketError as e:
        update = failed_update("2D evolution", e)
        update["simulation_status"] = "failed"
        return update
