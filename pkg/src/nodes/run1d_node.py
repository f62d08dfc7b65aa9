"""
One-dimensional run node for the wave-packet simulator
Evolves the packet on the line, writes snapshots and observables
"""
import logging
import os
from typing import Any, Dict, List, Tuple

import numpy as np

from src.analysis import reflected_region_1d
from src.config import expand_variants
from src.core1d import (
    center_amplitude_observer,
    default_grid,
    default_time_step,
    energy_observer,
    evolve,
    norm,
    norm_observer,
    region_fraction_observer,
    snapshot_observer,
)
from src.errors import WellPacketError
from src.model import eval_potential, make_packet_1d
from src.nodes.status import failed_update
from src.state import ComplexField1D, EvolutionParams, GateResult, Observer, RunConfig, SimulationState
from src.utils_save_output import snapshot_profile, write_observables, write_snapshot

logger = logging.getLogger(__name__)

NORM_DRIFT_LIMIT = 1e-4


def prepare_1d(config: RunConfig) -> Tuple[ComplexField1D, np.ndarray, EvolutionParams]:
    """Initial field, potential samples and step parameters for a 1D run"""
    evolution = config.evolution
    grid = default_grid(
        config.packet,
        config.potential,
        evolution.mass,
        evolution.t_final,
        dx=evolution.dx,
        x_min=evolution.x_min,
        x_max=evolution.x_max,
    )
    dt = evolution.dt or default_time_step(evolution.mass, grid.dx)
    params = EvolutionParams(mass=evolution.mass, dt=dt, t_final=evolution.t_final)
    psi = make_packet_1d(config.packet, grid)
    return psi, eval_potential(config.potential, grid.nodes()), params


def observers_1d(config: RunConfig, psi: ComplexField1D, samples: np.ndarray) -> List[Observer]:
    every = config.output.observe_every
    observers = [snapshot_observer(config.snapshot_times)]
    for name in config.output.observables:
        if name == "norm":
            observers.append(norm_observer(every=every))
        elif name == "energy":
            observers.append(energy_observer(samples, config.evolution.mass, every=every))
        elif name == "center_amplitude":
            observers.append(center_amplitude_observer(every))
        elif name == "reflected_fraction":
            region = reflected_region_1d(config.potential, psi.grid.x_min)
            if config.analysis.region_min is not None:
                region = (config.analysis.region_min, region[1])
            if config.analysis.region_max is not None:
                region = (region[0], config.analysis.region_max)
            observers.append(region_fraction_observer(region, every))
        else:
            logger.warning("observable '%s' has no meaning in a 1D run; skipped", name)
    return observers


def run1d_node(state: SimulationState) -> Dict[str, Any]:
    """
    Run node that evolves every 1D variant of the configuration.

    Args:
        state: Current workflow state

    Returns:
        Updated state with snapshot profiles, observable series and the norm gate
    """
    config = state["config"]
    output_dir = state["output_dir"]

    try:
        profiles = []
        series_by_variant = {}
        grid_info: Dict[str, Any] = {}
        drifts = []

        for label, variant in expand_variants(config):
            directory = os.path.join(output_dir, label) if label else output_dir
            psi, samples, params = prepare_1d(variant)
            final, series = evolve(psi, samples, params, observers_1d(variant, psi, samples))

            initial_norm = norm(psi)
            drifts.append(abs(norm(final) - initial_norm) / initial_norm)
            for t, field in series.records.get("snapshot", []):
                write_snapshot(directory, field, t)
                profiles.append((label, snapshot_profile(field, t)))
            write_observables(directory, series)
            series_by_variant[label] = series

            prefix = f"{label}." if label else ""
            grid_info.update({
                f"{prefix}x_min": psi.grid.x_min,
                f"{prefix}x_max": psi.grid.x_max,
                f"{prefix}n_points": psi.grid.n_points,
                f"{prefix}dx": psi.grid.dx,
                f"{prefix}dt": params.dt,
            })
            logger.info("1D variant '%s' done, norm drift %.3e", label or "base", drifts[-1])

        drift = max(drifts)
        gates = dict(state.get("gates") or {})
        gates["norm_drift"] = GateResult(value=drift, threshold=NORM_DRIFT_LIMIT, passed=drift < NORM_DRIFT_LIMIT)
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
                    "content": f"1D evolution completed: {len(series_by_variant)} run(s), norm drift {drift:.3e}"
                }
            ]
        }

    except WellPacketError as e:
        update = failed_update("1D evolution", e)
        update["simulation_status"] = "failed"
        return update
