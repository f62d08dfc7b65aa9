"""
Load-run node for the wave-packet simulator
Reads a completed run directory back for re-analysis without re-simulation
"""
import glob
import logging
import os
from typing import Any, Dict

from src.config import expand_variants, parse_config, render_config
from src.errors import ConfigurationError, WellPacketError
from src.nodes.status import failed_update
from src.state import SimulationState
from src.utils_save_output import (
    read_manifest_config,
    read_manifest_gates,
    read_manifest_grid,
    read_observables,
    read_profile,
    read_snapshot,
    snapshot_profile,
)

logger = logging.getLogger(__name__)


def load_run_node(state: SimulationState) -> Dict[str, Any]:
    """
    Load node that restores profiles and series of an earlier run.

    The earlier run's configuration, grid and gates come from its manifest;
    the [analysis] section of the analyze configuration replaces the earlier one.

    Args:
        state: Current workflow state

    Returns:
        Updated state with the stored profiles, series, grid and gates
    """
    config = state["config"]
    run_dir = state["output_dir"]

    try:
        config_text = read_manifest_config(run_dir)
        if config_text is None:
            raise ConfigurationError(f"no completed run (manifest) in {run_dir}", key="output.output_dir")
        original = parse_config(config_text)
        merged = original.model_copy(update={"analysis": config.analysis})

        profiles = []
        series_by_variant = {}
        for label, _ in expand_variants(original):
            directory = os.path.join(run_dir, label) if label else run_dir
            for path in sorted(glob.glob(os.path.join(directory, "snapshot_t*.csv"))):
                t, psi = read_snapshot(path)
                profiles.append((label, snapshot_profile(psi, t)))
            for path in sorted(glob.glob(os.path.join(directory, "profile_a*_t*.csv"))):
                profiles.append((label, read_profile(path)))
            series_by_variant[label] = read_observables(directory)

        profiles.sort(key=lambda item: (item[0], item[1].time, item[1].angle or 0.0))
        gates = read_manifest_gates(run_dir)
        logger.info("loaded %d profile(s) from %s", len(profiles), run_dir)
        return {
            "config": merged,
            "config_text": render_config(merged),
            "profiles": profiles,
            "series": series_by_variant,
            "grid_info": read_manifest_grid(run_dir),
            "gates": gates,
            "simulation_status": "completed",
            "workflow_status": "simulated",
            "messages": [
                {
                    "role": "system",
                    "content": f"Loaded {original.mode} run from {run_dir}: {len(profiles)} profile(s)"
                }
            ]
        }

    except WellPacketError as e:
        update = failed_update("run loading", e)
        update["simulation_status"] = "failed"
        return update
