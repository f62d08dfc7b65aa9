"""
Input node for the wave-packet simulator
Checks the run configuration and prepares the output directory
"""
import os
import time
from typing import Dict, Any

from src.state import SimulationState
from src.utils_save_output import remove_manifest


def input_node(state: SimulationState) -> Dict[str, Any]:
    """
    Input node that validates the configuration and initializes the workflow state.

    Args:
        state: Current workflow state

    Returns:
        Updated state with initialized values
    """
    config = state.get("config")
    if config is None:
        raise ValueError("No run configuration provided.")

    output_dir = state.get("output_dir") or config.output.output_dir
    os.makedirs(output_dir, exist_ok=True)
    # a manifest marks a completed run; analyze mode reads it before replacing it
    if config.mode != "analyze":
        remove_manifest(output_dir)

    return {
        "output_dir": output_dir,
        "config_text": state.get("config_text", ""),
        "profiles": [],
        "series": {},
        "grid_info": {},
        "simulation_status": "pending",
        "fit_rows": [],
        "gates": {},
        "analysis_status": "pending",
        "files": {},
        "manifest": None,
        "started_at": time.time(),
        "workflow_status": "initialized",
        "error_kind": None,
        "error_message": None,
        "messages": [
            {
                "role": "system",
                "content": f"Wave-packet simulator initialized. Mode: {config.mode}, output: {output_dir}"
            }
        ]
    }
