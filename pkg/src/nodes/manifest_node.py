"""
Manifest node for the wave-packet simulator
Writes the reproducibility manifest once every other artifact exists
"""
import logging
import time
from typing import Any, Dict

import src
from src.state import RunManifest, SimulationState
from src.utils_save_output import inventory, write_manifest

logger = logging.getLogger(__name__)


def _message_text(message: Any) -> str:
    if isinstance(message, dict):
        return str(message.get("content", ""))
    return str(getattr(message, "content", message))


def manifest_node(state: SimulationState) -> Dict[str, Any]:
    """
    Manifest node that hashes the run directory and writes manifest.txt.

    Args:
        state: Current workflow state

    Returns:
        Updated state with the manifest and the file inventory
    """
    output_dir = state["output_dir"]
    gates = state.get("gates") or {}
    drift = gates.get("norm_drift")

    files = inventory(output_dir)
    manifest = RunManifest(
        config_text=state.get("config_text", ""),
        code_version=src.__version__,
        grid=state.get("grid_info") or {},
        wall_clock_seconds=time.time() - state.get("started_at", time.time()),
        norm_drift=drift.value if drift is not None else None,
        gates=gates,
        files=files,
        log=[_message_text(m) for m in state.get("messages") or []],
    )
    path = write_manifest(output_dir, manifest)
    logger.info("manifest written to %s (%d file(s))", path, len(files))

    failed = [name for name, gate in gates.items() if not gate.passed]
    content = f"Manifest written: {len(files)} file(s)"
    if failed:
        content += f"; failed gate(s): {', '.join(sorted(failed))}"
    return {
        "manifest": manifest,
        "files": files,
        "workflow_status": "completed",
        "messages": [{"role": "system", "content": content}]
    }
