"""
Compare node for the wave-packet simulator
Runs the numeric solver and the contour oracle on the same square setup
and reports their deviation
"""
import logging
import math
import os
from typing import Any, Dict, List, Tuple

import numpy as np

from src.config import expand_variants
from src.core1d import evolve, snapshot_observer
from src.errors import WellPacketError
from src.nodes.oracle_node import MAX_WINDOW_POINTS, WINDOW_HALF_WIDTH, configured_contour, well_states
from src.nodes.run1d_node import prepare_1d
from src.nodes.status import failed_update
from src.oracle import evolve_analytic, gibbs_mask
from src.state import GateResult, Grid1D, SimulationState
from src.utils_save_output import snapshot_profile, write_compare, write_snapshot

logger = logging.getLogger(__name__)

AGREEMENT_LIMIT = 0.02


def comparison_window(grid: Grid1D, x_min: float, x_max: float) -> Tuple[slice, Grid1D]:
    """Strided slice of grid inside [x_min, x_max] with at most 4001 nodes, and the matching grid"""
    x = grid.nodes()
    start = int(np.searchsorted(x, x_min - 1e-12))
    stop = int(np.searchsorted(x, x_max + 1e-12, side="right")) - 1
    stride = max(1, int(math.ceil((stop - start) / (MAX_WINDOW_POINTS - 1))))
    count = (stop - start) // stride
    window = Grid1D(x_min=float(x[start]), x_max=float(x[start + count * stride]), n_points=count + 1)
    return slice(start, start + count * stride + 1, stride), window


def compare_node(state: SimulationState) -> Dict[str, Any]:
    """
    Compare node that diffs |psi| of the numeric and contour evolutions.

    Deviations are relative to max |psi| of the oracle and exclude the Gibbs
    zones around the initial packet edges.

    Args:
        state: Current workflow state

    Returns:
        Updated state with both sets of snapshots and the agreement gate
    """
    config = state["config"]
    output_dir = state["output_dir"]

    try:
        profiles = []
        rows: List[Tuple[float, float, float]] = []
        grid_info: Dict[str, Any] = {}

        for label, variant in expand_variants(config):
            directory = os.path.join(output_dir, label) if label else output_dir
            psi, samples, params = prepare_1d(variant)
            _, series = evolve(psi, samples, params, [snapshot_observer(variant.snapshot_times)])

            lo = max(psi.grid.x_min, -WINDOW_HALF_WIDTH)
            hi = min(psi.grid.x_max, WINDOW_HALF_WIDTH)
            window_slice, window = comparison_window(psi.grid, lo, hi)
            states = well_states(variant)
            variant_rows = []

            for t, numeric in series.records.get("snapshot", []):
                contour = configured_contour(variant, states, t)
                exact = evolve_analytic(states, variant.packet, contour, window, t)
                write_snapshot(directory, numeric, t)
                write_snapshot(directory, exact, t, prefix="oracle")
                profiles.append((label, snapshot_profile(numeric, t)))

                mask = gibbs_mask(variant.packet, window.nodes(), contour.p_max)
                diff = np.abs(np.abs(numeric.values[window_slice]) - np.abs(exact.values))[mask]
                scale = float(np.max(np.abs(exact.values)))
                variant_rows.append((t, float(np.max(diff)) / scale, float(np.sqrt(np.mean(diff ** 2))) / scale))
                logger.info("compare t=%.4g: max deviation %.3e", t, variant_rows[-1][1])

            write_compare(directory, variant_rows)
            rows.extend(variant_rows)
            prefix = f"{label}." if label else ""
            grid_info.update({
                f"{prefix}x_min": psi.grid.x_min,
                f"{prefix}x_max": psi.grid.x_max,
                f"{prefix}dx": psi.grid.dx,
                f"{prefix}dt": params.dt,
                f"{prefix}window_points": window.n_points,
            })

        worst = max(row[1] for row in rows)
        gates = dict(state.get("gates") or {})
        gates["oracle_agreement"] = GateResult(value=worst, threshold=AGREEMENT_LIMIT, passed=worst < AGREEMENT_LIMIT)
        return {
            "profiles": profiles,
            "series": {},
            "grid_info": grid_info,
            "gates": gates,
            "simulation_status": "completed",
            "workflow_status": "simulated",
            "messages": [
                {
                    "role": "system",
                    "content": f"Numeric vs contour comparison completed: worst deviation {worst:.3e} of max|psi|"
                }
            ]
        }

    except WellPacketError as e:
        update = failed_update("comparison", e)
        update["simulation_status"] = "failed"
        return update
