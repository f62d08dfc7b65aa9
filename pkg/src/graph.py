"""
Main LangGraph workflow for the wave-packet scattering simulator
"""
import logging
from typing import Optional

from langgraph.graph import END, StateGraph

from src.config import render_config
from src.errors import RunFailedError
from src.nodes.analysis_node import analysis_node
from src.nodes.compare_node import compare_node
from src.nodes.input_node import input_node
from src.nodes.load_run_node import load_run_node
from src.nodes.manifest_node import manifest_node
from src.nodes.oracle_node import oracle_node
from src.nodes.run1d_node import run1d_node
from src.nodes.run2d_node import run2d_node
from src.state import RunConfig, RunManifest, SimulationState

logger = logging.getLogger(__name__)

MODE_NODES = {
    "run1d": "run1d",
    "run2d": "run2d",
    "oracle": "oracle",
    "compare": "compare",
    "analyze": "load_run",
}


def create_simulation_graph():
    """
    Create the simulation workflow graph.

    input -> one mode node -> analysis -> manifest. A failed node ends the
    workflow without writing a manifest.

    Returns:
        Compiled StateGraph ready for execution
    """
    workflow = StateGraph(SimulationState)

    workflow.add_node("input", input_node)
    workflow.add_node("run1d", run1d_node)
    workflow.add_node("run2d", run2d_node)
    workflow.add_node("oracle", oracle_node)
    workflow.add_node("compare", compare_node)
    workflow.add_node("load_run", load_run_node)
    workflow.add_node("analysis", analysis_node)
    workflow.add_node("manifest", manifest_node)

    def route_by_mode(state):
        """Route to the node that produces the profiles of this mode"""
        return MODE_NODES[state["config"].mode]

    def route_unless_failed(state):
        """Continue to analysis unless the simulation failed"""
        if state.get("workflow_status") == "failed":
            return "__end__"
        return "analysis"

    def route_after_analysis(state):
        if state.get("workflow_status") == "failed":
            return "__end__"
        return "manifest"

    workflow.add_conditional_edges("input", route_by_mode, {node: node for node in MODE_NODES.values()})
    for node in MODE_NODES.values():
        workflow.add_conditional_edges(
            node, route_unless_failed, {"analysis": "analysis", "__end__": END}
        )
    workflow.add_conditional_edges(
        "analysis", route_after_analysis, {"manifest": "manifest", "__end__": END}
    )
    workflow.add_edge("manifest", END)

    workflow.set_entry_point("input")
    return workflow.compile()


def run_simulation(config: RunConfig, config_text: Optional[str] = None, output_dir: Optional[str] = None):
    """
    Run the workflow for a parsed configuration.

    Args:
        config: Validated run configuration
        config_text: Text echoed into the manifest; rendered from config when omitted
        output_dir: Overrides output.output_dir

    Returns:
        The final state of the workflow
    """
    graph = create_simulation_graph()
    inputs = {
        "config": config,
        "config_text": config_text if config_text is not None else render_config(config),
        "messages": [
            {
                "role": "user",
                "content": f"Run {config.mode}" + (f" ({config.seed_label})" if config.seed_label else "")
            }
        ]
    }
    if output_dir is not None:
        inputs["output_dir"] = output_dir
    return graph.invoke(inputs)


def execute(config: RunConfig, config_text: Optional[str] = None, output_dir: Optional[str] = None) -> RunManifest:
    """
    Run the workflow and return its manifest.

    Raises:
        RunFailedError: a node failed; kind is "config" or "numeric"
    """
    result = run_simulation(config, config_text, output_dir)
    if result.get("workflow_status") != "completed" or result.get("manifest") is None:
        kind = result.get("error_kind") or "numeric"
        raise RunFailedError(result.get("error_message") or "workflow did not complete", kind=kind)
    return result["manifest"]
