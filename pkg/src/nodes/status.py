"""
Shared status updates for pipeline nodes
"""
import logging
from typing import Any, Dict

from src.errors import ConfigurationError

logger = logging.getLogger(__name__)


def failed_update(stage: str, error: Exception) -> Dict[str, Any]:
    """
    State update for a node that caught a module error.

    Configuration errors (including unsupported shapes and fit windows) are
    reported as kind "config"; everything else as "numeric".
    """
    kind = "config" if isinstance(error, ConfigurationError) else "numeric"
    error_msg = f"Error during {stage}: {error}"
    logger.error(error_msg)
    return {
        "workflow_status": "failed",
        "error_kind": kind,
        "error_message": error_msg,
        "messages": [
            {
                "role": "system",
                "content": f"{stage.capitalize()} failed: {error_msg}"
            }
        ]
    }
