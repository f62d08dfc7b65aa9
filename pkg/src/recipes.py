"""
Ready-to-run configurations for the published figure setups
"""
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

from src.config import render_config
from src.state import RunConfig

logger = logging.getLogger(__name__)

# r_max holds the t <= 300 fronts; dr and dt follow the defaults
RADIAL_GRID = {"r_max": 100.0}
ONE_D_OBSERVABLES = ["norm", "energy", "center_amplitude", "reflected_fraction"]
TWO_D_OBSERVABLES = ["norm", "per_l_norm"]

NARROW_2D = {"packet": {"x0": -10.0, "y0": 0.0, "width": 0.5}, "potential": {"depth": 1.0, "width": 2.0}}
WIDE_2D = {"packet": {"x0": -10.0, "y0": 0.0, "width": 2.0}, "potential": {"depth": 1.0, "width": 0.5}}
MOMENTUM_SWEEP = {"key": "q", "values": [0.5, 1.0, 1.5]}
IMPACT_SWEEP = {"key": "y0", "values": [0.0, 1.5, 3.0]}


def _profiles(t: float, *angles: float) -> List[Dict[str, float]]:
    return [{"angle": angle, "time": t} for angle in angles]


def _run2d(setup: Dict[str, Any], t_final: float, profiles, **extra: Any) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "mode": "run2d",
        "packet": dict(setup["packet"], q=1.0),
        "potential": dict(setup["potential"], shape="gaussian"),
        "evolution": dict(RADIAL_GRID, mass=20.0, t_final=t_final, l_max=50),
        "output": {"profiles": profiles, "observables": TWO_D_OBSERVABLES},
    }
    for section, values in extra.items():
        if isinstance(values, dict) and isinstance(data.get(section), dict):
            data[section] = {**data[section], **values}
        else:
            data[section] = values
    return data


def _run1d(packet: Dict[str, Any], potential: Dict[str, Any], t_final: float, **extra: Any) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "mode": "run1d",
        "packet": dict({"q": 1.0, "x0": -10.0, "width": 0.5}, **packet),
        "potential": dict({"depth": 1.0, "width": 1.0}, **potential),
        "evolution": {"mass": 20.0, "t_final": t_final},
        "output": {"observables": ONE_D_OBSERVABLES},
    }
    for section, values in extra.items():
        if isinstance(values, dict) and isinstance(data.get(section), dict):
            data[section] = {**data[section], **values}
        else:
            data[section] = values
    return data


FIGURES: List[Tuple[str, str, Dict[str, Any]]] = [
    ("fig01", "|psi| versus x at several times; narrow packet on a w=1 well",
     _run1d({}, {}, 200.0, output={"snapshots": [50.0, 100.0, 150.0, 200.0]})),
    ("fig02", "|psi| versus x after t=5000; narrow packet on a w=1 well",
     _run1d({}, {}, 5000.0, output={"snapshots": [5000.0]}, tier="long")),
    ("fig03", "|psi| versus x at various times; wide packet (delta=2) on a w=0.5 well",
     _run1d({"width": 2.0}, {"width": 0.5}, 300.0)),
    ("fig04", "|psi| versus x after t=5000; wide packet (delta=2) on a w=0.5 well",
     _run1d({"width": 2.0}, {"width": 0.5}, 5000.0, output={"snapshots": [5000.0]}, tier="long")),
    ("fig05", "square packet (d=0.5) on a square well (a=1), contour oracle against the solver at t=1000",
     {
         "mode": "compare",
         "packet": {"shape": "square", "q": 1.0, "x0": -10.0, "width": 0.5},
         "potential": {"shape": "square", "depth": 1.0, "width": 1.0},
         "evolution": {"mass": 20.0, "t_final": 1000.0},
         "output": {"snapshots": [250.0, 500.0, 750.0, 1000.0], "observables": ["norm"]},
     }),
    ("fig06", "|psi| versus x after t=3000 for a packet starting at x0=-50",
     _run1d({"x0": -50.0}, {}, 3000.0, output={"snapshots": [3000.0]})),
    ("fig07", "|psi(0)| versus time for the fig01 setup",
     _run1d(
         {}, {}, 5000.0,
         output={"snapshots": [5000.0], "observe_every": 5.0},
         analysis={"fit_t_min": 500.0, "fit_t_max": 5000.0},
         tier="long",
     )),
    ("fig08", "|Psi| at 180 degrees versus r at t=300; q = 0.5, 1, 1.5",
     _run2d(
         NARROW_2D, 300.0, _profiles(300.0, 180.0, 90.0, 0.0),
         sweep=MOMENTUM_SWEEP, analysis={"check_lmax": True, "delta_l": 10}, tier="long",
     )),
    ("fig09", "|Psi| at 90 degrees versus r at t=300; q = 0.5, 1, 1.5",
     _run2d(NARROW_2D, 300.0, _profiles(300.0, 90.0), sweep=MOMENTUM_SWEEP)),
    ("fig10", "|Psi| at 0 degrees versus r at t=300; q = 0.5, 1, 1.5",
     _run2d(NARROW_2D, 300.0, _profiles(300.0, 0.0), sweep=MOMENTUM_SWEEP)),
    ("fig11", "|Psi| at 180 and 0 degrees, q=1, zero impact parameter, t=300",
     _run2d(NARROW_2D, 300.0, _profiles(300.0, 180.0, 0.0))),
    ("fig12", "|Psi| at 180 degrees for impact parameters 0, 1.5, 3 at t=300",
     _run2d(NARROW_2D, 300.0, _profiles(300.0, 180.0), sweep=IMPACT_SWEEP)),
    ("fig13", "|Psi| at 0 degrees for impact parameters 0, 1.5, 3 at t=300",
     _run2d(NARROW_2D, 300.0, _profiles(300.0, 0.0), sweep=IMPACT_SWEEP)),
    ("fig14", "Re and Im of Phi at 180 degrees inside the well, m=20, t=150",
     _run2d(NARROW_2D, 150.0, _profiles(150.0, 180.0), output={"profile_field": "phi"})),
    ("fig15", "Re and Im of Phi at 180 degrees inside the well, m=5, t=150",
     _run2d(
         NARROW_2D, 150.0, _profiles(150.0, 180.0),
         evolution={"mass": 5.0}, output={"profile_field": "phi"},
     )),
    ("fig16", "|Psi| at 180 degrees versus r, wide packet (delta=2) on a w=0.5 well, t=300",
     _run2d(WIDE_2D, 300.0, _profiles(300.0, 180.0), sweep=MOMENTUM_SWEEP)),
    ("fig17", "|Psi| at 90 degrees versus r, wide packet (delta=2) on a w=0.5 well, t=300",
     _run2d(WIDE_2D, 300.0, _profiles(300.0, 90.0), sweep=MOMENTUM_SWEEP)),
    ("fig18", "|Psi| at 0 degrees versus r, wide packet (delta=2) on a w=0.5 well, t=300",
     _run2d(WIDE_2D, 300.0, _profiles(300.0, 0.0), sweep=MOMENTUM_SWEEP)),
    ("fig19", "|Psi| at 180 degrees for a shallow well (V0=0.03, w=2) at t=300",
     _run2d(
         {"packet": NARROW_2D["packet"], "potential": {"depth": 0.03, "width": 2.0}},
         300.0, _profiles(300.0, 180.0),
     )),
]


def recipe_config(name: str, output_root: Optional[str] = None) -> RunConfig:
    """Validated configuration of one figure recipe"""
    for figure, _, data in FIGURES:
        if figure == name:
            root = output_root or os.getenv("WELLPACKET_OUTPUT_DIR", "output")
            data = {**data, "seed_label": figure}
            data["output"] = {**data["output"], "output_dir": os.path.join(root, figure)}
            return RunConfig.model_validate(data)
    raise KeyError(f"no recipe named {name!r}")


def emit_figure_recipes(directory: Optional[str] = None, output_root: Optional[str] = None) -> List[str]:
    """
    Write one config file per figure setup.

    Args:
        directory: Target directory, WELLPACKET_RECIPES_DIR or `recipes` by default
        output_root: Parent of the per-figure output directories

    Returns:
        Paths of the written recipes, in figure order
    """
    directory = directory or os.getenv("WELLPACKET_RECIPES_DIR", "recipes")
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, caption, _ in FIGURES:
        config = recipe_config(name, output_root)
        path = os.path.join(directory, f"{name}.conf")
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# {name}: {caption}\n")
            f.write(render_config(config, full=False))
        paths.append(path)
    logger.info("wrote %d recipe(s) to %s", len(paths), directory)
    return paths
