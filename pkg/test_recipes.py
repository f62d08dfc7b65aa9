"""
Tests for the published figure recipes
"""
import os

import pytest

from src.config import load_config
from src.recipes import FIGURES, emit_figure_recipes, recipe_config

CAPTIONS = {
    "fig01": "|psi| versus x at several times; narrow packet on a w=1 well",
    "fig05": "square packet (d=0.5) on a square well (a=1), contour oracle against the solver at t=1000",
    "fig14": "Re and Im of Phi at 180 degrees inside the well, m=20, t=150",
    "fig19": "|Psi| at 180 degrees for a shallow well (V0=0.03, w=2) at t=300",
}


def test_every_figure_has_a_recipe(output_root):
    paths = emit_figure_recipes()
    assert len(paths) == 19
    assert [os.path.basename(p) for p in paths] == [f"fig{i:02d}.conf" for i in range(1, 20)]
    assert all(os.path.dirname(p) == str(output_root / "recipes") for p in paths)


@pytest.mark.parametrize("name", [name for name, _, _ in FIGURES])
def test_recipe_files_parse_back(tmp_path, name):
    paths = emit_figure_recipes(str(tmp_path / "conf"), output_root="runs")
    path = [p for p in paths if p.endswith(f"{name}.conf")][0]
    config, text = load_config(path)
    assert text.startswith(f"# {name}: ")
    assert config == recipe_config(name, output_root="runs")
    assert config.output.output_dir == os.path.join("runs", name)
    assert config.seed_label == name


@pytest.mark.parametrize("name, caption", sorted(CAPTIONS.items()))
def test_recipe_captions(tmp_path, name, caption):
    emit_figure_recipes(str(tmp_path))
    with open(tmp_path / f"{name}.conf", encoding="utf-8") as f:
        assert f.readline().rstrip("\n") == f"# {name}: {caption}"


def test_impact_parameter_sweep():
    config = recipe_config("fig12")
    assert config.mode == "run2d"
    assert config.sweep.key == "y0"
    assert config.sweep.values == [0.0, 1.5, 3.0]


def test_fig1_snapshots():
    config = recipe_config("fig01")
    assert config.mode == "run1d"
    assert config.snapshot_times == [50.0, 100.0, 150.0, 200.0]
    assert config.tier == "default"


@pytest.mark.parametrize("name", ["fig02", "fig04", "fig07", "fig08"])
def test_long_recipes_are_tagged(name):
    assert recipe_config(name).tier == "long"


def test_fig5_compares_square_shapes():
    config = recipe_config("fig05")
    assert config.mode == "compare"
    assert config.packet.shape == "square"
    assert config.potential.shape == "square"
    assert config.evolution.t_final == 1000.0


def test_interior_recipes_sample_phi():
    fig14, fig15 = recipe_config("fig14"), recipe_config("fig15")
    assert fig14.output.profile_field == fig15.output.profile_field == "phi"
    assert (fig14.evolution.mass, fig15.evolution.mass) == (20.0, 5.0)
    assert [(p.angle, p.time) for p in fig14.output.profiles] == [(180.0, 150.0)]


def test_shallow_well_recipe():
    assert recipe_config("fig19").potential.depth == 0.03


def test_unknown_recipe():
    with pytest.raises(KeyError):
        recipe_config("fig20")


@pytest.mark.parametrize("name", ["fig08", "fig12", "fig14", "fig16", "fig19"])
def test_radial_recipes_use_default_spacing(name):
    evolution = recipe_config(name).evolution
    assert evolution.dx is None
    assert evolution.dt is None
    assert evolution.r_max == 100.0
