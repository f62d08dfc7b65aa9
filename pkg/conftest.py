"""
Shared fixtures for the wave-packet simulator tests
"""
import numpy as np
import pytest

from src.core1d import default_grid, default_time_step
from src.model import eval_potential, make_packet_1d
from src.state import EvolutionParams, Grid1D, PacketSpec, PotentialSpec


@pytest.fixture(autouse=True)
def output_root(tmp_path, monkeypatch):
    """Keep every default output directory inside the test's tmp_path"""
    monkeypatch.setenv("WELLPACKET_OUTPUT_DIR", str(tmp_path / "output"))
    monkeypatch.setenv("WELLPACKET_RECIPES_DIR", str(tmp_path / "recipes"))
    return tmp_path


@pytest.fixture
def fig1_packet():
    return PacketSpec(shape="gaussian", q=1.0, x0=-10.0, width=0.5)


@pytest.fixture
def fig1_well():
    return PotentialSpec(shape="gaussian", depth=1.0, width=1.0)


@pytest.fixture
def small_grid():
    return Grid1D(x_min=-40.0, x_max=40.0, n_points=3201)


@pytest.fixture
def free_setup(small_grid, fig1_packet):
    """fig01 packet on a small box with no well"""
    psi = make_packet_1d(fig1_packet, small_grid)
    samples = np.zeros(small_grid.n_points)
    params = EvolutionParams(mass=20.0, dt=default_time_step(20.0, small_grid.dx), t_final=0.0)
    return psi, samples, params


@pytest.fixture
def fig1_setup(fig1_packet, fig1_well):
    """fig01 packet and well on the default grid up to t = 200"""
    grid = default_grid(fig1_packet, fig1_well, 20.0, 200.0)
    psi = make_packet_1d(fig1_packet, grid)
    samples = eval_potential(fig1_well, grid.nodes())
    params = EvolutionParams(mass=20.0, dt=default_time_step(20.0, grid.dx), t_final=200.0)
    return psi, samples, params
