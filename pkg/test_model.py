"""
Tests for the packet and well catalog
"""
import logging
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.core1d import norm
from src.errors import ConfigurationError, LmaxInsufficientError, UnsupportedShapeError
from src.model import (
    eval_potential,
    gaussian_field_2d,
    make_packet_1d,
    make_packet_2d,
    tail_mass_1d,
)
from src.radial2d import per_l_norms, resynthesize
from src.state import Grid1D, PacketSpec, PotentialSpec


@pytest.mark.parametrize(
    "spec, x, expected",
    [
        (PotentialSpec(shape="gaussian", depth=1.0, width=1.0), 0.0, -1.0),
        (PotentialSpec(shape="gaussian", depth=1.0, width=1.0), 1.0, -math.exp(-1.0)),
        (PotentialSpec(shape="square", depth=1.0, width=1.0), 1.5, 0.0),
        (PotentialSpec(shape="square", depth=1.0, width=1.0), 0.5, -1.0),
        (PotentialSpec(shape="lorentzian", depth=2.0, width=1.0), 1.0, -1.0),
    ],
)
def test_eval_potential_values(spec, x, expected):
    assert eval_potential(spec, x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("shape", ["gaussian", "square", "lorentzian"])
def test_potential_is_even_bounded_and_vanishes(shape):
    spec = PotentialSpec(shape=shape, depth=1.5, width=0.8)
    x = np.linspace(0.0, 50.0, 2001)
    values = eval_potential(spec, x)
    assert np.array_equal(values, eval_potential(spec, -x))
    assert np.all(values >= -1.5) and np.all(values <= 0.0)
    assert abs(values[-1]) < 1e-3
    if shape != "square":
        assert np.all(np.diff(values) >= 0)


def test_gaussian_packet_peaks_at_center(small_grid):
    psi = make_packet_1d(PacketSpec(q=1.0, x0=-10.0, width=0.5), small_grid)
    assert norm(psi) == pytest.approx(1.0, abs=1e-10)
    assert int(np.argmax(np.abs(psi.values))) == small_grid.index_of(-10.0)


def test_gaussian_packet_momentum(small_grid):
    psi = make_packet_1d(PacketSpec(q=1.0, x0=-10.0, width=0.5), small_grid)
    derivative = np.gradient(psi.values, small_grid.dx)
    momentum = trapezoid((np.conj(psi.values) * -1j * derivative).real, dx=small_grid.dx)
    assert momentum == pytest.approx(1.0, rel=1e-3)


def test_square_packet_is_flat_inside(small_grid):
    spec = PacketSpec(shape="square", q=1.0, x0=-10.0, width=0.5)
    psi = make_packet_1d(spec, small_grid)
    x = small_grid.nodes()
    inside = np.abs(x + 10.0) < 0.5 - 1e-9
    amplitude = np.abs(psi.values)
    assert np.allclose(amplitude[inside], amplitude[inside][0])
    assert np.all(amplitude[np.abs(x + 10.0) > 0.5 + 1e-9] == 0.0)
    assert norm(psi) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("shape", ["exponential", "lorentzian"])
def test_other_shapes_are_normalized(shape):
    grid = Grid1D(x_min=-200.0, x_max=200.0, n_points=16001)
    psi = make_packet_1d(PacketSpec(shape=shape, x0=0.0, width=0.5), grid)
    assert norm(psi) == pytest.approx(1.0, abs=1e-10)


def test_packet_center_outside_grid(small_grid):
    with pytest.raises(ConfigurationError, match="packet.x0"):
        make_packet_1d(PacketSpec(x0=-50.0), small_grid)


def test_packet_tail_outside_grid(small_grid):
    with pytest.raises(ConfigurationError):
        make_packet_1d(PacketSpec(x0=-39.0, width=1.0), small_grid)


def test_lorentzian_tail_only_warns(small_grid, caplog):
    spec = PacketSpec(shape="lorentzian", x0=0.0, width=0.5)
    assert tail_mass_1d(spec, small_grid) > 1e-10
    with caplog.at_level(logging.WARNING):
        psi = make_packet_1d(spec, small_grid)
    assert "Lorentzian" in caplog.text
    assert norm(psi) == pytest.approx(1.0, abs=1e-10)


@pytest.fixture(scope="module")
def radial_grid():
    return Grid1D(x_min=0.0, x_max=20.0, n_points=401)


def test_on_axis_packet_is_mirror_symmetric(radial_grid):
    state = make_packet_2d(PacketSpec(q=1.0, x0=-10.0, y0=0.0, width=0.5), radial_grid, 50)
    for l in range(1, 51):
        assert np.max(np.abs(state.wave(-l).values - state.wave(l).values)) < 1e-10


def test_fig8_packet_captures_norm(radial_grid):
    state = make_packet_2d(PacketSpec(q=1.0, x0=-10.0, y0=0.0, width=0.5), radial_grid, 50)
    assert np.sum(per_l_norms(state)) >= 0.99


def test_centered_packet_at_rest_is_isotropic(radial_grid):
    state = make_packet_2d(PacketSpec(q=0.0, x0=0.0, y0=0.0, width=0.5), radial_grid, 10)
    norms = per_l_norms(state)
    assert norms[10] == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.delete(norms, 10) < 1e-20)


def test_2d_packet_must_be_gaussian(radial_grid):
    with pytest.raises(UnsupportedShapeError):
        make_packet_2d(PacketSpec(shape="square", x0=-10.0), radial_grid, 10)


def test_2d_truncation_too_small(radial_grid):
    with pytest.raises(LmaxInsufficientError) as excinfo:
        make_packet_2d(PacketSpec(q=1.0, x0=-10.0, width=0.5), radial_grid, 2)
    assert excinfo.value.l_max == 2


def test_2d_packet_tail_beyond_r_max():
    with pytest.raises(ConfigurationError):
        make_packet_2d(PacketSpec(x0=-10.0, width=0.5), Grid1D(x_min=0.0, x_max=11.0, n_points=221), 50)


def test_projection_resynthesizes_the_packet():
    spec = PacketSpec(q=0.0, x0=-2.0, y0=0.5, width=0.5)
    grid = Grid1D(x_min=0.0, x_max=6.0, n_points=241)
    state = make_packet_2d(spec, grid, 80)
    assert 1.0 - np.sum(per_l_norms(state)) < 1e-10

    r = grid.nodes()[1:]
    phi = np.linspace(0.0, 2.0 * np.pi, 37)
    exact = gaussian_field_2d(spec, r, phi)
    scale = math.sqrt(trapezoid(grid.nodes() * np.mean(
        np.abs(gaussian_field_2d(spec, grid.nodes(), 2.0 * np.pi * np.arange(640) / 640)) ** 2, axis=1
    ), dx=grid.dx))
    rebuilt = resynthesize(state, r[:, np.newaxis], phi[np.newaxis, :])
    assert np.max(np.abs(rebuilt - exact / scale)) / np.max(np.abs(exact / scale)) < 1e-8
