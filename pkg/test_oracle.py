"""
Tests for the square-well contour oracle
"""
import logging
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.core1d import norm
from src.errors import ConfigurationError, UnsupportedShapeError
from src.oracle import (
    default_contour,
    evolve_analytic,
    gibbs_mask,
    packet_fourier_amplitude,
    scattering_coefficients,
    square_well_states,
    stationary_state,
    transmission_resonances,
)
from src.state import Grid1D, PacketSpec

SQUARE_PACKET = PacketSpec(shape="square", q=1.0, x0=-10.0, width=0.5)


@pytest.fixture(scope="module")
def fig5_well():
    return square_well_states(1.0, 1.0, 20.0)


def test_bound_state_count(fig5_well):
    z0 = math.sqrt(40.0)
    assert len(fig5_well.bound_states) == math.floor(1 + 2 * z0 / math.pi) == 5
    assert [s.parity for s in fig5_well.bound_states] == ["even", "odd", "even", "odd", "even"]


def test_bound_states_solve_matching_conditions(fig5_well):
    z0 = math.sqrt(40.0)
    for state in fig5_well.bound_states:
        assert state.kappa == pytest.approx(math.sqrt(2.0 * 20.0 * abs(state.energy)), rel=1e-14)
        z = math.sqrt(z0 * z0 - state.kappa ** 2)
        if state.parity == "even":
            residual = z * math.sin(z) - state.kappa * math.cos(z)
        else:
            residual = z * math.cos(z) + state.kappa * math.sin(z)
        assert abs(residual) < 1e-10


def test_no_well_is_a_plane_wave():
    free = square_well_states(0.0, 1.0, 20.0)
    assert free.bound_states == []
    r, _, _, t = scattering_coefficients(free, 1.3)
    assert abs(r) < 1e-12
    assert t == pytest.approx(1.0, abs=1e-12)
    x = np.linspace(-5.0, 5.0, 41)
    assert np.allclose(stationary_state(free, 1.3, x), np.exp(1.3j * x), atol=1e-12)


def test_flux_is_conserved(fig5_well):
    p = np.linspace(0.05, 20.0, 400)
    r, _, _, t = scattering_coefficients(fig5_well, p)
    assert np.max(np.abs(np.abs(r) ** 2 + np.abs(t) ** 2 - 1.0)) < 1e-12


def test_first_transmission_resonance(fig5_well):
    resonances = transmission_resonances(fig5_well, 6.0)
    assert resonances[0] == pytest.approx(math.sqrt((5 * math.pi / 2) ** 2 - 40.0), rel=1e-12)
    assert resonances[0] == pytest.approx(4.657, abs=1e-3)
    _, _, _, t = scattering_coefficients(fig5_well, resonances[0])
    assert abs(t) == pytest.approx(1.0, abs=1e-10)


def test_stationary_state_is_continuous_at_the_edges(fig5_well):
    eps = 1e-9
    for edge in (-1.0, 1.0):
        left = stationary_state(fig5_well, 0.7, edge - eps)
        right = stationary_state(fig5_well, 0.7, edge + eps)
        assert abs(left - right) < 1e-6


def test_zero_momentum_limit(fig5_well):
    r, _, _, t = scattering_coefficients(fig5_well, 0.0)
    assert r == -1.0
    assert t == 0.0


def test_threshold_resonance_warns(caplog):
    states = square_well_states(math.pi ** 2 / 40.0, 1.0, 20.0)
    with caplog.at_level(logging.WARNING):
        _, _, _, t = scattering_coefficients(states, 0.0)
    assert "threshold resonance" in caplog.text
    assert np.isfinite(t)


def test_fourier_amplitude_limits():
    d = SQUARE_PACKET.width
    peak = packet_fourier_amplitude(SQUARE_PACKET, SQUARE_PACKET.q)
    assert abs(peak) == pytest.approx(math.sqrt(2.0 / math.pi) / math.sqrt(2.0 * d) * d, rel=1e-14)
    assert abs(packet_fourier_amplitude(SQUARE_PACKET, SQUARE_PACKET.q + math.pi / d)) < 1e-15


def test_fourier_amplitude_parseval():
    span = 5000.0
    d = SQUARE_PACKET.width
    p = np.linspace(SQUARE_PACKET.q - span, SQUARE_PACKET.q + span, 1_000_001)
    total = trapezoid(np.abs(packet_fourier_amplitude(SQUARE_PACKET, p)) ** 2, p)
    # the two 1/p^2 tails beyond the span carry 1 / (pi d span)
    assert total + 1.0 / (math.pi * d * span) == pytest.approx(1.0, abs=1e-5)


def test_fourier_amplitude_needs_square_packet():
    with pytest.raises(UnsupportedShapeError):
        packet_fourier_amplitude(PacketSpec(shape="gaussian"), 1.0)


def test_default_contour_clears_the_poles(fig5_well):
    contour = default_contour(fig5_well, SQUARE_PACKET, 10.0)
    kappa_max = max(s.kappa for s in fig5_well.bound_states)
    assert contour.detour_height == pytest.approx(kappa_max + 1.0)
    assert contour.p_max == pytest.approx(SQUARE_PACKET.q + 30.0 / SQUARE_PACKET.width)


@pytest.mark.parametrize(
    "update",
    [{"p_max": 15.0}, {"detour_height": 0.5}, {"detour_half_width": 100.0}],
)
def test_invalid_contours_are_rejected(fig5_well, update):
    contour = default_contour(fig5_well, SQUARE_PACKET, 10.0).model_copy(update=update)
    with pytest.raises(ConfigurationError):
        evolve_analytic(fig5_well, SQUARE_PACKET, contour, Grid1D(x_min=-12.0, x_max=-8.0, n_points=41), 10.0)


def test_packet_must_start_left_of_the_well(fig5_well):
    packet = SQUARE_PACKET.model_copy(update={"x0": -1.2})
    contour = default_contour(fig5_well, packet, 0.0)
    with pytest.raises(ConfigurationError):
        evolve_analytic(fig5_well, packet, contour, Grid1D(x_min=-3.0, x_max=0.0, n_points=31), 0.0)


def test_initial_packet_is_reproduced(fig5_well):
    packet = SQUARE_PACKET.model_copy(update={"width": 2.0})
    contour = default_contour(fig5_well, packet, 0.0).model_copy(update={"p_max": 100.0, "n_nodes": 16384})
    window = Grid1D(x_min=-14.0, x_max=-6.0, n_points=401)
    psi = evolve_analytic(fig5_well, packet, contour, window, 0.0)

    x = window.nodes()
    plateau = 1.0 / math.sqrt(2.0 * packet.width)
    exact = np.where(np.abs(x - packet.x0) < packet.width, plateau * np.exp(1j * packet.q * (x - packet.x0)), 0.0)
    away = (np.abs(x - (packet.x0 - packet.width)) > 0.5) & (np.abs(x - (packet.x0 + packet.width)) > 0.5)
    assert np.max(np.abs(psi.values - exact)[away]) < 0.01 * plateau


def test_contour_independence(fig5_well):
    window = Grid1D(x_min=-14.0, x_max=-6.0, n_points=201)
    contour = default_contour(fig5_well, SQUARE_PACKET, 10.0).model_copy(update={"n_nodes": 32768})
    low = evolve_analytic(fig5_well, SQUARE_PACKET, contour, window, 10.0)
    raised = contour.model_copy(update={"detour_height": contour.detour_height + 1.0})
    high = evolve_analytic(fig5_well, SQUARE_PACKET, raised, window, 10.0)
    assert np.max(np.abs(low.values - high.values)) < 1e-6 * np.max(np.abs(high.values))


def test_norm_is_preserved(fig5_well):
    window = Grid1D(x_min=-30.0, x_max=10.0, n_points=2001)
    norms = []
    for t in (0.0, 5.0):
        contour = default_contour(fig5_well, SQUARE_PACKET, t).model_copy(update={"n_nodes": 16384})
        norms.append(norm(evolve_analytic(fig5_well, SQUARE_PACKET, contour, window, t)))
    assert norms[1] == pytest.approx(norms[0], rel=5e-3)


def test_gibbs_mask_excludes_edges():
    x = np.array([-10.5, -10.4, -10.0, -9.5, -9.0])
    mask = gibbs_mask(SQUARE_PACKET, x, 61.0)
    assert mask.tolist() == [False, True, True, False, True]
