"""
Tests for the partial-wave 2D solver
"""
import math

import numpy as np
import pytest

from src.analysis import detect_peaks, reflected_region_2d
from src.core1d import default_time_step
from src.errors import DomainError, NumericStateError
from src.model import make_packet_2d
from src.radial2d import (
    effective_potential,
    escalated_l_max,
    evolve_2d,
    lmax_convergence_check,
    per_l_norm_observer,
    per_l_norms,
    profiles_at,
    reconstruct_profile,
    resynthesize,
    sampled_states,
    state_observer,
    total_norm,
    total_norm_observer,
    with_waves,
)
from src.state import EvolutionParams, Grid1D, PacketSpec, PartialWaveSet, PotentialSpec

FREE = PotentialSpec(depth=0.0, width=1.0)


def test_effective_potential_free_s_wave():
    assert effective_potential(FREE, 0, 20.0, 1.0) == pytest.approx(-0.00625)


def test_effective_potential_free_p_wave():
    assert effective_potential(FREE, 1, 20.0, 1.0) == pytest.approx(0.01875)


def test_effective_potential_with_well():
    well = PotentialSpec(depth=1.0, width=2.0)
    expected = -math.exp(-0.0625) - 0.25 / (40.0 * 0.25)
    assert effective_potential(well, 0, 20.0, 0.5) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(-0.964413, abs=1e-6)


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_effective_potential_needs_positive_r(r):
    with pytest.raises(DomainError):
        effective_potential(FREE, 0, 20.0, r)


@pytest.fixture(scope="module")
def small_state():
    grid = Grid1D(x_min=0.0, x_max=20.0, n_points=401)
    return make_packet_2d(PacketSpec(q=1.0, x0=-8.0, y0=0.0, width=0.5), grid, 30)


def test_zero_time_is_identity(small_state):
    params = EvolutionParams(mass=20.0, dt=0.02, t_final=0.0)
    final, _ = evolve_2d(small_state, FREE, params)
    assert np.array_equal(final.values, small_state.values)


def test_single_s_wave_is_isotropic(small_state):
    values = np.zeros_like(small_state.values)
    values[small_state.l_max] = small_state.values[small_state.l_max]
    state = with_waves(small_state, values)
    reference = reconstruct_profile(state, 0.0, 0.0).amplitude
    for angle in (45.0, 90.0, 180.0, 270.0):
        assert np.allclose(reconstruct_profile(state, angle, 0.0).amplitude, reference, rtol=0, atol=1e-14)


def test_on_axis_profiles_are_mirror_symmetric(small_state):
    for angle in (180.0, 60.0):
        plus = reconstruct_profile(small_state, angle, 0.0).amplitude
        minus = reconstruct_profile(small_state, -angle, 0.0).amplitude
        assert np.max(np.abs(plus - minus)) <= 1e-8 * np.max(plus)


def test_phi_profile_drops_origin(small_state):
    profile = reconstruct_profile(small_state, 180.0, 0.0, quantity="phi")
    assert profile.coordinate[0] > 0
    assert profile.quantity == "phi"
    assert profile.field is not None


def test_rotation_multiplies_waves_by_phase():
    grid = Grid1D(x_min=0.0, x_max=12.0, n_points=481)
    base = make_packet_2d(PacketSpec(q=0.0, x0=-3.0, y0=0.0, width=0.5), grid, 40)
    # rotating (-3, 0) by +90 degrees about the origin gives (0, -3)
    rotated = make_packet_2d(PacketSpec(q=0.0, x0=0.0, y0=-3.0, width=0.5), grid, 40)
    phase = np.exp(-1j * base.ls * (math.pi / 2))[:, np.newaxis]
    assert np.max(np.abs(rotated.values - phase * base.values)) < 1e-10
    assert np.allclose(
        reconstruct_profile(rotated, 180.0 + 90.0, 0.0).amplitude,
        reconstruct_profile(base, 180.0, 0.0).amplitude,
        atol=1e-10,
    )


def test_evolution_conserves_norm_per_wave(small_state):
    well = PotentialSpec(depth=1.0, width=2.0)
    params = EvolutionParams(mass=20.0, dt=0.02, t_final=20.0)
    final, series = evolve_2d(
        small_state, well, params, [total_norm_observer(5.0), per_l_norm_observer(times=[20.0])]
    )
    before = per_l_norms(small_state)
    after = per_l_norms(final)
    significant = before > 1e-12 * before.max()
    assert np.max(np.abs(after - before)[significant] / before[significant]) < 1e-6
    assert abs(total_norm(final) - total_norm(small_state)) / total_norm(small_state) < 1e-4
    assert series.times("norm") == pytest.approx([0.0, 5.0, 10.0, 15.0, 20.0])
    assert len(series.records["per_l_norm"]) == 1


def test_inner_node_stays_pinned(small_state):
    params = EvolutionParams(mass=20.0, dt=0.02, t_final=1.0)
    final, _ = evolve_2d(small_state, PotentialSpec(depth=1.0, width=2.0), params)
    assert np.all(final.values[:, 0] == 0)


def test_non_finite_wave_reports_l(small_state):
    values = small_state.values.copy()
    values[small_state.l_max + 3, 50] = np.nan
    params = EvolutionParams(mass=20.0, dt=0.02, t_final=1.0)
    with pytest.raises(NumericStateError) as excinfo:
        evolve_2d(with_waves(small_state, values), FREE, params)
    assert excinfo.value.l == 3


def test_profiles_at_nearest_sampled_time(small_state):
    params = EvolutionParams(mass=20.0, dt=0.02, t_final=2.0)
    _, series = evolve_2d(small_state, FREE, params, [state_observer([1.0, 2.0])])
    states = sampled_states(series)
    assert sorted(states) == pytest.approx([1.0, 2.0])
    profiles = profiles_at(states, [(180.0, 2.0), (0.0, 1.0)])
    assert [(p.angle, p.time) for p in profiles] == [(180.0, 2.0), (0.0, 1.0)]


def test_lmax_check_with_no_increment_is_zero(small_state):
    assert lmax_convergence_check(lambda l: {0.0: small_state}, 30, 0) == 0.0


def test_lmax_check_detects_truncation():
    grid = Grid1D(x_min=0.0, x_max=20.0, n_points=401)
    spec = PacketSpec(q=1.0, x0=-8.0, width=0.5)
    build = lambda l: {0.0: make_packet_2d(spec, grid, l)}
    assert lmax_convergence_check(build, 40, 10) < 0.01


@pytest.mark.parametrize("y0, expected", [(0.0, 50), (1.5, 50), (3.0, 70)])
def test_impact_parameter_escalates_l_max(y0, expected):
    packet = PacketSpec(x0=-10.0, y0=y0)
    assert escalated_l_max(packet, PotentialSpec(width=2.0), 50) == expected


def test_resynthesis_needs_positive_r(small_state):
    with pytest.raises(DomainError):
        resynthesize(small_state, np.array([0.0, 1.0]), np.array([0.0, 0.0]))


def fig8_state(q: float, l_max: int = 50) -> PartialWaveSet:
    grid = Grid1D(x_min=0.0, x_max=100.0, n_points=4001)
    return make_packet_2d(PacketSpec(q=q, x0=-10.0, y0=0.0, width=0.5), grid, l_max)


@pytest.mark.long
def test_fig8_norm_and_backscatter_train():
    well = PotentialSpec(depth=1.0, width=2.0)
    params = EvolutionParams(mass=20.0, dt=default_time_step(20.0, 0.025), t_final=300.0)
    initial = fig8_state(1.0)
    final, _ = evolve_2d(initial, well, params)
    assert abs(total_norm(final) - total_norm(initial)) / total_norm(initial) < 1e-4

    back = reconstruct_profile(final, 180.0, 300.0)
    forward = reconstruct_profile(final, 0.0, 300.0)
    region = reflected_region_2d(well, 100.0)
    assert detect_peaks(back, region).count >= 3
    assert detect_peaks(back, region).count >= detect_peaks(forward, region).count


@pytest.mark.long
def test_fig8_truncation_converges():
    well = PotentialSpec(depth=1.0, width=2.0)
    params = EvolutionParams(mass=20.0, dt=default_time_step(20.0, 0.025), t_final=300.0)

    def build(l_max):
        _, series = evolve_2d(fig8_state(1.0, l_max), well, params, [state_observer([300.0])])
        return sampled_states(series)

    assert lmax_convergence_check(build, 50, 10) < 0.01
