"""
Tests for the 1D grid, Cayley propagator and time loop
"""
import numpy as np
import pytest
from pydantic import ValidationError

from src.analysis import detect_peaks, fit_exponential_decay, fit_power_law, is_polychotomous, reflected_region_1d
from src.core1d import (
    cayley_step,
    center_amplitude_observer,
    default_grid,
    default_time_step,
    energy_expectation,
    energy_observer,
    evolve,
    norm,
    norm_observer,
    snapshot_observer,
    spread_width,
)
from src.errors import ConfigurationError, NumericStateError
from src.model import eval_potential, make_packet_1d
from src.state import ComplexField1D, EvolutionParams, Grid1D, PacketSpec, PotentialSpec
from src.utils_save_output import snapshot_profile


def moments(psi):
    x = psi.grid.nodes()
    density = np.abs(psi.values) ** 2
    total = np.sum(density)
    mean = np.sum(x * density) / total
    return mean, np.sqrt(np.sum((x - mean) ** 2 * density) / total)


def test_grid_reproduces_endpoints():
    grid = Grid1D(x_min=-3.0, x_max=7.0, n_points=1001)
    x = grid.nodes()
    assert grid.dx == pytest.approx(0.01)
    assert x[-1] == 7.0
    assert np.allclose(np.diff(x), grid.dx, rtol=0, atol=1e-12)


def test_grid_rejects_too_few_points():
    with pytest.raises(ValidationError):
        Grid1D(x_min=0.0, x_max=1.0, n_points=2)


def test_field_length_must_match_grid(small_grid):
    with pytest.raises(ValidationError):
        ComplexField1D(grid=small_grid, values=np.zeros(10))


def test_norm_of_zero_field_is_zero(small_grid):
    assert norm(ComplexField1D(grid=small_grid, values=np.zeros(small_grid.n_points))) == 0.0


def test_constructed_packet_has_unit_norm(small_grid, fig1_packet):
    assert norm(make_packet_1d(fig1_packet, small_grid)) == pytest.approx(1.0, abs=1e-10)


def test_disjoint_packets_add(small_grid):
    left = make_packet_1d(PacketSpec(x0=-15.0), small_grid)
    right = make_packet_1d(PacketSpec(x0=15.0), small_grid)
    assert norm(left.with_values(left.values + right.values)) == pytest.approx(2.0, abs=1e-6)


def test_free_step_conserves_norm(free_setup):
    psi, samples, params = free_setup
    params = params.model_copy(update={"t_final": params.dt})
    stepped = cayley_step(psi, samples, params)
    assert abs(norm(stepped) - norm(psi)) / norm(psi) < 1e-12


def test_step_is_unitary_with_well(small_grid, fig1_packet, fig1_well):
    psi = make_packet_1d(fig1_packet.model_copy(update={"x0": -1.0}), small_grid)
    samples = eval_potential(fig1_well, small_grid.nodes())
    params = EvolutionParams(mass=20.0, dt=0.05, t_final=0.05)
    current = psi
    for _ in range(20):
        stepped = cayley_step(current, samples, params)
        assert abs(norm(stepped) - norm(current)) / norm(current) < 1e-10
        current = stepped


def test_backward_step_inverts_forward_step(small_grid, fig1_packet, fig1_well):
    psi = make_packet_1d(fig1_packet.model_copy(update={"x0": -2.0}), small_grid)
    samples = eval_potential(fig1_well, small_grid.nodes())
    params = EvolutionParams(mass=20.0, dt=0.01, t_final=0.01)
    back = cayley_step(cayley_step(psi, samples, params), samples, params, backward=True)
    assert np.max(np.abs(back.values - psi.values)) < 1e-9


def test_step_rejects_mismatched_potential(free_setup):
    psi, _, params = free_setup
    with pytest.raises(ConfigurationError):
        cayley_step(psi, np.zeros(5), params.model_copy(update={"t_final": params.dt}))


def test_step_rejects_non_finite_amplitudes(free_setup):
    psi, samples, params = free_setup
    values = psi.values.copy()
    values[100] = np.nan
    with pytest.raises(NumericStateError):
        cayley_step(psi.with_values(values), samples, params.model_copy(update={"t_final": params.dt}))


def test_zero_time_evolution_is_identity(free_setup):
    psi, samples, params = free_setup
    final, _ = evolve(psi, samples, params)
    assert np.array_equal(final.values, psi.values)


def test_snapshot_outside_horizon_is_rejected(free_setup):
    psi, samples, params = free_setup
    params = params.model_copy(update={"t_final": 1.0})
    with pytest.raises(ConfigurationError):
        evolve(psi, samples, params, [snapshot_observer([2.0])])


def test_free_gaussian_energy(free_setup):
    psi, samples, _ = free_setup
    reading = energy_expectation(psi, samples, 20.0)
    assert reading.normalized
    assert reading.value == pytest.approx(0.025 + 0.025, rel=0.02)


def test_bound_like_state_has_negative_energy(small_grid):
    well = PotentialSpec(depth=10.0, width=1.0)
    psi = make_packet_1d(PacketSpec(q=0.0, x0=0.0, width=0.3), small_grid)
    assert energy_expectation(psi, eval_potential(well, small_grid.nodes()), 20.0).value < 0


def test_energy_flags_unnormalized_state(free_setup):
    psi, samples, _ = free_setup
    reading = energy_expectation(psi.with_values(2.0 * psi.values), samples, 20.0)
    assert not reading.normalized


def test_discrete_energy_is_conserved(small_grid, fig1_packet, fig1_well):
    psi = make_packet_1d(fig1_packet.model_copy(update={"x0": -3.0}), small_grid)
    samples = eval_potential(fig1_well, small_grid.nodes())
    params = EvolutionParams(mass=20.0, dt=0.01, t_final=10.0)
    final, _ = evolve(psi, samples, params)
    before = energy_expectation(psi, samples, 20.0).value
    after = energy_expectation(final, samples, 20.0).value
    assert abs(after - before) / abs(before) < 1e-8


def test_free_packet_moves_and_spreads(free_setup):
    psi, samples, params = free_setup
    params = params.model_copy(update={"t_final": 50.0})
    final, _ = evolve(psi, samples, params)
    start, _ = moments(psi)
    end, width = moments(final)
    assert (end - start) / 50.0 == pytest.approx(1.0 / 20.0, rel=1e-3)
    assert width == pytest.approx(spread_width(0.5, 20.0, 50.0), rel=5e-3)


def test_default_grid_is_symmetric_with_center_node(fig1_packet, fig1_well):
    grid = default_grid(fig1_packet, fig1_well, 20.0, 200.0)
    assert grid.x_min == -grid.x_max
    assert grid.n_points % 2 == 1
    assert grid.nodes()[grid.n_points // 2] == pytest.approx(0.0, abs=1e-12)
    assert grid.dx == pytest.approx(0.025)
    assert grid.x_max >= 200.0


def test_observers_sample_on_schedule(free_setup):
    psi, samples, params = free_setup
    params = params.model_copy(update={"t_final": 1.0, "dt": 0.01})
    _, series = evolve(
        psi, samples, params,
        [norm_observer(every=0.25), center_amplitude_observer(0.5, t_min=0.5), snapshot_observer([0.5])],
    )
    assert series.times("norm") == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert series.times("center_amplitude") == pytest.approx([0.5, 1.0])
    assert [t for t, _ in series.records["snapshot"]] == pytest.approx([0.5])


@pytest.fixture(scope="module")
def fig1_run():
    packet = PacketSpec(q=1.0, x0=-10.0, width=0.5)
    well = PotentialSpec(depth=1.0, width=1.0)
    grid = default_grid(packet, well, 20.0, 200.0)
    psi = make_packet_1d(packet, grid)
    samples = eval_potential(well, grid.nodes())
    params = EvolutionParams(mass=20.0, dt=default_time_step(20.0, grid.dx), t_final=200.0)
    observers = [
        norm_observer(every=5.0),
        energy_observer(samples, 20.0, every=5.0),
        snapshot_observer([50.0, 100.0, 150.0, 200.0]),
    ]
    final, series = evolve(psi, samples, params, observers)
    return psi, final, series


def test_fig1_norm_drift(fig1_run):
    psi, final, _ = fig1_run
    assert abs(norm(final) / norm(psi) - 1.0) < 1e-4


def test_fig1_energy_is_conserved(fig1_run):
    _, _, series = fig1_run
    energy = series.values("energy")
    assert abs(energy[-1] - energy[0]) / abs(energy[0]) < 1e-6


def test_fig1_reflected_train_starts_near_the_well(fig1_run):
    _, final, _ = fig1_run
    train = detect_peaks(snapshot_profile(final, 200.0), (final.grid.x_min, -5.0))
    assert train.count >= 1
    assert -8.0 < train.positions[-1] < -5.0


@pytest.mark.long
def test_fig1_reflected_train_has_multiple_peaks(fig1_packet, fig1_well):
    train = reflected_train(fig1_packet, fig1_well, 600.0)
    assert train.count >= 3
    assert train.spacing_cv < 0.2


@pytest.mark.long
def test_grid_convergence_at_t200(fig1_packet, fig1_well):
    half = 210.0
    results = []
    for dx in (0.025, 0.0125):
        grid = Grid1D(x_min=-half, x_max=half, n_points=int(round(2 * half / dx)) + 1)
        psi = make_packet_1d(fig1_packet, grid)
        params = EvolutionParams(mass=20.0, dt=default_time_step(20.0, dx), t_final=200.0)
        final, _ = evolve(psi, eval_potential(fig1_well, grid.nodes()), params)
        results.append(np.abs(final.values))
    coarse, fine = results[0], results[1][::2]
    assert np.max(np.abs(coarse - fine)) / np.max(fine) < 0.01


@pytest.mark.long
def test_long_run_norm_and_decay_law(fig1_packet, fig1_well):
    grid = default_grid(fig1_packet, fig1_well, 20.0, 5000.0)
    psi = make_packet_1d(fig1_packet, grid)
    params = EvolutionParams(mass=20.0, dt=default_time_step(20.0, grid.dx), t_final=5000.0)
    final, series = evolve(
        psi, eval_potential(fig1_well, grid.nodes()), params, [center_amplitude_observer(5.0, t_min=500.0), snapshot_observer([5000.0])]
    )
    assert abs(norm(final) / norm(psi) - 1.0) < 1e-4

    power = fit_power_law(series, (500.0, 5000.0))
    decay = fit_exponential_decay(series, (500.0, 5000.0))
    assert 1.35 <= power.exponent <= 1.75
    assert power.residual < decay.residual

    train = detect_peaks(snapshot_profile(final, 5000.0), (grid.x_min, -5.0))
    assert train.count >= 3
    assert train.spacing_cv < 0.15


def reflected_train(packet, well, t_final):
    grid = default_grid(packet, well, 20.0, t_final)
    psi = make_packet_1d(packet, grid)
    params = EvolutionParams(mass=20.0, dt=default_time_step(20.0, grid.dx), t_final=t_final)
    final, _ = evolve(psi, eval_potential(well, grid.nodes()), params)
    return detect_peaks(snapshot_profile(final, t_final), reflected_region_1d(well, grid.x_min))


@pytest.mark.long
def test_wide_packet_forms_no_train():
    train = reflected_train(PacketSpec(q=1.0, x0=-10.0, width=2.0), PotentialSpec(width=0.5), 300.0)
    assert train.count <= 2
    assert not is_polychotomous(train)


@pytest.mark.long
@pytest.mark.parametrize(
    "width, well_width, polychotomous",
    [(0.5, 1.0, True), (2.0, 0.5, False), (2.0, 1.0, False)],
)
def test_trains_form_only_for_packets_narrower_than_the_well(width, well_width, polychotomous):
    train = reflected_train(PacketSpec(q=1.0, x0=-10.0, width=width), PotentialSpec(width=well_width), 600.0)
    assert is_polychotomous(train) == polychotomous
