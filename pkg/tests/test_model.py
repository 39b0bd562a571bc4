"""Tests for instances, schedules and Gibbs reference quantities."""
import numpy as np
import pytest

from qja.errors import InvalidInstanceError, InvalidScheduleError
from qja.model import (
    AnnealSchedule,
    CostDiagonal,
    FShape,
    InstanceKind,
    IsingInstance,
    build_double_well,
    build_random_potential,
    gibbs_reference,
    ising_to_diagonal,
    make_linear_schedule,
    make_schedule,
    random_ising,
    spin_values,
)


def brute_force_ising(inst: IsingInstance) -> np.ndarray:
    energies = []
    for index in range(2 ** inst.num_spins):
        s = [1 if (index >> k) & 1 == 0 else -1 for k in range(inst.num_spins)]
        e = -sum(J * s[i] * s[j] for i, j, J in inst.couplings)
        e -= sum(h * s[k] for k, h in enumerate(inst.fields))
        energies.append(e)
    return np.array(energies)


def test_random_potential_is_reproducible():
    first = build_random_potential(4, seed=7)
    second = build_random_potential(4, seed=7)
    np.testing.assert_array_equal(first.energies, second.energies)
    assert first.label == "potential-D4-seed7"


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_random_potential_range(seed):
    cost = build_random_potential(2, seed=seed)
    assert np.all(cost.energies <= 0.0)
    assert np.all(cost.energies >= -1.0)


def test_random_potential_ground_state_is_deepest_site():
    cost = build_random_potential(64, seed=1)
    depths = -cost.energies
    assert list(cost.ground_state_indices()) == [int(np.argmax(depths))]


def test_random_potential_rejects_single_state():
    with pytest.raises(InvalidInstanceError):
        build_random_potential(1, seed=0)


def test_cost_diagonal_validation():
    with pytest.raises(InvalidInstanceError):
        CostDiagonal(energies=[0.0, np.inf])
    with pytest.raises(InvalidInstanceError):
        CostDiagonal(energies=[1.0])
    with pytest.raises(InvalidInstanceError):
        CostDiagonal(energies=[0.0, 1.0, 2.0], num_spins=2)


def test_cost_diagonal_is_read_only():
    cost = CostDiagonal(energies=[0.0, -1.0])
    with pytest.raises(ValueError):
        cost.energies[0] = 5.0


def test_ground_state_ties_are_all_reported():
    cost = CostDiagonal(energies=[-1.0, 0.0, -1.0, 0.5])
    assert list(cost.ground_state_indices()) == [0, 2]


def test_permuted_relabels_states():
    cost = CostDiagonal(energies=[0.0, -1.0, 2.0])
    np.testing.assert_array_equal(cost.permuted([2, 0, 1]).energies, [2.0, 0.0, -1.0])


def test_single_spin_field():
    cost = ising_to_diagonal(IsingInstance(num_spins=1, fields=[1.0]))
    np.testing.assert_array_equal(cost.energies, [-1.0, 1.0])
    assert cost.kind is InstanceKind.ISING
    assert cost.num_spins == 1


def test_two_spin_ferromagnet():
    cost = ising_to_diagonal(IsingInstance(num_spins=2, couplings=((0, 1, 1.0),)))
    np.testing.assert_array_equal(cost.energies, [-1.0, 1.0, 1.0, -1.0])


@pytest.mark.parametrize("num_spins", [2, 3, 4])
def test_ising_matches_enumeration(num_spins):
    inst = random_ising(num_spins, seed=11, field_scale=0.5)
    np.testing.assert_allclose(ising_to_diagonal(inst).energies, brute_force_ising(inst), atol=1e-12)


def test_ising_rejects_bad_sites():
    with pytest.raises(InvalidInstanceError):
        IsingInstance(num_spins=2, couplings=((0, 2, 1.0),))
    with pytest.raises(InvalidInstanceError):
        IsingInstance(num_spins=2, couplings=((1, 1, 1.0),))
    with pytest.raises(InvalidInstanceError):
        IsingInstance(num_spins=2, fields=[1.0])


def test_spin_values_convention():
    spins = spin_values(2)
    np.testing.assert_array_equal(spins, [[1, 1], [-1, 1], [1, -1], [-1, -1]])


def test_double_well_shape():
    cost = build_double_well(8, barrier=0.4)
    assert list(cost.ground_state_indices()) == [0, 4]
    assert cost.energies.max() - cost.energies.min() == pytest.approx(0.4)
    with pytest.raises(InvalidInstanceError):
        build_double_well(5, barrier=0.4)


def test_gibbs_at_infinite_temperature():
    cost = build_random_potential(16, seed=3)
    gibbs = gibbs_reference(cost, 0.0)
    np.testing.assert_allclose(gibbs.probabilities, np.full(16, 1 / 16), rtol=1e-14)
    assert gibbs.log_Z == pytest.approx(np.log(16), rel=1e-15)


def test_gibbs_two_state_closed_form(two_level):
    gibbs = gibbs_reference(two_level, 1.0)
    assert gibbs.partition_function == pytest.approx(1 + np.e, rel=1e-14)


def test_gibbs_matches_direct_summation():
    cost = build_random_potential(16, seed=5)
    gibbs = gibbs_reference(cost, 3.0)
    weights = np.exp(-3.0 * cost.energies)
    assert gibbs.partition_function == pytest.approx(weights.sum(), rel=1e-14)
    np.testing.assert_allclose(gibbs.probabilities, weights / weights.sum(), rtol=1e-13)


@pytest.mark.parametrize("beta", [0.0, 1.0, 50.0, 200.0])
@pytest.mark.parametrize("D", [2, 64, 4096])
def test_gibbs_normalization(beta, D):
    gibbs = gibbs_reference(build_random_potential(D, seed=D), beta)
    assert abs(gibbs.probabilities.sum() - 1.0) < 1e-14
    amplitudes = gibbs.amplitude_state.amplitudes
    assert np.all(amplitudes.real >= 0) and np.all(amplitudes.imag == 0)
    np.testing.assert_allclose(np.abs(amplitudes) ** 2, gibbs.probabilities, atol=1e-14)


def test_gibbs_rejects_negative_beta(two_level):
    with pytest.raises(ValueError):
        gibbs_reference(two_level, -1.0)


def test_linear_schedule_endpoints():
    schedule = make_linear_schedule(1000, 0.1, 100.0)
    assert schedule.beta_grid[0] == 0.0
    assert schedule.beta_grid[-1] == 100.0
    assert schedule.f_grid[0] == 0.0 and schedule.f_grid[-1] == 1.0
    assert schedule.total_time == pytest.approx(100.0)


def test_linear_schedule_single_step():
    np.testing.assert_array_equal(make_linear_schedule(1, 1.0, 1.0).beta_grid, [0.0, 1.0])


def test_linear_schedule_constant_increments():
    schedule = make_linear_schedule(10, 0.5, 5.0)
    np.testing.assert_allclose(schedule.delta_beta, np.full(10, 0.5), rtol=1e-15)


@pytest.mark.parametrize("args", [(0, 0.1, 1.0), (10, 0.0, 1.0), (10, 0.1, 0.0), (10, -0.1, 1.0)])
def test_linear_schedule_rejects_nonpositive(args):
    with pytest.raises(InvalidScheduleError):
        make_linear_schedule(*args)


def test_smoothstep_schedule():
    schedule = make_schedule(4, 0.1, 2.0, FShape.SMOOTHSTEP)
    np.testing.assert_allclose(schedule.f_grid, [0.0, 0.15625, 0.5, 0.84375, 1.0])
    np.testing.assert_allclose(schedule.beta_grid, [0.0, 0.5, 1.0, 1.5, 2.0])


def test_schedule_validation():
    with pytest.raises(InvalidScheduleError):
        AnnealSchedule(n_steps=2, dt=0.1, beta_grid=[0.0, 2.0, 1.0], f_grid=[0.0, 0.5, 1.0])
    with pytest.raises(InvalidScheduleError):
        AnnealSchedule(n_steps=2, dt=0.1, beta_grid=[0.0, 1.0], f_grid=[0.0, 1.0])
    with pytest.raises(InvalidScheduleError):
        AnnealSchedule(n_steps=1, dt=0.1, beta_grid=[0.0, 1.0], f_grid=[0.0, 1.5])


def test_constant_beta_schedule_has_no_increments():
    schedule = AnnealSchedule.constant_beta(5, 0.2, 3.0)
    assert np.all(schedule.delta_beta == 0.0)
    np.testing.assert_allclose(schedule.times, 0.2 * np.arange(6))


def test_bit_convention_round_trip():
    inst = IsingInstance(num_spins=3, fields=[0.3, -0.2, 0.1])
    cost = ising_to_diagonal(inst)
    for index in range(8):
        spins = [1 - 2 * ((index >> k) & 1) for k in range(3)]
        assert cost.energies[index] == pytest.approx(-np.dot(spins, inst.fields))
