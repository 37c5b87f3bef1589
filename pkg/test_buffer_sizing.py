import math

import numpy as np
import pytest

from buffer_sizing import (default_buffer_grid, required_buffer_from_sim, rs_variance, sizing_table,
                           theorem6_bound, variance_term)
from channel_model import RandomStream
from errors import ConfigError, DomainError, Unreachable
from full_csi_solver import ConstantPolicy, solve_capacity, solve_subproblem

EPS = 0.2


def test_bound_by_hand():
    # C = 1, eps = 0, var = 1 gives V = 1 and a log argument of 1 / 0.1^2
    assert variance_term(1.0, 0.0, 1.0) == 1.0
    assert theorem6_bound(1.0, 0.0, 0.1, 1.0) == pytest.approx(1.0 + 10.0 * math.log(100.0), abs=1e-12)


def test_halving_the_gap_scales_the_excess():
    capacity, eps, var_rs = 1.3, 0.02, 0.7
    for gap in (0.02, 0.01):
        wide = theorem6_bound(capacity, eps, eps + gap, var_rs) - capacity
        narrow = theorem6_bound(capacity, eps, eps + gap / 2, var_rs) - capacity
        argument = variance_term(capacity, eps, var_rs) / (gap * gap * capacity)
        assert narrow / wide == pytest.approx(2.0 * (1.0 + math.log(4.0) / math.log(argument)), rel=1e-12)
        assert narrow / wide > 2.0


def test_bound_is_monotone():
    bounds = [theorem6_bound(1.0, 0.05, 0.05 + gap, 0.5) for gap in (0.005, 0.01, 0.02, 0.04)]
    assert np.all(np.diff(bounds) < 0)
    assert theorem6_bound(1.0, 0.05, 0.06, 1.0) > theorem6_bound(1.0, 0.05, 0.06, 0.5)


def test_bound_domain():
    with pytest.raises(DomainError):
        theorem6_bound(1.0, 0.0, 0.5, 0.0)
    with pytest.raises(ConfigError):
        theorem6_bound(1.0, 0.2, 0.2, 1.0)
    with pytest.raises(ConfigError):
        theorem6_bound(0.0, 0.2, 0.3, 1.0)
    with pytest.raises(ConfigError):
        theorem6_bound(1.0, 0.2, 0.3, -1.0)


def test_variance_of_constant_power(four_state):
    # R_s is 2 on (10, 1) and 0 elsewhere
    assert rs_variance(ConstantPolicy(0.5), four_state) == pytest.approx(0.4 * 4 - 0.8 ** 2, abs=1e-12)


def test_default_grid_scales_with_rate():
    grid = default_buffer_grid(1.5)
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(90.0)


def test_loose_target_needs_no_buffer(four_state):
    solution = solve_capacity(four_state, 0.5, EPS)
    requirement = required_buffer_from_sim(four_state, solution.policy, solution.capacity, EPS, 1.0,
                                           RandomStream(3), horizon=20_000)
    assert requirement.buffer_M == 0.0


def test_rate_above_capacity_is_unreachable(four_state):
    solution = solve_capacity(four_state, 0.5, EPS)
    rate = 1.5 * solution.capacity
    policy = solve_subproblem(four_state, 0.5, EPS, rate)
    with pytest.raises(Unreachable):
        required_buffer_from_sim(four_state, policy, rate, EPS, EPS + 0.001, RandomStream(3),
                                 horizon=20_000, M_grid=[0.0, rate, 10 * rate])


def test_required_buffer_is_the_smallest_passing_grid_point(four_state):
    solution = solve_capacity(four_state, 0.5, EPS)
    rate = 0.9 * solution.capacity
    policy = solve_subproblem(four_state, 0.5, EPS, rate)
    grid = rate * np.arange(0, 41)
    requirement = required_buffer_from_sim(four_state, policy, rate, EPS, EPS + 0.02, RandomStream(5),
                                           horizon=50_000, M_grid=grid)
    assert requirement.eps_prime + requirement.ci_halfwidth <= EPS + 0.02
    assert requirement.buffer_M in grid
    assert requirement.buffer_M > 0
    # same stream, same draws: every smaller grid point misses the target
    with pytest.raises(Unreachable):
        required_buffer_from_sim(four_state, policy, rate, EPS, EPS + 0.02, RandomStream(5),
                                 horizon=50_000, M_grid=grid[grid < requirement.buffer_M])


def test_sizing_table_without_simulation(four_state):
    solution = solve_capacity(four_state, 0.5, EPS)
    table = sizing_table(four_state, solution.policy, solution.capacity, EPS, [0.3, 0.21, 0.25], seed=1,
                         simulate=False)
    assert list(table.columns) == ["eps", "eps_prime", "C", "var_rs", "V", "bound_M", "simulated_M",
                                   "sim_ci_halfwidth"]
    assert table["eps_prime"].tolist() == pytest.approx([0.21, 0.25, 0.3])
    assert table["simulated_M"].isna().all()
    assert np.all(np.diff(table["bound_M"]) < 0)


def test_sizing_table_records_vacuous_bounds(four_state):
    policy = ConstantPolicy(0.5)
    table = sizing_table(four_state, policy, 1.0, 0.0, [0.99], seed=1, simulate=False)
    assert math.isnan(table["bound_M"].iloc[0])


@pytest.mark.slow
def test_simulated_buffer_stays_below_the_bound(chi_square_coarse):
    eps = 0.02
    solution = solve_capacity(chi_square_coarse, 1.0, eps)
    capacity = solution.capacity
    var_rs = rs_variance(solution.policy, chi_square_coarse)
    eps_prime = eps + 0.005
    bound = theorem6_bound(capacity, eps, eps_prime, var_rs)
    grid = np.linspace(0.0, bound, 101)
    requirement = required_buffer_from_sim(chi_square_coarse, solution.policy, capacity, eps, eps_prime,
                                           RandomStream(17), horizon=1_000_000, M_grid=grid)
    assert requirement.buffer_M <= bound
