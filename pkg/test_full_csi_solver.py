import itertools
import math

import numpy as np
import pytest

from channel_model import FadingDistribution, rayleigh
from errors import ConfigError, InfeasibleOutage, InfeasibleRate, NoConvergence
from full_csi_solver import (ConstantPolicy, evaluate_constant_policy, expected_rs_of, find_fixed_point,
                             high_power_limit, policy_arrays, r_max, rate_curve, solve_capacity,
                             solve_subproblem)
from main_csi_solver import solve_capacity_main

P_AVG = 0.5
EPS = 0.2


def _waterfill_from_scratch(h_m, h_e, lam):
    """Positive root of (1 + h_m P)(1 + h_e P) = (h_m - h_e) / lam, zero when h_m <= h_e."""
    b = h_m + h_e
    root = (-b + np.sqrt((h_m - h_e) ** 2 + 4.0 * h_m * h_e * (h_m - h_e) / lam)) / (2.0 * h_m * h_e)
    return np.where(h_m > h_e, np.maximum(root, 0.0), 0.0)


def _secrecy_from_scratch(h_m, h_e, p):
    return np.maximum(np.log2(1.0 + h_m * p) - np.log2(1.0 + h_e * p), 0.0)


def four_state_exhaustive_optimum(step: float = 1e-3) -> float:
    """Largest rate over waterfilling multipliers, inversion regions and boundary randomizations.

    Every region is a set of atoms inverted outright plus one boundary atom
    inverted with probability q on a 1e-3 grid. A combination is feasible
    when the region carries at least 1 - eps, the average power fits the
    budget and E[R_s] covers (1 - eps) R.
    """
    h_m = np.array([1.0, 1.0, 10.0, 10.0])
    h_e = np.array([1.0, 10.0, 1.0, 10.0])
    w = np.array([0.1, 0.1, 0.4, 0.4])
    rates = np.arange(0.0, math.log2(7.25) + step / 2, step)
    need = (1.0 - EPS) * rates
    p_inv_rate = np.expm1(rates * math.log(2.0))[:, None] / h_m
    regions = [(frozenset(s), j) for j in range(4)
               for s in itertools.chain.from_iterable(
                   itertools.combinations([i for i in range(4) if i != j], n) for n in range(4))]
    best = 0.0
    for lam in np.geomspace(1e-3, 1e2, 301):
        p_out = _waterfill_from_scratch(h_m, h_e, lam)
        p_in = np.maximum(p_inv_rate, p_out)
        rs_in = _secrecy_from_scratch(h_m, h_e, p_in)
        rs_out = _secrecy_from_scratch(h_m, h_e, p_out)
        for inside, j in regions:
            taken = np.array([1.0 if i in inside else 0.0 for i in range(4)])
            base_mass = float(np.dot(w, taken))
            base_power = p_in @ (w * taken) + float(np.dot(w * (1.0 - taken), p_out))
            base_rs = rs_in @ (w * taken) + float(np.dot(w * (1.0 - taken), rs_out))
            power_slope = w[j] * (p_in[:, j] - p_out[j])
            rs_slope = w[j] * (rs_in[:, j] - rs_out[j])
            q_mass = (1.0 - EPS - base_mass) / w[j]
            with np.errstate(divide="ignore", invalid="ignore"):
                q_rs = np.where(rs_slope > 0, (need - base_rs) / rs_slope,
                                np.where(base_rs >= need - 1e-12, -np.inf, np.inf))
            q = np.ceil(np.maximum(np.maximum(q_rs, q_mass), 0.0) * 1000.0 - 1e-6) / 1000.0
            feasible = (q <= 1.0) & (base_power + q * power_slope <= P_AVG + 1e-12)
            if np.any(feasible):
                best = max(best, float(rates[feasible].max()))
    return best


def test_largest_invertible_rate(four_state):
    assert r_max(four_state, P_AVG, EPS) == pytest.approx(math.log2(7.25), abs=1e-12)
    assert r_max(four_state, 0.0, EPS) == 0.0


def test_rayleigh_without_outage_cannot_invert():
    assert r_max(rayleigh(quadrature_order=32), 1.0, 0.0) == 0.0


def test_problem_validation(four_state):
    with pytest.raises(InfeasibleOutage):
        solve_capacity(four_state, P_AVG, 1.0)
    with pytest.raises(ConfigError):
        solve_capacity(four_state, -1.0, EPS)
    with pytest.raises(ConfigError):
        solve_capacity(four_state, P_AVG, -0.1)
    with pytest.raises(InfeasibleRate):
        solve_subproblem(four_state, P_AVG, EPS, 3.0)


def test_four_state_capacity_and_policy(four_state):
    solution = solve_capacity(four_state, P_AVG, EPS)
    assert solution.capacity == pytest.approx(1.26, abs=0.005)
    assert solution.lambda_star == pytest.approx(0.3525, abs=0.002)
    assert solution.expected_power == pytest.approx(P_AVG, abs=1e-6)
    assert solution.expected_rs == pytest.approx((1 - EPS) * solution.capacity, abs=1e-6)
    assert solution.channel_outage_prob <= EPS + 1e-6

    table = {(row["h_m"], row["h_e"]): row for row in solution.policy.region_table()}
    assert [table[key]["region"] for key in [(1, 1), (1, 10), (10, 1), (10, 10)]] == ["wf", "wf", "wf", "inv"]
    assert table[(1.0, 1.0)]["power"] == 0.0
    assert table[(1.0, 10.0)]["power"] == 0.0
    assert table[(10.0, 1.0)]["power"] == pytest.approx(1.11, abs=0.005)
    assert table[(10.0, 10.0)]["power"] == pytest.approx(0.14, abs=0.002)


def test_four_state_matches_exhaustive_search(four_state):
    solution = solve_capacity(four_state, P_AVG, EPS)
    best = four_state_exhaustive_optimum()
    assert best <= solution.capacity + 1e-3
    assert solution.capacity == pytest.approx(best, abs=1e-2)


def test_zero_target_is_pure_waterfilling(four_state):
    policy = solve_subproblem(four_state, P_AVG, EPS, 0.0)
    assert policy.expected_power() == pytest.approx(P_AVG, abs=1e-6)
    assert policy.channel_outage_at() == 0.0
    assert policy.expected_rs() == pytest.approx(0.4 * math.log2(6.0), abs=1e-6)
    assert float(policy.power(10.0, 1.0)) == pytest.approx(1.25, abs=1e-6)


def test_largest_target_is_pure_inversion(four_state):
    rate_max = r_max(four_state, P_AVG, EPS)
    policy = solve_subproblem(four_state, P_AVG, EPS, rate_max)
    powers = {(row["h_m"], row["h_e"]): row["power"] for row in policy.region_table()}
    assert powers[(10.0, 1.0)] == pytest.approx(0.625, abs=1e-6)
    assert powers[(10.0, 10.0)] == pytest.approx(0.625, abs=1e-6)
    assert powers[(1.0, 1.0)] == 0.0
    assert policy.expected_power() == pytest.approx(P_AVG, abs=1e-9)


def test_expected_secrecy_rate_is_nonincreasing_in_target(four_state):
    rates = np.linspace(0.0, r_max(four_state, P_AVG, EPS), 20)
    values = [solve_subproblem(four_state, P_AVG, EPS, float(rate)).expected_rs() for rate in rates]
    assert np.all(np.diff(values) <= 1e-9)


def test_rate_curve_crosses_the_budget_line(four_state):
    curve = rate_curve(four_state, P_AVG, EPS, points=11)
    assert list(curve.columns) == ["rate", "expected_rs", "budget_line", "phi"]
    assert curve["phi"].iloc[0] > 0
    assert curve["phi"].iloc[-1] < 0


def test_expected_rate_of_simple_policies(four_state):
    assert expected_rs_of(ConstantPolicy(0.0), four_state) == 0.0
    assert expected_rs_of(ConstantPolicy(0.5), four_state) == pytest.approx(0.8, abs=1e-12)


@pytest.mark.parametrize("eps, rate, feasible", [(0.0, 0.8, False), (0.2, 1.0, True), (0.5, 1.6, True)])
def test_constant_power_examples(four_state, eps, rate, feasible):
    evaluation = evaluate_constant_policy(four_state, P_AVG, eps)
    assert evaluation.expected_rs == pytest.approx(0.8, abs=1e-12)
    assert evaluation.rate == pytest.approx(rate, abs=1e-12)
    assert evaluation.feasible is feasible


def test_zero_capacity_when_eavesdropper_dominates():
    dist = FadingDistribution.discrete([(1.0, 2.0, 0.5), (2.0, 2.0, 0.5)])
    assert solve_capacity(dist, 1.0, 0.1).capacity == 0.0


def test_zero_power_gives_zero_capacity(four_state):
    assert solve_capacity(four_state, 0.0, EPS).capacity == 0.0


def test_high_power_limit(four_state):
    assert high_power_limit(four_state, EPS) == pytest.approx(0.4 * math.log2(10.0) / 0.8, abs=1e-12)
    symmetric = rayleigh(mean_m=1.0, mean_e=1.0, quadrature_order=48)
    assert high_power_limit(symmetric, 0.1) > 0


def test_capacity_is_nondecreasing_in_outage_and_power(four_state):
    by_eps = [solve_capacity(four_state, P_AVG, eps).capacity for eps in (0.05, 0.1, 0.2, 0.3)]
    by_power = [solve_capacity(four_state, p, EPS).capacity for p in (0.25, 0.5, 1.0, 2.0)]
    assert np.all(np.diff(by_eps) >= -1e-9)
    assert np.all(np.diff(by_power) >= -1e-9)


def _assert_region_is_a_superlevel_set(solution):
    policy = solution.policy
    sup = policy.support
    xi = policy_arrays(sup.h_m, sup.h_e, policy.lam, policy.capacity_rate).xi
    inside = xi[policy.membership > 0]
    outside = xi[policy.membership < 1]
    slack = 1e-9 * max(1.0, float(np.max(np.abs(inside[np.isfinite(inside)]))))
    assert inside.min() >= outside.max() - slack
    assert np.dot(sup.w, policy.membership) == pytest.approx(1.0 - solution.eps, abs=1e-9)


def test_region_packs_the_highest_scores(four_state, rayleigh_coarse):
    _assert_region_is_a_superlevel_set(solve_capacity(four_state, P_AVG, EPS))
    _assert_region_is_a_superlevel_set(solve_capacity(rayleigh_coarse, 1.0, 0.05))


def test_rayleigh_capacity_grows_with_power(rayleigh_coarse):
    solutions = [solve_capacity(rayleigh_coarse, p, 0.02) for p in (0.5, 1.0, 2.0)]
    capacities = [s.capacity for s in solutions]
    assert capacities[0] > 0
    assert np.all(np.diff(capacities) > 0)
    for solution in solutions:
        assert solution.expected_power == pytest.approx(solution.p_avg, abs=1e-6)
        assert solution.channel_outage_prob <= 0.02 + 1e-6
        assert solution.capacity <= solution.r_max + 1e-12


def test_solution_document(four_state):
    document = solve_capacity(four_state, P_AVG, EPS).to_json_dict()
    assert document["csi"] == "full"
    assert len(document["region_table"]) == 4
    assert {"capacity", "lambda", "k", "r_max", "iterations"} <= set(document)


@pytest.mark.slow
def test_high_power_capacity_approaches_the_limit():
    dist = rayleigh(quadrature_order=64)
    limit = high_power_limit(dist, 0.02)
    full = solve_capacity(dist, 1e3, 0.02).capacity
    main = solve_capacity_main(dist, 1e3, 0.02, full_capacity=full).capacity
    assert full <= limit + 1e-6
    assert full >= 0.98 * limit
    assert main >= 0.97 * limit
    assert abs(full - main) / full <= 0.02


@pytest.mark.parametrize("p_avg", [0.5, 1.0, 2.0, 4.0, 8.0, 1000.0])
def test_rayleigh_small_outage_solves_at_default_order(p_avg):
    dist = rayleigh()
    solution = solve_capacity(dist, p_avg, 0.02)
    assert 0 < solution.capacity <= solution.r_max + 1e-12
    assert solution.expected_power == pytest.approx(p_avg, rel=1e-6, abs=1e-6)
    assert solution.expected_rs == pytest.approx(0.98 * solution.capacity, abs=1e-5)
    assert solution.channel_outage_prob <= 0.02 + 1e-6
    main = solve_capacity_main(dist, p_avg, 0.02, full_capacity=solution.capacity)
    assert main.capacity <= solution.capacity + 1e-8


def test_largest_target_on_a_continuous_law_inverts_above_the_quantile(rayleigh_coarse):
    rate_max = r_max(rayleigh_coarse, 1.0, 0.02)
    policy = solve_subproblem(rayleigh_coarse, 1.0, 0.02, rate_max)
    c = float(rayleigh_coarse.marginal_m.ppf(0.02))
    sup = policy.support
    assert policy.expected_power() == pytest.approx(1.0, abs=1e-6)
    assert policy.region_mass() == pytest.approx(0.98, abs=1e-9)
    assert np.all(policy.membership[sup.h_m > c] >= 1.0 - 1e-6)
    assert np.all(policy.membership[sup.h_m < c] <= 1e-6)


def _fails_at(rate_max, value):
    def rs_at(rate):
        if rate >= rate_max:
            raise NoConvergence("budget not met at the endpoint")
        return value(rate)
    return rs_at


def test_fixed_point_steps_inside_a_failing_endpoint():
    rate, _ = find_fixed_point(_fails_at(1.0, lambda r: 2.0), 1.0, 0.0, "endpoint")
    assert 1.0 - 1e-6 < rate < 1.0
    rate, _ = find_fixed_point(_fails_at(1.0, lambda r: 1.0 - r), 1.0, 0.0, "endpoint")
    assert rate == pytest.approx(0.5, abs=1e-9)


def test_fixed_point_gives_up_when_no_rate_near_the_endpoint_solves():
    with pytest.raises(NoConvergence):
        find_fixed_point(_fails_at(0.5, lambda r: 2.0), 1.0, 0.0, "endpoint")
