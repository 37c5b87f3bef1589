"""
Main-CSI secrecy outage capacity.

Only h_m is known at the transmitter, so the policy is a function of h_m:
channel inversion above the eps-quantile c of H_m, the main-CSI
stationarity power P_w below it. Secrecy rates are averaged over the
eavesdropper gain conditionally on h_m.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from channel_model import ConditionalBelow, FadingDistribution, MarginalSupport, quantile_m
from errors import ConfigError, InfeasibleRate
from full_csi_solver import (RATE_SLACK, CapacitySolution, mixed_expectation, check_problem, find_fixed_point,
                             inversion_weights, r_max, solve_capacity, solve_multiplier)
from rate_kernel import below_rate, p_inv, p_w_conditional, rm

logger = logging.getLogger(__name__)


def _conditional_rs(x: np.ndarray, conditional: ConditionalBelow, power: np.ndarray) -> np.ndarray:
    """E[R_s | H_m = x] for a power that depends on x only."""
    power = np.asarray(power, dtype=float)
    main = np.log2(1.0 + power * x) * conditional.below
    eve = (conditional.weights * np.log2(1.0 + power[:, None] * conditional.nodes)).sum(axis=1)
    return np.maximum(main - eve, 0.0)


@dataclass(eq=False)
class MainCsiPolicy:
    """P*(h_m) = P_w(h_m, lam) + 1(h_m >= c)(P_inv(h_m, C) - P_w(h_m, lam))+."""
    lam: float
    threshold_c: float
    capacity_rate: float
    boundary_randomization: float
    dist: FadingDistribution
    marginal: MarginalSupport
    membership: np.ndarray
    diagnostics: Dict = field(default_factory=dict)

    @cached_property
    def conditional(self) -> ConditionalBelow:
        return self.dist.conditional_below(self.marginal.x)

    @cached_property
    def _powers(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self.marginal.x
        cond = self.conditional
        pw = p_w_conditional(x, self.lam, cond.nodes, cond.weights, cond.below)
        pinv = np.asarray(p_inv(x, self.capacity_rate, strict=False), dtype=float)
        power_in = np.where(np.isfinite(pinv), np.maximum(pinv, pw), np.inf)
        return pinv, pw, power_in

    def membership_at(self, h_m) -> np.ndarray:
        h_m = np.asarray(h_m, dtype=float)
        result = np.where(h_m > self.threshold_c, 1.0,
                          np.where(h_m == self.threshold_c, self.boundary_randomization, 0.0))
        if self.dist.is_discrete:
            for a_m, m in zip(self.marginal.x, self.membership):
                result = np.where(h_m == a_m, m, result)
        return result

    def power(self, h_m, h_e=None, u=None) -> np.ndarray:
        """Transmit power at main gain(s) h_m; h_e is accepted and ignored."""
        h_m = np.atleast_1d(np.asarray(h_m, dtype=float))
        cond = self.dist.conditional_below(h_m)
        pw = p_w_conditional(h_m, self.lam, cond.nodes, cond.weights, cond.below)
        pinv = np.asarray(p_inv(h_m, self.capacity_rate, strict=False), dtype=float)
        power_in = np.where(np.isfinite(pinv), np.maximum(pinv, pw), np.inf)
        membership = self.membership_at(h_m)
        if u is None:
            return mixed_expectation(membership, power_in, pw)
        return np.where(np.asarray(u) < membership, power_in, pw)

    def expected_power(self, dist: FadingDistribution = None) -> float:
        _, pw, power_in = self._powers
        return float(np.dot(self.marginal.w, mixed_expectation(self.membership, power_in, pw)))

    def rs_moments(self, dist: FadingDistribution = None) -> Tuple[float, float]:
        _, pw, power_in = self._powers
        cond = self.conditional
        safe_in = np.where(np.isfinite(power_in), power_in, 0.0)
        x = self.marginal.x
        first_in = _conditional_rs(x, cond, safe_in)
        first_out = _conditional_rs(x, cond, pw)
        second_in = self._conditional_rs_squared(safe_in)
        second_out = self._conditional_rs_squared(pw)
        w = self.marginal.w
        return (float(np.dot(w, mixed_expectation(self.membership, first_in, first_out))),
                float(np.dot(w, mixed_expectation(self.membership, second_in, second_out))))

    def _conditional_rs_squared(self, power: np.ndarray) -> np.ndarray:
        cond = self.conditional
        x = self.marginal.x
        gap = np.log2(1.0 + power[:, None] * x[:, None]) - np.log2(1.0 + power[:, None] * cond.nodes)
        return (cond.weights * np.square(np.maximum(gap, 0.0))).sum(axis=1)

    def expected_rs(self, dist: FadingDistribution = None) -> float:
        return self.rs_moments(dist)[0]

    def channel_outage_at(self, dist: FadingDistribution = None, rate: Optional[float] = None) -> float:
        rate = self.capacity_rate if rate is None else rate
        _, pw, power_in = self._powers
        x = self.marginal.x
        safe_in = np.where(np.isfinite(power_in), power_in, 0.0)
        short_in = below_rate(rm(x, safe_in), rate).astype(float)
        short_out = below_rate(rm(x, pw), rate).astype(float)
        return float(min(1.0, np.dot(self.marginal.w, mixed_expectation(self.membership, short_in, short_out))))

    def region_table(self) -> List[Dict]:
        pinv, pw, power_in = self._powers
        rows = []
        for i, x in enumerate(self.marginal.x):
            inverted = self.membership[i] > 0 and pinv[i] > pw[i]
            rows.append({
                "h_m": float(x),
                "probability": float(self.marginal.w[i]),
                "region": "inv" if inverted else "w",
                "membership": float(self.membership[i]),
                "power": float(mixed_expectation(self.membership[i:i + 1], power_in[i:i + 1], pw[i:i + 1])[0]),
                "p_inv": float(pinv[i]),
                "p_w": float(pw[i]),
            })
        return rows

    def boundary_samples(self) -> List[Dict]:
        return [{"h_m": self.threshold_c, "boundary_randomization": self.boundary_randomization}]

    def power_grid(self, points: int = 129) -> pd.DataFrame:
        lo, hi = self.dist.m_range()
        grid = np.linspace(lo, hi, points)
        return pd.DataFrame({"h_m": grid, "power": self.power(grid),
                             "in_region": self.membership_at(grid)})


def solve_subproblem_main(dist: FadingDistribution, p_avg: float, eps: float, target: float,
                          rate_max: Optional[float] = None) -> MainCsiPolicy:
    """Main-CSI policy for a fixed target rate; inversion on {h_m >= c}."""
    check_problem(p_avg, eps)
    if target < 0:
        raise ConfigError(f"target rate must be nonnegative, got {target!r}")
    rate_max = r_max(dist, p_avg, eps) if rate_max is None else rate_max
    if target > rate_max * (1.0 + RATE_SLACK) + RATE_SLACK:
        raise InfeasibleRate(f"target {target:.6g} exceeds R_max {rate_max:.6g}")

    quantile = quantile_m(dist, eps)
    split = None if dist.is_discrete else quantile.value
    x, w, membership = inversion_weights(dist, eps, split)
    marginal = MarginalSupport(x, w)
    cond = dist.conditional_below(x)
    pinv = np.asarray(p_inv(x, target, strict=False), dtype=float)
    counter = {"power_evaluations": 0}

    def expected_power(lam: float) -> float:
        pw = p_w_conditional(x, lam, cond.nodes, cond.weights, cond.below)
        power_in = np.where(np.isfinite(pinv), np.maximum(pinv, pw), np.inf)
        return float(np.dot(w, mixed_expectation(membership, power_in, pw)))

    def residual(lam: float) -> float:
        counter["power_evaluations"] += 1
        return expected_power(lam) - p_avg

    lam = solve_multiplier(residual, p_avg, "main-CSI sub-problem", counter)
    boundary = membership[(membership > 0) & (membership < 1)]
    q = float(boundary[0]) if boundary.size else 1.0
    policy = MainCsiPolicy(lam=lam, threshold_c=quantile.value, capacity_rate=target,
                           boundary_randomization=q, dist=dist, marginal=marginal,
                           membership=membership, diagnostics=dict(counter))
    logger.debug("main-CSI sub-problem R=%.6g: lam=%.6g c=%.6g", target, lam, quantile.value)
    return policy


def solve_capacity_main(dist: FadingDistribution, p_avg: float, eps: float,
                        full_capacity: Optional[float] = None) -> CapacitySolution:
    """Main-CSI eps-achievable secrecy capacity.

    Args:
        full_capacity: full-CSI capacity on the same instance. Main CSI can never
            do better, so a larger result is capped at it and
            iterations["capped_at_full"] is set.
    """
    check_problem(p_avg, eps)
    rate_max = r_max(dist, p_avg, eps)
    cache: Dict[float, MainCsiPolicy] = {}

    def policy_at(rate: float) -> MainCsiPolicy:
        if rate not in cache:
            cache[rate] = solve_subproblem_main(dist, p_avg, eps, rate, rate_max=rate_max)
        return cache[rate]

    capacity, evaluations = find_fixed_point(lambda rate: policy_at(rate).expected_rs(),
                                             rate_max, eps, "main-CSI capacity")
    capped = full_capacity is not None and capacity > full_capacity + 1e-8
    uncapped = capacity
    if capped:
        logger.warning("main-CSI capacity %.8f exceeds full-CSI capacity %.8f; capped at the full-CSI value",
                       capacity, full_capacity)
        capacity = max(0.0, float(full_capacity))
    policy = policy_at(capacity)
    iterations = {"outer": evaluations,
                  "power_evaluations": sum(p.diagnostics.get("power_evaluations", 0)
                                           for p in cache.values())}
    if capped:
        iterations.update(capped_at_full=True, uncapped_capacity=uncapped)
    solution = CapacitySolution(
        capacity=capacity,
        lambda_star=policy.lam,
        k_star=None,
        threshold_c=policy.threshold_c,
        expected_rs=policy.expected_rs(),
        expected_power=policy.expected_power(),
        channel_outage_prob=policy.channel_outage_at(),
        r_max=rate_max,
        iterations=iterations,
        csi="main",
        eps=eps,
        p_avg=p_avg,
        policy=policy,
    )
    logger.info("main-CSI capacity %.6f (eps=%g, p_avg=%g, c=%.4g)", capacity, eps, p_avg, policy.threshold_c)
    return solution


def high_power_gap(dist: FadingDistribution, eps: float, p_avg: float) -> Dict:
    """Relative gap |C_F - C_M| / C_F at one power level."""
    full = solve_capacity(dist, p_avg, eps).capacity
    main = solve_capacity_main(dist, p_avg, eps, full_capacity=full).capacity
    gap = abs(full - main) / full if full > 0 else math.nan
    return {"p_avg": p_avg, "eps": eps, "C_full": full, "C_main": main, "relative_gap": gap}
