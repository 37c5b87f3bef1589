"""
Full-CSI secrecy outage capacity.

The transmitter sees both gains. For a target rate R the optimal policy
time-shares between secure waterfilling and channel inversion: inversion is
enforced on the region where the score

    xi(h) = [R_s(h, P_inv) - R_s(h, P_wf)]+ - lam [P_inv(h, R) - P_wf(h, lam)]+

is at least k, with k set so the region carries probability 1 - eps and lam
set so the average power equals the budget. The capacity is the rate R that
satisfies R (1 - eps) = E[R_s(H, P^R)].
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

import settings
from channel_model import (FadingDistribution, Support, expect, prob, quantile_m,
                           threshold_membership)
from errors import ConfigError, InfeasibleOutage, InfeasibleRate, NoConvergence
from rate_kernel import below_rate, p_inv, p_wf, rm, rs

logger = logging.getLogger(__name__)

LAMBDA_START = (1e-8, 1.0)
LAMBDA_CEILING = 1e12
LAMBDA_FLOOR = 1e-14
CEILING_RESIDUAL = 1e-9
RATE_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Shared pieces (also used by the main-CSI solver)
# ---------------------------------------------------------------------------

def check_problem(p_avg: float, eps: float):
    if not math.isfinite(p_avg) or p_avg < 0:
        raise ConfigError(f"p_avg must be finite and nonnegative, got {p_avg!r}")
    if not math.isfinite(eps) or eps < 0:
        raise ConfigError(f"eps must lie in [0, 1), got {eps!r}")
    if eps >= 1:
        raise InfeasibleOutage(f"eps={eps!r} leaves no probability mass for channel inversion")


def inversion_weights(dist: FadingDistribution, eps: float,
                      split_m: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Main-gain atoms, their masses and the cheapest inversion set of mass 1 - eps.

    Returns (x, w, membership); membership is randomized at the boundary atom.
    """
    marginal = dist.marginal_m_support(split_m)
    membership, _, _ = threshold_membership(marginal.x, marginal.w, 1.0 - eps)
    return marginal.x, marginal.w, membership


def inversion_split(dist: FadingDistribution, eps: float) -> Optional[float]:
    """Main-gain panel break at the eps-quantile; None for atom tables.

    r_max and every full-CSI region are resolved on the support split here,
    so a region of mass 1 - eps can sit exactly on h_m >= c.
    """
    if dist.is_discrete:
        return None
    return quantile_m(dist, eps).value


def r_max(dist: FadingDistribution, p_avg: float, eps: float) -> float:
    """Largest rate the budget can invert on the best 1 - eps of main-gain mass.

    log2(1 + p_avg / E[1(h_m >= c) / h_m]) with c the eps-quantile of H_m.
    """
    check_problem(p_avg, eps)
    c = quantile_m(dist, eps).value
    x, w, membership = inversion_weights(dist, eps, inversion_split(dist, eps))
    if float(np.dot(w, membership)) <= 0:
        raise InfeasibleOutage(f"Pr(H_m >= {c:.6g}) = 0; nothing left to invert on")
    if p_avg == 0:
        return 0.0
    used = membership > 0
    if np.any(x[used] <= 0):
        logger.warning("inversion set contains h_m = 0; no positive rate can be inverted")
        return 0.0
    if not dist.is_discrete and eps == 0 and _diverges_at_zero(dist):
        logger.warning("E[1/H_m] diverges for eps = 0; maximum invertible rate is 0")
        return 0.0
    cost = float(np.sum(w[used] * membership[used] / x[used]))
    return float(np.log2(1.0 + p_avg / cost))


def _diverges_at_zero(dist: FadingDistribution) -> bool:
    marginal = dist.marginal_m
    if marginal.atomic:
        return marginal.value == 0
    lo = marginal.lower()
    return lo == 0 and float(marginal.pdf(max(lo, 1e-300))) > 0


def solve_multiplier(residual: Callable[[float], float], p_avg: float,
                     label: str, counter: Dict) -> float:
    """Find lam > 0 with residual(lam) = E[P_lam] - p_avg = 0.

    The residual is nonincreasing in lam. The bracket starts at [1e-8, 1]
    and grows geometrically; the root is refined on log(lam).
    """
    lo, hi = LAMBDA_START
    r_hi = residual(hi)
    while r_hi > 0 and hi < LAMBDA_CEILING:
        hi *= 4.0
        r_hi = residual(hi)
    if r_hi > 0:
        if r_hi <= CEILING_RESIDUAL * max(1.0, p_avg):
            logger.debug("%s: power residual %.3g accepted at lam=%.3g", label, r_hi, hi)
            return hi
        raise NoConvergence(f"{label}: power budget not met for any multiplier up to {hi:.3g}",
                            diagnostics={"lam": hi, "power_residual": r_hi, **counter})
    if r_hi == 0:
        return hi
    r_lo = residual(lo)
    while r_lo < 0 and lo > LAMBDA_FLOOR:
        hi, r_hi = lo, r_lo
        lo /= 10.0
        r_lo = residual(lo)
    if r_lo < 0:
        logger.warning("%s: budget not exhausted (slack %.3g) even at lam=%.3g",
                       label, -r_lo, lo)
        return lo
    if r_lo == 0:
        return lo
    try:
        t = brentq(lambda s: residual(math.exp(s)), math.log(lo), math.log(hi),
                   xtol=settings.MULTIPLIER_XTOL, maxiter=settings.MAX_ITERATIONS)
    except RuntimeError as exc:
        raise NoConvergence(f"{label}: multiplier search did not converge ({exc})",
                            diagnostics={"bracket": [lo, hi], **counter})
    return math.exp(t)


def find_fixed_point(rs_at: Callable[[float], float], rate_max: float, eps: float,
                     label: str) -> Tuple[float, int]:
    """Largest R in [0, rate_max] with (1 - eps) R <= E[R_s(P^R)] (the crossing)."""
    calls = {"n": 0}

    def phi(rate: float) -> float:
        calls["n"] += 1
        return rs_at(rate) - (1.0 - eps) * rate

    if rate_max <= 0:
        return 0.0, calls["n"]
    at_zero = phi(0.0)
    if at_zero <= settings.RATE_TIE_TOLERANCE:
        logger.info("%s: E[R_s] vanishes at R=0, capacity is 0", label)
        return 0.0, calls["n"]
    hi, at_max = _evaluate_endpoint(phi, rate_max, label)
    if at_max >= 0:
        logger.info("%s: fixed point lies beyond the invertible range, capacity = %.6g", label, hi)
        return hi, calls["n"]
    try:
        rate = brentq(phi, 0.0, hi, xtol=settings.RATE_XTOL, maxiter=settings.MAX_ITERATIONS)
    except RuntimeError as exc:
        raise NoConvergence(f"{label}: outer fixed point did not converge ({exc})",
                            diagnostics={"r_max": rate_max, "evaluations": calls["n"]})
    return float(rate), calls["n"]


ENDPOINT_BACKOFF = (1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3)


def _evaluate_endpoint(phi: Callable[[float], float], rate_max: float,
                       label: str) -> Tuple[float, float]:
    """(rate, phi(rate)) at R_max, or at the first rate stepped inward whose sub-problem solves."""
    try:
        return rate_max, phi(rate_max)
    except (NoConvergence, InfeasibleRate) as exc:
        failure = exc
    for step in ENDPOINT_BACKOFF:
        hi = rate_max * (1.0 - step)
        try:
            value = phi(hi)
        except (NoConvergence, InfeasibleRate) as exc:
            failure = exc
            continue
        logger.warning("%s: sub-problem at R_max=%.6g failed (%s); bracket closes at %.9g",
                       label, rate_max, failure, hi)
        return hi, value
    raise NoConvergence(f"{label}: no solvable sub-problem near R_max={rate_max:.6g} ({failure})",
                        diagnostics={"r_max": rate_max})


# ---------------------------------------------------------------------------
# Region and policies
# ---------------------------------------------------------------------------

class PolicyArrays(NamedTuple):
    pinv: np.ndarray
    pwf: np.ndarray
    power_in: np.ndarray
    xi: np.ndarray


def policy_arrays(h_m, h_e, lam: float, target: float) -> PolicyArrays:
    h_m = np.asarray(h_m, dtype=float)
    h_e = np.asarray(h_e, dtype=float)
    pinv = np.asarray(p_inv(h_m, target, strict=False), dtype=float)
    pwf = np.broadcast_to(np.asarray(p_wf(h_m, h_e, lam), dtype=float), h_m.shape)
    finite = np.isfinite(pinv)
    power_in = np.where(finite, np.maximum(pinv, pwf), np.inf)
    safe_in = np.where(finite, power_in, pwf)
    gain = np.maximum(np.asarray(rs(h_m, h_e, safe_in)) - np.asarray(rs(h_m, h_e, pwf)), 0.0)
    extra = np.maximum(np.where(finite, pinv, 0.0) - pwf, 0.0)
    xi = np.where(finite, gain - lam * extra, -np.inf)
    return PolicyArrays(pinv, pwf, power_in, xi)


def xi_score(h_m, h_e, lam: float, target: float):
    return policy_arrays(h_m, h_e, lam, target).xi


def mixed_expectation(membership, inside, outside):
    """Expected value of a randomized choice between two per-atom values."""
    taken = membership > 0
    return np.where(taken, membership * np.where(taken, inside, 0.0), 0.0) + (1.0 - membership) * outside


@dataclass(frozen=True)
class Region:
    lam: float
    k: float
    target_rate: float
    boundary_randomization: float
    mass: float
    k_unclamped: float

    def membership(self, h_m, h_e) -> np.ndarray:
        score = xi_score(h_m, h_e, self.lam, self.target_rate)
        if not math.isfinite(self.k):
            return np.where(score == self.k, self.boundary_randomization, 1.0)
        slack = settings.RATE_TIE_TOLERANCE * max(1.0, abs(self.k))
        tie = np.abs(score - self.k) <= slack
        return np.where(score > self.k + slack, 1.0, np.where(tie, self.boundary_randomization, 0.0))


@dataclass(frozen=True)
class ConstantPolicy:
    """Fixed transmit power in every block (no power control)."""
    power_level: float

    def power(self, h_m, h_e, u=None) -> np.ndarray:
        return np.full(np.shape(h_m), float(self.power_level))

    def expected_rs(self, dist: FadingDistribution) -> float:
        return expect(dist, lambda m, e: rs(m, e, self.power_level))

    def rs_moments(self, dist: FadingDistribution) -> Tuple[float, float]:
        first = self.expected_rs(dist)
        second = expect(dist, lambda m, e: np.square(rs(m, e, self.power_level)))
        return first, second

    def expected_power(self, dist: FadingDistribution = None) -> float:
        return float(self.power_level)

    def channel_outage_at(self, dist: FadingDistribution, rate: float) -> float:
        return prob(dist, lambda m, e: below_rate(rm(m, self.power_level), rate))


@dataclass(eq=False)
class FullCsiPolicy:
    """Composite waterfilling/inversion policy P^R(h) = P_wf + 1(h in G)(P_inv - P_wf)+."""
    lam: float
    k: float
    capacity_rate: float
    region: Region
    dist: FadingDistribution
    membership: np.ndarray
    diagnostics: Dict = field(default_factory=dict)
    split_m: Optional[float] = None

    @cached_property
    def _arrays(self) -> Tuple[Support, PolicyArrays]:
        sup = self.dist.support(self.split_m)
        return sup, policy_arrays(sup.h_m, sup.h_e, self.lam, self.capacity_rate)

    def _on(self, dist: Optional[FadingDistribution]):
        if dist is None or dist == self.dist:
            sup, arrays = self._arrays
            return sup, arrays, self.membership
        sup = dist.support(None if dist.is_discrete else self.split_m)
        arrays = policy_arrays(sup.h_m, sup.h_e, self.lam, self.capacity_rate)
        return sup, arrays, self.region.membership(sup.h_m, sup.h_e)

    @property
    def support(self) -> Support:
        """Atoms the region and its membership weights are resolved on."""
        return self._arrays[0]

    def membership_at(self, h_m, h_e) -> np.ndarray:
        h_m = np.asarray(h_m, dtype=float)
        h_e = np.asarray(h_e, dtype=float)
        result = np.asarray(self.region.membership(h_m, h_e), dtype=float)
        if self.dist.is_discrete:
            sup, _ = self._arrays
            result = np.array(result, copy=True)
            for a_m, a_e, m in zip(sup.h_m, sup.h_e, self.membership):
                result[(h_m == a_m) & (h_e == a_e)] = m
        return result

    def power(self, h_m, h_e, u=None) -> np.ndarray:
        """Transmit power at gains (h_m, h_e).

        With u (uniform draws) the boundary randomization is resolved per
        block; without it the expected power is returned.
        """
        arrays = policy_arrays(h_m, h_e, self.lam, self.capacity_rate)
        membership = self.membership_at(h_m, h_e)
        if u is None:
            return mixed_expectation(membership, arrays.power_in, arrays.pwf)
        inside = np.asarray(u) < membership
        return np.where(inside, arrays.power_in, arrays.pwf)

    def expected_power(self, dist: FadingDistribution = None) -> float:
        sup, arrays, membership = self._on(dist)
        return float(np.dot(sup.w, mixed_expectation(membership, arrays.power_in, arrays.pwf)))

    def rs_moments(self, dist: FadingDistribution = None) -> Tuple[float, float]:
        """E[R_s] and E[R_s^2] under the policy."""
        sup, arrays, membership = self._on(dist)
        safe_in = np.where(np.isfinite(arrays.power_in), arrays.power_in, 0.0)
        rate_in = np.asarray(rs(sup.h_m, sup.h_e, safe_in))
        rate_out = np.asarray(rs(sup.h_m, sup.h_e, arrays.pwf))
        first = float(np.dot(sup.w, mixed_expectation(membership, rate_in, rate_out)))
        second = float(np.dot(sup.w, mixed_expectation(membership, rate_in ** 2, rate_out ** 2)))
        return first, second

    def expected_rs(self, dist: FadingDistribution = None) -> float:
        return self.rs_moments(dist)[0]

    def channel_outage_at(self, dist: FadingDistribution = None, rate: Optional[float] = None) -> float:
        """Pr(R_m(H, P(H)) < rate); rate defaults to the policy's target."""
        sup, arrays, membership = self._on(dist)
        rate = self.capacity_rate if rate is None else rate
        safe_in = np.where(np.isfinite(arrays.power_in), arrays.power_in, 0.0)
        short_in = below_rate(rm(sup.h_m, safe_in), rate).astype(float)
        short_out = below_rate(rm(sup.h_m, arrays.pwf), rate).astype(float)
        return float(min(1.0, np.dot(sup.w, mixed_expectation(membership, short_in, short_out))))

    def region_mass(self) -> float:
        sup, _ = self._arrays
        return float(np.dot(sup.w, self.membership))

    def region_table(self) -> List[Dict]:
        sup, arrays = self._arrays
        rows = []
        for i in range(sup.w.size):
            inverted = self.membership[i] > 0 and arrays.pinv[i] > arrays.pwf[i]
            rows.append({
                "h_m": float(sup.h_m[i]),
                "h_e": float(sup.h_e[i]),
                "probability": float(sup.w[i]),
                "region": "inv" if inverted else "wf",
                "membership": float(self.membership[i]),
                "power": float(mixed_expectation(self.membership[i:i + 1], arrays.power_in[i:i + 1],
                                      arrays.pwf[i:i + 1])[0]),
                "p_inv": float(arrays.pinv[i]),
                "p_wf": float(arrays.pwf[i]),
            })
        return rows

    def boundary_samples(self, e_levels: Sequence[float] = (0.1, 0.5, 0.9),
                         points: int = 513) -> List[Dict]:
        """Main gains where region membership flips, along a few eavesdropper quantiles."""
        lo, hi = self.dist.m_range()
        grid = np.linspace(lo, hi, points)
        samples = []
        for level in e_levels:
            h_e = float(self.dist.marginal_e.ppf(level))
            inside = self.region.membership(grid, np.full_like(grid, h_e)) > 0
            for i in np.nonzero(inside[1:] != inside[:-1])[0]:
                samples.append({"h_e": h_e, "h_m": float(0.5 * (grid[i] + grid[i + 1])),
                                "enters_region": bool(inside[i + 1])})
        return samples

    def power_grid(self, points: int = 33) -> pd.DataFrame:
        """Expected power on a (h_m, h_e) grid spanning the truncated support."""
        m_lo, m_hi = self.dist.m_range()
        e_lo, e_hi = self.dist.e_range()
        m_grid, e_grid = np.meshgrid(np.linspace(m_lo, m_hi, points), np.linspace(e_lo, e_hi, points),
                                     indexing="ij")
        h_m, h_e = m_grid.ravel(), e_grid.ravel()
        return pd.DataFrame({
            "h_m": h_m,
            "h_e": h_e,
            "power": self.power(h_m, h_e),
            "in_region": self.membership_at(h_m, h_e),
        })


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class CapacitySolution:
    capacity: float
    lambda_star: float
    k_star: Optional[float]
    threshold_c: Optional[float]
    expected_rs: float
    expected_power: float
    channel_outage_prob: float
    r_max: float
    iterations: Dict
    csi: str
    eps: float
    p_avg: float
    policy: object = None

    def to_json_dict(self) -> Dict:
        document = {
            "csi": self.csi,
            "eps": self.eps,
            "p_avg": self.p_avg,
            "capacity": self.capacity,
            "lambda": self.lambda_star,
            "r_max": self.r_max,
            "expected_rs": self.expected_rs,
            "expected_power": self.expected_power,
            "channel_outage_prob": self.channel_outage_prob,
            "iterations": self.iterations,
        }
        if self.csi == "full":
            document["k"] = self.k_star
        else:
            document["threshold_c"] = self.threshold_c
        if self.policy is not None:
            if self.policy.dist.is_discrete:
                document["region_table"] = self.policy.region_table()
            elif hasattr(self.policy, "boundary_samples"):
                document["region_boundary_samples"] = self.policy.boundary_samples()
        return document


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

def _region_at(sup: Support, lam: float, target: float, eps: float):
    arrays = policy_arrays(sup.h_m, sup.h_e, lam, target)
    membership, k_raw, q = threshold_membership(arrays.xi, sup.w, 1.0 - eps,
                                                tol=settings.RATE_TIE_TOLERANCE)
    return arrays, membership, k_raw, q


def _expected_power(sup: Support, arrays: PolicyArrays, membership: np.ndarray) -> float:
    return float(np.dot(sup.w, mixed_expectation(membership, arrays.power_in, arrays.pwf)))


def solve_subproblem(dist: FadingDistribution, p_avg: float, eps: float, target: float,
                     rate_max: Optional[float] = None) -> FullCsiPolicy:
    """Best policy for a fixed target rate.

    Args:
        dist: joint fading law
        p_avg: average power budget
        eps: outage level; the inversion region carries mass 1 - eps
        target: rate that inversion must sustain, 0 <= target <= r_max
        rate_max: precomputed r_max(dist, p_avg, eps), if known
    """
    check_problem(p_avg, eps)
    if target < 0:
        raise ConfigError(f"target rate must be nonnegative, got {target!r}")
    rate_max = r_max(dist, p_avg, eps) if rate_max is None else rate_max
    if target > rate_max * (1.0 + RATE_SLACK) + RATE_SLACK:
        raise InfeasibleRate(f"target {target:.6g} exceeds R_max {rate_max:.6g}")

    split = inversion_split(dist, eps)
    sup = dist.support(split)
    counter = {"power_evaluations": 0}

    def residual(lam: float) -> float:
        counter["power_evaluations"] += 1
        arrays, membership, _, _ = _region_at(sup, lam, target, eps)
        return _expected_power(sup, arrays, membership) - p_avg

    lam = solve_multiplier(residual, p_avg, "full-CSI sub-problem", counter)
    arrays, membership, k_raw, q = _region_at(sup, lam, target, eps)
    power_gap = _expected_power(sup, arrays, membership) - p_avg
    if abs(power_gap) > settings.POWER_TOLERANCE * 1e-3 * max(1.0, p_avg):
        membership = _blend_across_jump(sup, lam, target, eps, p_avg, membership, power_gap)

    k = k_raw
    if k_raw > 0:
        logger.warning("region threshold k=%.3g is positive; clamped to 0", k_raw)
        k = 0.0
    region = Region(lam=lam, k=k, target_rate=target, boundary_randomization=q,
                    mass=float(np.dot(sup.w, membership)), k_unclamped=k_raw)
    logger.debug("sub-problem R=%.6g: lam=%.6g k=%.6g q=%.4f after %d evaluations",
                 target, lam, k, q, counter["power_evaluations"])
    return FullCsiPolicy(lam=lam, k=k, capacity_rate=target, region=region, dist=dist,
                         membership=membership, diagnostics=dict(counter), split_m=split)


def _blend_across_jump(sup, lam, target, eps, p_avg, membership, power_gap):
    """Time-share the regions on either side of a jump in E[P] so the budget binds."""
    step = 8.0 * settings.MULTIPLIER_XTOL
    below = _region_at(sup, lam * math.exp(-step), target, eps)
    above = _region_at(sup, lam * math.exp(step), target, eps)
    power_lo_lam = _expected_power(sup, below[0], below[1])
    power_hi_lam = _expected_power(sup, above[0], above[1])
    if power_lo_lam == power_hi_lam:
        logger.warning("power residual %.3g left at lam=%.6g", power_gap, lam)
        return membership
    alpha = min(1.0, max(0.0, (p_avg - power_hi_lam) / (power_lo_lam - power_hi_lam)))
    logger.debug("blending regions across a power jump with weight %.4f", alpha)
    return alpha * below[1] + (1.0 - alpha) * above[1]


def expected_rs_of(policy, dist: FadingDistribution) -> float:
    """E[R_s(H, P(H))] for any policy in this package."""
    return policy.expected_rs(dist)


def solve_capacity(dist: FadingDistribution, p_avg: float, eps: float) -> CapacitySolution:
    """Full-CSI eps-achievable secrecy capacity."""
    check_problem(p_avg, eps)
    rate_max = r_max(dist, p_avg, eps)
    cache: Dict[float, FullCsiPolicy] = {}

    def policy_at(rate: float) -> FullCsiPolicy:
        if rate not in cache:
            cache[rate] = solve_subproblem(dist, p_avg, eps, rate, rate_max=rate_max)
        return cache[rate]

    capacity, evaluations = find_fixed_point(lambda rate: policy_at(rate).expected_rs(),
                                             rate_max, eps, "full-CSI capacity")
    policy = policy_at(capacity)
    expected_rs = policy.expected_rs()
    if capacity > 0 and abs(capacity * (1.0 - eps) - expected_rs) > 1e-6:
        logger.warning("fixed-point residual %.3g at C=%.6g",
                       capacity * (1.0 - eps) - expected_rs, capacity)
    solution = CapacitySolution(
        capacity=capacity,
        lambda_star=policy.lam,
        k_star=policy.k,
        threshold_c=None,
        expected_rs=expected_rs,
        expected_power=policy.expected_power(),
        channel_outage_prob=policy.channel_outage_at(),
        r_max=rate_max,
        iterations={"outer": evaluations,
                    "power_evaluations": sum(p.diagnostics.get("power_evaluations", 0)
                                             for p in cache.values())},
        csi="full",
        eps=eps,
        p_avg=p_avg,
        policy=policy,
    )
    logger.info("full-CSI capacity %.6f (eps=%g, p_avg=%g, lam=%.4g)", capacity, eps, p_avg, policy.lam)
    return solution


def high_power_limit(dist: FadingDistribution, eps: float) -> float:
    """Common high-power limit E[1(h_m > h_e) log2(h_m / h_e)] / (1 - eps)."""
    if not 0 <= eps < 1:
        raise ConfigError(f"eps must lie in [0, 1), got {eps!r}")
    marginal = dist.marginal_m_support()
    conditional = dist.conditional_below(marginal.x)
    nodes = conditional.nodes
    weights = np.where(nodes < marginal.x[:, None], conditional.weights, 0.0)
    if np.any((nodes <= 0) & (weights > 0)):
        logger.warning("eavesdropper gain 0 carries mass; the high-power limit is unbounded")
        return math.inf
    with np.errstate(divide="ignore"):
        ratio = np.where(weights > 0, np.log2(marginal.x[:, None] / np.where(nodes > 0, nodes, 1.0)), 0.0)
    return float(np.dot(marginal.w, (weights * ratio).sum(axis=1)) / (1.0 - eps))


class ConstantPolicyEvaluation(NamedTuple):
    power: float
    eps: float
    expected_rs: float
    rate: float
    channel_outage_prob: float
    feasible: bool


def evaluate_constant_policy(dist: FadingDistribution, power: float, eps: float) -> ConstantPolicyEvaluation:
    """No power control: constant power, rate E[R_s]/(1 - eps)."""
    check_problem(power, eps)
    policy = ConstantPolicy(power)
    expected_rs = policy.expected_rs(dist)
    rate = expected_rs / (1.0 - eps)
    outage = policy.channel_outage_at(dist, rate)
    feasible = outage <= eps + 1e-9
    if not feasible:
        logger.warning("constant power %.3g: channel outage %.3g exceeds eps=%.3g at R=%.4g",
                       power, outage, eps, rate)
    return ConstantPolicyEvaluation(power, eps, expected_rs, rate, outage, feasible)


def rate_curve(dist: FadingDistribution, p_avg: float, eps: float,
               rates: Optional[Sequence[float]] = None, points: int = 41) -> pd.DataFrame:
    """E[R_s(P^R)] against (1 - eps) R over [0, R_max]; the crossing is the capacity."""
    rate_max = r_max(dist, p_avg, eps)
    grid = np.linspace(0.0, rate_max, points) if rates is None else np.asarray(rates, dtype=float)
    rows = []
    for rate in grid:
        policy = solve_subproblem(dist, p_avg, eps, float(rate), rate_max=rate_max)
        expected = policy.expected_rs()
        rows.append({"rate": float(rate), "expected_rs": expected,
                     "budget_line": (1.0 - eps) * float(rate),
                     "phi": expected - (1.0 - eps) * float(rate)})
    return pd.DataFrame(rows)
