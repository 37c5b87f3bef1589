"""
Key-buffer sizing: heavy-traffic upper bound versus simulation.

The closed-form bound on the buffer needed for encoder-outage probability
eps' at rate C is

    M <= C + V / ((eps' - eps) C) * ln(V / ((eps' - eps)^2 C)),
    V = Var[R_s(H, P^C)] + C^2 eps (1 - eps)

with a natural log.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from channel_model import FadingDistribution, RandomStream
from errors import ConfigError, DomainError, Unreachable
from key_queue_sim import DEFAULT_WARMUP_FRACTION, draw_blocks, outage_vs_buffer

logger = logging.getLogger(__name__)

DEFAULT_GRID_MULTIPLES = np.linspace(0.0, 60.0, 241)


@dataclass(frozen=True)
class SizingResult:
    capacity_C: float
    eps: float
    eps_prime: float
    var_rs: float
    variance_term_V: float
    bound_M: float
    simulated_M: Optional[float] = None
    sim_ci_halfwidth: Optional[float] = None

    def to_row(self) -> Dict:
        return {
            "eps": self.eps,
            "eps_prime": self.eps_prime,
            "C": self.capacity_C,
            "var_rs": self.var_rs,
            "V": self.variance_term_V,
            "bound_M": self.bound_M,
            "simulated_M": math.nan if self.simulated_M is None else self.simulated_M,
            "sim_ci_halfwidth": math.nan if self.sim_ci_halfwidth is None else self.sim_ci_halfwidth,
        }


class BufferRequirement(NamedTuple):
    buffer_M: float
    eps_prime: float
    ci_halfwidth: float


def variance_term(capacity_C: float, eps: float, var_rs: float) -> float:
    return var_rs + capacity_C ** 2 * eps * (1.0 - eps)


def theorem6_bound(capacity_C: float, eps: float, eps_prime: float, var_rs: float) -> float:
    """Sufficient buffer size for outage eps' > eps at rate capacity_C."""
    if not eps_prime > eps:
        raise ConfigError(f"eps_prime must exceed eps ({eps_prime!r} <= {eps!r})")
    if not capacity_C > 0:
        raise ConfigError(f"capacity must be positive, got {capacity_C!r}")
    if var_rs < 0:
        raise ConfigError(f"var_rs must be nonnegative, got {var_rs!r}")
    gap = eps_prime - eps
    v = variance_term(capacity_C, eps, var_rs)
    argument = v / (gap * gap * capacity_C)
    if not argument > 1.0:
        raise DomainError(f"log argument {argument:.6g} <= 1; the bound is vacuous here")
    # the closing estimate of the derivation reads var - C eps (1 - eps); logged for comparison
    logger.debug("V=%.6g (alternate form %.6g)", v, var_rs - capacity_C * eps * (1.0 - eps))
    return capacity_C + v / (gap * capacity_C) * math.log(argument)


def rs_variance(policy, dist: FadingDistribution) -> float:
    """Var[R_s(H, P(H))] by quadrature of the first two moments."""
    first, second = policy.rs_moments(dist)
    return max(second - first * first, 0.0)


def default_buffer_grid(rate_R: float) -> np.ndarray:
    return rate_R * DEFAULT_GRID_MULTIPLES


def required_buffer_from_sim(dist: FadingDistribution, policy, rate_R: float, eps: float,
                             eps_prime_target: float, stream: RandomStream,
                             horizon: int = 200_000, M_grid: Optional[Sequence[float]] = None,
                             warmup_fraction: float = DEFAULT_WARMUP_FRACTION) -> BufferRequirement:
    """Smallest grid buffer whose eps' confidence interval sits below the target.

    Binary search over the sorted grid; every lookup reuses the same draws.
    """
    if not eps_prime_target > eps:
        raise ConfigError(f"eps_prime_target must exceed eps ({eps_prime_target!r} <= {eps!r})")
    grid = np.sort(np.asarray(default_buffer_grid(rate_R) if M_grid is None else M_grid, dtype=float))
    draws = draw_blocks(dist, policy, rate_R, eps, int(horizon), stream)
    visited: Dict[float, Dict] = {}

    def row_at(m: float) -> Dict:
        if m not in visited:
            table = outage_vs_buffer(dist, policy, rate_R, eps, [m], horizon, stream,
                                     warmup_fraction=warmup_fraction, workers=1, draws=draws)
            visited[m] = table.iloc[0].to_dict()
        return visited[m]

    def passes(m: float) -> bool:
        row = row_at(m)
        return row["eps_prime"] + row["ci_halfwidth"] <= eps_prime_target

    if not passes(grid[-1]):
        row = row_at(grid[-1])
        raise Unreachable(f"eps' {row['eps_prime']:.4g} at M={grid[-1]:.4g} still above target "
                          f"{eps_prime_target:.4g}")
    lo, hi = 0, grid.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if passes(grid[mid]):
            hi = mid
        else:
            lo = mid + 1
    row = row_at(grid[lo])
    logger.info("eps'=%.4g reached with M=%.4g after %d grid lookups", eps_prime_target, grid[lo], len(visited))
    return BufferRequirement(float(grid[lo]), float(row["eps_prime"]), float(row["ci_halfwidth"]))


def sizing_result(capacity_C: float, eps: float, eps_prime: float, var_rs: float,
                  requirement: Optional[BufferRequirement] = None) -> SizingResult:
    return SizingResult(
        capacity_C=capacity_C,
        eps=eps,
        eps_prime=eps_prime,
        var_rs=var_rs,
        variance_term_V=variance_term(capacity_C, eps, var_rs),
        bound_M=theorem6_bound(capacity_C, eps, eps_prime, var_rs),
        simulated_M=None if requirement is None else requirement.buffer_M,
        sim_ci_halfwidth=None if requirement is None else requirement.ci_halfwidth,
    )


def sizing_table(dist: FadingDistribution, policy, capacity_C: float, eps: float,
                 eps_primes: Sequence[float], seed: int, horizon: int = 200_000,
                 M_grid: Optional[Sequence[float]] = None, simulate: bool = True) -> pd.DataFrame:
    """One row per eps': bound and (optionally) simulated requirement.

    Vacuous bounds and unreachable targets are recorded as NaN and logged.
    """
    var_rs = rs_variance(policy, dist)
    rows: List[Dict] = []
    for index, eps_prime in enumerate(sorted(eps_primes)):
        requirement = None
        if simulate:
            try:
                requirement = required_buffer_from_sim(dist, policy, capacity_C, eps, eps_prime,
                                                       RandomStream(seed, index), horizon=horizon,
                                                       M_grid=M_grid)
            except Unreachable as exc:
                logger.warning("eps'=%.4g: %s", eps_prime, exc)
        try:
            row = sizing_result(capacity_C, eps, eps_prime, var_rs, requirement).to_row()
        except DomainError as exc:
            logger.warning("eps'=%.4g: %s", eps_prime, exc)
            row = SizingResult(capacity_C, eps, eps_prime, var_rs, variance_term(capacity_C, eps, var_rs),
                               math.nan,
                               None if requirement is None else requirement.buffer_M,
                               None if requirement is None else requirement.ci_halfwidth).to_row()
        if not math.isnan(row["simulated_M"]) and row["simulated_M"] > row["bound_M"]:
            logger.info("eps'=%.4g: simulated M %.4g above the bound %.4g", eps_prime,
                        row["simulated_M"], row["bound_M"])
        rows.append(row)
    return pd.DataFrame(rows)
