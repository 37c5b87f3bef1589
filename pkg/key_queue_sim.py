"""
Secret-key buffer simulation.

Each block the transmitter generates R_s(t) units of secret key and, unless
the block is in outage, spends R units to one-time-pad a packet at rate R.
The buffer holds at most M units; anything beyond is lost.

    Q(t+1) = min(M, Q(t) + R_s(t) - 1(no encoder outage) R)

An encoder outage happens when the block is in channel/artificial outage
(O_x) or when the buffer plus fresh key cannot cover R (key outage).
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

import settings
from channel_model import FadingDistribution, RandomStream, draw
from errors import ConfigError, InvalidConfig
from rate_kernel import below_rate, rm, rs

logger = logging.getLogger(__name__)

DEFAULT_WARMUP_FRACTION = 0.1
Z_95 = 1.96
KEY_TOLERANCE = 1e-12
MIN_DRIFT_SAMPLES = 10_000


@dataclass(frozen=True)
class QueueConfig:
    rate_R: float
    buffer_M: float
    eps: float
    horizon_T: int
    policy: object
    stream: RandomStream
    warmup_fraction: float = DEFAULT_WARMUP_FRACTION

    def __post_init__(self):
        if not self.rate_R > 0 or not math.isfinite(self.rate_R):
            raise ConfigError(f"rate_R must be positive, got {self.rate_R!r}")
        if not self.buffer_M >= 0:
            raise ConfigError(f"buffer_M must be nonnegative (or inf), got {self.buffer_M!r}")
        if not 0 <= self.eps < 1:
            raise ConfigError(f"eps must lie in [0, 1), got {self.eps!r}")
        if int(self.horizon_T) < 1:
            raise ConfigError(f"horizon_T must be at least 1, got {self.horizon_T!r}")
        if not 0 <= self.warmup_fraction < 1:
            raise ConfigError("warmup_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class QueueStats:
    loss_ratio: float
    loss_ratio_undefined: bool
    enc_outage_freq: float
    key_outage_freq: float
    channel_outage_freq: float
    artificial_outage_freq: float
    final_q: float
    mean_rs: float
    identity_residual: float
    eps_prime: float
    eps_prime_stderr: float
    rate_R: float
    buffer_M: float
    eps: float
    horizon: int
    seed: int
    stream_id: int

    def to_row(self) -> Dict:
        return {
            "M": self.buffer_M,
            "rate_R": self.rate_R,
            "eps": self.eps,
            "horizon": self.horizon,
            "seed": self.seed,
            "loss_ratio": self.loss_ratio,
            "eps_prime": self.eps_prime,
            "eps_prime_stderr": self.eps_prime_stderr,
            "key_outage_freq": self.key_outage_freq,
            "channel_outage_freq": self.channel_outage_freq,
            "artificial_outage_freq": self.artificial_outage_freq,
            "identity_residual": self.identity_residual,
        }


@dataclass(frozen=True)
class DriftVariance:
    mu: float
    sigma2: float
    expected_rs: float
    mu_mc: float
    mu_stderr: float
    sigma2_stderr: float


class BlockDraws(NamedTuple):
    """Per-block quantities shared by every buffer size (common random numbers)."""
    rs: np.ndarray
    channel_outage: np.ndarray
    artificial_outage: np.ndarray
    no_outage_x: np.ndarray
    p_ch: float


class QueueTrace(NamedTuple):
    final_q: float
    lost: float
    served: int
    sum_rs: float
    key_outages: int
    enc_outage: np.ndarray
    trajectory: Optional[np.ndarray]


class CoupledTraces(NamedTuple):
    finite: np.ndarray
    infinite: np.ndarray
    reflected: np.ndarray


def artificial_probability(eps: float, p_ch: float) -> float:
    if p_ch > eps + 1e-9:
        raise InvalidConfig(f"channel outage probability {p_ch:.6g} exceeds eps={eps:.6g}; "
                            f"artificial outages cannot bring Pr(O_x) down to eps")
    if p_ch >= 1.0:
        return 0.0
    return min(1.0, max(0.0, (eps - p_ch) / (1.0 - p_ch)))


def draw_blocks(dist: FadingDistribution, policy, rate_R: float, eps: float,
                horizon: int, stream: RandomStream) -> BlockDraws:
    """Draw gains, region coins and artificial-outage coins for `horizon` blocks.

    Draw order within the stream is fixed: gains, then boundary coins, then
    artificial-outage coins.
    """
    p_ch = policy.channel_outage_at(dist, rate_R)
    a = artificial_probability(eps, p_ch)
    rng = stream.generator()
    gains = draw(dist, rng, horizon)
    region_coin = rng.random(horizon)
    outage_coin = rng.random(horizon)
    power = np.asarray(policy.power(gains.h_m, gains.h_e, region_coin), dtype=float)
    rates = np.asarray(rs(gains.h_m, gains.h_e, power), dtype=float)
    channel_outage = below_rate(rm(gains.h_m, power), rate_R)
    artificial = ~channel_outage & (outage_coin < a)
    no_outage_x = ~(channel_outage | artificial)
    return BlockDraws(rates, channel_outage, artificial, no_outage_x, p_ch)


def run_key_queue(rs_values: Sequence[float], no_outage_x: Sequence[bool], rate_R: float,
                  buffer_M: float, record: bool = False) -> QueueTrace:
    """Run the buffer recursion over supplied per-block key rates and outage flags."""
    rs_list = np.asarray(rs_values, dtype=float).tolist()
    ok_list = np.asarray(no_outage_x, dtype=bool).tolist()
    enc_outage = np.zeros(len(rs_list), dtype=bool)
    trajectory = np.empty(len(rs_list)) if record else None
    threshold = rate_R - KEY_TOLERANCE * max(1.0, rate_R)
    q = 0.0
    lost = 0.0
    served = 0
    key_outages = 0
    total = 0.0
    for t, (r, ok) in enumerate(zip(rs_list, ok_list)):
        total += r
        level = q + r
        if ok and level >= threshold:
            level = max(0.0, level - rate_R)
            served += 1
        else:
            enc_outage[t] = True
            if ok:
                key_outages += 1
        if level > buffer_M:
            lost += level - buffer_M
            level = buffer_M
        q = level
        if record:
            trajectory[t] = q
    return QueueTrace(q, lost, served, total, key_outages, enc_outage, trajectory)


def conservation_check(trace: QueueTrace, rate_R: float) -> float:
    """|(1 - L) sum R_s - Q(T) - R * (served blocks)|."""
    return abs((trace.sum_rs - trace.lost) - trace.final_q - rate_R * trace.served)


def _summarize(trace: QueueTrace, draws: BlockDraws, rate_R: float, buffer_M: float, eps: float,
               warmup_fraction: float, stream: RandomStream) -> QueueStats:
    horizon = len(draws.rs)
    undefined = trace.sum_rs <= 0
    loss_ratio = 0.0 if undefined else trace.lost / trace.sum_rs
    start = min(int(warmup_fraction * horizon), horizon - 1)
    tail = trace.enc_outage[start:]
    eps_prime = float(tail.mean())
    stderr = math.sqrt(max(eps_prime * (1.0 - eps_prime), 0.0) / tail.size)
    return QueueStats(
        loss_ratio=loss_ratio,
        loss_ratio_undefined=bool(undefined),
        enc_outage_freq=float(trace.enc_outage.mean()),
        key_outage_freq=trace.key_outages / horizon,
        channel_outage_freq=float(draws.channel_outage.mean()),
        artificial_outage_freq=float(draws.artificial_outage.mean()),
        final_q=trace.final_q,
        mean_rs=trace.sum_rs / horizon,
        identity_residual=conservation_check(trace, rate_R),
        eps_prime=eps_prime,
        eps_prime_stderr=stderr,
        rate_R=rate_R,
        buffer_M=buffer_M,
        eps=eps,
        horizon=horizon,
        seed=stream.seed,
        stream_id=stream.stream_id,
    )


def simulate(config: QueueConfig, dist: FadingDistribution) -> QueueStats:
    """One finite-buffer trace of length horizon_T."""
    draws = draw_blocks(dist, config.policy, config.rate_R, config.eps, int(config.horizon_T), config.stream)
    trace = run_key_queue(draws.rs, draws.no_outage_x, config.rate_R, config.buffer_M)
    stats = _summarize(trace, draws, config.rate_R, config.buffer_M, config.eps,
                       config.warmup_fraction, config.stream)
    if stats.identity_residual > 1e-6 * stats.horizon:
        logger.warning("conservation residual %.3g exceeds 1e-6 T", stats.identity_residual)
    logger.debug("M=%.4g R=%.4g: loss %.4g, eps' %.4g", config.buffer_M, config.rate_R,
                 stats.loss_ratio, stats.eps_prime)
    return stats


def drift_variance(dist: FadingDistribution, policy, rate_R: float, eps: float,
                   n_samples: int, stream: RandomStream) -> DriftVariance:
    """Drift and variance of the per-block increment R_s - R 1(no O_x).

    The drift is exact (quadrature); the variance is a Monte Carlo estimate
    over joint gain and artificial-outage draws.
    """
    if n_samples < MIN_DRIFT_SAMPLES:
        raise ConfigError(f"n_samples must be at least {MIN_DRIFT_SAMPLES}, got {n_samples!r}")
    expected_rs = policy.expected_rs(dist)
    mu = expected_rs - rate_R * (1.0 - eps)
    draws = draw_blocks(dist, policy, rate_R, eps, int(n_samples), stream)
    increment = draws.rs - rate_R * draws.no_outage_x
    n = increment.size
    mu_mc = float(increment.mean())
    sigma2 = float(increment.var(ddof=1))
    centered = increment - mu_mc
    fourth = float(np.mean(centered ** 4))
    return DriftVariance(
        mu=mu,
        sigma2=sigma2,
        expected_rs=expected_rs,
        mu_mc=mu_mc,
        mu_stderr=math.sqrt(sigma2 / n),
        sigma2_stderr=math.sqrt(max(fourth - sigma2 ** 2, 0.0) / n),
    )


def _trace_row(draws: BlockDraws, rate_R: float, buffer_M: float, eps: float,
               warmup_fraction: float, stream: RandomStream) -> Dict:
    trace = run_key_queue(draws.rs, draws.no_outage_x, rate_R, buffer_M)
    stats = _summarize(trace, draws, rate_R, buffer_M, eps, warmup_fraction, stream)
    row = stats.to_row()
    row["ci_halfwidth"] = Z_95 * stats.eps_prime_stderr
    return row


def outage_vs_buffer(dist: FadingDistribution, policy, rate_R: float, eps: float,
                     M_grid: Sequence[float], horizon: int, stream: RandomStream,
                     warmup_fraction: float = DEFAULT_WARMUP_FRACTION,
                     workers: Optional[int] = None, draws: Optional[BlockDraws] = None) -> pd.DataFrame:
    """Post-warm-up encoder outage frequency for each buffer size.

    All buffer sizes see the same block draws. Rows come back sorted by M.
    """
    if horizon < 1:
        raise ConfigError(f"horizon must be at least 1, got {horizon!r}")
    if draws is None:
        draws = draw_blocks(dist, policy, rate_R, eps, int(horizon), stream)
    grid = sorted(float(m) for m in M_grid)
    n_jobs = settings.workers(workers)
    if n_jobs == 1 or len(grid) == 1:
        rows = [_trace_row(draws, rate_R, m, eps, warmup_fraction, stream) for m in grid]
    else:
        rows = Parallel(n_jobs=n_jobs)(
            delayed(_trace_row)(draws, rate_R, m, eps, warmup_fraction, stream) for m in grid
        )
    table = pd.DataFrame(rows)
    return table.sort_values("M", kind="mergesort").reset_index(drop=True)


def coupled_traces(dist: FadingDistribution, policy, rate_R: float, eps: float,
                   buffer_M: float, horizon: int, stream: RandomStream) -> CoupledTraces:
    """Finite buffer, infinite buffer and reflected walk driven by the same draws.

    The reflected walk is Q'(t+1) = (Q'(t) + R_s(t) - R 1(no O_x))+; it
    ignores key outages.
    """
    draws = draw_blocks(dist, policy, rate_R, eps, int(horizon), stream)
    finite = run_key_queue(draws.rs, draws.no_outage_x, rate_R, buffer_M, record=True).trajectory
    infinite = run_key_queue(draws.rs, draws.no_outage_x, rate_R, math.inf, record=True).trajectory
    reflected = np.empty(len(draws.rs))
    q = 0.0
    for t, (r, ok) in enumerate(zip(draws.rs.tolist(), draws.no_outage_x.tolist())):
        q = max(0.0, q + r - (rate_R if ok else 0.0))
        reflected[t] = q
    return CoupledTraces(finite, infinite, reflected)


def steady_state_residual(stats: QueueStats, expected_rs: float, rate_R: float) -> float:
    """(1 - L) E[R_s] - (1 - eps') R; near zero once the queue is in steady state."""
    return (1.0 - stats.loss_ratio) * expected_rs - (1.0 - stats.eps_prime) * rate_R


def buffer_sweep(dist: FadingDistribution, policies: Dict[float, object], eps: float,
                 M_grid: Sequence[float], horizon: int, seed: int,
                 warmup_fraction: float = DEFAULT_WARMUP_FRACTION,
                 workers: Optional[int] = None) -> pd.DataFrame:
    """Loss ratio and eps' over an M grid for several rates.

    `policies` maps each rate R to the policy solved for that rate. Rate i
    uses stream (seed, i) so results do not depend on the worker count.
    """
    tables: List[pd.DataFrame] = []
    for stream_id, rate in enumerate(sorted(policies)):
        stream = RandomStream(seed, stream_id)
        table = outage_vs_buffer(dist, policies[rate], rate, eps, M_grid, horizon, stream,
                                 warmup_fraction=warmup_fraction, workers=workers)
        tables.append(table)
        logger.info("R=%.6g: swept %d buffer sizes over %d blocks", rate, len(table), horizon)
    merged = pd.concat(tables, ignore_index=True)
    return merged.sort_values(["rate_R", "M"], kind="mergesort").reset_index(drop=True)
