"""
Closed-form rate and power kernels.

Rates are in bits per channel use (base-2 logs). The stationarity
conditions behind p_wf and p_w are written in natural-log form, so the
multiplier lambda is in nats per unit power.

All functions accept scalars or numpy arrays and broadcast.
"""

import logging

import numpy as np

import settings
from errors import DegenerateGain

logger = logging.getLogger(__name__)

Rate = float
Power = float

P_W_TOLERANCE = 1e-12
P_W_MAX_DOUBLINGS = 200


def _scalar(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def rm(h_m, p):
    """Main-channel rate log2(1 + p h_m)."""
    return _scalar(np.log2(1.0 + np.asarray(p, dtype=float) * np.asarray(h_m, dtype=float)))


def rs(h_m, h_e, p):
    """Instantaneous secrecy rate [log2(1 + p h_m) - log2(1 + p h_e)]+."""
    p = np.asarray(p, dtype=float)
    gap = np.log2(1.0 + p * np.asarray(h_m, dtype=float)) - np.log2(1.0 + p * np.asarray(h_e, dtype=float))
    return _scalar(np.maximum(gap, 0.0))


def p_inv(h_m, target, strict: bool = True):
    """Channel-inversion power (2^target - 1)/h_m.

    With strict=False a zero gain asked to carry a positive rate maps to
    inf instead of raising DegenerateGain.
    """
    h_m = np.asarray(h_m, dtype=float)
    target = np.asarray(target, dtype=float)
    need = np.expm1(target * np.log(2.0))
    degenerate = (h_m <= 0) & (need > 0)
    if strict and np.any(degenerate):
        raise DegenerateGain("channel inversion needs h_m > 0 for a positive target rate")
    with np.errstate(divide="ignore", invalid="ignore"):
        power = np.where(need > 0, need / np.where(h_m > 0, h_m, 1.0), 0.0)
    return _scalar(np.where(degenerate, np.inf, power))


def p_wf(h_m, h_e, lam):
    """Secure waterfilling power for multiplier lam.

    Positive root of h_m/(1+h_m P) - h_e/(1+h_e P) = lam when h_m > h_e,
    zero otherwise.
    """
    h_m, h_e = np.broadcast_arrays(np.asarray(h_m, dtype=float), np.asarray(h_e, dtype=float))
    lam = np.asarray(lam, dtype=float)
    active = h_m > h_e
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_m = np.where(active, 1.0 / np.where(active, h_m, 1.0), 0.0)
        inv_e = np.where(h_e > 0, 1.0 / np.where(h_e > 0, h_e, 1.0), np.inf)
        d = inv_e - inv_m
        x = 4.0 * d / lam
        # x/(sqrt(d^2+x)+d) equals sqrt(d^2+x)-d without the cancellation
        spread = np.where(np.isfinite(d), x / (np.sqrt(d * d + x) + d), 0.0)
        power = 0.5 * (spread - 2.0 * inv_m)
    power = np.where(h_e > 0, power, 1.0 / lam - inv_m)
    return _scalar(np.where(active, np.maximum(power, 0.0), 0.0))


def wf_stationarity(h_m, h_e, p, lam):
    """Left side minus right side of the waterfilling stationarity condition."""
    h_m = np.asarray(h_m, dtype=float)
    h_e = np.asarray(h_e, dtype=float)
    p = np.asarray(p, dtype=float)
    return _scalar(h_m / (1.0 + h_m * p) - h_e / (1.0 + h_e * p) - lam)


def p_w_conditional(h_m, lam, nodes, weights, below):
    """Main-CSI stationarity power from a tabulated conditional eavesdropper law.

    Row i of nodes/weights holds the eavesdropper gains e <= h_m[i] with their
    probability weights; below[i] is Pr(H_e <= h_m[i]). Solves

        h_m F / (1 + h_m P) - sum_j W_j e_j / (1 + e_j P) = lam

    by bracketed bisection (the left side is strictly decreasing in P).
    """
    h_m = np.atleast_1d(np.asarray(h_m, dtype=float))
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    below = np.asarray(below, dtype=float)

    def lhs(power):
        column = power[:, None]
        eve = (weights * nodes / (1.0 + nodes * column)).sum(axis=1)
        return h_m * below / (1.0 + h_m * power) - eve - lam

    power = np.zeros_like(h_m)
    active = lhs(power) > 0
    if not np.any(active):
        return power
    lo = np.zeros_like(h_m)
    hi = np.where(active, 1.0, 0.0)
    for _ in range(P_W_MAX_DOUBLINGS):
        grow = active & (lhs(hi) > 0)
        if not np.any(grow):
            break
        lo = np.where(grow, hi, lo)
        hi = np.where(grow, 2.0 * hi, hi)
    for _ in range(settings.MAX_ITERATIONS):
        mid = 0.5 * (lo + hi)
        positive = lhs(mid) > 0
        lo = np.where(active & positive, mid, lo)
        hi = np.where(active & ~positive, mid, hi)
        if np.all(hi - lo <= P_W_TOLERANCE * np.maximum(1.0, hi)):
            break
    return np.where(active, 0.5 * (lo + hi), 0.0)


def p_w(h_m, lam, dist):
    """Main-CSI stationarity power for main gain(s) h_m under dist's eavesdropper law."""
    conditional = dist.conditional_below(h_m)
    power = p_w_conditional(h_m, lam, conditional.nodes, conditional.weights, conditional.below)
    return _scalar(power if np.ndim(h_m) else power[0])


def below_rate(rate, target):
    """True where `rate` falls short of `target` beyond rounding."""
    target = np.asarray(target, dtype=float)
    slack = settings.RATE_TIE_TOLERANCE * np.maximum(1.0, target)
    return np.asarray(rate, dtype=float) < target - slack
