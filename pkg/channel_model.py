"""
Joint fading law of the main and eavesdropper power gains.

A FadingDistribution is either a finite list of (h_m, h_e) atoms or a pair
of independent continuous marginals. Every solver works on the weighted
atom set returned by `support`: the atoms themselves in the discrete case,
a truncated Gauss-Legendre tensor grid in the continuous case.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

import settings
from errors import ConfigError, NonIntegrable

logger = logging.getLogger(__name__)

DISCRETE = "discrete"
CONTINUOUS = "continuous"
PROBABILITY_TOLERANCE = 1e-9
REFINE_STEPS = 60


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GainPair:
    h_m: float
    h_e: float

    def __post_init__(self):
        for name in ("h_m", "h_e"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be finite and nonnegative, got {value!r}")


@dataclass(frozen=True)
class RandomStream:
    """(seed, stream_id) pair; identical pairs reproduce identical draws."""
    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(sequence)

    def substream(self, offset: int) -> "RandomStream":
        return RandomStream(self.seed, self.stream_id + offset)


class GainSamples(NamedTuple):
    h_m: np.ndarray
    h_e: np.ndarray

    def pairs(self) -> List[GainPair]:
        return [GainPair(float(m), float(e)) for m, e in zip(self.h_m, self.h_e)]


class Support(NamedTuple):
    """Weighted atoms (h_m, h_e, w) with w summing to one."""
    h_m: np.ndarray
    h_e: np.ndarray
    w: np.ndarray


class MarginalSupport(NamedTuple):
    x: np.ndarray
    w: np.ndarray


class ConditionalBelow(NamedTuple):
    """Eavesdropper law restricted to h_e <= h_m, one row per main gain.

    nodes/weights have shape (n_m, k); below[i] = Pr(H_e <= x_i | H_m = x_i).
    """
    nodes: np.ndarray
    weights: np.ndarray
    below: np.ndarray


class MarginalQuantile(NamedTuple):
    value: float
    attained: float


# ---------------------------------------------------------------------------
# Marginal families
# ---------------------------------------------------------------------------

class Marginal:
    """One-dimensional power-gain law backed by a frozen scipy distribution."""

    atomic = False
    family = ""

    def _frozen(self):
        raise NotImplementedError

    @cached_property
    def law(self):
        return self._frozen()

    def cdf(self, x):
        return self.law.cdf(x)

    def pdf(self, x):
        return self.law.pdf(x)

    def ppf(self, p):
        return self.law.ppf(p)

    def rvs(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self.law.rvs(size=n, random_state=rng), dtype=float)

    def lower(self) -> float:
        return max(0.0, float(self.law.ppf(0.0)))

    def upper(self, truncation_quantile: float) -> float:
        return float(self.law.ppf(truncation_quantile))

    def mean(self) -> float:
        return float(self.law.mean())

    def to_descriptor(self) -> Dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(Marginal):
    mean_gain: float
    family = "exponential"

    def __post_init__(self):
        if not self.mean_gain > 0:
            raise ConfigError(f"exponential mean must be positive, got {self.mean_gain!r}")

    def _frozen(self):
        return stats.expon(scale=self.mean_gain)

    def to_descriptor(self) -> Dict:
        return {"family": self.family, "mean": self.mean_gain}


@dataclass(frozen=True)
class ChiSquare(Marginal):
    """Chi-square law with `degrees` degrees of freedom rescaled to `mean_gain`."""
    degrees: float
    mean_gain: float
    family = "chi_square"

    def __post_init__(self):
        if not self.degrees > 0 or not self.mean_gain > 0:
            raise ConfigError("chi-square degrees and mean must be positive")

    def _frozen(self):
        return stats.chi2(self.degrees, scale=self.mean_gain / self.degrees)

    def to_descriptor(self) -> Dict:
        return {"family": self.family, "degrees": self.degrees, "mean": self.mean_gain}


@dataclass(frozen=True)
class TabulatedQuantile(Marginal):
    """Quantile values at equally spaced probabilities 0, 1/n, ..., 1."""
    grid: Tuple[float, ...]
    family = "tabulated_quantile"

    def __post_init__(self):
        values = np.asarray(self.grid, dtype=float)
        if values.size < 2 or np.any(np.diff(values) <= 0) or values[0] < 0:
            raise ConfigError("tabulated quantile grid must be nonnegative and strictly increasing")

    def _frozen(self):
        edges = np.asarray(self.grid, dtype=float)
        mass = np.full(edges.size - 1, 1.0 / (edges.size - 1))
        return stats.rv_histogram((mass, edges), density=False)

    def to_descriptor(self) -> Dict:
        return {"family": self.family, "grid": list(self.grid)}


@dataclass(frozen=True)
class PointMass(Marginal):
    value: float
    family = "point_mass"
    atomic = True

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ConfigError(f"point mass must be finite and nonnegative, got {self.value!r}")

    def cdf(self, x):
        return (np.asarray(x, dtype=float) >= self.value).astype(float)

    def pdf(self, x):
        raise NonIntegrable("a point mass has no density")

    def ppf(self, p):
        return np.full_like(np.asarray(p, dtype=float), self.value)

    def rvs(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value)

    def lower(self) -> float:
        return self.value

    def upper(self, truncation_quantile: float) -> float:
        return self.value

    def mean(self) -> float:
        return self.value

    def to_descriptor(self) -> Dict:
        return {"family": self.family, "value": self.value}


FAMILIES = {
    "exponential": lambda d: Exponential(float(d["mean"])),
    "chi_square": lambda d: ChiSquare(float(d["degrees"]), float(d["mean"])),
    "tabulated_quantile": lambda d: TabulatedQuantile(tuple(float(v) for v in d["grid"])),
    "point_mass": lambda d: PointMass(float(d["value"])),
}


# ---------------------------------------------------------------------------
# Joint law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FadingDistribution:
    kind: str
    atoms: Tuple[Tuple[GainPair, float], ...] = ()
    marginal_m: Optional[Marginal] = None
    marginal_e: Optional[Marginal] = None
    quadrature_order: int = field(default_factory=settings.quadrature_order)
    truncation_quantile: float = settings.DEFAULT_TRUNCATION_QUANTILE

    def __post_init__(self):
        if self.kind == DISCRETE:
            self._validate_atoms()
        elif self.kind == CONTINUOUS:
            if self.marginal_m is None or self.marginal_e is None:
                raise ConfigError("continuous distributions need both marginals")
        else:
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if self.quadrature_order < 2:
            raise ConfigError("quadrature_order must be at least 2")
        if not 0.0 < self.truncation_quantile < 1.0:
            raise ConfigError("truncation_quantile must lie in (0, 1)")

    def _validate_atoms(self):
        if not self.atoms:
            raise ConfigError("discrete distribution needs at least one atom")
        probabilities = np.array([p for _, p in self.atoms], dtype=float)
        if np.any(~np.isfinite(probabilities)) or np.any(probabilities < 0):
            raise ConfigError("atom probabilities must be finite and nonnegative")
        total = probabilities.sum()
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ConfigError(f"atom probabilities sum to {total!r}, expected 1")
        if total != 1.0:
            renormalized = tuple((pair, p / total) for pair, p in self.atoms)
            object.__setattr__(self, "atoms", renormalized)

    # -- constructors ------------------------------------------------------

    @classmethod
    def discrete(cls, atoms: Iterable[Sequence[float]]) -> "FadingDistribution":
        """Build from (h_m, h_e, probability) triples."""
        entries = tuple((GainPair(float(m), float(e)), float(p)) for m, e, p in atoms)
        return cls(kind=DISCRETE, atoms=entries)

    @classmethod
    def independent(cls, marginal_m: Marginal, marginal_e: Marginal,
                    quadrature_order: Optional[int] = None,
                    truncation_quantile: Optional[float] = None) -> "FadingDistribution":
        kwargs = {}
        if quadrature_order is not None:
            kwargs["quadrature_order"] = int(quadrature_order)
        if truncation_quantile is not None:
            kwargs["truncation_quantile"] = float(truncation_quantile)
        return cls(kind=CONTINUOUS, marginal_m=marginal_m, marginal_e=marginal_e, **kwargs)

    @property
    def is_discrete(self) -> bool:
        return self.kind == DISCRETE

    # -- atom views ----------------------------------------------------------

    @cached_property
    def _atom_arrays(self) -> Support:
        h_m = np.array([pair.h_m for pair, _ in self.atoms], dtype=float)
        h_e = np.array([pair.h_e for pair, _ in self.atoms], dtype=float)
        w = np.array([p for _, p in self.atoms], dtype=float)
        return Support(h_m, h_e, w)

    def support(self, split_m: Optional[float] = None) -> Support:
        return _support(self, None if split_m is None else float(split_m))

    def marginal_m_support(self, split_m: Optional[float] = None) -> MarginalSupport:
        return _marginal_m_support(self, None if split_m is None else float(split_m))

    def m_range(self) -> Tuple[float, float]:
        if self.is_discrete:
            h_m = self._atom_arrays.h_m
            return float(h_m.min()), float(h_m.max())
        return self.marginal_m.lower(), self.marginal_m.upper(self.truncation_quantile)

    def e_range(self) -> Tuple[float, float]:
        if self.is_discrete:
            h_e = self._atom_arrays.h_e
            return float(h_e.min()), float(h_e.max())
        return self.marginal_e.lower(), self.marginal_e.upper(self.truncation_quantile)

    def conditional_below(self, x_m) -> ConditionalBelow:
        """Eavesdropper law on [0, x_m] given H_m = x_m, for each entry of x_m."""
        x_m = np.atleast_1d(np.asarray(x_m, dtype=float))
        if self.is_discrete:
            return self._discrete_conditional_below(x_m)
        return _continuous_below(self.marginal_e, x_m, self.quadrature_order, self.truncation_quantile)

    def _discrete_conditional_below(self, x_m: np.ndarray) -> ConditionalBelow:
        atoms = self._atom_arrays
        e_values = np.unique(atoms.h_e)
        e_marginal = np.array([atoms.w[atoms.h_e == v].sum() for v in e_values])
        rows = np.empty((x_m.size, e_values.size))
        for i, x in enumerate(x_m):
            match = np.isclose(atoms.h_m, x, rtol=1e-12, atol=0.0)
            mass = atoms.w[match].sum()
            if mass > 0:
                rows[i] = [atoms.w[match & (atoms.h_e == v)].sum() / mass for v in e_values]
            else:
                # off-atom main gains fall back to the eavesdropper marginal
                rows[i] = e_marginal
        nodes = np.broadcast_to(e_values, rows.shape).copy()
        weights = rows * (nodes <= x_m[:, None])
        return ConditionalBelow(nodes, weights, weights.sum(axis=1))

    def describe(self) -> str:
        if self.is_discrete:
            return f"discrete({len(self.atoms)} atoms)"
        return (f"{self.marginal_m.family}(m) x {self.marginal_e.family}(e), "
                f"order={self.quadrature_order}")


# ---------------------------------------------------------------------------
# Quadrature plumbing
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre(a, b, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [a, b]; a and b may be arrays (one panel per entry)."""
    x, w = _legendre(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid[..., None] + half[..., None] * x, half[..., None] * w


def _axis_nodes(marginal: Marginal, order: int, truncation_quantile: float,
                breaks: Sequence[float] = ()) -> MarginalSupport:
    """Panelled Gauss-Legendre nodes with each panel carrying its exact mass."""
    if marginal.atomic:
        return MarginalSupport(np.array([marginal.lower()]), np.array([1.0]))
    lo = marginal.lower()
    hi = marginal.upper(truncation_quantile)
    edges = [lo] + sorted(b for b in breaks if lo < b < hi) + [hi]
    total = float(marginal.cdf(hi) - marginal.cdf(lo))
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes, gl = gauss_legendre(a, b, order)
        raw = gl * marginal.pdf(nodes)
        raw_mass = raw.sum()
        mass = float(marginal.cdf(b) - marginal.cdf(a)) / total
        if raw_mass <= 0 or mass <= 0:
            continue
        xs.append(nodes)
        ws.append(raw * (mass / raw_mass))
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    return MarginalSupport(x, w / w.sum())


@lru_cache(maxsize=64)
def _support(dist: FadingDistribution, split_m: Optional[float]) -> Support:
    if dist.is_discrete:
        return dist._atom_arrays
    m_axis = _axis_nodes(dist.marginal_m, dist.quadrature_order, dist.truncation_quantile,
                         () if split_m is None else (split_m,))
    e_axis = _axis_nodes(dist.marginal_e, dist.quadrature_order, dist.truncation_quantile)
    h_m = np.repeat(m_axis.x, e_axis.x.size)
    h_e = np.tile(e_axis.x, m_axis.x.size)
    w = np.outer(m_axis.w, e_axis.w).ravel()
    logger.debug("built %d-node support for %s (split at %s)", w.size, dist.describe(), split_m)
    return Support(h_m, h_e, w)


@lru_cache(maxsize=64)
def _marginal_m_support(dist: FadingDistribution, split_m: Optional[float]) -> MarginalSupport:
    if dist.is_discrete:
        atoms = dist._atom_arrays
        values = np.unique(atoms.h_m)
        mass = np.array([atoms.w[atoms.h_m == v].sum() for v in values])
        return MarginalSupport(values, mass)
    return _axis_nodes(dist.marginal_m, dist.quadrature_order, dist.truncation_quantile,
                       () if split_m is None else (split_m,))


def _continuous_below(marginal: Marginal, x_m: np.ndarray, order: int,
                      truncation_quantile: float) -> ConditionalBelow:
    if marginal.atomic:
        nodes = np.full((x_m.size, 1), marginal.value)
        weights = (nodes <= x_m[:, None]).astype(float)
        return ConditionalBelow(nodes, weights, weights[:, 0])
    lo = marginal.lower()
    hi = marginal.upper(truncation_quantile)
    total = float(marginal.cdf(hi) - marginal.cdf(lo))
    upper = np.clip(x_m, lo, hi)
    nodes, gl = gauss_legendre(np.full_like(upper, lo), upper, order)
    weights = gl * marginal.pdf(nodes) / total
    below = (marginal.cdf(upper) - marginal.cdf(lo)) / total
    return ConditionalBelow(nodes, weights, np.asarray(below, dtype=float))


# ---------------------------------------------------------------------------
# Measure services
# ---------------------------------------------------------------------------

GainFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _evaluate(g: GainFunction, h_m: np.ndarray, h_e: np.ndarray) -> np.ndarray:
    values = np.broadcast_to(np.asarray(g(h_m, h_e), dtype=float), h_m.shape)
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        raise NonIntegrable(f"integrand is not finite at h=[{h_m[bad]:.6g}, {h_e[bad]:.6g}]")
    return values


def expect(dist: FadingDistribution, g: GainFunction,
           where: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None) -> float:
    """E[g(H)] (optionally E[g(H) 1(where(H))]).

    g and where take array arguments (h_m, h_e). With a continuous law and an
    indicator, every main-gain quadrature line is split at the points where
    the indicator flips before integrating.
    """
    if dist.is_discrete or where is None:
        sup = dist.support()
        used = sup.w > 0
        h_m, h_e, w = sup.h_m[used], sup.h_e[used], sup.w[used]
        if where is not None:
            keep = np.asarray(where(h_m, h_e), dtype=bool)
            h_m, h_e, w = h_m[keep], h_e[keep], w[keep]
            if w.size == 0:
                return 0.0
        return float(np.dot(w, _evaluate(g, h_m, h_e)))
    return _split_line_expectation(dist, g, where)


def _split_line_expectation(dist: FadingDistribution, g: GainFunction, where) -> float:
    order = dist.quadrature_order
    e_axis = _axis_nodes(dist.marginal_e, order, dist.truncation_quantile)
    marginal_m = dist.marginal_m
    if marginal_m.atomic:
        h_m = np.full(e_axis.x.size, marginal_m.value)
        keep = np.asarray(where(h_m, e_axis.x), dtype=bool)
        if not keep.any():
            return 0.0
        return float(np.dot(e_axis.w[keep], _evaluate(g, h_m[keep], e_axis.x[keep])))
    lo, hi = dist.m_range()
    total_m = float(marginal_m.cdf(hi) - marginal_m.cdf(lo))
    scan = np.linspace(lo, hi, 8 * order + 1)
    result = 0.0
    for h_e, weight_e in zip(e_axis.x, e_axis.w):
        inside = np.asarray(where(scan, np.full_like(scan, h_e)), dtype=bool)
        flips = np.nonzero(inside[1:] != inside[:-1])[0]
        edges = [lo] + [_refine_flip(where, scan[i], scan[i + 1], h_e) for i in flips] + [hi]
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a or not bool(where(np.array([0.5 * (a + b)]), np.array([h_e]))[0]):
                continue
            nodes, gl = gauss_legendre(a, b, order)
            weights = gl * marginal_m.pdf(nodes) / total_m
            result += weight_e * float(np.dot(weights, _evaluate(g, nodes, np.full_like(nodes, h_e))))
    return result


def _refine_flip(where, a: float, b: float, h_e: float) -> float:
    """Bisect the indicator flip between scan points a and b."""
    eve_point = np.array([h_e])
    left = bool(where(np.array([a]), eve_point)[0])
    for _ in range(REFINE_STEPS):
        mid = 0.5 * (a + b)
        if bool(where(np.array([mid]), eve_point)[0]) == left:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def prob(dist: FadingDistribution, predicate) -> float:
    value = expect(dist, lambda h_m, h_e: np.ones_like(h_m), where=predicate)
    return float(min(1.0, max(0.0, value)))


def quantile_m(dist: FadingDistribution, p: float) -> MarginalQuantile:
    """Smallest c with Pr(H_m <= c) >= p, with the probability actually attained."""
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"quantile level must lie in [0, 1], got {p!r}")
    if p == 0.0:
        return MarginalQuantile(0.0, float(m_cdf(dist, 0.0)))
    if dist.is_discrete:
        marginal = dist.marginal_m_support()
        cumulative = np.cumsum(marginal.w)
        index = int(np.searchsorted(cumulative, p - 1e-12))
        index = min(index, marginal.x.size - 1)
        return MarginalQuantile(float(marginal.x[index]), float(min(1.0, cumulative[index])))
    marginal_m = dist.marginal_m
    if marginal_m.atomic:
        return MarginalQuantile(marginal_m.value, 1.0)
    return MarginalQuantile(float(marginal_m.ppf(p)), float(p))


def m_cdf(dist: FadingDistribution, x: float) -> float:
    if dist.is_discrete:
        marginal = dist.marginal_m_support()
        return float(marginal.w[marginal.x <= x].sum())
    return float(dist.marginal_m.cdf(x))


def draw(dist: FadingDistribution, rng: np.random.Generator, n: int) -> GainSamples:
    if dist.is_discrete:
        atoms = dist._atom_arrays
        index = rng.choice(atoms.w.size, size=n, p=atoms.w)
        return GainSamples(atoms.h_m[index], atoms.h_e[index])
    h_m = dist.marginal_m.rvs(rng, n)
    h_e = dist.marginal_e.rvs(rng, n)
    return GainSamples(h_m, h_e)


def sample(dist: FadingDistribution, stream: RandomStream, n: int) -> GainSamples:
    """n i.i.d. block-fading draws, reproducible from the stream."""
    if n < 1:
        raise ConfigError(f"sample size must be at least 1, got {n!r}")
    return draw(dist, stream.generator(), int(n))


def threshold_membership(score, w, mass: float, tol: float = 0.0) -> Tuple[np.ndarray, float, float]:
    """Select the highest-scoring atoms carrying exactly `mass` probability.

    Atoms tied with the boundary score share one randomization probability.
    Returns (membership in [0, 1] per atom, boundary score, tie probability).
    """
    score = np.asarray(score, dtype=float)
    w = np.asarray(w, dtype=float)
    total = float(w.sum())
    if mass <= 0:
        return np.zeros_like(w), math.inf, 0.0
    positive = w > 0
    if mass >= total - 1e-15:
        return positive.astype(float), float(score[positive].min()), 1.0
    order = np.argsort(-score, kind="stable")
    cumulative = np.cumsum(w[order])
    index = min(int(np.searchsorted(cumulative, mass - 1e-15)), score.size - 1)
    threshold = float(score[order[index]])
    slack = tol * max(1.0, abs(threshold)) if math.isfinite(threshold) else 0.0
    tie = (score == threshold) | (np.abs(score - threshold) <= slack)
    above = (score > threshold + slack) & ~tie
    mass_above = float(w[above].sum())
    mass_tie = float(w[tie].sum())
    q = min(1.0, max(0.0, (mass - mass_above) / mass_tie)) if mass_tie > 0 else 0.0
    return above.astype(float) + tie * q, threshold, q


# ---------------------------------------------------------------------------
# Descriptors and presets
# ---------------------------------------------------------------------------

def marginal_from_descriptor(descriptor: Dict) -> Marginal:
    family = descriptor.get("family")
    if family not in FAMILIES:
        raise ConfigError(f"unknown marginal family {family!r}; expected one of {sorted(FAMILIES)}")
    try:
        return FAMILIES[family](descriptor)
    except KeyError as missing:
        raise ConfigError(f"marginal {family!r} is missing field {missing}")


def from_descriptor(descriptor: Dict) -> FadingDistribution:
    kind = descriptor.get("kind")
    if kind == DISCRETE:
        atoms = descriptor.get("atoms")
        if not atoms:
            raise ConfigError("discrete distribution needs an 'atoms' table of [h_m, h_e, p] rows")
        for row in atoms:
            if len(row) != 3:
                raise ConfigError(f"atom rows must be [h_m, h_e, p], got {row!r}")
        return FadingDistribution.discrete(atoms)
    if kind == CONTINUOUS:
        for key in ("marginal_m", "marginal_e"):
            if key not in descriptor:
                raise ConfigError(f"continuous distribution is missing {key!r}")
        return FadingDistribution.independent(
            marginal_from_descriptor(descriptor["marginal_m"]),
            marginal_from_descriptor(descriptor["marginal_e"]),
            quadrature_order=descriptor.get("quadrature_order"),
            truncation_quantile=descriptor.get("truncation_quantile"),
        )
    raise ConfigError(f"distribution kind must be 'discrete' or 'continuous', got {kind!r}")


def to_descriptor(dist: FadingDistribution) -> Dict:
    if dist.is_discrete:
        return {"kind": DISCRETE,
                "atoms": [[pair.h_m, pair.h_e, p] for pair, p in dist.atoms]}
    return {"kind": CONTINUOUS,
            "marginal_m": dist.marginal_m.to_descriptor(),
            "marginal_e": dist.marginal_e.to_descriptor(),
            "quadrature_order": dist.quadrature_order,
            "truncation_quantile": dist.truncation_quantile}


def table_one() -> FadingDistribution:
    """Four-state instance: h_m, h_e in {1, 10}."""
    return FadingDistribution.discrete([
        (1.0, 1.0, 0.1),
        (1.0, 10.0, 0.1),
        (10.0, 1.0, 0.4),
        (10.0, 10.0, 0.4),
    ])


def rayleigh(mean_m: float = 2.0, mean_e: float = 1.0,
             quadrature_order: Optional[int] = None) -> FadingDistribution:
    return FadingDistribution.independent(Exponential(mean_m), Exponential(mean_e),
                                          quadrature_order=quadrature_order)


def chi_square_pair(mean_m: float = 2.0, mean_e: float = 1.0, degrees: float = 2.0,
                    quadrature_order: Optional[int] = None) -> FadingDistribution:
    return FadingDistribution.independent(ChiSquare(degrees, mean_m), ChiSquare(degrees, mean_e),
                                          quadrature_order=quadrature_order)
