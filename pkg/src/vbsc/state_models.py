"""Distributions of the per-use crossover probability P of a varying BSC.

Four kinds are supported:

* :class:`MaesHybrid` -- the SRAM-cell error model, built from the hybrid
  one-probability law ``F(x) = Phi(lambda1 * Phi^-1(x) + lambda2)`` and a
  single-readout enrollment.
* :class:`Discrete` -- finitely many atoms.
* :class:`PiecewiseConstant` -- a step density on ``[0, 1]``.
* :class:`Degenerate` -- a single atom (the plain BSC).

Continuous kinds integrate in a per-kind coordinate ``c`` in which the density
is bounded. ``MaesHybrid`` uses ``c = Phi^-1(p)``; the density diverges at
``p -> 0`` in ``p``-space but is a smooth Gaussian-like bump in ``c``.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, ClassVar, NamedTuple

import numpy as np
from scipy import integrate, optimize, special

from .errors import ConfigError, DistributionKindError, DomainError

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _check_probability(p, name="p"):
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {p!r}")
    return arr


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


@dataclass(frozen=True)
class Atom:
    """Point mass returned by :meth:`Degenerate.pdf` in place of a float."""

    p: float
    mass: float


class StateDistribution(ABC):
    """Law of the crossover probability ``P`` on ``[0, 1]``."""

    kind: ClassVar[str]
    atomic: ClassVar[bool] = False

    @abstractmethod
    def pdf(self, p):
        ...

    @abstractmethod
    def expect(self, g: Callable, lo: float = 0.0, hi: float = 1.0) -> float:
        """Return ``E[g(P); lo <= P <= hi]``."""

    @abstractmethod
    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        ...

    @abstractmethod
    def reflect(self) -> "StateDistribution":
        """Distribution of ``1 - P``."""

    @abstractmethod
    def to_config(self) -> dict:
        ...

    def mean(self) -> float:
        return float(self.expect(lambda p: p))

    def cdf(self, p: float) -> float:
        _check_probability(p)
        return float(self.expect(lambda q: np.ones_like(q), 0.0, p))

    def mass_above_half(self) -> float:
        """Probability mass on ``(1/2, 1]``."""
        return float(self.expect(lambda q: np.ones_like(q), np.nextafter(0.5, 1.0), 1.0))


# ---------------------------------------------------------------------------
# atomic kinds


@dataclass(frozen=True)
class Discrete(StateDistribution):
    points: tuple[tuple[float, float], ...]

    kind: ClassVar[str] = "discrete"
    atomic: ClassVar[bool] = True

    def __post_init__(self):
        pts = tuple((float(p), float(m)) for p, m in self.points)
        if not pts:
            raise DomainError("discrete distribution needs at least one point")
        for p, m in pts:
            _check_probability(p)
            if not (m >= 0.0 and math.isfinite(m)):
                raise DomainError(f"masses must be non-negative, got {m!r}")
        total = math.fsum(m for _, m in pts)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"discrete masses sum to {total!r}, expected 1")
        object.__setattr__(self, "points", pts)

    @property
    def support(self) -> np.ndarray:
        return np.array([p for p, _ in self.points])

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.points])

    def pdf(self, p):
        raise DistributionKindError("discrete distributions have no density; use pmf()")

    def pmf(self, p: float) -> float:
        _check_probability(p)
        return math.fsum(m for q, m in self.points if q == p)

    def expect(self, g, lo=0.0, hi=1.0):
        vals = [m * float(g(q)) for q, m in self.points if lo <= q <= hi and m > 0.0]
        return math.fsum(vals)

    def mean(self):
        return math.fsum(p * m for p, m in self.points)

    def sample(self, n, rng):
        idx = rng.choice(len(self.points), size=n, p=self.masses / self.masses.sum())
        return self.support[idx]

    def reflect(self):
        return Discrete(tuple((1.0 - p, m) for p, m in self.points))

    def to_config(self):
        return {"kind": self.kind, "points": [[p, m] for p, m in self.points]}


@dataclass(frozen=True)
class Degenerate(StateDistribution):
    p: float

    kind: ClassVar[str] = "degenerate"
    atomic: ClassVar[bool] = True

    def __post_init__(self):
        _check_probability(self.p)
        object.__setattr__(self, "p", float(self.p))

    @property
    def points(self):
        return ((self.p, 1.0),)

    def pdf(self, p):
        _check_probability(p)
        return Atom(self.p, 1.0) if p == self.p else 0.0

    def pmf(self, p: float) -> float:
        _check_probability(p)
        return 1.0 if p == self.p else 0.0

    def expect(self, g, lo=0.0, hi=1.0):
        return float(g(self.p)) if lo <= self.p <= hi else 0.0

    def mean(self):
        return self.p

    def sample(self, n, rng):
        return np.full(n, self.p)

    def reflect(self):
        return Degenerate(1.0 - self.p)

    def to_config(self):
        return {"kind": self.kind, "p": self.p}


# ---------------------------------------------------------------------------
# continuous kinds


class ContinuousDistribution(StateDistribution):
    """Continuous law handled through an integration coordinate ``c``.

    Subclasses map ``p`` to ``c`` and provide the density of ``c``; all
    integrals are taken in ``c`` over the finite span :meth:`coord_span`.
    """

    @abstractmethod
    def to_coord(self, p):
        ...

    @abstractmethod
    def from_coord(self, c):
        """Return ``p`` at coordinate ``c``."""

    @abstractmethod
    def from_coord_complement(self, c):
        """Return ``1 - p`` at coordinate ``c`` without cancellation."""

    @abstractmethod
    def coord_density(self, c):
        ...

    @abstractmethod
    def coord_density_derivative(self, c):
        ...

    @abstractmethod
    def dp_dc(self, c):
        ...

    @abstractmethod
    def coord_span(self) -> tuple[float, float]:
        ...

    def coord_breaks(self) -> tuple[float, ...]:
        """Coordinates where the density or common integrands have kinks."""
        return (float(self.to_coord(0.5)),)

    def log_odds(self, c):
        """``ln(p / (1 - p))`` at coordinate ``c``."""
        return np.log(self.from_coord(c)) - np.log(self.from_coord_complement(c))

    def _clip_coord(self, p):
        lo, hi = self.coord_span()
        if p <= 0.0:
            return lo
        if p >= 1.0:
            return hi
        return float(np.clip(self.to_coord(p), lo, hi))

    def expect_coord(self, g, c_lo: float, c_hi: float) -> float:
        """``E[g(P)]`` over the coordinate interval ``[c_lo, c_hi]``."""
        span_lo, span_hi = self.coord_span()
        a, b = max(c_lo, span_lo), min(c_hi, span_hi)
        if not b > a:
            return 0.0
        cuts = [a] + [x for x in self.coord_breaks() if a < x < b] + [b]

        def integrand(c):
            return float(g(self.from_coord(c))) * float(self.coord_density(c))

        total = 0.0
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            val, _ = integrate.quad(integrand, x0, x1, epsabs=QUAD_EPSABS,
                                    epsrel=QUAD_EPSREL, limit=200)
            total += val
        return total

    def expect(self, g, lo=0.0, hi=1.0):
        _check_probability(lo, "lo")
        _check_probability(hi, "hi")
        return self.expect_coord(g, self._clip_coord(lo), self._clip_coord(hi))

    def cdf_coord(self, c: float) -> float:
        return self.expect_coord(np.ones_like, self.coord_span()[0], c)

    def sf_coord(self, c: float) -> float:
        return self.expect_coord(np.ones_like, c, self.coord_span()[1])

    def masses_coord(self, edges) -> np.ndarray:
        """Probability mass between consecutive coordinate edges."""
        edges = np.asarray(edges, dtype=float)
        return self._bin_integrals(lambda c: self.coord_density(c), edges)

    def partial_means_coord(self, edges) -> np.ndarray:
        """``E[P; bin]`` for each bin between consecutive coordinate edges."""
        edges = np.asarray(edges, dtype=float)
        return self._bin_integrals(lambda c: self.from_coord(c) * self.coord_density(c), edges)

    def _bin_integrals(self, fn, edges):
        # one vector-valued adaptive quadrature over all bins, each mapped to [0, 1]
        lo, width = edges[:-1], np.diff(edges)

        def mapped(t):
            return width * fn(lo + width * t)

        val, _ = integrate.quad_vec(mapped, 0.0, 1.0, epsabs=QUAD_EPSABS * 1e-2,
                                    epsrel=QUAD_EPSREL, norm="max", limit=400)
        return np.asarray(val)

    def quantile_coord(self, mass: float, upper_tail: bool = False) -> float:
        """Coordinate with ``mass`` below it (or above it if ``upper_tail``)."""
        lo, hi = self.coord_span()
        if upper_tail:
            fn = lambda c: self.sf_coord(c) - mass  # noqa: E731
        else:
            fn = lambda c: self.cdf_coord(c) - mass  # noqa: E731
        return optimize.brentq(fn, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=200)


@dataclass(frozen=True)
class MaesHybrid(ContinuousDistribution):
    """SRAM-cell error-probability model.

    A cell's one-probability ``X`` has cdf ``Phi(lambda1 * Phi^-1(x) + lambda2)``.
    Enrollment reads the cell once, so the re-read error probability is ``X``
    with probability ``1 - X`` (enrolled 0) and ``1 - X`` with probability
    ``X`` (enrolled 1). In ``u = Phi^-1(p)`` the error density is

        k(u) = lambda1 * Phi(-u) * [phi(lambda1*u + lambda2) + phi(lambda1*u - lambda2)].

    ``reflected=True`` gives the law of ``1 - P``.
    """

    lambda1: float = 0.1213
    lambda2: float = 0.021
    reflected: bool = False

    kind: ClassVar[str] = "maes_hybrid"

    def __post_init__(self):
        if not (math.isfinite(self.lambda1) and self.lambda1 > 0.0):
            raise DomainError(f"lambda1 must be positive, got {self.lambda1!r}")
        if not math.isfinite(self.lambda2):
            raise DomainError(f"lambda2 must be finite, got {self.lambda2!r}")

    # coordinate u = Phi^-1(p); reflection is u -> -u on the density
    def to_coord(self, p):
        return special.ndtri(p)

    def from_coord(self, c):
        return special.ndtr(c)

    def from_coord_complement(self, c):
        return special.ndtr(-np.asarray(c))

    def dp_dc(self, c):
        return _phi(c)

    def log_odds(self, c):
        return special.log_ndtr(c) - special.log_ndtr(-np.asarray(c))

    def coord_span(self):
        half = (10.0 + abs(self.lambda2)) / self.lambda1
        return (-half, half)

    def coord_breaks(self):
        r = self.lambda2 / self.lambda1
        return tuple(sorted({0.0, r, -r}))

    def _k(self, u):
        l1, l2 = self.lambda1, self.lambda2
        return l1 * special.ndtr(-u) * (_phi(l1 * u + l2) + _phi(l1 * u - l2))

    def _dk(self, u):
        l1, l2 = self.lambda1, self.lambda2
        a, b = l1 * u + l2, l1 * u - l2
        pa, pb = _phi(a), _phi(b)
        return l1 * (-_phi(u) * (pa + pb) - special.ndtr(-u) * l1 * (a * pa + b * pb))

    def coord_density(self, c):
        c = np.asarray(c, dtype=float)
        return self._k(-c) if self.reflected else self._k(c)

    def coord_density_derivative(self, c):
        c = np.asarray(c, dtype=float)
        return -self._dk(-c) if self.reflected else self._dk(c)

    def pdf(self, p):
        arr = _check_probability(p)
        if self.reflected:
            arr = 1.0 - arr
        l1, l2 = self.lambda1, self.lambda2
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u = special.ndtri(arr)
            base = math.log(l1) + special.log_ndtr(-u) + 0.5 * u * u
            out = np.exp(base - 0.5 * (l1 * u + l2) ** 2) + np.exp(base - 0.5 * (l1 * u - l2) ** 2)
        out = np.where(arr == 0.0, np.inf, out)
        out = np.where(arr == 1.0, 0.0, out)
        return float(out) if np.ndim(out) == 0 else out

    def sample_one_probabilities(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw cell one-probabilities from the hybrid model."""
        z = rng.standard_normal(n)
        return special.ndtr((z - self.lambda2) / self.lambda1)

    def sample(self, n, rng):
        z = rng.standard_normal(n)
        w = (z - self.lambda2) / self.lambda1
        x, x_c = special.ndtr(w), special.ndtr(-w)
        enrolled_one = rng.random(n) < x
        err = np.where(enrolled_one, x_c, x)
        return 1.0 - err if self.reflected else err

    def reflect(self):
        return MaesHybrid(self.lambda1, self.lambda2, not self.reflected)

    def to_config(self):
        cfg = {"kind": self.kind, "lambda1": self.lambda1, "lambda2": self.lambda2}
        if self.reflected:
            cfg["reflected"] = True
        return cfg


@dataclass(frozen=True)
class PiecewiseConstant(ContinuousDistribution):
    """Step density; zero outside ``[breakpoints[0], breakpoints[-1]]``."""

    breakpoints: tuple[float, ...]
    densities: tuple[float, ...]

    kind: ClassVar[str] = "piecewise"

    def __post_init__(self):
        b = tuple(float(x) for x in self.breakpoints)
        d = tuple(float(x) for x in self.densities)
        if len(b) < 2 or len(d) != len(b) - 1:
            raise DomainError("need k+1 breakpoints for k densities, k >= 1")
        _check_probability(b, "breakpoints")
        if any(x1 <= x0 for x0, x1 in zip(b[:-1], b[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if any(not (x >= 0.0 and math.isfinite(x)) for x in d):
            raise DomainError("densities must be finite and non-negative")
        total = math.fsum(dk * (x1 - x0) for dk, x0, x1 in zip(d, b[:-1], b[1:]))
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"piecewise density integrates to {total!r}, expected 1")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "densities", d)

    @classmethod
    def uniform(cls, lo: float = 0.0, hi: float = 1.0) -> "PiecewiseConstant":
        return cls((lo, hi), (1.0 / (hi - lo),))

    def to_coord(self, p):
        return np.asarray(p, dtype=float) if np.ndim(p) else float(p)

    def from_coord(self, c):
        return c

    def from_coord_complement(self, c):
        return 1.0 - np.asarray(c)

    def dp_dc(self, c):
        return np.ones_like(np.asarray(c, dtype=float))

    def coord_span(self):
        return (self.breakpoints[0], self.breakpoints[-1])

    def coord_breaks(self):
        return tuple(sorted(set(self.breakpoints[1:-1]) | {0.5}))

    def coord_density(self, c):
        c = np.asarray(c, dtype=float)
        b = np.asarray(self.breakpoints)
        idx = np.searchsorted(b, c, side="right") - 1
        # the last breakpoint belongs to the last piece
        idx = np.where(c == b[-1], len(self.densities) - 1, idx)
        inside = (idx >= 0) & (idx < len(self.densities))
        d = np.asarray(self.densities)[np.clip(idx, 0, len(self.densities) - 1)]
        out = np.where(inside, d, 0.0)
        return float(out) if out.ndim == 0 else out

    def coord_density_derivative(self, c):
        return np.zeros_like(np.asarray(c, dtype=float))

    def pdf(self, p):
        _check_probability(p)
        return self.coord_density(p)

    def cdf_coord(self, c):
        b = np.asarray(self.breakpoints)
        d = np.asarray(self.densities)
        overlap = np.clip(np.minimum(b[1:], c) - b[:-1], 0.0, None)
        return float(math.fsum(d * overlap))

    def sf_coord(self, c):
        b = np.asarray(self.breakpoints)
        d = np.asarray(self.densities)
        overlap = np.clip(b[1:] - np.maximum(b[:-1], c), 0.0, None)
        return float(math.fsum(d * overlap))

    def masses_coord(self, edges):
        edges = np.asarray(edges, dtype=float)
        b = np.asarray(self.breakpoints)
        d = np.asarray(self.densities)
        lo, hi = edges[:-1, None], edges[1:, None]
        overlap = np.clip(np.minimum(hi, b[1:]) - np.maximum(lo, b[:-1]), 0.0, None)
        return (overlap * d).sum(axis=1)

    def partial_means_coord(self, edges):
        edges = np.asarray(edges, dtype=float)
        b = np.asarray(self.breakpoints)
        d = np.asarray(self.densities)
        lo = np.maximum(edges[:-1, None], b[:-1])
        hi = np.minimum(edges[1:, None], b[1:])
        hi = np.maximum(hi, lo)
        return (0.5 * (hi * hi - lo * lo) * d).sum(axis=1)

    def mean(self):
        b = np.asarray(self.breakpoints)
        return float(math.fsum(0.5 * (b[1:] ** 2 - b[:-1] ** 2) * np.asarray(self.densities)))

    def cdf(self, p):
        _check_probability(p)
        return self.cdf_coord(p)

    def sample(self, n, rng):
        b = np.asarray(self.breakpoints)
        w = np.asarray(self.densities) * np.diff(b)
        idx = rng.choice(len(w), size=n, p=w / w.sum())
        return b[idx] + rng.random(n) * np.diff(b)[idx]

    def reflect(self):
        return PiecewiseConstant(tuple(1.0 - x for x in reversed(self.breakpoints)),
                                 tuple(reversed(self.densities)))

    def to_config(self):
        return {"kind": self.kind, "breakpoints": list(self.breakpoints),
                "densities": list(self.densities)}


# ---------------------------------------------------------------------------
# quantization


class Interval(NamedTuple):
    lo: float
    hi: float
    mass: float
    rep_p: float
    center: float  # E[P | P in interval]


@dataclass(frozen=True)
class QuantizedStateSpace:
    """Finite partition of the state range used for rate splitting.

    ``intervals`` cover ``[p_low, p_high]`` (the clipped range) and never
    straddle 1/2. Atomic distributions quantize to one point interval per atom
    with zero tails.
    """

    intervals: tuple[Interval, ...]
    tail_mass_low: float
    tail_mass_high: float
    p_low: float
    p_high: float

    def __len__(self):
        return len(self.intervals)

    @property
    def masses(self) -> np.ndarray:
        return np.array([iv.mass for iv in self.intervals])

    @property
    def rep_ps(self) -> np.ndarray:
        return np.array([iv.rep_p for iv in self.intervals])

    @property
    def centers(self) -> np.ndarray:
        return np.array([iv.center for iv in self.intervals])

    @property
    def edges(self) -> np.ndarray:
        return np.array([iv.lo for iv in self.intervals] + [self.intervals[-1].hi])

    def total_mass(self) -> float:
        return math.fsum([*self.masses, self.tail_mass_low, self.tail_mass_high])

    def locate(self, p) -> np.ndarray:
        """Interval index for each ``p``; tail values map to the end intervals."""
        p = np.asarray(p, dtype=float)
        los = np.array([iv.lo for iv in self.intervals])
        his = np.array([iv.hi for iv in self.intervals])
        idx = np.searchsorted(los, p, side="right") - 1
        idx = np.clip(idx, 0, len(self.intervals) - 1)
        # point intervals of atomic spaces: snap to the nearest atom
        if np.all(los == his):
            nearest = np.abs(p[..., None] - los).argmin(axis=-1)
            return nearest
        return idx


def _split_at_half(edges: np.ndarray, half: float) -> np.ndarray:
    if edges[0] < half < edges[-1] and not np.any(edges == half):
        edges = np.sort(np.append(edges, half))
    return edges


def _drop_unresolved(dist: "ContinuousDistribution", c_edges: np.ndarray) -> np.ndarray:
    # near p = 1 distinct coordinates can round to the same double; merge those bins
    p = np.asarray(dist.from_coord(c_edges), dtype=float)
    keep = np.concatenate([[True], np.diff(p) > 0.0])
    if not keep[-1]:
        last = np.flatnonzero(keep)[-1]
        keep[last], keep[-1] = False, True
        keep[0] = True
    return c_edges[keep]


def quantize(dist: StateDistribution, n_bins: int, eps: float,
             spacing: str = "uniform") -> QuantizedStateSpace:
    """Partition the state range into ``n_bins`` intervals plus two clipped tails.

    ``p_low`` and ``p_high`` are chosen so each tail holds less than ``eps/3``
    of the mass. ``spacing="uniform"`` places equidistant edges in ``p`` on
    ``[p_low, p_high]``; ``spacing="mass"`` places them at equal-mass quantiles.
    Any interval straddling 1/2 is split there, so the result can hold one
    more interval than requested.
    """
    if n_bins < 1:
        raise DomainError("n_bins must be >= 1")
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if spacing not in ("uniform", "mass"):
        raise ValueError(f"unknown spacing {spacing!r}")

    if dist.atomic:
        merged: dict[float, float] = {}
        for p, m in dist.points:
            if m > 0.0:
                merged[p] = merged.get(p, 0.0) + m
        ivs = tuple(Interval(p, p, m, p, p) for p, m in sorted(merged.items()))
        return QuantizedStateSpace(ivs, 0.0, 0.0, ivs[0].lo, ivs[-1].hi)

    assert isinstance(dist, ContinuousDistribution)
    target = eps / 3.0 * (1.0 - 1e-6)
    c_lo = dist.quantile_coord(target)
    c_hi = dist.quantile_coord(target, upper_tail=True)
    c_half = float(dist.to_coord(0.5))

    if spacing == "uniform":
        p_lo, p_hi = float(dist.from_coord(c_lo)), float(dist.from_coord(c_hi))
        p_edges = np.linspace(p_lo, p_hi, n_bins + 1)
        c_edges = np.asarray(dist.to_coord(p_edges), dtype=float)
        c_edges[0], c_edges[-1] = c_lo, c_hi
    else:
        head = dist.cdf_coord(c_lo)
        body = 1.0 - head - dist.sf_coord(c_hi)
        inner = [dist.quantile_coord(head + body * k / n_bins) for k in range(1, n_bins)]
        c_edges = np.array([c_lo, *inner, c_hi])
    c_edges = _split_at_half(np.unique(c_edges), c_half)
    c_edges = _drop_unresolved(dist, c_edges)

    masses = dist.masses_coord(c_edges)
    partial = dist.partial_means_coord(c_edges)
    p_edges = np.asarray(dist.from_coord(c_edges), dtype=float)
    ivs = []
    for k, (lo, hi) in enumerate(zip(p_edges[:-1], p_edges[1:])):
        mass = float(masses[k])
        center = float(partial[k] / mass) if mass > 0.0 else 0.5 * (lo + hi)
        center = min(max(center, lo), hi)
        rep = hi if hi <= 0.5 else lo
        ivs.append(Interval(float(lo), float(hi), mass, float(rep), center))
    return QuantizedStateSpace(tuple(ivs), dist.cdf_coord(c_lo), dist.sf_coord(c_hi),
                               float(p_edges[0]), float(p_edges[-1]))


# ---------------------------------------------------------------------------
# functional surface and configs


def pdf(dist: StateDistribution, p: float):
    return dist.pdf(p)


def mean(dist: StateDistribution) -> float:
    return dist.mean()


def sample(dist: StateDistribution, rng_seed, n: int) -> np.ndarray:
    """``n`` i.i.d. draws of ``P``; reproducible for a given seed."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return dist.sample(n, np.random.default_rng(rng_seed))


_FIELDS = {
    "maes_hybrid": ({"kind", "lambda1", "lambda2"}, {"reflected"}),
    "discrete": ({"kind", "points"}, set()),
    "piecewise": ({"kind", "breakpoints", "densities"}, set()),
    "degenerate": ({"kind", "p"}, set()),
}


def from_config(config) -> StateDistribution:
    """Build a distribution from a JSON string, file path, or mapping."""
    if isinstance(config, Path) or (isinstance(config, str) and not config.lstrip().startswith("{")):
        try:
            config = Path(config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read distribution config {config!r}: {exc}") from exc
    if isinstance(config, str):
        try:
            config = json.loads(config)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(config, dict):
        raise ConfigError("distribution config must be a JSON object")
    kind = config.get("kind")
    if kind not in _FIELDS:
        raise ConfigError(f"field 'kind': expected one of {sorted(_FIELDS)}, got {kind!r}")
    required, optional = _FIELDS[kind]
    missing = required - config.keys()
    unknown = config.keys() - required - optional
    if missing:
        raise ConfigError(f"{kind}: missing field(s) {sorted(missing)}")
    if unknown:
        raise ConfigError(f"{kind}: unknown field(s) {sorted(unknown)}")
    try:
        if kind == "maes_hybrid":
            return MaesHybrid(float(config["lambda1"]), float(config["lambda2"]),
                              bool(config.get("reflected", False)))
        if kind == "discrete":
            return Discrete(tuple((p, m) for p, m in config["points"]))
        if kind == "piecewise":
            return PiecewiseConstant(tuple(config["breakpoints"]), tuple(config["densities"]))
        return Degenerate(float(config["p"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{kind}: {exc}") from exc


def to_config(dist: StateDistribution) -> dict:
    return dist.to_config()
