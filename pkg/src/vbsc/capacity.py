"""Capacities of the varying BSC under each channel-state-information regime.

Every continuous-distribution result carries two independent evaluations:
the value comes from adaptive quadrature, and the bracket comes from Riemann
lower/upper sums over an equidistant grid in the distribution's integration
coordinate. The value must fall inside the bracket.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import BoundTooWideError, DistributionKindError, DomainError
from .state_models import (
    QUAD_EPSABS,
    ContinuousDistribution,
    PiecewiseConstant,
    StateDistribution,
)

_LN2 = math.log(2.0)

# absolute error allowance carried by quadrature-based values
QUAD_TOL = 1e-9

DEFAULT_EPS = 1e-3
MAX_RIEMANN_BINS = 2 ** 17


class CsiMode(enum.Enum):
    NONE = "none"
    ENCODER_CAUSAL = "enc-causal"
    ENCODER_NONCAUSAL = "enc-noncausal"
    DECODER = "dec"
    BOTH = "both"

    @classmethod
    def parse(cls, value) -> "CsiMode":
        if isinstance(value, cls):
            return value
        aliases = {"encoder": "enc-causal", "encoder-causal": "enc-causal",
                   "decoder": "dec", "encoder-noncausal": "enc-noncausal"}
        key = str(value).lower().replace("_", "-")
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            return cls[str(value).upper()]


@dataclass(frozen=True)
class CapacityResult:
    value: float
    lower_bound: float
    upper_bound: float
    regime: CsiMode
    method: str  # closed_form | riemann | quadrature

    def __post_init__(self):
        lo, v, hi = self.lower_bound, self.value, self.upper_bound
        if not (0.0 <= lo <= v <= hi <= 1.0):
            raise ValueError(f"inconsistent capacity bracket {lo!r} <= {v!r} <= {hi!r}")

    @property
    def width(self) -> float:
        return self.upper_bound - self.lower_bound

    def to_dict(self) -> dict:
        return {"regime": self.regime.value, "value": self.value, "lower": self.lower_bound,
                "upper": self.upper_bound, "method": self.method}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def binary_entropy(p):
    """``H2(p)`` in bits, with ``0 log 0 = 0``. Accepts scalars or arrays."""
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr >= 0.0)) or np.any(arr > 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    h = -(special.xlogy(arr, arr) + special.xlog1py(1.0 - arr, -arr)) / _LN2
    h = np.clip(h, 0.0, 1.0)
    return float(h) if h.ndim == 0 else h


def bsc_capacity(p):
    """Capacity ``1 - H2(p)`` of a BSC with crossover ``p``."""
    c = 1.0 - np.asarray(binary_entropy(p))
    return float(c) if c.ndim == 0 else c


def _capacity_interval(lo: float, hi: float) -> tuple[float, float]:
    """Min and max of ``bsc_capacity`` over ``[lo, hi]``."""
    lo, hi = max(lo, 0.0), min(hi, 1.0)
    ends = (bsc_capacity(lo), bsc_capacity(hi))
    low = 0.0 if lo <= 0.5 <= hi else min(ends)
    return low, max(ends)


def _result_from_scalar(q: float, regime: CsiMode, exact: bool) -> CapacityResult:
    value = bsc_capacity(q)
    if exact:
        return CapacityResult(value, value, value, regime, "closed_form")
    low, high = _capacity_interval(q - QUAD_TOL, q + QUAD_TOL)
    return CapacityResult(value, min(low, value), max(high, value), regime, "quadrature")


def capacity_no_csi(dist: StateDistribution) -> CapacityResult:
    """No state knowledge: a BSC with the mean crossover probability."""
    return _result_from_scalar(dist.mean(), CsiMode.NONE, dist.atomic)


def effective_crossover(dist: StateDistribution) -> float:
    """``E[min(P, 1 - P)]``, the crossover of the state-mapped channel."""
    return float(dist.expect(lambda p: np.minimum(p, 1.0 - p)))


def capacity_csi_encoder_causal(dist: StateDistribution) -> CapacityResult:
    """Causal state knowledge at the encoder, used through the threshold mapper.

    The mapped channel is a BSC with crossover ``E[min(P, 1 - P)]``.
    """
    return _result_from_scalar(effective_crossover(dist), CsiMode.ENCODER_CAUSAL, dist.atomic)


# ---------------------------------------------------------------------------
# Riemann brackets


@dataclass(frozen=True)
class RiemannBracket:
    lower: float
    upper: float
    error_cap: float
    riemann_width: float  # width on the clipped range only, tails excluded
    tail_allowance: float
    lipschitz: float
    n_bins: int
    c_low: float
    c_high: float

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _integrand(dist: ContinuousDistribution, c):
    """``C_BSC(p(c)) * density(c)`` and its derivative in ``c``."""
    p = np.asarray(dist.from_coord(c), dtype=float)
    cap = 1.0 - np.clip(binary_entropy(p), 0.0, 1.0)
    dens = np.asarray(dist.coord_density(c), dtype=float)
    # d/dp C_BSC = log2(p / (1 - p))
    with np.errstate(invalid="ignore"):
        dcap = np.nan_to_num(dist.log_odds(c) / _LN2 * dist.dp_dc(c), nan=0.0)
    return cap * dens, dcap * dens + cap * dist.coord_density_derivative(c)


def _bin_extrema_sampled(dist, edges, per_bin=8):
    """Per-bin min/max of the integrand from a sampled grid, padded by slope."""
    n = len(edges) - 1
    t = np.linspace(0.0, 1.0, per_bin + 1)
    grid = edges[:-1, None] + np.diff(edges)[:, None] * t[None, :]
    val, der = _integrand(dist, grid)
    slope = 1.1 * np.abs(der).max(axis=1)
    pad = 0.5 * slope * np.diff(edges) / per_bin
    lo = np.maximum(val.min(axis=1) - pad, 0.0)
    hi = val.max(axis=1) + pad
    assert lo.shape == (n,)
    return lo, hi


def _bin_extrema_piecewise(dist: PiecewiseConstant, edges):
    """Exact per-bin extrema: density is flat on pieces, C_BSC monotone on halves."""
    lo_e, hi_e = edges[:-1], edges[1:]
    b = np.asarray(dist.breakpoints)
    d = np.asarray(dist.densities)
    vmin = np.full(len(lo_e), np.inf)
    vmax = np.full(len(lo_e), -np.inf)
    covered = np.zeros(len(lo_e))
    for k in range(len(d)):
        a = np.maximum(lo_e, b[k])
        z = np.minimum(hi_e, b[k + 1])
        hit = z > a
        if not hit.any():
            continue
        covered += np.where(hit, z - a, 0.0)
        va = d[k] * bsc_capacity(np.where(hit, a, 0.0))
        vz = d[k] * bsc_capacity(np.where(hit, z, 0.0))
        vmin = np.where(hit, np.minimum(vmin, np.minimum(va, vz)), vmin)
        vmax = np.where(hit, np.maximum(vmax, np.maximum(va, vz)), vmax)
    gap = covered < (hi_e - lo_e) * (1.0 - 1e-12)
    vmin = np.where(gap, np.minimum(vmin, 0.0), vmin)
    vmax = np.where(gap, np.maximum(vmax, 0.0), vmax)
    return vmin, vmax


def _is_smooth_on(dist: ContinuousDistribution, c_lo: float, c_hi: float) -> bool:
    if isinstance(dist, PiecewiseConstant):
        b = np.asarray(dist.breakpoints[1:-1])
        d = np.asarray(dist.densities)
        jumps = b[(b > c_lo) & (b < c_hi)]
        for x in jumps:
            k = int(np.searchsorted(dist.breakpoints, x))
            if d[k - 1] != d[k]:
                return False
    return True


def _riemann(dist: ContinuousDistribution, n_bins: int, eps: float,
             require_smooth: bool) -> RiemannBracket:
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if n_bins < 1:
        raise DomainError("n_bins must be >= 1")
    target = eps / 3.0 * (1.0 - 1e-6)
    c_lo = dist.quantile_coord(target)
    c_hi = dist.quantile_coord(target, upper_tail=True)
    if require_smooth and not _is_smooth_on(dist, c_lo, c_hi):
        raise DistributionKindError("density has a jump inside the clipped range; "
                                    "the derivative bound does not apply")
    edges = np.linspace(c_lo, c_hi, n_bins + 1)
    c_half = float(dist.to_coord(0.5))
    if c_lo < c_half < c_hi and not np.any(edges == c_half):
        edges = np.sort(np.append(edges, c_half))

    if isinstance(dist, PiecewiseConstant):
        vmin, vmax = _bin_extrema_piecewise(dist, edges)
    else:
        vmin, vmax = _bin_extrema_sampled(dist, edges)
    widths = np.diff(edges)
    # index-ordered summation keeps the result deterministic
    s_low = math.fsum(widths * vmin)
    s_high = math.fsum(widths * vmax)

    # tails: C_BSC lies in [min over tail range, 1]
    m_lo, m_hi = dist.cdf_coord(c_lo), dist.sf_coord(c_hi)
    p_lo, p_hi = float(dist.from_coord(c_lo)), float(dist.from_coord(c_hi))
    cap_lo_min = _capacity_interval(0.0, p_lo)[0]
    cap_hi_min = _capacity_interval(p_hi, 1.0)[0]
    tail_low = m_lo * cap_lo_min + m_hi * cap_hi_min
    tail_high = m_lo + m_hi

    dense = np.linspace(c_lo, c_hi, 20001)
    _, der = _integrand(dist, dense)
    _, der_bins = _integrand(dist, edges)
    lipschitz = 1.1 * max(float(np.abs(der).max()), float(np.abs(der_bins).max()))
    span = c_hi - c_lo
    tail_allowance = tail_high - tail_low
    error_cap = lipschitz * span * span / n_bins + tail_allowance

    lower = min(max(s_low + tail_low, 0.0), 1.0)
    upper = min(s_high + tail_high, 1.0)
    return RiemannBracket(lower, upper, error_cap, s_high - s_low, tail_allowance,
                          lipschitz, len(edges) - 1, c_lo, c_hi)


def riemann_bracket(dist: ContinuousDistribution, n_bins: int, eps: float) -> RiemannBracket:
    """Full Riemann bracket record for ``E[C_BSC(P)]``."""
    if dist.atomic:
        raise DistributionKindError("Riemann bounds need a continuous distribution")
    return _riemann(dist, n_bins, eps, require_smooth=True)


def capacity_riemann_bounds(dist: StateDistribution, n_bins: int, eps: float):
    """Certified ``(lower, upper, error_cap)`` for ``E[C_BSC(P)]``.

    The clipped range ``[p*, p**]`` leaves less than ``eps/3`` mass in each tail.
    ``error_cap`` is ``A * L**2 / n_bins`` plus the tail allowance, with ``A``
    the sampled maximum slope of the integrand (times 1.1) and ``L`` the
    clipped span, both in the integration coordinate.
    """
    br = riemann_bracket(dist, n_bins, eps)
    return br.lower, br.upper, br.error_cap


def _expected_capacity(dist: StateDistribution) -> float:
    return float(dist.expect(bsc_capacity))


def _capacity_with_state_at_decoder(dist: StateDistribution, eps: float,
                                    regime: CsiMode) -> CapacityResult:
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    if dist.atomic:
        value = math.fsum(m * bsc_capacity(p) for p, m in dist.points)
        return CapacityResult(value, value, value, regime, "closed_form")
    value = _expected_capacity(dist)
    tail_eps = min(eps, 0.5)
    n = 64
    best = None
    while n <= MAX_RIEMANN_BINS:
        br = _riemann(dist, n, tail_eps, require_smooth=False)
        best = br
        if br.width <= eps:
            break
        n *= 2
    if best.width > eps:
        raise BoundTooWideError(
            f"Riemann bracket width {best.width:.3g} exceeds eps={eps:g} at {best.n_bins} bins",
            best.lower, best.upper, best.n_bins)
    lower = min(best.lower, value)
    upper = max(best.upper, value)
    if best.lower > value + QUAD_EPSABS or best.upper < value - QUAD_EPSABS:
        raise AssertionError("quadrature value falls outside the Riemann bracket")
    return CapacityResult(value, lower, upper, regime, "riemann")


def capacity_csi_both(dist: StateDistribution, eps: float = DEFAULT_EPS) -> CapacityResult:
    """State known at encoder and decoder: ``E[C_BSC(P)]``."""
    return _capacity_with_state_at_decoder(dist, eps, CsiMode.BOTH)


def capacity_csi_decoder(dist: StateDistribution, eps: float = DEFAULT_EPS) -> CapacityResult:
    """State known at the decoder only. Same value as :func:`capacity_csi_both`."""
    return _capacity_with_state_at_decoder(dist, eps, CsiMode.DECODER)


def encoder_csi_gain(dist: StateDistribution) -> float:
    """Capacity gained by causal encoder state knowledge over no knowledge."""
    return capacity_csi_encoder_causal(dist).value - capacity_no_csi(dist).value


def capacity_noncausal_bounds(dist: StateDistribution, eps: float = DEFAULT_EPS):
    """Bounds ``(lower, upper)`` on the non-causal encoder-CSI capacity."""
    lower = capacity_csi_encoder_causal(dist).value
    upper = capacity_csi_both(dist, eps).value
    return lower, upper


def capacity(dist: StateDistribution, regime, eps: float = DEFAULT_EPS):
    """Dispatch on ``regime``; ``enc-noncausal`` returns a bounds-only result."""
    mode = CsiMode.parse(regime)
    if mode is CsiMode.NONE:
        return capacity_no_csi(dist)
    if mode is CsiMode.ENCODER_CAUSAL:
        return capacity_csi_encoder_causal(dist)
    if mode is CsiMode.DECODER:
        return capacity_csi_decoder(dist, eps)
    if mode is CsiMode.BOTH:
        return capacity_csi_both(dist, eps)
    enc = capacity_csi_encoder_causal(dist)
    both = capacity_csi_both(dist, eps)
    # value is the lower end; the true capacity is only bracketed
    return CapacityResult(enc.value, enc.lower_bound, max(both.upper_bound, enc.value),
                          mode, "closed_form" if dist.atomic else "quadrature")


def capacity_table(dist: StateDistribution, eps: float = DEFAULT_EPS) -> dict[str, CapacityResult]:
    """The four regimes in table order: none, encoder, decoder, both."""
    return {
        "none": capacity_no_csi(dist),
        "enc-causal": capacity_csi_encoder_causal(dist),
        "dec": capacity_csi_decoder(dist, eps),
        "both": capacity_csi_both(dist, eps),
    }
