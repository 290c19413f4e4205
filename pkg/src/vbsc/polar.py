"""Polar codes for BSCs and an interval-binned rate-splitting scheme.

Codewords are ``x = u F^{(x)n}`` with ``F = [[1, 0], [1, 1]]`` and no bit
reversal, so ``x = (T(u_head) ^ T(u_tail), T(u_tail))`` recursively.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import bsc_capacity, capacity_csi_both
from .channel import block_seed, transmit
from .errors import BoundTooWideError, DomainError
from .state_models import QuantizedStateSpace, StateDistribution, quantize

LLR_MAX = 1e4
MIN_OCCUPANCY = 64
DEFAULT_RATE_MARGIN = 0.1


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PolarCodeSpec:
    block_len: int
    info_set: tuple[int, ...]
    design_p: float
    frozen_values: tuple[int, ...] = ()

    def __post_init__(self):
        n = self.block_len
        if not _is_power_of_two(n):
            raise DomainError(f"block_len must be a power of two, got {n}")
        info = tuple(sorted(int(i) for i in self.info_set))
        if len(set(info)) != len(info) or any(not 0 <= i < n for i in info):
            raise DomainError("info_set indices must be unique and below block_len")
        if not 0.0 <= self.design_p <= 0.5:
            raise DomainError("design_p must lie in [0, 0.5]")
        frozen = tuple(int(b) for b in self.frozen_values) or (0,) * (n - len(info))
        if len(frozen) != n - len(info):
            raise DomainError("frozen_values must cover every frozen position")
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "frozen_values", frozen)

    @property
    def k(self) -> int:
        return len(self.info_set)

    @property
    def rate(self) -> float:
        return self.k / self.block_len

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.ones(self.block_len, dtype=bool)
        mask[list(self.info_set)] = False
        return mask

    def u_template(self) -> np.ndarray:
        u = np.zeros(self.block_len, dtype=np.uint8)
        u[self.frozen_mask] = self.frozen_values
        return u

    def to_dict(self) -> dict:
        d = {"block_len": self.block_len, "design_p": self.design_p,
             "info_set": list(self.info_set)}
        if any(self.frozen_values):
            d["frozen_values"] = list(self.frozen_values)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PolarCodeSpec":
        return cls(int(d["block_len"]), tuple(d["info_set"]), float(d["design_p"]),
                   tuple(d.get("frozen_values", ())))


# ---------------------------------------------------------------------------
# construction


def log_bhattacharyya(block_len: int, design_p: float) -> np.ndarray:
    """Natural log of the Bhattacharyya upper bounds of the synthetic channels.

    Uses ``Z- <= 2Z - Z^2`` and ``Z+ = Z^2`` from ``Z = 2 sqrt(p(1-p))``. Index
    ``i`` is read MSB first, bit 0 meaning the degraded branch.
    """
    if not _is_power_of_two(block_len):
        raise DomainError(f"block_len must be a power of two, got {block_len}")
    if not 0.0 <= design_p <= 0.5:
        raise DomainError("design_p must lie in [0, 0.5]")
    with np.errstate(divide="ignore"):
        lz = np.array([math.log(2.0) + 0.5 * (math.log(design_p) + math.log1p(-design_p))
                       if design_p > 0.0 else -np.inf])
    while lz.size < block_len:
        z = np.exp(lz)
        minus = lz + np.log(2.0 - z)
        plus = 2.0 * lz
        lz = np.stack([minus, plus], axis=1).ravel()
    return np.minimum(lz, 0.0)


def bhattacharyya(block_len: int, design_p: float) -> np.ndarray:
    return np.exp(log_bhattacharyya(block_len, design_p))


def construct_polar(block_len: int, design_p: float, target_rate: float) -> PolarCodeSpec:
    """Pick the ``ceil(rate * N)`` synthetic channels with the smallest bounds.

    Ties go to larger indices, so a noiseless design uses the tail positions.
    """
    if not 0.0 < target_rate < 1.0:
        raise DomainError(f"target_rate must lie in (0, 1), got {target_rate!r}")
    lz = log_bhattacharyya(block_len, design_p)
    k = math.ceil(target_rate * block_len - 1e-9)
    order = np.lexsort((-np.arange(block_len), lz))
    return PolarCodeSpec(block_len, tuple(int(i) for i in order[:k]), float(design_p))


# ---------------------------------------------------------------------------
# encoding


def polar_transform(u) -> np.ndarray:
    """Apply ``F^{(x)n}`` over GF(2) along the last axis. The map is an involution."""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    if not _is_power_of_two(n):
        raise DomainError(f"length must be a power of two, got {n}")
    lead = x.shape[:-1]
    h = 1
    while h < n:
        v = x.reshape(*lead, n // (2 * h), 2, h)
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


def polar_encode(spec: PolarCodeSpec, message) -> np.ndarray:
    """Encode one message (shape ``(k,)``) or a batch (shape ``(B, k)``)."""
    msg = np.asarray(message, dtype=np.uint8)
    if msg.shape[-1] != spec.k:
        raise DomainError(f"message length {msg.shape[-1]} != |info_set| = {spec.k}")
    u = np.broadcast_to(spec.u_template(), (*msg.shape[:-1], spec.block_len)).copy()
    u[..., list(spec.info_set)] = msg
    return polar_transform(u)


# ---------------------------------------------------------------------------
# successive-cancellation decoding


def _boxplus(a, b):
    # exact check-node update, stable for large magnitudes
    return (np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
            + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b))))


def _sc(llr, frozen, fvals, lo, hi):
    n = hi - lo
    batch = llr.shape[0]
    fr = frozen[lo:hi]
    if fr.all():
        u = np.broadcast_to(fvals[lo:hi], (batch, n)).copy()
        return u, polar_transform(u)
    if n == 1:
        u = (llr < 0).astype(np.uint8)
        return u, u
    if not fr.any():
        # rate-one node: SC reduces to hard decisions
        x = (llr < 0).astype(np.uint8)
        return polar_transform(x), x
    half = n // 2
    l1, l2 = llr[:, :half], llr[:, half:]
    ua, xa = _sc(_boxplus(l1, l2), frozen, fvals, lo, lo + half)
    lb = l2 + np.where(xa == 1, -l1, l1)
    ub, xb = _sc(lb, frozen, fvals, lo + half, hi)
    return np.concatenate([ua, ub], axis=1), np.concatenate([xa ^ xb, xb], axis=1)


def channel_llrs(received, per_bit_p) -> np.ndarray:
    """LLRs ``log(P(y|0)/P(y|1))`` after folding states above 1/2.

    A bit whose state exceeds 1/2 is flipped and treated with ``1 - p``.
    """
    y = np.asarray(received, dtype=np.uint8)
    p = np.broadcast_to(np.asarray(per_bit_p, dtype=float), y.shape)
    if np.any(~(p >= 0.0)) or np.any(p >= 1.0):
        raise DomainError("per-bit probabilities must lie in [0, 1); fold p = 1 first")
    fold = p > 0.5
    y = np.where(fold, 1 - y, y)
    p = np.where(fold, 1.0 - p, p)
    with np.errstate(divide="ignore"):
        mag = np.log1p(-p) - np.log(p)
    mag = np.minimum(mag, LLR_MAX)
    return np.where(y == 0, mag, -mag)


def fold_states(received, per_bit_p):
    """Flip bits whose state exceeds 1/2 and return ``(bits, min(p, 1 - p))``."""
    y = np.asarray(received, dtype=np.uint8)
    p = np.broadcast_to(np.asarray(per_bit_p, dtype=float), y.shape)
    fold = p > 0.5
    return np.where(fold, 1 - y, y).astype(np.uint8), np.where(fold, 1.0 - p, p)


def polar_decode_batch(spec: PolarCodeSpec, received, per_bit_p) -> np.ndarray:
    y = np.atleast_2d(np.asarray(received, dtype=np.uint8))
    if y.shape[-1] != spec.block_len:
        raise DomainError(f"received length {y.shape[-1]} != block_len {spec.block_len}")
    llr = channel_llrs(y, per_bit_p)
    fvals = spec.u_template()
    u, _ = _sc(llr, spec.frozen_mask, fvals, 0, spec.block_len)
    return u[:, list(spec.info_set)]


def polar_decode(spec: PolarCodeSpec, received, per_bit_p) -> np.ndarray:
    """Successive-cancellation estimate of the message bits.

    ``per_bit_p`` is a scalar or one crossover probability per position.
    """
    y = np.asarray(received, dtype=np.uint8)
    out = polar_decode_batch(spec, y.reshape(1, -1) if y.ndim == 1 else y,
                             per_bit_p if np.ndim(per_bit_p) == 0 else np.asarray(per_bit_p).reshape(y.shape))
    return out[0] if y.ndim == 1 else out


def simulate_bsc_bler(spec: PolarCodeSpec, p: float, n_trials: int, seed=0) -> float:
    """Block error rate of ``spec`` on BSC(``p``) under SC decoding."""
    rng = np.random.default_rng(seed)
    msg = rng.integers(0, 2, (n_trials, spec.k), dtype=np.uint8)
    noise = (rng.random((n_trials, spec.block_len)) < p).astype(np.uint8)
    y = polar_encode(spec, msg) ^ noise
    dec = polar_decode_batch(spec, y, p)
    return float(np.mean(np.any(dec != msg, axis=1)))


# ---------------------------------------------------------------------------
# interval-binned scheme


@dataclass(frozen=True)
class CodeBin:
    """One rate-splitting stream: a run of quantized intervals sharing a code."""

    members: tuple[int, ...]
    lo: float
    hi: float
    mass: float
    design_p: float
    code: PolarCodeSpec | None  # None when the bin's worst state carries no capacity

    @property
    def rate(self) -> float:
        return self.code.rate if self.code is not None else 0.0


@dataclass(frozen=True)
class BinnedCodePlan:
    bins: QuantizedStateSpace
    streams: tuple[CodeBin, ...]
    allocation: tuple[float, ...]  # expected symbols per stream in one block
    block_budget: int
    rate_margin: float
    merges: tuple[tuple[int, int], ...] = ()
    capacity_upper: float = 1.0
    _route: tuple[int, ...] = field(default=(), repr=False)

    @property
    def codes(self) -> tuple[PolarCodeSpec | None, ...]:
        return tuple(s.code for s in self.streams)

    @property
    def planned_rate(self) -> float:
        return math.fsum(s.mass * s.rate for s in self.streams)

    def route(self, states) -> np.ndarray:
        """Stream index for each state."""
        return np.asarray(self._route)[self.bins.locate(states)]


def _fold(p: float) -> float:
    return min(p, 1.0 - p)


def _worse(a: float, b: float) -> float:
    return a if _fold(a) >= _fold(b) else b


def plan_binned_codes(dist: StateDistribution, block_budget: int, n_bins: int,
                      eps: float = 1e-3, rate_margin: float = DEFAULT_RATE_MARGIN,
                      spacing: str = "mass") -> BinnedCodePlan:
    """One polar code per state interval, each designed for the interval's worst state.

    Tail mass joins the end intervals. Intervals expected to receive fewer
    than 64 symbols per block merge into their neighbour on the side of worse
    crossover; merges are listed on the plan.
    """
    if block_budget < n_bins * MIN_OCCUPANCY:
        raise DomainError(f"block_budget must be >= n_bins * {MIN_OCCUPANCY}")
    if not 0.0 <= rate_margin < 1.0:
        raise DomainError("rate_margin must lie in [0, 1)")
    space = quantize(dist, n_bins, eps, spacing=spacing)
    ivs = list(space.intervals)
    masses = [iv.mass for iv in ivs]
    masses[0] += space.tail_mass_low
    masses[-1] += space.tail_mass_high

    groups = [[k] for k in range(len(ivs))]
    gmass = list(masses)
    grep = [iv.rep_p for iv in ivs]
    merges = []
    while len(groups) > 1:
        small = [g for g in range(len(groups)) if gmass[g] * block_budget < MIN_OCCUPANCY]
        if not small:
            break
        g = min(small, key=lambda j: gmass[j])
        rep = grep[g]
        # neighbour toward 1/2 (worse crossover); fall back to the only neighbour
        if g == 0:
            t = 1
        elif g == len(groups) - 1:
            t = g - 1
        else:
            t = g + 1 if rep < 0.5 else g - 1
        merges.append((groups[g][0], groups[t][0]))
        groups[t] = sorted(groups[t] + groups[g])
        gmass[t] += gmass[g]
        grep[t] = _worse(grep[t], grep[g])
        del groups[g], gmass[g], grep[g]

    streams, route = [], [0] * len(ivs)
    for s, (members, mass, rep) in enumerate(zip(groups, gmass, grep)):
        for k in members:
            route[k] = s
        design_p = _fold(rep)
        n_code = 1 << int(math.floor(math.log2(max(mass * block_budget, 1.0))))
        rate = bsc_capacity(design_p) * (1.0 - rate_margin)
        code = construct_polar(n_code, design_p, rate) if rate > 0.0 else None
        if code is not None and code.k == n_code:
            code = construct_polar(n_code, design_p, (n_code - 1) / n_code)
        streams.append(CodeBin(tuple(members), ivs[members[0]].lo, ivs[members[-1]].hi,
                               mass, design_p, code))

    try:
        upper = capacity_csi_both(dist, eps).upper_bound
    except BoundTooWideError as exc:
        upper = exc.upper
    return BinnedCodePlan(space, tuple(streams), tuple(s.mass * block_budget for s in streams),
                          block_budget, rate_margin, tuple(merges), upper, tuple(route))


@dataclass(frozen=True)
class TransmissionReport:
    aggregate_rate: float
    block_error_rate: float
    n_subblocks: int
    n_errors: int
    deferred: int  # (block, stream) pairs whose partial sub-block waited for later blocks
    unused_symbols: int

    def __iter__(self):
        # unpacks as (aggregate_rate, block_error_rate)
        return iter((self.aggregate_rate, self.block_error_rate))


def run_binned_transmission(plan: BinnedCodePlan, dist: StateDistribution, n_blocks: int,
                            seed=0) -> TransmissionReport:
    """Send ``n_blocks`` blocks with state knowledge at both ends.

    Each channel use is routed to the stream of its state's interval. Streams
    fill sub-blocks of their code length in order; a stream's leftover uses
    carry into the next block. Decoding uses per-position states.
    """
    n_streams = len(plan.streams)
    pend_p = [np.empty(0) for _ in range(n_streams)]
    pend_f = [np.empty(0, dtype=np.uint8) for _ in range(n_streams)]
    msg_rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2 ** 31,)))
    n_sub = n_err = deferred = bits = 0
    for b in range(n_blocks):
        tr = transmit(dist, np.zeros(plan.block_budget, dtype=np.uint8), "both", block_seed(seed, b))
        stream = plan.route(tr.states)
        for s, cb in enumerate(plan.streams):
            sel = stream == s
            pend_p[s] = np.concatenate([pend_p[s], tr.states[sel]])
            pend_f[s] = np.concatenate([pend_f[s], tr.flips[sel]])
            if cb.code is None:
                pend_p[s], pend_f[s] = pend_p[s][:0], pend_f[s][:0]
                continue
            n_code = cb.code.block_len
            m = len(pend_p[s]) // n_code
            if m:
                take = m * n_code
                p = pend_p[s][:take].reshape(m, n_code)
                flips = pend_f[s][:take].reshape(m, n_code)
                pend_p[s], pend_f[s] = pend_p[s][take:], pend_f[s][take:]
                msg = msg_rng.integers(0, 2, (m, cb.code.k), dtype=np.uint8)
                y = polar_encode(cb.code, msg) ^ flips
                y, p = fold_states(y, p)
                dec = polar_decode_batch(cb.code, y, p)
                n_err += int(np.any(dec != msg, axis=1).sum())
                n_sub += m
                bits += m * cb.code.k
            if len(pend_p[s]):
                deferred += 1
    unused = int(sum(len(x) for x in pend_p))
    total = n_blocks * plan.block_budget
    return TransmissionReport(bits / total, n_err / n_sub if n_sub else 0.0, n_sub, n_err,
                              deferred, unused)
