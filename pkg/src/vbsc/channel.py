"""Bit-level simulation of the varying BSC and a plug-in mutual-information oracle."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .capacity import CsiMode, effective_crossover
from .errors import DomainError, UnsupportedModeError
from .state_models import StateDistribution, quantize

MAPPER_THRESHOLD = 0.5
MI_BLOCK = 1 << 16


def block_seed(seed, index: int) -> np.random.SeedSequence:
    """Seed for block ``index`` derived from the master seed."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def _streams(seed):
    """Independent (state, noise) generators derived from one seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    state_ss, noise_ss = ss.spawn(2)
    return np.random.default_rng(state_ss), np.random.default_rng(noise_ss)


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MapperPolicy:
    threshold: float = MAPPER_THRESHOLD

    def __call__(self, u, p):
        u = np.asarray(u, dtype=np.uint8)
        return np.where(np.asarray(p) <= self.threshold, u, 1 - u).astype(np.uint8)


def shannon_mapper(u: int, p: float) -> int:
    """Channel input for auxiliary symbol ``u`` when the state is ``p``.

    Sends ``u`` while ``p <= 1/2`` and its complement otherwise, so the state
    always acts as a crossover of at most one half. Ties keep ``u``.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if u not in (0, 1):
        raise DomainError(f"u must be a bit, got {u!r}")
    return int(u) if p <= MAPPER_THRESHOLD else 1 - int(u)


def effective_bsc_crossover(dist: StateDistribution) -> float:
    """Crossover ``E[min(P, 1-P)]`` of the channel from ``u`` to ``y`` under the mapper."""
    return effective_crossover(dist)


@dataclass(frozen=True)
class ChannelTrace:
    """One block sent through the channel.

    ``inputs`` are the symbols actually put on the channel. Under
    ``ENCODER_CAUSAL`` the caller's bits are kept in ``messages`` and
    ``inputs`` holds the mapper output.
    """

    states: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    flips: np.ndarray
    csi_mode: CsiMode
    seed: Optional[int]
    messages: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.states)

    @property
    def encoder_sees_state(self) -> bool:
        return self.csi_mode in (CsiMode.ENCODER_CAUSAL, CsiMode.ENCODER_NONCAUSAL, CsiMode.BOTH)

    @property
    def decoder_sees_state(self) -> bool:
        return self.csi_mode in (CsiMode.DECODER, CsiMode.BOTH)

    def header(self) -> dict:
        return {"mode": self.csi_mode.value, "seed": self.seed, "n": len(self)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header()) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "p_i", "x_i", "y_i"])
        for i, (p, x, y) in enumerate(zip(self.states, self.inputs, self.outputs)):
            w.writerow([i, repr(float(p)), int(x), int(y)])
        return buf.getvalue()


def read_trace_csv(text: str) -> tuple[dict, np.ndarray, np.ndarray, np.ndarray]:
    """Parse :meth:`ChannelTrace.to_csv` output into (header, states, inputs, outputs)."""
    lines = text.splitlines()
    header = json.loads(lines[0].lstrip("#").strip())
    rows = list(csv.reader(lines[2:]))
    states = np.array([float(r[1]) for r in rows])
    xs = np.array([int(r[2]) for r in rows], dtype=np.uint8)
    ys = np.array([int(r[3]) for r in rows], dtype=np.uint8)
    return header, states, xs, ys


def transmit(dist: StateDistribution, inputs, mode=CsiMode.NONE, seed=0) -> ChannelTrace:
    """Send ``inputs`` through the channel, drawing one state per use.

    States and flip draws come from separate streams of ``seed``, so changing
    the inputs never changes the state sequence.
    """
    mode = CsiMode.parse(mode)
    bits = np.asarray(inputs, dtype=np.uint8).ravel()
    if bits.size < 1:
        raise DomainError("input must hold at least one bit")
    if np.any(bits > 1):
        raise DomainError("input must be bits")
    state_rng, noise_rng = _streams(seed)
    states = np.asarray(dist.sample(bits.size, state_rng), dtype=float)
    flips = (noise_rng.random(bits.size) < states).astype(np.uint8)
    messages = None
    if mode is CsiMode.ENCODER_CAUSAL:
        messages = bits
        x = MapperPolicy()(bits, states)
    else:
        x = bits
    y = x ^ flips
    return ChannelTrace(_readonly(states, float), _readonly(x, np.uint8), _readonly(y, np.uint8),
                        _readonly(flips, np.uint8), mode,
                        seed if isinstance(seed, (int, np.integer)) else None,
                        None if messages is None else _readonly(messages, np.uint8))


def _plug_in_mi(counts: np.ndarray) -> tuple[float, float]:
    """Plug-in ``I(X;Y|B)`` in bits from counts of shape (bins, 2, 2), with standard error."""
    n = counts.sum()
    n_b = counts.sum(axis=(1, 2), keepdims=True)
    n_bx = counts.sum(axis=2, keepdims=True)
    n_by = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.log2(counts * n_b / (n_bx * n_by))
    dens = np.where(counts > 0, dens, 0.0)
    w = counts / n
    mi = float((w * dens).sum())
    var = float((w * (dens - mi) ** 2).sum())
    return mi, math.sqrt(var / n)


def estimate_mutual_information(dist: StateDistribution, mode=CsiMode.NONE,
                                n_samples: int = 10 ** 6, seed=0, n_bins: int = 64,
                                eps: float = 1e-6) -> tuple[float, float]:
    """Monte-Carlo plug-in estimate of the information rate under ``mode``.

    Inputs are uniform. ``NONE`` estimates ``I(X;Y)``; ``ENCODER_CAUSAL``
    estimates ``I(U;Y)`` through the threshold mapper; ``DECODER`` and
    ``BOTH`` estimate ``I(X;Y|B)`` with ``B`` the state's bin in an
    ``n_bins`` partition. Returns ``(estimate, standard_error)`` in bits.
    """
    mode = CsiMode.parse(mode)
    if mode is CsiMode.ENCODER_NONCAUSAL:
        raise UnsupportedModeError("non-causal encoder CSI has no single-letter estimator")
    if n_samples < 10 ** 4:
        raise DomainError("n_samples must be >= 1e4")
    conditioned = mode in (CsiMode.DECODER, CsiMode.BOTH)
    space = quantize(dist, n_bins, eps) if conditioned else None
    n_cells = len(space) if conditioned else 1
    counts = np.zeros((n_cells, 2, 2), dtype=np.int64)

    done, index = 0, 0
    while done < n_samples:
        size = min(MI_BLOCK, n_samples - done)
        ss = block_seed(seed, index)
        input_ss, channel_ss = ss.spawn(2)
        bits = np.random.default_rng(input_ss).integers(0, 2, size, dtype=np.uint8)
        tr = transmit(dist, bits, mode, channel_ss)
        src = tr.messages if mode is CsiMode.ENCODER_CAUSAL else tr.inputs
        cell = space.locate(tr.states) if conditioned else np.zeros(size, dtype=np.int64)
        flat = (cell * 4 + src.astype(np.int64) * 2 + tr.outputs).astype(np.int64)
        counts += np.bincount(flat, minlength=n_cells * 4).reshape(n_cells, 2, 2)
        done += size
        index += 1
    return _plug_in_mi(counts)
