"""Code-offset key generation from a simulated SRAM PUF.

Enrollment encodes a random message (key bits plus a CRC-32) with a polar
code and publishes ``offset = response ^ codeword``. Reproduction decodes
``fresh_read ^ offset``, optionally using published per-cell reliability tags
as decoder-side state information, and rejects results whose CRC fails.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import zlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special

from .capacity import bsc_capacity, capacity_csi_decoder, capacity_no_csi
from .errors import DomainError, ReproductionError
from .polar import PolarCodeSpec, construct_polar, polar_decode, polar_encode
from .state_models import MaesHybrid, QuantizedStateSpace, StateDistribution, quantize

MAGIC = b"VBSCHD1"
CRC_BITS = 32
TAG_BINS = 16
TAG_EPS = 1e-3


@dataclass(frozen=True, eq=False)
class PufDevice:
    dist: StateDistribution
    cell_states: np.ndarray  # one-probabilities
    enrolled_response: np.ndarray
    cell_error_p: np.ndarray

    def __len__(self):
        return len(self.enrolled_response)

    def read(self, seed) -> np.ndarray:
        """A fresh power-up read; bit ``i`` differs from enrollment w.p. ``cell_error_p[i]``."""
        rng = np.random.default_rng(seed)
        flips = rng.random(len(self)) < self.cell_error_p
        return self.enrolled_response ^ flips.astype(np.uint8)


def make_device(dist: StateDistribution, n_cells: int, seed=0) -> PufDevice:
    """Sample cell one-probabilities and enroll with a single read.

    For :class:`MaesHybrid` the one-probabilities come from the hybrid model, so
    the resulting error probabilities follow ``dist``. Any other distribution is
    taken as the one-probability law directly.
    """
    if n_cells < 1:
        raise DomainError("n_cells must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(dist, MaesHybrid):
        w = (rng.standard_normal(n_cells) - dist.lambda2) / dist.lambda1
        x, x_c = special.ndtr(w), special.ndtr(-w)
    else:
        x = np.asarray(dist.sample(n_cells, rng), dtype=float)
        x_c = 1.0 - x
    enrolled = (rng.random(n_cells) < x).astype(np.uint8)
    err = np.where(enrolled == 1, x_c, x)
    if isinstance(dist, MaesHybrid) and dist.reflected:
        err = 1.0 - err
    return PufDevice(dist, x, enrolled, err)


def required_cells(key_bits: int, capacity: float, rate_fraction: float = 0.5) -> int:
    """Smallest power-of-two length whose rate is ``rate_fraction`` of ``capacity``."""
    if not 0.0 < rate_fraction <= 1.0 or capacity <= 0.0:
        raise DomainError("need capacity > 0 and rate_fraction in (0, 1]")
    need = (key_bits + CRC_BITS) / (rate_fraction * capacity)
    return 1 << max(0, math.ceil(math.log2(need)))


def _bits_to_bytes(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def _crc_bits(payload_bits) -> np.ndarray:
    crc = zlib.crc32(_bits_to_bytes(payload_bits)) & 0xFFFFFFFF
    return np.array([(crc >> (31 - i)) & 1 for i in range(CRC_BITS)], dtype=np.uint8)


def _derive_key(message_bits) -> bytes:
    return hashlib.sha256(_bits_to_bytes(message_bits)).digest()


@lru_cache(maxsize=32)
def tag_space(dist: StateDistribution) -> QuantizedStateSpace:
    """Equal-mass partition with at most 16 intervals (4-bit tags)."""
    n = TAG_BINS
    while True:
        space = quantize(dist, n, TAG_EPS, spacing="mass" if not dist.atomic else "uniform")
        if len(space) <= TAG_BINS:
            return space
        n -= 1


@dataclass(frozen=True, eq=False)
class HelperData:
    offset: np.ndarray
    code_spec: PolarCodeSpec
    reliability_tags: Optional[np.ndarray] = None
    tag_centers: Optional[tuple[float, ...]] = None  # decoding crossover per tag
    default_p: float = 0.5  # scalar crossover used without tags
    key_bits: int = 0

    def __post_init__(self):
        if len(self.offset) < self.code_spec.block_len:
            raise DomainError("offset shorter than the code")
        if (self.reliability_tags is None) != (self.tag_centers is None):
            raise DomainError("tags and tag centers must be given together")
        if self.reliability_tags is not None and len(self.reliability_tags) != len(self.offset):
            raise DomainError("one reliability tag per cell")

    @property
    def has_tags(self) -> bool:
        return self.reliability_tags is not None

    def _trailer(self) -> dict:
        d = {"code": self.code_spec.to_dict(), "default_p": self.default_p,
             "key_bits": self.key_bits}
        if self.tag_centers is not None:
            d["tag_centers"] = list(self.tag_centers)
        return d

    def to_bytes(self) -> bytes:
        """Binary layout: magic, u32 cells, u8 flags, packed offset, tag nibbles, u32 + JSON."""
        n = len(self.offset)
        out = [MAGIC, struct.pack("<IB", n, 1 if self.has_tags else 0), _bits_to_bytes(self.offset)]
        if self.has_tags:
            tags = np.asarray(self.reliability_tags, dtype=np.uint8)
            if len(tags) % 2:
                tags = np.append(tags, 0)
            out.append((tags[0::2] | (tags[1::2] << 4)).astype(np.uint8).tobytes())
        trailer = json.dumps(self._trailer(), sort_keys=True).encode()
        out += [struct.pack("<I", len(trailer)), trailer]
        return b"".join(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "HelperData":
        if not blob.startswith(MAGIC):
            raise ValueError("not a helper-data blob (bad magic)")
        pos = len(MAGIC)
        n, flags = struct.unpack_from("<IB", blob, pos)
        pos += 5
        nbytes = (n + 7) // 8
        offset = np.unpackbits(np.frombuffer(blob, np.uint8, nbytes, pos), bitorder="little")[:n]
        pos += nbytes
        tags = None
        if flags & 1:
            tbytes = (n + 1) // 2
            packed = np.frombuffer(blob, np.uint8, tbytes, pos)
            tags = np.empty(2 * tbytes, dtype=np.uint8)
            tags[0::2], tags[1::2] = packed & 0x0F, packed >> 4
            tags = tags[:n]
            pos += tbytes
        (tlen,) = struct.unpack_from("<I", blob, pos)
        trailer = json.loads(blob[pos + 4:pos + 4 + tlen])
        centers = tuple(trailer["tag_centers"]) if "tag_centers" in trailer else None
        return cls(offset.astype(np.uint8), PolarCodeSpec.from_dict(trailer["code"]), tags,
                   centers, trailer["default_p"], trailer["key_bits"])

    def to_json(self) -> str:
        d = {"version": 1, "cells": len(self.offset),
             "offset": _bits_to_bytes(self.offset).hex(), **self._trailer()}
        if self.has_tags:
            d["reliability_tags"] = [int(t) for t in self.reliability_tags]
        return json.dumps(d)


def enroll(device: PufDevice, key_bits: int, seed=0, *, with_tags: bool = True,
           design_p: Optional[float] = None) -> tuple[bytes, HelperData]:
    """Draw a key, encode it, and publish the offset (plus tags if requested).

    The code spans every cell, so the device size must be a power of two. It is
    designed for the BSC whose capacity matches the enrollment profile
    (decoder-side state information with tags, none without) unless
    ``design_p`` is given.
    """
    n = len(device)
    if n & (n - 1):
        raise DomainError(f"device size must be a power of two, got {n}")
    k = key_bits + CRC_BITS
    dist = device.dist
    cap = _profile_capacity(dist, with_tags)
    if key_bits < 1 or k >= n or k > n * cap:
        raise DomainError(f"{n} cells cannot carry {key_bits} key bits "
                          f"(rate {k / n:.3f} vs capacity {cap:.4f})")
    if design_p is None:
        design_p = _equivalent_bsc(cap)
    spec = construct_polar(n, design_p, k / n)

    rng = np.random.default_rng(seed)
    payload = rng.integers(0, 2, key_bits, dtype=np.uint8)
    message = np.concatenate([payload, _crc_bits(payload)])
    offset = device.enrolled_response ^ polar_encode(spec, message)

    tags = centers = None
    if with_tags:
        space = tag_space(dist)
        tags = space.locate(device.cell_error_p).astype(np.uint8)
        centers = tuple(float(c) for c in space.centers)
    helper = HelperData(offset.astype(np.uint8), spec, tags, centers, float(dist.mean()), key_bits)
    return _derive_key(message), helper


@lru_cache(maxsize=64)
def _profile_capacity(dist: StateDistribution, with_tags: bool) -> float:
    return (capacity_csi_decoder(dist) if with_tags else capacity_no_csi(dist)).value


@lru_cache(maxsize=64)
def _equivalent_bsc(capacity: float) -> float:
    """Crossover in [0, 1/2] of the BSC with the given capacity."""
    from scipy.optimize import brentq

    if capacity >= 1.0:
        return 0.0
    return brentq(lambda p: bsc_capacity(p) - capacity, 0.0, 0.5, xtol=1e-15)


def reproduce(device: PufDevice, helper: HelperData, seed=0, *,
              use_tags: bool = True) -> bytes:
    """Recover the key from a fresh read; raises :class:`ReproductionError` on CRC failure."""
    if len(helper.offset) != len(device):
        raise DomainError("helper data does not match the device size")
    y = device.read(seed) ^ helper.offset
    if use_tags and helper.has_tags:
        p = np.asarray(helper.tag_centers)[helper.reliability_tags]
    else:
        p = helper.default_p
    # fold p = 1 exactly (a certain flip) before computing LLRs
    p = np.asarray(p, dtype=float)
    certain = p >= 1.0
    if np.any(certain):
        y = np.where(certain, 1 - y, y)
        p = np.where(certain, 0.0, p)
    message = polar_decode(helper.code_spec, y, p)
    payload, crc = message[:helper.key_bits], message[helper.key_bits:]
    if not np.array_equal(_crc_bits(payload), crc):
        raise ReproductionError("decoded message failed its integrity check")
    return _derive_key(message)


def try_reproduce(device: PufDevice, helper: HelperData, seed=0, *,
                  use_tags: bool = True) -> Optional[bytes]:
    try:
        return reproduce(device, helper, seed, use_tags=use_tags)
    except ReproductionError:
        return None
