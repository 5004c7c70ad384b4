"""Bit-level submodels: seven finite-order context models and a match model.

Bytes are coded most-significant bit first.  The partial byte is tracked as a
``bit_prefix`` with a leading sentinel 1, so it is 1 at a byte boundary and
lies in [2^j, 2^(j+1)) after j bits.

Context models keep a pair of bit counts per slot and predict
p(1) = (c1 + d) / (c0 + c1 + 2d).  d = 1/2 is the Krichevsky-Trofimov
estimator; the default d = 1/16 commits faster in deterministic contexts.
By default an observed bit also discounts the opposing count (halved,
rounding up, once it exceeds 2), which keeps the estimate nonstationary.
Both counts are halved once their sum reaches 255.  Orders 0-2 are addressed directly, orders 3-6 through a
multiplicative hash into 2^22-slot tables.  Every byte context owns a block
of 256 consecutive slots, one per ``bit_prefix`` (see :func:`prefix_slot`).

The match model finds the longest earlier occurrence (length >= 7) of the
current suffix and predicts the byte that followed it, giving the predicted
bit probability 1 - 1/L.

The jitted helpers here are shared with the compression kernel, so the
Python classes and the fused loop address exactly the same slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import Distribution

N_ORDERS = 7
N_MODELS = N_ORDERS + 1  # plus the match model

HASH_BITS = 22
_BLOCK_BITS = np.uint64(64 - (HASH_BITS - 8))
_PHI = np.uint64(0x9E3779B97F4A7C15)

# slot offsets of each order inside one flat count table
ORDER_OFFSETS = np.zeros(N_ORDERS + 1, dtype=np.int64)
_sizes = [1 << 8, 1 << 16, 1 << 24] + [1 << HASH_BITS] * 4
ORDER_OFFSETS[1:] = np.cumsum(_sizes)
TOTAL_SLOTS = int(ORDER_OFFSETS[-1])
del _sizes

HALVE_AT = 255
KT_PRIOR = 0.5
DEFAULT_PRIOR = 1.0 / 16

MIN_MATCH = 7
MATCH_CAP = (1 << 16) - 1
MATCH_BITS = 22
MATCH_CHAIN_DEPTH = 32



def estimator_tables(prior: float) -> tuple[np.ndarray, np.ndarray]:
    """ln(c + prior) for every count and ln(t + 2 prior) for every count total."""
    if not prior > 0:
        raise ValueError("estimator prior must be positive")
    return (np.log(np.arange(256, dtype=np.float64) + prior),
            np.log(np.arange(512, dtype=np.float64) + 2.0 * prior))


# -- jitted primitives -------------------------------------------------------

@njit(cache=True)
def context_base(order, hist, n, offsets):
    """First slot of the 256-slot block for the last ``order`` bytes of hist[:n]."""
    if order == 0:
        return offsets[0]
    if order == 1:
        b1 = np.int64(hist[n - 1]) if n >= 1 else 0
        return offsets[1] + (b1 << 8)
    if order == 2:
        b1 = np.int64(hist[n - 1]) if n >= 1 else 0
        b2 = np.int64(hist[n - 2]) if n >= 2 else 0
        return offsets[2] + (((b2 << 8) | b1) << 8)
    h = np.uint64(order + 1) * _PHI
    k = order if order < n else n
    for j in range(1, k + 1):
        h = (h + np.uint64(hist[n - j]) + np.uint64(1)) * _PHI
    block = np.int64(h >> _BLOCK_BITS)
    return offsets[order] + (block << 8)


@njit(cache=True)
def prefix_slot(bit_prefix, bitpos):
    """Position of a partial byte inside its 256-slot block.

    The first nibble's 15 prefixes share the block head; each value of the
    first nibble then owns 15 consecutive slots for the second nibble, so one
    byte touches two cache-line-sized groups per order instead of eight.
    """
    if bitpos < 4:
        return bit_prefix
    shift = bitpos - 4
    hi = (bit_prefix >> shift) & 15
    lo = (bit_prefix & ((1 << shift) - 1)) | (1 << shift)
    return 16 + hi * 15 + lo - 1


@njit(cache=True)
def count_update(counts, slot, bit, discount):
    counts[slot, bit] += 1
    if discount and counts[slot, 1 - bit] > 2:
        counts[slot, 1 - bit] = (counts[slot, 1 - bit] + 1) >> 1
    if np.int64(counts[slot, 0]) + np.int64(counts[slot, 1]) >= HALVE_AT:
        counts[slot, 0] >>= 1
        counts[slot, 1] >>= 1


@njit(cache=True)
def match_hash(hist, n):
    h = np.uint64(0)
    for j in range(1, MIN_MATCH + 1):
        h = (h + np.uint64(hist[n - j]) + np.uint64(1)) * _PHI
    return np.int64(h >> np.uint64(64 - MATCH_BITS))


@njit(cache=True)
def match_advance(hist, n, head, chain, mst, depth):
    """Update the match state after hist[n - 1] was appended.

    ``mst`` holds (ptr, L): ptr indexes the predicted byte, L = 0 means no
    match.  A live match is extended while its prediction comes true; an
    extension of the longest match stays the longest.  Otherwise earlier
    occurrences of the last 7 bytes are scanned newest first (up to
    ``depth`` of them) and the longest backward extension wins, the most
    recent one on ties.
    """
    ptr = mst[0]
    length = mst[1]
    if length > 0:
        if hist[ptr] == hist[n - 1]:
            ptr += 1
            if length < MATCH_CAP:
                length += 1
        else:
            length = 0
            ptr = 0
    if n >= MIN_MATCH:
        h = match_hash(hist, n)
        if length == 0:
            cand = np.int64(head[h])
            best = 0
            best_ptr = 0
            d = 0
            while cand > 0 and d < depth:
                lim = cand if cand < MATCH_CAP else MATCH_CAP
                ln = 0
                while ln < lim and hist[cand - 1 - ln] == hist[n - 1 - ln]:
                    ln += 1
                if ln > best:
                    best = ln
                    best_ptr = cand
                cand = np.int64(chain[cand])
                d += 1
            if best >= MIN_MATCH:
                length = best
                ptr = best_ptr
        chain[n] = head[h]
        head[h] = n
    mst[0] = ptr
    mst[1] = length


@njit(cache=True)
def match_p1(hist, mst, bit_prefix, bitpos):
    """P(next bit = 1) from the match model; 1/2 when idle or contradicted."""
    length = mst[1]
    if length == 0:
        return 0.5
    pb = np.int64(hist[mst[0]])
    if ((pb | 256) >> (8 - bitpos)) != bit_prefix:
        return 0.5
    p = 1.0 - 1.0 / length
    if (pb >> (7 - bitpos)) & 1:
        return p
    return 1.0 - p


def match_bucket(length: int) -> int:
    """Weight-table bucket of a match length: 0 idle, then [7,16), [16,32), >= 32."""
    if length < MIN_MATCH:
        return 0
    if length < 16:
        return 1
    if length < 32:
        return 2
    return 3


@njit(cache=True)
def match_bucket_jit(length):
    if length < MIN_MATCH:
        return 0
    if length < 16:
        return 1
    if length < 32:
        return 2
    return 3


# -- Python-level model objects ---------------------------------------------

@dataclass(frozen=True)
class BitContext:
    byte_history: bytes
    bit_prefix: int = 1

    def __post_init__(self):
        if not 1 <= self.bit_prefix <= 255:
            raise ValueError(f"bit_prefix must lie in [1, 255], got {self.bit_prefix}")

    @property
    def bit_position(self) -> int:
        return self.bit_prefix.bit_length() - 1

    def push(self, bit: int) -> "BitContext":
        """Context after coding ``bit``; completes the byte after eight bits."""
        prefix = (self.bit_prefix << 1) | bit
        if prefix >= 256:
            return BitContext(self.byte_history + bytes([prefix & 0xFF]), 1)
        return BitContext(self.byte_history, prefix)


@dataclass(frozen=True)
class BitModelState:
    c0: int = 0
    c1: int = 0
    prior: float = DEFAULT_PRIOR
    discount: bool = True

    @property
    def p1(self) -> float:
        return (self.c1 + self.prior) / (self.c0 + self.c1 + 2 * self.prior)

    def updated(self, bit: int) -> "BitModelState":
        c = [self.c0, self.c1]
        c[bit] += 1
        if self.discount and c[1 - bit] > 2:
            c[1 - bit] = (c[1 - bit] + 1) >> 1
        if c[0] + c[1] >= HALVE_AT:
            c = [c[0] >> 1, c[1] >> 1]
        return BitModelState(c[0], c[1], self.prior, self.discount)


def _history_array(history: bytes) -> np.ndarray:
    return np.frombuffer(bytes(history), dtype=np.uint8) if history else np.zeros(1, np.uint8)


class ContextTables:
    """Count tables for the seven finite-order context models."""

    def __init__(self, prior: float = DEFAULT_PRIOR, discount: bool = True):
        self.counts = np.zeros((TOTAL_SLOTS, 2), dtype=np.uint8)
        self.prior = float(prior)
        self.discount = bool(discount)

    def slot(self, order: int, ctx: BitContext) -> int:
        if not 0 <= order < N_ORDERS:
            raise ValueError(f"order must lie in [0, {N_ORDERS - 1}]")
        hist = _history_array(ctx.byte_history)
        base = context_base(order, hist, len(ctx.byte_history), ORDER_OFFSETS)
        return int(base) + int(prefix_slot(ctx.bit_prefix, ctx.bit_position))

    def state(self, order: int, ctx: BitContext) -> BitModelState:
        c0, c1 = self.counts[self.slot(order, ctx)]
        return BitModelState(int(c0), int(c1), self.prior, self.discount)

    def predict(self, order: int, ctx: BitContext) -> Distribution:
        return Distribution.binary(self.state(order, ctx).p1)

    def update(self, order: int, ctx: BitContext, bit: int) -> None:
        count_update(self.counts, self.slot(order, ctx), int(bit), self.discount)


def context_predict(order: int, ctx: BitContext, tables: ContextTables) -> Distribution:
    return tables.predict(order, ctx)


def context_update(order: int, ctx: BitContext, observed_bit: int, tables: ContextTables) -> None:
    tables.update(order, ctx, observed_bit)


@dataclass(frozen=True)
class MatchState:
    match_ptr: int | None
    match_len: int
    predicted_byte: int | None

    @property
    def active(self) -> bool:
        return self.match_len >= MIN_MATCH


class MatchModel:
    """Longest-match predictor over the bytes seen so far."""

    def __init__(self, capacity: int = 1 << 16, depth: int = MATCH_CHAIN_DEPTH):
        self.hist = np.zeros(max(capacity, 8), dtype=np.uint8)
        self.n = 0
        self.head = np.zeros(1 << MATCH_BITS, dtype=np.int32)
        self.chain = np.zeros(self.hist.size + 1, dtype=np.int32)
        self.mst = np.zeros(2, dtype=np.int64)
        self.depth = depth

    @property
    def state(self) -> MatchState:
        if self.mst[1] == 0:
            return MatchState(None, 0, None)
        ptr = int(self.mst[0])
        return MatchState(ptr, int(self.mst[1]), int(self.hist[ptr]))

    def predict(self, bit_prefix: int = 1) -> Distribution:
        bitpos = bit_prefix.bit_length() - 1
        return Distribution.binary(match_p1(self.hist, self.mst, bit_prefix, bitpos))

    def update(self, new_byte: int) -> MatchState:
        if self.n + 1 >= self.hist.size:
            grown = np.zeros(self.hist.size * 2, dtype=np.uint8)
            grown[: self.n] = self.hist[: self.n]
            chain = np.zeros(grown.size + 1, dtype=np.int32)
            chain[: self.chain.size] = self.chain
            self.hist, self.chain = grown, chain
        self.hist[self.n] = new_byte
        self.n += 1
        match_advance(self.hist, self.n, self.head, self.chain, self.mst, self.depth)
        return self.state

    def feed(self, data: bytes) -> MatchState:
        for b in data:
            self.update(b)
        return self.state


def match_predict(model: MatchModel, ctx: BitContext) -> Distribution:
    return model.predict(ctx.bit_prefix)


def match_update(model: MatchModel, new_byte: int) -> MatchState:
    return model.update(new_byte)
