"""Binary range coder: 32-bit range, 16-bit probabilities, carry propagation.

The coder state lives in small int64 arrays so the same jitted routines serve
the :class:`Encoder` / :class:`Decoder` wrappers and the fused compression
kernel.  ``q`` is always P(bit = 1) in units of 1/65536; a one-bit takes the
lower part of the range.

Encoder state layout: low, range, cache, have_cache, pending 0xFF bytes,
output position.  Decoder state layout: range, code, input position, number
of bytes read past the end of the input.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

PROB_BITS = 16
PROB_ONE = 1 << PROB_BITS
Q_MIN = 1
Q_MAX = PROB_ONE - 1

TOP = 1 << 24
MASK32 = 0xFFFFFFFF

# the decoder legitimately reads this many bytes past the last emitted byte
MAX_OVERRUN = 3

ENC_LOW, ENC_RANGE, ENC_CACHE, ENC_HAVE_CACHE, ENC_PENDING, ENC_POS = range(6)
DEC_RANGE, DEC_CODE, DEC_POS, DEC_OVERRUN = range(4)


class TruncatedStreamError(ValueError):
    """The decoder ran past the end of the coded payload."""


@njit(cache=True)
def quantize_jit(p):
    q = int(math.floor(p * 65536.0 + 0.5))
    if q < 1:
        return 1
    if q > 65535:
        return 65535
    return q


def quantize(p: float) -> int:
    """round(p * 65536) clamped to [1, 65535]."""
    return int(quantize_jit(float(p)))


def encoder_state() -> np.ndarray:
    st = np.zeros(6, dtype=np.int64)
    st[ENC_RANGE] = MASK32
    return st


def decoder_state() -> np.ndarray:
    st = np.zeros(4, dtype=np.int64)
    st[DEC_RANGE] = MASK32
    return st


@njit(cache=True)
def _shift_low(st, out):
    low = st[0]
    if low < 0xFF000000 or low > MASK32:
        carry = low >> 32
        pos = st[5]
        if st[3] != 0:
            out[pos] = (st[2] + carry) & 0xFF
            pos += 1
        for _ in range(st[4]):
            out[pos] = (0xFF + carry) & 0xFF
            pos += 1
        st[4] = 0
        st[2] = (low >> 24) & 0xFF
        st[3] = 1
        st[5] = pos
    else:
        st[4] += 1
    st[0] = (low << 8) & MASK32


@njit(cache=True)
def encode_bit_jit(st, out, q, bit):
    rng = st[1]
    bound = (rng * q) >> 16
    if bit != 0:
        rng = bound
    else:
        st[0] += bound
        rng -= bound
    while rng < TOP:
        rng <<= 8
        _shift_low(st, out)
    st[1] = rng


@njit(cache=True)
def flush_jit(st, out):
    # any value in [low, low + range) decodes correctly; range >= 2^24, so a
    # multiple of 2^24 is always available and the trailing zero bytes it
    # implies need not be written
    st[0] = (st[0] + 0xFFFFFF) & ~np.int64(0xFFFFFF)
    _shift_low(st, out)
    _shift_low(st, out)
    return st[5]


@njit(cache=True)
def _next_byte(st, buf):
    pos = st[2]
    st[2] = pos + 1
    if pos < buf.shape[0]:
        return np.int64(buf[pos])
    st[3] += 1
    return np.int64(0)


@njit(cache=True)
def decoder_init_jit(st, buf):
    st[0] = MASK32
    st[1] = 0
    st[2] = 0
    st[3] = 0
    for _ in range(4):
        st[1] = (st[1] << 8) | _next_byte(st, buf)


@njit(cache=True)
def decode_bit_jit(st, buf, q):
    rng = st[0]
    code = st[1]
    bound = (rng * q) >> 16
    if code < bound:
        rng = bound
        bit = 1
    else:
        code -= bound
        rng -= bound
        bit = 0
    while rng < TOP:
        code = ((code << 8) | _next_byte(st, buf)) & MASK32
        rng <<= 8
    st[0] = rng
    st[1] = code
    return bit


def worst_case_payload(nbits: int) -> int:
    """Upper bound on payload bytes for ``nbits`` coded bits (16 bits per bit at q = 1)."""
    return 2 * nbits + 16


class Encoder:
    """Incremental encoder producing a ``bytes`` payload."""

    def __init__(self):
        self._st = encoder_state()
        self._out = np.zeros(64, dtype=np.uint8)
        self._closed = False

    def _reserve(self):
        if self._st[ENC_POS] + self._st[ENC_PENDING] + 16 > self._out.size:
            grown = np.zeros(self._out.size * 2, dtype=np.uint8)
            grown[: self._out.size] = self._out
            self._out = grown

    def encode_bit(self, q: int, bit: int) -> None:
        if self._closed:
            raise ValueError("encoder already flushed")
        if not Q_MIN <= q <= Q_MAX:
            raise ValueError(f"quantized probability out of range: {q}")
        self._reserve()
        encode_bit_jit(self._st, self._out, int(q), int(bit))

    def finish(self) -> bytes:
        if not self._closed:
            self._reserve()
            flush_jit(self._st, self._out)
            self._closed = True
        return self._out[: self._st[ENC_POS]].tobytes()


class Decoder:
    """Replays an :class:`Encoder` given the same probability sequence."""

    def __init__(self, payload: bytes):
        self._buf = np.frombuffer(bytes(payload), dtype=np.uint8)
        self._st = decoder_state()
        decoder_init_jit(self._st, self._buf)

    def decode_bit(self, q: int) -> int:
        if not Q_MIN <= q <= Q_MAX:
            raise ValueError(f"quantized probability out of range: {q}")
        bit = int(decode_bit_jit(self._st, self._buf, int(q)))
        if self._st[DEC_OVERRUN] > MAX_OVERRUN:
            raise TruncatedStreamError("coded payload ended prematurely")
        return bit

    @property
    def bytes_consumed(self) -> int:
        return int(min(self._st[DEC_POS], self._buf.size))
