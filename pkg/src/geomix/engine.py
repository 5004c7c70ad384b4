"""Byte-stream compression pipeline and the container format.

Every byte is coded as eight binary decisions, most-significant bit first.
At each decision the eight submodels predict, a weight set is selected by
(previous byte, match-length bucket), the configured mixer combines the
predictions, the range coder codes the bit, and then the mixer and the
models learn from it.

Container layout (little-endian, 20-byte header)::

    magic   4s  b"GLMX"
    version u8  1
    mixer   u8  0 GEO, 1 LIN, 2 BETA, 3 LOGISTIC
    reserved u16 0
    length  u64 plaintext bytes
    crc32   u32 of the plaintext
    payload ... range-coded bits
"""

from __future__ import annotations

import csv
import hashlib
import io
import struct
import threading
import zlib
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernel
from .coder import MAX_OVERRUN, TruncatedStreamError, worst_case_payload
from .mixers import DEFAULT_ALPHA, DEFAULT_EPSILON, canonical_kind
from .models import (
    DEFAULT_PRIOR,
    MATCH_BITS,
    MATCH_CHAIN_DEPTH,
    N_MODELS,
    ORDER_OFFSETS,
    TOTAL_SLOTS,
    estimator_tables,
)

MAGIC = b"GLMX"
VERSION = 1
HEADER = struct.Struct("<4sBBHQI")

MIXER_IDS = {"geometric": 0, "linear": 1, "beta": 2, "logistic": 3}
MIXER_NAMES = {v: k for k, v in MIXER_IDS.items()}
SHORT_NAMES = {"geometric": "GEO", "linear": "LIN", "beta": "BETA", "logistic": "LOGISTIC"}

TRACE_HEADER = (
    ["step"] + [f"p1_m{i}" for i in range(N_MODELS)]
    + ["table_index", "mixed_p1", "code_length", "bit"]
)


class FrameError(ValueError):
    """Malformed or incompatible container."""


class CorruptionError(FrameError):
    """Decoded data failed the checksum."""


class TruncatedFrameError(CorruptionError, TruncatedStreamError):
    """Container or payload ends early.

    A damaged payload can also send the decoder past the end of its input,
    so this is a kind of corruption error.
    """


@dataclass(frozen=True)
class CodecConfig:
    mixer: str = "geometric"
    alpha: float | None = None
    epsilon: float | None = None
    prior: float = DEFAULT_PRIOR
    discount: bool = True
    match_depth: int = MATCH_CHAIN_DEPTH

    def __post_init__(self):
        object.__setattr__(self, "mixer", canonical_kind(self.mixer))
        if not self.prior > 0:
            raise ValueError("estimator prior must be positive")
        if self.alpha is not None and not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")
        if self.epsilon is not None and not 0 <= self.epsilon <= 1.0 / N_MODELS:
            raise ValueError(f"epsilon must lie in [0, 1/{N_MODELS}]")
        if self.match_depth < 1:
            raise ValueError("match_depth must be positive")

    @property
    def mixer_id(self) -> int:
        return MIXER_IDS[self.mixer]

    @property
    def step_size(self) -> float:
        return DEFAULT_ALPHA[self.mixer] if self.alpha is None else float(self.alpha)

    @property
    def floor(self) -> float:
        return DEFAULT_EPSILON[self.mixer] if self.epsilon is None else float(self.epsilon)


@dataclass(frozen=True)
class CodecFrame:
    mixer_id: int
    length: int
    crc32: int
    payload: bytes
    version: int = VERSION

    def to_bytes(self) -> bytes:
        return HEADER.pack(MAGIC, self.version, self.mixer_id, 0, self.length, self.crc32) + self.payload

    @classmethod
    def from_bytes(cls, blob: bytes) -> "CodecFrame":
        if len(blob) < HEADER.size:
            raise TruncatedFrameError(f"frame shorter than its {HEADER.size}-byte header")
        magic, version, mixer_id, _reserved, length, crc = HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise FrameError(f"bad magic {magic!r}")
        if version != VERSION:
            raise FrameError(f"unsupported version {version}")
        if mixer_id not in MIXER_NAMES:
            raise FrameError(f"unknown mixer id {mixer_id}")
        return cls(mixer_id=mixer_id, length=length, crc32=crc, payload=bytes(blob[HEADER.size:]), version=version)

    @property
    def mixer(self) -> str:
        return MIXER_NAMES[self.mixer_id]

    def __len__(self) -> int:
        return HEADER.size + len(self.payload)


# -- model table pool --------------------------------------------------------

class _Bank:
    __slots__ = ("counts", "head")

    def __init__(self):
        self.counts = np.zeros((TOTAL_SLOTS, 2), dtype=np.uint8)
        self.head = np.zeros(1 << MATCH_BITS, dtype=np.int32)


_pool: list[_Bank] = []
_pool_lock = threading.Lock()

# past this many bytes a full clear is cheaper than undoing touched slots
_FULL_CLEAR_BYTES = 1 << 19


def _acquire() -> _Bank:
    with _pool_lock:
        if _pool:
            return _pool.pop()
    return _Bank()


def _release(bank: _Bank, data: np.ndarray, n: int) -> None:
    if n > _FULL_CLEAR_BYTES:
        bank.counts.fill(0)
        bank.head.fill(0)
    else:
        _kernel.reset_touched(data, n, bank.counts, ORDER_OFFSETS, bank.head)
    with _pool_lock:
        _pool.append(bank)


@dataclass
class RunResult:
    ideal_bits: float
    quantized_bits: float
    data: np.ndarray
    payload: bytes = b""
    trace: np.ndarray | None = None
    digest: str | None = None


def _state_digest(bank: _Bank, weights: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(bank.counts.tobytes())
    h.update(bank.head.tobytes())
    h.update(weights.tobytes())
    return h.hexdigest()


def _run(mode: int, data: np.ndarray, n: int, config: CodecConfig, payload: bytes = b"",
         trace: bool = False, debug: bool = False) -> RunResult:
    bank = _acquire()
    try:
        weights = np.full((_kernel.N_WEIGHT_SETS, N_MODELS), 1.0 / N_MODELS)
        chain = np.zeros(n + 2, dtype=np.int32)
        out = np.zeros(worst_case_payload(8 * n) if mode == _kernel.MODE_ENCODE else 1, dtype=np.uint8)
        pay = np.frombuffer(payload, dtype=np.uint8).copy()
        tr = np.zeros((8 * n if trace else 1, _kernel.TRACE_COLS))
        ln_num, ln_den = estimator_tables(config.prior)
        bits, qbits, out_len, overrun = _kernel.run(
            data, n, mode, config.mixer_id, config.step_size, config.floor,
            bank.counts, ORDER_OFFSETS, bank.head, chain, config.match_depth,
            weights, config.prior, config.discount, ln_num, ln_den, pay, out, tr, trace,
        )
        if overrun > MAX_OVERRUN:
            raise TruncatedFrameError("payload ends before the coded bits do")
        digest = _state_digest(bank, weights) if debug else None
    finally:
        _release(bank, data, n)
    return RunResult(
        ideal_bits=float(bits),
        quantized_bits=float(qbits),
        data=data,
        payload=out[:out_len].tobytes() if mode == _kernel.MODE_ENCODE else b"",
        trace=tr if trace else None,
        digest=digest,
    )


def _as_array(data) -> np.ndarray:
    # the kernel takes one writable array type for every mode
    if isinstance(data, np.ndarray):
        return np.array(data, dtype=np.uint8, copy=True).ravel()
    return np.frombuffer(bytes(data), dtype=np.uint8).copy()


def _config(config: CodecConfig | str | None) -> CodecConfig:
    if config is None:
        return CodecConfig()
    if isinstance(config, str):
        return CodecConfig(mixer=config)
    return config


# -- public API --------------------------------------------------------------

def _encode(data, config, debug: bool) -> tuple[CodecFrame, str | None]:
    cfg = _config(config)
    arr = _as_array(data)
    res = _run(_kernel.MODE_ENCODE, arr, arr.size, cfg, debug=debug)
    frame = CodecFrame(
        mixer_id=cfg.mixer_id,
        length=arr.size,
        crc32=zlib.crc32(arr.tobytes()) & 0xFFFFFFFF,
        payload=res.payload,
    )
    return frame, res.digest


def compress(data: bytes, config: CodecConfig | str | None = None) -> CodecFrame:
    """Compress ``data`` into a :class:`CodecFrame`."""
    return _encode(data, config, debug=False)[0]


def compress_with_digest(data: bytes, config: CodecConfig | str | None = None) -> tuple[CodecFrame, str]:
    """Like :func:`compress`, plus a SHA-256 digest of the final model and weight state."""
    return _encode(data, config, debug=True)


def _decode(frame, config, debug: bool) -> tuple[bytes, str | None]:
    if not isinstance(frame, CodecFrame):
        frame = CodecFrame.from_bytes(frame)
    cfg = CodecConfig(mixer=frame.mixer) if config is None else _config(config)
    if cfg.mixer_id != frame.mixer_id:
        raise FrameError(
            f"frame was coded with {SHORT_NAMES[frame.mixer]}, "
            f"decoder configured for {SHORT_NAMES[cfg.mixer]}"
        )
    if frame.length and not frame.payload:
        raise TruncatedFrameError("frame has no payload")
    out = np.zeros(frame.length, dtype=np.uint8)
    res = _run(_kernel.MODE_DECODE, out, frame.length, cfg, payload=frame.payload, debug=debug)
    plain = out.tobytes()
    if zlib.crc32(plain) & 0xFFFFFFFF != frame.crc32:
        raise CorruptionError("checksum mismatch: payload is corrupt or was coded with other settings")
    return plain, res.digest


def decompress(frame: CodecFrame | bytes, config: CodecConfig | str | None = None) -> bytes:
    """Inverse of :func:`compress`.

    ``config`` defaults to the mixer recorded in the frame with default step
    size and floor.  A config naming a different mixer is rejected.
    """
    return _decode(frame, config, debug=False)[0]


def decompress_with_digest(frame: CodecFrame | bytes, config: CodecConfig | str | None = None) -> tuple[bytes, str]:
    """Like :func:`decompress`, plus the decoder's final state digest."""
    return _decode(frame, config, debug=True)


def ideal_code_length(data: bytes, config: CodecConfig | str | None = None) -> float:
    """Sum of -log2 f_k(x_k) over all coded bits, without running the coder."""
    arr = _as_array(data)
    if arr.size == 0:
        return 0.0
    return _run(_kernel.MODE_IDEAL, arr, arr.size, _config(config)).ideal_bits


def coding_cost(data: bytes, config: CodecConfig | str | None = None) -> tuple[float, float]:
    """(ideal bits, bits at the coder's 16-bit quantized probabilities).

    Their difference is the quantization slack; the range coder adds at
    most a few bytes of termination on top of the second figure.
    """
    arr = _as_array(data)
    if arr.size == 0:
        return 0.0, 0.0
    res = _run(_kernel.MODE_IDEAL, arr, arr.size, _config(config))
    return res.ideal_bits, res.quantized_bits


def trace(data: bytes, config: CodecConfig | str | None = None) -> np.ndarray:
    """Per-bit records: model p(1) values, table index, mixed p(1), code length, bit."""
    arr = _as_array(data)
    res = _run(_kernel.MODE_IDEAL, arr, arr.size, _config(config), trace=True)
    return res.trace


def iter_trace_rows(records: np.ndarray) -> Iterator[list]:
    for step, row in enumerate(records):
        yield (
            [step] + [repr(float(v)) for v in row[:N_MODELS]]
            + [int(row[N_MODELS]), repr(float(row[N_MODELS + 1])), repr(float(row[N_MODELS + 2])), int(row[N_MODELS + 3])]
        )


def write_trace_csv(records: np.ndarray, fh: io.TextIOBase) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    writer.writerows(iter_trace_rows(records))


def read_trace_csv(fh: io.TextIOBase) -> np.ndarray:
    reader = csv.reader(fh)
    header = next(reader)
    if header != TRACE_HEADER:
        raise ValueError("not a trace file: unexpected header")
    rows = [[float(v) for v in row[1:]] for row in reader]
    return np.array(rows, dtype=np.float64).reshape(-1, _kernel.TRACE_COLS)
