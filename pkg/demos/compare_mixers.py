"""Compress one input with every mixer and compare code lengths.

Without an argument a synthetic text is used.  The ideal column is the model
cost sum(-log2 f); "framed" is the real container size including the 20-byte
header, so the two differ by coder overhead and header.

    python demos/compare_mixers.py [FILE]
"""

import sys
import time
import zlib
import bz2

import numpy as np

from geomix.engine import CodecConfig, coding_cost, compress, decompress
from geomix.mixers import KINDS


def synthetic_text(n: int = 200_000) -> bytes:
    rng = np.random.default_rng(0)
    vocab = [w.encode() for w in (
        "the of and to in is that for it as with was on be by this are from "
        "mixture weight model context bit byte code length gradient step size "
        "geometric linear beta match order probability estimate").split()]
    # Zipf-ish word choice, occasional newlines
    ranks = np.arange(1, len(vocab) + 1)
    probs = 1 / ranks / np.sum(1 / ranks)
    out = bytearray()
    while len(out) < n:
        out += vocab[rng.choice(len(vocab), p=probs)]
        out += b"\n" if rng.random() < 0.08 else b" "
    return bytes(out[:n])


if len(sys.argv) > 1:
    data = open(sys.argv[1], "rb").read()
    label = sys.argv[1]
else:
    data = synthetic_text()
    label = "synthetic text"

print(f"{label}: {len(data)} bytes")
print(f"{'mixer':10s}{'ideal bpc':>11s}{'framed bpc':>12s}{'slack bits':>12s}{'sec':>7s}")
for kind in KINDS:
    t0 = time.perf_counter()
    ideal, quantized = coding_cost(data, kind)
    frame = compress(data, CodecConfig(kind))
    assert decompress(frame) == data
    dt = time.perf_counter() - t0
    print(f"{kind:10s}{ideal / len(data):11.4f}{8 * len(frame) / len(data):12.4f}"
          f"{quantized - ideal:12.1f}{dt:7.2f}")

print()
print(f"{'zlib -9':10s}{'':11s}{8 * len(zlib.compress(data, 9)) / len(data):12.4f}")
print(f"{'bz2 -9':10s}{'':11s}{8 * len(bz2.compress(data, 9)) / len(data):12.4f}")
