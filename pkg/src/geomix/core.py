"""Probability types and the information-theoretic helpers shared by every module.

All math is plain float64.  A :class:`Distribution` is strictly positive by
construction: entries are clamped to ``[P_MIN, 1 - P_MIN]`` and renormalized,
so logs of model probabilities are always finite.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

P_MIN = 2.0 ** -30
P_MAX = 1.0 - P_MIN

LN2 = math.log(2.0)


class Distribution:
    """Strictly positive probability vector over an alphabet of size >= 2."""

    __slots__ = ("_p",)

    def __init__(self, probs: Iterable[float]):
        p = np.array(probs, dtype=np.float64).ravel()
        if p.size < 2:
            raise ValueError("alphabet size must be at least 2")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("probabilities must be finite and non-negative")
        total = p.sum()
        if total <= 0:
            raise ValueError("probabilities must have a positive sum")
        p = np.clip(p / total, P_MIN, P_MAX)
        p /= p.sum()
        p.flags.writeable = False
        self._p = p

    @classmethod
    def binary(cls, p1: float) -> "Distribution":
        """Distribution over {0, 1} with P(1) = p1."""
        return cls((1.0 - p1, p1))

    @classmethod
    def uniform(cls, size: int) -> "Distribution":
        return cls(np.full(size, 1.0 / size))

    @property
    def probs(self) -> np.ndarray:
        return self._p

    @property
    def size(self) -> int:
        return self._p.size

    def __len__(self) -> int:
        return self._p.size

    def __getitem__(self, x: int) -> float:
        return float(self._p[x])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self._p, other._p)

    def __hash__(self) -> int:
        return hash(self._p.tobytes())

    def __repr__(self) -> str:
        return f"Distribution({np.array2string(self._p, precision=6)})"


class WeightVector:
    """Non-negative weights with a positive sum.

    Only the normalized form enters the mixture functions, so the raw scale
    is kept for bookkeeping but never changes a prediction.
    """

    __slots__ = ("_w",)

    def __init__(self, w: Iterable[float]):
        arr = np.array(w, dtype=np.float64).ravel()
        if arr.size == 0:
            raise ValueError("weight vector must not be empty")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("weights must be finite and non-negative")
        if arr.sum() <= 0:
            raise ValueError("weights must have a positive sum")
        arr.flags.writeable = False
        self._w = arr

    @classmethod
    def uniform(cls, m: int) -> "WeightVector":
        return cls(np.full(m, 1.0 / m))

    @property
    def w(self) -> np.ndarray:
        return self._w

    def normalized(self) -> np.ndarray:
        return self._w / self._w.sum()

    def __len__(self) -> int:
        return self._w.size

    def __repr__(self) -> str:
        return f"WeightVector({np.array2string(self._w, precision=6)})"


def as_weights(w) -> np.ndarray:
    """Validated float64 copy of a weight vector (``WeightVector`` or array-like)."""
    if isinstance(w, WeightVector):
        return w.w.copy()
    return WeightVector(w).w.copy()


class PredictionSet:
    """The m model distributions of one coding step plus their natural logs.

    ``probs`` and ``logp`` are m x A matrices; row i belongs to model i.
    """

    __slots__ = ("dists", "probs", "logp")

    def __init__(self, dists: Sequence[Distribution]):
        dists = [d if isinstance(d, Distribution) else Distribution(d) for d in dists]
        if not dists:
            raise ValueError("a prediction set needs at least one model")
        size = dists[0].size
        if any(d.size != size for d in dists):
            raise ValueError("all model distributions must share one alphabet")
        self.dists = tuple(dists)
        self.probs = np.vstack([d.probs for d in dists])
        self.logp = np.log(self.probs)
        self.probs.flags.writeable = False
        self.logp.flags.writeable = False

    @classmethod
    def binary(cls, p1s: Iterable[float]) -> "PredictionSet":
        return cls([Distribution.binary(p) for p in p1s])

    @property
    def m(self) -> int:
        return self.probs.shape[0]

    @property
    def alphabet_size(self) -> int:
        return self.probs.shape[1]

    def __repr__(self) -> str:
        return f"PredictionSet(m={self.m}, A={self.alphabet_size})"


def _probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else Distribution(p).probs


def entropy(p) -> float:
    """Shannon entropy in bits."""
    probs = _probs(p)
    return float(-np.sum(probs * np.log2(probs)))


def kl_divergence(p, q) -> float:
    """D(p || q) in bits."""
    pp, qq = _probs(p), _probs(q)
    if pp.size != qq.size:
        raise ValueError(f"alphabet size mismatch: {pp.size} vs {qq.size}")
    return float(np.sum(pp * (np.log2(pp) - np.log2(qq))))


def cross_entropy(p, q) -> float:
    """Expected code length in bits of coding source p with model q."""
    pp, qq = _probs(p), _probs(q)
    if pp.size != qq.size:
        raise ValueError(f"alphabet size mismatch: {pp.size} vs {qq.size}")
    return float(-np.sum(pp * np.log2(qq)))


def code_length(p, x: int) -> float:
    """Ideal code length -log2 p(x) in bits."""
    return -math.log2(_probs(p)[x])


def stretch(p: float) -> float:
    """Logit ln(p / (1 - p)); p must lie strictly inside (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"stretch is defined on (0, 1), got {p!r}")
    return math.log(p / (1.0 - p))


def squash(t: float) -> float:
    """Logistic function 1 / (1 + e^-t), evaluated without overflow."""
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    top = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - top), axis=axis, keepdims=True)) + top
    return np.squeeze(out, axis=axis)
