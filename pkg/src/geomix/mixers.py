"""Mixture functions and their online weight updates.

Four kinds share one interface:

``geometric``
    normalized weighted geometric mean; minimizes sum_i w_i D(Q || P_i).
``linear``
    weighted arithmetic mean; minimizes sum_i w_i D(P_i || Q).
``beta``
    linear mixture whose weights are Bayesian posteriors over the models.
``logistic``
    the PAQ7 mixer sq(sum_i w_i st(P_i(1))) on a binary alphabet.  Its
    prediction equals the geometric mixture whenever w lies on the simplex;
    its update is the unconstrained, constant-step gradient rule.

Gradient mixers take a step along the gradient of ln f_k(x_k) (the negative
per-step code length in nats), floor every weight at ``epsilon`` and bring the
sum back to one.  States are immutable; every update returns a new state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Distribution, PredictionSet, as_weights, logsumexp

KINDS = ("geometric", "linear", "beta", "logistic")

ALIASES = {
    "geo": "geometric",
    "lin": "linear",
    "beta": "beta",
    "paq": "logistic",
    "logistic": "logistic",
    "geometric": "geometric",
    "linear": "linear",
}

DEFAULT_ALPHA = {"geometric": 1 / 16, "linear": 1 / 32, "beta": 0.0, "logistic": 1 / 16}
DEFAULT_EPSILON = {"geometric": 2.0 ** -30, "linear": 2.0 ** -30, "beta": 2.0 ** -8, "logistic": 0.0}


def canonical_kind(kind: str) -> str:
    try:
        return ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown mixer kind {kind!r}; expected one of {sorted(ALIASES)}") from None


@dataclass(frozen=True)
class MixerState:
    kind: str
    w: np.ndarray = field(repr=False)
    alpha: float
    epsilon: float

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "kind", canonical_kind(self.kind))

    @property
    def m(self) -> int:
        return self.w.size


def new_state(kind: str, m: int, alpha: float | None = None, epsilon: float | None = None) -> MixerState:
    """Fresh state with uniform weights 1/m and the default step size / floor."""
    kind = canonical_kind(kind)
    return MixerState(
        kind=kind,
        w=np.full(m, 1.0 / m),
        alpha=DEFAULT_ALPHA[kind] if alpha is None else float(alpha),
        epsilon=DEFAULT_EPSILON[kind] if epsilon is None else float(epsilon),
    )


def _check(ps: PredictionSet, w: np.ndarray) -> None:
    if w.size != ps.m:
        raise ValueError(f"{w.size} weights for {ps.m} models")


# -- mixture functions -----------------------------------------------------

def geometric_scores(ps: PredictionSet, w, normalize: bool = True) -> np.ndarray:
    """Per-symbol exponent w'^T Q(x); the mixture is its softmax."""
    w = as_weights(w)
    _check(ps, w)
    if normalize:
        w = w / w.sum()
    return w @ ps.logp


def mix_geometric(ps: PredictionSet, w) -> Distribution:
    s = geometric_scores(ps, w)
    e = np.exp(s - s.max())
    return Distribution(e / e.sum())


def mix_linear(ps: PredictionSet, w) -> Distribution:
    w = as_weights(w)
    _check(ps, w)
    return Distribution((w / w.sum()) @ ps.probs)


def mix_logistic(ps: PredictionSet, w) -> Distribution:
    """PAQ mixing of one-bit probabilities in the logit domain.

    Weights may be any reals here: the PAQ update does not keep them
    non-negative.
    """
    if ps.alphabet_size != 2:
        raise ValueError("logistic mixing needs a binary alphabet")
    w = np.asarray(w.w if hasattr(w, "w") else w, dtype=np.float64)
    if w.size != ps.m:
        raise ValueError(f"{w.size} weights for {ps.m} models")
    st = ps.logp[:, 1] - ps.logp[:, 0]
    t = float(w @ st)
    # squash in the numerically safe direction
    if t >= 0:
        p1 = 1.0 / (1.0 + math.exp(-t))
    else:
        e = math.exp(t)
        p1 = e / (1.0 + e)
    return Distribution.binary(p1)


# -- gradients of ln f_k(x) with respect to the raw weights ---------------

def geometric_log_gradient(ps: PredictionSet, w, x: int, normalize: bool = True) -> np.ndarray:
    """Gradient of ln f_k(x) for the geometric mixture.

    With ``normalize`` the exponents are w_i / sum(w) and the result is
    ((Q(x) - q_x 1) - sum_x' p_x' (Q(x') - q_x' 1)) / sum(w).  Without it the
    exponents are the raw weights and the result is Q(x) - sum_x' p_x' Q(x'),
    which is the PAQ update direction on a binary alphabet.
    """
    w = as_weights(w) if normalize else np.asarray(w, dtype=np.float64)
    _check(ps, w)
    if normalize:
        total = w.sum()
        s = (w @ ps.logp) / total
        p = np.exp(s - logsumexp(s))
        centered = ps.logp - s[None, :]
        return (centered[:, x] - centered @ p) / total
    s = w @ ps.logp
    p = np.exp(s - logsumexp(s))
    return ps.logp[:, x] - ps.logp @ p


def linear_log_gradient(ps: PredictionSet, w, x: int) -> np.ndarray:
    """Gradient of ln f_k(x) for the linear mixture: (P(x) - f 1) / (f sum(w))."""
    w = as_weights(w)
    _check(ps, w)
    total = w.sum()
    px = ps.probs[:, x]
    f = float(w @ px) / total
    return (px - f) / (f * total)


# -- weight maintenance ----------------------------------------------------

def floor_renormalize(w: np.ndarray, epsilon: float) -> np.ndarray:
    """Floor every weight at ``epsilon`` and rescale the rest to a unit sum.

    Floored entries stay exactly at ``epsilon``; only the free mass is
    rescaled, repeating when a rescale pushes another entry under the floor.
    Needs m * epsilon <= 1.
    """
    w = np.maximum(np.asarray(w, dtype=np.float64), epsilon)
    m = w.size
    if epsilon * m > 1.0:
        raise ValueError(f"floor {epsilon} is infeasible for {m} weights")
    pinned = w <= epsilon
    for _ in range(m):
        free_sum = w[~pinned].sum()
        if free_sum <= 0.0:
            w[pinned] = 1.0 / m
            return w
        target = 1.0 - epsilon * pinned.sum()
        w[~pinned] *= target / free_sum
        w[pinned] = epsilon
        newly = (~pinned) & (w < epsilon)
        if not newly.any():
            return w
        pinned |= newly
    w[pinned] = epsilon
    return w


def _require(state: MixerState, kind: str) -> None:
    if state.kind != kind:
        raise ValueError(f"expected a {kind} mixer state, got {state.kind}")


def update_geometric(state: MixerState, ps: PredictionSet, observed: int) -> MixerState:
    _require(state, "geometric")
    grad = geometric_log_gradient(ps, state.w, observed)
    w = floor_renormalize(state.w + state.alpha * grad, state.epsilon)
    return replace(state, w=w)


def update_linear(state: MixerState, ps: PredictionSet, observed: int,
                  preconditioned: bool = False) -> MixerState:
    """Gradient step for the linear mixture.

    ``preconditioned=True`` replaces the scalar step by diag(w) and skips the
    floor; on the simplex this is exactly the beta-weighting posterior update.
    """
    _require(state, "linear")
    grad = linear_log_gradient(ps, state.w, observed)
    if preconditioned:
        return replace(state, w=state.w + state.w * grad)
    w = floor_renormalize(state.w + state.alpha * grad, state.epsilon)
    return replace(state, w=w)


def update_beta(state: MixerState, ps: PredictionSet, observed: int) -> MixerState:
    _require(state, "beta")
    beta = state.w / state.w.sum()
    px = ps.probs[:, observed]
    f = float(beta @ px)
    w = beta * px / f
    if state.epsilon > 0:
        w = floor_renormalize(w, state.epsilon)
    return replace(state, w=w)


def update_logistic(state: MixerState, ps: PredictionSet, observed: int) -> MixerState:
    _require(state, "logistic")
    if ps.alphabet_size != 2:
        raise ValueError("logistic mixing needs a binary alphabet")
    f1 = mix_logistic(ps, state.w)[1]
    st = ps.logp[:, 1] - ps.logp[:, 0]
    return replace(state, w=state.w + state.alpha * (observed - f1) * st)


_MIX = {
    "geometric": mix_geometric,
    "linear": mix_linear,
    "beta": mix_linear,
    "logistic": mix_logistic,
}

_UPDATE = {
    "geometric": update_geometric,
    "linear": update_linear,
    "beta": update_beta,
    "logistic": update_logistic,
}


def mix(state: MixerState, ps: PredictionSet) -> Distribution:
    return _MIX[state.kind](ps, state.w)


def update(state: MixerState, ps: PredictionSet, observed: int) -> MixerState:
    return _UPDATE[state.kind](state, ps, observed)
