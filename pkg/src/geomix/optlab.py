"""Offline checks for the mixing theory: oracles, batch optimization, convexity.

Everything here works on a :class:`PredictionLog`, a fixed record of n coding
steps, each holding m model distributions and the symbol that occurred.
Objectives are total code lengths in bits.  Weights passed to the batch
functions are raw positive vectors; the mixtures only see ``w / sum(w)``, so
gradients are taken with respect to the raw coordinates of that composition.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .core import LN2, Distribution, PredictionSet, logsumexp
from .mixers import (
    MixerState,
    mix_geometric,
    mix_linear,
    mix_logistic,
    update_beta,
    update_linear,
)

OBJECTIVE_KINDS = ("geometric", "linear")

FD_STEP = 1e-6
HESSIAN_TOL = -1e-9
MIDPOINT_MARGIN = 1e-12
OPT_FLOOR = 1e-12

# log probabilities are kept at least this far from zero in random instances
_MIX_UNIFORM = 0.02


def _kind(kind: str) -> str:
    k = {"geo": "geometric", "lin": "linear"}.get(kind, kind)
    if k not in OBJECTIVE_KINDS:
        raise ValueError(f"objective kind must be one of {OBJECTIVE_KINDS}, got {kind!r}")
    return k


@dataclass(frozen=True)
class PredictionLog:
    """n steps of m model distributions over an alphabet of size A.

    ``probs`` has shape (n, m, A); ``symbols`` has shape (n,).
    """

    probs: np.ndarray
    symbols: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        x = np.array(self.symbols, dtype=np.int64).ravel()
        if p.ndim != 3:
            raise ValueError("probs must have shape (n, m, A)")
        n, m, a = p.shape
        if m < 1 or a < 2:
            raise ValueError("need m >= 1 models over an alphabet of size >= 2")
        if x.size != n:
            raise ValueError(f"{x.size} symbols for {n} steps")
        if np.any(x < 0) or np.any(x >= a):
            raise ValueError("symbol out of range")
        if not np.all(p > 0) or not np.allclose(p.sum(axis=2), 1.0, atol=1e-9, rtol=0):
            raise ValueError("every model distribution must be strictly positive and sum to 1")
        p.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "symbols", x)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def m(self) -> int:
        return self.probs.shape[1]

    @property
    def alphabet_size(self) -> int:
        return self.probs.shape[2]

    @property
    def logp(self) -> np.ndarray:
        return np.log(self.probs)

    def observed(self) -> np.ndarray:
        """(n, m) probabilities each model gave the realized symbol."""
        return self.probs[np.arange(self.n), :, self.symbols]

    def step(self, k: int) -> PredictionSet:
        return PredictionSet([Distribution(row) for row in self.probs[k]])

    def permuted(self, perm: Iterable[int]) -> "PredictionLog":
        return PredictionLog(self.probs[:, list(perm), :], self.symbols)

    @classmethod
    def from_steps(cls, steps: Iterable[PredictionSet], symbols: Iterable[int]) -> "PredictionLog":
        return cls(np.stack([ps.probs for ps in steps]), np.asarray(list(symbols)))

    @classmethod
    def from_trace(cls, records: np.ndarray, m: int = 8) -> "PredictionLog":
        """Binary log from engine trace records (see ``engine.trace``)."""
        rec = np.asarray(records, dtype=np.float64)
        p1 = rec[:, :m]
        probs = np.stack([1.0 - p1, p1], axis=2)
        return cls(probs, rec[:, m + 3].astype(np.int64))

    def to_dict(self) -> dict:
        return {"probs": self.probs.tolist(), "symbols": self.symbols.tolist()}


def random_distributions(rng: np.random.Generator, shape: tuple, a: int) -> np.ndarray:
    raw = rng.dirichlet(np.ones(a), size=shape)
    return (1.0 - _MIX_UNIFORM) * raw + _MIX_UNIFORM / a


def random_log(rng: np.random.Generator, n: int, m: int, a: int) -> PredictionLog:
    """Models drawn from a flat Dirichlet, symbols drawn uniformly."""
    probs = random_distributions(rng, (n, m), a)
    return PredictionLog(probs, rng.integers(0, a, size=n))


def random_interior(rng: np.random.Generator, m: int) -> np.ndarray:
    w = rng.dirichlet(np.ones(m))
    w = 0.999 * w + 0.001 / m
    return w / w.sum()


# -- simplex grids -------------------------------------------------------------

def _grid_size(resolution: float) -> int:
    if not 0 < resolution <= 0.5:
        raise ValueError("resolution must lie in (0, 1/2]")
    return int(round(1.0 / resolution))


def simplex_grid(dim: int, resolution: float, interior: bool = False) -> np.ndarray:
    """All points of the simplex in R^dim whose coordinates are multiples of ``resolution``.

    Only dim <= 3 is supported; brute force beyond that is pointless.
    """
    steps = _grid_size(resolution)
    lo = 1 if interior else 0
    if dim == 1:
        return np.ones((1, 1))
    if dim == 2:
        i = np.arange(lo, steps - lo + 1)
        return np.stack([i, steps - i], axis=1) / steps
    if dim == 3:
        i, j = np.meshgrid(np.arange(lo, steps + 1), np.arange(lo, steps + 1), indexing="ij")
        k = steps - i - j
        keep = k >= lo
        pts = np.stack([i[keep], j[keep], k[keep]], axis=1)
        return pts / steps
    raise ValueError("simplex grids are limited to dimension 3")


def _weights(ps: PredictionSet, w) -> np.ndarray:
    w = np.asarray(w.w if hasattr(w, "w") else w, dtype=np.float64).ravel()
    if w.size != ps.m or np.any(w < 0) or not w.sum() > 0:
        raise ValueError("weights must be non-negative, have a positive sum and match m")
    return w / w.sum()


def grid_minimize_geo(ps: PredictionSet, w, resolution: float = 1e-3) -> Distribution:
    """Brute-force argmin over Q of sum_i w_i D(Q || P_i) on an interior simplex grid."""
    if ps.alphabet_size not in (2, 3):
        raise ValueError("grid search supports alphabets of size 2 or 3")
    wn = _weights(ps, w)
    target = wn @ ps.logp
    q = simplex_grid(ps.alphabet_size, resolution, interior=True)
    obj = np.sum(q * (np.log(q) - target[None, :]), axis=1)
    return Distribution(q[int(np.argmin(obj))])


def grid_minimize_lin(ps: PredictionSet, w, resolution: float = 1e-3) -> Distribution:
    """Brute-force argmin over Q of sum_i w_i D(P_i || Q) on an interior simplex grid."""
    if ps.alphabet_size not in (2, 3):
        raise ValueError("grid search supports alphabets of size 2 or 3")
    wn = _weights(ps, w)
    avg = wn @ ps.probs
    q = simplex_grid(ps.alphabet_size, resolution, interior=True)
    # the entropy terms of D(P_i || Q) do not depend on Q
    obj = -(np.log(q) @ avg)
    return Distribution(q[int(np.argmin(obj))])


# -- batch objective and gradient ----------------------------------------------

def _raw(w, m: int) -> np.ndarray:
    w = np.asarray(w.w if hasattr(w, "w") else w, dtype=np.float64).ravel()
    if w.size != m:
        raise ValueError(f"{w.size} weights for {m} models")
    return w


def step_code_lengths(log: PredictionLog, w, kind: str) -> np.ndarray:
    """Per-step -log2 f_k(x_k) for weights ``w`` (normalized internally)."""
    kind = _kind(kind)
    w = _raw(w, log.m)
    if np.any(w < 0) or not w.sum() > 0:
        raise ValueError("weights must be non-negative with a positive sum")
    wn = w / w.sum()
    idx = np.arange(log.n)
    if kind == "geometric":
        s = np.einsum("i,kia->ka", wn, log.logp)
        return -(s[idx, log.symbols] - logsumexp(s, axis=1)) / LN2
    return -np.log2(log.observed() @ wn)


def batch_objective(log: PredictionLog, w, kind: str) -> float:
    """Total code length in bits of the log under the chosen mixture."""
    return math.fsum(step_code_lengths(log, w, kind))


def batch_objective_many(log: PredictionLog, ws: np.ndarray, kind: str, chunk: int = 16384) -> np.ndarray:
    """batch_objective for every row of ``ws`` at once."""
    kind = _kind(kind)
    ws = np.asarray(ws, dtype=np.float64)
    wn = ws / ws.sum(axis=1, keepdims=True)
    out = np.empty(ws.shape[0])
    n, m, a = log.probs.shape
    flat = log.logp.transpose(1, 0, 2).reshape(m, n * a)
    idx = np.arange(n)
    obs = log.observed()
    for start in range(0, ws.shape[0], chunk):
        block = wn[start:start + chunk]
        if kind == "geometric":
            s = (block @ flat).reshape(-1, n, a)
            ln_f = s[:, idx, log.symbols] - logsumexp(s, axis=2)
            out[start:start + chunk] = -ln_f.sum(axis=1) / LN2
        else:
            out[start:start + chunk] = -np.log2(block @ obs.T).sum(axis=1)
    return out


def batch_gradient(log: PredictionLog, w, kind: str) -> np.ndarray:
    """Gradient of :func:`batch_objective` in bits with respect to the raw weights.

    ``w`` must be strictly positive; on the boundary the objective is only
    defined through limits.
    """
    kind = _kind(kind)
    w = _raw(w, log.m)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("gradient is only defined for strictly positive weights")
    total = w.sum()
    wn = w / total
    idx = np.arange(log.n)
    if kind == "geometric":
        logp = log.logp
        s = np.einsum("i,kia->ka", wn, logp)
        p = np.exp(s - logsumexp(s, axis=1)[:, None])
        centered = logp - s[:, None, :]
        # d ln f_k / dw_i = (c_i(x_k) - sum_a p_a c_i(a)) / sum(w)
        g = centered[idx, :, log.symbols] - np.einsum("kia,ka->ki", centered, p)
        return -g.sum(axis=0) / (total * LN2)
    obs = log.observed()
    f = obs @ wn
    g = (obs - f[:, None]) / (f[:, None] * total)
    return -g.sum(axis=0) / LN2


def finite_difference_gradient(fn: Callable[[np.ndarray], float], w: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    g = np.empty_like(w)
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (fn(w + e) - fn(w - e)) / (2 * h)
    return g


def gradient_error(log: PredictionLog, w, kind: str, h: float = FD_STEP) -> float:
    """Largest per-coordinate error of the analytic gradient against central differences.

    The error of a coordinate is |g - fd| / max(|g|, 1): relative for
    coordinates of at least one bit per unit weight, absolute below that.
    """
    w = _raw(w, log.m)
    g = batch_gradient(log, w, kind)
    fd = finite_difference_gradient(lambda v: batch_objective(log, v, kind), w, h)
    return float(np.max(np.abs(g - fd) / np.maximum(np.abs(g), 1.0)))


# -- optimization on the simplex -----------------------------------------------

def project_simplex(v: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Euclidean projection onto {w : w >= floor, sum(w) = 1}."""
    v = np.asarray(v, dtype=np.float64)
    m = v.size
    mass = 1.0 - floor * m
    if mass < 0:
        raise ValueError("floor is infeasible")
    u = np.sort(v - floor)[::-1]
    css = np.cumsum(u) - mass
    ks = np.arange(1, m + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - floor - theta, 0.0) + floor


@dataclass
class OptimizeResult:
    w: np.ndarray
    objective: float
    iterations: int
    projected_gradient_norm: float
    converged: bool


def optimize_weights(log: PredictionLog, kind: str, tolerance: float = 1e-9,
                     max_iter: int = 20000, floor: float = OPT_FLOOR) -> OptimizeResult:
    """Maximum-likelihood weights on the simplex by projected gradient descent.

    Steps use the Barzilai-Borwein length with Armijo backtracking; the
    iterate is kept at least ``floor`` away from the boundary so every log
    stays finite.  Stops when ||w - P(w - grad)|| < tolerance.
    """
    kind = _kind(kind)
    m = log.m
    w = np.full(m, 1.0 / m)
    if m == 1:
        return OptimizeResult(w, batch_objective(log, w, kind), 0, 0.0, True)
    obj = lambda v: float(np.sum(step_code_lengths(log, v, kind)))
    f = obj(w)
    g = batch_gradient(log, w, kind)
    step = 1.0 / max(np.max(np.abs(g)), 1e-12)
    pg = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        pg = float(np.linalg.norm(project_simplex(w - g, floor) - w))
        if pg < tolerance:
            break
        d = project_simplex(w - step * g, floor) - w
        slope = float(g @ d)
        if slope >= 0:
            break
        t = 1.0
        while True:
            w_new = w + t * d
            f_new = obj(w_new)
            if f_new <= f + 1e-4 * t * slope or t < 1e-16:
                break
            t *= 0.5
        if t < 1e-16:
            break
        g_new = batch_gradient(log, w_new, kind)
        s, y = w_new - w, g_new - g
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0 else step * 2.0
        step = min(max(step, 1e-12), 1e12)
        w, f, g = w_new, f_new, g_new
    return OptimizeResult(w, batch_objective(log, w, kind), it, pg, pg < tolerance)


def grid_objective_min(log: PredictionLog, kind: str, resolution: float = 1e-3) -> tuple[np.ndarray, float]:
    """Best weight vector on the closed simplex grid (m <= 3) and its objective."""
    grid = simplex_grid(log.m, resolution)
    # boundary points are valid weights: a zero weight just drops the model
    vals = batch_objective_many(log, grid, kind)
    best = int(np.argmin(vals))
    return grid[best], float(vals[best])


# -- convexity -----------------------------------------------------------------

def tangent_basis(m: int) -> np.ndarray:
    """Orthonormal basis (m x (m-1)) of the directions that keep sum(w) fixed."""
    if m < 2:
        return np.zeros((m, 0))
    q, _ = np.linalg.qr(np.eye(m) - 1.0 / m)
    return q[:, : m - 1]


def numeric_hessian(log: PredictionLog, w: np.ndarray, kind: str, h: float = FD_STEP) -> np.ndarray:
    """Hessian on the simplex tangent space by central differences of the gradient."""
    basis = tangent_basis(log.m)
    k = basis.shape[1]
    hess = np.empty((k, k))
    for j in range(k):
        v = basis[:, j] * h
        dg = batch_gradient(log, w + v, kind) - batch_gradient(log, w - v, kind)
        hess[:, j] = basis.T @ dg / (2 * h)
    return 0.5 * (hess + hess.T)


def analytic_hessian(log: PredictionLog, w: np.ndarray, kind: str) -> np.ndarray:
    """Exact tangent-space Hessian, built as a sum of outer products (always PSD)."""
    kind = _kind(kind)
    basis = tangent_basis(log.m)
    wn = np.asarray(w, dtype=np.float64) / np.sum(w)
    if kind == "geometric":
        logp = log.logp
        s = np.einsum("i,kia->ka", wn, logp)
        p = np.exp(s - logsumexp(s, axis=1)[:, None])
        # covariance of the log-probability vector under the mixture
        mean = np.einsum("kia,ka->ki", logp, p)
        dev = logp - mean[:, :, None]
        full = np.einsum("kia,kja,ka->ij", dev, dev, p)
    else:
        obs = log.observed()
        f = obs @ wn
        z = obs / f[:, None]
        full = z.T @ z
    return basis.T @ full @ basis / LN2


@dataclass
class ConvexityReport:
    kind: str
    trials: int
    dimension: int
    midpoint_violations: list = field(default_factory=list)
    hessian_violations: list = field(default_factory=list)
    degenerate: int = 0
    min_midpoint_gap: float = math.inf
    min_hessian_eigenvalue: float = math.inf

    @property
    def violations(self) -> int:
        return len(self.midpoint_violations) + len(self.hessian_violations)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["violations"] = self.violations
        for key in ("min_midpoint_gap", "min_hessian_eigenvalue"):
            if not math.isfinite(d[key]):
                d[key] = None
        return d


def _mixtures(log: PredictionLog, w: np.ndarray, kind: str) -> np.ndarray:
    wn = w / w.sum()
    if kind == "geometric":
        s = np.einsum("i,kia->ka", wn, log.logp)
        return np.exp(s - logsumexp(s, axis=1)[:, None])
    return np.einsum("i,kia->ka", wn, log.probs)


def convexity_probe(log: PredictionLog, kind: str, trials: int,
                    rng: np.random.Generator | int | None = None) -> ConvexityReport:
    """Midpoint and Hessian tests of the batch objective on random interior points.

    A pair whose induced mixtures coincide, or a point whose exact Hessian is
    rank deficient, cannot show strict convexity; such cases are counted as
    degenerate instead of being judged.
    """
    kind = _kind(kind)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(rng)
    m = log.m
    report = ConvexityReport(kind=kind, trials=trials, dimension=m - 1)
    if m == 1:
        report.degenerate = trials
        return report
    for t in range(trials):
        a, b = random_interior(rng, m), random_interior(rng, m)
        mid = 0.5 * (a + b)
        fa, fb, fm = (batch_objective(log, v, kind) for v in (a, b, mid))
        gap = 0.5 * (fa + fb) - fm
        flat_pair = np.max(np.abs(_mixtures(log, a, kind) - _mixtures(log, b, kind))) < 1e-9
        exact = np.linalg.eigvalsh(analytic_hessian(log, mid, kind))
        rank_deficient = exact[0] <= 1e-10 * max(exact[-1], 1.0)
        if flat_pair or rank_deficient:
            report.degenerate += 1
        num = np.linalg.eigvalsh(numeric_hessian(log, mid, kind))
        report.min_hessian_eigenvalue = min(report.min_hessian_eigenvalue, float(num[0]))
        if not flat_pair:
            report.min_midpoint_gap = min(report.min_midpoint_gap, gap)
            if gap <= MIDPOINT_MARGIN:
                report.midpoint_violations.append({"trial": t, "a": a.tolist(), "b": b.tolist(), "gap": gap})
        if not rank_deficient and num[0] <= HESSIAN_TOL:
            report.hessian_violations.append({"trial": t, "w": mid.tolist(), "min_eigenvalue": float(num[0])})
    return report


# -- beta weighting as a preconditioned gradient step ---------------------------

def beta_trajectory(log: PredictionLog, prior=None) -> np.ndarray:
    """(n + 1, m) posterior weights of beta weighting over the log, no floor."""
    m = log.m
    w = np.full(m, 1.0 / m) if prior is None else np.asarray(prior, dtype=np.float64)
    state = MixerState("beta", w, 0.0, 0.0)
    out = [state.w.copy()]
    for k in range(log.n):
        state = update_beta(state, log.step(k), int(log.symbols[k]))
        out.append(state.w.copy())
    return np.array(out)


def diag_linear_trajectory(log: PredictionLog, prior=None) -> np.ndarray:
    """Linear-mixture gradient steps with step matrix diag(w) and no floor."""
    m = log.m
    w = np.full(m, 1.0 / m) if prior is None else np.asarray(prior, dtype=np.float64)
    state = MixerState("linear", w, 0.0, 0.0)
    out = [state.w.copy()]
    for k in range(log.n):
        state = update_linear(state, log.step(k), int(log.symbols[k]), preconditioned=True)
        out.append(state.w.copy())
    return np.array(out)


def beta_identity_gap(log: PredictionLog, prior=None) -> float:
    return float(np.max(np.abs(beta_trajectory(log, prior) - diag_linear_trajectory(log, prior))))


# -- two-part code dominance ---------------------------------------------------

@dataclass
class DominanceReport:
    mixture_bits: float
    two_part_bits: float
    holds: bool
    strict: bool

    def to_dict(self) -> dict:
        return asdict(self)


def two_part_dominance(log: PredictionLog, prior) -> DominanceReport:
    """Compare -log2 sum_j W_j P_j(x^n) with min_j [-log2 W_j - log2 P_j(x^n)].

    Sums run in the log domain with compensated summation, so the comparison
    is exact up to the final rounding: the mixture's log-sum contains the best
    term as an exact 1.0 and can only add to it.
    """
    prior = np.asarray(prior, dtype=np.float64).ravel()
    if prior.size != log.m or np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-9:
        raise ValueError("prior must be a point of the simplex with one entry per model")
    ln_obs = np.log(log.observed())
    scores = []
    for j in range(log.m):
        if prior[j] > 0:
            scores.append(math.log(prior[j]) + math.fsum(ln_obs[:, j]))
    top = max(scores)
    rest = math.fsum(math.exp(s - top) for s in scores)
    mixture = -(top + math.log(rest)) / LN2
    two_part = -top / LN2
    return DominanceReport(mixture, two_part, mixture <= two_part, mixture < two_part)


# -- verification suites -------------------------------------------------------

SUITES = ("paq-equiv", "oracles", "convexity", "dominance", "gradient", "optimality", "beta-identity")
SUITE_GROUPS = {"all": SUITES}


@dataclass
class SuiteResult:
    name: str
    trials: int
    violations: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"name": self.name, "trials": self.trials, "violations": len(self.violations),
                "failures": self.violations[:20], "stats": self.stats}


def suite_paq_equiv(trials: int, rng: np.random.Generator) -> SuiteResult:
    res = SuiteResult("paq-equiv", trials)
    worst = 0.0
    for t in range(trials):
        m = int(rng.integers(1, 9))
        p1 = rng.uniform(1e-4, 1 - 1e-4, size=m)
        w = rng.dirichlet(np.ones(m))
        ps = PredictionSet.binary(p1)
        gap = abs(mix_logistic(ps, w)[1] - mix_geometric(ps, w)[1])
        worst = max(worst, gap)
        if not gap < 1e-12:
            res.violations.append({"trial": t, "p1": p1.tolist(), "w": w.tolist(), "gap": gap})
    res.stats["max_gap"] = worst
    return res


def suite_oracles(trials: int, rng: np.random.Generator, resolution: float = 1e-3) -> SuiteResult:
    res = SuiteResult("oracles", trials)
    worst = {"geometric": 0.0, "linear": 0.0}
    for t in range(trials):
        a = int(rng.integers(2, 4))
        m = int(rng.integers(1, 5))
        ps = PredictionSet(list(random_distributions(rng, (m,), a)))
        w = rng.dirichlet(np.ones(m))
        for kind, mix, oracle in (("geometric", mix_geometric, grid_minimize_geo),
                                  ("linear", mix_linear, grid_minimize_lin)):
            gap = float(np.max(np.abs(mix(ps, w).probs - oracle(ps, w, resolution).probs)))
            worst[kind] = max(worst[kind], gap)
            if not gap <= 2 * resolution:
                res.violations.append({"trial": t, "kind": kind, "probs": ps.probs.tolist(),
                                       "w": w.tolist(), "gap": gap})
    res.stats = {f"max_gap_{k}": v for k, v in worst.items()} | {"resolution": resolution}
    return res


def _random_instance_log(rng: np.random.Generator, max_m: int, max_a: int, max_n: int) -> PredictionLog:
    m = int(rng.integers(1, max_m + 1))
    a = int(rng.integers(2, max_a + 1))
    n = int(rng.integers(1, max_n + 1))
    return random_log(rng, n, m, a)


def suite_convexity(trials: int, rng: np.random.Generator) -> SuiteResult:
    res = SuiteResult("convexity", trials)
    degenerate = 0
    min_gap, min_eig = math.inf, math.inf
    for t in range(trials):
        log = _random_instance_log(rng, 5, 4, 50)
        seed = int(rng.integers(2 ** 63))
        for kind in OBJECTIVE_KINDS:
            rep = convexity_probe(log, kind, 1, seed)
            degenerate += rep.degenerate
            min_gap = min(min_gap, rep.min_midpoint_gap)
            min_eig = min(min_eig, rep.min_hessian_eigenvalue)
            if rep.violations:
                res.violations.append({"trial": t, "kind": kind, "probe_seed": seed,
                                       "log": log.to_dict(), "report": rep.to_dict()})
    res.stats = {
        "degenerate": degenerate,
        "min_midpoint_gap": min_gap if math.isfinite(min_gap) else None,
        "min_hessian_eigenvalue": min_eig if math.isfinite(min_eig) else None,
    }
    return res


def suite_dominance(trials: int, rng: np.random.Generator) -> SuiteResult:
    res = SuiteResult("dominance", trials)
    strict = 0
    for t in range(trials):
        log = _random_instance_log(rng, 4, 4, 10)
        prior = rng.dirichlet(np.ones(log.m))
        rep = two_part_dominance(log, prior)
        strict += rep.strict
        if not rep.holds:
            res.violations.append({"trial": t, "log": log.to_dict(), "prior": prior.tolist(),
                                   "report": rep.to_dict()})
    res.stats["strict"] = strict
    return res


def suite_gradient(trials: int, rng: np.random.Generator) -> SuiteResult:
    res = SuiteResult("gradient", trials)
    worst = 0.0
    for t in range(trials):
        log = _random_instance_log(rng, 5, 4, 50)
        w = random_interior(rng, log.m)
        for kind in OBJECTIVE_KINDS:
            err = gradient_error(log, w, kind)
            worst = max(worst, err)
            if not err < 1e-6:
                res.violations.append({"trial": t, "kind": kind, "log": log.to_dict(),
                                       "w": w.tolist(), "error": err})
    res.stats["max_error"] = worst
    return res


def suite_optimality(trials: int, rng: np.random.Generator, resolution: float = 1e-3) -> SuiteResult:
    res = SuiteResult("optimality", trials)
    worst = -math.inf
    for t in range(trials):
        m = int(rng.integers(1, 4))
        log = random_log(rng, int(rng.integers(1, 31)), m, int(rng.integers(2, 4)))
        for kind in OBJECTIVE_KINDS:
            opt = optimize_weights(log, kind)
            _, grid_best = grid_objective_min(log, kind, resolution)
            excess = opt.objective - grid_best
            worst = max(worst, excess)
            if not excess <= 1e-6:
                res.violations.append({"trial": t, "kind": kind, "log": log.to_dict(),
                                       "w_star": opt.w.tolist(), "excess": excess})
    res.stats = {"max_excess_over_grid": worst, "resolution": resolution}
    return res


def suite_beta_identity(trials: int, rng: np.random.Generator) -> SuiteResult:
    res = SuiteResult("beta-identity", trials)
    worst = 0.0
    for t in range(trials):
        log = _random_instance_log(rng, 6, 4, 50)
        gap = beta_identity_gap(log)
        worst = max(worst, gap)
        if not gap <= 1e-12:
            res.violations.append({"trial": t, "log": log.to_dict(), "gap": gap})
    res.stats["max_gap"] = worst
    return res


_RUNNERS = {
    "paq-equiv": suite_paq_equiv,
    "oracles": suite_oracles,
    "convexity": suite_convexity,
    "dominance": suite_dominance,
    "gradient": suite_gradient,
    "optimality": suite_optimality,
    "beta-identity": suite_beta_identity,
}


def expand_suites(names: Iterable[str]) -> list[str]:
    out: list[str] = []
    for name in names:
        for s in SUITE_GROUPS.get(name, (name,)):
            if s not in _RUNNERS:
                raise ValueError(f"unknown suite {s!r}")
            if s not in out:
                out.append(s)
    return out


def run_suite(name: str, trials: int, seed: int = 0) -> SuiteResult:
    """Run one suite with a generator derived from (seed, suite name)."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}")
    rng = np.random.default_rng([seed, SUITES.index(name)])
    return _RUNNERS[name](trials, rng)


def verification_report(names: Iterable[str], trials: int, seed: int = 0) -> dict:
    results = [run_suite(s, trials, seed) for s in expand_suites(names)]
    return {
        "seed": seed,
        "trials": trials,
        "violations": sum(len(r.violations) for r in results),
        "suites": {r.name: r.to_dict() for r in results},
    }
