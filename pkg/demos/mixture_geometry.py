"""Geometric vs. linear mixing of a few distributions.

Each mixture is the minimizer of a weighted divergence: the geometric one of
sum_i w_i D(Q || P_i), the linear one of sum_i w_i D(P_i || Q).  We check both
against a brute-force search and then look at the logistic (PAQ) mixer,
which on a binary alphabet is the geometric mixture in disguise.

    python demos/mixture_geometry.py
"""

import numpy as np

from geomix.core import Distribution, PredictionSet, kl_divergence
from geomix.mixers import mix_geometric, mix_linear, mix_logistic
from geomix.optlab import grid_minimize_geo, grid_minimize_lin

ps = PredictionSet([
    Distribution([0.70, 0.20, 0.10]),
    Distribution([0.10, 0.30, 0.60]),
    Distribution([0.25, 0.50, 0.25]),
])
w = np.array([0.5, 0.3, 0.2])

geo, lin = mix_geometric(ps, w), mix_linear(ps, w)
print("models:")
for d in ps.dists:
    print("   ", np.round(d.probs, 3))
print("weights:", w)
print()
print("geometric mixture:", np.round(geo.probs, 4))
print("  grid argmin of sum w D(Q||P_i):", np.round(grid_minimize_geo(ps, w, 1e-3).probs, 4))
print("linear mixture:   ", np.round(lin.probs, 4))
print("  grid argmin of sum w D(P_i||Q):", np.round(grid_minimize_lin(ps, w, 1e-3).probs, 4))

# the two objectives, evaluated at both mixtures
def geo_obj(q):
    return sum(wi * kl_divergence(q, p) for wi, p in zip(w, ps.dists))

def lin_obj(q):
    return sum(wi * kl_divergence(p, q) for wi, p in zip(w, ps.dists))

print()
print(f"{'':20s}{'sum w D(Q||P)':>16s}{'sum w D(P||Q)':>16s}")
for name, q in (("at geometric", geo), ("at linear", lin)):
    print(f"{name:20s}{geo_obj(q):16.5f}{lin_obj(q):16.5f}")

# binary alphabet: stretch/squash mixing equals geometric mixing on the simplex
rng = np.random.default_rng(1)
gaps = []
for _ in range(1000):
    m = rng.integers(1, 9)
    bps = PredictionSet.binary(rng.uniform(0.01, 0.99, m))
    wb = rng.dirichlet(np.ones(m))
    gaps.append(abs(mix_logistic(bps, wb)[1] - mix_geometric(bps, wb)[1]))
print()
print(f"logistic vs geometric over 1000 random binary sets: max gap {max(gaps):.2e}")

# off the simplex they part ways: logistic weights are not normalized
bps = PredictionSet.binary([0.8, 0.7])
print("w = (1, 1):  logistic p1 = %.4f, geometric p1 = %.4f"
      % (mix_logistic(bps, [1, 1])[1], mix_geometric(bps, [1, 1])[1]))
