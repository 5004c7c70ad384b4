"""How far is online weight learning from the best fixed weights?

We trace the compressor on a text, keep the steps that used one weight-table
slot, and treat those model predictions as a fixed log.  The batch code
length is convex in the weights, so projected gradient descent finds the
unique best fixed w*.  The online mixers never see the future, yet they
can beat w* because their weights track a changing source.

    python demos/offline_weights.py
"""

from collections import Counter

import numpy as np

from geomix.engine import trace
from geomix.optlab import (
    PredictionLog,
    batch_objective,
    convexity_probe,
    optimize_weights,
)

rng = np.random.default_rng(3)
words = b"in the beginning was the word and the word was with the code".split()
text = b" ".join(words[i] for i in rng.integers(0, len(words), 6000))

for kind in ("geometric", "linear"):
    rows = trace(text, kind[:3])
    slot, count = Counter(rows[:, 8].astype(int).tolist()).most_common(1)[0]
    sel = rows[rows[:, 8] == slot]
    log = PredictionLog.from_trace(sel)

    opt = optimize_weights(log, kind)
    uniform = batch_objective(log, np.full(8, 1 / 8), kind)
    online = sel[:, 10].sum()
    print(f"{kind}: weight slot {slot} (prev byte {slot // 4!r}, bucket {slot % 4}), {count} bit steps")
    print(f"  uniform weights  {uniform:9.1f} bits")
    print(f"  best fixed w*    {opt.objective:9.1f} bits  ({opt.iterations} iterations)")
    print(f"  online mixer     {online:9.1f} bits")
    print("  w* =", np.round(opt.w, 3), "(orders 0-6, match)")

    rep = convexity_probe(log, kind, 20, rng)
    print(f"  convexity probe: {rep.violations} violations, min Hessian eigenvalue "
          f"{rep.min_hessian_eigenvalue:.3g}, degenerate {rep.degenerate}/20")
    print()
