"""Acceptance criteria, each at its stated tolerance.

Corpus criteria read the Calgary Corpus from the directory named by the
CALGARY_CORPUS environment variable; without it they fail.  A PASS/FAIL line
per criterion is printed in the terminal summary.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from geomix import optlab
from geomix.cli import run_bench
from geomix.engine import coding_cost, compress, decompress
from geomix.mixers import KINDS
from conftest import record

CALGARY_FILES = ("bib", "book1", "book2", "geo", "news", "obj1", "obj2",
                 "paper1", "paper2", "pic", "progc", "progl", "progp", "trans")
REFERENCE_AVERAGE = {"geometric": 2.187, "linear": 2.231, "beta": 2.265}
RUNTIME_BUDGET = 300.0
SEED = 2024

_timing: dict[str, float] = {}


def _corpus_dir() -> Path:
    env = os.environ.get("CALGARY_CORPUS")
    if not env:
        raise FileNotFoundError("CALGARY_CORPUS is not set")
    d = Path(env)
    missing = [f for f in CALGARY_FILES if not (d / f).is_file()]
    if missing:
        raise FileNotFoundError(f"{d} lacks Calgary files: {', '.join(missing)}")
    return d


@pytest.fixture(scope="module")
def calgary():
    try:
        d = _corpus_dir()
    except FileNotFoundError as e:
        return e
    results = {}
    start = time.perf_counter()
    for name in CALGARY_FILES:
        data = (d / name).read_bytes()
        for kind in KINDS:
            frame = compress(data, kind)
            ok = decompress(frame.to_bytes()) == data
            results[name, kind] = {"size": len(data), "payload": len(frame.payload), "roundtrip": ok}
    roundtrip_time = time.perf_counter() - start
    for name in CALGARY_FILES:
        data = (d / name).read_bytes()
        for kind in KINDS:
            ideal, quantized = coding_cost(data, kind)
            results[name, kind].update(ideal=ideal, quantized=quantized)
    return {"dir": d, "results": results, "roundtrip_time": roundtrip_time}


def _need(calgary, criterion):
    if isinstance(calgary, Exception):
        record(criterion, False, f"Calgary Corpus unavailable ({calgary})")
        pytest.fail(f"criterion {criterion} needs the Calgary Corpus: {calgary}")
    return calgary


def test_c1a_random_strings_roundtrip():
    rng = np.random.default_rng(SEED)
    strings = [rng.integers(0, 256, int(rng.integers(0, 4097)), dtype=np.uint8).tobytes() for _ in range(10_000)]
    failures = 0
    start = time.perf_counter()
    for kind in KINDS:
        for s in strings:
            if decompress(compress(s, kind)) != s:
                failures += 1
    elapsed = time.perf_counter() - start
    _timing["1a"] = elapsed
    ok = failures == 0 and elapsed < RUNTIME_BUDGET
    record("1a", ok, f"10000 random strings x 4 mixers: {failures} mismatches, {elapsed:.1f} s")
    assert failures == 0
    assert elapsed < RUNTIME_BUDGET


def test_c1b_calgary_roundtrip(calgary):
    c = _need(calgary, "1b")
    bad = [f"{n}/{k}" for (n, k), r in c["results"].items() if not r["roundtrip"]]
    total = c["roundtrip_time"] + _timing.get("1a", 0.0)
    ok = not bad and total < RUNTIME_BUDGET
    record("1b", ok, f"14 files x 4 mixers: {len(bad)} mismatches; 1a+1b runtime {total:.1f} s")
    assert not bad
    assert total < RUNTIME_BUDGET


def test_c2_reference_averages(calgary):
    c = _need(calgary, "2")
    report = run_bench(c["dir"], ["geometric", "linear", "beta"], framed=False)
    assert [r.name for r in report.rows] == sorted(CALGARY_FILES)
    avg = {m: report.average(m) for m in report.mixers}
    gaps = {m: avg[m] - REFERENCE_AVERAGE[m] for m in avg}
    ok = all(abs(g) <= 0.10 for g in gaps.values())
    detail = ", ".join(f"{m[:3].upper()} {avg[m]:.3f} (reference {REFERENCE_AVERAGE[m]}, {gaps[m]:+.3f})" for m in avg)
    record("2", ok, detail)
    assert ok, detail


def test_c3_ordering(calgary):
    c = _need(calgary, "3")
    res = c["results"]
    avg = {k: np.mean([res[n, k]["ideal"] / res[n, k]["size"] for n in CALGARY_FILES])
           for k in ("geometric", "linear", "beta")}
    ok = avg["geometric"] < avg["linear"] < avg["beta"]
    record("3", ok, f"GEO {avg['geometric']:.4f} < LIN {avg['linear']:.4f} < BETA {avg['beta']:.4f}")
    assert ok


def _suite(criterion, name, trials, label):
    res = optlab.run_suite(name, trials, SEED)
    ok = res.ok
    stats = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in res.stats.items())
    record(criterion, ok, f"{label}: {len(res.violations)} violations ({stats})")
    assert ok, res.violations[:3]


def test_c4_paq_equivalence():
    _suite("4", "paq-equiv", 1000, "1000 binary instances, |logistic - geometric| < 1e-12")


def test_c5_convexity():
    _suite("5", "convexity", 1000, "1000 instances x 2 objectives")


def test_c6_gradient():
    _suite("6", "gradient", 500, "500 instances x 2 objectives, rel. error < 1e-6")


def test_c7_divergence_oracles():
    _suite("7", "oracles", 200, "200 instances x 2 mixtures within 2 x 1e-3")


def test_c8_optimizer_optimality():
    _suite("8", "optimality", 50, "50 logs x 2 objectives vs grid 1e-3, slack 1e-6 bits")


def test_c9_beta_identity():
    _suite("9", "beta-identity", 100, "100 logs, every step within 1e-12")


def test_c10_two_part_dominance():
    _suite("10", "dominance", 1000, "1000 instances")


def test_c11_coder_fidelity(calgary):
    c = _need(calgary, "11")
    worst_slack, worst_excess, failures = -np.inf, -np.inf, []
    for (name, kind), r in c["results"].items():
        slack = r["quantized"] - r["ideal"]
        excess = 8 * r["payload"] - (r["ideal"] + 40 + slack)
        rel = slack / r["ideal"]
        worst_slack = max(worst_slack, rel)
        worst_excess = max(worst_excess, excess)
        if excess > 0 or not rel < 0.005:
            failures.append(f"{name}/{kind}")
    ok = not failures
    record("11", ok, f"payload <= ideal + 40 + slack on 14 files x 4 mixers; worst slack {100 * worst_slack:.4f}%, "
                     f"worst margin {worst_excess:.1f} bits; failures: {failures or 'none'}")
    assert ok
