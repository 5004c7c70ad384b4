"""Fused per-bit pipeline: predict, select weights, mix, code, update.

One jitted loop serves the three modes (ideal accounting, encode, decode) so
the encoder and decoder cannot drift apart.  The mixer arithmetic is the
binary specialization of :mod:`geomix.mixers`; tests compare its trace with
the generic implementation step by step.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .coder import decode_bit_jit, decoder_init_jit, encode_bit_jit, flush_jit, quantize_jit
from .core import P_MAX, P_MIN
from .models import (
    N_MODELS,
    N_ORDERS,
    context_base,
    count_update,
    match_advance,
    match_bucket_jit,
    match_hash,
    match_p1,
    prefix_slot,
    MIN_MATCH,
)

MODE_IDEAL, MODE_ENCODE, MODE_DECODE = 0, 1, 2
GEO, LIN, BETA, LOGISTIC = 0, 1, 2, 3

N_WEIGHT_SETS = 256 * 4
TRACE_COLS = N_MODELS + 4  # model p1s, table index, mixed p1, code length, bit

INV_LN2 = 1.0 / math.log(2.0)
LN_HALF_P = math.log(0.5)


@njit(cache=True, nogil=True)
def floor_renormalize_jit(w, eps):
    # pinned entries tracked in a bitmask; m <= 63
    m = w.shape[0]
    pinned = 0
    for i in range(m):
        if w[i] <= eps:
            w[i] = eps
            pinned |= 1 << i
    for _ in range(m):
        free_sum = 0.0
        npinned = 0
        for i in range(m):
            if (pinned >> i) & 1:
                npinned += 1
            else:
                free_sum += w[i]
        if free_sum <= 0.0:
            for i in range(m):
                w[i] = 1.0 / m
            return
        scale = (1.0 - eps * npinned) / free_sum
        fresh = False
        for i in range(m):
            if (pinned >> i) & 1:
                w[i] = eps
            else:
                w[i] *= scale
                if w[i] < eps:
                    pinned |= 1 << i
                    fresh = True
        if not fresh:
            return
    for i in range(m):
        if (pinned >> i) & 1:
            w[i] = eps


@njit(cache=True, nogil=True)
def _squash(t):
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


@njit(cache=True, nogil=True)
def run(data, n, mode, kind, alpha, eps, counts, offsets, head, chain, depth,
        weights, prior, discount, ln_num, ln_den, payload, out, trace, do_trace):
    """Code ``n`` bytes.

    Returns (ideal bits, quantized bits, payload length, decoder overrun).
    The two bit totals sum -log2 of the mixed and of the 16-bit quantized
    probability of every coded bit; both are only accumulated in ideal mode
    or when tracing.
    """
    m = N_MODELS
    est = np.zeros(6, dtype=np.int64)
    est[1] = 0xFFFFFFFF
    dst = np.zeros(4, dtype=np.int64)
    if mode == MODE_DECODE and n > 0:
        decoder_init_jit(dst, payload)
    mst = np.zeros(2, dtype=np.int64)
    bases = np.zeros(N_ORDERS, dtype=np.int64)
    slots = np.zeros(N_ORDERS, dtype=np.int64)
    p1s = np.zeros(m)
    lp1 = np.zeros(m)
    lp0 = np.zeros(m)
    total = 0.0
    qtotal = 0.0
    step = 0
    count_bits = mode == MODE_IDEAL or do_trace
    cost = 0.0

    for i in range(n):
        for o in range(N_ORDERS):
            bases[o] = context_base(o, data, i, offsets)
        prev = np.int64(data[i - 1]) if i > 0 else 0
        widx = prev * 4 + match_bucket_jit(mst[1])
        w = weights[widx]
        if mst[1] > 0:
            ln_hit = math.log(1.0 - 1.0 / mst[1])
            ln_miss = -math.log(mst[1])
        else:
            ln_hit = LN_HALF_P
            ln_miss = LN_HALF_P
        bp = 1
        for j in range(8):
            pidx = prefix_slot(bp, j)
            for o in range(N_ORDERS):
                s = bases[o] + pidx
                slots[o] = s
                c0 = np.int64(counts[s, 0])
                c1 = np.int64(counts[s, 1])
                lt = ln_den[c0 + c1]
                lp1[o] = ln_num[c1] - lt
                lp0[o] = ln_num[c0] - lt
                p1s[o] = (c1 + prior) / (c0 + c1 + 2.0 * prior)
            pm = match_p1(data, mst, bp, j)
            p1s[m - 1] = pm
            if pm == 0.5:
                lp1[m - 1] = LN_HALF_P
                lp0[m - 1] = LN_HALF_P
            elif pm > 0.5:
                lp1[m - 1] = ln_hit
                lp0[m - 1] = ln_miss
            else:
                lp1[m - 1] = ln_miss
                lp0[m - 1] = ln_hit

            wsum = 0.0
            for k in range(m):
                wsum += w[k]
            s1 = 0.0
            s0 = 0.0
            if kind == GEO:
                for k in range(m):
                    s1 += w[k] * lp1[k]
                    s0 += w[k] * lp0[k]
                s1 /= wsum
                s0 /= wsum
                pu = _squash(s1 - s0)
            elif kind == LOGISTIC:
                t = 0.0
                for k in range(m):
                    t += w[k] * (lp1[k] - lp0[k])
                pu = _squash(t)
            else:
                for k in range(m):
                    s1 += w[k] * p1s[k]
                pu = s1 / wsum
            p = min(max(pu, P_MIN), P_MAX)

            if mode == MODE_ENCODE:
                bit = (np.int64(data[i]) >> (7 - j)) & 1
                encode_bit_jit(est, out, quantize_jit(p), bit)
            elif mode == MODE_DECODE:
                bit = decode_bit_jit(dst, payload, quantize_jit(p))
            else:
                bit = (np.int64(data[i]) >> (7 - j)) & 1
            if count_bits:
                cost = -math.log(p if bit == 1 else 1.0 - p) * INV_LN2
                total += cost
                q = quantize_jit(p)
                qtotal -= math.log((q if bit == 1 else 65536 - q) / 65536.0) * INV_LN2
            if do_trace:
                for k in range(m):
                    trace[step, k] = p1s[k]
                trace[step, m] = widx
                trace[step, m + 1] = p
                trace[step, m + 2] = cost
                trace[step, m + 3] = bit
            step += 1

            if kind == GEO:
                # gradient of ln f: centred log-probs minus their mixture mean
                for k in range(m):
                    c1 = lp1[k] - s1
                    c0 = lp0[k] - s0
                    cx = c1 if bit == 1 else c0
                    w[k] += alpha * (cx - (pu * c1 + (1.0 - pu) * c0)) / wsum
                floor_renormalize_jit(w, eps)
            elif kind == LIN:
                f = 0.0
                for k in range(m):
                    f += w[k] * (p1s[k] if bit == 1 else 1.0 - p1s[k])
                f /= wsum
                for k in range(m):
                    px = p1s[k] if bit == 1 else 1.0 - p1s[k]
                    w[k] += alpha * (px - f) / (f * wsum)
                floor_renormalize_jit(w, eps)
            elif kind == BETA:
                f = 0.0
                for k in range(m):
                    f += (w[k] / wsum) * (p1s[k] if bit == 1 else 1.0 - p1s[k])
                for k in range(m):
                    px = p1s[k] if bit == 1 else 1.0 - p1s[k]
                    w[k] = (w[k] / wsum) * px / f
                if eps > 0.0:
                    floor_renormalize_jit(w, eps)
            else:
                err = bit - p
                for k in range(m):
                    w[k] += alpha * err * (lp1[k] - lp0[k])

            for o in range(N_ORDERS):
                count_update(counts, slots[o], bit, discount)
            bp = (bp << 1) | bit

        if mode == MODE_DECODE:
            data[i] = bp & 0xFF
        match_advance(data, i + 1, head, chain, mst, depth)

    out_len = 0
    if mode == MODE_ENCODE and n > 0:
        out_len = flush_jit(est, out)
    return total, qtotal, out_len, dst[3]


@njit(cache=True, nogil=True)
def reset_touched(data, n, counts, offsets, head):
    """Zero exactly the count slots and match-index cells a run over data[:n] wrote."""
    bases = np.zeros(N_ORDERS, dtype=np.int64)
    for i in range(n):
        for o in range(N_ORDERS):
            bases[o] = context_base(o, data, i, offsets)
        bp = 1
        byte = np.int64(data[i])
        for j in range(8):
            pidx = prefix_slot(bp, j)
            for o in range(N_ORDERS):
                counts[bases[o] + pidx, 0] = 0
                counts[bases[o] + pidx, 1] = 0
            bp = (bp << 1) | ((byte >> (7 - j)) & 1)
        if i + 1 >= MIN_MATCH:
            head[match_hash(data, i + 1)] = 0
