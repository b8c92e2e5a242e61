"""Compiled batch kernels for the all-pairs distance join.

Sequences are packed CSR-style: one flat int32 array of label ids plus an
int64 offsets array. Each kernel fills a block of output rows (one row per
source sequence, one column per target sequence). Kernels release the GIL so
the matcher can run them from a thread pool.
"""

import numpy as np
from numba import njit

_BIG = 1 << 30


@njit(cache=True, nogil=True)
def exact_rows(src_flat, src_off, lo, hi, tgt_flat, tgt_off, max_tgt_len, out):
    n_tgt = tgt_off.shape[0] - 1
    prev = np.empty(max_tgt_len + 1, np.int32)
    curr = np.empty(max_tgt_len + 1, np.int32)
    for r in range(lo, hi):
        a0 = src_off[r]
        la = np.int64(src_off[r + 1] - a0)
        for t in range(n_tgt):
            b0 = tgt_off[t]
            lb = np.int64(tgt_off[t + 1] - b0)
            if la == 0 or lb == 0:
                out[r - lo, t] = la + lb
                continue
            for j in range(lb + 1):
                prev[j] = j
            for i in range(1, la + 1):
                curr[0] = i
                ai = src_flat[a0 + i - 1]
                for j in range(1, lb + 1):
                    cost = 0 if ai == tgt_flat[b0 + j - 1] else 1
                    v = prev[j - 1] + cost
                    if prev[j] + 1 < v:
                        v = prev[j] + 1
                    if curr[j - 1] + 1 < v:
                        v = curr[j - 1] + 1
                    curr[j] = v
                tmp = prev
                prev = curr
                curr = tmp
            out[r - lo, t] = prev[lb]


@njit(cache=True, nogil=True)
def capped_rows(src_flat, src_off, lo, hi, tgt_flat, tgt_off, max_tgt_len, cap, out):
    """Banded DP of width 2*cap+1 with length-difference pruning and
    row-minimum early exit; writes cap+1 where the distance exceeds cap."""
    n_tgt = tgt_off.shape[0] - 1
    exceeded = cap + 1
    prev = np.empty(max_tgt_len + 2, np.int32)
    curr = np.empty(max_tgt_len + 2, np.int32)
    for r in range(lo, hi):
        a0 = src_off[r]
        la = np.int64(src_off[r + 1] - a0)
        for t in range(n_tgt):
            b0 = tgt_off[t]
            lb = np.int64(tgt_off[t + 1] - b0)
            diff = la - lb
            if diff < 0:
                diff = -diff
            if diff > cap:
                out[r - lo, t] = exceeded
                continue
            if la == 0 or lb == 0:
                out[r - lo, t] = la + lb  # <= cap by the length check
                continue
            lim = cap if cap < lb else lb
            for j in range(lim + 1):
                prev[j] = j
            if lim + 1 <= lb:
                prev[lim + 1] = _BIG
            d = np.int64(-1)
            for i in range(1, la + 1):
                jlo = i - cap
                if jlo < 1:
                    jlo = 1
                jhi = i + cap
                if jhi > lb:
                    jhi = lb
                curr[jlo - 1] = _BIG
                rowmin = _BIG
                if i <= cap:
                    curr[0] = i
                    rowmin = i
                ai = src_flat[a0 + i - 1]
                for j in range(jlo, jhi + 1):
                    cost = 0 if ai == tgt_flat[b0 + j - 1] else 1
                    v = prev[j - 1] + cost
                    if prev[j] + 1 < v:
                        v = prev[j] + 1
                    if curr[j - 1] + 1 < v:
                        v = curr[j - 1] + 1
                    curr[j] = v
                    if v < rowmin:
                        rowmin = v
                if jhi + 1 <= lb:
                    curr[jhi + 1] = _BIG
                if rowmin > cap:
                    d = exceeded
                    break
                tmp = prev
                prev = curr
                curr = tmp
            if d < 0:
                d = prev[lb] if prev[lb] <= cap else exceeded
            out[r - lo, t] = d
