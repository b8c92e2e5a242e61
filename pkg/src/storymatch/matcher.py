"""All-pairs Levenshtein join over label sequences: the score set and threshold.

Every source sequence is compared with every target sequence; a run emits
exactly n_src * n_tgt score records in deterministic source-major order, no
matter how many workers computed them, and never materializes the whole
cross product in memory. Distances are computed over whole labels (one label
= one symbol), interned to the grammar's numeric ids before the inner loop.

Capped mode returns exact distances up to a cap and EXCEEDS_CAP beyond it,
using length-difference pruning, banded DP, and row-minimum early exit.
"""

from __future__ import annotations

import json
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import grammar
from .errors import ParseError, ThresholdAboveCap

METRIC = "levenshtein"

EXACT = "exact"
CAPPED = "capped"


class _ExceedsCap:
    __slots__ = ()

    def __repr__(self):
        return "EXCEEDS_CAP"


EXCEEDS_CAP = _ExceedsCap()


class Score(NamedTuple):
    src_doc: str
    src_index: int
    tgt_doc: str
    tgt_index: int
    value: object  # int, or EXCEEDS_CAP in capped mode


# ---------------------------------------------------------------------------
# Single-pair distances (pure Python reference paths)
# ---------------------------------------------------------------------------


def levenshtein(a, b) -> int:
    """Unit-cost edit distance between two symbol sequences."""
    a = list(a)
    b = list(b)
    if not b:
        return len(a)
    if not a:
        return len(b)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        curr = [i] + [0] * len(b)
        for j, y in enumerate(b, start=1):
            cost = 0 if x == y else 1
            curr[j] = min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost)
        prev = curr
    return prev[-1]


def levenshtein_capped(a, b, cap: int):
    """Exact distance when it is <= cap, else EXCEEDS_CAP."""
    if cap < 0:
        raise ValueError("cap must be >= 0")
    a = list(a)
    b = list(b)
    la, lb = len(a), len(b)
    if abs(la - lb) > cap:
        return EXCEEDS_CAP
    if la == 0 or lb == 0:
        return la + lb  # within cap by the length check
    big = cap + 1
    prev = [j if j <= cap else big for j in range(lb + 1)]
    for i in range(1, la + 1):
        curr = [big] * (lb + 1)
        rowmin = big
        if i <= cap:
            curr[0] = rowmin = i
        x = a[i - 1]
        for j in range(max(1, i - cap), min(lb, i + cap) + 1):
            cost = 0 if x == b[j - 1] else 1
            v = min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost)
            curr[j] = v
            if v < rowmin:
                rowmin = v
        if rowmin > cap:
            return EXCEEDS_CAP
        prev = curr
    return prev[lb] if prev[lb] <= cap else EXCEEDS_CAP


# ---------------------------------------------------------------------------
# Batch kernels (numba by default, pure fallback via STORYMATCH_PURE=1)
# ---------------------------------------------------------------------------


def _pure_exact_rows(src_flat, src_off, lo, hi, tgt_flat, tgt_off, max_tgt_len, out):
    for r in range(lo, hi):
        a = src_flat[src_off[r] : src_off[r + 1]].tolist()
        for t in range(tgt_off.shape[0] - 1):
            b = tgt_flat[tgt_off[t] : tgt_off[t + 1]].tolist()
            out[r - lo, t] = levenshtein(a, b)


def _pure_capped_rows(src_flat, src_off, lo, hi, tgt_flat, tgt_off, max_tgt_len, cap, out):
    for r in range(lo, hi):
        a = src_flat[src_off[r] : src_off[r + 1]].tolist()
        for t in range(tgt_off.shape[0] - 1):
            b = tgt_flat[tgt_off[t] : tgt_off[t + 1]].tolist()
            d = levenshtein_capped(a, b, cap)
            out[r - lo, t] = cap + 1 if d is EXCEEDS_CAP else d


def use_pure_kernels() -> bool:
    return os.environ.get("STORYMATCH_PURE", "") not in ("", "0")


def _get_kernels():
    if not use_pure_kernels():
        try:
            from . import _kernels

            return _kernels.exact_rows, _kernels.capped_rows
        except ImportError:
            pass
    return _pure_exact_rows, _pure_capped_rows


def warm_kernels():
    """Trigger kernel compilation on tiny inputs so timings stay honest."""
    flat = np.array([0, 1], dtype=np.int32)
    off = np.array([0, 1, 2], dtype=np.int64)
    out = np.empty((2, 2), dtype=np.int32)
    exact, capped = _get_kernels()
    exact(flat, off, 0, 2, flat, off, 1, out)
    capped(flat, off, 0, 2, flat, off, 1, 1, out)


# ---------------------------------------------------------------------------
# Match runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatchCounts:
    n_src: int
    n_tgt: int
    total: int


@dataclass
class MatchRun:
    source_doc: str
    target_doc: str
    metric: str
    mode: str  # EXACT or CAPPED
    cap: int | None
    counts: MatchCounts
    src_seqs: list
    tgt_seqs: list
    _rows: Iterator

    def rows(self):
        """Yield (source position, int32 values over all targets), in order.

        In capped mode a value of cap+1 means the distance exceeds the cap.
        Single-use, like the scores stream.
        """
        return self._rows

    @property
    def scores(self):
        cap = self.cap
        for i, values in self._rows:
            src = self.src_seqs[i]
            for j, v in enumerate(values.tolist()):
                if cap is not None and v > cap:
                    v = EXCEEDS_CAP
                yield Score(src.doc_id, src.index, self.tgt_seqs[j].doc_id, self.tgt_seqs[j].index, v)


def _pack(seqs):
    ids = []
    off = np.zeros(len(seqs) + 1, dtype=np.int64)
    for i, s in enumerate(seqs):
        ids.extend(grammar.encode_ids(s.seq))
        off[i + 1] = len(ids)
    return np.array(ids, dtype=np.int32), off


def _single_doc(seqs, side: str) -> str:
    docs = {s.doc_id for s in seqs}
    if len(docs) > 1:
        raise ValueError(f"{side} sequences span multiple documents: {sorted(docs)}")
    return docs.pop() if docs else ""


def _compute_rows(src_seqs, tgt_seqs, cap, workers, block_rows):
    src_flat, src_off = _pack(src_seqs)
    tgt_flat, tgt_off = _pack(tgt_seqs)
    n_src = len(src_seqs)
    max_tgt_len = int((tgt_off[1:] - tgt_off[:-1]).max()) if len(tgt_seqs) else 0
    exact_rows, capped_rows = _get_kernels()

    def compute(lo, hi):
        out = np.empty((hi - lo, len(tgt_seqs)), dtype=np.int32)
        if cap is None:
            exact_rows(src_flat, src_off, lo, hi, tgt_flat, tgt_off, max_tgt_len, out)
        else:
            capped_rows(src_flat, src_off, lo, hi, tgt_flat, tgt_off, max_tgt_len, cap, out)
        return out

    blocks = [(lo, min(lo + block_rows, n_src)) for lo in range(0, n_src, block_rows)]
    if workers <= 1 or len(blocks) <= 1:
        for lo, hi in blocks:
            out = compute(lo, hi)
            for r in range(lo, hi):
                yield r, out[r - lo]
        return
    # Source blocks fan out to a thread pool (the kernels drop the GIL) and
    # results are drained strictly in block order with a bounded window.
    with ThreadPoolExecutor(max_workers=workers) as pool:
        window: deque = deque()
        next_block = 0
        while next_block < len(blocks) or window:
            while next_block < len(blocks) and len(window) < workers + 2:
                lo, hi = blocks[next_block]
                window.append((lo, hi, pool.submit(compute, lo, hi)))
                next_block += 1
            lo, hi, fut = window.popleft()
            out = fut.result()
            for r in range(lo, hi):
                yield r, out[r - lo]


def match_all(src_seqs, tgt_seqs, cap: int | None = None, workers: int = 1,
              block_rows: int = 64) -> MatchRun:
    """Compare every source sequence with every target sequence.

    cap=None computes full exact distances; otherwise distances above cap
    are reported as EXCEEDS_CAP. The score stream is emitted in source-major,
    target-minor order regardless of worker count.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if cap is not None and cap < 0:
        raise ValueError("cap must be >= 0")
    src_seqs = list(src_seqs)
    tgt_seqs = list(tgt_seqs)
    counts = MatchCounts(len(src_seqs), len(tgt_seqs), len(src_seqs) * len(tgt_seqs))
    return MatchRun(
        source_doc=_single_doc(src_seqs, "source"),
        target_doc=_single_doc(tgt_seqs, "target"),
        metric=METRIC,
        mode=EXACT if cap is None else CAPPED,
        cap=cap,
        counts=counts,
        src_seqs=src_seqs,
        tgt_seqs=tgt_seqs,
        _rows=_compute_rows(src_seqs, tgt_seqs, cap, workers, block_rows),
    )


def filter_threshold(run: MatchRun, theta: int):
    """Records with value <= theta, order preserved.

    A capped run cannot answer a threshold above its cap.
    """
    if theta < 0:
        raise ValueError("theta must be >= 0")
    if run.cap is not None and theta > run.cap:
        raise ThresholdAboveCap(
            f"threshold {theta} exceeds the run cap {run.cap}; rerun with a higher cap or exact mode"
        )
    return [s for s in run.scores if s.value is not EXCEEDS_CAP and s.value <= theta]


def comparison_count(n_src: int, n_tgt: int) -> int:
    """Total comparisons for an all-pairs run over two passage sets."""
    if n_src < 0 or n_tgt < 0:
        raise ValueError("passage counts must be non-negative")
    return n_src * n_tgt


# ---------------------------------------------------------------------------
# Scores file: TSV (or JSONL), one record per comparison
# ---------------------------------------------------------------------------


def write_scores(run: MatchRun, out, theta: int | None = None, fmt: str = "tsv"):
    """Stream a run to disk; returns (total records, matches at theta).

    TSV columns: src_doc, src_index, tgt_doc, tgt_index, score. A score above
    the cap is written as `>CAP` (JSONL: null).
    """
    if fmt not in ("tsv", "jsonl"):
        raise ValueError(f"unknown scores format {fmt!r}")
    cap = run.cap
    total = 0
    matches = 0
    fh = open(out, "w", encoding="utf-8", newline="\n") if not hasattr(out, "write") else out
    try:
        tgt_keys = [(s.doc_id, s.index) for s in run.tgt_seqs]
        for i, values in run.rows():
            src = run.src_seqs[i]
            vals = values.tolist()
            if theta is not None:
                matches += int(np.count_nonzero(values <= theta))
            lines = []
            for (tgt_doc, tgt_index), v in zip(tgt_keys, vals):
                exceeded = cap is not None and v > cap
                if fmt == "tsv":
                    score = f">{cap}" if exceeded else str(v)
                    lines.append(f"{src.doc_id}\t{src.index}\t{tgt_doc}\t{tgt_index}\t{score}")
                else:
                    record = {
                        "src_doc": src.doc_id,
                        "src_index": src.index,
                        "tgt_doc": tgt_doc,
                        "tgt_index": tgt_index,
                        "score": None if exceeded else v,
                    }
                    lines.append(json.dumps(record, ensure_ascii=False))
            total += len(vals)
            if lines:
                fh.write("\n".join(lines) + "\n")
    finally:
        if fh is not out:
            fh.close()
    return total, matches


def read_scores(path):
    """Iterate Score records from a TSV or JSONL scores file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                if line.lstrip().startswith("{"):
                    obj = json.loads(line)
                    value = EXCEEDS_CAP if obj["score"] is None else int(obj["score"])
                    yield Score(obj["src_doc"], int(obj["src_index"]), obj["tgt_doc"],
                                int(obj["tgt_index"]), value)
                else:
                    src_doc, src_index, tgt_doc, tgt_index, score = line.split("\t")
                    value = EXCEEDS_CAP if score.startswith(">") else int(score)
                    yield Score(src_doc, int(src_index), tgt_doc, int(tgt_index), value)
            except (ValueError, KeyError, json.JSONDecodeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad score record: {exc}") from None
