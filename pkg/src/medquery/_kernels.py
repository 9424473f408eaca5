"""Hot numeric kernels with two interchangeable backends.

Backend selection is controlled by the ``MEDQUERY_KERNELS`` environment
variable: ``numba`` (JIT-compiled, parallel), ``numpy`` (pure-NumPy
fallback), or ``auto`` (default; numba when importable). Both backends
produce bit-identical outputs:

- Levenshtein distances are integer dynamic programming either way.
- Feature-hash accumulation adds exact small integers (+/-1) into
  float64 buckets, so the result is order-independent.
- Two-means SSE scans fold prefix sums left-to-right in both backends.

Dense cosine scoring is deliberately NOT reimplemented here: it is a
matrix-vector product and BLAS already is the fast path (see
benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import os

import numpy as np

FNV_OFFSET = np.uint64(0xCBF29CE484222325)
FNV_PRIME = np.uint64(0x100000001B3)
_MASK64 = 0xFFFFFFFFFFFFFFFF

_choice = os.environ.get("MEDQUERY_KERNELS", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"MEDQUERY_KERNELS must be 'auto', 'numba' or 'numpy', got {_choice!r}"
    )

_HAS_NUMBA = False
if _choice in ("auto", "numba"):
    try:
        from numba import njit, prange

        _HAS_NUMBA = True
    except ImportError:
        if _choice == "numba":
            raise


# ---------------------------------------------------------------------------
# Pure-NumPy fallbacks
# ---------------------------------------------------------------------------

def _levenshtein_numpy(query: np.ndarray, labels_flat: np.ndarray,
                       offsets: np.ndarray) -> np.ndarray:
    """Edit distance from one query to many labels, vectorized across labels.

    Labels are right-padded into a matrix; the DP advances one query
    character at a time over all labels at once. The in-row dependency
    cur[j] = min(cur[j], cur[j-1] + 1) is resolved with the classic
    prefix-minimum identity min_k (cur[k] + (j - k)).
    """
    n_labels = len(offsets) - 1
    lengths = np.diff(offsets)
    out = np.empty(n_labels, dtype=np.int64)
    if n_labels == 0:
        return out
    m = len(query)
    if m == 0:
        out[:] = lengths
        return out
    max_len = int(lengths.max())
    if max_len == 0:
        out[:] = m
        return out
    # Pad with 0, which never equals a real code point from a non-empty cell.
    padded = np.zeros((n_labels, max_len), dtype=np.uint32)
    for i in range(n_labels):
        padded[i, : lengths[i]] = labels_flat[offsets[i]: offsets[i + 1]]

    col = np.arange(max_len + 1, dtype=np.int64)
    prev = np.broadcast_to(col, (n_labels, max_len + 1)).copy()
    cur = np.empty_like(prev)
    for i in range(1, m + 1):
        cur[:, 0] = i
        subst = prev[:, :-1] + (padded != query[i - 1])
        cur[:, 1:] = np.minimum(prev[:, 1:] + 1, subst)
        np.minimum.accumulate(cur - col, axis=1, out=cur)
        cur += col
        prev, cur = cur, prev
    out[:] = prev[np.arange(n_labels), lengths]
    return out


def _hash_counts_numpy(feature_bytes: np.ndarray, offsets: np.ndarray,
                       dims: int) -> np.ndarray:
    """FNV-1a 64 feature hashing into signed float64 count buckets."""
    counts = np.zeros(dims, dtype=np.float64)
    data = feature_bytes.tolist()
    for f in range(len(offsets) - 1):
        h = 0xCBF29CE484222325
        for k in range(offsets[f], offsets[f + 1]):
            h = ((h ^ data[k]) * 0x100000001B3) & _MASK64
        bucket = h % dims
        counts[bucket] += 1.0 if (h >> 63) == 0 else -1.0
    return counts


def _split_sse_numpy(sorted_scores: np.ndarray) -> np.ndarray:
    """Total within-group SSE for every contiguous low/high split.

    Entry k-1 is the SSE of low = first k points, high = rest. Prefix
    sums are folded left-to-right (np.add.accumulate) to match the
    numba backend bit-for-bit.
    """
    n = len(sorted_scores)
    s1 = np.add.accumulate(sorted_scores)
    s2 = np.add.accumulate(sorted_scores * sorted_scores)
    total1, total2 = s1[-1], s2[-1]
    k = np.arange(1, n, dtype=np.float64)
    low1, low2 = s1[:-1], s2[:-1]
    sse_low = low2 - (low1 * low1) / k
    hi1 = total1 - low1
    hi2 = total2 - low2
    sse_high = hi2 - (hi1 * hi1) / (np.float64(n) - k)
    return sse_low + sse_high


# ---------------------------------------------------------------------------
# Numba kernels
# ---------------------------------------------------------------------------

if _HAS_NUMBA:

    @njit(cache=True, parallel=True)
    def _levenshtein_numba(query, labels_flat, offsets):  # pragma: no cover
        n_labels = len(offsets) - 1
        m = len(query)
        out = np.empty(n_labels, dtype=np.int64)
        for t in prange(n_labels):
            start, end = offsets[t], offsets[t + 1]
            n = end - start
            if m == 0:
                out[t] = n
                continue
            if n == 0:
                out[t] = m
                continue
            prev = np.arange(n + 1)
            cur = np.empty(n + 1, dtype=np.int64)
            for i in range(1, m + 1):
                cur[0] = i
                qc = query[i - 1]
                for j in range(1, n + 1):
                    cost = prev[j - 1] + (labels_flat[start + j - 1] != qc)
                    d = prev[j] + 1
                    if cur[j - 1] + 1 < d:
                        d = cur[j - 1] + 1
                    if cost < d:
                        d = cost
                    cur[j] = d
                prev, cur = cur, prev
            out[t] = prev[n]
        return out

    @njit(cache=True)
    def _hash_counts_numba(feature_bytes, offsets, dims):  # pragma: no cover
        counts = np.zeros(dims, dtype=np.float64)
        offset = np.uint64(0xCBF29CE484222325)
        prime = np.uint64(0x100000001B3)
        udims = np.uint64(dims)
        one = np.uint64(1)
        shift = np.uint64(63)
        for f in range(len(offsets) - 1):
            h = offset
            for k in range(offsets[f], offsets[f + 1]):
                h = (h ^ np.uint64(feature_bytes[k])) * prime
            bucket = np.int64(h % udims)
            if (h >> shift) & one:
                counts[bucket] -= 1.0
            else:
                counts[bucket] += 1.0
        return counts

    @njit(cache=True)
    def _split_sse_numba(sorted_scores):  # pragma: no cover
        n = len(sorted_scores)
        s1 = np.empty(n, dtype=np.float64)
        s2 = np.empty(n, dtype=np.float64)
        acc1 = 0.0
        acc2 = 0.0
        for i in range(n):
            v = sorted_scores[i]
            acc1 += v
            acc2 += v * v
            s1[i] = acc1
            s2[i] = acc2
        total1, total2 = s1[n - 1], s2[n - 1]
        out = np.empty(n - 1, dtype=np.float64)
        for k in range(1, n):
            low1, low2 = s1[k - 1], s2[k - 1]
            sse_low = low2 - (low1 * low1) / k
            hi1 = total1 - low1
            hi2 = total2 - low2
            sse_high = hi2 - (hi1 * hi1) / (n - k)
            out[k - 1] = sse_low + sse_high
        return out


_USE_NUMBA = _HAS_NUMBA and _choice in ("auto", "numba")


def backend_name() -> str:
    return "numba" if _USE_NUMBA else "numpy"


def levenshtein_distances(query: np.ndarray, labels_flat: np.ndarray,
                          offsets: np.ndarray) -> np.ndarray:
    """Distances from `query` (uint32 code points) to each packed label."""
    if _USE_NUMBA:
        return _levenshtein_numba(query, labels_flat, offsets)
    return _levenshtein_numpy(query, labels_flat, offsets)


def hash_counts(feature_bytes: np.ndarray, offsets: np.ndarray,
                dims: int) -> np.ndarray:
    """Signed FNV-1a bucket counts for packed UTF-8 feature byte runs."""
    if _USE_NUMBA:
        return _hash_counts_numba(feature_bytes, offsets, dims)
    return _hash_counts_numpy(feature_bytes, offsets, dims)


def split_sse(sorted_scores: np.ndarray) -> np.ndarray:
    """SSE of every contiguous split of an ascending score array (len n-1)."""
    if _USE_NUMBA:
        return _split_sse_numba(sorted_scores)
    return _split_sse_numpy(sorted_scores)
