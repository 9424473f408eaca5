"""Micro-benchmark: numba kernels vs the pure-NumPy fallbacks.

Run: python3 benchmarks/bench_kernels.py --labels 25000 --repeats 5

Covers the three dual-backend kernels (Levenshtein scan, feature-hash
accumulation, two-means SSE scan). Dense cosine scoring is excluded on
purpose: it is a BLAS matrix-vector product in both modes.
"""

import argparse
import random
import string
import time

import numpy as np

from medquery import _kernels

WORDS = ["pain", "acute", "chronic", "renal", "cardiac", "failure", "injury",
         "increased", "decreased", "disorder", "syndrome", "haemorrhage",
         "infection", "oedema", "rash", "tremor", "insomnia", "fracture"]


def synth_labels(n, rng):
    labels = set()
    while len(labels) < n:
        k = rng.randint(1, 4)
        labels.add(" ".join(rng.choice(WORDS) for _ in range(k)).capitalize())
    return sorted(labels)


def pack_labels(labels):
    offsets = np.zeros(len(labels) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in labels], out=offsets[1:])
    flat = np.array([ord(c) for s in labels for c in s], dtype=np.uint32)
    return flat, offsets


def pack_features(labels):
    feats = []
    for label in labels:
        lowered = label.lower()
        feats.extend(lowered.split())
        feats.extend(lowered[i:i + 2] for i in range(len(lowered) - 1))
        feats.extend(lowered[i:i + 3] for i in range(len(lowered) - 2))
    encoded = [f.encode() for f in feats]
    offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
    np.cumsum([len(b) for b in encoded], out=offsets[1:])
    return np.frombuffer(b"".join(encoded), dtype=np.uint8), offsets


def timeit(fn, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--labels", type=int, default=25000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not _kernels._HAS_NUMBA:
        raise SystemExit("numba not importable; nothing to compare")

    rng = random.Random(args.seed)
    labels = synth_labels(args.labels, rng)
    flat, offsets = pack_labels(labels)
    query = np.array([ord(c) for c in "acute renal failure"], dtype=np.uint32)
    fflat, foffsets = pack_features(labels)
    scores = np.sort(np.random.default_rng(args.seed).uniform(
        -1, 1, size=args.labels))

    cases = [
        ("levenshtein scan",
         lambda: _kernels._levenshtein_numba(query, flat, offsets),
         lambda: _kernels._levenshtein_numpy(query, flat, offsets)),
        ("feature-hash accumulate",
         lambda: _kernels._hash_counts_numba(fflat, foffsets, 256),
         lambda: _kernels._hash_counts_numpy(fflat, foffsets, 256)),
        ("two-means SSE scan",
         lambda: _kernels._split_sse_numba(scores),
         lambda: _kernels._split_sse_numpy(scores)),
    ]

    print(f"{args.labels} labels, best of {args.repeats} runs "
          f"(numba warm-up excluded)")
    print(f"{'kernel':<26} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, numba_fn, numpy_fn in cases:
        numba_fn()  # compile before timing
        t_nb, out_nb = timeit(numba_fn, args.repeats)
        t_np, out_np = timeit(numpy_fn, args.repeats)
        assert np.array_equal(out_nb, out_np), f"{name}: backends disagree"
        print(f"{name:<26} {t_nb * 1000:>8.2f}ms {t_np * 1000:>8.2f}ms "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
