"""Stage 2: bivariate scoring, exact two-means relevance cut, ranking.

Every current PT gets a pair of cosine similarities (to the query
vector and to the best-match vector) whose arithmetic mean is the
combined score. The exact 1-D 2-means partition of the combined scores
keeps the high cluster; retained terms are ranked by similarity to the
best match, descending.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .embedding import EmbeddingSet
from .errors import InputError
from .terminology import Vocabulary

DEGENERATE_SPREAD = 1e-12


@dataclass(frozen=True)
class ScoredTerm:
    code: str
    label: str
    sim_query: float
    sim_best: float
    combined: float
    retained: bool = False


@dataclass(frozen=True)
class ClusterSplit:
    split_value: float
    low_count: int
    high_count: int
    sse: float


def score_all(query_vector: np.ndarray, best_vector: np.ndarray,
              emb: EmbeddingSet, vocab: Vocabulary) -> list[ScoredTerm]:
    """One ScoredTerm per current PT, in vocabulary order, retained unset."""
    if len(query_vector) != emb.dims or len(best_vector) != emb.dims:
        raise InputError(
            f"vector dims {len(query_vector)}/{len(best_vector)} "
            f"do not match embedding dims {emb.dims}")
    terms = vocab.current_pts
    rows = [emb.row_of(t.code) for t in terms]
    sub = emb.matrix64()[rows]
    sim_q = np.clip(sub @ query_vector.astype(np.float64), -1.0, 1.0)
    sim_b = np.clip(sub @ best_vector.astype(np.float64), -1.0, 1.0)
    combined = (sim_q + sim_b) / 2.0
    return [
        ScoredTerm(code=t.code, label=t.label, sim_query=float(sim_q[i]),
                   sim_best=float(sim_b[i]), combined=float(combined[i]))
        for i, t in enumerate(terms)
    ]


def two_means_split(scores: Sequence[float]) -> ClusterSplit:
    """Exact 1-D 2-means over contiguous splits of the sorted scores.

    Ties on SSE resolve to the smaller high group. Degenerate inputs
    (single point, or spread below 1e-12) retain everything.
    """
    n = len(scores)
    if n == 0:
        raise InputError("two_means_split requires a non-empty score list")
    ordered = np.sort(np.asarray(scores, dtype=np.float64))
    if n == 1 or float(ordered[-1] - ordered[0]) <= DEGENERATE_SPREAD:
        sse = float(np.sum((ordered - ordered.mean()) ** 2))
        return ClusterSplit(split_value=float(ordered[0]), low_count=0,
                            high_count=n, sse=sse)
    sse_per_split = _kernels.split_sse(ordered)
    # First minimum of the reversed array = largest k = smallest high group.
    k = n - 1 - int(np.argmin(sse_per_split[::-1]))
    return ClusterSplit(
        split_value=float(ordered[k]),
        low_count=k,
        high_count=n - k,
        sse=max(float(sse_per_split[k - 1]), 0.0),
    )


def mark_retained(terms: Iterable[ScoredTerm], split: ClusterSplit,
                  best_codes: Iterable[str]) -> list[ScoredTerm]:
    """Retain high-cluster members; best-match PTs are always retained."""
    force = set(best_codes)
    return [
        replace(t, retained=t.combined >= split.split_value or t.code in force)
        for t in terms
    ]


def rank_terms(terms: Iterable[ScoredTerm]) -> list[ScoredTerm]:
    """Retained terms only, by sim_best descending then label ascending."""
    return sorted((t for t in terms if t.retained),
                  key=lambda t: (-t.sim_best, t.label))


def apply_cutoff(ranked: list[ScoredTerm], t: float) -> list[ScoredTerm]:
    """Order-preserving filter keeping terms with sim_best >= t."""
    return [x for x in ranked if x.sim_best >= t]
