"""End-to-end query orchestration: phrase in, ranked retained terms out.

run_query composes best-term matching, bivariate scoring, the two-means
relevance cut, and ranking. Cut-off filtering is deliberately left to
callers so a single run serves a whole threshold sweep.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .embedding import EmbeddingSet, ProviderConfig
from .errors import InputError
from .relevance import (ClusterSplit, ScoredTerm, apply_cutoff, mark_retained,
                        rank_terms, score_all, two_means_split)
from .retrieval import MatchOutcome, best_term_match
from .terminology import CaseMode, Vocabulary

DEFAULT_FUZZY_THRESHOLD = 0.90
DEFAULT_CUTOFF = 0.60
DEFAULT_CUTOFF_GRID = tuple(round(0.50 + 0.05 * i, 2) for i in range(9))


@dataclass(frozen=True)
class AmqConfig:
    fuzzy_threshold: float = DEFAULT_FUZZY_THRESHOLD
    case_mode: CaseMode = CaseMode.CASE_SENSITIVE
    semantic_top_k: int = 3
    default_cutoff: float = DEFAULT_CUTOFF
    cutoff_grid: tuple[float, ...] = DEFAULT_CUTOFF_GRID
    provider: ProviderConfig = field(default_factory=ProviderConfig)

    def __post_init__(self):
        if not 0.0 < self.fuzzy_threshold <= 1.0:
            raise InputError(
                f"fuzzy_threshold must be in (0, 1], got {self.fuzzy_threshold}")
        if not 1 <= self.semantic_top_k <= 3:
            raise InputError(
                f"semantic_top_k must be 1..3, got {self.semantic_top_k}")
        grid = tuple(self.cutoff_grid)
        if not grid:
            raise InputError("cutoff_grid must be non-empty")
        if any(not 0.0 < t <= 1.0 for t in grid):
            raise InputError(f"cutoff_grid values must be in (0, 1]: {grid}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InputError(f"cutoff_grid must be strictly increasing: {grid}")
        object.__setattr__(self, "cutoff_grid", grid)


@dataclass(frozen=True)
class AmqResult:
    phrase: str
    match: MatchOutcome
    ranked: tuple[ScoredTerm, ...]
    split: ClusterSplit
    timings: dict[str, float]


def _staged(stage: str, fn, *args):
    try:
        return fn(*args)
    except Exception as e:
        # Keep the original exception type/args; annotate for callers.
        e.stage = stage
        raise


def run_query(phrase: str, vocab: Vocabulary, emb: EmbeddingSet,
              config: AmqConfig) -> AmqResult:
    """Run the full pipeline; `ranked` holds every retained term (no cutoff)."""
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    match = _staged("match", best_term_match, phrase, vocab, emb,
                    config.fuzzy_threshold, config.provider,
                    config.semantic_top_k)
    timings["match"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    scored = _staged("score", score_all, match.query_vector,
                     match.best_vector, emb, vocab)
    timings["score"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    split = _staged("cluster", two_means_split, [t.combined for t in scored])
    best_codes = [term.code for term, _ in match.matched]
    retained = mark_retained(scored, split, best_codes)
    timings["cluster"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ranked = rank_terms(retained)
    timings["rank"] = time.perf_counter() - t0

    return AmqResult(phrase=phrase, match=match, ranked=tuple(ranked),
                     split=split, timings=timings)


def result_payload(result: AmqResult, cutoff: float,
                   max_terms: int | None = None) -> dict:
    """The wire/CLI view of a result: cutoff applied, rank numbers assigned.

    Timings are intentionally excluded so payload bytes are stable
    across runs; `total_retained` counts terms passing the cutoff
    before any max_terms truncation.
    """
    kept = apply_cutoff(list(result.ranked), cutoff)
    total = len(kept)
    if max_terms is not None:
        kept = kept[:max_terms]
    return {
        "phrase": result.phrase,
        "cutoff": cutoff,
        "match": {
            "method": result.match.method.value,
            "matched": [
                {"code": t.code, "label": t.label, "score": s}
                for t, s in result.match.matched
            ],
        },
        "terms": [
            {
                "code": t.code,
                "label": t.label,
                "sim_query": t.sim_query,
                "sim_best": t.sim_best,
                "combined": t.combined,
                "rank": i + 1,
            }
            for i, t in enumerate(kept)
        ],
        "split_value": result.split.split_value,
        "total_retained": total,
    }
