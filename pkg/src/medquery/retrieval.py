"""Stage 1: find the best-matching PT(s) for an input phrase.

Fuzzy string matching runs first over every current PT label; when the
best normalized similarity clears the threshold the single winner is
taken (LEXICAL). Otherwise the phrase embedding picks the top-k most
cosine-similar PTs and their embeddings are averaged into a composite
(SEMANTIC). The phrase is embedded on both paths because stage 2 needs
the query vector regardless.

Ties anywhere break by score descending, then label ascending, so the
whole stage is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .embedding import EmbeddingSet, ProviderConfig, embed_text
from .errors import InputError
from .terminology import CaseMode, Term, Vocabulary


class MatchMethod(Enum):
    LEXICAL = "LEXICAL"
    SEMANTIC = "SEMANTIC"


@dataclass(frozen=True)
class MatchOutcome:
    method: MatchMethod
    matched: tuple[tuple[Term, float], ...]
    query_vector: np.ndarray
    best_vector: np.ndarray


def _codepoints(s: str) -> np.ndarray:
    return np.array([ord(c) for c in s], dtype=np.uint32)


def _pack_labels(labels: list[str]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(labels) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in labels], out=offsets[1:])
    flat = np.empty(int(offsets[-1]), dtype=np.uint32)
    for i, s in enumerate(labels):
        flat[offsets[i]:offsets[i + 1]] = _codepoints(s)
    return flat, offsets


def _normalized_sims(dists: np.ndarray, query_len: int,
                     label_lens: np.ndarray) -> np.ndarray:
    denom = np.maximum(label_lens, query_len).astype(np.float64)
    with np.errstate(invalid="ignore"):
        sims = 1.0 - dists / denom
    sims[denom == 0] = 1.0  # both strings empty
    return sims


def fuzzy_similarity(a: str, b: str,
                     case_mode: CaseMode = CaseMode.CASE_SENSITIVE) -> float:
    """1 - levenshtein(a, b) / max(len(a), len(b)); 1.0 when both empty."""
    a, b = case_mode.key(a), case_mode.key(b)
    if not a and not b:
        return 1.0
    flat, offsets = _pack_labels([b])
    dist = _kernels.levenshtein_distances(_codepoints(a), flat, offsets)[0]
    return 1.0 - dist / max(len(a), len(b))


def composite_embedding(vectors: list[np.ndarray]) -> np.ndarray:
    """Component-wise mean, L2-normalized; a single vector passes through."""
    if not vectors:
        raise InputError("composite_embedding requires at least one vector")
    dims = {len(v) for v in vectors}
    if len(dims) > 1:
        raise InputError(f"mixed dims in composite: {sorted(dims)}")
    if len(vectors) == 1:
        return vectors[0]
    mean = np.mean(np.vstack([np.asarray(v, dtype=np.float64)
                              for v in vectors]), axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        return np.zeros(len(mean), dtype=np.float32)
    return (mean / norm).astype(np.float32)


def _top_k_semantic(sims: np.ndarray, terms: tuple[Term, ...],
                    k: int) -> list[tuple[Term, float]]:
    n = len(terms)
    k = min(k, n)
    # argpartition narrows to candidates, then exact (score desc, label asc)
    # ordering resolves boundary ties deterministically.
    if n > k:
        kth = np.partition(sims, n - k)[n - k]
        cand = np.nonzero(sims >= kth)[0]
    else:
        cand = np.arange(n)
    ordered = sorted(cand, key=lambda i: (-sims[i], terms[i].label))
    return [(terms[i], float(sims[i])) for i in ordered[:k]]


def best_term_match(phrase: str, vocab: Vocabulary, emb: EmbeddingSet,
                    fuzzy_threshold: float, provider: ProviderConfig,
                    semantic_top_k: int = 3) -> MatchOutcome:
    """Fuzzy-first best-term matching with a semantic top-k fallback."""
    if not phrase.strip():
        raise InputError("empty phrase")
    terms = vocab.current_pts
    if not terms:
        raise InputError("vocabulary has no current PTs")

    case = vocab.case_mode
    keyed = [case.key(t.label) for t in terms]
    flat, offsets = _pack_labels(keyed)
    query = _codepoints(case.key(phrase))
    dists = _kernels.levenshtein_distances(query, flat, offsets)
    label_lens = np.diff(offsets)
    sims = _normalized_sims(dists, len(query), label_lens)

    best_idx = min(np.nonzero(sims == sims.max())[0],
                   key=lambda i: terms[i].label)
    best_sim = float(sims[best_idx])

    query_vector = embed_text(provider, phrase)

    if best_sim > fuzzy_threshold:
        term = terms[best_idx]
        return MatchOutcome(
            method=MatchMethod.LEXICAL,
            matched=((term, best_sim),),
            query_vector=query_vector,
            best_vector=emb.vector(term.code),
        )

    q64 = query_vector.astype(np.float64)
    rows = [emb.row_of(t.code) for t in terms]
    cos = np.clip(emb.matrix64()[rows] @ q64, -1.0, 1.0)
    matched = _top_k_semantic(cos, terms, semantic_top_k)
    best_vector = composite_embedding([emb.vector(t.code) for t, _ in matched])
    return MatchOutcome(
        method=MatchMethod.SEMANTIC,
        matched=tuple(matched),
        query_vector=query_vector,
        best_vector=best_vector,
    )
