"""Embedding-based retrieval of controlled-vocabulary medical terms.

Free-text concept in, ranked preferred-term list out: fuzzy best-term
matching with a semantic fallback, bivariate cosine scoring against the
whole vocabulary, an exact two-means relevance cut, and a
precision/recall evaluation harness for gold query sets.
"""

from .embedding import (EmbeddingSet, ProviderConfig, ProviderKind, cosine,
                        embed_text, embed_vocabulary, load_embeddings,
                        save_embeddings)
from .errors import (CacheMismatchError, FormatError, InputError,
                     MedQueryError, ParseError, ProviderError,
                     ValidationError)
from .evaluation import (EvalReport, MetricsPoint, PerQueryBest, SweepRow,
                         best_f1, evaluate, metrics_at, narrow_filter,
                         pearson, summarize, sweep_query)
from .pipeline import AmqConfig, AmqResult, result_payload, run_query
from .relevance import (ClusterSplit, ScoredTerm, apply_cutoff, mark_retained,
                        rank_terms, score_all, two_means_split)
from .retrieval import (MatchMethod, MatchOutcome, best_term_match,
                        composite_embedding, fuzzy_similarity)
from .terminology import (CaseMode, GoldEntry, GoldQuery, Level,
                          SanitizationReport, Scope, Term, Vocabulary,
                          load_gold_sets, load_vocabulary, lookup_exact,
                          sanitize_gold)

__version__ = "0.1.0"
