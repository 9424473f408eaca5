"""Validation harness: per-query metrics at each cut-off, cross-query
summaries, per-query best-F1, narrow-only analysis, and correlation.

Conventions baked in here: precision and recall are 0 when their
denominator is 0, F1 is 0 when P + R is 0, the cross-query SD is the
sample (n-1) standard deviation, and queries whose sanitized gold list
is empty are excluded from summaries but listed in the report.
"""

from __future__ import annotations

import io
import csv
import math
from dataclasses import dataclass
from typing import Sequence

from ._fmt import fmt_float
from .embedding import EmbeddingSet
from .errors import InputError
from .pipeline import AmqConfig, AmqResult, run_query
from .relevance import apply_cutoff
from .terminology import (CaseMode, GoldQuery, SanitizationReport, Scope,
                          Source, Vocabulary, load_gold_sets, sanitize_gold)


@dataclass(frozen=True)
class MetricsPoint:
    cutoff: float
    tp: int
    pred_n: int
    gold_n: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class SweepRow:
    cutoff: float
    precision_mean: float
    precision_sd: float
    precision_min: float
    precision_max: float
    recall_mean: float
    recall_sd: float
    recall_min: float
    recall_max: float
    f1_mean: float
    f1_sd: float
    f1_min: float
    f1_max: float


@dataclass(frozen=True)
class PerQueryBest:
    name: str
    best_cutoff: float
    max_f1: float
    precision: float
    recall: float
    tp: int
    pred_n: int
    gold_n: int


@dataclass(frozen=True)
class EvalReport:
    sweep: tuple[SweepRow, ...]
    per_query: tuple[PerQueryBest, ...]
    pearson_r_maxf1_vs_goldn: float | None
    narrow_mode: bool
    sanitization: SanitizationReport
    excluded_queries: tuple[str, ...]  # empty gold list after sanitization
    sd_flagged: bool  # fewer than 2 contributing queries
    sd_kind: str = "sample"

    def to_dict(self) -> dict:
        return {
            "sweep": [vars(row).copy() for row in self.sweep],
            "per_query": [vars(row).copy() for row in self.per_query],
            "pearson_r_maxf1_vs_goldn": self.pearson_r_maxf1_vs_goldn,
            "narrow_mode": self.narrow_mode,
            "sanitization": self.sanitization.to_dict(),
            "excluded_queries": list(self.excluded_queries),
            "sd_flagged": self.sd_flagged,
            "sd_kind": self.sd_kind,
        }


def metrics_at(gold_labels: set[str], predicted_labels: Sequence[str],
               cutoff: float,
               case_mode: CaseMode = CaseMode.CASE_SENSITIVE) -> MetricsPoint:
    """Set-intersection TP on exact labels under `case_mode`."""
    gold = {case_mode.key(x) for x in gold_labels}
    pred = {case_mode.key(x) for x in predicted_labels}
    tp = len(gold & pred)
    pred_n = len(pred)
    gold_n = len(gold)
    precision = tp / pred_n if pred_n else 0.0
    recall = tp / gold_n if gold_n else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsPoint(cutoff=cutoff, tp=tp, pred_n=pred_n, gold_n=gold_n,
                        precision=precision, recall=recall, f1=f1)


def sweep_query(result: AmqResult, gold: GoldQuery,
                grid: Sequence[float],
                case_mode: CaseMode = CaseMode.CASE_SENSITIVE) -> list[MetricsPoint]:
    """One MetricsPoint per grid cut-off for a single query."""
    gold_labels = {e.label for e in gold.entries}
    ranked = list(result.ranked)
    return [
        metrics_at(gold_labels,
                   [t.label for t in apply_cutoff(ranked, t_cut)],
                   t_cut, case_mode)
        for t_cut in grid
    ]


def _stats(values: list[float]) -> tuple[float, float, float, float]:
    n = len(values)
    mean = sum(values) / n
    if n >= 2:
        sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    else:
        sd = 0.0
    return mean, sd, min(values), max(values)


def summarize(points_by_query: dict[str, list[MetricsPoint]]
              ) -> tuple[list[SweepRow], list[str], bool]:
    """Cross-query mean/SD/min/max per cut-off.

    Queries with an empty gold list contribute nothing; their names are
    returned so the report can count them. The boolean flags sweeps
    where fewer than 2 queries contributed (SD reported as 0).
    """
    contributing = {name: pts for name, pts in points_by_query.items()
                    if pts and pts[0].gold_n > 0}
    excluded = sorted(set(points_by_query) - set(contributing))
    if not contributing:
        return [], excluded, True

    grids = {tuple(p.cutoff for p in pts) for pts in contributing.values()}
    if len(grids) != 1:
        raise InputError("every query must contribute a point at every cutoff")
    grid = grids.pop()

    # fold in name order so the result is independent of insertion order
    ordered = [contributing[name] for name in sorted(contributing)]
    rows = []
    for j, cutoff in enumerate(grid):
        points = [pts[j] for pts in ordered]
        p = _stats([x.precision for x in points])
        r = _stats([x.recall for x in points])
        f = _stats([x.f1 for x in points])
        rows.append(SweepRow(
            cutoff=cutoff,
            precision_mean=p[0], precision_sd=p[1],
            precision_min=p[2], precision_max=p[3],
            recall_mean=r[0], recall_sd=r[1],
            recall_min=r[2], recall_max=r[3],
            f1_mean=f[0], f1_sd=f[1], f1_min=f[2], f1_max=f[3],
        ))
    return rows, excluded, len(contributing) < 2


def best_f1(name: str, points: Sequence[MetricsPoint]) -> PerQueryBest:
    """The F1-maximizing grid point; ties resolve to the lowest cut-off."""
    if not points:
        raise InputError("best_f1 requires at least one point")
    best = max(points, key=lambda p: (p.f1, -p.cutoff))
    return PerQueryBest(name=name, best_cutoff=best.cutoff, max_f1=best.f1,
                        precision=best.precision, recall=best.recall,
                        tp=best.tp, pred_n=best.pred_n, gold_n=best.gold_n)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation; exact +/-1 on exactly linear inputs."""
    if len(xs) != len(ys):
        raise InputError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise InputError("pearson requires at least 2 points")
    mx = sum(xs) / n
    my = sum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    vx = sum(d * d for d in dx)
    vy = sum(d * d for d in dy)
    if vx == 0.0 or vy == 0.0:
        raise InputError("correlation undefined: zero variance input")
    cov = sum(a * b for a, b in zip(dx, dy))
    return max(-1.0, min(1.0, cov / math.sqrt(vx * vy)))


def narrow_filter(gold: list[GoldQuery]) -> list[GoldQuery]:
    """Restrict gold entries to NARROW scope; predictions are untouched."""
    return [
        GoldQuery(name=q.name, phrase=q.phrase,
                  entries=tuple(e for e in q.entries
                                if e.scope is Scope.NARROW))
        for q in gold
    ]


def evaluate(gold_source: Source | list[GoldQuery], vocab: Vocabulary,
             emb: EmbeddingSet, config: AmqConfig,
             narrow_mode: bool = False) -> EvalReport:
    """Full protocol: sanitize, run each query, sweep, summarize, correlate."""
    if isinstance(gold_source, list):
        gold = gold_source
    else:
        gold = load_gold_sets(gold_source)
    sanitized, report = sanitize_gold(gold, vocab)
    if narrow_mode:
        sanitized = narrow_filter(sanitized)

    points_by_query: dict[str, list[MetricsPoint]] = {}
    for query in sanitized:
        try:
            result = run_query(query.phrase, vocab, emb, config)
        except Exception as e:
            e.query_name = query.name
            raise
        points_by_query[query.name] = sweep_query(
            result, query, config.cutoff_grid, vocab.case_mode)

    sweep_rows, excluded, sd_flagged = summarize(points_by_query)
    per_query = [best_f1(name, pts) for name, pts in points_by_query.items()
                 if name not in excluded]
    per_query.sort(key=lambda b: (-b.max_f1, b.name))

    xs = [b.max_f1 for b in per_query]
    ys = [float(b.gold_n) for b in per_query]
    try:
        r = pearson(xs, ys)
    except InputError:
        r = None

    return EvalReport(
        sweep=tuple(sweep_rows),
        per_query=tuple(per_query),
        pearson_r_maxf1_vs_goldn=r,
        narrow_mode=narrow_mode,
        sanitization=report,
        excluded_queries=tuple(excluded),
        sd_flagged=sd_flagged,
    )


# --- CSV / JSON table exports ----------------------------------------------

def table2_csv(report: EvalReport) -> str:
    """Cross-query summary per cut-off (mean/SD/min/max of P, R, F1)."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    header = ["cutoff"]
    for metric in ("precision", "recall", "f1"):
        header += [f"{metric}_{s}" for s in ("mean", "sd", "min", "max")]
    w.writerow(header)
    for row in report.sweep:
        w.writerow([fmt_float(row.cutoff)] + [
            fmt_float(getattr(row, f"{metric}_{s}"))
            for metric in ("precision", "recall", "f1")
            for s in ("mean", "sd", "min", "max")
        ])
    return out.getvalue()


def table3_csv(report: EvalReport) -> str:
    """Per-query best-F1 rows, sorted by max F1 descending."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["query", "best_cutoff", "max_f1", "precision", "recall",
                "tp", "pred_n", "gold_n"])
    for b in report.per_query:
        w.writerow([b.name, fmt_float(b.best_cutoff), fmt_float(b.max_f1),
                    fmt_float(b.precision), fmt_float(b.recall),
                    b.tp, b.pred_n, b.gold_n])
    return out.getvalue()


def sanitization_csv(report: EvalReport) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["query", "excluded_count", "remaining_count",
                "excluded_samples"])
    for row in report.sanitization.per_query:
        w.writerow([row.name, row.excluded_count, row.remaining_count,
                    "; ".join(row.excluded_samples)])
    return out.getvalue()
