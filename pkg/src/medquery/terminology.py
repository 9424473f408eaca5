"""Controlled-vocabulary ingestion, exact-label lookup, and gold-set handling.

File formats (UTF-8, RFC 4180 quoting):

- vocabulary CSV, header ``code,label,level,current`` with
  level in {PT, LLT, OTHER} and current in {Y, N};
- gold CSV, header ``query_name,query_phrase,term_label[,scope]`` with
  scope in {NARROW, BROAD} (defaults to BROAD when the column is absent).

Only current preferred terms (level PT, current Y) are indexed for
exact-label lookup; everything else is carried along for reporting but
never resolves.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Union

from .errors import ParseError, ValidationError

EXCLUDED_SAMPLE_CAP = 5

VOCAB_HEADER = ["code", "label", "level", "current"]
GOLD_HEADER = ["query_name", "query_phrase", "term_label"]


class Level(Enum):
    PT = "PT"
    LLT = "LLT"
    OTHER = "OTHER"


class Scope(Enum):
    NARROW = "NARROW"
    BROAD = "BROAD"


class CaseMode(Enum):
    CASE_SENSITIVE = "sensitive"
    CASE_INSENSITIVE = "insensitive"

    def key(self, label: str) -> str:
        if self is CaseMode.CASE_INSENSITIVE:
            return label.lower()
        return label


@dataclass(frozen=True)
class Term:
    code: str
    label: str
    level: Level
    current: bool


@dataclass(frozen=True)
class Vocabulary:
    version: str
    terms: tuple[Term, ...]
    case_mode: CaseMode
    label_index: dict[str, str] = field(repr=False)  # case key -> code
    by_code: dict[str, Term] = field(repr=False)
    current_pts: tuple[Term, ...] = field(repr=False)


@dataclass(frozen=True)
class GoldEntry:
    label: str
    scope: Scope = Scope.BROAD


@dataclass(frozen=True)
class GoldQuery:
    name: str
    phrase: str
    entries: tuple[GoldEntry, ...]


@dataclass(frozen=True)
class QuerySanitization:
    name: str
    excluded_count: int
    excluded_samples: tuple[str, ...]
    remaining_count: int


@dataclass(frozen=True)
class SanitizationReport:
    per_query: tuple[QuerySanitization, ...]
    total_excluded: int
    affected_queries: int
    emptied_queries: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "per_query": [
                {
                    "name": row.name,
                    "excluded_count": row.excluded_count,
                    "excluded_samples": list(row.excluded_samples),
                    "remaining_count": row.remaining_count,
                }
                for row in self.per_query
            ],
            "total_excluded": self.total_excluded,
            "affected_queries": self.affected_queries,
            "emptied_queries": list(self.emptied_queries),
        }


Source = Union[str, Path, IO[str]]


def _read_text(source: Source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    return source.read()


def _csv_rows(text: str) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        yield reader.line_num, row


def fingerprint(text: str) -> str:
    """Stable 12-hex content tag used as the default vocabulary version."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def load_vocabulary(source: Source,
                    case_mode: CaseMode = CaseMode.CASE_SENSITIVE,
                    version: str | None = None) -> Vocabulary:
    """Parse a vocabulary CSV; index current PT labels under `case_mode`.

    Raises ParseError for structural problems (carrying the line number)
    and ValidationError for duplicate codes or duplicate current-PT
    labels. Row order is preserved in `terms`.
    """
    text = _read_text(source)
    rows = _csv_rows(text)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError("empty file, expected header row", line=1)
    if header != VOCAB_HEADER:
        raise ParseError(
            f"bad header {header!r}, expected {VOCAB_HEADER!r}", line=1)

    terms: list[Term] = []
    by_code: dict[str, Term] = {}
    label_index: dict[str, str] = {}
    for line_num, row in rows:
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, got {len(row)}", line=line_num)
        code, label, level_tok, current_tok = row
        if not code:
            raise ValidationError(f"line {line_num}: empty code")
        if not label:
            raise ValidationError(f"line {line_num}: empty label")
        try:
            level = Level(level_tok)
        except ValueError:
            raise ParseError(f"unknown level {level_tok!r}", line=line_num)
        if current_tok not in ("Y", "N"):
            raise ParseError(f"current must be Y or N, got {current_tok!r}",
                             line=line_num)
        if code in by_code:
            raise ValidationError(f"line {line_num}: duplicate code {code!r}")
        term = Term(code=code, label=label, level=level,
                    current=current_tok == "Y")
        by_code[code] = term
        terms.append(term)
        if term.level is Level.PT and term.current:
            key = case_mode.key(label)
            if key in label_index:
                raise ValidationError(
                    f"line {line_num}: duplicate current-PT label {label!r}")
            label_index[key] = code

    return Vocabulary(
        version=version if version is not None else fingerprint(text),
        terms=tuple(terms),
        case_mode=case_mode,
        label_index=label_index,
        by_code=by_code,
        current_pts=tuple(t for t in terms if t.level is Level.PT and t.current),
    )


def lookup_exact(vocab: Vocabulary, label: str) -> Term | None:
    """The current PT whose label matches under the vocabulary's case mode."""
    code = vocab.label_index.get(vocab.case_mode.key(label))
    return vocab.by_code[code] if code is not None else None


def load_gold_sets(source: Source) -> list[GoldQuery]:
    """Parse a gold CSV into one GoldQuery per distinct name (file order)."""
    text = _read_text(source)
    rows = _csv_rows(text)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError("empty file, expected header row", line=1)
    has_scope = header == GOLD_HEADER + ["scope"]
    if not has_scope and header != GOLD_HEADER:
        raise ParseError(
            f"bad header {header!r}, expected {GOLD_HEADER!r} "
            f"with optional {['scope']!r}", line=1)

    expected_cols = 4 if has_scope else 3
    phrases: dict[str, str] = {}
    entries: dict[str, list[GoldEntry]] = {}
    order: list[str] = []
    for line_num, row in rows:
        if not row:
            continue
        if len(row) != expected_cols:
            raise ParseError(
                f"expected {expected_cols} columns, got {len(row)}",
                line=line_num)
        name, phrase, label = row[0], row[1], row[2]
        if not name:
            raise ValidationError(f"line {line_num}: empty query_name")
        if not label:
            raise ValidationError(f"line {line_num}: empty term_label")
        if not phrase:
            raise ValidationError(
                f"line {line_num}: missing phrase for query {name!r}")
        scope = Scope.BROAD
        if has_scope and row[3]:
            try:
                scope = Scope(row[3].upper())
            except ValueError:
                raise ParseError(f"unknown scope {row[3]!r}", line=line_num)
        if name in phrases:
            if phrases[name] != phrase:
                raise ValidationError(
                    f"line {line_num}: conflicting phrase for query {name!r}")
        else:
            phrases[name] = phrase
            entries[name] = []
            order.append(name)
        entries[name].append(GoldEntry(label=label, scope=scope))

    return [GoldQuery(name=n, phrase=phrases[n], entries=tuple(entries[n]))
            for n in order]


def sanitize_gold(gold: list[GoldQuery],
                  vocab: Vocabulary) -> tuple[list[GoldQuery], SanitizationReport]:
    """Keep only entries whose label resolves to a current PT.

    Queries sanitised down to zero entries are kept (and flagged) so
    evaluation denominators stay explicit.
    """
    out: list[GoldQuery] = []
    per_query: list[QuerySanitization] = []
    emptied: list[str] = []
    total = 0
    for query in gold:
        kept = []
        excluded = []
        for entry in query.entries:
            if lookup_exact(vocab, entry.label) is not None:
                kept.append(entry)
            else:
                excluded.append(entry.label)
        out.append(GoldQuery(name=query.name, phrase=query.phrase,
                             entries=tuple(kept)))
        per_query.append(QuerySanitization(
            name=query.name,
            excluded_count=len(excluded),
            excluded_samples=tuple(excluded[:EXCLUDED_SAMPLE_CAP]),
            remaining_count=len(kept),
        ))
        total += len(excluded)
        if not kept:
            emptied.append(query.name)
    report = SanitizationReport(
        per_query=tuple(per_query),
        total_excluded=total,
        affected_queries=sum(1 for r in per_query if r.excluded_count > 0),
        emptied_queries=tuple(emptied),
    )
    return out, report
