#!/usr/bin/env python3
"""Regenerate the frozen golden outputs under tests/data/golden/.

Run this only when an intentional behavior change invalidates the
committed goldens; review the diff before committing.
"""

import pathlib
import re
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from medquery import (AmqConfig, ProviderConfig, embed_vocabulary, evaluate,
                      load_vocabulary, run_query)
from medquery._fmt import stable_dumps
from medquery.evaluation import sanitization_csv, table2_csv, table3_csv
from medquery.pipeline import result_payload

ROOT = pathlib.Path(__file__).resolve().parents[1]
DATA = ROOT / "tests" / "data"
GOLDEN = DATA / "golden"

PHRASES = (
    "Insomnia", "Tremor", "Low blood glucose", "Palpitations", "Headache",
    "Diarrhea", "Rash", "Acute kidney injury", "Dyspnoea", "Bleeding events",
)


def slug(phrase: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", phrase.lower()).strip("-")


def main() -> None:
    vocab = load_vocabulary(DATA / "vocab_fixture.csv")
    provider = ProviderConfig()
    emb = embed_vocabulary(provider, vocab)
    config = AmqConfig(provider=provider)

    queries_dir = GOLDEN / "queries"
    queries_dir.mkdir(parents=True, exist_ok=True)
    for phrase in PHRASES:
        result = run_query(phrase, vocab, emb, config)
        payload = result_payload(result, config.default_cutoff)
        (queries_dir / f"{slug(phrase)}.json").write_text(
            stable_dumps(payload), encoding="utf-8")

    for narrow, name in ((False, "eval"), (True, "eval_narrow")):
        report = evaluate(DATA / "gold_fixture.csv", vocab, emb, config,
                          narrow_mode=narrow)
        out = GOLDEN / name
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(stable_dumps(report.to_dict()),
                                         encoding="utf-8")
        (out / "table2.csv").write_text(table2_csv(report), encoding="utf-8")
        (out / "table3.csv").write_text(table3_csv(report), encoding="utf-8")
        (out / "sanitization.csv").write_text(sanitization_csv(report),
                                              encoding="utf-8")
    print(f"goldens written under {GOLDEN}")


if __name__ == "__main__":
    main()
