"""Command-line entry points: embed, query, evaluate, serve.

Exit codes are stable: 0 success, 2 input/validation problems,
3 embedding-provider failures. Diagnostics go to stderr; data goes to
stdout or to the requested output files (written atomically).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from ._fmt import fmt_float, stable_dumps
from .embedding import (ProviderConfig, ProviderKind, embed_vocabulary,
                        load_embeddings, save_embeddings)
from .errors import CacheMismatchError, MedQueryError, ProviderError
from .evaluation import (evaluate, sanitization_csv, table2_csv, table3_csv)
from .pipeline import AmqConfig, result_payload, run_query
from .terminology import CaseMode, Vocabulary, load_vocabulary

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROVIDER = 3


def _case_mode(tok: str) -> CaseMode:
    return {"sensitive": CaseMode.CASE_SENSITIVE,
            "insensitive": CaseMode.CASE_INSENSITIVE}[tok]


def _provider_from_args(args) -> ProviderConfig:
    if args.provider == "lexical":
        return ProviderConfig(kind=ProviderKind.LEXICAL_HASH, dims=args.dims)
    return ProviderConfig(
        kind=ProviderKind.HTTP_API,
        endpoint=args.endpoint or "",
        model_name=args.model or "",
        auth_token_env_var=args.auth_env or "",
        batch_size=args.batch_size,
        timeout=args.timeout,
    )


def _load_vocab(args) -> Vocabulary:
    return load_vocabulary(args.vocab, case_mode=_case_mode(args.case_mode),
                           version=args.vocab_version)


def _load_pair(args):
    vocab = _load_vocab(args)
    emb = load_embeddings(args.cache)
    if emb.vocab_version != vocab.version:
        raise CacheMismatchError(
            f"cache_mismatch: cache built for vocabulary "
            f"{emb.vocab_version!r}, loaded {vocab.version!r}")
    return vocab, emb


def _provider_for_cache(args, emb) -> ProviderConfig:
    """Query phrases must be embedded by the provider that built the cache."""
    if emb.provider_id.startswith("lexical-hash-"):
        return ProviderConfig(dims=emb.dims)
    endpoint = getattr(args, "endpoint", None)
    if not endpoint:
        raise CacheMismatchError(
            f"cache was built by provider {emb.provider_id!r}; pass "
            f"--endpoint (and --model/--auth-env) so phrases are embedded "
            f"by the same provider")
    return ProviderConfig(
        kind=ProviderKind.HTTP_API,
        endpoint=endpoint,
        model_name=args.model or "",
        auth_token_env_var=args.auth_env or "",
        batch_size=args.batch_size,
        timeout=args.timeout,
    )


def parse_cutoff_grid(spec: str) -> tuple[float, ...]:
    """A:B:STEP, inclusive of both ends within 1e-9."""
    try:
        lo, hi, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise MedQueryError(f"bad --cutoffs value {spec!r}, expected A:B:STEP")
    if step <= 0 or hi < lo:
        raise MedQueryError(f"bad --cutoffs range {spec!r}")
    grid = []
    v = lo
    while v <= hi + 1e-9:
        grid.append(round(v, 10))
        v += step
    return tuple(grid)


def cmd_embed(args) -> int:
    vocab = _load_vocab(args)
    provider = _provider_from_args(args)
    t0 = time.perf_counter()
    emb = embed_vocabulary(provider, vocab)
    elapsed = time.perf_counter() - t0
    n_bytes = save_embeddings(emb, args.out)
    rate = len(emb.codes) / elapsed if elapsed > 0 else float("inf")
    print(f"embedded {len(emb.codes)} terms at {emb.dims} dims "
          f"in {elapsed:.3f}s ({rate:.0f} terms/s), "
          f"wrote {n_bytes} bytes to {args.out}")
    return EXIT_OK


def cmd_query(args) -> int:
    vocab, emb = _load_pair(args)
    config = AmqConfig(fuzzy_threshold=args.fuzzy_threshold,
                       case_mode=vocab.case_mode,
                       default_cutoff=args.cutoff,
                       provider=_provider_for_cache(args, emb))
    result = run_query(args.phrase, vocab, emb, config)
    payload = result_payload(result, args.cutoff, args.max_terms)
    if args.format == "json":
        sys.stdout.write(stable_dumps(payload))
    else:
        m = payload["match"]
        print(f"phrase: {payload['phrase']}")
        print(f"match:  {m['method']} -> "
              + "; ".join(f"{t['label']} ({t['score']:.4f})"
                          for t in m["matched"]))
        print(f"split_value: {fmt_float(payload['split_value'])}   "
              f"cutoff: {fmt_float(args.cutoff)}   "
              f"retained: {payload['total_retained']}")
        print(f"{'rank':>4}  {'code':<12} {'label':<40} "
              f"{'sim_query':>9} {'sim_best':>9} {'combined':>9}")
        for t in payload["terms"]:
            print(f"{t['rank']:>4}  {t['code']:<12} {t['label']:<40} "
                  f"{fmt_float(t['sim_query']):>9} "
                  f"{fmt_float(t['sim_best']):>9} "
                  f"{fmt_float(t['combined']):>9}")
        stage_ms = ", ".join(f"{k} {v * 1000:.1f}ms"
                             for k, v in result.timings.items())
        print(f"timings: {stage_ms}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    vocab, emb = _load_pair(args)
    config = AmqConfig(fuzzy_threshold=args.fuzzy_threshold,
                       case_mode=vocab.case_mode,
                       cutoff_grid=parse_cutoff_grid(args.cutoffs),
                       provider=_provider_for_cache(args, emb))
    report = evaluate(args.gold, vocab, emb, config, narrow_mode=args.narrow)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "report.json": stable_dumps(report.to_dict()),
        "table2.csv": table2_csv(report),
        "table3.csv": table3_csv(report),
        "sanitization.csv": sanitization_csv(report),
    }
    written = []
    try:
        for name, content in outputs.items():
            tmp = out_dir / f".tmp-{name}"
            tmp.write_text(content, encoding="utf-8")
            os.replace(tmp, out_dir / name)
            written.append(out_dir / name)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        for name in outputs:
            (out_dir / f".tmp-{name}").unlink(missing_ok=True)
        raise
    print(f"wrote {', '.join(outputs)} to {out_dir}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    vocab, emb = _load_pair(args)
    overrides = {}
    cors = ("*",)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        cors = tuple(raw.pop("cors_origins", ["*"]))
        if "case_mode" in raw:
            raw["case_mode"] = _case_mode(raw["case_mode"])
        if "cutoff_grid" in raw:
            raw["cutoff_grid"] = tuple(raw["cutoff_grid"])
        overrides = raw
    overrides.setdefault("provider", _provider_for_cache(args, emb))
    config = AmqConfig(**overrides)
    state = ServiceState(vocab=vocab, emb=emb, config=config,
                         cors_origins=cors)
    uvicorn.run(create_app(state), host=args.host, port=args.port)
    return EXIT_OK


def _add_vocab_flags(p):
    p.add_argument("--vocab", required=True, help="vocabulary CSV path")
    p.add_argument("--case-mode", choices=["sensitive", "insensitive"],
                   default="sensitive")
    p.add_argument("--vocab-version", default=None,
                   help="version tag (default: content fingerprint)")


def _add_http_flags(p):
    p.add_argument("--endpoint", default=None,
                   help="HTTP provider endpoint (required for http caches)")
    p.add_argument("--model", default=None)
    p.add_argument("--auth-env", default=None,
                   help="env var holding the bearer token")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--timeout", type=float, default=30.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medquery",
        description="Controlled-vocabulary term retrieval and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a vocabulary into a cache file")
    _add_vocab_flags(p)
    _add_http_flags(p)
    p.add_argument("--provider", choices=["lexical", "http"],
                   default="lexical")
    p.add_argument("--dims", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("query", help="run one phrase against the vocabulary")
    _add_vocab_flags(p)
    _add_http_flags(p)
    p.add_argument("--cache", required=True)
    p.add_argument("--phrase", required=True)
    p.add_argument("--cutoff", type=float, default=0.60)
    p.add_argument("--max-terms", type=int, default=None)
    p.add_argument("--fuzzy-threshold", type=float, default=0.90)
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("evaluate", help="run the gold-set evaluation protocol")
    _add_vocab_flags(p)
    _add_http_flags(p)
    p.add_argument("--gold", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--cutoffs", default="0.5:0.9:0.05",
                   help="grid as A:B:STEP, both ends inclusive")
    p.add_argument("--narrow", action="store_true",
                   help="restrict gold entries to NARROW scope")
    p.add_argument("--fuzzy-threshold", type=float, default=0.90)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="serve the HTTP API")
    _add_vocab_flags(p)
    _add_http_flags(p)
    p.add_argument("--cache", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--config", default=None,
                   help="JSON file with pipeline settings")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProviderError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PROVIDER
    except (MedQueryError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
