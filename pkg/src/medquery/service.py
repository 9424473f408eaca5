"""Read-only HTTP surface over the pipeline and the evaluation harness.

Endpoints: POST /api/query, POST /api/evaluate, GET /api/info,
GET /health. State is built once at startup and never mutated, so
concurrent requests need no locking and identical requests return
identical bytes (sorted keys, 4-decimal floats).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from ._fmt import quantize
from .embedding import EmbeddingSet
from .errors import MedQueryError, ParseError, ProviderError
from .evaluation import evaluate
from .pipeline import AmqConfig, result_payload, run_query
from .terminology import Vocabulary

MAX_PHRASE_LEN = 1024
MAX_SYNC_EVAL_QUERIES = 50


@dataclass(frozen=True)
class ServiceState:
    vocab: Vocabulary
    emb: EmbeddingSet
    config: AmqConfig
    build_info: str = "medquery/0.1.0"
    cors_origins: tuple[str, ...] = ("*",)


def _json_response(payload: dict, status: int = 200) -> Response:
    return Response(
        content=json.dumps(quantize(payload), sort_keys=True),
        status_code=status,
        media_type="application/json",
    )


def _error(status: int, code: str, **extra) -> Response:
    return _json_response({"error": code, **extra}, status=status)


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="medquery", version=state.build_info)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(state.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/health")
    def health():
        return Response(content="ok", media_type="text/plain")

    @app.get("/api/info")
    def info():
        return _json_response({
            "vocab_version": state.vocab.version,
            "term_count": len(state.vocab.current_pts),
            "provider_id": state.emb.provider_id,
            "dims": state.emb.dims,
            "default_cutoff": state.config.default_cutoff,
            "cutoff_grid": list(state.config.cutoff_grid),
            "build_info": state.build_info,
        })

    @app.post("/api/query")
    async def query(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "invalid_json")
        phrase = body.get("phrase") if isinstance(body, dict) else None
        if not isinstance(phrase, str) or not phrase.strip():
            return _error(400, "missing_phrase")
        if len(phrase) > MAX_PHRASE_LEN:
            return _error(413, "phrase_too_long", limit=MAX_PHRASE_LEN)
        cutoff = body.get("cutoff", state.config.default_cutoff)
        max_terms = body.get("max_terms")
        if not isinstance(cutoff, (int, float)):
            return _error(400, "invalid_cutoff")
        if max_terms is not None and not isinstance(max_terms, int):
            return _error(400, "invalid_max_terms")
        try:
            result = run_query(phrase, state.vocab, state.emb, state.config)
        except ProviderError as e:
            return _error(502, "provider_error", detail=str(e))
        except MedQueryError as e:
            return _error(400, "bad_request", detail=str(e))
        return _json_response(result_payload(result, float(cutoff), max_terms))

    @app.post("/api/evaluate")
    async def run_evaluation(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "invalid_json")
        gold_csv = body.get("gold_csv") if isinstance(body, dict) else None
        if not isinstance(gold_csv, str) or not gold_csv:
            return _error(400, "missing_gold_csv")
        narrow_mode = bool(body.get("narrow_mode", False))
        cutoffs = body.get("cutoffs")

        from .terminology import load_gold_sets
        import io
        try:
            gold = load_gold_sets(io.StringIO(gold_csv))
        except ParseError as e:
            return _error(400, "parse_error", detail=str(e), line=e.line)
        except MedQueryError as e:
            return _error(400, "invalid_gold", detail=str(e))
        if len(gold) > MAX_SYNC_EVAL_QUERIES:
            return _error(422, "too_many_queries",
                          limit=MAX_SYNC_EVAL_QUERIES,
                          detail="use the CLI evaluate command for large sets")

        config = state.config
        if cutoffs is not None:
            if (not isinstance(cutoffs, list)
                    or not all(isinstance(c, (int, float)) for c in cutoffs)):
                return _error(400, "invalid_cutoffs")
            try:
                config = AmqConfig(
                    fuzzy_threshold=config.fuzzy_threshold,
                    case_mode=config.case_mode,
                    semantic_top_k=config.semantic_top_k,
                    default_cutoff=config.default_cutoff,
                    cutoff_grid=tuple(float(c) for c in cutoffs),
                    provider=config.provider,
                )
            except MedQueryError as e:
                return _error(400, "invalid_cutoffs", detail=str(e))
        try:
            report = evaluate(gold, state.vocab, state.emb, config,
                              narrow_mode=narrow_mode)
        except ProviderError as e:
            return _error(502, "provider_error", detail=str(e))
        except MedQueryError as e:
            return _error(400, "evaluation_failed", detail=str(e))
        return _json_response(report.to_dict())

    return app
