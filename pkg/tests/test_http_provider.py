"""HTTP embedding provider against a real local server."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from medquery import (ProviderConfig, ProviderKind, ProviderError, embed_text,
                      embed_vocabulary)


class _StubHandler(BaseHTTPRequestHandler):
    # class-level knobs set per test
    mode = "ok"
    dims = 8
    seen: list = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).seen.append({
            "inputs": body["inputs"],
            "model": body.get("model"),
            "auth": self.headers.get("Authorization"),
        })
        if self.mode == "error":
            self.send_response(500)
            self.end_headers()
            return
        if self.mode == "shrinking_dims":
            dims = self.dims if len(self.seen) == 1 else self.dims - 2
        else:
            dims = self.dims
        vectors = [[float(len(text)) + i for i in range(dims)]
                   for text in body["inputs"]]
        payload = json.dumps({"vectors": vectors}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.mode = "ok"
    _StubHandler.seen = []
    yield f"http://127.0.0.1:{server.server_port}/embed"
    server.shutdown()


def _provider(endpoint, **kw):
    return ProviderConfig(kind=ProviderKind.HTTP_API, endpoint=endpoint,
                          model_name="stub-model", batch_size=3, **kw)


def test_http_embed_text_normalizes(stub_server):
    v = embed_text(_provider(stub_server), "abc")
    assert v.dtype == np.float32
    assert abs(np.linalg.norm(v) - 1.0) <= 1e-6
    assert _StubHandler.seen[0]["inputs"] == ["abc"]
    assert _StubHandler.seen[0]["model"] == "stub-model"


def test_http_bearer_token_from_env(stub_server, monkeypatch):
    monkeypatch.setenv("STUB_TOKEN", "sekret")
    embed_text(_provider(stub_server, auth_token_env_var="STUB_TOKEN"), "abc")
    assert _StubHandler.seen[0]["auth"] == "Bearer sekret"


def test_http_500_raises_provider_error_with_status(stub_server, vocab):
    _StubHandler.mode = "error"
    with pytest.raises(ProviderError) as exc:
        embed_vocabulary(_provider(stub_server), vocab)
    assert exc.value.status == 500
    # the error names the first code of the failing batch
    assert "10000001" in str(exc.value)


def test_http_dims_mismatch_across_calls(stub_server, vocab):
    _StubHandler.mode = "shrinking_dims"
    with pytest.raises(ProviderError, match="dims"):
        embed_vocabulary(_provider(stub_server), vocab)


def test_http_batches_ascending_code_order(stub_server, vocab):
    emb = embed_vocabulary(_provider(stub_server), vocab)
    sent = [t for call in _StubHandler.seen for t in call["inputs"]]
    by_code = sorted(vocab.current_pts, key=lambda t: t.code)
    assert sent == [t.label for t in by_code]
    assert emb.dims == 8
    assert len(emb.codes) == 180


def test_http_transport_failure():
    provider = _provider("http://127.0.0.1:9/nothing", timeout=0.5)
    with pytest.raises(ProviderError):
        embed_text(provider, "abc")


def test_lexical_branch_embeds_query_exactly_once(stub_server, vocab):
    from medquery import MatchMethod, best_term_match
    provider = _provider(stub_server)
    emb = embed_vocabulary(provider, vocab)
    calls_before = len(_StubHandler.seen)
    outcome = best_term_match("Tremor", vocab, emb, 0.90, provider)
    assert outcome.method is MatchMethod.LEXICAL
    # one provider call for the query embedding, none for top-3 selection
    assert len(_StubHandler.seen) == calls_before + 1
    assert _StubHandler.seen[-1]["inputs"] == ["Tremor"]
