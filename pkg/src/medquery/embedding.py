"""Embedding providers, cosine similarity, and the binary vector cache.

Two providers are supported. LEXICAL_HASH is the default: a pure,
platform-independent feature-hashing embedder (lowercase word tokens
plus character 2- and 3-grams, FNV-1a 64-bit, signed buckets) that
makes every downstream result reproducible offline. HTTP_API posts
``{"model": m, "inputs": [...]}`` to a JSON endpoint and expects
``{"vectors": [[...], ...]}`` back.

All vectors are float32 and unit-norm, except the all-zero vector kept
for degenerate inputs (no hashable features); cosine against it is 0.
"""

from __future__ import annotations

import os
import re
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from . import _kernels
from .errors import FormatError, InputError, ProviderError
from .terminology import Vocabulary

MAGIC = b"AMQEMB1\x00"
DEFAULT_DIMS = 256

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class ProviderKind(Enum):
    LEXICAL_HASH = "lexical"
    HTTP_API = "http"


@dataclass(frozen=True)
class ProviderConfig:
    kind: ProviderKind = ProviderKind.LEXICAL_HASH
    dims: int = DEFAULT_DIMS
    endpoint: str = ""
    model_name: str = ""
    auth_token_env_var: str = ""
    batch_size: int = 64
    timeout: float = 30.0

    def __post_init__(self):
        if self.kind is ProviderKind.LEXICAL_HASH and self.dims < 8:
            raise InputError(f"LEXICAL_HASH dims must be >= 8, got {self.dims}")
        if self.kind is ProviderKind.HTTP_API and not self.endpoint:
            raise InputError("HTTP_API provider requires an endpoint")

    @property
    def provider_id(self) -> str:
        if self.kind is ProviderKind.LEXICAL_HASH:
            return f"lexical-hash-{self.dims}"
        return f"http:{self.model_name}"


@dataclass(frozen=True)
class EmbeddingSet:
    dims: int
    provider_id: str
    vocab_version: str
    codes: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)  # (len(codes), dims) float32

    def __post_init__(self):
        object.__setattr__(self, "_row_of",
                           {c: i for i, c in enumerate(self.codes)})
        object.__setattr__(self, "_matrix64", None)

    @property
    def by_code(self) -> dict[str, np.ndarray]:
        return {c: self.matrix[i] for i, c in enumerate(self.codes)}

    def vector(self, code: str) -> np.ndarray:
        try:
            return self.matrix[self._row_of[code]]
        except KeyError:
            raise InputError(f"no embedding for code {code!r}")

    def row_of(self, code: str) -> int:
        try:
            return self._row_of[code]
        except KeyError:
            raise InputError(f"no embedding for code {code!r}")

    def matrix64(self) -> np.ndarray:
        if self._matrix64 is None:
            object.__setattr__(self, "_matrix64",
                               self.matrix.astype(np.float64))
        return self._matrix64


def _hash_features(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Pack the feature stream of `text` as UTF-8 byte runs.

    Accumulation order is fixed: word tokens in text order, then
    character 2-grams, then 3-grams, all over the lowercased text.
    """
    lowered = text.lower()
    features = _TOKEN_RE.findall(lowered)
    features += [lowered[i:i + 2] for i in range(len(lowered) - 1)]
    features += [lowered[i:i + 3] for i in range(len(lowered) - 2)]
    offsets = np.zeros(len(features) + 1, dtype=np.int64)
    encoded = [f.encode("utf-8") for f in features]
    np.cumsum([len(b) for b in encoded], out=offsets[1:])
    flat = np.frombuffer(b"".join(encoded), dtype=np.uint8)
    return flat, offsets


def _normalize_counts(counts: np.ndarray) -> np.ndarray:
    # counts are exact small integers in float64, so the squared norm is
    # exact and the normalized vector is identical on every platform.
    norm_sq = float(np.dot(counts, counts))
    if norm_sq == 0.0:
        return np.zeros(len(counts), dtype=np.float32)
    return (counts / np.sqrt(norm_sq)).astype(np.float32)


def _embed_lexical(config: ProviderConfig, text: str) -> np.ndarray:
    flat, offsets = _hash_features(text)
    counts = _kernels.hash_counts(flat, offsets, config.dims)
    return _normalize_counts(counts)


def _unit_or_zero(values: Iterable[float], dims_hint: int | None) -> np.ndarray:
    v = np.asarray(list(values), dtype=np.float64)
    if v.ndim != 1 or (dims_hint is not None and len(v) != dims_hint):
        raise ProviderError(
            f"provider returned a vector of {len(v)} dims, expected {dims_hint}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return np.zeros(len(v), dtype=np.float32)
    return (v / norm).astype(np.float32)


def _embed_http_batch(config: ProviderConfig, texts: list[str],
                      dims_hint: int | None) -> list[np.ndarray]:
    import requests

    headers = {}
    if config.auth_token_env_var:
        token = os.environ.get(config.auth_token_env_var)
        if token:
            headers["Authorization"] = f"Bearer {token}"
    try:
        resp = requests.post(
            config.endpoint,
            json={"model": config.model_name, "inputs": texts},
            headers=headers,
            timeout=config.timeout,
        )
    except requests.RequestException as e:
        raise ProviderError(f"transport failure: {e}") from e
    if not 200 <= resp.status_code < 300:
        raise ProviderError(f"provider returned HTTP {resp.status_code}",
                            status=resp.status_code)
    try:
        vectors = resp.json()["vectors"]
    except (ValueError, KeyError) as e:
        raise ProviderError(f"malformed provider response: {e}") from e
    if len(vectors) != len(texts):
        raise ProviderError(
            f"provider returned {len(vectors)} vectors for {len(texts)} inputs")
    out = []
    for vec in vectors:
        u = _unit_or_zero(vec, dims_hint)
        dims_hint = len(u)
        out.append(u)
    return out


def embed_text(provider: ProviderConfig, text: str) -> np.ndarray:
    """Embed one text as a unit-norm float32 vector."""
    if not text.strip():
        raise InputError("cannot embed empty text")
    if provider.kind is ProviderKind.LEXICAL_HASH:
        return _embed_lexical(provider, text)
    return _embed_http_batch(provider, [text], None)[0]


def embed_vocabulary(provider: ProviderConfig,
                     vocab: Vocabulary) -> EmbeddingSet:
    """Embed every current PT; rows are stored in ascending code order."""
    terms = sorted(vocab.current_pts, key=lambda t: t.code)
    if not terms:
        raise InputError("vocabulary has no current PTs to embed")
    codes = tuple(t.code for t in terms)
    vectors: list[np.ndarray] = []
    if provider.kind is ProviderKind.LEXICAL_HASH:
        for term in terms:
            vectors.append(_embed_lexical(provider, term.label))
        dims = provider.dims
    else:
        dims = None
        for start in range(0, len(terms), provider.batch_size):
            batch = terms[start:start + provider.batch_size]
            try:
                vectors.extend(_embed_http_batch(
                    provider, [t.label for t in batch], dims))
            except ProviderError as e:
                raise ProviderError(
                    f"while embedding code {batch[0].code}: {e}",
                    status=e.status) from e
            dims = len(vectors[-1])
    matrix = np.vstack(vectors).astype(np.float32)
    return EmbeddingSet(dims=int(dims), provider_id=provider.provider_id,
                        vocab_version=vocab.version, codes=codes,
                        matrix=matrix)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """dot(a,b)/(|a||b|), 0 against a zero vector, clamped to [-1, 1]."""
    if len(a) != len(b):
        raise InputError(f"dims mismatch: {len(a)} vs {len(b)}")
    a64 = np.asarray(a, dtype=np.float64)
    b64 = np.asarray(b, dtype=np.float64)
    na = float(np.linalg.norm(a64))
    nb = float(np.linalg.norm(b64))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a64, b64) / (na * nb), -1.0, 1.0))


Sink = Union[str, Path, IO[bytes]]


def save_embeddings(emb: EmbeddingSet, sink: Sink) -> int:
    """Write the bit-exact binary cache; returns the byte count."""
    provider_id = emb.provider_id.encode("utf-8")
    vocab_version = emb.vocab_version.encode("utf-8")
    chunks = [
        MAGIC,
        struct.pack("<II", emb.dims, len(emb.codes)),
        struct.pack("<H", len(provider_id)), provider_id,
        struct.pack("<H", len(vocab_version)), vocab_version,
    ]
    for i, code in enumerate(emb.codes):
        raw = code.encode("utf-8")
        chunks.append(struct.pack("<H", len(raw)))
        chunks.append(raw)
        chunks.append(np.ascontiguousarray(emb.matrix[i], dtype="<f4").tobytes())
    blob = b"".join(chunks)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(blob)
    else:
        sink.write(blob)
    return len(blob)


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated stream while reading {what}",
                              offset=self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def load_embeddings(source: Sink) -> EmbeddingSet:
    """Read a cache written by save_embeddings; round-trip is bit-exact."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    cur = _Cursor(data)
    magic = cur.take(len(MAGIC), "magic")
    if magic != MAGIC:
        raise FormatError("bad magic", offset=0)
    dims, count = struct.unpack("<II", cur.take(8, "header"))
    (pid_len,) = struct.unpack("<H", cur.take(2, "provider_id length"))
    provider_id = cur.take(pid_len, "provider_id").decode("utf-8")
    (ver_len,) = struct.unpack("<H", cur.take(2, "vocab_version length"))
    vocab_version = cur.take(ver_len, "vocab_version").decode("utf-8")

    codes = []
    rows = []
    for i in range(count):
        (code_len,) = struct.unpack("<H", cur.take(2, f"code length #{i}"))
        codes.append(cur.take(code_len, f"code #{i}").decode("utf-8"))
        raw = cur.take(4 * dims, f"vector #{i}")
        rows.append(np.frombuffer(raw, dtype="<f4"))
    if cur.pos != len(data):
        raise FormatError(
            f"{len(data) - cur.pos} trailing bytes after {count} records",
            offset=cur.pos)
    if len(set(codes)) != count:
        raise FormatError("duplicate codes in cache", offset=cur.pos)
    matrix = (np.vstack(rows).astype(np.float32) if rows
              else np.zeros((0, dims), dtype=np.float32))
    return EmbeddingSet(dims=dims, provider_id=provider_id,
                        vocab_version=vocab_version, codes=tuple(codes),
                        matrix=matrix)
