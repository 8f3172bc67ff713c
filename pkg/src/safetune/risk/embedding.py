"""Prompt embeddings: remote sentence-encoder client or local feature hashing.

The local mode exists so the entire pipeline runs offline and
deterministically: tokens (unigrams and bigrams of lowercased alphanumeric
words) are hashed with a seeded 64-bit FNV-1a into one of D buckets with a
parity sign, accumulated, and L2-normalized. The remote mode posts
``{"model": ..., "input": [text]}`` and reads ``data[0].embedding``.
"""
from __future__ import annotations

import os
import re
import threading
import time
from dataclasses import dataclass, field

import numpy as np
import requests

from ..errors import ConfigError, EmptyTextError, ProviderError

DEFAULT_DIM = 1024

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

_WORD_RE = re.compile(r"[a-z0-9]+")


@dataclass
class RemoteEndpoint:
    url: str
    model: str = "gte-large"
    auth_token_env: str = "SAFETUNE_API_TOKEN"
    timeout_ms: int = 10_000
    retries: int = 2
    max_in_flight: int = 8


@dataclass
class EmbeddingProviderConfig:
    mode: str = "local_hash"  # local_hash | remote
    dim: int = DEFAULT_DIM
    seed: int = 0
    remote: RemoteEndpoint | None = None
    _gate: threading.Semaphore = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in ("local_hash", "remote"):
            raise ConfigError(f"unknown embedding mode {self.mode!r}")
        if self.mode == "remote" and self.remote is None:
            raise ConfigError("remote mode requires a RemoteEndpoint")
        if self.mode == "remote":
            self._gate = threading.Semaphore(self.remote.max_in_flight)


@dataclass
class Embedding:
    values: np.ndarray
    provider_tag: str

    def __len__(self):
        return len(self.values)


def _fnv1a(data: bytes, seed: int) -> int:
    h = (_FNV_OFFSET ^ (seed & _MASK64)) & _MASK64
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _hash_text(text: str, dim: int, seed: int) -> np.ndarray:
    words = _WORD_RE.findall(text.lower())
    vec = np.zeros(dim, dtype=np.float64)
    grams = list(words)
    grams.extend(f"{a} {b}" for a, b in zip(words, words[1:]))
    for gram in grams:
        h = _fnv1a(gram.encode("utf-8"), seed)
        sign = -1.0 if h % 2 else 1.0
        vec[h % dim] += sign
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec


def _auth_headers(endpoint: RemoteEndpoint) -> dict:
    headers = {"Content-Type": "application/json"}
    token = os.environ.get(endpoint.auth_token_env, "")
    if token:
        headers["Authorization"] = f"Bearer {token}"
    return headers


def post_with_retries(endpoint: RemoteEndpoint, payload: dict, gate=None) -> dict:
    """POST JSON with bounded retries and exponential backoff."""
    last_error = None
    for attempt in range(endpoint.retries + 1):
        if attempt:
            time.sleep(0.1 * (2 ** (attempt - 1)))
        try:
            if gate is not None:
                gate.acquire()
            try:
                response = requests.post(
                    endpoint.url, json=payload, headers=_auth_headers(endpoint),
                    timeout=endpoint.timeout_ms / 1000.0)
            finally:
                if gate is not None:
                    gate.release()
            response.raise_for_status()
            return response.json()
        except (requests.RequestException, ValueError) as exc:
            last_error = exc
    raise ProviderError(f"POST {endpoint.url} failed after "
                        f"{endpoint.retries + 1} attempts: {last_error}")


def embed(provider: EmbeddingProviderConfig, text: str) -> Embedding:
    if not text or not text.strip():
        raise EmptyTextError("cannot embed empty text")
    if provider.mode == "local_hash":
        values = _hash_text(text, provider.dim, provider.seed)
        return Embedding(values=values, provider_tag=f"local_hash:d{provider.dim}:s{provider.seed}")
    endpoint = provider.remote
    body = post_with_retries(endpoint, {"model": endpoint.model, "input": [text]},
                             gate=provider._gate)
    try:
        raw = body["data"][0]["embedding"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProviderError(f"malformed embedding response: {exc}") from exc
    values = np.asarray(raw, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] != provider.dim:
        raise ProviderError(
            f"embedding dimension {values.shape} != expected ({provider.dim},)")
    if not np.all(np.isfinite(values)):
        raise ProviderError("embedding contains non-finite values")
    return Embedding(values=values, provider_tag=f"remote:{endpoint.model}")
