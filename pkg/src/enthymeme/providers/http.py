"""JSON-over-HTTP clients for the model back ends.

Protocol (one POST per call):

=========  ===========================================  ===============================
endpoint   request body                                 response body
=========  ===========================================  ===============================
/embed     {"text": str}                                {"embedding": [float, ...]}
/nli       {"premise": str, "hypothesis": str}          {"ent": p, "con": p, "neu": p}
/generate  {"premise", "claim", "steps", "kind",        {"completion": str}
            "prompt"}
/parse     {"sentence": str}                            {"penman": str}
=========  ===========================================  ===============================

NLI probabilities are expected in [0, 1] and are multiplied by 100.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from typing import Any, Callable

import httpx
import numpy as np

from .base import (
    GenerationRequest,
    MalformedResponse,
    NliScores,
    ProviderUnavailable,
    require_text,
)
from .cache import DiskCache, make_key
from .generation import build_prompt, select_chain

log = logging.getLogger(__name__)

ENV_URLS = {
    "embed": "ENTHYMEME_EMBED_URL",
    "nli": "ENTHYMEME_NLI_URL",
    "generate": "ENTHYMEME_GEN_URL",
    "parse": "ENTHYMEME_PARSE_URL",
}
ENV_TIMEOUT = "ENTHYMEME_TIMEOUT"


def endpoint(base: str, operation: str) -> str:
    base = base.rstrip("/")
    suffix = "/" + operation
    return base if base.endswith(suffix) else base + suffix


class JsonClient:
    """POST JSON with retries and a cap on concurrent requests."""

    def __init__(
        self,
        url: str,
        timeout: float | None = None,
        attempts: int = 3,
        backoff: float = 0.5,
        max_in_flight: int = 8,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if timeout is None:
            timeout = float(os.environ.get(ENV_TIMEOUT, "30"))
        self.url = url
        self.attempts = attempts
        self.backoff = backoff
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def post(self, payload: dict[str, Any]) -> dict[str, Any]:
        last: Exception | None = None
        for attempt in range(self.attempts):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            try:
                with self._slots:
                    response = self._client.post(self.url, json=payload)
            except httpx.HTTPError as exc:
                last = exc
                log.warning("POST %s failed (attempt %d): %s", self.url, attempt + 1, exc)
                continue
            if response.status_code >= 500 or response.status_code == 429:
                last = ProviderUnavailable(f"{self.url} returned HTTP {response.status_code}")
                log.warning("POST %s returned %d (attempt %d)", self.url, response.status_code, attempt + 1)
                continue
            if response.status_code >= 400:
                raise ProviderUnavailable(f"{self.url} rejected the request: HTTP {response.status_code}")
            try:
                body = response.json()
            except ValueError as exc:
                raise MalformedResponse(f"{self.url} did not return JSON") from exc
            if not isinstance(body, dict):
                raise MalformedResponse(f"{self.url} returned {type(body).__name__}, expected an object")
            return body
        raise ProviderUnavailable(f"{self.url} unavailable after {self.attempts} attempts: {last}")

    def close(self) -> None:
        self._client.close()


def _field(body: dict, name: str, kind: type | tuple) -> Any:
    if name not in body or not isinstance(body[name], kind):
        raise MalformedResponse(f"response lacks a valid {name!r} field")
    return body[name]


class HttpEmbedder:
    def __init__(self, url: str, **kwargs: Any):
        self.provider_id = f"http:{url}"
        self.client = JsonClient(endpoint(url, "embed"), **kwargs)
        self._dim: int | None = None

    def embed(self, text: str) -> np.ndarray:
        require_text(text)
        values = _field(self.client.post({"text": text}), "embedding", list)
        try:
            vec = np.asarray(values, dtype=float)
        except (TypeError, ValueError) as exc:
            raise MalformedResponse("embedding holds non-numeric values") from exc
        if vec.ndim != 1 or not vec.size or not np.all(np.isfinite(vec)):
            raise MalformedResponse("embedding must be a non-empty finite vector")
        if self._dim is None:
            self._dim = vec.size
        elif vec.size != self._dim:
            raise MalformedResponse(f"embedding dimension changed from {self._dim} to {vec.size}")
        return vec


class HttpNli:
    def __init__(self, url: str, **kwargs: Any):
        self.provider_id = f"http:{url}"
        self.client = JsonClient(endpoint(url, "nli"), **kwargs)

    def nli(self, premise: str, hypothesis: str) -> NliScores:
        require_text(premise, "premise")
        require_text(hypothesis, "hypothesis")
        body = self.client.post({"premise": premise, "hypothesis": hypothesis})
        probs = [_field(body, k, (int, float)) for k in ("ent", "con", "neu")]
        return NliScores(*(100.0 * float(p) for p in probs))


class HttpGenerator:
    def __init__(self, url: str, **kwargs: Any):
        self.provider_id = f"http:{url}"
        self.client = JsonClient(endpoint(url, "generate"), **kwargs)

    def completion(self, request: GenerationRequest) -> str:
        body = self.client.post({
            "premise": request.premise,
            "claim": request.claim,
            "steps": request.steps,
            "kind": request.kind.value,
            "prompt": build_prompt(request.premise, request.claim, request.steps),
        })
        return _field(body, "completion", str)

    def generate(self, request: GenerationRequest) -> list[str]:
        return select_chain(self.completion(request), request)


class HttpParser:
    def __init__(self, url: str, **kwargs: Any):
        self.provider_id = f"http:{url}"
        self.client = JsonClient(endpoint(url, "parse"), **kwargs)

    def parse(self, sentence: str) -> str:
        require_text(sentence, "sentence")
        return _field(self.client.post({"sentence": sentence}), "penman", str)


# -- caching wrappers --------------------------------------------------------


class _Cached:
    def __init__(self, inner: Any, cache: DiskCache):
        self.inner = inner
        self.cache = cache
        self.provider_id = inner.provider_id

    def _lookup(self, operation: str, inputs: tuple, compute: Callable[[], Any]) -> Any:
        key = make_key(self.provider_id, operation, *inputs)
        hit = self.cache.get(key)
        if hit is not None:
            try:
                return json.loads(hit.decode("utf-8"))
            except ValueError:
                log.warning("cache entry %s is not valid JSON; recomputing", key)
        value = compute()
        self.cache.put(key, json.dumps(value, sort_keys=True).encode("utf-8"))
        return value


class CachedEmbedder(_Cached):
    def embed(self, text: str) -> np.ndarray:
        require_text(text)
        values = self._lookup("embed", (text,), lambda: [float(x) for x in self.inner.embed(text)])
        return np.asarray(values, dtype=float)


class CachedNli(_Cached):
    def nli(self, premise: str, hypothesis: str) -> NliScores:
        d = self._lookup("nli", (premise, hypothesis), lambda: self.inner.nli(premise, hypothesis).as_dict())
        return NliScores(d["ent"], d["con"], d["neu"])


class CachedGenerator(_Cached):
    def generate(self, request: GenerationRequest) -> list[str]:
        inputs = (request.premise, request.claim, request.steps, request.kind.value)
        return list(self._lookup("generate", inputs, lambda: list(self.inner.generate(request))))


class CachedParser(_Cached):
    def parse(self, sentence: str) -> str:
        return self._lookup("parse", (sentence,), lambda: self.inner.parse(sentence))


def with_cache(provider: Any, cache: DiskCache | None) -> Any:
    """Wrap ``provider`` in the matching cache layer (no-op without a cache)."""
    if provider is None or cache is None:
        return provider
    for method, wrapper in (("embed", CachedEmbedder), ("nli", CachedNli),
                            ("generate", CachedGenerator), ("parse", CachedParser)):
        if hasattr(provider, method):
            return wrapper(provider, cache)
    raise TypeError(f"don't know how to cache {type(provider).__name__}")
