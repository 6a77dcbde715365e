"""Scoring backends.

A backend answers three questions about text: how likely is this
continuation after this context (natural-log), what is this text's
embedding, and what are the top next words.  `MockLm` serves all three
from a JSON table and is what the test suite and the bundled fixtures
use; `HttpLm` speaks the wire protocol in docs/wire.md to a live
sidecar.  `WordVectors` is a minimal embed-only table for static word
vectors.

Mock table format (see docs/schemas.md)::

    {
      "conditional": {"<context>": {"<continuation>": -4.0, ...}, ...},
      "embeddings":  {"<text>": [0.1, ...], ...},
      "topk":        {"<context>": [["word", -2.3], ...], ...}
    }

Keys are matched after stripping surrounding whitespace, so callers may
pass continuations with their natural leading space.
"""

from __future__ import annotations

import json
import math
import threading
import time
from typing import Protocol, Sequence

import numpy as np
import requests

from surpdec.errors import BackendUnavailable, MissingEntry, SchemaError, ZeroNormEmbedding


class LmBackend(Protocol):
    def logprob(self, context: str, continuation: str) -> float: ...

    def logprob_batch(self, context: str, continuations: Sequence[str]) -> list[float]: ...

    def embed(self, text: str) -> np.ndarray: ...

    def topk(self, context: str, k: int) -> list[tuple[str, float]]: ...


class MockLm:
    """Table-driven backend.

    Unlisted continuations score at `floor` (default -20 nats); pass
    floor=None to raise MissingEntry instead.  An unlisted context is
    always MissingEntry: that is a fixture bug, not a rare continuation.
    """

    def __init__(self, table: dict, floor: float | None = -20.0):
        self.floor = floor
        self._conditional: dict[str, dict[str, float]] = {}
        for context, conts in table.get("conditional", {}).items():
            entry = {}
            total = 0.0
            for cont, lp in conts.items():
                lp = float(lp)
                if not math.isfinite(lp) or lp > 0:
                    raise SchemaError(
                        f"conditional logprob for {cont!r} must be finite and <= 0, got {lp!r}"
                    )
                entry[cont.strip()] = lp
                total += math.exp(lp)
            if total > 1.0 + 1e-6:
                raise SchemaError(
                    f"conditional probabilities after context {context!r} sum to {total}"
                )
            self._conditional[context.strip()] = entry
        self._embeddings: dict[str, np.ndarray] = {}
        for text, vec in table.get("embeddings", {}).items():
            arr = np.asarray(vec, dtype=np.float64)
            if float(np.linalg.norm(arr)) < 1e-12:
                raise ZeroNormEmbedding(f"embedding for {text!r} has zero norm")
            self._embeddings[text.strip()] = arr
        self._topk: dict[str, list[tuple[str, float]]] = {}
        for context, pairs in table.get("topk", {}).items():
            self._topk[context.strip()] = [(str(t), float(lp)) for t, lp in pairs]

    @classmethod
    def load(cls, path, floor: float | None = -20.0) -> "MockLm":
        with open(path, encoding="utf-8") as f:
            try:
                table = json.load(f)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{path}: not valid JSON ({e})") from None
        return cls(table, floor=floor)

    def logprob(self, context: str, continuation: str) -> float:
        conts = self._conditional.get(context.strip())
        if conts is None:
            raise MissingEntry(f"no conditional entries for context {context!r}")
        lp = conts.get(continuation.strip())
        if lp is None:
            if self.floor is None:
                raise MissingEntry(f"no entry for {continuation!r} after {context!r}")
            return self.floor
        return lp

    def logprob_batch(self, context: str, continuations: Sequence[str]) -> list[float]:
        return [self.logprob(context, c) for c in continuations]

    def embed(self, text: str) -> np.ndarray:
        vec = self._embeddings.get(text.strip())
        if vec is None:
            raise MissingEntry(f"no embedding for {text!r}")
        return vec

    def topk(self, context: str, k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        pairs = self._topk.get(context.strip())
        if pairs is None:
            conts = self._conditional.get(context.strip())
            if conts is None:
                raise MissingEntry(f"no topk entries for context {context!r}")
            pairs = [(c, lp) for c, lp in conts.items()]
        ranked = sorted(pairs, key=lambda p: (-p[1], p[0]))
        return ranked[:k]


class WordVectors:
    """Embed-only backend over a word -> vector JSON table."""

    def __init__(self, vectors: dict):
        self._vectors: dict[str, np.ndarray] = {}
        for word, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if float(np.linalg.norm(arr)) < 1e-12:
                raise ZeroNormEmbedding(f"vector for {word!r} has zero norm")
            self._vectors[word.strip()] = arr

    @classmethod
    def load(cls, path) -> "WordVectors":
        with open(path, encoding="utf-8") as f:
            try:
                return cls(json.load(f))
            except json.JSONDecodeError as e:
                raise SchemaError(f"{path}: not valid JSON ({e})") from None

    @property
    def words(self) -> list[str]:
        return list(self._vectors)

    def __contains__(self, word: str) -> bool:
        return word.strip() in self._vectors

    def embed(self, text: str) -> np.ndarray:
        vec = self._vectors.get(text.strip())
        if vec is None:
            raise MissingEntry(f"no word vector for {text!r}")
        return vec


class HttpLm:
    """Client for a scoring sidecar speaking the docs/wire.md protocol.

    Requests are idempotent, so transient failures (connection errors
    and 5xx responses) are retried on the `retry_delays` schedule before
    BackendUnavailable is raised.  Safe to share across threads.
    """

    def __init__(
        self,
        base_url: str,
        timeout: float = 60.0,
        retry_delays: Sequence[float] = (0.25, 1.0, 4.0),
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retry_delays = tuple(retry_delays)
        self._local = threading.local()

    def _session(self) -> requests.Session:
        if not hasattr(self._local, "session"):
            self._local.session = requests.Session()
        return self._local.session

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        url = self.base_url + path
        last_error = None
        for attempt in range(len(self.retry_delays) + 1):
            if attempt > 0:
                time.sleep(self.retry_delays[attempt - 1])
            try:
                if method == "GET":
                    resp = self._session().get(url, timeout=self.timeout)
                else:
                    resp = self._session().post(url, json=payload, timeout=self.timeout)
            except requests.RequestException as e:
                last_error = str(e)
                continue
            if resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}: {resp.text[:200]}"
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(
                    f"{url} answered HTTP {resp.status_code}: {resp.text[:200]}"
                )
            return resp.json()
        raise BackendUnavailable(f"{url} unreachable after retries: {last_error}")

    def logprob(self, context: str, continuation: str) -> float:
        return self.logprob_batch(context, [continuation])[0]

    def logprob_batch(self, context: str, continuations: Sequence[str]) -> list[float]:
        resp = self._request(
            "POST", "/score", {"context": context, "continuations": list(continuations)}
        )
        return [float(x) for x in resp["logprobs_nats"]]

    def embed(self, text: str) -> np.ndarray:
        resp = self._request("POST", "/embed", {"texts": [text]})
        return np.asarray(resp["vectors"][0], dtype=np.float64)

    def topk(self, context: str, k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        resp = self._request("POST", "/topk", {"context": context, "k": k})
        return list(zip(resp["tokens"], (float(x) for x in resp["logprobs_nats"])))

    def healthz(self) -> dict:
        return self._request("GET", "/healthz")
