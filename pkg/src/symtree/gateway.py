"""Chat-completion client with transcript record/replay and candidate scoring."""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

import httpx

from .errors import CacheMiss, EndpointError, ScorerUnavailable, Timeout
from .rendering import Messages, messages_to_dicts

ENDPOINT_ENV = "SYMTREE_ENDPOINT"
API_KEY_ENV = "SYMTREE_API_KEY"

LIVE = "live"
RECORD = "record"
REPLAY = "replay"
CACHE_POLICIES = (LIVE, RECORD, REPLAY)

_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class GenerationSettings:
    """Decoding parameters; the defaults make completions as deterministic
    as the endpoint allows."""

    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    top_p: float = 1.0
    frequency_penalty: float = 0.0
    max_tokens: int | None = None
    endpoint_url: str = ""

    def validate(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range: {self.temperature}")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError(f"top_p out of range: {self.top_p}")
        if self.max_tokens is not None and self.max_tokens < 1:
            raise ValueError(f"max_tokens must be positive: {self.max_tokens}")
        if not self.model:
            raise ValueError("model name must be nonempty")

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "frequency_penalty": self.frequency_penalty,
        }
        if self.max_tokens is not None:
            out["max_tokens"] = self.max_tokens
        if self.endpoint_url:
            out["endpoint_url"] = self.endpoint_url
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "GenerationSettings":
        return cls(
            model=data.get("model", "gpt-3.5-turbo"),
            temperature=data.get("temperature", 0.0),
            top_p=data.get("top_p", 1.0),
            frequency_penalty=data.get("frequency_penalty", 0.0),
            max_tokens=data.get("max_tokens"),
            endpoint_url=data.get("endpoint_url", ""),
        )


def fingerprint(messages: Messages, settings: GenerationSettings) -> str:
    """Content hash of a request.  Canonical JSON (sorted keys, fixed
    separators) keeps the digest platform-independent; endpoint_url is
    excluded so moving a transcript store between hosts still replays."""
    payload = {
        "messages": messages_to_dicts(messages),
        "settings": {
            "model": settings.model,
            "temperature": settings.temperature,
            "top_p": settings.top_p,
            "frequency_penalty": settings.frequency_penalty,
            "max_tokens": settings.max_tokens,
        },
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Transcript:
    fingerprint: str
    response: str
    model: str = ""
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "response": self.response,
            "model": self.model,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Transcript":
        return cls(
            fingerprint=data["fingerprint"],
            response=data["response"],
            model=data.get("model", ""),
            timestamp=data.get("timestamp", ""),
        )


class TranscriptStore:
    """Directory of content-addressed transcripts, one JSON file per request
    fingerprint.  Writes go through a temp file and an atomic rename so
    concurrent recorders never leave partial entries."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def __contains__(self, key: str) -> bool:
        return self._path(key).exists()

    def get(self, key: str) -> Transcript | None:
        path = self._path(key)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            return Transcript.from_dict(json.load(fh))

    def put(self, transcript: Transcript) -> None:
        path = self._path(transcript.fingerprint)
        if path.exists():
            return  # content-addressed: retries never duplicate an entry
        tmp = path.with_suffix(f".tmp.{os.getpid()}")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(transcript.to_dict(), fh, ensure_ascii=False, indent=1)
        os.replace(tmp, path)

    def keys(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))


@dataclass(frozen=True)
class CandidateQuery:
    """A ranking request: one prompt plus the candidate completions to score."""

    messages: Messages
    candidates: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("CandidateQuery needs at least one candidate")


class Scorer(Protocol):
    def score(self, query: CandidateQuery) -> Sequence[float]:
        """One score per candidate, higher is better."""


class FixtureScorer:
    """Replay stand-in for endpoints that expose no log-probabilities: scores
    come from a prebuilt table keyed by candidate text."""

    def __init__(self, table: Mapping[str, float], default: float | None = None) -> None:
        self.table = dict(table)
        self.default = default

    def score(self, query: CandidateQuery) -> list[float]:
        out = []
        for cand in query.candidates:
            if cand in self.table:
                out.append(self.table[cand])
            elif self.default is not None:
                out.append(self.default)
            else:
                raise ScorerUnavailable(f"no fixture score for candidate {cand!r}")
        return out


def score_candidates(
    query: CandidateQuery, scorer: Scorer | None
) -> list[tuple[str, float]]:
    """Rank candidates by scorer output, descending; ties keep candidate order."""
    if scorer is None:
        raise ScorerUnavailable("no scorer configured and endpoint exposes no scoring mode")
    scores = list(scorer.score(query))
    if len(scores) != len(query.candidates):
        raise ScorerUnavailable(
            f"scorer returned {len(scores)} scores for {len(query.candidates)} candidates"
        )
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return [(query.candidates[i], scores[i]) for i in order]


def rank_of(ranked: Sequence[tuple[str, float]], gold: str) -> int:
    """1-based position of gold in a ranking from score_candidates."""
    for pos, (cand, _) in enumerate(ranked, start=1):
        if cand == gold:
            return pos
    raise ValueError(f"gold candidate {gold!r} not in ranking")


class ChatGateway:
    """Client for chat-completion endpoints with a transcript cache.

    Policies: "live" always calls the endpoint and persists nothing;
    "record" returns the cached response when one exists, otherwise calls
    the endpoint and persists the transcript (so interrupted runs resume
    without re-spending requests); "replay" is offline and raises CacheMiss
    on unseen fingerprints.
    """

    def __init__(
        self,
        store: TranscriptStore | None = None,
        endpoint_url: str | None = None,
        api_key: str | None = None,
        max_retries: int = 3,
        backoff: float = 0.5,
        request_timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.store = store
        self.endpoint_url = endpoint_url or os.environ.get(ENDPOINT_ENV, "")
        self.api_key = api_key or os.environ.get(API_KEY_ENV, "")
        self.max_retries = max_retries
        self.backoff = backoff
        self._sleep = sleep
        self._client = httpx.Client(transport=transport, timeout=request_timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ChatGateway":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def complete(
        self,
        messages: Messages,
        settings: GenerationSettings,
        cache_policy: str = REPLAY,
    ) -> str:
        if cache_policy not in CACHE_POLICIES:
            raise ValueError(f"unknown cache policy: {cache_policy!r}")
        settings.validate()
        key = fingerprint(messages, settings)

        if cache_policy in (RECORD, REPLAY) and self.store is not None:
            hit = self.store.get(key)
            if hit is not None:
                return hit.response
        if cache_policy == REPLAY:
            raise CacheMiss(f"no transcript for fingerprint {key}")
        if cache_policy == RECORD and self.store is None:
            raise ValueError("record policy requires a transcript store")

        text, model = self._call_endpoint(messages, settings)
        if cache_policy == RECORD:
            stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
            self.store.put(Transcript(key, text, model=model, timestamp=stamp))
        return text

    def complete_many(
        self,
        message_lists: Sequence[Messages],
        settings: GenerationSettings,
        cache_policy: str = REPLAY,
        parallelism: int = 4,
    ) -> list[str]:
        """Complete a batch; results come back in request order regardless of
        which worker finishes first."""
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if not message_lists:
            return []
        if parallelism == 1 or len(message_lists) == 1:
            return [self.complete(m, settings, cache_policy) for m in message_lists]
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [
                pool.submit(self.complete, m, settings, cache_policy)
                for m in message_lists
            ]
            return [f.result() for f in futures]

    def _call_endpoint(
        self, messages: Messages, settings: GenerationSettings
    ) -> tuple[str, str]:
        url = settings.endpoint_url or self.endpoint_url
        if not url:
            raise EndpointError(
                f"no endpoint URL configured (set {ENDPOINT_ENV} or pass endpoint_url)"
            )
        body = {
            "model": settings.model,
            "messages": messages_to_dicts(messages),
            "temperature": settings.temperature,
            "top_p": settings.top_p,
            "frequency_penalty": settings.frequency_penalty,
        }
        if settings.max_tokens is not None:
            body["max_tokens"] = settings.max_tokens
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                resp = self._client.post(url, json=body, headers=headers)
            except httpx.TimeoutException as exc:
                last_error = Timeout(f"request timed out after {attempt + 1} attempts: {exc}")
                continue
            except httpx.HTTPError as exc:
                last_error = EndpointError(f"transport failure: {exc}")
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last_error = EndpointError(f"status {resp.status_code}: {resp.text}")
                continue
            if resp.status_code != 200:
                raise EndpointError(f"status {resp.status_code}: {resp.text}")
            return _extract_text(resp), settings.model
        raise last_error if last_error is not None else EndpointError("no attempts made")


def _extract_text(resp: httpx.Response) -> str:
    try:
        data = resp.json()
        return data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise EndpointError(f"malformed completion payload: {exc}: {resp.text[:200]}")
