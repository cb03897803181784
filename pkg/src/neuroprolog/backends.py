"""Model backends: remote chat completions, a scripted mock, and transcript record/replay."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Protocol

import httpx

from .prompts import PromptBundle

log = logging.getLogger(__name__)

API_KEY_ENV = "NEUROPROLOG_API_KEY"
DEFAULT_MAX_TOKENS = 1024


class BackendError(RuntimeError):
    """Base for failures that are about the backend, not the generated program."""


class BackendUnavailable(BackendError):
    pass


class ScriptMiss(BackendError):
    pass


class ReplayMismatch(BackendError):
    pass


@dataclass(frozen=True)
class DecodingParams:
    temperature: float = 0.0
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self):
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


@dataclass(frozen=True)
class ScriptEntry:
    problem_id: str
    attempt: int
    response: str


@dataclass(frozen=True)
class TranscriptRecord:
    problem_id: str
    attempt: int
    prompt_digest: str
    response: str
    latency_ms: float


def prompt_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class Backend(Protocol):
    def generate(self, prompt: PromptBundle, params: DecodingParams) -> str: ...


class ScriptedBackend:
    """Deterministic backend answering from a (problem_id, attempt) table."""

    def __init__(self, entries):
        table: dict[tuple[str, int], str] = {}
        for e in entries:
            key = (e.problem_id, e.attempt)
            if key in table:
                raise ValueError(f"duplicate script entry for {key}")
            table[key] = e.response
        self._table = table

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedBackend:
        with open(path, encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        return cls(ScriptEntry(str(r["problem_id"]), int(r["attempt"]), r["response"]) for r in rows)

    @property
    def problem_ids(self) -> set[str]:
        return {pid for pid, _ in self._table}

    def generate(self, prompt: PromptBundle, params: DecodingParams) -> str:
        try:
            return self._table[(prompt.problem_id, prompt.attempt)]
        except KeyError:
            raise ScriptMiss(f"no scripted response for {prompt.problem_id!r} attempt {prompt.attempt}") from None


class RemoteBackend:
    """OpenAI-compatible ``/chat/completions`` client; one user message per prompt.

    Transport errors and 5xx responses are retried with exponential backoff;
    4xx responses fail immediately.
    """

    def __init__(self, base_url: str, model: str, api_key: str | None = None,
                 retries: int = 3, backoff_s: float = 1.0, timeout_s: float = 120.0,
                 strict_greedy: bool = True, transport: httpx.BaseTransport | None = None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.retries = retries
        self.backoff_s = backoff_s
        self.strict_greedy = strict_greedy
        key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self._client = httpx.Client(timeout=timeout_s, headers=headers, transport=transport)

    def generate(self, prompt: PromptBundle, params: DecodingParams) -> str:
        if self.strict_greedy and params.temperature != 0:
            raise ValueError("greedy decoding (temperature=0) is required in strict-greedy mode")
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt.text}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        last = None
        for attempt in range(self.retries):
            try:
                resp = self._client.post(f"{self.base_url}/chat/completions", json=payload)
            except httpx.TransportError as exc:
                last = f"transport error: {exc}"
            else:
                if resp.status_code < 400:
                    try:
                        return resp.json()["choices"][0]["message"]["content"] or ""
                    except (ValueError, KeyError, IndexError, TypeError) as exc:
                        raise BackendUnavailable(f"malformed completion response: {exc}") from exc
                if resp.status_code < 500:
                    raise BackendUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}")
                last = f"HTTP {resp.status_code}"
            log.warning("backend attempt %d/%d failed: %s", attempt + 1, self.retries, last)
            if attempt + 1 < self.retries:
                time.sleep(self.backoff_s * 2 ** attempt)
        raise BackendUnavailable(f"gave up after {self.retries} attempts: {last}")

    def close(self):
        self._client.close()


class RecordingBackend:
    """Wraps another backend and appends every call to a JSON Lines transcript."""

    def __init__(self, inner: Backend, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("", encoding="utf-8")

    def generate(self, prompt: PromptBundle, params: DecodingParams) -> str:
        start = time.monotonic()
        text = self.inner.generate(prompt, params)
        rec = TranscriptRecord(prompt.problem_id, prompt.attempt, prompt_digest(prompt.text),
                               text, (time.monotonic() - start) * 1000.0)
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(asdict(rec)) + "\n")
        return text


def load_transcript(path: str | Path) -> list[TranscriptRecord]:
    with open(path, encoding="utf-8") as fh:
        return [TranscriptRecord(**json.loads(line)) for line in fh if line.strip()]


class ReplayBackend:
    """Serves recorded responses by prompt digest; an unseen prompt means the run diverged."""

    def __init__(self, records):
        self._by_digest = {r.prompt_digest: r.response for r in records}

    @classmethod
    def from_file(cls, path: str | Path) -> ReplayBackend:
        return cls(load_transcript(path))

    def generate(self, prompt: PromptBundle, params: DecodingParams) -> str:
        digest = prompt_digest(prompt.text)
        try:
            return self._by_digest[digest]
        except KeyError:
            raise ReplayMismatch(
                f"prompt for {prompt.problem_id!r} attempt {prompt.attempt} not in transcript "
                f"(digest {digest[:12]})") from None
