"""Language-model backend boundary.

A backend turns a :class:`PromptRecord` into raw reply text. The HTTP
client speaks the common chat-completions schema (``model``, ``messages``,
``temperature``). Replies are parsed with :func:`parse_structured`, which
extracts the first balanced JSON object and validates it against one of
four small schemas.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Sequence, TypeVar

import httpx
import numpy as np

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

ENV_ENDPOINT = "TOPICSIM_ENDPOINT"
ENV_TOKEN = "TOPICSIM_API_KEY"
ENV_MODEL = "TOPICSIM_MODEL"


class BackendError(RuntimeError):
    """A backend call could not produce a usable reply."""


class TransportError(BackendError):
    pass


class BackendTimeoutError(BackendError):
    pass


class MalformedReplyError(BackendError):
    """The reply stayed unparseable after the one allowed re-ask."""


class ParseError(ValueError):
    pass


class Purpose(str, Enum):
    NEIGHBOR_MATCH = "neighbor-match"
    TOPIC_RECO = "topic-reco"
    BELIEF_UPDATE = "belief-update"
    MEMORY_CONSOLIDATE = "memory-consolidate"


@dataclass(frozen=True)
class PromptRecord:
    purpose: Purpose
    rendered_text: str
    agent: int
    round: int
    system: str = ""
    # structured inputs the prompt was rendered from; the stub reads these, never the text
    payload: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.rendered_text.strip():
            raise ValueError("rendered prompt must be non-empty")


@dataclass
class CallRecord:
    prompt: PromptRecord
    reply: str | None
    error: str | None
    elapsed: float

    def to_json(self) -> dict[str, Any]:
        return {
            "purpose": self.prompt.purpose.value,
            "agent": self.prompt.agent,
            "round": self.prompt.round,
            "system": self.prompt.system,
            "prompt": self.prompt.rendered_text,
            "reply": self.reply,
            "error": self.error,
            "elapsed": round(self.elapsed, 4),
        }


class OpinionBackend:
    """Base class. `textual` backends receive rendered prompts and return text.

    A non-textual backend (the numeric one) is never asked for text; callers
    evaluate the deterministic rules directly.
    """

    kind = "base"
    textual = True
    max_concurrency = 1

    def __init__(self, prompt_log: str | Path | None = None) -> None:
        self.calls: list[CallRecord] = []
        self._lock = threading.Lock()
        self._prompt_log = Path(prompt_log) if prompt_log else None

    def complete(self, prompt: PromptRecord, rng: np.random.Generator | None = None) -> str:
        start = time.perf_counter()
        try:
            reply = self._complete(prompt, rng)
        except Exception as exc:
            self._log(CallRecord(prompt, None, f"{type(exc).__name__}: {exc}",
                                 time.perf_counter() - start))
            raise
        self._log(CallRecord(prompt, reply, None, time.perf_counter() - start))
        return reply

    def _complete(self, prompt: PromptRecord, rng: np.random.Generator | None) -> str:
        raise NotImplementedError

    def _log(self, rec: CallRecord) -> None:
        with self._lock:
            self.calls.append(rec)
            if self._prompt_log is not None:
                with self._prompt_log.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")

    def set_prompt_log(self, path: str | Path | None) -> None:
        self._prompt_log = Path(path) if path else None

    def map(self, fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
        """Apply `fn` to every item; results come back in input order."""
        if self.max_concurrency <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.max_concurrency) as pool:
            return list(pool.map(fn, items))

    def close(self) -> None:
        pass


class ChatBackend(OpinionBackend):
    """Chat-completions over HTTP with exponential backoff on transport failures."""

    kind = "llm-endpoint"

    def __init__(
        self,
        endpoint: str | None = None,
        model_name: str | None = None,
        temperature: float = 0.5,
        max_retries: int = 3,
        request_timeout: float = 60.0,
        max_concurrency: int = 4,
        backoff_base: float = 1.0,
        token: str | None = None,
        prompt_log: str | Path | None = None,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        super().__init__(prompt_log)
        endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        if not endpoint:
            raise BackendError(f"no endpoint configured (set {ENV_ENDPOINT})")
        if temperature < 0 or max_retries < 0:
            raise ValueError("temperature and max_retries must be non-negative")
        self.endpoint = endpoint
        self.model_name = model_name or os.environ.get(ENV_MODEL, "qwen2.5:7b")
        self.temperature = temperature
        self.max_retries = max_retries
        self.request_timeout = request_timeout
        self.max_concurrency = max_concurrency
        self.backoff_base = backoff_base
        token = token if token is not None else os.environ.get(ENV_TOKEN)
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self._client = httpx.Client(timeout=request_timeout, headers=headers, transport=transport)

    def _complete(self, prompt: PromptRecord, rng: np.random.Generator | None) -> str:
        messages = []
        if prompt.system:
            messages.append({"role": "system", "content": prompt.system})
        messages.append({"role": "user", "content": prompt.rendered_text})
        body = {"model": self.model_name, "messages": messages, "temperature": self.temperature}

        last: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.endpoint, json=body)
            except httpx.TimeoutException as exc:
                last = exc
                log.warning("request timed out (attempt %d/%d)", attempt + 1, self.max_retries + 1)
                continue
            except httpx.TransportError as exc:
                last = exc
                log.warning("transport error (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = TransportError(f"HTTP {resp.status_code}")
                log.warning("server returned %d (attempt %d)", resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"unexpected response body: {resp.text[:200]}") from exc

        if isinstance(last, httpx.TimeoutException):
            raise BackendTimeoutError(
                f"no reply within {self.request_timeout}s after {self.max_retries + 1} attempts"
            ) from last
        raise TransportError(f"giving up after {self.max_retries + 1} attempts: {last}") from last

    def close(self) -> None:
        self._client.close()


# --------------------------------------------------------------------------
# reply parsing

SCHEMAS = ("decision", "topic", "belief", "summary")

_YES = {"yes", "y", "true", "accept"}
_NO = {"no", "n", "false", "reject"}


def extract_json_object(text: str) -> dict[str, Any]:
    """First balanced ``{...}`` in `text` that decodes to a JSON object."""
    start = text.find("{")
    while start != -1:
        depth = 0
        in_str = False
        escaped = False
        for pos in range(start, len(text)):
            ch = text[pos]
            if in_str:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_str = False
                continue
            if ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        obj = json.loads(text[start:pos + 1])
                    except json.JSONDecodeError:
                        break
                    if isinstance(obj, dict):
                        return obj
                    break
        start = text.find("{", start + 1)
    raise ParseError("no JSON object found in reply")


def _text_field(obj: dict[str, Any], name: str, required: bool = True) -> str:
    value = obj.get(name)
    if value is None:
        if required:
            raise ParseError(f"missing field {name!r}")
        return ""
    if not isinstance(value, str) or (required and not value.strip()):
        raise ParseError(f"field {name!r} must be a non-empty string")
    return value.strip()


def parse_structured(reply: str, schema: str, *, topics: Sequence[str] | None = None) -> Any:
    """Parse a reply against one of :data:`SCHEMAS`.

    Returns ``{"accept", "reason"}`` for decisions, a 1-based topic id for
    topics, ``{"new_belief", "reason"}`` for beliefs and a string for
    summaries. Enum values are trimmed and case-folded; belief values may be
    any finite number inside [-2, 2], integer-valued floats included.
    """
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}")
    obj = extract_json_object(reply)

    if schema == "decision":
        raw = obj.get("decision")
        if not isinstance(raw, str):
            raise ParseError("field 'decision' must be 'yes' or 'no'")
        norm = raw.strip().casefold()
        if norm in _YES:
            accept = True
        elif norm in _NO:
            accept = False
        else:
            raise ParseError(f"decision {raw!r} is neither yes nor no")
        reason = _text_field(obj, "reason", required=False) or f"decision={norm}"
        return {"accept": accept, "reason": reason}

    if schema == "topic":
        if topics is None:
            raise ValueError("topic schema needs the topic labels")
        raw = obj.get("topic")
        if isinstance(raw, bool) or raw is None:
            raise ParseError("missing field 'topic'")
        if isinstance(raw, (int, float)) and float(raw).is_integer() and 1 <= int(raw) <= len(topics):
            return int(raw)
        if isinstance(raw, str):
            norm = raw.strip().casefold()
            for k, label in enumerate(topics, start=1):
                if norm in (label.casefold(), f"t{k}", str(k)):
                    return k
        raise ParseError(f"topic {raw!r} is not one of {list(topics)}")

    if schema == "belief":
        raw = obj.get("new_belief")
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ParseError("field 'new_belief' must be a number")
        value = float(raw)
        if not (-2.0 <= value <= 2.0):
            raise ParseError(f"new_belief {raw} outside [-2, 2]")
        return {"new_belief": value, "reason": _text_field(obj, "reason")}

    return _text_field(obj, "summary")


REASK_SUFFIX = {
    "decision": 'Reply ONLY with a JSON object: {"decision": "yes" or "no", "reason": "<short reason>"}.',
    "topic": 'Reply ONLY with a JSON object: {"topic": "<one topic name from the list>", "reason": "<short reason>"}.',
    "belief": 'Reply ONLY with a JSON object: {"new_belief": <integer from -2 to 2>, "reason": "<short reason>"}.',
    "summary": 'Reply ONLY with a JSON object: {"summary": "<a few sentences>"}.',
}


def ask(
    backend: OpinionBackend,
    prompt: PromptRecord,
    schema: str,
    rng: np.random.Generator | None = None,
    **parse_kw: Any,
) -> Any:
    """complete + parse, with exactly one strict re-ask on a malformed reply."""
    reply = backend.complete(prompt, rng)
    try:
        return parse_structured(reply, schema, **parse_kw)
    except ParseError as first:
        log.info("malformed %s reply from agent %d, re-asking: %s", schema, prompt.agent, first)
    retry = PromptRecord(
        purpose=prompt.purpose,
        rendered_text=(
            f"{prompt.rendered_text}\n\nYour previous reply could not be used. {REASK_SUFFIX[schema]}"
        ),
        agent=prompt.agent,
        round=prompt.round,
        system=prompt.system,
        payload=prompt.payload,
    )
    reply = backend.complete(retry, rng)
    try:
        return parse_structured(reply, schema, **parse_kw)
    except ParseError as second:
        raise MalformedReplyError(
            f"{prompt.purpose.value} reply for agent {prompt.agent} still malformed after re-ask: {second}"
        ) from second


def complete(backend: OpinionBackend, prompt: PromptRecord, rng: np.random.Generator | None = None) -> str:
    return backend.complete(prompt, rng)

