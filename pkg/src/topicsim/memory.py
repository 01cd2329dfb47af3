"""Dual-layer agent memory.

Short-term memory buffers the interactions of the current round. At round
end it is folded into one long-term record; long-term records carry a
salience weight that decays geometrically and decides eviction and prompt
priority.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MemoryRecord:
    round: int
    topic: int
    partner: int
    partner_stance: float
    summary: str

    def __post_init__(self) -> None:
        if not self.summary.strip():
            raise ValueError("memory summary must be non-empty")
        if not -2.0 <= self.partner_stance <= 2.0:
            raise ValueError(f"partner stance {self.partner_stance} outside [-2, 2]")


@dataclass
class ConsolidatedRecord:
    round: int
    summary: str
    topics: tuple[int, ...]
    salience: float = 1.0


@dataclass
class MemoryStore:
    n_topics: int = 1
    capacity: int = 30
    retention: float = 0.95
    short_term: list[MemoryRecord] = field(default_factory=list)
    long_term: list[ConsolidatedRecord] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> MemoryStore:
        return cls(
            n_topics=d["n_topics"],
            capacity=d["capacity"],
            retention=d["retention"],
            short_term=[MemoryRecord(**r) for r in d["short_term"]],
            long_term=[
                ConsolidatedRecord(r["round"], r["summary"], tuple(r["topics"]), r["salience"])
                for r in d["long_term"]
            ],
        )


def record_interaction(store: MemoryStore, rec: MemoryRecord) -> MemoryStore:
    if not 1 <= rec.topic <= store.n_topics:
        raise ValueError(f"topic {rec.topic} is not one of 1..{store.n_topics}")
    store.short_term.append(rec)
    return store


def structured_summary(records: list[MemoryRecord]) -> str:
    """Rule-based compression of a round: topic, partner and partner stance per interaction."""
    parts = [f"T{r.topic} with agent {r.partner} (stance {r.partner_stance:+.2f})" for r in records]
    return f"Round {records[0].round}: " + "; ".join(parts)


def consolidate(
    store: MemoryStore,
    round: int,
    summarize: Callable[[list[MemoryRecord]], str] | None = None,
) -> MemoryStore:
    """Fold the short-term buffer into one long-term record.

    `summarize` is the language-model path; if it raises, or if none is
    given, the structured summary is used so a round is never lost.
    """
    if not store.short_term:
        return store
    records = list(store.short_term)
    summary = None
    if summarize is not None:
        try:
            summary = summarize(records)
        except Exception as exc:  # noqa: BLE001 - any backend failure falls back
            log.warning("memory summarization failed in round %d, using structured summary: %s",
                        round, exc)
            summary = None
    if not summary or not summary.strip():
        summary = structured_summary(records)
    topics = tuple(sorted({r.topic for r in records}))
    store.long_term.append(ConsolidatedRecord(round=round, summary=summary, topics=topics))
    store.short_term.clear()
    while len(store.long_term) > store.capacity:
        # lowest salience goes first; among equals the oldest
        victim = min(range(len(store.long_term)),
                     key=lambda i: (store.long_term[i].salience, store.long_term[i].round, i))
        del store.long_term[victim]
    return store


def decay_salience(store: MemoryStore, retention: float | None = None) -> MemoryStore:
    factor = store.retention if retention is None else retention
    if not 0 < factor <= 1:
        raise ValueError("retention must be in (0, 1]")
    for rec in store.long_term:
        rec.salience *= factor
    return store


def render_long_term(store: MemoryStore, budget_tokens: int) -> list[str]:
    """Long-term summaries, most recent first, cut at an approximate token budget (4 chars/token)."""
    out: list[str] = []
    used = 0
    ordered = sorted(store.long_term, key=lambda r: (-r.round, -r.salience))
    for rec in ordered:
        cost = max(1, len(rec.summary) // 4)
        if used + cost > budget_tokens:
            break
        out.append(rec.summary)
        used += cost
    return out
