"""Topic heat, per-agent fatigue and per-round topic recommendation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AgentState, Topic
from .llm import OpinionBackend, PromptRecord, Purpose, ask
from .prompts import render_topic_reco, system_prompt


@dataclass(frozen=True)
class TopicStats:
    heat: np.ndarray     # (K,)
    tsr: np.ndarray      # (N, K)
    fatigue: np.ndarray  # (N, K)


def _counts(history: Sequence[int], n_topics: int) -> np.ndarray:
    counts = np.zeros(n_topics)
    for t in history:
        counts[t - 1] += 1
    return counts


def compute_heat(histories: Sequence[Sequence[int]], n_topics: int) -> np.ndarray:
    """Share of each topic in the pooled history of all agents; zeros when nothing happened yet."""
    counts = np.zeros(n_topics)
    for h in histories:
        counts += _counts(h, n_topics)
    total = counts.sum()
    return counts / total if total else counts


def compute_tsr(history: Sequence[int], n_topics: int) -> np.ndarray:
    """Per-topic selection rate of one agent. An empty history has rate 0 everywhere."""
    counts = _counts(history, n_topics)
    return counts / len(history) if history else counts


def compute_fatigue(tsr, b: float):
    """Normalised exponential map of a selection rate onto [0, 1]."""
    if not b > 0:
        raise ValueError("fatigue sensitivity b must be > 0")
    if np.ndim(tsr) == 0:
        return math.expm1(b * float(tsr)) / math.expm1(b)
    return np.expm1(b * np.asarray(tsr, dtype=float)) / math.expm1(b)


def topic_stats(agents: Sequence[AgentState], n_topics: int, b: float) -> TopicStats:
    histories = [a.topic_history for a in agents]
    tsr = np.array([compute_tsr(h, n_topics) for h in histories]).reshape(len(agents), n_topics)
    return TopicStats(
        heat=compute_heat(histories, n_topics),
        tsr=tsr,
        fatigue=compute_fatigue(tsr, b),
    )


def topic_scores(heat: Sequence[float], fatigue: Sequence[float], heat_weight: float) -> np.ndarray:
    heat = np.asarray(heat, dtype=float)
    fatigue = np.asarray(fatigue, dtype=float)
    return heat_weight * heat + (1.0 - heat_weight) * (1.0 - fatigue)


def pick_topic(scores: Sequence[float], tie_order: Sequence[int] | None = None) -> int:
    """1-based id of the best score. Exact ties go to whichever tied id comes first in `tie_order`."""
    scores = list(scores)
    order = list(tie_order) if tie_order is not None else list(range(1, len(scores) + 1))
    best = max(scores)
    for t in order:
        if scores[t - 1] == best:
            return t
    raise ValueError("tie_order does not cover the best-scoring topic")


def recommend_topic(
    agent: AgentState,
    stats: TopicStats,
    backend: OpinionBackend,
    *,
    topics: Sequence[Topic],
    heat_weight: float,
    round: int,
    tie_order: Sequence[int] | None = None,
    memory_lines: Sequence[str] = (),
    rng: np.random.Generator | None = None,
) -> int:
    if len(topics) == 1:
        return 1
    heat = stats.heat
    fatigue = stats.fatigue[agent.id]
    if not backend.textual:
        return pick_topic(topic_scores(heat, fatigue, heat_weight), tie_order)
    prompt = PromptRecord(
        purpose=Purpose.TOPIC_RECO,
        rendered_text=render_topic_reco(agent.persona, memory_lines, topics, heat, fatigue),
        agent=agent.id,
        round=round,
        system=system_prompt(Purpose.TOPIC_RECO.value),
        payload={
            "heat": [float(x) for x in heat],
            "fatigue": [float(x) for x in fatigue],
            "heat_weight": heat_weight,
            "tie_order": list(tie_order) if tie_order is not None else None,
            "labels": [t.label for t in topics],
        },
    )
    return ask(backend, prompt, "topic", rng, topics=[t.label for t in topics])
