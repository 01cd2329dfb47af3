"""Belief updates after an interaction, cross-topic spillover and end-of-round decay.

The numeric rule is a bounded-confidence update on the discussed topic:
inside the confidence bound the agent moves a fraction `step` toward the
partner; outside it the agent is pushed away by `backfire` times the gap.
With `confidence=None` every partner attracts. Movement on the discussed
topic carries over to the other topics through the coupling matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    BELIEF_MAX,
    BELIEF_MIN,
    AgentState,
    CorrelationSpec,
    Topic,
    clamp,
    clamp_array,
    coupling_matrix,
)
from .llm import OpinionBackend, PromptRecord, Purpose, ask
from .prompts import render_belief_update, system_prompt


@dataclass(frozen=True)
class BeliefUpdate:
    agent: int
    topic: int
    old: float
    new: float
    reason: str

    def __post_init__(self) -> None:
        for v in (self.old, self.new):
            if not BELIEF_MIN <= v <= BELIEF_MAX:
                raise ValueError(f"belief {v} outside [-2, 2]")
        if not self.reason.strip():
            raise ValueError("belief update needs a reason")


def apply_decay(v, lam: float):
    """Shrink toward zero, faster for extreme values: v * exp(-lam * |v|)."""
    if lam < 0:
        raise ValueError("decay lambda must be >= 0")
    if np.ndim(v) == 0:
        return float(v) * math.exp(-lam * abs(float(v)))
    v = np.asarray(v, dtype=float)
    return v * np.exp(-lam * np.abs(v))


def topic_shift(
    v: float,
    u: float,
    step: float,
    confidence: float | None = None,
    backfire: float = 0.0,
) -> float:
    """New value on the discussed topic for an agent at `v` meeting a partner at `u`."""
    gap = u - v
    if confidence is None or abs(gap) <= confidence:
        return clamp(v + step * gap)
    return clamp(v - backfire * gap)


def shift_reason(v: float, u: float, confidence: float | None) -> str:
    gap = u - v
    if gap == 0:
        return "rule: same stance, no change"
    if confidence is None or abs(gap) <= confidence:
        return f"rule: attraction, gap {gap:+.3f} within bound"
    return f"rule: backfire, gap {gap:+.3f} beyond bound {confidence:g}"


def spread(beliefs: np.ndarray, topic: int, delta: float, coupling: np.ndarray) -> np.ndarray:
    """Apply a movement `delta` on 1-based `topic` and its coupled carry-over, then clamp."""
    return clamp_array(beliefs + coupling[topic - 1] * delta)


def numeric_update(
    self_belief: Sequence[float],
    partner_belief: Sequence[float],
    topic: int,
    correlations: Sequence[CorrelationSpec | None],
    step: float,
    confidence: float | None = None,
    backfire: float = 0.0,
) -> np.ndarray:
    if not 0 < step <= 1:
        raise ValueError("step must be in (0, 1]")
    v = np.asarray(self_belief, dtype=float)
    u = np.asarray(partner_belief, dtype=float)
    k = topic - 1
    new_k = topic_shift(float(v[k]), float(u[k]), step, confidence, backfire)
    out = spread(v, topic, new_k - v[k], coupling_matrix(list(correlations)))
    out[k] = new_k
    return out


def llm_update(
    agent: AgentState,
    partner: AgentState,
    topic: int,
    backend: OpinionBackend,
    *,
    topics: Sequence[Topic],
    relation_phrase: str,
    partner_message: str,
    round: int,
    rule: dict,
    memory_lines: Sequence[str] = (),
    today_lines: Sequence[str] = (),
    rng: np.random.Generator | None = None,
) -> BeliefUpdate:
    """Ask the backend for the agent's new stance on `topic`.

    `rule` carries the numeric-rule parameters (step, confidence, backfire)
    so a rule-based backend can answer from structured inputs alone.
    """
    k = topic - 1
    old = float(agent.beliefs[k])
    prompt = PromptRecord(
        purpose=Purpose.BELIEF_UPDATE,
        rendered_text=render_belief_update(
            agent.persona, agent.beliefs, topics, k, relation_phrase,
            memory_lines, today_lines, partner_message,
        ),
        agent=agent.id,
        round=round,
        system=system_prompt(Purpose.BELIEF_UPDATE.value),
        payload={
            "self_value": old,
            "partner_value": float(partner.beliefs[k]),
            "partner": partner.id,
            "topic": topic,
            **rule,
        },
    )
    reply = ask(backend, prompt, "belief", rng)
    return BeliefUpdate(agent.id, topic, old, clamp(reply["new_belief"]), reply["reason"])


def end_of_round_decay(agents: Sequence[AgentState], lam: float, no_decay: bool = False) -> None:
    if no_decay:
        return
    for a in agents:
        a.beliefs = apply_decay(a.beliefs, lam)
