"""Deterministic backends.

`NumericBackend` is non-textual: callers evaluate the rules directly.
`StubBackend` answers every prompt in reply-text form, computing the same
rules from the prompt's structured payload and never reading the rendered
text. Both produce identical trajectories for the same seed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .beliefs import shift_reason, topic_shift
from .core import SimulationConfig
from .interaction import hk_decision
from .llm import ChatBackend, OpinionBackend, PromptRecord, Purpose
from .memory import MemoryRecord, structured_summary
from .topics import pick_topic, topic_scores


class NumericBackend(OpinionBackend):
    kind = "numeric"
    textual = False

    def _complete(self, prompt: PromptRecord, rng: np.random.Generator | None) -> str:
        raise TypeError("the numeric backend does not answer prompts")


class StubBackend(OpinionBackend):
    kind = "stub"

    def _complete(self, prompt: PromptRecord, rng: np.random.Generator | None) -> str:
        p = prompt.payload
        if prompt.purpose is Purpose.NEIGHBOR_MATCH:
            d = hk_decision(p["self_mean"], p["other_mean"], p["epsilon"])
            out = {"decision": "yes" if d.accept else "no", "reason": d.reason}
        elif prompt.purpose is Purpose.TOPIC_RECO:
            t = pick_topic(topic_scores(p["heat"], p["fatigue"], p["heat_weight"]), p["tie_order"])
            out = {"topic": p["labels"][t - 1], "reason": "rule: best heat/fatigue score"}
        elif prompt.purpose is Purpose.BELIEF_UPDATE:
            v, u = p["self_value"], p["partner_value"]
            out = {
                "new_belief": topic_shift(v, u, p["step"], p["confidence"], p["backfire"]),
                "reason": shift_reason(v, u, p["confidence"]),
            }
        elif prompt.purpose is Purpose.MEMORY_CONSOLIDATE:
            records = [MemoryRecord(**r) for r in p["records"]]
            out = {"summary": structured_summary(records)}
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unknown purpose {prompt.purpose}")
        # json.dumps writes floats with repr, so values round-trip exactly
        return json.dumps(out)


def make_backend(config: SimulationConfig, prompt_log: str | Path | None = None) -> OpinionBackend:
    if config.backend == "numeric":
        return NumericBackend(prompt_log)
    if config.backend == "stub":
        return StubBackend(prompt_log)
    s = config.llm
    return ChatBackend(
        endpoint=s.endpoint,
        model_name=s.model_name,
        temperature=config.gen_temperature,
        max_retries=s.max_retries,
        request_timeout=s.request_timeout,
        max_concurrency=s.max_concurrency,
        backoff_base=s.backoff_base,
        prompt_log=prompt_log,
    )
