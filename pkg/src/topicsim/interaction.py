"""Partner selection: mean-belief bounded confidence or a prompt-based match, plus the shared topic."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import AgentState, Topic, mean_belief
from .llm import OpinionBackend, PromptRecord, Purpose, ask
from .network import SocialGraph, neighbors
from .prompts import render_match, system_prompt


@dataclass(frozen=True)
class InteractionPair:
    a: int
    b: int
    topic: int
    round: int

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError("an agent cannot pair with itself")


@dataclass(frozen=True)
class MatchDecision:
    accept: bool
    reason: str

    def __post_init__(self) -> None:
        if not self.reason.strip():
            raise ValueError("match decision needs a reason")


def hk_accepts(mean_a: float, mean_b: float, epsilon: float) -> bool:
    return abs(mean_a - mean_b) <= epsilon


def hk_decision(mean_a: float, mean_b: float, epsilon: float) -> MatchDecision:
    gap = abs(mean_a - mean_b)
    ok = gap <= epsilon
    return MatchDecision(ok, f"hk-mean: gap {gap:.4f} {'<=' if ok else '>'} {epsilon:g}")


def hk_filter(agent: AgentState, candidates: Sequence[AgentState], epsilon: float) -> list[int]:
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    m = mean_belief(agent)
    return [c.id for c in candidates if hk_accepts(m, mean_belief(c), epsilon)]


def prompt_match(
    agent: AgentState,
    candidate: AgentState,
    backend: OpinionBackend,
    *,
    topics: Sequence[Topic],
    epsilon: float,
    round: int = 0,
    rng: np.random.Generator | None = None,
) -> MatchDecision:
    """Ask whether `agent` wants to talk to `candidate`.

    A non-textual backend answers with the mean-belief rule directly.
    """
    ma, mb = mean_belief(agent), mean_belief(candidate)
    if not backend.textual:
        return hk_decision(ma, mb, epsilon)
    prompt = PromptRecord(
        purpose=Purpose.NEIGHBOR_MATCH,
        rendered_text=render_match(agent.persona, agent.beliefs, candidate.persona,
                                   candidate.beliefs, topics),
        agent=agent.id,
        round=round,
        system=system_prompt(Purpose.NEIGHBOR_MATCH.value),
        payload={"self_mean": ma, "other_mean": mb, "epsilon": epsilon, "candidate": candidate.id},
    )
    reply = ask(backend, prompt, "decision", rng)
    return MatchDecision(reply["accept"], reply["reason"])


DecisionHook = Callable[[int, int, MatchDecision], None]


def select_pairs(
    agents: Sequence[AgentState],
    graph: SocialGraph,
    round: int,
    mechanism: str,
    recommended: Sequence[set[int] | Sequence[int]],
    rng: np.random.Generator,
    *,
    epsilon: float,
    n_topics: int,
    backend: OpinionBackend | None = None,
    topics: Sequence[Topic] | None = None,
    no_filter: bool = False,
    on_decision: DecisionHook | None = None,
) -> list[InteractionPair]:
    """One initiated interaction per agent, visited in ascending id order.

    Being picked as a partner does not use up an agent's own turn. All
    match decisions are gathered first (possibly concurrently) and applied
    in id order, so the outcome does not depend on completion order.
    """
    by_id = {a.id: a for a in agents}
    order = sorted(by_id)
    candidates = {i: neighbors(graph, i) for i in order}

    decisions: dict[tuple[int, int], MatchDecision] = {}
    if not no_filter:
        jobs = [(i, j) for i in order for j in candidates[i]]
        if mechanism == "hk-mean":
            means = {i: mean_belief(by_id[i]) for i in order}
            results = [hk_decision(means[i], means[j], epsilon) for i, j in jobs]
        elif mechanism == "prompt-match":
            if backend is None or topics is None:
                raise ValueError("prompt-match needs a backend and the topic list")
            results = backend.map(
                lambda ij: prompt_match(by_id[ij[0]], by_id[ij[1]], backend, topics=topics,
                                        epsilon=epsilon, round=round),
                jobs,
            )
        else:
            raise ValueError(f"unknown mechanism {mechanism!r}")
        decisions = dict(zip(jobs, results))

    pairs: list[InteractionPair] = []
    for i in order:
        if no_filter:
            survivors = list(candidates[i])
        else:
            survivors = []
            for j in candidates[i]:
                d = decisions[(i, j)]
                if on_decision is not None:
                    on_decision(i, j, d)
                if d.accept:
                    survivors.append(j)
        if not survivors:
            continue
        j = survivors[int(rng.integers(len(survivors)))]
        shared = sorted(set(recommended[i]) & set(recommended[j]))
        if len(shared) == 1:
            topic = shared[0]
        elif shared:
            topic = shared[int(rng.integers(len(shared)))]
        else:
            topic = int(rng.integers(n_topics)) + 1
        pairs.append(InteractionPair(i, j, topic, round))
    return pairs
