"""Prompt templates for the four backend purposes.

Beliefs are shown as integer stances (-2..2); the numeric values stay
internal. Every system message starts with ``Task: <purpose>`` so logs and
test doubles can tell the purposes apart.
"""

from __future__ import annotations

from typing import Sequence

from .core import PersonaProfile, Topic, stance_label

STANCE_WORDS = {
    -2: "strongly oppose",
    -1: "oppose",
    0: "neutral",
    1: "support",
    2: "strongly support",
}

_BASE_SYSTEM = (
    "You are simulating one member of an online social network. Stay in character, "
    "reason from the profile and memories you are given, and answer only in the JSON "
    "format requested."
)


def system_prompt(purpose: str) -> str:
    return f"Task: {purpose}\n{_BASE_SYSTEM}"


def describe_persona(p: PersonaProfile) -> str:
    traits = ", ".join(f"{name}: {level}" for name, level in p.traits().items())
    return (
        f"User #{p.agent_id}: age {p.age}, {p.gender}, education {p.education}. "
        f"Personality ({traits})."
    )


def describe_beliefs(beliefs: Sequence[float], topics: Sequence[Topic]) -> str:
    stances = [stance_label(v) for v in beliefs]
    lines = [
        f"- {t.label}: {s:+d} ({STANCE_WORDS[s]})" for t, s in zip(topics, stances)
    ]
    return f"Belief vector {stances}\n" + "\n".join(lines)


def render_match(
    self_persona: PersonaProfile,
    self_beliefs: Sequence[float],
    other_persona: PersonaProfile,
    other_beliefs: Sequence[float],
    topics: Sequence[Topic],
) -> str:
    scale = "; ".join(f"{t.label}: {t.stance_frame}" for t in topics)
    return (
        f"Stance scale per topic: {scale}.\n\n"
        f"YOU\n{describe_persona(self_persona)}\n{describe_beliefs(self_beliefs, topics)}\n\n"
        f"CANDIDATE NEIGHBOR\n{describe_persona(other_persona)}\n"
        f"{describe_beliefs(other_beliefs, topics)}\n\n"
        "Considering both profiles and how far apart your beliefs are across all topics, "
        "would you choose to interact with this neighbor today?\n"
        'Answer as JSON: {"decision": "yes" or "no", "reason": "<one or two sentences>"}'
    )


def render_topic_reco(
    persona: PersonaProfile,
    memory_lines: Sequence[str],
    topics: Sequence[Topic],
    heat: Sequence[float],
    fatigue: Sequence[float],
    context: str = "",
) -> str:
    memory = "\n".join(f"- {m}" for m in memory_lines) or "- (nothing yet)"
    rows = "\n".join(
        f"- {t.label}: group heat {h:.2f}, your fatigue {f:.2f}"
        for t, h, f in zip(topics, heat, fatigue)
    )
    ctx = f"\nCurrent context: {context}\n" if context else "\n"
    return (
        f"{describe_persona(persona)}\n\n"
        f"Long-term memory (most recent first):\n{memory}\n{ctx}\n"
        f"Candidate topics with their popularity in the community (heat, 0-1) and how tired "
        f"you are of each (fatigue, 0-1, higher means you have discussed it a lot):\n{rows}\n\n"
        "Pick exactly ONE topic you want to discuss today. Balance what the community is "
        "talking about against your own fatigue.\n"
        'Answer as JSON: {"topic": "<topic name exactly as listed>", "reason": "<short reason>"}'
    )


def render_belief_update(
    persona: PersonaProfile,
    beliefs: Sequence[float],
    topics: Sequence[Topic],
    topic_index: int,
    relation_phrase: str,
    memory_lines: Sequence[str],
    today_lines: Sequence[str],
    partner_message: str,
) -> str:
    topic = topics[topic_index]
    memory = "\n".join(f"- {m}" for m in memory_lines) or "- (nothing yet)"
    today = "\n".join(f"- {m}" for m in today_lines) or "- (no other conversations)"
    return (
        f"{describe_persona(persona)}\n{describe_beliefs(beliefs, topics)}\n\n"
        f"Long-term memory (most recent first):\n{memory}\n\n"
        f"Today's conversations:\n{today}\n\n"
        f"Topic under discussion: {topic.label} ({topic.stance_frame}). "
        f"Relation to the main topic: {relation_phrase}\n\n"
        f"Your conversation partner said:\n\"{partner_message}\"\n\n"
        f"After this exchange, what is your stance on {topic.label}? Keep your personality, "
        "your other beliefs and your memories in mind; you may keep, soften or harden your view.\n"
        'Answer as JSON: {"new_belief": <integer from -2 to 2>, "reason": "<one or two sentences>"}'
    )


def partner_message(partner: PersonaProfile, value: float, topic: Topic) -> str:
    s = stance_label(value)
    return (
        f"As user #{partner.agent_id}, I {STANCE_WORDS[s]} on '{topic.label}' "
        f"(stance {s:+d}), and I think others should consider my view."
    )


def render_consolidate(persona: PersonaProfile, record_lines: Sequence[str]) -> str:
    items = "\n".join(f"- {r}" for r in record_lines)
    return (
        f"{describe_persona(persona)}\n\n"
        f"Today you had these conversations:\n{items}\n\n"
        "Write a short first-person memory (2-3 sentences) that keeps what matters for your "
        "future opinions.\n"
        'Answer as JSON: {"summary": "<memory text>"}'
    )
