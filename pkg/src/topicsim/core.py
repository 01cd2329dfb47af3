"""Domain types, run configuration and seeded randomness.

Everything else in the package builds on the types here. Beliefs live on
the closed interval [-2, 2] (strong opposition to strong support) and are
stored as one float per topic per agent.
"""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from scipy.special import ndtr

from .memory import MemoryStore

BELIEF_MIN = -2.0
BELIEF_MAX = 2.0
BELIEF_SPAN = BELIEF_MAX - BELIEF_MIN

BIG_FIVE = ("openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism")
GENDERS = ("female", "male")
EDUCATION = ("primary", "secondary", "bachelor", "postgraduate")


class ConfigError(ValueError):
    """Invalid simulation configuration."""


class CorrelationKind(str, Enum):
    SINGLE_ONLY = "single-only"
    STRONG_POSITIVE = "strong-positive"
    WEAK_POSITIVE = "weak-positive"
    NONE = "none"
    WEAK_NEGATIVE = "weak-negative"
    STRONG_NEGATIVE = "strong-negative"


DEFAULT_COUPLING = {
    CorrelationKind.SINGLE_ONLY: 0.0,
    CorrelationKind.STRONG_POSITIVE: 0.9,
    CorrelationKind.WEAK_POSITIVE: 0.4,
    CorrelationKind.NONE: 0.0,
    CorrelationKind.WEAK_NEGATIVE: -0.4,
    CorrelationKind.STRONG_NEGATIVE: -0.9,
}

DEFAULT_PHRASE = {
    CorrelationKind.SINGLE_ONLY: "This is the only topic under discussion.",
    CorrelationKind.STRONG_POSITIVE: (
        "This topic is highly aligned with the main topic in values and positions: "
        "supporters of one usually support the other."
    ),
    CorrelationKind.WEAK_POSITIVE: (
        "This topic shows some indirect alignment with the main topic in values and positions."
    ),
    CorrelationKind.NONE: (
        "This topic has no significant connection with the main topic in beliefs or affect."
    ),
    CorrelationKind.WEAK_NEGATIVE: (
        "This topic differs slightly and indirectly from the main topic in values and positions."
    ),
    CorrelationKind.STRONG_NEGATIVE: (
        "This topic is clearly opposed to the main topic in values and positions: "
        "supporters of one usually oppose the other."
    ),
}


def clamp(value: float) -> float:
    return min(BELIEF_MAX, max(BELIEF_MIN, value))


def clamp_array(values: np.ndarray) -> np.ndarray:
    return np.clip(values, BELIEF_MIN, BELIEF_MAX)


def stance_label(value: float) -> int:
    """Nearest integer stance in {-2..2}, used when beliefs are shown to a language model."""
    return int(max(-2, min(2, math.floor(value + 0.5))))


@dataclass(frozen=True)
class Topic:
    id: int
    label: str
    stance_frame: str = "+2 means strong support, -2 means strong opposition"


@dataclass(frozen=True)
class CorrelationSpec:
    kind: CorrelationKind
    coupling: float
    prompt_phrase: str

    @classmethod
    def of(cls, kind: CorrelationKind | str, coupling: float | None = None,
           prompt_phrase: str | None = None) -> CorrelationSpec:
        kind = CorrelationKind(kind)
        return cls(
            kind=kind,
            coupling=DEFAULT_COUPLING[kind] if coupling is None else float(coupling),
            prompt_phrase=DEFAULT_PHRASE[kind] if prompt_phrase is None else prompt_phrase,
        )


@dataclass(frozen=True)
class TopicConfig:
    """A topic plus its relation to the main topic (the first topic in the list)."""

    label: str
    stance_frame: str = "+2 means strong support, -2 means strong opposition"
    correlation: CorrelationSpec = field(default_factory=lambda: CorrelationSpec.of("none"))


@dataclass(frozen=True)
class PersonaProfile:
    agent_id: int
    age: int
    gender: str
    education: str
    big_five: tuple[bool, bool, bool, bool, bool]

    def traits(self) -> dict[str, str]:
        return {name: ("high" if pos else "low") for name, pos in zip(BIG_FIVE, self.big_five)}


@dataclass
class AgentState:
    persona: PersonaProfile
    beliefs: np.ndarray
    topic_history: list[int] = field(default_factory=list)
    memory: MemoryStore = field(default_factory=MemoryStore)

    @property
    def id(self) -> int:
        return self.persona.agent_id


@dataclass(frozen=True)
class Ablations:
    no_decay: bool = False
    no_topic_choose: bool = False
    no_interaction_filter: bool = False


@dataclass(frozen=True)
class LLMSettings:
    endpoint: str | None = None
    model_name: str | None = None  # None: environment variable, then a default
    max_retries: int = 3
    request_timeout: float = 60.0
    max_concurrency: int = 4
    backoff_base: float = 1.0
    verbose: bool = False


MECHANISMS = ("hk-mean", "prompt-match")
BACKENDS = ("numeric", "llm-endpoint", "stub")


def default_topics() -> tuple[TopicConfig, ...]:
    return (
        TopicConfig("Universal basic income", correlation=CorrelationSpec.of("single-only")),
    )


@dataclass(frozen=True)
class SimulationConfig:
    # experiment defaults
    n_agents: int = 50
    n_rounds: int = 30
    epsilon: float = 0.1
    fatigue_b: float = 5.0
    decay_lambda: float = 0.01
    seed: int = 50
    gen_temperature: float = 0.5
    age_min: int = 18
    age_max: int = 64
    network: str = "scale-free"

    topics: tuple[TopicConfig, ...] = field(default_factory=default_topics)
    mechanism: str = "hk-mean"
    backend: str = "numeric"
    ablations: Ablations = field(default_factory=Ablations)

    # scale-free construction and edge weights
    attachment_m: int = 2
    edge_weight: float = 1.0

    # numeric opinion rule
    step: float = 0.5
    confidence: float | None = None  # None: use epsilon
    backfire: float = 1.0
    correlated_init: bool = True

    # topic scoring and memory
    heat_weight: float = 0.5
    memory_capacity: int = 30
    memory_retention: float = 0.95
    memory_prompt_budget: int = 300

    llm: LLMSettings = field(default_factory=LLMSettings)

    def __post_init__(self) -> None:
        validate(self)

    @property
    def n_topics(self) -> int:
        return len(self.topics)

    @property
    def confidence_bound(self) -> float:
        return self.epsilon if self.confidence is None else self.confidence

    def topic_list(self) -> list[Topic]:
        return [Topic(k + 1, t.label, t.stance_frame) for k, t in enumerate(self.topics)]

    def with_overrides(self, **changes: Any) -> SimulationConfig:
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["topics"] = [
            {
                "label": t.label,
                "stance_frame": t.stance_frame,
                "correlation": {
                    "kind": t.correlation.kind.value,
                    "coupling": t.correlation.coupling,
                    "prompt_phrase": t.correlation.prompt_phrase,
                },
            }
            for t in self.topics
        ]
        return d

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> SimulationConfig:
        return config_from_dict(raw)


def validate(cfg: SimulationConfig) -> None:
    if cfg.n_agents < 1:
        raise ConfigError("n_agents must be >= 1")
    if cfg.n_rounds < 0:
        raise ConfigError("n_rounds must be >= 0")
    if not cfg.epsilon >= 0:
        raise ConfigError("epsilon must be >= 0")
    if not cfg.fatigue_b > 0:
        raise ConfigError("fatigue_b must be > 0")
    if not cfg.decay_lambda >= 0:
        raise ConfigError("decay_lambda must be >= 0")
    if cfg.gen_temperature < 0:
        raise ConfigError("gen_temperature must be >= 0")
    if not 0 <= cfg.age_min <= cfg.age_max:
        raise ConfigError("age bounds must satisfy 0 <= age_min <= age_max")
    if cfg.network != "scale-free":
        raise ConfigError(f"unsupported network {cfg.network!r}")
    if not cfg.topics:
        raise ConfigError("at least one topic is required")
    if cfg.mechanism not in MECHANISMS:
        raise ConfigError(f"mechanism must be one of {MECHANISMS}")
    if cfg.backend not in BACKENDS:
        raise ConfigError(f"backend must be one of {BACKENDS}")
    if cfg.attachment_m < 1:
        raise ConfigError("attachment_m must be >= 1")
    if not cfg.edge_weight > 0:
        raise ConfigError("edge_weight must be > 0")
    if not 0 < cfg.step <= 1:
        raise ConfigError("step must be in (0, 1]")
    if cfg.confidence is not None and cfg.confidence < 0:
        raise ConfigError("confidence must be >= 0")
    if not 0 <= cfg.backfire <= 1:
        raise ConfigError("backfire must be in [0, 1]")
    if not 0 <= cfg.heat_weight <= 1:
        raise ConfigError("heat_weight must be in [0, 1]")
    if cfg.memory_capacity < 1:
        raise ConfigError("memory_capacity must be >= 1")
    if not 0 < cfg.memory_retention <= 1:
        raise ConfigError("memory_retention must be in (0, 1]")
    if cfg.llm.max_retries < 0:
        raise ConfigError("llm.max_retries must be >= 0")
    if cfg.llm.max_concurrency < 1:
        raise ConfigError("llm.max_concurrency must be >= 1")
    labels = [t.label.casefold() for t in cfg.topics]
    if len(set(labels)) != len(labels):
        raise ConfigError("topic labels must be unique")
    for k, t in enumerate(cfg.topics):
        if not -1 <= t.correlation.coupling <= 1:
            raise ConfigError(f"topic {t.label!r}: coupling must be in [-1, 1]")
        if t.correlation.kind is CorrelationKind.SINGLE_ONLY and len(cfg.topics) != 1:
            raise ConfigError("single-only correlation implies exactly one topic")


# Descriptive long-form parameter names, accepted as config keys.
LONG_NAME_ALIASES = {
    "Running Rounds": "n_rounds",
    "Number of Agents": "n_agents",
    "Age of Agents": "age_range",
    "Personality of Agents": "personality",
    "Network Infrastructure": "network",
    "Gen_temperature": "gen_temperature",
    "Tolerance thresholds for neighbor selection": "epsilon",
    "Belief value similarity threshold ε": "epsilon",
    "Seed": "seed",
    "Fatigue sensitivity b": "fatigue_b",
    "Decay factor λ": "decay_lambda",
}


def _coerce_network(value: str) -> str:
    v = str(value).strip().lower().replace(" network", "")
    return "scale-free" if v in ("scale-free", "scale free", "scalefree", "ba") else v


def config_from_dict(raw: dict[str, Any]) -> SimulationConfig:
    raw = copy.deepcopy(dict(raw))
    data: dict[str, Any] = {}
    for key, value in raw.items():
        target = LONG_NAME_ALIASES.get(key, key)
        if target == "epsilon" and "epsilon" in data and data["epsilon"] != value:
            raise ConfigError("neighbor tolerance and similarity threshold must be equal")
        data[target] = value

    if "age_range" in data:
        age = data.pop("age_range")
        if isinstance(age, str):
            lo, hi = age.replace("–", "-").split("-")
            age = (int(lo), int(hi))
        data["age_min"], data["age_max"] = int(age[0]), int(age[1])
    if "personality" in data:
        traits = data.pop("personality")
        names = [s.strip().lower() for s in (traits.split(",") if isinstance(traits, str) else traits)]
        if tuple(names) != BIG_FIVE:
            raise ConfigError(f"personality dimensions must be {BIG_FIVE}")
    if "network" in data:
        data["network"] = _coerce_network(data["network"])

    if "topics" in data:
        topics = []
        for entry in data["topics"]:
            if isinstance(entry, str):
                entry = {"label": entry}
            corr = entry.get("correlation", {"kind": "none"})
            if isinstance(corr, str):
                corr = {"kind": corr}
            topics.append(
                TopicConfig(
                    label=entry["label"],
                    stance_frame=entry.get("stance_frame", TopicConfig.stance_frame),
                    correlation=CorrelationSpec.of(
                        corr.get("kind", "none"), corr.get("coupling"), corr.get("prompt_phrase")
                    ),
                )
            )
        data["topics"] = tuple(topics)
    if "ablations" in data:
        data["ablations"] = Ablations(**data["ablations"])
    if "llm" in data:
        data["llm"] = LLMSettings(**data["llm"])

    known = {f.name for f in fields(SimulationConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return SimulationConfig(**data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> SimulationConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_dict(raw)


def dump_config(cfg: SimulationConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, allow_unicode=True)


# --------------------------------------------------------------------------
# randomness


def rng_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent (population, graph, dynamics) generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)  # type: ignore[return-value]


def coupling_matrix(correlations: list[CorrelationSpec | None] | tuple) -> np.ndarray:
    """K x K cross-topic coupling.

    Row k gives how a movement on topic k carries over to every topic. The
    main topic (index 0) couples to topic m with rho_m; two secondary topics
    couple through the main one (rho_a * rho_b).
    """
    k = len(correlations)
    rho = np.array([1.0] + [0.0 if c is None else c.coupling for c in correlations[1:]])
    mat = np.outer(rho, rho)
    np.fill_diagonal(mat, 1.0)
    return mat[:k, :k]


def init_population(config: SimulationConfig, rng: np.random.Generator) -> list[AgentState]:
    n, k = config.n_agents, config.n_topics
    agents = []
    ages = rng.integers(config.age_min, config.age_max + 1, size=n)
    genders = rng.integers(len(GENDERS), size=n)
    edu = rng.integers(len(EDUCATION), size=n)
    traits = rng.random((n, len(BIG_FIVE))) < 0.5
    beliefs = _initial_beliefs(config, rng)
    for i in range(n):
        persona = PersonaProfile(
            agent_id=i,
            age=int(ages[i]),
            gender=GENDERS[genders[i]],
            education=EDUCATION[edu[i]],
            big_five=tuple(bool(x) for x in traits[i]),  # type: ignore[arg-type]
        )
        agents.append(
            AgentState(
                persona=persona,
                beliefs=beliefs[i].copy(),
                memory=MemoryStore(
                    n_topics=k,
                    capacity=config.memory_capacity,
                    retention=config.memory_retention,
                ),
            )
        )
    return agents


def _initial_beliefs(config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    n, k = config.n_agents, config.n_topics
    if not config.correlated_init or k == 1:
        return rng.uniform(BELIEF_MIN, BELIEF_MAX, size=(n, k))
    # Gaussian copula: uniform marginals on [-2, 2], main/secondary correlation set by coupling.
    rho = np.array([t.correlation.coupling for t in config.topics[1:]])
    z = rng.standard_normal((n, k))
    latent = np.empty_like(z)
    latent[:, 0] = z[:, 0]
    latent[:, 1:] = rho * z[:, :1] + np.sqrt(1.0 - rho**2) * z[:, 1:]
    return BELIEF_MIN + BELIEF_SPAN * ndtr(latent)


def mean_belief(agent: AgentState | np.ndarray) -> float:
    values = agent.beliefs if isinstance(agent, AgentState) else np.asarray(agent, dtype=float)
    return math.fsum(values) / len(values)
