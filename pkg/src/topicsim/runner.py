"""Seeded round loop, run artifacts, checkpoint/resume and experiment presets.

Each round runs the stages in a fixed order: recommend topics, select
pairs, exchange messages into short-term memory, update beliefs,
consolidate memory, decay, metrics. A round works on a copy of the state
and is committed only when every stage succeeded, so a backend failure
leaves the last checkpoint valid.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .beliefs import BeliefUpdate, end_of_round_decay, llm_update, shift_reason, spread, topic_shift
from .core import (
    Ablations,
    AgentState,
    CorrelationSpec,
    PersonaProfile,
    SimulationConfig,
    TopicConfig,
    config_from_dict,
    coupling_matrix,
    dump_config,
    init_population,
    rng_streams,
)
from .interaction import InteractionPair, MatchDecision, select_pairs
from .llm import BackendError, OpinionBackend, PromptRecord, Purpose, ask
from .memory import MemoryRecord, MemoryStore, consolidate, decay_salience, record_interaction, render_long_term
from .metrics import MetricsSnapshot, TopicMetrics, across_topic_mean, snapshot
from .network import SocialGraph, build_graph, from_edges, write_edgelist
from .prompts import partner_message, render_consolidate, system_prompt
from .stub import make_backend
from .topics import compute_heat, recommend_topic, topic_stats

log = logging.getLogger(__name__)

STAGES = ("recommend", "select", "exchange", "update", "consolidate", "decay", "metrics")
METRIC_COLUMNS = (
    "round", "topic", "nci", "eci", "polarization", "gd", "mean_nci",
    "delta_p", "delta_gd", "delta_mean_nci", "heat",
)
CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


class RunAborted(RuntimeError):
    """A round failed; the checkpoint of the last completed round is on disk."""

    def __init__(self, round: int, checkpoint: Path | None, cause: BaseException) -> None:
        super().__init__(f"round {round} failed ({type(cause).__name__}: {cause}); "
                         f"resume from {checkpoint}")
        self.round = round
        self.checkpoint = checkpoint
        self.cause = cause


@dataclass
class RunArtifacts:
    out_dir: Path
    config: Path
    events: Path
    beliefs: Path
    metrics: Path
    fatigue: Path
    graph: Path
    checkpoint: Path
    prompts: Path | None = None

    @classmethod
    def in_dir(cls, out_dir: str | Path, prompts: bool = False) -> RunArtifacts:
        d = Path(out_dir)
        return cls(
            out_dir=d,
            config=d / "config.yaml",
            events=d / "events.jsonl",
            beliefs=d / "beliefs.csv",
            metrics=d / "metrics.csv",
            fatigue=d / "fatigue.csv",
            graph=d / "graph.edgelist",
            checkpoint=d / "checkpoint.json",
            prompts=d / "prompts.jsonl" if prompts else None,
        )

    def appendable(self) -> dict[str, Path]:
        return {"events": self.events, "beliefs": self.beliefs,
                "metrics": self.metrics, "fatigue": self.fatigue}


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def metric_rows(snap: MetricsSnapshot) -> list[list[str]]:
    rows = []
    labelled: list[tuple[str, TopicMetrics, str]] = [
        (str(k + 1), m, _fmt(snap.heat[k]) if snap.heat else "") for k, m in enumerate(snap.per_topic)
    ]
    if len(snap.per_topic) > 1:
        labelled.append(("mean", snap.mean(), ""))
    for label, m, heat in labelled:
        rows.append([
            str(snap.round), label, _fmt(m.nci), _fmt(m.eci), _fmt(m.polarization), _fmt(m.gd),
            _fmt(m.mean_nci), _fmt(m.delta_p), _fmt(m.delta_gd), _fmt(m.delta_mean_nci), heat,
        ])
    return rows


def _csv_text(rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _snapshot_to_dict(s: MetricsSnapshot) -> dict[str, Any]:
    return asdict(s)


def _snapshot_from_dict(d: dict[str, Any]) -> MetricsSnapshot:
    return MetricsSnapshot(d["round"], tuple(TopicMetrics(**m) for m in d["per_topic"]),
                           tuple(d["heat"]))


class Simulation:
    """One seeded run. Pass `out_dir` to write artifacts and per-round checkpoints."""

    def __init__(
        self,
        config: SimulationConfig,
        out_dir: str | Path | None = None,
        backend: OpinionBackend | None = None,
        log_prompts: bool | None = None,
        _restore: dict[str, Any] | None = None,
    ) -> None:
        self.config = config
        self.topics = config.topic_list()
        self.coupling = coupling_matrix([t.correlation for t in config.topics])
        log_prompts = config.llm.verbose if log_prompts is None else log_prompts
        self.artifacts = RunArtifacts.in_dir(out_dir, log_prompts) if out_dir is not None else None
        if self.artifacts is not None:
            self.artifacts.out_dir.mkdir(parents=True, exist_ok=True)
        self.backend = backend if backend is not None else make_backend(config)
        if self.artifacts is not None and self.artifacts.prompts is not None:
            self.backend.set_prompt_log(self.artifacts.prompts)

        pop_rng, graph_rng, self.rng = rng_streams(config.seed)
        if _restore is None:
            self.agents = init_population(config, pop_rng)
            self.graph = build_graph(config.n_agents, config.attachment_m, graph_rng, config.edge_weight)
            self.round = 0
            self.baseline = snapshot(self.belief_matrix(), self.graph, config.epsilon, 0)
            self.snapshots = [self.baseline]
            if self.artifacts is not None:
                self._start_files()
                self._write_checkpoint()
        else:
            self._load_state(_restore)

    # -- state ------------------------------------------------------------

    def belief_matrix(self, agents: Sequence[AgentState] | None = None) -> np.ndarray:
        return np.array([a.beliefs for a in (agents or self.agents)])

    @property
    def finished(self) -> bool:
        return self.round >= self.config.n_rounds

    def run(self, until: int | None = None) -> list[MetricsSnapshot]:
        stop = self.config.n_rounds if until is None else min(until, self.config.n_rounds)
        while self.round < stop:
            self.run_round()
        return self.snapshots

    def run_round(self) -> MetricsSnapshot:
        r = self.round + 1
        rng_state = copy.deepcopy(self.rng.bit_generator.state)
        agents = copy.deepcopy(self.agents)
        events: list[dict[str, Any]] = []
        try:
            snap = self._execute_round(r, agents, events)
        except BackendError as exc:
            self.rng.bit_generator.state = rng_state
            ckpt = self.artifacts.checkpoint if self.artifacts is not None else None
            log.error("round %d aborted: %s", r, exc)
            raise RunAborted(r, ckpt, exc) from exc
        self.agents = agents
        self.round = r
        self.snapshots.append(snap)
        if self.artifacts is not None:
            self._append_round(events, snap)
            self._write_checkpoint()
        return snap

    # -- one round --------------------------------------------------------

    def _execute_round(self, r: int, agents: list[AgentState], events: list[dict[str, Any]]
                       ) -> MetricsSnapshot:
        cfg = self.config
        k_topics = cfg.n_topics
        backend = self.backend
        rng = self.rng

        def emit(kind: str, **payload: Any) -> None:
            events.append({"round": r, "type": kind, **payload})

        for a in agents:
            if a.memory.short_term:
                raise AssertionError(f"agent {a.id} starts round {r} with short-term memory")

        # recommend
        emit("stage", stage="recommend")
        stats = topic_stats(agents, k_topics, cfg.fatigue_b)
        if cfg.ablations.no_topic_choose:
            recs = [int(rng.integers(k_topics)) + 1 for _ in agents]
            source = "uniform"
        else:
            tie_orders: list[list[int] | None] = [None] * len(agents)
            if k_topics > 1 and not any(a.topic_history for a in agents):
                # no history yet: every topic scores the same, so break ties randomly per agent
                tie_orders = [[int(t) + 1 for t in rng.permutation(k_topics)] for _ in agents]
            recs = backend.map(
                lambda a: recommend_topic(
                    a, stats, backend, topics=self.topics, heat_weight=cfg.heat_weight, round=r,
                    tie_order=tie_orders[a.id],
                    memory_lines=render_long_term(a.memory, cfg.memory_prompt_budget),
                ),
                agents,
            )
            source = "scored" if not backend.textual else backend.kind
        for a, t in zip(agents, recs):
            emit("recommend", agent=a.id, topic=t, source=source)

        # select
        emit("stage", stage="select")

        def on_decision(i: int, j: int, d: MatchDecision) -> None:
            emit("match", agent=i, candidate=j, accept=d.accept, reason=d.reason)

        pairs = select_pairs(
            agents, self.graph, r, cfg.mechanism, [{t} for t in recs], rng,
            epsilon=cfg.epsilon, n_topics=k_topics, backend=backend, topics=self.topics,
            no_filter=cfg.ablations.no_interaction_filter, on_decision=on_decision,
        )
        for p in pairs:
            emit("pair", a=p.a, b=p.b, topic=p.topic)

        # exchange: both sides remember the partner's stance and log the topic
        emit("stage", stage="exchange")
        before = self.belief_matrix(agents)
        for p in pairs:
            topic = self.topics[p.topic - 1]
            for me, other in ((p.a, p.b), (p.b, p.a)):
                agents[me].topic_history.append(p.topic)
                stance = float(before[other, p.topic - 1])
                record_interaction(agents[me].memory, MemoryRecord(
                    round=r, topic=p.topic, partner=other, partner_stance=stance,
                    summary=partner_message(agents[other].persona, stance, topic),
                ))
                emit("memory", agent=me, partner=other, topic=p.topic, partner_stance=stance)

        # update: all proposals from the round-start snapshot, committed in agent-id order
        emit("stage", stage="update")
        jobs = [(idx, me, other, p) for idx, p in enumerate(pairs)
                for me, other in ((p.a, p.b), (p.b, p.a))]
        proposals = backend.map(lambda job: self._propose(job, agents, before, r), jobs)
        ordered = sorted(zip(jobs, proposals), key=lambda jp: (jp[0][1], jp[0][0]))
        for (idx, me, other, p), (new_k, reason) in ordered:
            k = p.topic - 1
            delta = new_k - float(before[me, k])
            old = float(agents[me].beliefs[k])
            agents[me].beliefs = spread(agents[me].beliefs, p.topic, delta, self.coupling)
            upd = BeliefUpdate(me, p.topic, old, float(agents[me].beliefs[k]), reason)
            emit("belief", agent=upd.agent, partner=other, topic=upd.topic,
                 old=upd.old, new=upd.new, reason=upd.reason)

        # consolidate
        emit("stage", stage="consolidate")
        summarize = self._summarizer(r) if backend.textual else None
        backend.map(
            lambda a: consolidate(a.memory, r, None if summarize is None else summarize(a)),
            [a for a in agents if a.memory.short_term],
        )
        for a in agents:
            if a.memory.long_term and a.memory.long_term[-1].round == r:
                emit("consolidate", agent=a.id, summary=a.memory.long_term[-1].summary)

        # decay
        emit("stage", stage="decay")
        end_of_round_decay(agents, cfg.decay_lambda, cfg.ablations.no_decay)
        for a in agents:
            decay_salience(a.memory)

        # metrics
        emit("stage", stage="metrics")
        heat = compute_heat([a.topic_history for a in agents], k_topics)
        snap = snapshot(self.belief_matrix(agents), self.graph, cfg.epsilon, r, self.baseline, heat)
        emit("metrics", eci=[m.eci for m in snap.per_topic], nci=[m.nci for m in snap.per_topic],
             polarization=[m.polarization for m in snap.per_topic])
        return snap

    def _rule(self) -> dict[str, Any]:
        return {"step": self.config.step, "confidence": self.config.confidence_bound,
                "backfire": self.config.backfire}

    def _propose(self, job, agents: list[AgentState], before: np.ndarray, r: int) -> tuple[float, str]:
        _, me, other, p = job
        k = p.topic - 1
        v, u = float(before[me, k]), float(before[other, k])
        rule = self._rule()
        if not self.backend.textual:
            return topic_shift(v, u, **rule), shift_reason(v, u, rule["confidence"])
        snapshot_self = replace(agents[me], beliefs=before[me].copy())
        snapshot_other = replace(agents[other], beliefs=before[other].copy())
        topic = self.topics[k]
        upd = llm_update(
            snapshot_self, snapshot_other, p.topic, self.backend,
            topics=self.topics,
            relation_phrase=self.config.topics[k].correlation.prompt_phrase,
            partner_message=partner_message(agents[other].persona, u, topic),
            round=r, rule=rule,
            memory_lines=render_long_term(agents[me].memory, self.config.memory_prompt_budget),
            today_lines=[m.summary for m in agents[me].memory.short_term],
        )
        return upd.new, upd.reason

    def _summarizer(self, r: int) -> Callable[[AgentState], Callable[[list[MemoryRecord]], str]]:
        def for_agent(a: AgentState) -> Callable[[list[MemoryRecord]], str]:
            def summarize(records: list[MemoryRecord]) -> str:
                lines = [
                    f"On '{self.topics[m.topic - 1].label}' user #{m.partner} said: {m.summary}"
                    for m in records
                ]
                prompt = PromptRecord(
                    purpose=Purpose.MEMORY_CONSOLIDATE,
                    rendered_text=render_consolidate(a.persona, lines),
                    agent=a.id, round=r,
                    system=system_prompt(Purpose.MEMORY_CONSOLIDATE.value),
                    payload={"records": [asdict(m) for m in records]},
                )
                return ask(self.backend, prompt, "summary")
            return summarize
        return for_agent

    # -- files ------------------------------------------------------------

    def _seed_line(self) -> str:
        return f"# seed={self.config.seed}\n"

    def _start_files(self) -> None:
        art = self.artifacts
        assert art is not None
        art.config.write_text(self._seed_line() + dump_config(self.config), encoding="utf-8")
        write_edgelist(self.graph, art.graph)
        with art.graph.open("r+", encoding="utf-8") as fh:
            body = fh.read()
            fh.seek(0)
            fh.write(self._seed_line() + body)
        header = {"type": "header", "seed": self.config.seed, "n_agents": self.config.n_agents,
                  "n_topics": self.config.n_topics, "backend": self.backend.kind}
        art.events.write_text(json.dumps(header) + "\n", encoding="utf-8")
        art.beliefs.write_text(self._seed_line() + "round,agent,topic,value\n"
                               + self._belief_rows(0, self.agents), encoding="utf-8")
        art.metrics.write_text(self._seed_line() + ",".join(METRIC_COLUMNS) + "\n"
                               + _csv_text(metric_rows(self.baseline)), encoding="utf-8")
        art.fatigue.write_text(self._seed_line() + "round,agent,topic,tsr,fatigue\n", encoding="utf-8")
        if art.prompts is not None and not art.prompts.exists():
            art.prompts.write_text("", encoding="utf-8")

    def _belief_rows(self, r: int, agents: Sequence[AgentState]) -> str:
        return "".join(
            f"{r},{a.id},{k + 1},{float(v)!r}\n" for a in agents for k, v in enumerate(a.beliefs)
        )

    def _append_round(self, events: list[dict[str, Any]], snap: MetricsSnapshot) -> None:
        art = self.artifacts
        assert art is not None
        r = snap.round
        with art.events.open("a", encoding="utf-8") as fh:
            fh.writelines(json.dumps(e, ensure_ascii=False) + "\n" for e in events)
        with art.beliefs.open("a", encoding="utf-8") as fh:
            fh.write(self._belief_rows(r, self.agents))
        with art.metrics.open("a", encoding="utf-8") as fh:
            fh.write(_csv_text(metric_rows(snap)))
        stats = topic_stats(self.agents, self.config.n_topics, self.config.fatigue_b)
        with art.fatigue.open("a", encoding="utf-8") as fh:
            fh.write("".join(
                f"{r},{i},{k + 1},{float(stats.tsr[i, k])!r},{float(stats.fatigue[i, k])!r}\n"
                for i in range(len(self.agents)) for k in range(self.config.n_topics)
            ))

    # -- checkpoints ------------------------------------------------------

    def state_dict(self) -> dict[str, Any]:
        offsets = {}
        if self.artifacts is not None:
            offsets = {name: p.stat().st_size for name, p in self.artifacts.appendable().items()}
        return {
            "version": CHECKPOINT_VERSION,
            "config": self.config.to_dict(),
            "round": self.round,
            "agents": [
                {
                    "persona": asdict(a.persona),
                    "beliefs": [float(v) for v in a.beliefs],
                    "topic_history": list(a.topic_history),
                    "memory": a.memory.to_dict(),
                }
                for a in self.agents
            ],
            "graph": {"n": self.graph.n,
                      "edges": [[i, j, w] for (i, j), w in sorted(self.graph.weights.items())]},
            "rng": self.rng.bit_generator.state,
            "snapshots": [_snapshot_to_dict(s) for s in self.snapshots],
            "offsets": offsets,
        }

    def _load_state(self, d: dict[str, Any]) -> None:
        self.round = d["round"]
        self.agents = [
            AgentState(
                persona=PersonaProfile(**{**a["persona"], "big_five": tuple(a["persona"]["big_five"])}),
                beliefs=np.array(a["beliefs"], dtype=float),
                topic_history=list(a["topic_history"]),
                memory=MemoryStore.from_dict(a["memory"]),
            )
            for a in d["agents"]
        ]
        self.graph = from_edges(d["graph"]["n"], [tuple(e) for e in d["graph"]["edges"]])
        self.rng.bit_generator.state = d["rng"]
        self.snapshots = [_snapshot_from_dict(s) for s in d["snapshots"]]
        self.baseline = self.snapshots[0]

    def _write_checkpoint(self) -> None:
        assert self.artifacts is not None
        path = self.artifacts.checkpoint
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.state_dict()), encoding="utf-8")
        os.replace(tmp, path)

    @classmethod
    def resume(cls, checkpoint: str | Path, backend: OpinionBackend | None = None,
               config: SimulationConfig | None = None) -> Simulation:
        """Reload a run from its checkpoint; artifact files are cut back to the checkpointed round."""
        path = Path(checkpoint)
        try:
            d = json.loads(path.read_text(encoding="utf-8"))
            if d.get("version") != CHECKPOINT_VERSION:
                raise CheckpointError(f"unsupported checkpoint version {d.get('version')}")
            saved_cfg = config_from_dict(d["config"])
        except CheckpointError:
            raise
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
        cfg = config or saved_cfg
        prompts = (path.parent / "prompts.jsonl").exists()
        sim = cls(cfg, out_dir=path.parent, backend=backend, log_prompts=prompts, _restore=d)
        assert sim.artifacts is not None
        for name, p in sim.artifacts.appendable().items():
            size = d["offsets"].get(name)
            if size is None or not p.exists() or p.stat().st_size < size:
                raise CheckpointError(f"{p} is missing or shorter than the checkpoint expects")
            with p.open("r+b") as fh:
                fh.truncate(size)
        return sim


def run_simulation(config: SimulationConfig, out_dir: str | Path | None = None,
                   backend: OpinionBackend | None = None) -> Simulation:
    sim = Simulation(config, out_dir, backend)
    sim.run()
    return sim


# --------------------------------------------------------------------------
# presets

MAIN_TOPIC = "Universal basic income"
SECONDARY_TOPICS = (
    "Remote work",
    "Nuclear energy",
    "Space exploration",
    "Public transport",
    "Online privacy",
    "Lab-grown meat",
    "Four-day work week",
)
SWEEP_KINDS = ("single-only", "strong-positive", "weak-positive", "none", "weak-negative",
               "strong-negative")
PRESETS = ("single-topic", "multi-topic-uncorrelated", "correlation-sweep", "ablation-suite")
UNCORRELATED_TOPICS = 2


def single_topic_set() -> tuple[TopicConfig, ...]:
    return (TopicConfig(MAIN_TOPIC, correlation=CorrelationSpec.of("single-only")),)


def uncorrelated_set(k: int = UNCORRELATED_TOPICS) -> tuple[TopicConfig, ...]:
    if not 2 <= k <= 1 + len(SECONDARY_TOPICS):
        raise ValueError(f"uncorrelated preset supports 2..{1 + len(SECONDARY_TOPICS)} topics")
    return (TopicConfig(MAIN_TOPIC, correlation=CorrelationSpec.of("none")),) + tuple(
        TopicConfig(label, correlation=CorrelationSpec.of("none")) for label in SECONDARY_TOPICS[:k - 1]
    )


def pair_set(kind: str) -> tuple[TopicConfig, ...]:
    if kind == "single-only":
        return single_topic_set()
    return (
        TopicConfig(MAIN_TOPIC, correlation=CorrelationSpec.of("none")),
        TopicConfig(SECONDARY_TOPICS[0], correlation=CorrelationSpec.of(kind)),
    )


def preset_scenarios(name: str, base: SimulationConfig) -> list[tuple[str, SimulationConfig]]:
    """Expand a preset into (scenario name, config). Scenarios share the base seed."""
    if name == "single-topic":
        return [("single-topic", replace(base, topics=single_topic_set()))]
    if name == "multi-topic-uncorrelated":
        return [("multi-topic-uncorrelated", replace(base, topics=uncorrelated_set()))]
    if name == "correlation-sweep":
        return [(kind, replace(base, topics=pair_set(kind))) for kind in SWEEP_KINDS]
    if name == "ablation-suite":
        multi = replace(base, topics=uncorrelated_set(), ablations=Ablations())
        return [
            ("full", multi),
            ("prompt-choose", replace(multi, mechanism="prompt-match")),
            ("w/o decay", replace(multi, ablations=Ablations(no_decay=True))),
            ("w/o topic-choose", replace(multi, ablations=Ablations(no_topic_choose=True))),
            ("w/o all", replace(multi, ablations=Ablations(True, True, True))),
            ("single-topic", replace(base, topics=single_topic_set(), ablations=Ablations())),
        ]
    raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")


@dataclass
class ScenarioResult:
    scenario: str
    seed: int
    status: str
    final: TopicMetrics | None = None
    main: TopicMetrics | None = None
    out_dir: Path | None = None
    error: str | None = None


SUMMARY_COLUMNS = ("scenario", "seed", "status", "delta_p", "delta_gd", "delta_mean_nci",
                   "eci", "nci", "main_eci", "main_nci", "out_dir", "error")


def _slug(name: str) -> str:
    return name.replace("w/o ", "no-").replace("/", "-").replace(" ", "-")


def run_experiment(
    preset: str,
    base: SimulationConfig,
    out_root: str | Path | None = None,
    seeds: Sequence[int] | None = None,
    backend_factory: Callable[[SimulationConfig], OpinionBackend] | None = None,
) -> list[ScenarioResult]:
    """Run every scenario of a preset for every seed; failures are recorded, not raised.

    With `out_root`, each run writes its artifacts under
    ``<out_root>/<scenario>/seed-<s>`` and a ``summary.csv`` with the final
    across-topic deltas is written to `out_root`.
    """
    seeds = list(seeds) if seeds is not None else [base.seed]
    results: list[ScenarioResult] = []
    for seed in seeds:
        for name, cfg in preset_scenarios(preset, replace(base, seed=seed)):
            out = Path(out_root) / _slug(name) / f"seed-{seed}" if out_root is not None else None
            try:
                backend = backend_factory(cfg) if backend_factory else None
                sim = run_simulation(cfg, out, backend)
            except (RunAborted, BackendError) as exc:
                log.error("scenario %s seed %d failed: %s", name, seed, exc)
                results.append(ScenarioResult(name, seed, "failed", out_dir=out, error=str(exc)))
                continue
            last = sim.snapshots[-1]
            results.append(ScenarioResult(name, seed, "ok", last.mean(), last.per_topic[0], out))
    if out_root is not None:
        write_summary(results, Path(out_root) / "summary.csv")
    return results


def write_summary(results: Sequence[ScenarioResult], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [list(SUMMARY_COLUMNS)]
    for r in results:
        f, m = r.final, r.main
        rows.append([
            r.scenario, r.seed, r.status,
            _fmt(f.delta_p) if f else "", _fmt(f.delta_gd) if f else "",
            _fmt(f.delta_mean_nci) if f else "", _fmt(f.eci) if f else "", _fmt(f.nci) if f else "",
            _fmt(m.eci) if m else "", _fmt(m.nci) if m else "",
            str(r.out_dir or ""), r.error or "",
        ])
    path.write_text(_csv_text(rows), encoding="utf-8")


def format_table(results: Sequence[ScenarioResult]) -> str:
    """Plain-text comparison table: one row per scenario, deltas averaged over seeds."""
    by_name: dict[str, list[ScenarioResult]] = {}
    for r in results:
        by_name.setdefault(r.scenario, []).append(r)
    lines = [f"{'Model':<20}{'dP':>10}{'dGD':>10}{'dMeanNCI':>10}{'runs':>6}"]
    for name, rs in by_name.items():
        ok = [r.final for r in rs if r.status == "ok" and r.final is not None]
        if not ok:
            lines.append(f"{name:<20}{'failed':>30}{0:>6}")
            continue
        agg = across_topic_mean(ok)

        def cell(x: float | None) -> str:
            return f"{x:>10.4f}" if x is not None else f"{'n/a':>10}"

        lines.append(f"{name:<20}{cell(agg.delta_p)}{cell(agg.delta_gd)}{cell(agg.delta_mean_nci)}"
                     f"{len(ok):>6}")
    return "\n".join(lines)


def parse_seeds(text: str) -> list[int]:
    """'50' -> [50]; '50..59' -> [50, ..., 59]; '1,3,5' -> [1, 3, 5]."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            a, b = int(lo), int(hi)
            if b < a:
                raise ValueError(f"empty seed range {part!r}")
            out.extend(range(a, b + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("no seeds given")
    return out
