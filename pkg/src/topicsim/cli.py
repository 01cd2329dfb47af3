"""Command-line entry point: run, experiment, resume, metrics, export-graph."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path
from typing import Any, Sequence, get_type_hints

import numpy as np

from .core import ConfigError, LLMSettings, SimulationConfig, load_config, rng_streams
from .llm import BackendError
from .metrics import snapshot
from .network import GraphError, build_graph, read_edgelist, write_edgelist
from .runner import (
    PRESETS,
    CheckpointError,
    RunAborted,
    Simulation,
    _csv_text,
    format_table,
    metric_rows,
    parse_seeds,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_CHECKPOINT = 4

log = logging.getLogger("topicsim")

_SCALARS = (int, float, str, bool)
_SKIP = {"topics", "ablations", "llm"}


def _scalar_fields(cls) -> list[tuple[str, type]]:
    hints = get_type_hints(cls)
    out = []
    for f in fields(cls):
        t = hints[f.name]
        base = next((s for s in _SCALARS if t is s or s in getattr(t, "__args__", ())), None)
        if f.name not in _SKIP and base is not None:
            out.append((f.name, base))
    return out


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (override the config file)")
    g.add_argument("--config", type=Path, help="YAML config file")
    for name, typ in _scalar_fields(SimulationConfig):
        flag = "--" + name.replace("_", "-")
        if typ is bool:
            g.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
        else:
            g.add_argument(flag, dest=name, type=typ, default=None)
    g.add_argument("--rounds", dest="n_rounds", type=int, default=None, help="alias of --n-rounds")
    for name in ("no_decay", "no_topic_choose", "no_interaction_filter"):
        g.add_argument("--" + name.replace("_", "-"), dest=name, action="store_true")
    for name, typ in _scalar_fields(LLMSettings):
        flag = "--" + name.replace("_", "-")
        if typ is bool:
            g.add_argument(flag, dest="llm_" + name, action="store_true", default=None)
        else:
            g.add_argument(flag, dest="llm_" + name, type=typ, default=None)


def config_from_args(args: argparse.Namespace) -> SimulationConfig:
    cfg = load_config(args.config) if args.config else SimulationConfig()
    changes: dict[str, Any] = {}
    for name, _ in _scalar_fields(SimulationConfig):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    abl = {n: True for n in ("no_decay", "no_topic_choose", "no_interaction_filter") if getattr(args, n, False)}
    if abl:
        changes["ablations"] = replace(cfg.ablations, **abl)
    llm = {n: getattr(args, "llm_" + n) for n, _ in _scalar_fields(LLMSettings)
           if getattr(args, "llm_" + n, None) is not None}
    if llm:
        changes["llm"] = replace(cfg.llm, **llm)
    try:
        return replace(cfg, **changes)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _print_final(sim: Simulation) -> None:
    last = sim.snapshots[-1]
    for row in metric_rows(last):
        print("final " + ",".join(row))


def cmd_run(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    sim = Simulation(cfg, args.out)
    sim.run()
    _print_final(sim)
    print(f"artifacts written to {args.out}")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    seeds = parse_seeds(args.seeds) if args.seeds else [cfg.seed]
    results = run_experiment(args.preset, cfg, args.out, seeds)
    print(format_table(results))
    failed = [r for r in results if r.status != "ok"]
    for r in failed:
        print(f"FAILED {r.scenario} seed {r.seed}: {r.error}", file=sys.stderr)
    return EXIT_BACKEND if failed else EXIT_OK


def cmd_resume(args: argparse.Namespace) -> int:
    path = args.checkpoint
    if path.is_dir():
        path = path / "checkpoint.json"
    sim = Simulation.resume(path)
    print(f"resuming at round {sim.round + 1} of {sim.config.n_rounds}")
    sim.run()
    _print_final(sim)
    return EXIT_OK


def _read_beliefs(path: Path) -> dict[int, dict[tuple[int, int], float]]:
    rounds: dict[int, dict[tuple[int, int], float]] = {}
    with path.open(encoding="utf-8") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in rows:
            rounds.setdefault(int(row["round"]), {})[(int(row["agent"]), int(row["topic"]))] = float(row["value"])
    return rounds


def cmd_metrics(args: argparse.Namespace) -> int:
    run_dir: Path = args.run_dir
    beliefs_path = run_dir / "beliefs.csv"
    if not beliefs_path.exists():
        raise ConfigError(f"{beliefs_path} not found")
    cfg = load_config(run_dir / "config.yaml") if (run_dir / "config.yaml").exists() else SimulationConfig()
    epsilon = args.epsilon if args.epsilon is not None else cfg.epsilon
    graph = read_edgelist(run_dir / "graph.edgelist")
    rounds = _read_beliefs(beliefs_path)
    baseline = None
    out_rows = []
    for r in sorted(rounds):
        cells = rounds[r]
        n = 1 + max(a for a, _ in cells)
        k = max(t for _, t in cells)
        mat = np.zeros((n, k))
        for (a, t), v in cells.items():
            mat[a, t - 1] = v
        snap = snapshot(mat, graph, epsilon, r, baseline)
        baseline = baseline or snap
        out_rows.extend(row[:-1] for row in metric_rows(snap))
    header = "round,topic,nci,eci,polarization,gd,mean_nci,delta_p,delta_gd,delta_mean_nci\n"
    text = header + _csv_text(out_rows)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export_graph(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    _, graph_rng, _ = rng_streams(cfg.seed)
    graph = build_graph(cfg.n_agents, cfg.attachment_m, graph_rng, cfg.edge_weight)
    write_edgelist(graph, args.output)
    print(f"{graph.n} nodes, {len(graph.weights)} edges -> {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topicsim", description=__doc__)
    p.add_argument("-v", "--verbose-log", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one configuration")
    _add_config_flags(run)
    run.add_argument("--out", type=Path, required=True, help="output directory")
    run.set_defaults(func=cmd_run)

    exp = sub.add_parser("experiment", help="run a preset of scenarios")
    exp.add_argument("preset", choices=PRESETS)
    _add_config_flags(exp)
    exp.add_argument("--seeds", help="seed list, e.g. 50..59 or 1,2,3")
    exp.add_argument("--out", type=Path, required=True)
    exp.set_defaults(func=cmd_experiment)

    res = sub.add_parser("resume", help="continue a run from its checkpoint")
    res.add_argument("checkpoint", type=Path, help="checkpoint.json or the run directory")
    res.set_defaults(func=cmd_resume)

    met = sub.add_parser("metrics", help="recompute metrics from a run's beliefs.csv")
    met.add_argument("run_dir", type=Path)
    met.add_argument("--epsilon", type=float)
    met.add_argument("--output", type=Path)
    met.set_defaults(func=cmd_metrics)

    eg = sub.add_parser("export-graph", help="write the seeded social graph as an edge list")
    _add_config_flags(eg)
    eg.add_argument("--output", type=Path, required=True)
    eg.set_defaults(func=cmd_export_graph)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose_log else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, GraphError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunAborted as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT


if __name__ == "__main__":
    sys.exit(main())
