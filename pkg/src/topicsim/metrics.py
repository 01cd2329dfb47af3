"""Echo-chamber and polarization metrics over one topic's belief vector.

A metric that cannot be computed (no agent with neighbours, or a
zero-variance correlation input) is reported as ``None``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import SocialGraph

log = logging.getLogger(__name__)


def _isolated(graph: SocialGraph) -> list[int]:
    iso = [i for i in range(graph.n) if not graph.adjacency[i]]
    if iso:
        log.debug("excluding isolated agents %s", iso)
    return iso


def nci_threshold(values: Sequence[float], graph: SocialGraph, epsilon: float) -> float | None:
    """Mean over agents of the share of neighbours closer than epsilon (strictly)."""
    per_agent = []
    for i in range(graph.n):
        nb = graph.adjacency[i]
        if nb:
            per_agent.append(sum(1 for j in nb if abs(values[i] - values[j]) < epsilon) / len(nb))
    _isolated(graph)
    return math.fsum(per_agent) / len(per_agent) if per_agent else None


def eci(values: Sequence[float], graph: SocialGraph) -> float | None:
    per_agent = []
    for i in range(graph.n):
        nb = graph.adjacency[i]
        if nb:
            per_agent.append(math.fsum(1.0 - abs(values[i] - values[j]) / 4.0 for j in nb) / len(nb))
    return math.fsum(per_agent) / len(per_agent) if per_agent else None


def polarization(values: Sequence[float]) -> float:
    """Population variance (divides by N)."""
    n = len(values)
    if n == 0:
        raise ValueError("polarization needs at least one agent")
    mu = math.fsum(values) / n
    return math.fsum((v - mu) ** 2 for v in values) / n


def global_disagreement(values: Sequence[float], graph: SocialGraph) -> float:
    total = []
    for i in range(graph.n):
        nb = graph.adjacency[i]
        if nb:
            total.append(
                math.fsum(graph.weight(i, j) * (values[i] - values[j]) ** 2 for j in nb) / len(nb)
            )
    return math.fsum(total) / (2 * graph.n)


def _pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    scale_x = max(1.0, max(abs(a) for a in x))
    scale_y = max(1.0, max(abs(b) for b in y))
    # treat rounding-level spread as zero variance
    if sxx <= n * (1e-12 * scale_x) ** 2 or syy <= n * (1e-12 * scale_y) ** 2:
        return None
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def mean_nci(values: Sequence[float], graph: SocialGraph) -> float | None:
    """Pearson correlation between each belief and the unweighted mean of its neighbours' beliefs."""
    own, nbr = [], []
    for i in range(graph.n):
        nb = graph.adjacency[i]
        if nb:
            own.append(float(values[i]))
            nbr.append(math.fsum(values[j] for j in nb) / len(nb))
    if len(own) < 2:
        return None
    return _pearson(own, nbr)


def _sub(a: float | None, b: float | None) -> float | None:
    return None if a is None or b is None else a - b


@dataclass(frozen=True)
class TopicMetrics:
    nci: float | None
    eci: float | None
    polarization: float
    gd: float
    mean_nci: float | None
    delta_p: float | None = 0.0
    delta_gd: float | None = 0.0
    delta_mean_nci: float | None = 0.0


@dataclass(frozen=True)
class MetricsSnapshot:
    round: int
    per_topic: tuple[TopicMetrics, ...]
    heat: tuple[float, ...] = field(default=())

    def topic(self, t: int) -> TopicMetrics:
        return self.per_topic[t - 1]

    def mean(self) -> TopicMetrics:
        return across_topic_mean(self.per_topic)


def topic_metrics(values: Sequence[float], graph: SocialGraph, epsilon: float) -> TopicMetrics:
    values = [float(v) for v in values]
    return TopicMetrics(
        nci=nci_threshold(values, graph, epsilon),
        eci=eci(values, graph),
        polarization=polarization(values),
        gd=global_disagreement(values, graph),
        mean_nci=mean_nci(values, graph),
    )


def deltas(current: TopicMetrics, baseline: TopicMetrics) -> TopicMetrics:
    return TopicMetrics(
        nci=current.nci,
        eci=current.eci,
        polarization=current.polarization,
        gd=current.gd,
        mean_nci=current.mean_nci,
        delta_p=current.polarization - baseline.polarization,
        delta_gd=current.gd - baseline.gd,
        delta_mean_nci=_sub(current.mean_nci, baseline.mean_nci),
    )


def snapshot(
    beliefs: np.ndarray,
    graph: SocialGraph,
    epsilon: float,
    round: int,
    baseline: MetricsSnapshot | None = None,
    heat: Sequence[float] = (),
) -> MetricsSnapshot:
    """Metrics for every topic column of an (N, K) belief matrix, with deltas against `baseline`."""
    beliefs = np.asarray(beliefs, dtype=float)
    per_topic = [topic_metrics(beliefs[:, k], graph, epsilon) for k in range(beliefs.shape[1])]
    if baseline is not None:
        if len(baseline.per_topic) != len(per_topic):
            raise ValueError("baseline has a different number of topics")
        per_topic = [deltas(c, b) for c, b in zip(per_topic, baseline.per_topic)]
    return MetricsSnapshot(round, tuple(per_topic), tuple(float(h) for h in heat))


def _mean_of(xs: Sequence[float | None]) -> float | None:
    if any(x is None for x in xs):
        return None
    return math.fsum(xs) / len(xs)  # type: ignore[arg-type]


def across_topic_mean(rows: Sequence[TopicMetrics]) -> TopicMetrics:
    return TopicMetrics(
        **{name: _mean_of([getattr(r, name) for r in rows]) for name in TopicMetrics.__dataclass_fields__}
    )
