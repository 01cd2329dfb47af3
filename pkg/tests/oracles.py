"""Independent reference implementations used to check the package.

Formulas are evaluated with mpmath at 50 digits or with exact fractions;
graph metrics are direct sums over an explicit edge list rather than the
adjacency tuples the package uses.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

mpmath.mp.dps = 50


def fatigue(tsr: float, b: float) -> float:
    t, bb = mpmath.mpf(tsr), mpmath.mpf(b)
    return float((mpmath.exp(bb * t) - 1) / (mpmath.exp(bb) - 1))


def decay(v: float, lam: float) -> float:
    x = mpmath.mpf(v)
    return float(x * mpmath.exp(-mpmath.mpf(lam) * abs(x)))


def heat(histories, n_topics):
    counts = [0] * n_topics
    for h in histories:
        for t in h:
            counts[t - 1] += 1
    total = sum(counts)
    return [float(Fraction(c, total)) if total else 0.0 for c in counts]


def mean(values) -> float:
    return float(sum(Fraction(v) for v in values) / len(values))


def _nbrs(n, edges):
    out = {i: [] for i in range(n)}
    for i, j, _ in edges:
        out[i].append(j)
        out[j].append(i)
    return out


def _w(edges):
    d = {}
    for i, j, w in edges:
        d[(i, j)] = d[(j, i)] = w
    return d


def nci(v, n, edges, eps):
    nb = _nbrs(n, edges)
    scores = []
    for i in range(n):
        if nb[i]:
            hits = 0
            for j in nb[i]:
                if abs(v[i] - v[j]) < eps:
                    hits += 1
            scores.append(hits / len(nb[i]))
    return sum(scores) / len(scores) if scores else None


def eci(v, n, edges):
    nb = _nbrs(n, edges)
    scores = []
    for i in range(n):
        if nb[i]:
            s = 0.0
            for j in nb[i]:
                s += 1 - abs(v[i] - v[j]) / 4
            scores.append(s / len(nb[i]))
    return sum(scores) / len(scores) if scores else None


def variance(v):
    mu = sum(v) / len(v)
    return sum((x - mu) ** 2 for x in v) / len(v)


def gd(v, n, edges):
    nb = _nbrs(n, edges)
    w = _w(edges)
    total = 0.0
    for i in range(n):
        if nb[i]:
            total += sum(w[(i, j)] * (v[i] - v[j]) ** 2 for j in nb[i]) / len(nb[i])
    return total / (2 * n)


def mean_nci(v, n, edges):
    nb = _nbrs(n, edges)
    own = [v[i] for i in range(n) if nb[i]]
    avg = [sum(v[j] for j in nb[i]) / len(nb[i]) for i in range(n) if nb[i]]
    if len(own) < 2 or np.std(own) < 1e-9 or np.std(avg) < 1e-9:
        return None
    return float(np.corrcoef(own, avg)[0, 1])
