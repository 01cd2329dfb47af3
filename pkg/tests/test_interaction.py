from __future__ import annotations

import numpy as np
import pytest

from topicsim.core import AgentState, PersonaProfile, Topic
from topicsim.interaction import (
    InteractionPair,
    MatchDecision,
    hk_filter,
    prompt_match,
    select_pairs,
)
from topicsim.llm import ChatBackend, MalformedReplyError
from topicsim.network import complete_graph, generate_scale_free
from topicsim.stub import StubBackend

TOPICS = [Topic(1, "A"), Topic(2, "B")]


def agent(i, *beliefs):
    return AgentState(PersonaProfile(i, 25, "female", "primary", (True, False, True, False, True)),
                      np.array(beliefs, dtype=float))


def test_hk_filter_examples():
    me = agent(0, 0.0)
    cands = [agent(1, 0.05), agent(2, 0.5)]
    assert hk_filter(me, cands, 0.1) == [1]
    same = [agent(i, 0.3) for i in range(1, 4)]
    assert hk_filter(agent(0, 0.3), same, 0.0) == [1, 2, 3]
    spread = [agent(1, 2.0), agent(2, -2.0)]
    assert hk_filter(agent(0, -2.0), spread, 4.0) == [1, 2]


def test_hk_filter_uses_the_mean_over_topics():
    assert hk_filter(agent(0, 2.0, -2.0), [agent(1, -2.0, 2.0)], 0.1) == [1]


def test_types_validate():
    with pytest.raises(ValueError):
        InteractionPair(1, 1, 1, 1)
    with pytest.raises(ValueError):
        MatchDecision(True, "")


def test_stub_prompt_match_equals_hk():
    rng = np.random.default_rng(0)
    stub = StubBackend()
    for _ in range(200):
        a, b = agent(0, *rng.uniform(-2, 2, 2)), agent(1, *rng.uniform(-2, 2, 2))
        d = prompt_match(a, b, stub, topics=TOPICS, epsilon=0.1)
        assert d.accept == (hk_filter(a, [b], 0.1) == [1]) and d.reason


def test_malformed_decision_reasks_then_errors(mock_server):
    mock_server.default = {"content": '{"decision":"maybe"}'}
    with pytest.raises(MalformedReplyError):
        prompt_match(agent(0, 0.0, 0.0), agent(1, 0.0, 0.0), ChatBackend(mock_server.url), topics=TOPICS, epsilon=0.1)
    assert len(mock_server.requests) == 2


def test_match_prompt_contains_both_profiles(mock_server):
    mock_server.default = {"content": '{"decision": "no", "reason": "opposite on everything"}'}
    d = prompt_match(agent(0, 2.0, 2.0), agent(7, -2.0, -2.0), ChatBackend(mock_server.url), topics=TOPICS, epsilon=0.1)
    assert d == MatchDecision(False, "opposite on everything")
    text = mock_server.requests[0]["messages"][-1]["content"]
    assert "User #0" in text and "User #7" in text and "[2, 2]" in text and "[-2, -2]" in text


def test_identical_agents_all_pair():
    agents = [agent(i, 0.4, -0.4) for i in range(6)]
    pairs = select_pairs(agents, complete_graph(6), 1, "hk-mean", [{1}] * 6, np.random.default_rng(0),
                         epsilon=0.1, n_topics=2)
    assert [p.a for p in pairs] == list(range(6))
    assert all(p.topic == 1 for p in pairs)


def test_outlier_skips():
    agents = [agent(0, 2.0)] + [agent(i, -2.0) for i in range(1, 5)]
    pairs = select_pairs(agents, complete_graph(5), 1, "hk-mean", [{1}] * 5, np.random.default_rng(0),
                         epsilon=0.1, n_topics=1)
    assert 0 not in [p.a for p in pairs] and 0 not in [p.b for p in pairs]
    assert len(pairs) == 4


def test_no_filter_pairs_everyone():
    agents = [agent(0, 2.0)] + [agent(i, -2.0) for i in range(1, 5)]
    pairs = select_pairs(agents, complete_graph(5), 1, "hk-mean", [{1}] * 5, np.random.default_rng(0),
                         epsilon=0.1, n_topics=1, no_filter=True)
    assert len(pairs) == 5


def test_empty_intersection_falls_back_to_all_topics():
    agents = [agent(0, 0.0, 0.0), agent(1, 0.0, 0.0)]
    rng = np.random.default_rng(1)
    seen = set()
    for _ in range(40):
        pairs = select_pairs(agents, complete_graph(2), 1, "hk-mean", [{1}, {2}], rng, epsilon=0.1, n_topics=2)
        seen |= {p.topic for p in pairs}
    assert seen == {1, 2}


def test_same_seed_same_pairs_and_decisions_logged():
    g = generate_scale_free(50, 2, np.random.default_rng(3))
    base = np.random.default_rng(8).uniform(-0.2, 0.2, size=(50, 2))
    agents = [agent(i, *base[i]) for i in range(50)]
    recs = [{1 + i % 2} for i in range(50)]
    logs = [[], []]
    runs = [
        select_pairs(agents, g, 1, "hk-mean", recs, np.random.default_rng(5), epsilon=0.1, n_topics=2,
                     on_decision=lambda i, j, d, log=log: log.append((i, j, d.accept)))
        for log in logs
    ]
    assert runs[0] == runs[1] and runs[0]
    assert logs[0] == logs[1] and len(logs[0]) == 2 * len(g.weights)
    for p in runs[0]:
        assert p.b in g.adjacency[p.a] and 1 <= p.topic <= 2


def test_prompt_mechanism_with_stub_equals_hk_mechanism():
    g = generate_scale_free(30, 2, np.random.default_rng(2))
    vals = np.random.default_rng(9).uniform(-0.3, 0.3, size=(30, 2))
    agents = [agent(i, *vals[i]) for i in range(30)]
    recs = [{1}] * 30
    hk = select_pairs(agents, g, 1, "hk-mean", recs, np.random.default_rng(4), epsilon=0.1, n_topics=2)
    pm = select_pairs(agents, g, 1, "prompt-match", recs, np.random.default_rng(4), epsilon=0.1, n_topics=2,
                      backend=StubBackend(), topics=TOPICS)
    assert hk == pm
