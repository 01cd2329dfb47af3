from __future__ import annotations

import pytest

from topicsim.memory import (
    MemoryRecord,
    MemoryStore,
    consolidate,
    decay_salience,
    record_interaction,
    render_long_term,
    structured_summary,
)


def rec(r=1, topic=1, partner=2, stance=0.5, summary="said something"):
    return MemoryRecord(r, topic, partner, stance, summary)


def test_record_appends_in_order():
    s = MemoryStore(n_topics=2)
    record_interaction(s, rec(partner=1))
    assert len(s.short_term) == 1
    record_interaction(s, rec(partner=3))
    assert [r.partner for r in s.short_term] == [1, 3]


def test_rejects_unknown_topic_and_bad_records():
    s = MemoryStore(n_topics=2)
    with pytest.raises(ValueError):
        record_interaction(s, rec(topic=3))
    with pytest.raises(ValueError):
        rec(summary="  ")
    with pytest.raises(ValueError):
        rec(stance=2.5)


def test_consolidate_empty_is_noop():
    s = MemoryStore()
    consolidate(s, 1)
    assert s.long_term == []


def test_three_records_make_one_long_term_entry():
    s = MemoryStore(n_topics=2)
    for p in (1, 2, 3):
        record_interaction(s, rec(partner=p, topic=1 + p % 2))
    consolidate(s, 1)
    assert len(s.long_term) == 1 and s.short_term == []
    assert s.long_term[0].topics == (1, 2)
    assert s.long_term[0].summary.startswith("Round 1: T2 with agent 1")


def test_capacity_evicts_lowest_salience_oldest():
    s = MemoryStore(capacity=10, retention=0.9)
    for r in range(1, 12):
        record_interaction(s, rec(r=r))
        consolidate(s, r)
        decay_salience(s)
    assert len(s.long_term) == 10
    assert [x.round for x in s.long_term] == list(range(2, 12))


def test_summarizer_failure_falls_back():
    s = MemoryStore()
    record_interaction(s, rec())

    def broken(_):
        raise RuntimeError("backend down")

    consolidate(s, 1, broken)
    assert s.long_term[0].summary == structured_summary([rec()])


def test_summarizer_used_when_it_works():
    s = MemoryStore()
    record_interaction(s, rec())
    consolidate(s, 1, lambda records: "a short memory")
    assert s.long_term[0].summary == "a short memory"


def test_decay_salience_examples():
    s = MemoryStore(retention=0.9)
    record_interaction(s, rec())
    consolidate(s, 1)
    decay_salience(s)
    decay_salience(s)
    assert s.long_term[0].salience == pytest.approx(0.81)
    decay_salience(s, retention=1.0)
    assert s.long_term[0].salience == pytest.approx(0.81)
    empty = MemoryStore()
    decay_salience(empty)
    assert empty.long_term == []
    with pytest.raises(ValueError):
        decay_salience(s, retention=0)


def test_render_most_recent_first_within_budget():
    s = MemoryStore()
    for r in (1, 2, 3):
        record_interaction(s, rec(r=r))
        consolidate(s, r)
    lines = render_long_term(s, budget_tokens=1000)
    assert [line.split(":")[0] for line in lines] == ["Round 3", "Round 2", "Round 1"]
    assert len(render_long_term(s, budget_tokens=12)) == 1


def test_dict_round_trip():
    s = MemoryStore(n_topics=3)
    record_interaction(s, rec(topic=3))
    consolidate(s, 1)
    record_interaction(s, rec(r=2))
    assert MemoryStore.from_dict(s.to_dict()) == s
