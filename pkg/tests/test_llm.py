from __future__ import annotations

import json

import numpy as np
import pytest

from topicsim.llm import (
    BackendTimeoutError,
    ChatBackend,
    MalformedReplyError,
    ParseError,
    PromptRecord,
    Purpose,
    TransportError,
    ask,
    complete,
    extract_json_object,
    parse_structured,
)
from topicsim.stub import NumericBackend, StubBackend


def prompt(purpose=Purpose.NEIGHBOR_MATCH, payload=None, text="hello"):
    return PromptRecord(purpose, text, agent=1, round=1, system=f"Task: {purpose.value}", payload=payload or {})


# -- parsing ---------------------------------------------------------------

def test_parse_decision_examples():
    assert parse_structured('{"decision":"yes"}', "decision")["accept"] is True
    assert parse_structured('{"decision":"YES "}', "decision")["accept"] is True
    assert parse_structured('{"decision":"no","reason":"too far"}', "decision") == {"accept": False, "reason": "too far"}
    with pytest.raises(ParseError):
        parse_structured('{"decision":"maybe"}', "decision")


def test_parse_belief_with_surrounding_prose():
    out = parse_structured('Sure! {"new_belief": -1, "reason": "..."} hope that helps', "belief")
    assert out == {"new_belief": -1.0, "reason": "..."}
    assert parse_structured('{"new_belief": 2.0, "reason": "r"}', "belief")["new_belief"] == 2.0
    for bad in ('{"new_belief": 7, "reason": "r"}', '{"new_belief": true, "reason": "r"}',
                '{"new_belief": "1", "reason": "r"}', '{"new_belief": 1}', '{"new_belief": 1, "reason": ""}'):
        with pytest.raises(ParseError):
            parse_structured(bad, "belief")


def test_parse_topic_forms():
    labels = ["Remote work", "Nuclear energy"]
    assert parse_structured('{"topic": " nuclear ENERGY"}', "topic", topics=labels) == 2
    assert parse_structured('{"topic": "T1"}', "topic", topics=labels) == 1
    assert parse_structured('{"topic": 2}', "topic", topics=labels) == 2
    with pytest.raises(ParseError):
        parse_structured('{"topic": "Mars"}', "topic", topics=labels)


def test_parse_summary_and_missing_object():
    assert parse_structured('{"summary": " kept "}', "summary") == "kept"
    with pytest.raises(ParseError):
        parse_structured("no json here", "summary")


def test_extract_first_balanced_object_ignores_braces_in_strings():
    assert extract_json_object('x {"a": "}{", "b": {"c": 1}} {"d": 2}') == {"a": "}{", "b": {"c": 1}}
    assert extract_json_object('{broken} {"ok": true}') == {"ok": True}


# -- stub ------------------------------------------------------------------

def test_stub_match_is_mean_gap_rule():
    stub = StubBackend()
    yes = complete(stub, prompt(payload={"self_mean": 0.0, "other_mean": 0.1, "epsilon": 0.1}))
    no = complete(stub, prompt(payload={"self_mean": 0.0, "other_mean": 0.5, "epsilon": 0.1}))
    assert json.loads(yes)["decision"] == "yes" and json.loads(no)["decision"] == "no"


def test_stub_is_reentrant_and_logs_every_call():
    stub = StubBackend()
    p = prompt(payload={"self_mean": 0.0, "other_mean": 0.05, "epsilon": 0.1})
    out = stub.map(lambda _: complete(stub, p), list(range(20)))
    assert len(set(out)) == 1 and len(stub.calls) == 20


def test_numeric_backend_refuses_text():
    with pytest.raises(TypeError):
        NumericBackend().complete(prompt())


def test_prompt_record_requires_text():
    with pytest.raises(ValueError):
        PromptRecord(Purpose.TOPIC_RECO, "  ", 0, 0)


# -- HTTP client -------------------------------------------------------------

def test_chat_request_shape(mock_server):
    mock_server.default = {"content": '{"decision": "no", "reason": "x"}'}
    be = ChatBackend(mock_server.url, model_name="m", temperature=0.5, token="secret")
    assert ask(be, prompt(), "decision")["accept"] is False
    body = mock_server.requests[0]
    assert body["model"] == "m" and body["temperature"] == 0.5
    assert [m["role"] for m in body["messages"]] == ["system", "user"]
    be.close()


def test_retry_then_success(mock_server):
    mock_server.script = [{"status": 500}, {"status": 500}]
    mock_server.default = {"content": '{"decision": "yes"}'}
    be = ChatBackend(mock_server.url, max_retries=3, backoff_base=0.01)
    assert ask(be, prompt(), "decision")["accept"] is True
    assert len(mock_server.requests) == 3


def test_retries_exhausted(mock_server):
    mock_server.default = {"status": 503}
    be = ChatBackend(mock_server.url, max_retries=2, backoff_base=0.01)
    with pytest.raises(TransportError):
        complete(be, prompt())
    assert len(mock_server.requests) == 3
    assert be.calls[-1].error is not None and be.calls[-1].reply is None


def test_client_errors_are_not_retried(mock_server):
    mock_server.default = {"status": 401}
    be = ChatBackend(mock_server.url, max_retries=3, backoff_base=0.01)
    with pytest.raises(TransportError):
        complete(be, prompt())
    assert len(mock_server.requests) == 1


def test_timeout(mock_server):
    mock_server.default = {"delay": 0.5, "content": '{"decision": "yes"}'}
    be = ChatBackend(mock_server.url, max_retries=1, request_timeout=0.1, backoff_base=0.01)
    with pytest.raises(BackendTimeoutError):
        complete(be, prompt())


def test_malformed_reply_reasks_once_then_fails(mock_server):
    mock_server.default = {"content": '{"decision":"maybe"}'}
    be = ChatBackend(mock_server.url, backoff_base=0.01)
    with pytest.raises(MalformedReplyError):
        ask(be, prompt(), "decision")
    assert len(mock_server.requests) == 2
    assert "could not be used" in mock_server.requests[1]["messages"][-1]["content"]


def test_reask_can_recover(mock_server):
    mock_server.script = [{"content": "I think yes"}]
    mock_server.default = {"content": '{"decision": "yes", "reason": "ok"}'}
    be = ChatBackend(mock_server.url)
    assert ask(be, prompt(), "decision") == {"accept": True, "reason": "ok"}


def test_unexpected_body_is_transport_error(mock_server):
    mock_server.default = {"raw": "not json at all"}
    be = ChatBackend(mock_server.url)
    with pytest.raises(TransportError):
        complete(be, prompt())


def test_prompt_log_written_including_failures(mock_server, tmp_path):
    mock_server.script = [{"status": 400}]
    mock_server.default = {"content": '{"decision": "yes"}'}
    log = tmp_path / "prompts.jsonl"
    be = ChatBackend(mock_server.url, prompt_log=log)
    with pytest.raises(TransportError):
        complete(be, prompt())
    complete(be, prompt())
    lines = [json.loads(x) for x in log.read_text().splitlines()]
    assert [x["error"] is None for x in lines] == [False, True]
    assert lines[1]["purpose"] == "neighbor-match" and lines[1]["prompt"] == "hello"


def test_endpoint_from_environment(monkeypatch, mock_server):
    monkeypatch.setenv("TOPICSIM_ENDPOINT", mock_server.url)
    monkeypatch.setenv("TOPICSIM_MODEL", "env-model")
    mock_server.default = {"content": '{"summary": "s"}'}
    be = ChatBackend()
    assert ask(be, prompt(Purpose.MEMORY_CONSOLIDATE), "summary") == "s"
    assert mock_server.requests[0]["model"] == "env-model"


def test_missing_endpoint(monkeypatch):
    monkeypatch.delenv("TOPICSIM_ENDPOINT", raising=False)
    from topicsim.llm import BackendError
    with pytest.raises(BackendError):
        ChatBackend()


def test_concurrent_map_keeps_order(mock_server):
    mock_server.default = lambda body: {"delay": 0.01 * (hash(body["messages"][-1]["content"]) % 3),
                                        "content": json.dumps({"summary": body["messages"][-1]["content"]})}
    be = ChatBackend(mock_server.url, max_concurrency=4)
    items = [f"item {i}" for i in range(12)]
    out = be.map(lambda t: ask(be, PromptRecord(Purpose.MEMORY_CONSOLIDATE, t, 0, 0), "summary"), items)
    assert out == items
    assert np.all([c.reply is not None for c in be.calls])
