from __future__ import annotations

import json
import threading
import time
from collections import defaultdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

# ---------------------------------------------------------------------------
# per-criterion pass/fail summary

_CRITERIA: dict[int, str] = {}
_OUTCOMES: dict[int, list[str]] = defaultdict(list)


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    n, title = marker
    _CRITERIA[n] = title
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES[n].append("SKIP" if report.skipped else ("PASS" if report.passed else "FAIL"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        results = _OUTCOMES[n]
        if "FAIL" in results:
            verdict = "FAIL"
        elif all(r == "SKIP" for r in results):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {n}: {verdict} - {_CRITERIA[n]} ({len(results)} checks)")


# ---------------------------------------------------------------------------
# scriptable chat-completions server


class MockChatServer:
    """Serves /v1/chat/completions from a script of actions, then from `default`.

    An action is a dict with optional keys: status (int), content (str),
    delay (seconds), raw (str body). `default` may also be a callable taking
    the request body and returning an action.
    """

    def __init__(self) -> None:
        self.script: list[dict] = []
        self.default = None
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with server._lock:
                    server.requests.append(body)
                    action = server.script.pop(0) if server.script else server.default
                if callable(action):
                    action = action(body)
                action = action or {"status": 500}
                if action.get("delay"):
                    time.sleep(action["delay"])
                status = action.get("status", 200)
                if "raw" in action:
                    payload = action["raw"].encode()
                elif status == 200:
                    payload = json.dumps({"choices": [{"message": {"role": "assistant",
                                                                   "content": action.get("content", "")}}]}).encode()
                else:
                    payload = b'{"error": "scripted failure"}'
                try:
                    self.send_response(status)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(payload)))
                    self.end_headers()
                    self.wfile.write(payload)
                except (BrokenPipeError, ConnectionResetError):
                    pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.url = f"http://127.0.0.1:{self.httpd.server_address[1]}/v1/chat/completions"
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def close(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def mock_server():
    srv = MockChatServer()
    yield srv
    srv.close()


def rule_reply(body: dict) -> dict:
    """A well-behaved fake model: valid JSON for whichever task the system message names."""
    system = next((m["content"] for m in body["messages"] if m["role"] == "system"), "")
    task = system.splitlines()[0].removeprefix("Task: ").strip() if system else ""
    if task == "neighbor-match":
        out = {"decision": "yes", "reason": "similar enough views"}
    elif task == "topic-reco":
        user = body["messages"][-1]["content"]
        first = next(line for line in user.splitlines() if line.startswith("- ") and "group heat" in line)
        out = {"topic": first[2:].split(":")[0], "reason": "it is what people talk about"}
    elif task == "belief-update":
        out = {"new_belief": 1, "reason": "the partner made a fair point"}
    elif task == "memory-consolidate":
        out = {"summary": "I talked with neighbours and heard several views."}
    else:
        return {"status": 400}
    return {"content": "Here you go: " + json.dumps(out)}
