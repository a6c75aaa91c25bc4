"""Planning strategies over chat backends, offline and HTTP."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from ompar.analysis import analyze
from ompar.errors import EndpointError, ReasonerExhausted
from ompar.reasoner import (
    STRATEGIES,
    HttpBackend,
    MockBackend,
    Reasoner,
    answer_query,
    make_backend,
    plan_quality,
)
from ompar.planning import LoopDirective, Plan


@pytest.fixture(scope="module")
def matmul(corpus_dir_module):
    import os

    from ompar.cparse import parse

    path = os.path.join(corpus_dir_module, "matmul", "matmul.c")
    unit = parse(open(path).read(), "matmul.c")
    return unit, analyze(unit)


@pytest.fixture(scope="module")
def corpus_dir_module():
    import os

    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    d = os.path.join(root, "kernels")
    if not os.path.isdir(d):
        pytest.skip("kernel corpus directory not present")
    return d


def test_strategy_catalogue():
    assert STRATEGIES == (
        "zero_shot",
        "chain_of_thought",
        "tree_of_thoughts",
        "react",
        "step_by_step",
        "few_shot",
    )


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_every_strategy_produces_the_same_accepted_plan(matmul, strategy):
    unit, report = matmul
    plan, trace = Reasoner(strategy, MockBackend()).plan(unit, report)
    assert [(x.loop_id, x.collapse, x.schedule.kind) for x in plan.directives] == [
        ("matmul.L1", 2, "dynamic")
    ]
    assert trace.strategy == strategy
    assert trace.backend == "mock"
    assert trace.quality == 1.0
    assert trace.plan is not None


def test_single_shot_strategies_use_one_exchange(matmul):
    unit, report = matmul
    for strategy in ("zero_shot", "chain_of_thought", "step_by_step", "few_shot"):
        _, trace = Reasoner(strategy, MockBackend()).plan(unit, report)
        assert trace.attempts == 1
        assert len(trace.exchanges) == 1


def test_tree_of_thoughts_scores_candidates_and_takes_the_best(matmul):
    unit, report = matmul
    _, trace = Reasoner("tree_of_thoughts", MockBackend()).plan(unit, report)
    assert trace.scores == [9.0, 6.0, 3.0]
    assert trace.chosen_candidate == 0
    assert len(trace.candidates) == 3
    # three candidate exchanges plus one scoring exchange
    assert trace.attempts == 4


def test_react_walks_the_query_protocol(matmul):
    unit, report = matmul
    _, trace = Reasoner("react", MockBackend()).plan(unit, report)
    responses = [ex["response"] for ex in trace.exchanges]
    assert responses[0].startswith("Action: loops")
    assert responses[1].startswith("Action: deps matmul.L1")
    assert responses[-1].startswith("Final:")
    # each action gets an observation computed from the analysis report
    observation = trace.exchanges[1]["messages"][-1]["content"]
    assert observation.startswith("Observation:")
    assert "matmul.L1: parallelizable" in observation


def test_flaky_first_reply_is_retried_with_the_parse_error_quoted(matmul):
    unit, report = matmul
    plan, trace = Reasoner("zero_shot", MockBackend(flaky_first=True)).plan(unit, report)
    assert trace.attempts == 2
    assert trace.parse_errors == ["no JSON object found in the response"]
    # the retry prompt carries the exact parse error back to the model
    retry_messages = trace.exchanges[1]["messages"]
    assert any("no JSON object found in the response" in m["content"] for m in retry_messages)
    assert plan.directives  # still lands the good plan


def test_retries_exhaust_into_reasoner_exhausted(matmul):
    unit, report = matmul

    class AlwaysGarbage:
        name = "garbage"

        def bind(self, unit, report, strategy):
            pass

        def complete(self, messages, *, temperature=0.2):
            return "no structured answer here"

    with pytest.raises(ReasonerExhausted):
        Reasoner("zero_shot", AlwaysGarbage(), max_retries=2).plan(unit, report)


def test_mock_runs_are_deterministic(matmul):
    unit, report = matmul
    views = []
    for _ in range(2):
        _, trace = Reasoner("tree_of_thoughts", MockBackend()).plan(unit, report)
        views.append(json.dumps(trace.to_dict(), sort_keys=True))
    assert views[0] == views[1]


def test_answer_query_views(matmul):
    _, report = matmul
    assert answer_query(report, "loops").startswith("matmul.L1: parallelizable")
    deps = answer_query(report, "deps matmul.L3")
    assert "reduction C_priv" in deps


def test_plan_quality_scores(matmul):
    _, report = matmul
    from ompar.planning import heuristic_plan

    assert plan_quality(heuristic_plan(report), report) == 1.0
    # a directive ignoring the required clauses earns nothing
    assert plan_quality(Plan(directives=(LoopDirective("matmul.L3"),)), report) == 0.0


def test_make_backend_dispatch():
    assert isinstance(make_backend("mock"), MockBackend)
    assert isinstance(make_backend("http", endpoint="http://h", model="m"), HttpBackend)
    with pytest.raises(Exception):
        make_backend("quantum")


# ------------------------------------------------------------- HTTP stub


class _Script(BaseHTTPRequestHandler):
    responses: list = []
    requests: list = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        type(self).requests.append((self.path, body))
        status, payload = type(self).responses.pop(0)
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    _Script.responses = []
    _Script.requests = []
    server = HTTPServer(("127.0.0.1", 0), _Script)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", _Script
    server.shutdown()
    thread.join(timeout=5)


def chat(content: str) -> dict:
    return {"choices": [{"message": {"content": content}}]}


def test_http_backend_round_trip(matmul, stub_server):
    unit, report = matmul
    url, script = stub_server
    plan_json = json.dumps(
        {"plan_version": 1, "loops": [{"loop": "matmul.L1", "collapse": 2,
                                       "schedule": {"kind": "dynamic"}, "privates": ["C_priv"]}]}
    )
    script.responses.append((200, chat(plan_json)))
    backend = HttpBackend(url, "test-model")
    plan, trace = Reasoner("zero_shot", backend).plan(unit, report)
    assert [x.loop_id for x in plan.directives] == ["matmul.L1"]
    path, body = script.requests[0]
    assert path == "/v1/chat/completions"
    assert body["model"] == "test-model"
    assert body["messages"][0]["role"] == "system"


def test_http_backend_maps_http_errors(stub_server):
    url, script = stub_server
    script.responses.append((500, {"error": "boom"}))
    with pytest.raises(EndpointError, match="HTTP 500"):
        HttpBackend(url, "m").complete([{"role": "user", "content": "x"}])


def test_http_backend_rejects_non_chat_shapes(stub_server):
    url, script = stub_server
    script.responses.append((200, {"unexpected": True}))
    with pytest.raises(EndpointError, match="chat-completions shape"):
        HttpBackend(url, "m").complete([{"role": "user", "content": "x"}])


def test_http_backend_url_normalization():
    assert HttpBackend("http://h", "m").url == "http://h/v1/chat/completions"
    assert HttpBackend("http://h/v1", "m").url == "http://h/v1/chat/completions"
    assert (
        HttpBackend("http://h/v1/chat/completions", "m").url
        == "http://h/v1/chat/completions"
    )
