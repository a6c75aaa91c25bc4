"""Plan generation strategies over a chat-completion backend.

Six strategies turn a source file plus its analysis report into a
:class:`~ompar.planning.Plan`:

* ``zero_shot`` — one prompt, one answer.
* ``chain_of_thought`` — asks for explicit reasoning before the plan.
* ``step_by_step`` — a fixed numbered procedure the model must follow.
* ``few_shot`` — two worked examples precede the real task.
* ``tree_of_thoughts`` — several independent candidates, a self-scoring
  round, then the best-scoring candidate that passes validation.
* ``react`` — the model interleaves report queries (``Action: ...``) with
  harness observations before committing to a final plan.

Two backends implement the chat interface: :class:`HttpBackend` talks to
any chat-completions HTTP endpoint; :class:`MockBackend` is a deterministic
offline stand-in that answers every strategy's prompts from the analysis
report itself (via the built-in heuristic planner), so the whole pipeline
can run and be tested without network access.

Malformed model output is retried with the parse error quoted back
verbatim; :class:`~ompar.errors.ReasonerExhausted` is raised when retries
run out.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Protocol

import requests

from .analysis import AnalysisReport
from .cparse import emit
from .errors import EndpointError, MalformedPlan, ReasonerExhausted
from .ir import SourceUnit
from .planning import Plan, heuristic_plan, parse_plan, validate

STRATEGIES = (
    "zero_shot",
    "chain_of_thought",
    "tree_of_thoughts",
    "react",
    "step_by_step",
    "few_shot",
)

SYSTEM_PROMPT = (
    "You are an expert in OpenMP parallelization of C code. You answer "
    "precisely, never propose a transformation the dependence analysis "
    "marks unsafe, and always finish with the requested JSON."
)

_TEMPLATE_CACHE: dict[str, string.Template] = {}


def _template(name: str) -> string.Template:
    tpl = _TEMPLATE_CACHE.get(name)
    if tpl is None:
        text = resources.files("ompar.prompts").joinpath(f"{name}.txt").read_text(encoding="utf-8")
        tpl = string.Template(text)
        _TEMPLATE_CACHE[name] = tpl
    return tpl


def _schema_text() -> str:
    return _template("schema").template


# --------------------------------------------------------------------------
# backends
# --------------------------------------------------------------------------


class Backend(Protocol):
    name: str

    def bind(self, unit: SourceUnit, report: AnalysisReport, strategy: str) -> None:
        """Called once per plan() run before any completion."""

    def complete(self, messages: list[dict], *, temperature: float = 0.2) -> str:
        """Return the assistant message for a chat transcript."""


class HttpBackend:
    """Chat-completions client for an OpenAI-style HTTP endpoint."""

    name = "http"

    def __init__(self, endpoint: str, model: str, *, api_key: Optional[str] = None, timeout: float = 120.0):
        base = endpoint.rstrip("/")
        if base.endswith("/chat/completions"):
            self.url = base
        elif base.endswith("/v1"):
            self.url = base + "/chat/completions"
        else:
            self.url = base + "/v1/chat/completions"
        self.model = model
        self.api_key = api_key
        self.timeout = timeout

    def bind(self, unit: SourceUnit, report: AnalysisReport, strategy: str) -> None:
        pass

    def complete(self, messages: list[dict], *, temperature: float = 0.2) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {"model": self.model, "messages": messages, "temperature": temperature}
        try:
            resp = requests.post(self.url, json=body, headers=headers, timeout=self.timeout)
        except requests.RequestException as e:
            raise EndpointError(f"request to {self.url} failed: {e}") from e
        if resp.status_code != 200:
            raise EndpointError(
                f"endpoint returned HTTP {resp.status_code}: {resp.text[:500]}"
            )
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise EndpointError(f"endpoint response not in chat-completions shape: {e}") from e
        if not isinstance(content, str):
            raise EndpointError("endpoint returned a non-string message content")
        return content


class MockBackend:
    """Deterministic offline model.

    Plays along with every strategy's protocol: emits the built-in heuristic
    plan (plus strategy-appropriate surrounding text), generates distinct
    tree-of-thoughts candidates and scores them, and walks the ReAct
    query protocol. ``flaky_first`` makes the first reply malformed, to
    exercise the retry path.
    """

    name = "mock"

    def __init__(self, *, flaky_first: bool = False):
        self.flaky_first = flaky_first
        self._calls = 0
        self._unit: Optional[SourceUnit] = None
        self._report: Optional[AnalysisReport] = None
        self._strategy = ""

    def bind(self, unit: SourceUnit, report: AnalysisReport, strategy: str) -> None:
        self._unit = unit
        self._report = report
        self._strategy = strategy
        self._calls = 0

    # -- candidate variants for tree_of_thoughts ---------------------------

    def _candidate(self, k: int) -> Plan:
        assert self._report is not None
        base = heuristic_plan(self._report)
        if k <= 1 or not base.directives:
            return base
        if k == 2:
            from dataclasses import replace
            from .planning import ScheduleSpec
            ds = tuple(
                replace(d, collapse=1, schedule=ScheduleSpec(kind="static"))
                for d in base.directives
            )
            return Plan(
                directives=ds,
                rationale=base.rationale + " Variant: no collapse, static schedule.",
            )
        return Plan(directives=(), rationale="Conservative variant: change nothing.")

    def complete(self, messages: list[dict], *, temperature: float = 0.2) -> str:
        assert self._report is not None, "MockBackend.complete before bind()"
        self._calls += 1
        last = messages[-1]["content"]

        if self.flaky_first and self._calls == 1:
            return "I think the plan should be: parallelize everything!"

        if '{"scores"' in last:
            n = last.count("--- candidate ")
            scores = [9, 6, 3, 2, 1][:n] if n else []
            return json.dumps({"scores": scores})

        if self._strategy == "tree_of_thoughts":
            m = re.search(r"candidate #(\d+)", last)
            k = int(m.group(1)) if m else 1
            plan = self._candidate(k)
            return f"Candidate {k}:\n" + plan.to_json()

        if self._strategy == "react" and "could not be used" not in last:
            n_assistant = sum(1 for m_ in messages if m_["role"] == "assistant")
            if n_assistant == 0:
                return "Action: loops"
            if n_assistant == 1:
                ids = self._report.loop_ids()
                return f"Action: deps {ids[0]}" if ids else "Action: loops"
            return "Final:\n" + heuristic_plan(self._report).to_json()

        plan = heuristic_plan(self._report)
        if self._strategy == "chain_of_thought":
            lines = []
            for e in self._report.entries:
                lines.append(f"{e.loop_id}: verdict {e.verdict}.")
                for f in e.dependences:
                    if f.carried_loop == e.loop_id:
                        what = f.variable or f.array
                        fix = (
                            f"handled by {f.explained_by[0]} {f.explained_by[1]}"
                            if f.explained_by
                            else "no safe fix"
                        )
                        lines.append(f"  carried {f.kind} on {what}: {fix}.")
                for r in e.reductions:
                    lines.append(f"  reduction pattern {r.op} on {r.variable}.")
            return "\n".join(lines) + "\n\nFinal plan:\n" + plan.to_json()
        if self._strategy == "step_by_step":
            steps = [
                "1. Loops: " + ", ".join(f"{e.loop_id} ({e.verdict})" for e in self._report.entries),
                "2-6. Applying the procedure.",
                "7. Final plan:",
            ]
            return "\n".join(steps) + "\n" + plan.to_json()
        return plan.to_json()


# --------------------------------------------------------------------------
# trace
# --------------------------------------------------------------------------


@dataclass
class ReasonerTrace:
    """Full record of one plan() run: every exchange, every parse failure,
    candidates and scores (tree_of_thoughts), and the final outcome."""

    strategy: str
    backend: str
    model: str = ""
    exchanges: list[dict] = field(default_factory=list)
    parse_errors: list[str] = field(default_factory=list)
    candidates: list[dict] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    chosen_candidate: Optional[int] = None
    attempts: int = 0
    plan: Optional[dict] = None
    quality: Optional[float] = None

    def record(self, messages: list[dict], response: str) -> None:
        self.exchanges.append({"messages": list(messages), "response": response})
        self.attempts += 1

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "backend": self.backend,
            "model": self.model,
            "attempts": self.attempts,
            "parse_errors": list(self.parse_errors),
            "candidates": list(self.candidates),
            "scores": list(self.scores),
            "chosen_candidate": self.chosen_candidate,
            "plan": self.plan,
            "quality": self.quality,
            "exchanges": list(self.exchanges),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


# --------------------------------------------------------------------------
# quality metric
# --------------------------------------------------------------------------


def plan_quality(plan: Plan, report: AnalysisReport) -> float:
    """Fraction of the analysis facts relevant to the plan's loops that the
    plan references (in clauses or rationale). 1.0 when there is nothing
    to reference."""
    names: set[str] = set()
    for d in plan.directives:
        if not d.parallelize:
            continue
        try:
            entry = report.loop(d.loop_id)
        except Exception:
            continue
        for f in entry.dependences:
            if f.carried_loop == d.loop_id:
                names.add(f.variable or f.array or "")
        for r in entry.reductions:
            names.add(r.variable)
        for p in entry.privatizable:
            if p.synthetic or not p.body_local:
                names.add(p.variable)
    names.discard("")
    if not names:
        return 1.0
    text = plan.rationale + " " + json.dumps(plan.to_dict())
    hit = sum(1 for n in names if re.search(rf"\b{re.escape(n)}\b", text))
    return hit / len(names)


# --------------------------------------------------------------------------
# the reasoner
# --------------------------------------------------------------------------

_RETRY_MSG = (
    "Your response could not be used: {error}. "
    "Reply again with a single JSON object that follows the plan schema exactly."
)


class Reasoner:
    def __init__(
        self,
        strategy: str,
        backend: Backend,
        *,
        model: str = "",
        temperature: float = 0.2,
        max_retries: int = 2,
        tot_branches: int = 3,
        react_max_turns: int = 6,
    ):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
        self.strategy = strategy
        self.backend = backend
        self.model = model
        self.temperature = temperature
        self.max_retries = max_retries
        self.tot_branches = tot_branches
        self.react_max_turns = react_max_turns

    # -- prompt assembly ----------------------------------------------------

    def _fill(self, name: str, unit: SourceUnit, report: AnalysisReport, **extra: object) -> str:
        return _template(name).substitute(
            source=emit(unit).rstrip("\n"),
            report=report.to_json(),
            schema=_schema_text(),
            **extra,
        )

    # -- completion with parse-retry -----------------------------------------

    def _complete_plan(
        self,
        messages: list[dict],
        trace: ReasonerTrace,
    ) -> Plan:
        """One prompt that must yield a plan; retries quote the parse error."""
        msgs = list(messages)
        for attempt in range(self.max_retries + 1):
            resp = self.backend.complete(msgs, temperature=self.temperature)
            trace.record(msgs, resp)
            try:
                return parse_plan(resp)
            except MalformedPlan as e:
                trace.parse_errors.append(str(e))
                if attempt == self.max_retries:
                    raise ReasonerExhausted(
                        f"no usable plan after {attempt + 1} attempts; last error: {e}"
                    ) from e
                msgs = msgs + [
                    {"role": "assistant", "content": resp},
                    {"role": "user", "content": _RETRY_MSG.format(error=e)},
                ]
        raise AssertionError("unreachable")

    # -- strategies ----------------------------------------------------------

    def plan(self, unit: SourceUnit, report: AnalysisReport) -> tuple[Plan, ReasonerTrace]:
        self.backend.bind(unit, report, self.strategy)
        trace = ReasonerTrace(strategy=self.strategy, backend=self.backend.name, model=self.model)
        if self.strategy == "tree_of_thoughts":
            plan = self._plan_tot(unit, report, trace)
        elif self.strategy == "react":
            plan = self._plan_react(unit, report, trace)
        else:
            prompt = self._fill(self.strategy, unit, report)
            messages = [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": prompt},
            ]
            plan = self._complete_plan(messages, trace)
        trace.plan = plan.to_dict()
        trace.quality = plan_quality(plan, report)
        return plan, trace

    def _plan_tot(self, unit: SourceUnit, report: AnalysisReport, trace: ReasonerTrace) -> Plan:
        candidates: list[Plan] = []
        for k in range(1, self.tot_branches + 1):
            prompt = self._fill(
                "tree_of_thoughts", unit, report, branch=k, branches=self.tot_branches
            )
            messages = [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": prompt},
            ]
            try:
                candidates.append(self._complete_plan(messages, trace))
            except ReasonerExhausted as e:
                trace.parse_errors.append(f"candidate {k} dropped: {e}")
        if not candidates:
            raise ReasonerExhausted("tree_of_thoughts produced no parseable candidate")
        trace.candidates = [c.to_dict() for c in candidates]

        blob = "\n".join(
            f"--- candidate {i + 1} ---\n{c.to_json()}" for i, c in enumerate(candidates)
        )
        score_prompt = _template("tree_of_thoughts_score").substitute(candidates=blob)
        messages = [
            {"role": "system", "content": SYSTEM_PROMPT},
            {"role": "user", "content": score_prompt},
        ]
        scores = [0.0] * len(candidates)
        resp = self.backend.complete(messages, temperature=self.temperature)
        trace.record(messages, resp)
        try:
            objs = [o for o in _extract_objects(resp) if "scores" in o]
            raw = objs[-1]["scores"]
            for i in range(min(len(raw), len(scores))):
                scores[i] = float(raw[i])
        except (IndexError, TypeError, ValueError) as e:
            trace.parse_errors.append(f"score round unusable ({e}); defaulting to zeros")
        trace.scores = scores

        order = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))
        chosen = None
        for i in order:
            if not validate(candidates[i], report):
                chosen = i
                break
        if chosen is None:
            chosen = order[0]
        trace.chosen_candidate = chosen
        return candidates[chosen]

    def _plan_react(self, unit: SourceUnit, report: AnalysisReport, trace: ReasonerTrace) -> Plan:
        prompt = self._fill("react", unit, report, max_turns=self.react_max_turns)
        messages = [
            {"role": "system", "content": SYSTEM_PROMPT},
            {"role": "user", "content": prompt},
        ]
        retries_left = self.max_retries
        for _turn in range(self.react_max_turns):
            resp = self.backend.complete(messages, temperature=self.temperature)
            trace.record(messages, resp)
            action = _action_of(resp)
            if action is not None:
                obs = answer_query(report, action)
                messages = messages + [
                    {"role": "assistant", "content": resp},
                    {"role": "user", "content": f"Observation: {obs}"},
                ]
                continue
            try:
                return parse_plan(resp)
            except MalformedPlan as e:
                trace.parse_errors.append(str(e))
                if retries_left == 0:
                    raise ReasonerExhausted(
                        f"react run ended with unusable output: {e}"
                    ) from e
                retries_left -= 1
                messages = messages + [
                    {"role": "assistant", "content": resp},
                    {"role": "user", "content": _RETRY_MSG.format(error=e)},
                ]
        raise ReasonerExhausted(
            f"react run used all {self.react_max_turns} turns without a final plan"
        )


def _extract_objects(text: str) -> list[dict]:
    dec = json.JSONDecoder()
    out: list[dict] = []
    i = text.find("{")
    while i != -1:
        try:
            obj, end = dec.raw_decode(text, i)
        except ValueError:
            i = text.find("{", i + 1)
            continue
        if isinstance(obj, dict):
            out.append(obj)
        i = text.find("{", end)
    return out


def _action_of(resp: str) -> Optional[str]:
    """The query of the first 'Action:' line, unless a 'Final:' marker
    appears first."""
    for line in resp.splitlines():
        s = line.strip()
        if s.startswith("Final:") or s == "Final":
            return None
        if s.startswith("Action:"):
            return s[len("Action:"):].strip()
    return None


# --------------------------------------------------------------------------
# ReAct read-only report queries
# --------------------------------------------------------------------------


def answer_query(report: AnalysisReport, query: str) -> str:
    parts = query.split()
    if not parts:
        return _query_help()
    cmd, args = parts[0], parts[1:]
    if cmd == "loops":
        return "; ".join(f"{e.loop_id}: {e.verdict}" for e in report.entries) or "no loops"
    if cmd in ("verdict", "deps", "facts", "reductions", "privatizable", "bounds"):
        if not args:
            return f"query '{cmd}' needs a loop id. " + _query_help()
        lid = args[0]
        entry = next((e for e in report.entries if e.loop_id == lid), None)
        if entry is None:
            return f"no loop named {lid}. Known: " + ", ".join(report.loop_ids())
        if cmd == "verdict":
            causes = f" (causes: {'; '.join(entry.unknown_causes)})" if entry.unknown_causes else ""
            return f"{lid}: {entry.verdict}{causes}"
        if cmd in ("deps", "facts"):
            if not entry.dependences:
                return f"{lid}: no dependence facts"
            return "; ".join(_fact_line(f) for f in entry.dependences)
        if cmd == "reductions":
            if not entry.reductions:
                return f"{lid}: no reduction patterns"
            return "; ".join(
                f"{r.op} on {r.variable}" + (" (synthetic accumulator)" if r.synthetic else "")
                for r in entry.reductions
            )
        if cmd == "privatizable":
            if not entry.privatizable:
                return f"{lid}: no privatizable variables"
            return "; ".join(
                p.variable
                + (" (body-local)" if p.body_local else "")
                + (" (synthetic)" if p.synthetic else "")
                for p in entry.privatizable
            )
        if cmd == "bounds":
            return (
                f"{lid}: {entry.bounds}, level {entry.level}, "
                f"perfect nest prefix {entry.perfect_nest_prefix}"
            )
    return f"unknown query {cmd!r}. " + _query_help()


def _fact_line(f) -> str:
    what = f.variable or f.array
    carried = f"carried at {f.carried_loop}" if f.carried_loop else "loop-independent"
    dist = f"distance {f.distance}" if f.distance is not None else "unknown distance"
    fix = f", fixable via {f.explained_by[0]} {f.explained_by[1]}" if f.explained_by else ""
    return f"{f.kind} on {what}, {carried}, {dist}{fix}"


def _query_help() -> str:
    return "Available: loops | verdict <id> | deps <id> | reductions <id> | privatizable <id> | bounds <id>"


def make_backend(
    kind: str,
    *,
    endpoint: str = "",
    model: str = "",
    api_key: Optional[str] = None,
    timeout: float = 120.0,
) -> Backend:
    if kind == "mock":
        return MockBackend()
    if kind == "http":
        if not endpoint:
            raise EndpointError("http backend needs an endpoint URL")
        return HttpBackend(endpoint, model or "default", api_key=api_key, timeout=timeout)
    raise ValueError(f"unknown backend {kind!r}; choose 'mock' or 'http'")
