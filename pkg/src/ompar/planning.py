"""Parallelization plans: schema, parsing, validation, and the built-in
deterministic heuristic planner.

A plan is a JSON document (``plan_version: 1``) listing directives, one per
loop to transform::

    {
      "plan_version": 1,
      "loops": [
        {
          "loop": "matmul.L1",
          "parallelize": true,
          "collapse": 2,
          "schedule": {"kind": "dynamic", "chunk": null},
          "reductions": [{"var": "sum", "op": "+"}],
          "privates": ["C_priv"],
          "num_threads": null,
          "target": "cpu"
        }
      ],
      "rationale": "free text"
    }

Validation rules (each violation carries its rule id):

* **R1** — the parallelized loop (or a collapsed inner level) carries a
  dependence that no declared clause addresses.
* **R2** — a declared reduction does not match a detected reduction pattern
  (variable and operator) at that loop.
* **R3** — a declared private is not a detected privatizable variable at
  that loop.
* **R4** — ``collapse(k)`` names more levels than the perfectly nested
  prefix at that loop.
* **R5** — malformed or contradictory directive fields (bad schedule kind,
  non-positive chunk/collapse/num_threads, duplicate or nested directives,
  a variable both private and reduction, unsupported target — ``gpu`` is
  recognized but reserved).
* **R6** — the targeted loop's analysis verdict is ``unknown``.

A plan with no violations is *accepted*; an empty plan is trivially
accepted.  Accepted plans are still verified behaviorally downstream —
acceptance is necessary, never sufficient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .analysis import AnalysisReport, LoopAnalysis, REDUCTION_OPS
from .errors import MalformedPlan, UnknownLoopId

SCHEDULE_KINDS = ("static", "dynamic", "guided", "auto")

PLAN_VERSION = 1


# --------------------------------------------------------------------------
# schema
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str
    chunk: Optional[int] = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "chunk": self.chunk}


@dataclass(frozen=True)
class ReductionClause:
    var: str
    op: str

    def to_dict(self) -> dict:
        return {"var": self.var, "op": self.op}


@dataclass(frozen=True)
class LoopDirective:
    loop_id: str
    parallelize: bool = True
    collapse: int = 1
    schedule: Optional[ScheduleSpec] = None
    reductions: tuple[ReductionClause, ...] = ()
    privates: tuple[str, ...] = ()
    num_threads: Optional[int] = None
    target: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "loop": self.loop_id,
            "parallelize": self.parallelize,
            "collapse": self.collapse,
            "schedule": self.schedule.to_dict() if self.schedule else None,
            "reductions": [r.to_dict() for r in self.reductions],
            "privates": list(self.privates),
            "num_threads": self.num_threads,
            "target": self.target,
        }


@dataclass(frozen=True)
class Plan:
    directives: tuple[LoopDirective, ...] = ()
    rationale: str = ""
    plan_version: int = PLAN_VERSION

    def to_dict(self) -> dict:
        return {
            "plan_version": self.plan_version,
            "loops": [d.to_dict() for d in self.directives],
            "rationale": self.rationale,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def directive_for(self, loop_id: str) -> Optional[LoopDirective]:
        for d in self.directives:
            if d.loop_id == loop_id:
                return d
        return None

    @property
    def empty(self) -> bool:
        return not any(d.parallelize for d in self.directives)


@dataclass(frozen=True)
class RuleViolation:
    rule: str  # "R1".."R6"
    loop_id: Optional[str]
    message: str

    def to_dict(self) -> dict:
        return {"rule": self.rule, "loop": self.loop_id, "message": self.message}

    def __str__(self) -> str:
        where = f" [{self.loop_id}]" if self.loop_id else ""
        return f"{self.rule}{where}: {self.message}"


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise MalformedPlan(msg)


def plan_from_dict(data: object) -> Plan:
    """Build a :class:`Plan` from decoded JSON; :class:`MalformedPlan` on any
    shape error, with a message precise enough to drive a retry prompt."""
    _require(isinstance(data, dict), "plan must be a JSON object")
    assert isinstance(data, dict)
    version = data.get("plan_version")
    _require(
        version == PLAN_VERSION,
        f"plan_version must be {PLAN_VERSION}, got {version!r}",
    )
    raw_loops = data.get("loops", [])
    _require(isinstance(raw_loops, list), "'loops' must be a list")
    directives: list[LoopDirective] = []
    for i, entry in enumerate(raw_loops):
        _require(isinstance(entry, dict), f"loops[{i}] must be an object")
        loop_id = entry.get("loop")
        _require(
            isinstance(loop_id, str) and bool(loop_id),
            f"loops[{i}].loop must be a non-empty string",
        )
        parallelize = entry.get("parallelize", True)
        _require(isinstance(parallelize, bool), f"loops[{i}].parallelize must be a boolean")
        collapse = entry.get("collapse", 1)
        if collapse is None:
            collapse = 1
        _require(
            isinstance(collapse, int) and not isinstance(collapse, bool),
            f"loops[{i}].collapse must be an integer",
        )
        schedule = None
        raw_sched = entry.get("schedule")
        if raw_sched is not None:
            _require(isinstance(raw_sched, dict), f"loops[{i}].schedule must be an object")
            kind = raw_sched.get("kind")
            _require(isinstance(kind, str), f"loops[{i}].schedule.kind must be a string")
            chunk = raw_sched.get("chunk")
            _require(
                chunk is None or (isinstance(chunk, int) and not isinstance(chunk, bool)),
                f"loops[{i}].schedule.chunk must be an integer or null",
            )
            schedule = ScheduleSpec(kind=kind, chunk=chunk)
        reductions: list[ReductionClause] = []
        for j, r in enumerate(entry.get("reductions", []) or []):
            _require(isinstance(r, dict), f"loops[{i}].reductions[{j}] must be an object")
            var = r.get("var")
            op = r.get("op")
            _require(isinstance(var, str) and bool(var), f"loops[{i}].reductions[{j}].var must be a string")
            _require(isinstance(op, str) and bool(op), f"loops[{i}].reductions[{j}].op must be a string")
            reductions.append(ReductionClause(var=var, op=op))
        privates_raw = entry.get("privates", []) or []
        _require(isinstance(privates_raw, list), f"loops[{i}].privates must be a list")
        privates: list[str] = []
        for j, p in enumerate(privates_raw):
            _require(isinstance(p, str) and bool(p), f"loops[{i}].privates[{j}] must be a string")
            privates.append(p)
        num_threads = entry.get("num_threads")
        _require(
            num_threads is None or (isinstance(num_threads, int) and not isinstance(num_threads, bool)),
            f"loops[{i}].num_threads must be an integer or null",
        )
        target = entry.get("target")
        _require(
            target is None or isinstance(target, str),
            f"loops[{i}].target must be a string or null",
        )
        directives.append(
            LoopDirective(
                loop_id=loop_id,
                parallelize=parallelize,
                collapse=collapse,
                schedule=schedule,
                reductions=tuple(reductions),
                privates=tuple(privates),
                num_threads=num_threads,
                target=target,
            )
        )
    rationale = data.get("rationale", "")
    _require(isinstance(rationale, str), "'rationale' must be a string")
    return Plan(directives=tuple(directives), rationale=rationale)


def _json_objects(text: str) -> list[dict]:
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


def parse_plan(text: str) -> Plan:
    """Extract the *last* well-formed JSON object from free-form text and
    interpret it as a plan.  Raises :class:`MalformedPlan` when no JSON
    object is present or the last one fails schema checks."""
    objs = _json_objects(text)
    if not objs:
        raise MalformedPlan("no JSON object found in the response")
    return plan_from_dict(objs[-1])


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def _collapse_chain(report: AnalysisReport, lid: str, k: int) -> Optional[list[str]]:
    """Loop ids of the k perfectly nested levels starting at ``lid``, or
    None when the nest isn't that deep."""
    entry = report.loop(lid)
    if entry.perfect_nest_prefix < k:
        return None
    chain = [lid]
    cur = entry
    for _ in range(k - 1):
        children = [
            e
            for e in report.entries
            if e.ancestors == cur.ancestors + (cur.loop_id,)
        ]
        if len(children) != 1:
            return None
        cur = children[0]
        chain.append(cur.loop_id)
    return chain


def validate(plan: Plan, report: AnalysisReport) -> list[RuleViolation]:
    """All rule violations for ``plan`` against ``report``.

    Raises :class:`UnknownLoopId` when a directive references a loop id the
    report has never heard of (a harness error, not a plan-quality issue).
    """
    violations: list[RuleViolation] = []
    known = set(report.loop_ids())
    for d in plan.directives:
        if d.loop_id not in known:
            raise UnknownLoopId(
                f"plan references loop id {d.loop_id!r}, which is not in the analysis report"
            )

    # R5: duplicate directives
    seen: set[str] = set()
    for d in plan.directives:
        if d.loop_id in seen:
            violations.append(
                RuleViolation("R5", d.loop_id, "duplicate directive for this loop")
            )
        seen.add(d.loop_id)

    # R5: nested parallel directives
    active = [d for d in plan.directives if d.parallelize]
    for d in active:
        ancestors = set(report.loop(d.loop_id).ancestors)
        for other in active:
            if other.loop_id != d.loop_id and other.loop_id in ancestors:
                violations.append(
                    RuleViolation(
                        "R5",
                        d.loop_id,
                        f"nested inside {other.loop_id}, which is also parallelized",
                    )
                )

    for d in plan.directives:
        violations.extend(_validate_directive(d, report))

    violations.sort(key=lambda v: (v.loop_id or "", v.rule, v.message))
    return violations


def _validate_directive(d: LoopDirective, report: AnalysisReport) -> list[RuleViolation]:
    out: list[RuleViolation] = []
    lid = d.loop_id

    # R5: field well-formedness (checked even for parallelize=false)
    if d.collapse < 1:
        out.append(RuleViolation("R5", lid, f"collapse must be >= 1, got {d.collapse}"))
    if d.schedule is not None:
        if d.schedule.kind not in SCHEDULE_KINDS:
            out.append(
                RuleViolation(
                    "R5", lid,
                    f"schedule kind {d.schedule.kind!r} not one of {', '.join(SCHEDULE_KINDS)}",
                )
            )
        if d.schedule.chunk is not None and d.schedule.chunk < 1:
            out.append(
                RuleViolation("R5", lid, f"schedule chunk must be >= 1, got {d.schedule.chunk}")
            )
        if d.schedule.kind == "auto" and d.schedule.chunk is not None:
            out.append(RuleViolation("R5", lid, "schedule(auto) does not take a chunk size"))
    if d.num_threads is not None and d.num_threads < 1:
        out.append(RuleViolation("R5", lid, f"num_threads must be >= 1, got {d.num_threads}"))
    if d.target is not None and d.target != "cpu":
        if d.target == "gpu":
            out.append(
                RuleViolation("R5", lid, "target 'gpu' is recognized but reserved; only 'cpu' is supported")
            )
        else:
            out.append(RuleViolation("R5", lid, f"unknown target {d.target!r}"))
    red_vars = [r.var for r in d.reductions]
    dup_red = {v for v in red_vars if red_vars.count(v) > 1}
    for v in sorted(dup_red):
        out.append(RuleViolation("R5", lid, f"variable {v!r} declared in multiple reductions"))
    for v in sorted(set(red_vars) & set(d.privates)):
        out.append(RuleViolation("R5", lid, f"variable {v!r} declared both reduction and private"))
    for r in d.reductions:
        if r.op not in REDUCTION_OPS:
            out.append(
                RuleViolation(
                    "R5", lid,
                    f"reduction operator {r.op!r} not one of {', '.join(REDUCTION_OPS)}",
                )
            )

    if not d.parallelize:
        return out

    entry = report.loop(lid)

    # R4: collapse shape
    chain = _collapse_chain(report, lid, d.collapse) if d.collapse >= 1 else None
    if d.collapse > 1 and chain is None:
        out.append(
            RuleViolation(
                "R4", lid,
                f"collapse({d.collapse}) exceeds the perfectly nested depth "
                f"{entry.perfect_nest_prefix} at this loop",
            )
        )
        chain = [lid]
    elif chain is None:
        chain = [lid]

    declared_red = {r.var for r in d.reductions}
    declared_priv = set(d.privates)

    # R2: declared reductions must match detected patterns at this loop
    detected_red = {(r.variable, r.op) for r in entry.reductions}
    detected_red_vars = {r.variable for r in entry.reductions}
    for r in d.reductions:
        if r.op not in REDUCTION_OPS:
            continue  # already an R5
        if (r.var, r.op) not in detected_red:
            if r.var in detected_red_vars:
                ops = sorted(op for v, op in detected_red if v == r.var)
                out.append(
                    RuleViolation(
                        "R2", lid,
                        f"reduction({r.op}:{r.var}) does not match the detected "
                        f"operator {', '.join(ops)} for {r.var!r}",
                    )
                )
            else:
                out.append(
                    RuleViolation(
                        "R2", lid,
                        f"reduction({r.op}:{r.var}) declared, but {r.var!r} is not a "
                        "detected reduction at this loop",
                    )
                )

    # R3: declared privates must be detected privatizable at this loop
    priv_ok = {p.variable for p in entry.privatizable}
    for v in d.privates:
        if v not in priv_ok:
            out.append(
                RuleViolation(
                    "R3", lid,
                    f"private({v}) declared, but {v!r} is not privatizable at this loop",
                )
            )

    # R1/R6 over every collapsed level
    for level_lid in chain:
        e = report.loop(level_lid)
        if e.verdict == "unknown":
            out.append(
                RuleViolation(
                    "R6", level_lid,
                    "analysis verdict is 'unknown' ("
                    + ("; ".join(e.unknown_causes) or "no recorded cause")
                    + "); refusing to parallelize",
                )
            )
            continue
        for fact in e.dependences:
            if fact.carried_loop != level_lid:
                continue
            if fact.explained_by is None:
                what = fact.variable or fact.array or "memory"
                out.append(
                    RuleViolation(
                        "R1", level_lid,
                        f"loop-carried {fact.kind} dependence on {what} "
                        f"({fact.source} -> {fact.sink}) has no safe transformation",
                    )
                )
                continue
            mechanism, name = fact.explained_by
            if mechanism == "reduction" and name not in declared_red:
                out.append(
                    RuleViolation(
                        "R1", level_lid,
                        f"carried dependence on {fact.variable or fact.array} requires "
                        f"reduction clause for {name!r}, which the plan does not declare",
                    )
                )
            elif mechanism == "private" and name not in declared_priv:
                out.append(
                    RuleViolation(
                        "R1", level_lid,
                        f"carried dependence on {fact.variable or fact.array} requires "
                        f"private clause for {name!r}, which the plan does not declare",
                    )
                )
    return out


def accepted(plan: Plan, report: AnalysisReport) -> bool:
    return not validate(plan, report)


def has_fp_reduction(plan: Plan, report: AnalysisReport) -> bool:
    """True when the plan declares a reduction whose detected pattern is
    floating-point: parallel combination reorders those, so result checks
    need the looser tolerance."""
    for d in plan.directives:
        if not d.parallelize:
            continue
        try:
            entry = report.loop(d.loop_id)
        except UnknownLoopId:
            continue
        fp_vars = {r.variable for r in entry.reductions if r.fp}
        if any(r.var in fp_vars for r in d.reductions):
            return True
    return False


# --------------------------------------------------------------------------
# deterministic heuristic planner
# --------------------------------------------------------------------------

_OK_VERDICTS = ("parallelizable", "parallelizable-with-clauses")


def _plan_loop_choice(report: AnalysisReport) -> list[LoopAnalysis]:
    """Outermost loop with a workable verdict per nest."""
    chosen: list[LoopAnalysis] = []
    taken: set[str] = set()
    for e in report.entries:  # preorder per function
        if e.verdict not in _OK_VERDICTS:
            continue
        if any(anc in taken for anc in e.ancestors):
            continue
        chosen.append(e)
        taken.add(e.loop_id)
    return chosen


def heuristic_plan(report: AnalysisReport) -> Plan:
    """The built-in planner: deterministic, analysis-driven.

    Per nest: parallelize the outermost workable loop; collapse across the
    perfectly nested prefix of purely parallelizable levels; dynamic schedule
    when iteration cost can vary (a conditional in the body, or a deeper
    sequential loop left inside), else static; declare every detected
    reduction at that loop and every non-body-local or synthetic privatizable
    variable.
    """
    directives: list[LoopDirective] = []
    notes: list[str] = []
    for entry in _plan_loop_choice(report):
        lid = entry.loop_id
        # collapse over following purely parallelizable perfect levels
        k = 1
        chain = [entry]
        while True:
            nxt = _collapse_chain(report, lid, k + 1)
            if nxt is None:
                break
            cand = report.loop(nxt[-1])
            if cand.verdict != "parallelizable":
                break
            k += 1
            chain.append(cand)
        innermost = chain[-1]
        body_has_cond = any(e.has_conditional for e in chain)
        deeper_loop_remains = innermost.has_inner_loop
        schedule = ScheduleSpec(kind="dynamic" if (body_has_cond or deeper_loop_remains) else "static")
        reductions = tuple(
            ReductionClause(var=r.variable, op=r.op) for r in entry.reductions
        )
        privates = tuple(
            sorted(
                {
                    p.variable
                    for p in entry.privatizable
                    if p.synthetic or not p.body_local
                }
            )
        )
        directives.append(
            LoopDirective(
                loop_id=lid,
                parallelize=True,
                collapse=k,
                schedule=schedule,
                reductions=reductions,
                privates=privates,
            )
        )
        bits = [f"parallelize {lid} (verdict: {entry.verdict})"]
        if k > 1:
            bits.append(f"collapse({k}) over the perfect nest {' -> '.join(e.loop_id for e in chain)}")
        bits.append(
            f"schedule({schedule.kind})"
            + (
                " because iteration cost varies ("
                + ("conditional body" if body_has_cond else "inner sequential loop")
                + ")"
                if schedule.kind == "dynamic"
                else " for uniform iterations"
            )
        )
        for r in entry.reductions:
            bits.append(f"reduction({r.op}:{r.variable}) for the carried accumulation of {r.variable}")
        for v in privates:
            bits.append(f"private({v}) keeps per-iteration state thread-local")
        carried = [
            f
            for f in entry.dependences
            if f.carried_loop == lid and f.explained_by is None
        ]
        if carried:
            bits.append("unaddressed: " + "; ".join(f"{f.kind} on {f.variable or f.array}" for f in carried))
        notes.append("; ".join(bits) + ".")
    if not directives:
        reasons = []
        for e in report.entries:
            if e.level == 1:
                why = ", ".join(e.unknown_causes) if e.unknown_causes else e.verdict
                reasons.append(f"{e.loop_id}: {why}")
        notes.append(
            "No loop can be parallelized safely: " + ("; ".join(reasons) if reasons else "no loops found") + "."
        )
    return Plan(directives=tuple(directives), rationale=" ".join(notes))
