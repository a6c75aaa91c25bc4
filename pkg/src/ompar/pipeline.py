"""End-to-end orchestration of one parallelization attempt:

    parse -> analyze -> reason -> validate -> transform -> verify

Every attempt ends in exactly one status:

* ``success`` — an accepted, non-empty plan whose transformed code passed
  all verification gates;
* ``rejected`` — the system itself declined: the planner proposed nothing,
  the validator found rule violations, or verification caught misbehavior
  (a conservative, correct outcome);
* ``runtime_failure`` — the attempt could not run to completion: reasoner
  or endpoint gave out, the rewrite was inexpressible, a build or run
  crashed.

These three are mutually exclusive and exhaustive, so any batch satisfies
``successes + rejections + runtime_failures == attempts``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Literal, Optional

from .analysis import AnalysisReport, analyze
from .codegen import generate
from .cparse import parse
from .errors import (
    CompileError,
    EndpointError,
    MalformedPlan,
    NotScalarizable,
    ReasonerExhausted,
    RewriteConflict,
    RuntimeFailure,
    ToolchainMissing,
    UnknownLoopId,
)
from .ir import SourceUnit
from .planning import Plan, RuleViolation, validate
from .reasoner import Backend, Reasoner, ReasonerTrace, plan_quality
from .verify import KernelSpec, Toolchain, VerifyResult, verify_pipeline

Status = Literal["success", "rejected", "runtime_failure"]


@dataclass
class AttemptResult:
    kernel: str
    strategy: str
    status: Status
    reason: str = ""
    report: Optional[AnalysisReport] = None
    plan: Optional[Plan] = None
    trace: Optional[ReasonerTrace] = None
    violations: list[RuleViolation] = field(default_factory=list)
    transformed: Optional[str] = None
    verify: Optional[VerifyResult] = None
    quality: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "strategy": self.strategy,
            "status": self.status,
            "reason": self.reason,
            "plan": self.plan.to_dict() if self.plan else None,
            "violations": [v.to_dict() for v in self.violations],
            "verify": self.verify.to_dict() if self.verify else None,
            "quality": self.quality,
        }


def _stem(path: str) -> str:
    base = os.path.basename(path)
    return base[:-2] if base.endswith(".c") else base


def load_unit(path: str) -> SourceUnit:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse(text, path=path)


def run_attempt(
    unit: SourceUnit,
    *,
    strategy: str,
    backend: Backend,
    toolchain: Optional[Toolchain] = None,
    spec: Optional[KernelSpec] = None,
    kernel_name: Optional[str] = None,
    out_dir: Optional[str] = None,
    size: Optional[int] = None,
    threads: int = 4,
    seeds: tuple[int, ...] = (1, 2, 3),
    do_verify: bool = True,
    reasoner_kwargs: Optional[dict] = None,
) -> AttemptResult:
    """One kernel through the whole pipeline. Never raises for outcomes the
    three statuses cover; only misuse of the harness itself propagates."""
    name = kernel_name or _stem(unit.path)
    result = AttemptResult(kernel=name, strategy=strategy, status="runtime_failure")

    report = analyze(unit)
    result.report = report

    reasoner = Reasoner(strategy, backend, **(reasoner_kwargs or {}))
    try:
        plan, trace = reasoner.plan(unit, report)
    except (ReasonerExhausted, EndpointError, MalformedPlan) as e:
        result.reason = f"planning failed: {e}"
        _persist(result, out_dir)
        return result
    result.plan = plan
    result.trace = trace
    result.quality = plan_quality(plan, report)

    try:
        result.violations = validate(plan, report)
    except UnknownLoopId as e:
        result.reason = f"plan referenced a nonexistent loop: {e}"
        _persist(result, out_dir)
        return result
    if result.violations:
        result.status = "rejected"
        result.reason = "plan rejected: " + "; ".join(str(v) for v in result.violations)
        _persist(result, out_dir)
        return result
    if plan.empty:
        result.status = "rejected"
        result.reason = "planner declined: no loop was proposed for parallelization"
        _persist(result, out_dir)
        return result

    try:
        result.transformed = generate(unit, plan, report)
    except (NotScalarizable, RewriteConflict, UnknownLoopId) as e:
        result.reason = f"transform failed: {e}"
        _persist(result, out_dir)
        return result

    if not do_verify:
        result.status = "success"
        result.reason = "transformed (verification skipped)"
        _persist(result, out_dir)
        return result

    if toolchain is None:
        raise ValueError("run_attempt needs a toolchain when do_verify=True")
    build_dir = None
    if out_dir:
        build_dir = os.path.join(out_dir, "builds", f"{name}_{strategy}")
    try:
        vres = verify_pipeline(
            unit,
            plan,
            report,
            toolchain,
            spec=spec,
            out_dir=build_dir,
            size=size,
            threads=threads,
            seeds=seeds,
            transformed_text=result.transformed,
        )
    except (CompileError, RuntimeFailure, ToolchainMissing, OSError) as e:
        result.reason = f"verification could not run: {e}"
        _persist(result, out_dir)
        return result
    result.verify = vres
    if vres.accepted:
        result.status = "success"
        result.reason = "verified"
    else:
        gates = [
            g
            for g, ok in (
                ("build", vres.builds_ok),
                ("regression", vres.regression_ok),
                ("thread sanitizer", vres.tsan_ok),
                ("address sanitizer", vres.asan_ok),
            )
            if not ok
        ]
        result.status = "rejected"
        result.reason = "verification rejected the transform: " + ", ".join(gates) + " failed"
    _persist(result, out_dir)
    return result


def _persist(result: AttemptResult, out_dir: Optional[str]) -> None:
    """Write plan/trace/report artifacts under the output directory."""
    if not out_dir:
        return
    tag = f"{result.kernel}_{result.strategy}"
    plans = os.path.join(out_dir, "plans")
    traces = os.path.join(out_dir, "traces")
    reports = os.path.join(out_dir, "reports")
    for d in (plans, traces, reports):
        os.makedirs(d, exist_ok=True)
    if result.plan is not None:
        with open(os.path.join(plans, f"{tag}.json"), "w") as f:
            f.write(result.plan.to_json() + "\n")
    if result.trace is not None:
        with open(os.path.join(traces, f"{tag}.json"), "w") as f:
            f.write(result.trace.to_json() + "\n")
    payload = result.to_dict()
    if result.report is not None:
        payload["analysis"] = result.report.to_dict()
    with open(os.path.join(reports, f"{tag}.json"), "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
