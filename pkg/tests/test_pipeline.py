"""End-to-end attempt orchestration: the three exhaustive statuses, their
reason strings, artifact persistence, and the conservation invariant."""

from __future__ import annotations

import json
import os
from collections import Counter

import pytest

import ompar.pipeline as pipeline
from ompar.pipeline import AttemptResult, load_unit, run_attempt
from ompar.reasoner import MockBackend
from ompar.verify import VerifyResult

from conftest import CORPUS_DIR

PREFIX_SRC = """void prefix(float* a, int n) {
    for (int i = 1; i < n; i++) {
        a[i] = a[i-1] + a[i];
    }
}
"""


class Scripted:
    """A backend that always answers with one fixed completion."""

    name = "scripted"

    def __init__(self, payload: object):
        self.text = json.dumps(payload) if not isinstance(payload, str) else payload

    def bind(self, unit, report, strategy):
        pass

    def complete(self, messages, *, temperature=0.2):
        return self.text


@pytest.fixture()
def prefix_unit():
    from ompar.cparse import parse

    return parse(PREFIX_SRC, "prefix.c")


@pytest.fixture()
def matmul_path():
    return os.path.join(CORPUS_DIR, "matmul", "matmul.c")


def test_success_without_verification(matmul_path):
    result = run_attempt(
        load_unit(matmul_path),
        strategy="zero_shot",
        backend=MockBackend(),
        do_verify=False,
    )
    assert result.status == "success"
    assert result.reason == "transformed (verification skipped)"
    assert result.quality == 1.0
    assert "#pragma omp parallel for" in result.transformed
    assert result.trace is not None and result.plan is not None


def test_validator_rejection_names_the_rule(prefix_unit):
    bad = {"plan_version": 1, "loops": [{"loop": "prefix.L1", "parallelize": True}]}
    result = run_attempt(
        prefix_unit, strategy="zero_shot", backend=Scripted(bad), do_verify=True
    )
    assert result.status == "rejected"
    assert result.reason.startswith("plan rejected: R1 [prefix.L1]:")
    assert [v.rule for v in result.violations] == ["R1"]
    # a validator rejection never reaches codegen or the builders
    assert result.transformed is None and result.verify is None


def test_planner_declining_is_a_rejection_not_a_failure(prefix_unit):
    decline = {"plan_version": 1, "loops": []}
    result = run_attempt(
        prefix_unit, strategy="zero_shot", backend=Scripted(decline), do_verify=True
    )
    assert result.status == "rejected"
    assert result.reason == "planner declined: no loop was proposed for parallelization"


def test_plan_naming_a_ghost_loop_is_a_runtime_failure(prefix_unit):
    ghost = {"plan_version": 1, "loops": [{"loop": "prefix.L9", "parallelize": True}]}
    result = run_attempt(
        prefix_unit, strategy="zero_shot", backend=Scripted(ghost), do_verify=True
    )
    assert result.status == "runtime_failure"
    assert result.reason.startswith("plan referenced a nonexistent loop:")
    assert "prefix.L9" in result.reason


def test_reasoner_exhaustion_is_a_runtime_failure(prefix_unit):
    class Garbage:
        name = "garbage"

        def bind(self, unit, report, strategy):
            pass

        def complete(self, messages, *, temperature=0.2):
            return "no json here"

    result = run_attempt(
        prefix_unit,
        strategy="zero_shot",
        backend=Garbage(),
        reasoner_kwargs={"max_retries": 1},
        do_verify=True,
    )
    assert result.status == "runtime_failure"
    assert result.reason.startswith("planning failed: no usable plan after 2 attempts")


def test_verification_requires_a_toolchain(matmul_path):
    with pytest.raises(ValueError, match="needs a toolchain"):
        run_attempt(
            load_unit(matmul_path),
            strategy="zero_shot",
            backend=MockBackend(),
            do_verify=True,
        )


def test_verify_rejection_maps_to_rejected_with_gate_names(
    matmul_path, monkeypatch, toolchain
):
    def failing_verify(unit, plan, report, tc, **kw):
        return VerifyResult(
            kernel="matmul",
            builds_ok=True,
            regression_ok=True,
            tsan_ok=False,
            asan_ok=True,
            rel_tol=1e-6,
        )

    monkeypatch.setattr(pipeline, "verify_pipeline", failing_verify)
    result = run_attempt(
        load_unit(matmul_path),
        strategy="zero_shot",
        backend=MockBackend(),
        toolchain=toolchain,
        do_verify=True,
    )
    assert result.status == "rejected"
    assert result.reason == (
        "verification rejected the transform: thread sanitizer failed"
    )


def test_verified_success_and_artifact_layout(matmul_path, toolchain, tmp_path):
    out = str(tmp_path)
    result = run_attempt(
        load_unit(matmul_path),
        strategy="zero_shot",
        backend=MockBackend(),
        toolchain=toolchain,
        out_dir=out,
        size=32,
        do_verify=True,
    )
    assert result.status == "success"
    assert result.reason == "verified"
    assert result.verify is not None and result.verify.accepted

    # plan, trace, and report artifacts, one JSON file each per attempt
    plan_file = tmp_path / "plans" / "matmul_zero_shot.json"
    trace_file = tmp_path / "traces" / "matmul_zero_shot.json"
    report_file = tmp_path / "reports" / "matmul_zero_shot.json"
    assert plan_file.exists() and trace_file.exists() and report_file.exists()
    plan = json.loads(plan_file.read_text())
    assert plan["plan_version"] == 1
    assert plan["loops"][0]["loop"] == "matmul.L1"
    report = json.loads(report_file.read_text())
    assert report["status"] == "success"
    assert report["kernel"] == "matmul" and report["strategy"] == "zero_shot"
    assert report["verify"]["accepted"] is True
    assert "analysis" in report
    # build tree is kept per attempt, one subdirectory per variant
    assert (tmp_path / "builds" / "matmul_zero_shot" / "seq").is_dir()
    assert (tmp_path / "builds" / "matmul_zero_shot" / "par").is_dir()


def test_artifacts_are_written_even_for_rejections(prefix_unit, tmp_path):
    bad = {"plan_version": 1, "loops": [{"loop": "prefix.L1", "parallelize": True}]}
    run_attempt(
        prefix_unit,
        strategy="few_shot",
        backend=Scripted(bad),
        out_dir=str(tmp_path),
        do_verify=True,
    )
    report = json.loads((tmp_path / "reports" / "prefix_few_shot.json").read_text())
    assert report["status"] == "rejected"
    assert report["violations"][0]["rule"] == "R1"


def test_statuses_partition_any_batch(prefix_unit, matmul_path):
    outcomes = [
        run_attempt(
            load_unit(matmul_path),
            strategy="zero_shot",
            backend=MockBackend(),
            do_verify=False,
        ),
        run_attempt(
            prefix_unit,
            strategy="zero_shot",
            backend=Scripted({"plan_version": 1, "loops": []}),
            do_verify=True,
        ),
        run_attempt(
            prefix_unit,
            strategy="zero_shot",
            backend=Scripted("not a plan"),
            reasoner_kwargs={"max_retries": 0},
            do_verify=True,
        ),
    ]
    counts = Counter(r.status for r in outcomes)
    assert set(counts) <= {"success", "rejected", "runtime_failure"}
    assert counts["success"] + counts["rejected"] + counts["runtime_failure"] == len(
        outcomes
    )
    assert counts == {"success": 1, "rejected": 1, "runtime_failure": 1}


def test_attempt_result_serializes_to_plain_data(matmul_path):
    result = run_attempt(
        load_unit(matmul_path),
        strategy="zero_shot",
        backend=MockBackend(),
        do_verify=False,
    )
    d = result.to_dict()
    assert d["status"] == "success"
    assert d["plan"]["plan_version"] == 1
    json.dumps(d)  # round-trippable without custom encoders
