"""Benchmark layer: thread filtering, the median-of-five protocol, summary
tables with their verbatim keys, and reproducibility of the stable view."""

from __future__ import annotations

import json
import os
import stat

import pytest

import ompar.bench as bench
from ompar.bench import (
    CSV_COLUMNS,
    SUMMARY_KEYS,
    BenchRow,
    bench_attempt,
    conserve,
    filter_threads,
    markdown_summary,
    measure,
    rows_csv_text,
    run_benchmarks,
    stable_view,
    summarize,
    to_json_doc,
)
from ompar.cparse import parse
from ompar.errors import RuntimeFailure
from ompar.pipeline import AttemptResult
from ompar.reasoner import MockBackend
from ompar.verify import KernelSpec


# --------------------------------------------------------------------------
# thread filtering
# --------------------------------------------------------------------------


def test_filter_threads_respects_the_host_core_count(monkeypatch):
    monkeypatch.setattr(bench.os, "cpu_count", lambda: 4)
    assert filter_threads([1, 2, 4, 8]) == [1, 2, 4]
    assert filter_threads([8, 16]) == [4]  # nothing fits: fall back to cores
    assert filter_threads([2, 2, 1]) == [2, 1]  # order kept, duplicates dropped
    assert filter_threads([0, -3]) == [4]


def test_filter_threads_never_returns_empty():
    got = filter_threads([])
    assert got == [os.cpu_count() or 1]


# --------------------------------------------------------------------------
# timing protocol
# --------------------------------------------------------------------------


def _fake_binary(tmp_path, body: str) -> str:
    p = tmp_path / "fake"
    p.write_text("#!/bin/sh\n" + body)
    p.chmod(p.stat().st_mode | stat.S_IEXEC)
    return str(p)


def test_measure_reports_the_median_after_one_warmup(tmp_path):
    counter = tmp_path / "count"
    counter.write_text("0")
    # run k reports TIME_NS = 100*k: 100 200 300 400 500 600
    binary = _fake_binary(
        tmp_path,
        f'c=$(cat "{counter}"); c=$((c+1)); echo $c > "{counter}"\n'
        'echo "TIME_NS=$((c * 100))"\n'
        'echo "CHECKSUM=00000000000000ff"\n',
    )
    got = measure(binary, 16, threads=1, reps=5, warmup=1)
    # the warmup run (100) is discarded; median of 200..600 is 400
    assert got == 400


def test_measure_raises_on_nonzero_exit(tmp_path):
    binary = _fake_binary(tmp_path, 'echo "TIME_NS=1"\nexit 3\n')
    with pytest.raises(RuntimeFailure, match="exited 3"):
        measure(binary, 16, threads=1)


def test_measure_raises_when_no_time_is_printed(tmp_path):
    binary = _fake_binary(tmp_path, 'echo "hello"\n')
    with pytest.raises(RuntimeFailure, match="no TIME_NS"):
        measure(binary, 16, threads=1)


# --------------------------------------------------------------------------
# row bookkeeping and tables
# --------------------------------------------------------------------------


def _attempt(kernel: str, strategy: str, status: str, quality=None) -> AttemptResult:
    return AttemptResult(kernel=kernel, strategy=strategy, status=status, quality=quality)


def test_non_success_attempts_produce_one_untimed_row():
    attempt = _attempt("k1", "zero_shot", "rejected")
    attempt.reason = "plan rejected: R1"
    rows = bench_attempt(attempt, None, None, None, size=64, threads_list=[1, 2])
    assert len(rows) == 1
    row = rows[0]
    assert row.status == "rejected"
    assert row.t_seq_ns is None and row.speedup is None
    assert row.reason == "plan rejected: R1"


def test_summary_table_uses_the_verbatim_keys():
    rows = [
        BenchRow("k1", "zero_shot", "success", 64, 2, 1000, 667, 1.5, 0.75, 1.0),
        BenchRow("k1", "zero_shot", "success", 64, 4, 1000, 500, 2.0, 0.5, 1.0),
        BenchRow("k2", "zero_shot", "success", 64, 4, 900, 300, 3.0, 0.75, 0.5),
        BenchRow("k3", "zero_shot", "rejected"),
    ]
    attempts = [
        _attempt("k1", "zero_shot", "success", quality=1.0),
        _attempt("k2", "zero_shot", "success", quality=0.5),
        _attempt("k3", "zero_shot", "rejected"),
    ]
    summary = summarize(rows, attempts)
    assert list(summary) == ["zero_shot"]
    table = summary["zero_shot"]
    assert tuple(table) == SUMMARY_KEYS == (
        "Avg Speedup",
        "Success Rate",
        "Quality Score",
        "Best Kernel",
    )
    # per-kernel best is the highest thread count: 2.0 for k1, 3.0 for k2
    assert table["Avg Speedup"] == pytest.approx(2.5)
    assert table["Success Rate"] == pytest.approx(2 / 3)
    assert table["Quality Score"] == pytest.approx(0.75)
    assert table["Best Kernel"] == "k2"
    md = markdown_summary(summary)
    assert md.splitlines()[0] == (
        "| Strategy | Avg Speedup | Success Rate | Quality Score | Best Kernel |"
    )


def test_conserve_accepts_a_partition_and_rejects_anything_else():
    good = [
        _attempt("a", "s", "success"),
        _attempt("b", "s", "rejected"),
        _attempt("c", "s", "runtime_failure"),
    ]
    conserve(good)  # no exception
    with pytest.raises(AssertionError, match="do not partition"):
        conserve([_attempt("d", "s", "exploded")])


def test_stable_view_is_identical_across_timing_jitter():
    run1 = [BenchRow("k1", "zero_shot", "success", 64, 4, 1000, 500, 2.0, 0.5, 1.0)]
    run2 = [BenchRow("k1", "zero_shot", "success", 64, 4, 1444, 777, 1.86, 0.46, 1.0)]
    v1, v2 = stable_view(run1), stable_view(run2)
    assert v1 == v2
    assert "t_seq_ns" not in v1[0] and "speedup" not in v1[0]
    assert v1[0]["kernel"] == "k1" and v1[0]["threads"] == 4


def test_csv_text_shape():
    rows = [
        BenchRow("k1", "zero_shot", "success", 64, 4, 1000, 500, 2.0, 0.5, 1.0),
        BenchRow("k2", "zero_shot", "rejected"),
    ]
    text = rows_csv_text(rows)
    lines = text.strip().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    assert lines[1].startswith("k1,zero_shot,success,64,4,1000,500,2,0.5,1,")
    assert lines[2] == "k2,zero_shot,rejected,,,,,,,,"


# --------------------------------------------------------------------------
# the full matrix on a real toolchain
# --------------------------------------------------------------------------

SCALE_SRC = """void scale(float* a, float* b, int n) {
    for (int i = 0; i < n; i++) {
        b[i] = a[i] * 3.0f;
    }
}
"""


def test_run_benchmarks_mock_matrix(toolchain):
    unit = parse(SCALE_SRC, "scale.c")
    spec = KernelSpec.from_function(unit, unit.functions[0])
    kernels = [("scale", unit, spec, 4096)]
    rows, attempts = run_benchmarks(
        kernels,
        ["zero_shot", "few_shot"],
        MockBackend,
        toolchain,
        threads_list=(1, 2, 4),
        reps=1,
        warmup=0,
    )
    assert len(attempts) == 2
    assert all(a.status == "success" for a in attempts)
    threads = filter_threads((1, 2, 4))
    assert len(rows) == 2 * len(threads)
    for row in rows:
        assert row.status == "success"
        assert row.t_seq_ns > 0 and row.t_par_ns > 0
        assert row.speedup == pytest.approx(row.t_seq_ns / row.t_par_ns)
        assert row.efficiency == pytest.approx(row.speedup / row.threads)
    doc = to_json_doc(rows, attempts, config={"seed": 7})
    assert set(doc) == {"config", "rows", "attempts", "summary"}
    assert set(doc["summary"]) == {"zero_shot", "few_shot"}
    for table in doc["summary"].values():
        assert tuple(table) == SUMMARY_KEYS
        assert table["Success Rate"] == 1.0
        assert table["Best Kernel"] == "scale"
    json.dumps(doc)  # fully serializable
