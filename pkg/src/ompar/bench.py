"""Timing, speedup/efficiency, sweeps, and result tables.

Measurement protocol: one warmup run, then five timed runs, report the
median ``TIME_NS``. Speedup is ``T_seq / T_par`` with the sequential
variant pinned to one thread; efficiency divides by the thread count.
Thread sweeps are filtered to the host's core count.

Outputs: per-row CSV, a JSON document, and a per-strategy summary table
whose keys are exactly ``Avg Speedup``, ``Success Rate``, ``Quality
Score``, and ``Best Kernel``. Rerunning a benchmark reproduces everything
except the timing-derived columns; :func:`stable_view` strips those for
comparisons.
"""

from __future__ import annotations

import csv
import io
import json
import os
import statistics
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

from .errors import CompileError, RuntimeFailure
from .ir import SourceUnit
from .pipeline import AttemptResult, run_attempt
from .reasoner import Backend
from .verify import KernelSpec, Toolchain, build_variant, run_binary, synthesize_driver

CSV_COLUMNS = (
    "kernel",
    "strategy",
    "status",
    "size",
    "threads",
    "t_seq_ns",
    "t_par_ns",
    "speedup",
    "efficiency",
    "quality",
    "reason",
)

TIMING_COLUMNS = ("t_seq_ns", "t_par_ns", "speedup", "efficiency")

SUMMARY_KEYS = ("Avg Speedup", "Success Rate", "Quality Score", "Best Kernel")


@dataclass
class BenchRow:
    kernel: str
    strategy: str
    status: str
    size: Optional[int] = None
    threads: Optional[int] = None
    t_seq_ns: Optional[int] = None
    t_par_ns: Optional[int] = None
    speedup: Optional[float] = None
    efficiency: Optional[float] = None
    quality: Optional[float] = None
    reason: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def filter_threads(requested: Sequence[int]) -> list[int]:
    """The requested thread counts that fit this host, order kept,
    duplicates dropped; never empty."""
    cores = os.cpu_count() or 1
    out: list[int] = []
    for t in requested:
        if t >= 1 and t <= cores and t not in out:
            out.append(t)
    return out or [cores]


def measure(
    binary: str,
    size: int,
    *,
    threads: int,
    seed: int = 1,
    reps: int = 5,
    warmup: int = 1,
    timeout: float = 300.0,
) -> int:
    """Median TIME_NS of ``reps`` runs after ``warmup`` discarded runs."""
    times: list[int] = []
    for i in range(warmup + reps):
        r = run_binary(binary, size, seed, threads=threads, timeout=timeout)
        if r.rc != 0:
            raise RuntimeFailure(
                f"{binary} exited {r.rc} at size {size}: {r.stderr.strip()[:300]}"
            )
        if r.time_ns is None:
            raise RuntimeFailure(f"{binary} printed no TIME_NS line")
        if i >= warmup:
            times.append(r.time_ns)
    return int(statistics.median(times))


def bench_attempt(
    attempt: AttemptResult,
    unit: SourceUnit,
    toolchain: Toolchain,
    spec: KernelSpec,
    *,
    size: int,
    threads_list: Sequence[int],
    reps: int = 5,
    warmup: int = 1,
    out_dir: Optional[str] = None,
    seed: int = 1,
) -> list[BenchRow]:
    """Timing rows for one pipeline attempt — one row per thread count for
    a success, a single untimed row otherwise."""
    base = BenchRow(
        kernel=attempt.kernel,
        strategy=attempt.strategy,
        status=attempt.status,
        size=size,
        quality=attempt.quality,
        reason=attempt.reason,
    )
    if attempt.status != "success" or attempt.transformed is None:
        return [base]

    import tempfile

    ctx = None
    if out_dir:
        bdir = os.path.join(out_dir, "builds", f"bench_{attempt.kernel}_{attempt.strategy}")
        os.makedirs(bdir, exist_ok=True)
    else:
        ctx = tempfile.TemporaryDirectory(prefix="ompar_bench_")
        bdir = ctx.name
    try:
        driver = synthesize_driver(unit, spec)
        try:
            seq = build_variant(toolchain, attempt.transformed, driver, bdir, "seq")
            par = build_variant(toolchain, attempt.transformed, driver, bdir, "par")
        except CompileError as e:
            base.status = "runtime_failure"
            base.reason = f"bench build failed: {e}"
            return [base]
        try:
            t_seq = measure(seq, size, threads=1, seed=seed, reps=reps, warmup=warmup)
        except RuntimeFailure as e:
            base.status = "runtime_failure"
            base.reason = f"sequential timing failed: {e}"
            return [base]
        rows: list[BenchRow] = []
        for p in threads_list:
            row = BenchRow(
                kernel=attempt.kernel,
                strategy=attempt.strategy,
                status="success",
                size=size,
                threads=p,
                t_seq_ns=t_seq,
                quality=attempt.quality,
                reason=attempt.reason,
            )
            try:
                t_par = measure(par, size, threads=p, seed=seed, reps=reps, warmup=warmup)
                row.t_par_ns = t_par
                row.speedup = t_seq / t_par if t_par > 0 else None
                row.efficiency = (row.speedup / p) if row.speedup is not None else None
            except RuntimeFailure as e:
                row.status = "runtime_failure"
                row.reason = f"parallel timing failed: {e}"
            rows.append(row)
        return rows
    finally:
        if ctx is not None:
            ctx.cleanup()


def run_benchmarks(
    kernels: Sequence[tuple[str, SourceUnit, KernelSpec, int]],
    strategies: Sequence[str],
    backend_factory: Callable[[], Backend],
    toolchain: Toolchain,
    *,
    threads_list: Sequence[int] = (1, 2, 4, 8),
    reps: int = 5,
    warmup: int = 1,
    out_dir: Optional[str] = None,
    verify_threads: int = 4,
    seeds: tuple[int, ...] = (1, 2, 3),
    reasoner_kwargs: Optional[dict] = None,
) -> tuple[list[BenchRow], list[AttemptResult]]:
    """The full matrix: every kernel under every strategy, verified then
    timed. ``kernels`` rows are (name, unit, spec, bench_size)."""
    threads_list = filter_threads(threads_list)
    rows: list[BenchRow] = []
    attempts: list[AttemptResult] = []
    for strategy in strategies:
        for name, unit, spec, size in kernels:
            attempt = run_attempt(
                unit,
                strategy=strategy,
                backend=backend_factory(),
                toolchain=toolchain,
                spec=spec,
                kernel_name=name,
                out_dir=out_dir,
                threads=verify_threads,
                seeds=seeds,
                reasoner_kwargs=reasoner_kwargs,
            )
            attempts.append(attempt)
            rows.extend(
                bench_attempt(
                    attempt,
                    unit,
                    toolchain,
                    spec,
                    size=size,
                    threads_list=threads_list,
                    reps=reps,
                    warmup=warmup,
                    out_dir=out_dir,
                )
            )
    conserve(attempts)
    return rows, attempts


def conserve(attempts: Sequence[AttemptResult]) -> None:
    """Assert the bookkeeping identity: every attempt lands in exactly one
    of the three statuses."""
    n = len(attempts)
    s = sum(1 for a in attempts if a.status == "success")
    r = sum(1 for a in attempts if a.status == "rejected")
    f = sum(1 for a in attempts if a.status == "runtime_failure")
    if s + r + f != n:
        raise AssertionError(
            f"attempt statuses do not partition: {s}+{r}+{f} != {n}"
        )


# --------------------------------------------------------------------------
# tables
# --------------------------------------------------------------------------


def _per_kernel_best(rows: Sequence[BenchRow]) -> dict[tuple[str, str], BenchRow]:
    """For each (strategy, kernel): the successful row at the highest thread
    count (the headline measurement)."""
    best: dict[tuple[str, str], BenchRow] = {}
    for row in rows:
        if row.status != "success" or row.speedup is None:
            continue
        key = (row.strategy, row.kernel)
        cur = best.get(key)
        if cur is None or (row.threads or 0) > (cur.threads or 0):
            best[key] = row
    return best


def summarize(rows: Sequence[BenchRow], attempts: Sequence[AttemptResult]) -> dict[str, dict]:
    """Per-strategy summary with the verbatim table keys."""
    strategies: list[str] = []
    for a in attempts:
        if a.strategy not in strategies:
            strategies.append(a.strategy)
    best = _per_kernel_best(rows)
    out: dict[str, dict] = {}
    for strat in strategies:
        these = [a for a in attempts if a.strategy == strat]
        n_attempts = len(these)
        n_success = sum(1 for a in these if a.status == "success")
        speedups = {
            kernel: row.speedup
            for (s, kernel), row in best.items()
            if s == strat and row.speedup is not None
        }
        qualities = [a.quality for a in these if a.quality is not None]
        best_kernel = ""
        if speedups:
            best_kernel = max(speedups, key=lambda k: speedups[k])
        out[strat] = {
            "Avg Speedup": (
                sum(speedups.values()) / len(speedups) if speedups else None
            ),
            "Success Rate": (n_success / n_attempts) if n_attempts else 0.0,
            "Quality Score": (
                sum(qualities) / len(qualities) if qualities else None
            ),
            "Best Kernel": best_kernel,
        }
    return out


def _fmt(x: object) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def write_csv(rows: Sequence[BenchRow], path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            d = row.to_dict()
            w.writerow([_fmt(d[c]) for c in CSV_COLUMNS])


def rows_csv_text(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(CSV_COLUMNS)
    for row in rows:
        d = row.to_dict()
        w.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def to_json_doc(
    rows: Sequence[BenchRow],
    attempts: Sequence[AttemptResult],
    config: Optional[dict] = None,
) -> dict:
    return {
        "config": config or {},
        "rows": [r.to_dict() for r in rows],
        "attempts": [a.to_dict() for a in attempts],
        "summary": summarize(rows, attempts),
    }


def stable_view(rows: Sequence[BenchRow]) -> list[dict]:
    """Rows without timing-derived columns — the part that must be
    bit-reproducible across reruns."""
    out = []
    for r in rows:
        d = r.to_dict()
        for c in TIMING_COLUMNS:
            d.pop(c, None)
        out.append(d)
    return out


def markdown_summary(summary: dict[str, dict]) -> str:
    lines = [
        "| Strategy | Avg Speedup | Success Rate | Quality Score | Best Kernel |",
        "|---|---|---|---|---|",
    ]
    for strat, row in summary.items():
        avg = row["Avg Speedup"]
        rate = row["Success Rate"]
        qual = row["Quality Score"]
        lines.append(
            "| {} | {} | {} | {} | {} |".format(
                strat,
                f"{avg:.2f}x" if avg is not None else "-",
                f"{100 * rate:.0f}%",
                f"{qual:.2f}" if qual is not None else "-",
                row["Best Kernel"] or "-",
            )
        )
    return "\n".join(lines) + "\n"
