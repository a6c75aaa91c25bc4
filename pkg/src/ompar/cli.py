"""Command-line interface.

Subcommands: ``analyze``, ``plan``, ``transform``, ``verify``, ``bench``,
``corpus``. Exit codes: 0 — the requested outcome happened (analysis
printed, plan accepted, transform written, verification passed); 1 — the
pipeline itself declined or failed (plan rejected, verification failed);
2 — usage, configuration, or toolchain problems.

Options can come from (highest precedence first) command-line flags, a
TOML config file (``--config`` or ``./ompar.toml``, section ``[ompar]``),
the ``OMPAR_ENDPOINT`` environment variable, then built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib  # type: ignore[no-redef]

from . import bench as bench_mod
from .analysis import analyze
from .corpus import check_kernel, load_corpus
from .errors import (
    ConfigError,
    CSyntaxError,
    EndpointError,
    ReasonerExhausted,
    ToolchainMissing,
)
from .pipeline import load_unit, run_attempt
from .planning import validate
from .reasoner import STRATEGIES, Reasoner, make_backend, plan_quality
from .verify import KernelSpec, probe_toolchain

_CONFIG_KEYS = ("backend", "endpoint", "model", "strategy", "threads")


def _load_config(path: Optional[str]) -> dict:
    candidate = path or ("ompar.toml" if os.path.isfile("ompar.toml") else None)
    if candidate is None:
        return {}
    try:
        with open(candidate, "rb") as f:
            doc = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file {candidate!r} not found")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config file {candidate!r} is not valid TOML: {e}")
    section = doc.get("ompar", {})
    if not isinstance(section, dict):
        raise ConfigError(f"config file {candidate!r}: [ompar] must be a table")
    unknown = set(section) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(
            f"config file {candidate!r}: unknown keys {', '.join(sorted(unknown))}"
        )
    return section


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("mock", "http"), default=None,
                   help="plan generator backend (default: mock)")
    p.add_argument("--endpoint", default=None,
                   help="chat-completions endpoint URL (or OMPAR_ENDPOINT)")
    p.add_argument("--model", default=None, help="model name for the http backend")
    p.add_argument("--strategy", choices=STRATEGIES, default=None,
                   help="reasoning strategy (default: zero_shot)")
    p.add_argument("--threads", type=int, default=None,
                   help="parallel thread count for verification/benchmarks (default: 4)")
    p.add_argument("--out-dir", default=None,
                   help="directory for plans/, traces/, builds/, reports/ artifacts")
    p.add_argument("--seed", type=int, default=1, help="base seed for runs (default: 1)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--config", default=None, help="TOML config file (default: ./ompar.toml)")
    p.add_argument("--cc", default=None, help="C compiler (or OMPAR_CC; default: probe)")
    p.add_argument("--size", type=int, default=None, help="problem size for runs")


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    cfg = _load_config(args.config)
    args.backend = args.backend or cfg.get("backend") or "mock"
    args.endpoint = (
        args.endpoint or cfg.get("endpoint") or os.environ.get("OMPAR_ENDPOINT", "")
    )
    args.model = args.model or cfg.get("model") or "default"
    args.strategy = args.strategy or cfg.get("strategy") or "zero_shot"
    if args.threads is None:
        raw = cfg.get("threads")
        args.threads = int(raw) if raw is not None else 4
    if args.threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {args.threads}")
    return args


def _backend(args: argparse.Namespace):
    return make_backend(
        args.backend, endpoint=args.endpoint, model=args.model
    )


def _seeds(args: argparse.Namespace) -> tuple[int, int, int]:
    return (args.seed, args.seed + 1, args.seed + 2)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _cmd_analyze(args: argparse.Namespace) -> int:
    unit = load_unit(args.file)
    report = analyze(unit)
    if args.json:
        print(report.to_json())
    else:
        for e in report.entries:
            print(f"{e.loop_id} (line {e.line}, level {e.level}): {e.verdict}")
            for cause in e.unknown_causes:
                print(f"    cause: {cause}")
            carried = [f for f in e.dependences if f.carried_loop == e.loop_id]
            for f in carried:
                what = f.variable or f.array
                fix = f" [{f.explained_by[0]} {f.explained_by[1]}]" if f.explained_by else ""
                dist = f.distance if f.distance is not None else "?"
                print(f"    carried {f.kind} on {what} (distance {dist}){fix}")
            for r in e.reductions:
                syn = " (synthetic)" if r.synthetic else ""
                print(f"    reduction {r.op}:{r.variable}{syn}")
            privs = [p.variable for p in e.privatizable]
            if privs:
                print(f"    privatizable: {', '.join(privs)}")
    if args.out_dir:
        os.makedirs(os.path.join(args.out_dir, "reports"), exist_ok=True)
        out = os.path.join(args.out_dir, "reports", "analysis.json")
        with open(out, "w") as f:
            f.write(report.to_json() + "\n")
    return 0


def _plan_once(args: argparse.Namespace, unit):
    report = analyze(unit)
    reasoner = Reasoner(args.strategy, _backend(args), model=args.model)
    plan, trace = reasoner.plan(unit, report)
    violations = validate(plan, report)
    return report, plan, trace, violations


def _cmd_plan(args: argparse.Namespace) -> int:
    unit = load_unit(args.file)
    report, plan, trace, violations = _plan_once(args, unit)
    if args.out_dir:
        from .pipeline import _persist, AttemptResult

        res = AttemptResult(
            kernel=os.path.basename(args.file).removesuffix(".c"),
            strategy=args.strategy,
            status="rejected" if violations else "success",
            plan=plan,
            trace=trace,
            violations=violations,
            report=report,
            quality=plan_quality(plan, report),
        )
        _persist(res, args.out_dir)
    if args.json:
        print(json.dumps(
            {
                "plan": plan.to_dict(),
                "violations": [v.to_dict() for v in violations],
                "quality": plan_quality(plan, report),
                "strategy": args.strategy,
            },
            indent=2, sort_keys=True,
        ))
    else:
        print(plan.to_json())
        for v in violations:
            print(f"violation {v}", file=sys.stderr)
    return 1 if violations else 0


def _cmd_transform(args: argparse.Namespace) -> int:
    from .codegen import generate

    unit = load_unit(args.file)
    report, plan, trace, violations = _plan_once(args, unit)
    if violations:
        for v in violations:
            print(f"violation {v}", file=sys.stderr)
        print("plan rejected; refusing to transform", file=sys.stderr)
        return 1
    text = generate(unit, plan, report)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    elif args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        dest = os.path.join(
            args.out_dir, os.path.basename(args.file).removesuffix(".c") + "_omp.c"
        )
        with open(dest, "w") as f:
            f.write(text)
        if not args.json:
            print(f"wrote {dest}", file=sys.stderr)
        print(text, end="")
    else:
        print(text, end="")
    return 0


def _attempt_for_file(args: argparse.Namespace) -> "object":
    unit = load_unit(args.file)
    toolchain = probe_toolchain(args.cc)
    return run_attempt(
        unit,
        strategy=args.strategy,
        backend=_backend(args),
        toolchain=toolchain,
        out_dir=args.out_dir,
        size=args.size,
        threads=args.threads,
        seeds=_seeds(args),
    )


def _cmd_verify(args: argparse.Namespace) -> int:
    attempt = _attempt_for_file(args)
    if args.json:
        print(json.dumps(attempt.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"{attempt.kernel} [{attempt.strategy}]: {attempt.status} — {attempt.reason}")
        if attempt.verify is not None:
            v = attempt.verify
            for gate, ok in (
                ("builds", v.builds_ok),
                ("regression", v.regression_ok),
                ("thread sanitizer", v.tsan_ok),
                ("address sanitizer", v.asan_ok),
            ):
                print(f"    {gate}: {'pass' if ok else 'FAIL'}")
    return 0 if attempt.status == "success" else 1


def _cmd_bench(args: argparse.Namespace) -> int:
    toolchain = probe_toolchain(args.cc)
    strategies = (
        [s.strip() for s in args.strategies.split(",") if s.strip()]
        if args.strategies
        else [args.strategy]
    )
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r} in --strategies")
    kernels: list[tuple[str, object, KernelSpec, int]] = []
    if args.corpus:
        for k in load_corpus(args.corpus):
            size = args.size or k.bench_size
            kernels.append((k.name, k.unit, k.spec, size))
    elif args.file:
        unit = load_unit(args.file)
        spec = KernelSpec.from_function(unit, unit.functions[0])
        kernels.append(
            (
                os.path.basename(args.file).removesuffix(".c"),
                unit,
                spec,
                args.size or spec.default_size,
            )
        )
    else:
        raise ConfigError("bench needs a FILE or --corpus DIR")
    threads_list = (
        [int(t) for t in args.sweep.split(",")] if args.sweep else [args.threads]
    )
    rows, attempts = bench_mod.run_benchmarks(
        kernels,
        strategies,
        lambda: _backend(args),
        toolchain,
        threads_list=threads_list,
        reps=args.reps,
        warmup=1,
        out_dir=args.out_dir,
        verify_threads=args.threads,
        seeds=_seeds(args),
    )
    doc = bench_mod.to_json_doc(
        rows,
        attempts,
        config={
            "strategies": strategies,
            "threads": bench_mod.filter_threads(threads_list),
            "reps": args.reps,
            "seed": args.seed,
            "backend": args.backend,
            "model": args.model if args.backend == "http" else "",
        },
    )
    if args.csv:
        bench_mod.write_csv(rows, args.csv)
    if args.out_dir:
        os.makedirs(os.path.join(args.out_dir, "reports"), exist_ok=True)
        with open(os.path.join(args.out_dir, "reports", "bench.json"), "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
        bench_mod.write_csv(
            rows, os.path.join(args.out_dir, "reports", "bench.csv")
        )
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(bench_mod.rows_csv_text(rows), end="")
        print()
        print(bench_mod.markdown_summary(doc["summary"]), end="")
    return 0


def _cmd_corpus(args: argparse.Namespace) -> int:
    kernels = load_corpus(args.dir)
    if args.verify:
        toolchain = probe_toolchain(args.cc)
        failures = 0
        results = []
        for k in kernels:
            ok, msg = check_kernel(k, toolchain, size=args.size)
            results.append({"kernel": k.name, "ok": ok, "message": msg})
            if not ok:
                failures += 1
            if not args.json:
                print(f"{'ok  ' if ok else 'FAIL'} {k.name}: {msg}")
        if args.json:
            print(json.dumps(results, indent=2, sort_keys=True))
        return 1 if failures else 0
    if args.json:
        print(json.dumps(
            [
                {
                    "kernel": k.name,
                    "func": k.spec.func,
                    "complexity": k.complexity,
                    "status": k.status,
                    "loops": [loop.loop_id for _, loop in k.unit.loops()],
                }
                for k in kernels
            ],
            indent=2, sort_keys=True,
        ))
    else:
        for k in kernels:
            loops = sum(1 for _ in k.unit.loops())
            label = f" [{k.complexity}]" if k.complexity else ""
            status = f" ({k.status})" if k.status else ""
            print(f"{k.name}{label}{status}: {k.spec.func}, {loops} loops")
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ompar",
        description="Analysis-guided OpenMP parallelization of restricted-C loop kernels.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="dependence analysis report for a source file")
    pa.add_argument("file")
    _common_flags(pa)
    pa.set_defaults(fn=_cmd_analyze)

    pp = sub.add_parser("plan", help="produce a parallelization plan")
    pp.add_argument("file")
    _common_flags(pp)
    pp.set_defaults(fn=_cmd_plan)

    pt = sub.add_parser("transform", help="plan, validate, and emit transformed source")
    pt.add_argument("file")
    pt.add_argument("-o", "--output", default=None, help="write transformed source here")
    _common_flags(pt)
    pt.set_defaults(fn=_cmd_transform)

    pv = sub.add_parser("verify", help="full pipeline with build/regression/sanitizer gates")
    pv.add_argument("file")
    _common_flags(pv)
    pv.set_defaults(fn=_cmd_verify)

    pb = sub.add_parser("bench", help="time kernels and produce speedup tables")
    pb.add_argument("file", nargs="?", default=None)
    pb.add_argument("--corpus", default=None, help="benchmark a kernel corpus directory")
    pb.add_argument("--strategies", default=None,
                    help="comma-separated strategy list (default: --strategy)")
    pb.add_argument("--sweep", default=None,
                    help="comma-separated thread counts (filtered to host cores)")
    pb.add_argument("--reps", type=int, default=5, help="timed repetitions (default: 5)")
    pb.add_argument("--csv", default=None, help="write rows CSV here")
    _common_flags(pb)
    pb.set_defaults(fn=_cmd_bench)

    pc = sub.add_parser("corpus", help="list or contract-check a kernel corpus")
    pc.add_argument("dir")
    pc.add_argument("--verify", action="store_true", help="build and run each kernel")
    _common_flags(pc)
    pc.set_defaults(fn=_cmd_corpus)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve(args)
        return args.fn(args)
    except (ConfigError, ToolchainMissing, EndpointError) as e:
        print(f"ompar: {e}", file=sys.stderr)
        return 2
    except CSyntaxError as e:
        print(f"ompar: parse error: {e}", file=sys.stderr)
        return 1
    except ReasonerExhausted as e:
        print(f"ompar: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"ompar: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
