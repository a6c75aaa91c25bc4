"""Behavioral verification of a transformed kernel.

Four compiled variants of the *same* transformed source (plus a synthesized
driver):

* ``seq``  — OpenMP pragmas ignored (no ``-fopenmp``): the reference.
* ``par``  — ``-fopenmp -O3``: the candidate.
* ``tsan`` — ``-fopenmp -fsanitize=thread -O1 -g``.
* ``asan`` — ``-fopenmp -fsanitize=address -O1 -g``.

Acceptance is the conjunction of four independent checks:

1. all four variants build,
2. regression: over three seeds, ``par`` output matches ``seq`` output —
   bit-exact for integer data, relative tolerance for floating-point
   (``1e-6``, loosened to ``1e-4`` when the plan declares a floating-point
   reduction, whose combination order legitimately varies),
3. ThreadSanitizer reports no *real* data race in three runs at >= 4
   threads.  libgomp synchronizes its thread team with futexes, which
   ThreadSanitizer cannot observe, so the ``tsan`` build links a shim
   that interposes ``GOMP_parallel`` and annotates the true fork and
   join edges (``__tsan_release``/``__tsan_acquire``); without it every
   access after a parallel region — the next region, serial code, the
   driver's checksum — is reported as racing with the region's workers.
   On top of that, a report counts as real only when both access stacks
   run through OpenMP outlined code (frames containing ``._omp_fn``),
   which filters libgomp runtime-internal noise,
4. AddressSanitizer (leak checking off) reports nothing in the same runs.

The synthesized driver allocates and deterministically fills every array
parameter (splitmix64), times the kernel call with ``CLOCK_MONOTONIC``,
prints exactly ``TIME_NS=<integer>`` and ``CHECKSUM=<hex>`` lines (FNV-1a
64 over the output arrays), and accepts ``<size> <seed> [dump_path]``
arguments — the dump is the raw output bytes the regression comparator
reads back.
"""

from __future__ import annotations

import os
import re
import shutil
import struct
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Optional

from .analysis import AnalysisReport, collect_accesses
from .codegen import generate
from .errors import CompileError, RuntimeFailure, ToolchainMissing
from .ir import ForLoop, FunctionDecl, SourceUnit, walk_stmts
from .planning import Plan, has_fp_reduction

_ELEM_SIZE = {"int": 4, "long": 8, "float": 4, "double": 8}
_FP_TYPES = ("float", "double")

DEFAULT_REL_TOL = 1e-6
FP_REDUCTION_REL_TOL = 1e-4


# --------------------------------------------------------------------------
# toolchain
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Toolchain:
    cc: str
    version: str
    supports_openmp: bool
    supports_tsan: bool
    supports_asan: bool


_OMP_PROBE = (
    "#include <omp.h>\n"
    "int main(void){int s=0;\n"
    "#pragma omp parallel for reduction(+:s)\n"
    "for(int i=0;i<8;i++)s+=i;return s==28?0:1;}\n"
)


def _try_compile(cc: str, src: str, flags: list[str]) -> bool:
    with tempfile.TemporaryDirectory() as td:
        path = os.path.join(td, "probe.c")
        with open(path, "w") as f:
            f.write(src)
        out = os.path.join(td, "probe")
        r = subprocess.run(
            [cc, *flags, path, "-o", out],
            capture_output=True,
            text=True,
            timeout=120,
        )
        return r.returncode == 0


def probe_toolchain(cc: Optional[str] = None) -> Toolchain:
    """Locate a usable C compiler: ``$OMPAR_CC``, then gcc, cc, clang.
    Raises :class:`ToolchainMissing` when none compiles a trivial program."""
    candidates = []
    if cc:
        candidates.append(cc)
    env_cc = os.environ.get("OMPAR_CC")
    if env_cc:
        candidates.append(env_cc)
    candidates += ["gcc", "cc", "clang"]
    tried: list[str] = []
    for cand in candidates:
        path = shutil.which(cand)
        if path is None:
            tried.append(f"{cand}: not found")
            continue
        if not _try_compile(path, "int main(void){return 0;}\n", ["-O1"]):
            tried.append(f"{cand}: cannot compile a trivial program")
            continue
        ver = subprocess.run(
            [path, "--version"], capture_output=True, text=True
        ).stdout.splitlines()
        version = ver[0] if ver else ""
        openmp = _try_compile(path, _OMP_PROBE, ["-fopenmp", "-O1"])
        tsan = openmp and _try_compile(path, _OMP_PROBE, ["-fopenmp", "-fsanitize=thread", "-O1"])
        asan = openmp and _try_compile(path, _OMP_PROBE, ["-fopenmp", "-fsanitize=address", "-O1"])
        return Toolchain(
            cc=path,
            version=version,
            supports_openmp=openmp,
            supports_tsan=tsan,
            supports_asan=asan,
        )
    raise ToolchainMissing("no working C compiler; tried " + "; ".join(tried))


# --------------------------------------------------------------------------
# kernel harness description
# --------------------------------------------------------------------------


def _linear_extents(func: FunctionDecl, size_param: Optional[str], accesses) -> dict[str, str]:
    """Array extents provably linear in the size parameter.

    An array qualifies when every one of its subscripts is affine over
    single enclosing induction variables (no products like ``i*n``), and
    each such variable's loop has unit step, a constant non-negative lower
    bound, and an upper bound affine in ``size_param`` alone.  The returned
    expression (over ``n``) then strictly bounds every subscript for any
    positive size, so the driver can allocate it instead of the generous
    quadratic fallback.  Arrays that do not qualify are simply absent.
    """
    if size_param is None:
        return {}
    loops_by_id = {
        s.loop_id: s for s in walk_stmts(func.body) if isinstance(s, ForLoop)
    }
    by_array: dict[str, list] = {}
    for a in accesses:
        by_array.setdefault(a.array, []).append(a)

    out: dict[str, str] = {}
    for array, accs in by_array.items():
        ncoef_max = 0
        const_max = 0
        ok = True
        for acc in accs:
            if not acc.affine or acc.subscript is None:
                ok = False
                break
            var_loop: dict[str, ForLoop] = {}
            for lid in acc.loop_context:
                lp = loops_by_id.get(lid)
                if lp is not None:
                    var_loop[lp.var] = lp  # innermost binding wins
            ncoef = 0
            const = max(acc.subscript.constant, 0)
            for atom, c in acc.subscript.terms:
                if len(atom) != 1:
                    ok = False
                    break
                lp = var_loop.get(atom[0])
                if lp is None or lp.step != 1:
                    ok = False
                    break
                lo = lp.lower_affine
                if lo is None or lo.terms or lo.constant < 0:
                    ok = False
                    break
                if c < 0:
                    continue  # largest at the non-negative lower bound: <= 0
                up = lp.upper_affine
                if up is None:
                    ok = False
                    break
                u = 0
                for up_atom, up_c in up.terms:
                    if up_atom != (size_param,) or up_c < 0:
                        ok = False
                        break
                    u = up_c
                if not ok:
                    break
                # the variable stays <= u*n + (upper_constant - 1)
                ncoef += c * u
                const += c * (up.constant - 1)
            if not ok:
                break
            ncoef_max = max(ncoef_max, ncoef)
            const_max = max(const_max, const)
        if ok:
            out[array] = f"{ncoef_max} * n + {max(const_max + 5, 5)}"
    return out


@dataclass
class KernelSpec:
    """How to drive one kernel function: array extents (element-count
    expressions over the size argument ``n``), scalar argument values,
    which arrays to checksum/dump, and optional C setup code that runs
    after the default random fills (e.g. building CSR structure)."""

    func: str
    arrays: dict[str, str]
    scalars: dict[str, str]
    outputs: tuple[str, ...]
    init: str = ""
    default_size: int = 64
    elem_types: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_function(cls, unit: SourceUnit, func: FunctionDecl) -> "KernelSpec":
        accesses = collect_accesses(unit, func.name)
        written = {a.array for a in accesses if a.mode == "write"}
        size_param = next((p.name for p in func.params if not p.is_pointer), None)
        linear = _linear_extents(func, size_param, accesses)
        arrays: dict[str, str] = {}
        scalars: dict[str, str] = {}
        elem_types: dict[str, str] = {}
        saw_size = False
        for p in func.params:
            if p.is_pointer:
                arrays[p.name] = linear.get(p.name, "n * n + 4 * n + 4")
                elem_types[p.name] = p.ctype
            elif not saw_size:
                scalars[p.name] = "n"
                saw_size = True
            else:
                scalars[p.name] = "4"
        outputs = tuple(n for n in arrays if n in written) or tuple(arrays)
        return cls(
            func=func.name,
            arrays=arrays,
            scalars=scalars,
            outputs=outputs,
            elem_types=elem_types,
        )

    def elem_type(self, name: str) -> str:
        return self.elem_types.get(name, "double")

    def count(self, name: str, n: int) -> int:
        """Element count of an array for a given size (the expressions are
        plain arithmetic over ``n`` and the scalar values; scalar
        expressions may reference scalars declared before them, mirroring
        their declaration order in the driver)."""
        env: dict[str, int] = {"n": n}
        for s, expr in self.scalars.items():
            env[s] = int(eval(expr, {"__builtins__": {}}, dict(env)))  # noqa: S307
        return int(eval(self.arrays[name], {"__builtins__": {}}, env))  # noqa: S307

    @property
    def fp_output(self) -> bool:
        return any(self.elem_type(o) in _FP_TYPES for o in self.outputs)


_FILL = {
    "double": "(double)(_sm_next(&_rng) >> 11) * (1.0 / 9007199254740992.0)",
    "float": "(float)((_sm_next(&_rng) >> 40) * (1.0 / 16777216.0))",
    "int": "(int)(_sm_next(&_rng) % 100)",
    "long": "(long)(_sm_next(&_rng) % 1000)",
}

_DRIVER_PRELUDE = """\
#include <stdio.h>
#include <stdlib.h>
#include <stdint.h>
#include <string.h>
#include <math.h>
#include <time.h>

static uint64_t _sm_next(uint64_t *state) {
    uint64_t z = (*state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

static uint64_t _fnv1a(uint64_t h, const void *p, size_t nbytes) {
    const unsigned char *b = (const unsigned char *)p;
    for (size_t i = 0; i < nbytes; i++) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}
"""


def _prototype(unit: SourceUnit, func: FunctionDecl) -> str:
    brace = unit.text.index("{", func.span[0])
    return unit.text[func.span[0] : brace].strip() + ";"


def synthesize_driver(unit: SourceUnit, spec: KernelSpec) -> str:
    """C source of the measurement driver for one kernel."""
    func = unit.function(spec.func)
    if func is None:
        raise ValueError(f"no function {spec.func!r} in {unit.path}")
    lines: list[str] = [_DRIVER_PRELUDE, _prototype(unit, func), ""]
    lines.append("int main(int argc, char **argv) {")
    lines.append("    long long _size = argc > 1 ? atoll(argv[1]) : %d;" % spec.default_size)
    lines.append("    uint64_t _seed = argc > 2 ? strtoull(argv[2], 0, 10) : 1;")
    lines.append("    const char *_dump = argc > 3 ? argv[3] : 0;")
    # kernels index with int expressions, so sizes beyond INT_MAX cannot be
    # addressed correctly no matter how the arrays are allocated
    lines.append("    if (_size < 1 || _size > 2147483647LL) {")
    lines.append('        fprintf(stderr, "size %lld out of range [1, 2147483647]\\n", _size);')
    lines.append("        return 4;")
    lines.append("    }")
    first = True
    for name, expr in spec.scalars.items():
        value = "(int)_size" if expr == "n" and first else f"({expr})"
        if expr == "n" and first:
            first = False
        lines.append(f"    int {name} = {value};")
    n_known = any(v == "n" for v in spec.scalars.values())
    if not n_known:
        lines.append("    int n = (int)_size;")
    # element counts are computed on 64-bit shadows of the int scalars —
    # int arithmetic would silently wrap for large sizes (e.g. n*n at
    # n=65536), desynchronizing the dump from what the comparator expects
    wide = {"n": "_w_n"}
    lines.append("    long long _w_n = _size;")
    for name in spec.scalars:
        if name == "n":
            continue
        wide[name] = f"_w_{name}"
        lines.append(f"    long long _w_{name} = (long long){name};")
    ident = re.compile(r"\b[A-Za-z_]\w*\b")
    for idx, (name, expr) in enumerate(spec.arrays.items()):
        ct = spec.elem_type(name)
        wexpr = ident.sub(lambda m: wide.get(m.group(0), m.group(0)), expr)
        lines.append(f"    long long {name}_elems = ({wexpr});")
        lines.append(f"    if ({name}_elems < 1 || {name}_elems > 2147483647LL) {{")
        lines.append(
            f'        fprintf(stderr, "array {name}: %lld elements out of range\\n", {name}_elems);'
        )
        lines.append("        return 4;")
        lines.append("    }")
        lines.append(f"    size_t {name}_count = (size_t){name}_elems;")
        lines.append(f"    {ct} *{name} = ({ct} *)malloc({name}_count * sizeof({ct}));")
        lines.append(f"    if (!{name}) {{")
        lines.append(f'        fprintf(stderr, "array {name}: allocation of %lld elements failed\\n", {name}_elems);')
        lines.append("        return 4;")
        lines.append("    }")
        lines.append(
            f"    {{ uint64_t _rng = _seed * 0x9E3779B97F4A7C15ull + {idx + 1}u;"
        )
        lines.append(f"      for (size_t _i = 0; _i < {name}_count; _i++) {name}[_i] = {_FILL[ct]}; }}")
    if spec.init:
        lines.append("    {")
        for ln in spec.init.rstrip().splitlines():
            lines.append("        " + ln)
        lines.append("    }")
    call_args = ", ".join(p.name for p in func.params)
    lines.append("    struct timespec _t0, _t1;")
    lines.append("    clock_gettime(CLOCK_MONOTONIC, &_t0);")
    lines.append(f"    {spec.func}({call_args});")
    lines.append("    clock_gettime(CLOCK_MONOTONIC, &_t1);")
    lines.append(
        "    long long _ns = (_t1.tv_sec - _t0.tv_sec) * 1000000000LL + (_t1.tv_nsec - _t0.tv_nsec);"
    )
    lines.append("    uint64_t _h = 1469598103934665603ull;")
    for name in spec.outputs:
        ct = spec.elem_type(name)
        lines.append(f"    _h = _fnv1a(_h, {name}, {name}_count * sizeof({ct}));")
    lines.append("    if (_dump) {")
    lines.append('        FILE *_f = fopen(_dump, "wb");')
    lines.append("        if (!_f) return 3;")
    for name in spec.outputs:
        ct = spec.elem_type(name)
        lines.append(f"        fwrite({name}, sizeof({ct}), {name}_count, _f);")
    lines.append("        fclose(_f);")
    lines.append("    }")
    lines.append('    printf("TIME_NS=%lld\\n", _ns);')
    lines.append('    printf("CHECKSUM=%016llx\\n", (unsigned long long)_h);')
    lines.append("    return 0;")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# building and running
# --------------------------------------------------------------------------

VARIANTS = ("seq", "par", "tsan", "asan")

_VARIANT_FLAGS = {
    "seq": ["-O3"],
    "par": ["-fopenmp", "-O3"],
    "tsan": ["-fopenmp", "-fsanitize=thread", "-O1", "-g"],
    "asan": ["-fopenmp", "-fsanitize=address", "-O1", "-g"],
}

# Fork/join visibility shim, linked into the ``tsan`` variant only.
#
# libgomp synchronizes its thread team with futexes, which ThreadSanitizer
# cannot observe.  Left alone, that blindness makes TSan pair any access
# that follows a parallel region (the next region, serial code between
# regions, the driver's checksum loop) with the writes of the region's
# worker threads and report them as data races — including across two
# executions of the *same* region inside a sequential outer loop, where
# the report's stacks are byte-identical to a genuine race's.
#
# Interposing GOMP_parallel restores exactly the edges that really exist:
# the master's clock is released to every team thread at region entry
# (threads only start after the fork), and every team thread's clock is
# released back to the master at region exit (GOMP_parallel returns only
# after the join).  No edge is invented between two threads of the same
# team inside one region, so a true race between iterations of the
# parallelized loop stays visible.  gcc lowers every ``parallel for``
# schedule through this one entry point (the loop distribution happens
# inside the outlined function), so wrapping it covers all emitted code.
_TSAN_OMP_SYNC_C = """\
#define _GNU_SOURCE
#include <dlfcn.h>

void __tsan_acquire(void *addr);
void __tsan_release(void *addr);

typedef void (*_parallel_entry)(void (*)(void *), void *, unsigned, unsigned);

struct _team_call {
    void (*fn)(void *);
    void *data;
};

static char _fork_token;
static char _join_token;

static void _team_trampoline(void *arg)
{
    struct _team_call *call = (struct _team_call *)arg;
    __tsan_acquire(&_fork_token);
    call->fn(call->data);
    __tsan_release(&_join_token);
}

void GOMP_parallel(void (*fn)(void *), void *data, unsigned num_threads,
                   unsigned flags)
{
    static _parallel_entry real_parallel;
    struct _team_call call;

    if (!real_parallel)
        real_parallel = (_parallel_entry)dlsym(RTLD_NEXT, "GOMP_parallel");
    call.fn = fn;
    call.data = data;
    __tsan_release(&_fork_token);
    real_parallel(_team_trampoline, &call, num_threads, flags);
    __tsan_acquire(&_join_token);
}
"""


def build_variant(
    toolchain: Toolchain,
    kernel_text: str,
    driver_text: str,
    out_dir: str,
    variant: str,
) -> str:
    """Compile one variant; returns the binary path. CompileError carries
    the compiler's stderr."""
    vdir = os.path.join(out_dir, variant)
    os.makedirs(vdir, exist_ok=True)
    kpath = os.path.join(vdir, "kernel.c")
    dpath = os.path.join(vdir, "driver.c")
    with open(kpath, "w") as f:
        f.write(kernel_text)
    with open(dpath, "w") as f:
        f.write(driver_text)
    binary = os.path.join(vdir, "kernel_" + variant)
    sources = [kpath, dpath]
    extra_libs: list[str] = []
    if variant == "tsan":
        spath = os.path.join(vdir, "omp_sync.c")
        with open(spath, "w") as f:
            f.write(_TSAN_OMP_SYNC_C)
        sources.append(spath)
        extra_libs.append("-ldl")
    cmd = [toolchain.cc, *_VARIANT_FLAGS[variant], *sources, "-o", binary, "-lm", *extra_libs]
    r = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
    if r.returncode != 0:
        raise CompileError(
            f"{variant} build failed ({' '.join(cmd)}):\n{r.stderr.strip()[:4000]}"
        )
    return binary


@dataclass
class RunResult:
    rc: int
    stdout: str
    stderr: str
    time_ns: Optional[int]
    checksum: Optional[str]


_TIME_RE = re.compile(r"^TIME_NS=(\d+)$", re.M)
_SUM_RE = re.compile(r"^CHECKSUM=([0-9a-f]+)$", re.M)


def parse_run_output(stdout: str) -> tuple[Optional[int], Optional[str]]:
    t = _TIME_RE.search(stdout)
    c = _SUM_RE.search(stdout)
    return (int(t.group(1)) if t else None, c.group(1) if c else None)


def run_binary(
    binary: str,
    size: int,
    seed: int,
    *,
    dump: Optional[str] = None,
    threads: Optional[int] = None,
    extra_env: Optional[dict[str, str]] = None,
    timeout: float = 300.0,
) -> RunResult:
    env = dict(os.environ)
    if threads is not None:
        env["OMP_NUM_THREADS"] = str(threads)
    if extra_env:
        env.update(extra_env)
    argv = [binary, str(size), str(seed)]
    if dump:
        argv.append(dump)
    try:
        r = subprocess.run(argv, capture_output=True, text=True, env=env, timeout=timeout)
    except subprocess.TimeoutExpired as e:
        raise RuntimeFailure(f"{binary} timed out after {timeout}s at size {size}") from e
    time_ns, checksum = parse_run_output(r.stdout)
    return RunResult(rc=r.returncode, stdout=r.stdout, stderr=r.stderr, time_ns=time_ns, checksum=checksum)


# --------------------------------------------------------------------------
# output comparison
# --------------------------------------------------------------------------

_STRUCT_FMT = {"int": "i", "long": "q", "float": "f", "double": "d"}


def compare_dumps(
    spec: KernelSpec,
    ref_path: str,
    got_path: str,
    n: int,
    rel_tol: float,
) -> Optional[str]:
    """None when equivalent; otherwise a human-readable first mismatch.
    Integer arrays must be bit-exact; floating-point arrays use
    ``|a-b| <= rel_tol * max(1, |a|, |b|)`` elementwise."""
    with open(ref_path, "rb") as f:
        ref = f.read()
    with open(got_path, "rb") as f:
        got = f.read()
    if len(ref) != len(got):
        return f"output size differs: {len(ref)} vs {len(got)} bytes"
    expected = sum(
        spec.count(name, n) * _ELEM_SIZE[spec.elem_type(name)] for name in spec.outputs
    )
    if expected != len(ref):
        return (
            f"dump holds {len(ref)} bytes but the spec expects {expected} "
            f"(driver and spec disagree on output shape)"
        )
    off = 0
    for name in spec.outputs:
        ct = spec.elem_type(name)
        count = spec.count(name, n)
        nbytes = count * _ELEM_SIZE[ct]
        a = ref[off : off + nbytes]
        b = got[off : off + nbytes]
        off += nbytes
        if ct not in _FP_TYPES:
            if a != b:
                fmt = "<" + _STRUCT_FMT[ct]
                size = _ELEM_SIZE[ct]
                for i in range(count):
                    va = struct.unpack_from(fmt, a, i * size)[0]
                    vb = struct.unpack_from(fmt, b, i * size)[0]
                    if va != vb:
                        return f"{name}[{i}]: {va} != {vb} (integer data must be bit-exact)"
                return f"{name}: byte mismatch"
            continue
        fmt = "<" + _STRUCT_FMT[ct]
        size = _ELEM_SIZE[ct]
        for i in range(count):
            va = struct.unpack_from(fmt, a, i * size)[0]
            vb = struct.unpack_from(fmt, b, i * size)[0]
            if va != vb:
                denom = max(1.0, abs(va), abs(vb))
                if not (va == va) or not (vb == vb):  # NaN
                    return f"{name}[{i}]: NaN ({va} vs {vb})"
                if abs(va - vb) > rel_tol * denom:
                    return (
                        f"{name}[{i}]: {va!r} vs {vb!r} exceeds relative tolerance {rel_tol}"
                    )
    return None


# --------------------------------------------------------------------------
# sanitizer report classification
# --------------------------------------------------------------------------

_ACCESS_HEAD = re.compile(
    r"^\s*(Write|Read|Previous write|Previous read|Atomic \w+)\s+of size", re.M
)


def classify_tsan(stderr: str) -> tuple[int, int]:
    """(real_races, total_reports) in a ThreadSanitizer stderr.

    A report is a real race only when BOTH access stacks contain a frame
    from OpenMP outlined user code (``._omp_fn``); libgomp's own runtime
    synchronization trips ThreadSanitizer without such frames, and those
    reports are noise, not kernel bugs.  (Fork/join edges across region
    boundaries are restored at build time by the interposition shim —
    see ``_TSAN_OMP_SYNC_C`` — so with it in place a surviving
    both-stacks report really is an intra-region race.)"""
    total = 0
    real = 0
    blocks = re.split(r"WARNING: ThreadSanitizer: data race", stderr)[1:]
    for block in blocks:
        total += 1
        block = block.split("==================")[0]
        heads = list(_ACCESS_HEAD.finditer(block))
        stacks: list[str] = []
        for i, m in enumerate(heads[:2]):
            start = m.start()
            end = heads[i + 1].start() if i + 1 < len(heads) else len(block)
            stacks.append(block[start:end])
        if len(stacks) == 2 and all("._omp_fn" in s for s in stacks):
            real += 1
    return real, total


# --------------------------------------------------------------------------
# the four-gate pipeline
# --------------------------------------------------------------------------


@dataclass
class VerifyResult:
    kernel: str
    builds_ok: bool
    regression_ok: bool
    tsan_ok: bool
    asan_ok: bool
    rel_tol: float
    details: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.builds_ok and self.regression_ok and self.tsan_ok and self.asan_ok

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "accepted": self.accepted,
            "builds_ok": self.builds_ok,
            "regression_ok": self.regression_ok,
            "tsan_ok": self.tsan_ok,
            "asan_ok": self.asan_ok,
            "rel_tol": self.rel_tol,
            "details": self.details,
        }


def verify_pipeline(
    unit: SourceUnit,
    plan: Plan,
    report: AnalysisReport,
    toolchain: Toolchain,
    *,
    spec: Optional[KernelSpec] = None,
    out_dir: Optional[str] = None,
    size: Optional[int] = None,
    threads: int = 4,
    seeds: tuple[int, ...] = (1, 2, 3),
    transformed_text: Optional[str] = None,
) -> VerifyResult:
    """Build all four variants of the transformed source and run the three
    acceptance checks. Never raises for kernel misbehavior — failures are
    recorded in the result; only harness-level problems (unusable spec,
    missing toolchain features) raise."""
    if spec is None:
        funcs = unit.functions
        if not funcs:
            raise ValueError(f"{unit.path} has no function to verify")
        spec = KernelSpec.from_function(unit, funcs[0])
    name = spec.func
    if size is None:
        size = spec.default_size
    text = transformed_text if transformed_text is not None else generate(unit, plan, report)
    driver = synthesize_driver(unit, spec)
    rel_tol = FP_REDUCTION_REL_TOL if has_fp_reduction(plan, report) else DEFAULT_REL_TOL

    tmp_ctx: Optional[tempfile.TemporaryDirectory] = None
    if out_dir is None:
        tmp_ctx = tempfile.TemporaryDirectory(prefix="ompar_verify_")
        out_dir = tmp_ctx.name
    os.makedirs(out_dir, exist_ok=True)

    result = VerifyResult(
        kernel=name,
        builds_ok=True,
        regression_ok=True,
        tsan_ok=True,
        asan_ok=True,
        rel_tol=rel_tol,
        details={"size": size, "threads": threads, "seeds": list(seeds)},
    )
    try:
        binaries: dict[str, str] = {}
        build_errors: dict[str, str] = {}
        for variant in VARIANTS:
            wanted = (
                variant in ("seq", "par")
                or (variant == "tsan" and toolchain.supports_tsan)
                or (variant == "asan" and toolchain.supports_asan)
            )
            if not wanted:
                result.details[f"{variant}_skipped"] = "toolchain lacks this sanitizer"
                continue
            try:
                binaries[variant] = build_variant(toolchain, text, driver, out_dir, variant)
            except CompileError as e:
                build_errors[variant] = str(e)
        if build_errors:
            result.builds_ok = False
            result.regression_ok = False
            result.tsan_ok = False
            result.asan_ok = False
            result.details["build_errors"] = build_errors
            return result

        # regression over seeds
        mismatches: list[str] = []
        for seed in seeds:
            ref_dump = os.path.join(out_dir, f"ref_{seed}.bin")
            got_dump = os.path.join(out_dir, f"got_{seed}.bin")
            try:
                ref = run_binary(binaries["seq"], size, seed, dump=ref_dump, threads=1)
                got = run_binary(binaries["par"], size, seed, dump=got_dump, threads=threads)
            except RuntimeFailure as e:
                mismatches.append(f"seed {seed}: {e}")
                continue
            if ref.rc != 0 or got.rc != 0:
                mismatches.append(
                    f"seed {seed}: exit codes seq={ref.rc} par={got.rc}; "
                    f"stderr: {(ref.stderr + got.stderr).strip()[:500]}"
                )
                continue
            if not spec.fp_output:
                if ref.checksum != got.checksum:
                    mismatches.append(
                        f"seed {seed}: checksum {ref.checksum} != {got.checksum}"
                    )
                    continue
            diff = compare_dumps(spec, ref_dump, got_dump, size, rel_tol)
            if diff is not None:
                mismatches.append(f"seed {seed}: {diff}")
        if mismatches:
            result.regression_ok = False
            result.details["regression"] = mismatches

        # sanitizers: smaller size, >= 4 threads, three runs
        san_size = max(8, size // 8)
        san_threads = max(4, threads)
        if "tsan" in binaries:
            race_notes: list[str] = []
            for seed in seeds:
                try:
                    r = run_binary(
                        binaries["tsan"],
                        san_size,
                        seed,
                        threads=san_threads,
                        extra_env={"TSAN_OPTIONS": "exitcode=66 halt_on_error=0"},
                    )
                except RuntimeFailure as e:
                    race_notes.append(f"seed {seed}: {e}")
                    result.tsan_ok = False
                    continue
                real, total = classify_tsan(r.stderr)
                if real > 0:
                    result.tsan_ok = False
                    race_notes.append(
                        f"seed {seed}: {real} real data race(s) in {total} report(s)"
                    )
                elif total > 0:
                    race_notes.append(
                        f"seed {seed}: {total} report(s), all runtime-internal noise"
                    )
                if r.rc not in (0, 66):
                    result.tsan_ok = False
                    race_notes.append(f"seed {seed}: tsan binary exit code {r.rc}")
            if race_notes:
                result.details["tsan"] = race_notes
        if "asan" in binaries:
            asan_notes: list[str] = []
            for seed in seeds:
                try:
                    r = run_binary(
                        binaries["asan"],
                        san_size,
                        seed,
                        threads=san_threads,
                        extra_env={"ASAN_OPTIONS": "detect_leaks=0"},
                    )
                except RuntimeFailure as e:
                    asan_notes.append(f"seed {seed}: {e}")
                    result.asan_ok = False
                    continue
                if r.rc != 0 or "AddressSanitizer" in r.stderr:
                    result.asan_ok = False
                    asan_notes.append(
                        f"seed {seed}: exit {r.rc}; {r.stderr.strip()[:500]}"
                    )
            if asan_notes:
                result.details["asan"] = asan_notes
        return result
    finally:
        if tmp_ctx is not None:
            tmp_ctx.cleanup()
