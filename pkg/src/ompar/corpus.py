"""Loader for an on-disk kernel corpus.

A corpus is a directory of kernel subdirectories. Each kernel directory
holds, per the corpus contract:

* ``<name>.c`` (or the file named by ``source:``) — the kernel function in
  restricted C, self-contained, no includes;
* ``meta.txt`` — ``key: value`` lines (``#`` comments allowed):

  - ``name``, ``func`` — kernel and entry-function names;
  - ``arrays`` — space-separated ``param=count-expr`` pairs; count
    expressions are plain arithmetic over ``n`` and the scalar parameters
    (no spaces inside an expression);
  - ``scalars`` — ``param=value-expr`` pairs; the expression ``n`` binds
    that parameter to the driver's size argument; an expression may
    reference scalars declared earlier on the line (they are emitted as C
    declarations in order);
  - ``outputs`` — space-separated array parameters to checksum and dump;
  - ``default_size`` / ``bench_size`` — driver sizes for verification and
    timing;
  - ``init_file`` — optional C fragment run after the default random
    fills (e.g. building CSR offsets);
  - ``complexity``, ``status`` — informational labels.

The loader turns each kernel into a parsed unit plus a
:class:`~ompar.verify.KernelSpec`; nothing else in the corpus directory is
interpreted, so the corpus can carry its own build files and tests.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from .cparse import parse
from .errors import ConfigError
from .ir import SourceUnit
from .verify import (
    KernelSpec,
    Toolchain,
    build_variant,
    run_binary,
    synthesize_driver,
)


@dataclass
class CorpusKernel:
    name: str
    directory: str
    source_path: str
    unit: SourceUnit
    spec: KernelSpec
    bench_size: int
    complexity: str = ""
    status: str = ""


def parse_meta(text: str, *, where: str = "meta.txt") -> dict[str, str]:
    meta: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ConfigError(f"{where}:{lineno}: expected 'key: value', got {line!r}")
        key, _, value = line.partition(":")
        meta[key.strip()] = value.strip()
    return meta


def _pairs(raw: str, *, key: str, where: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in raw.split():
        if "=" not in item:
            raise ConfigError(f"{where}: {key} entry {item!r} is not name=expr")
        name, _, expr = item.partition("=")
        out[name] = expr
    return out


def load_kernel(directory: str) -> CorpusKernel:
    meta_path = os.path.join(directory, "meta.txt")
    if not os.path.isfile(meta_path):
        raise ConfigError(f"{directory} has no meta.txt")
    with open(meta_path, "r", encoding="utf-8") as f:
        meta = parse_meta(f.read(), where=meta_path)
    for required in ("name", "func"):
        if required not in meta:
            raise ConfigError(f"{meta_path}: missing required key {required!r}")
    name = meta["name"]
    src_name = meta.get("source", f"{name}.c")
    src_path = os.path.join(directory, src_name)
    if not os.path.isfile(src_path):
        raise ConfigError(f"{meta_path} names source {src_name!r}, which does not exist")
    with open(src_path, "r", encoding="utf-8") as f:
        unit = parse(f.read(), path=src_path)
    func = unit.function(meta["func"])
    if func is None:
        raise ConfigError(f"{src_path} has no function {meta['func']!r}")

    arrays = _pairs(meta.get("arrays", ""), key="arrays", where=meta_path)
    scalars = _pairs(meta.get("scalars", ""), key="scalars", where=meta_path)
    outputs = tuple(meta.get("outputs", "").split())
    init = ""
    if "init_file" in meta:
        init_path = os.path.join(directory, meta["init_file"])
        if not os.path.isfile(init_path):
            raise ConfigError(f"{meta_path} names init_file {meta['init_file']!r}, missing")
        with open(init_path, "r", encoding="utf-8") as f:
            init = f.read()

    elem_types = {p.name: p.ctype for p in func.params if p.is_pointer}
    for a in arrays:
        if a not in elem_types:
            raise ConfigError(f"{meta_path}: arrays names {a!r}, not a pointer parameter")
    for o in outputs:
        if o not in arrays:
            raise ConfigError(f"{meta_path}: outputs names {o!r}, not in arrays")
    pointer_params = set(elem_types)
    if set(arrays) != pointer_params:
        missing = sorted(pointer_params - set(arrays))
        raise ConfigError(f"{meta_path}: arrays missing extents for {', '.join(missing)}")

    default_size = int(meta.get("default_size", "64"))
    spec = KernelSpec(
        func=meta["func"],
        arrays=arrays,
        scalars=scalars,
        outputs=outputs or tuple(arrays),
        init=init,
        default_size=default_size,
        elem_types=elem_types,
    )
    return CorpusKernel(
        name=name,
        directory=directory,
        source_path=src_path,
        unit=unit,
        spec=spec,
        bench_size=int(meta.get("bench_size", str(default_size))),
        complexity=meta.get("complexity", ""),
        status=meta.get("status", ""),
    )


def load_corpus(root: str) -> list[CorpusKernel]:
    if not os.path.isdir(root):
        raise ConfigError(f"corpus root {root!r} is not a directory")
    kernels: list[CorpusKernel] = []
    for entry in sorted(os.listdir(root)):
        d = os.path.join(root, entry)
        if os.path.isdir(d) and os.path.isfile(os.path.join(d, "meta.txt")):
            kernels.append(load_kernel(d))
    if not kernels:
        raise ConfigError(f"no kernels (subdirectories with meta.txt) under {root!r}")
    return kernels


def check_kernel(kernel: CorpusKernel, toolchain: Toolchain, *, size: Optional[int] = None) -> tuple[bool, str]:
    """Contract check for one corpus kernel: the untransformed source must
    build with its synthesized driver and emit well-formed TIME_NS and
    CHECKSUM lines."""
    import tempfile

    size = size if size is not None else max(8, kernel.spec.default_size // 4)
    try:
        driver = synthesize_driver(kernel.unit, kernel.spec)
    except Exception as e:  # spec/driver mismatch is a contract violation
        return False, f"driver synthesis failed: {e}"
    with tempfile.TemporaryDirectory(prefix="ompar_corpus_") as td:
        try:
            binary = build_variant(toolchain, kernel.unit.text, driver, td, "seq")
        except Exception as e:
            return False, f"build failed: {e}"
        r = run_binary(binary, size, 1, threads=1)
        if r.rc != 0:
            return False, f"run exited {r.rc}: {r.stderr.strip()[:300]}"
        if r.time_ns is None or r.checksum is None:
            return False, f"output lacked TIME_NS/CHECKSUM lines: {r.stdout[:200]!r}"
    return True, f"ok (checksum {r.checksum})"
