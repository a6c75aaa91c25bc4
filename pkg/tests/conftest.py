"""Shared fixtures: the host toolchain, the kernel corpus, and helpers
used by several test modules."""

from __future__ import annotations

import os

import pytest

from ompar.analysis import AnalysisReport, analyze
from ompar.cparse import parse
from ompar.ir import SourceUnit
from ompar.verify import Toolchain, probe_toolchain

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS_DIR = os.path.join(REPO_ROOT, "kernels")


def analyze_src(src: str, path: str = "<test>") -> tuple[SourceUnit, AnalysisReport]:
    unit = parse(src, path)
    return unit, analyze(unit)


@pytest.fixture(scope="session")
def toolchain() -> Toolchain:
    tc = probe_toolchain()
    if not tc.supports_openmp:
        pytest.skip("host compiler cannot build OpenMP programs")
    return tc


@pytest.fixture(scope="session")
def corpus_dir() -> str:
    if not os.path.isdir(CORPUS_DIR):
        pytest.skip("kernel corpus directory not present")
    return CORPUS_DIR


@pytest.fixture()
def matmul_unit(corpus_dir) -> SourceUnit:
    path = os.path.join(corpus_dir, "matmul", "matmul.c")
    return parse(open(path).read(), "matmul.c")
