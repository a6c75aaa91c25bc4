"""Property-based cross-checks of the dependence theory and the oracle's
interpreter, driven by hypothesis.

Ground truth for a single-statement loop ``a[c1*i + d1] = a[c2*i + d2] + 1``
is decidable by enumerating the iteration space, which keeps every property
checkable against first principles."""

from __future__ import annotations

import math

from hypothesis import given, settings, strategies as st

from ompar.analysis import analyze
from ompar.cparse import parse
from ompar.oracle import _c_div, _c_mod, brute_force_oracle

coef = st.integers(min_value=0, max_value=4)
pos_coef = st.integers(min_value=1, max_value=4)
const = st.integers(min_value=0, max_value=6)
trip = st.integers(min_value=1, max_value=6)


def _sub(c: int, d: int) -> str:
    if c == 0:
        return str(d)
    term = "i" if c == 1 else f"{c}*i"
    return f"{term} + {d}" if d else term


def _loop_src(c1: int, d1: int, c2: int, d2: int, t: int) -> str:
    return (
        "void f(int* a, int n) {\n"
        f"    for (int i = 0; i < {t}; i++) {{\n"
        f"        a[{_sub(c1, d1)}] = a[{_sub(c2, d2)}] + 1;\n"
        "    }\n"
        "}\n"
    )


def _cross_iteration_conflict(c1: int, d1: int, c2: int, d2: int, t: int) -> bool:
    """Two distinct iterations touch the same cell (write/read or
    write/write) — the enumeration the symbolic tests must agree with."""
    for i1 in range(t):
        for i2 in range(t):
            if i1 == i2:
                continue
            if c1 * i1 + d1 == c2 * i2 + d2:  # write at i1, read at i2
                return True
            if c1 * i1 + d1 == c1 * i2 + d1:  # two writes, same cell
                return True
    return False


def _verdict(c1: int, d1: int, c2: int, d2: int, t: int) -> str:
    unit = parse(_loop_src(c1, d1, c2, d2, t), "prop.c")
    return analyze(unit).entries[0].verdict


@settings(deadline=None)
@given(c1=coef, d1=const, c2=coef, d2=const, t=trip)
def test_parallel_verdicts_are_sound_against_enumeration(c1, d1, c2, d2, t):
    """'parallelizable' may only be claimed when no pair of distinct
    iterations conflicts. The converse need not hold — conservatism is
    allowed, lying is not."""
    if _verdict(c1, d1, c2, d2, t) == "parallelizable":
        assert not _cross_iteration_conflict(c1, d1, c2, d2, t)


@settings(deadline=None)
@given(c1=pos_coef, d1=const, c2=pos_coef, d2=const, t=trip)
def test_divisibility_refutations_are_recognized(c1, d1, c2, d2, t):
    """When gcd(c1, c2) does not divide d2 - d1, the subscripts can never
    collide for any pair of integers, so the analysis must prove
    independence rather than fall back to 'don't know'."""
    if (d2 - d1) % math.gcd(c1, c2) != 0:
        assert _verdict(c1, d1, c2, d2, t) == "parallelizable"


@settings(deadline=None, max_examples=60)
@given(
    c1=coef,
    d1=const,
    c2=coef,
    d2=const,
    t=st.integers(min_value=1, max_value=4),
)
def test_oracle_confirms_conflict_free_loops(c1, d1, c2, d2, t):
    """If enumeration finds no conflicting iteration pair, executing the
    loop under every permutation must give identical memory."""
    if _cross_iteration_conflict(c1, d1, c2, d2, t):
        return
    unit = parse(_loop_src(c1, d1, c2, d2, t), "prop.c")
    env = {"a": [7 * k + 3 for k in range(40)], "n": 40}
    assert brute_force_oracle(unit, "f.L1", env).equivalent


@settings(deadline=None)
@given(
    a=st.integers(min_value=-100, max_value=100),
    b=st.integers(min_value=-100, max_value=100).filter(lambda x: x != 0),
)
def test_integer_division_follows_c_semantics(a, b):
    """Truncation toward zero, remainder carrying the dividend's sign, and
    the division identity — the rules the loop interpreter relies on."""
    q, r = _c_div(a, b), _c_mod(a, b)
    assert q * b + r == a
    assert abs(r) < abs(b)
    assert r == 0 or (r > 0) == (a > 0)
    assert q == math.trunc(a / b)
