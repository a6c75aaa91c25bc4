"""Executable ground truth: loops re-run under permuted iteration orders."""

import pytest

from ompar.cparse import parse
from ompar.errors import OracleOverflow
from ompar.oracle import brute_force_oracle, copy_env, run_function, run_loop

SCALE = """\
void scale(float* a, int n) {
    for (int i = 0; i < n; i++) {
        a[i] = a[i] * 2.0f;
    }
}
"""

PREFIX = """\
void prefix(float* a, int n) {
    for (int i = 1; i < n; i++) {
        a[i] = a[i-1] + a[i];
    }
}
"""

SUM = """\
float sum(float* a, int n) {
    float s = 0.0f;
    for (int i = 0; i < n; i++) {
        s += a[i];
    }
    return s;
}
"""


def test_order_independent_loop_passes_all_permutations():
    unit = parse(SCALE, "scale.c")
    env = {"a": [1.0, 2.0, 3.0, 4.0, 5.0], "n": 5}
    r = brute_force_oracle(unit, "scale.L1", env)
    assert r.equivalent is True
    assert r.trip == 5
    # 5! - 1 non-identity orders, exhaustively
    assert r.permutations_tested == 119
    assert r.mode == "full"
    assert r.counterexample is None


def test_oracle_does_not_mutate_the_caller_env():
    unit = parse(SCALE, "scale.c")
    env = {"a": [1.0, 2.0], "n": 2}
    brute_force_oracle(unit, "scale.L1", env)
    assert env == {"a": [1.0, 2.0], "n": 2}


def test_order_dependent_loop_yields_a_concrete_counterexample():
    unit = parse(PREFIX, "prefix.c")
    env = {"a": [1.0, 2.0, 3.0, 4.0, 5.0], "n": 5}
    r = brute_force_oracle(unit, "prefix.L1", env)
    assert r.equivalent is False
    assert r.trip == 4
    assert r.mode == "full"
    # the very first non-identity order already disagrees
    assert r.permutations_tested == 1
    assert r.counterexample == {
        "name": "a[4]",
        "expected": 15.0,
        "got": 9.0,
        "order": [0, 1, 3, 2],
    }


def test_fp_reduction_needs_tolerance():
    unit = parse(SUM, "sum.c")
    # values chosen so fp addition is associative enough at tolerance 1e-6
    env = {"a": [0.5, 0.25, 0.125, 1.0], "n": 4, "s": 0.0}
    strict = brute_force_oracle(unit, "sum.L1", env)
    assert strict.equivalent is True  # exactly representable sums
    env2 = {"a": [0.1, 0.2, 0.3, 0.4], "n": 4, "s": 0.0}
    loose = brute_force_oracle(unit, "sum.L1", env2, tolerance=1e-6)
    assert loose.equivalent is True


def test_excluded_names_are_not_compared():
    unit = parse(PREFIX, "prefix.c")
    env = {"a": [1.0, 2.0, 3.0, 4.0, 5.0], "n": 5}
    r = brute_force_oracle(unit, "prefix.L1", env, exclude=("a",))
    assert r.equivalent is True  # nothing left to disagree on


def test_large_trip_counts_fall_back_to_sampling():
    unit = parse(SCALE, "scale.c")
    env = {"a": [float(i) for i in range(10)], "n": 10}
    r = brute_force_oracle(unit, "scale.L1", env, samples=50, seed=3)
    assert r.equivalent is True
    assert r.trip == 10
    assert r.mode == "sampled"
    assert r.permutations_tested == 50


def test_trip_at_most_one_is_trivially_equivalent():
    unit = parse(SCALE, "scale.c")
    r = brute_force_oracle(unit, "scale.L1", {"a": [1.0], "n": 1})
    assert r.equivalent is True
    assert r.mode == "trivial"
    assert r.permutations_tested == 0


def test_run_loop_uses_c_division_semantics():
    unit = parse(
        "void cdiv(int* q, int* r, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        q[i] = (0 - 7) / 2;\n"
        "        r[i] = (0 - 7) % 2;\n"
        "    }\n"
        "}\n",
        "cdiv.c",
    )
    out = run_loop(unit, "cdiv.L1", {"q": [0], "r": [0], "n": 1})
    # C truncates toward zero; Python floors. The interpreter must follow C.
    assert out["q"] == [-3]
    assert out["r"] == [-1]


def test_run_loop_honours_an_explicit_order():
    unit = parse(PREFIX, "prefix.c")
    env = {"a": [1.0, 2.0, 3.0, 4.0, 5.0], "n": 5}
    seq = run_loop(unit, "prefix.L1", env)
    assert seq["a"] == [1.0, 3.0, 6.0, 10.0, 15.0]
    swapped = run_loop(unit, "prefix.L1", env, order=[0, 1, 3, 2])
    assert swapped["a"][4] == 9.0


def test_run_function_executes_whole_body():
    unit = parse(
        "void total(float* a, float* out, int n) {\n"
        "    float s = 0.0f;\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        s += a[i];\n"
        "    }\n"
        "    out[0] = s;\n"
        "}\n",
        "total.c",
    )
    env = {"a": [1.0, 2.0, 3.0], "out": [0.0], "n": 3}
    out = run_function(unit, "total", env)
    assert out["out"] == [6.0]
    assert out["s"] == 6.0


def test_copy_env_is_deep_for_arrays():
    env = {"a": [1.0, 2.0], "n": 2}
    dup = copy_env(env)
    dup["a"][0] = 99.0
    assert env["a"][0] == 1.0


def test_max_trip_guard():
    unit = parse(SCALE, "scale.c")
    env = {"a": [0.0] * 1000, "n": 1000}
    with pytest.raises(OracleOverflow):
        brute_force_oracle(unit, "scale.L1", env, max_trip=512)
