"""Plan schema parsing and the six-rule validator."""

import pytest

from conftest import analyze_src

from ompar.analysis import analyze
from ompar.errors import MalformedPlan, UnknownLoopId
from ompar.planning import (
    LoopDirective,
    Plan,
    ReductionClause,
    ScheduleSpec,
    accepted,
    has_fp_reduction,
    heuristic_plan,
    parse_plan,
    plan_from_dict,
    validate,
)

# One function with a variety of verdicts to validate plans against:
#   mix.L1 parallelizable (nest prefix 2), mix.L2 parallelizable,
#   mix.L3 sequential (prefix sum), mix.L4 unknown (indirect write),
#   mix.L5 parallelizable-with-clauses (float + reduction into s).
MIX = """\
void mix(float* a, float* b, float* out, int* idx, int n) {
    float s = 0.0f;
    for (int i = 0; i < n; i++) {
        for (int j = 0; j < n; j++) {
            b[i*n + j] = a[i*n + j] * 2.0f;
        }
    }
    for (int i = 1; i < n; i++) {
        a[i] = a[i-1] + a[i];
    }
    for (int i = 0; i < n; i++) {
        out[idx[i]] = a[i];
    }
    for (int i = 0; i < n; i++) {
        s += a[i];
    }
    out[0] = s;
}
"""


@pytest.fixture(scope="module")
def mix_report():
    _, report = analyze_src(MIX, "mix.c")
    return report


def d(loop_id, **kw):
    return LoopDirective(loop_id=loop_id, **kw)


def rules(plan, report):
    return {v.rule for v in validate(plan, report)}


# ------------------------------------------------------------------ schema


def test_parse_plan_takes_the_last_json_object():
    text = (
        "draft:\n"
        '{"plan_version": 1, "loops": []}\n'
        "final answer:\n"
        '{"plan_version": 1, "loops": [{"loop": "f.L1"}], "rationale": "keep the last"}'
    )
    plan = parse_plan(text)
    assert [x.loop_id for x in plan.directives] == ["f.L1"]
    assert plan.rationale == "keep the last"


def test_parse_plan_reads_fenced_json():
    text = (
        "Answer:\n```json\n"
        '{"plan_version": 1, "loops": [{"loop": "g.L2", "schedule": {"kind": "static", "chunk": 4}}]}\n'
        "```"
    )
    plan = parse_plan(text)
    x = plan.directives[0]
    assert (x.loop_id, x.schedule.kind, x.schedule.chunk) == ("g.L2", "static", 4)


def test_parse_plan_full_directive_fields():
    plan = parse_plan(
        '{"plan_version":1,"loops":[{"loop":"m.L1","collapse":2,'
        '"schedule":{"kind":"dynamic"},"reductions":[{"var":"s","op":"+"}],'
        '"privates":["t"],"num_threads":8,"target":"cpu"}]}'
    )
    x = plan.directives[0]
    assert x.collapse == 2
    assert x.schedule == ScheduleSpec(kind="dynamic", chunk=None)
    assert x.reductions == (ReductionClause(var="s", op="+"),)
    assert x.privates == ("t",)
    assert x.num_threads == 8
    assert x.target == "cpu"


def test_parse_plan_rejects_textual_garbage():
    with pytest.raises(MalformedPlan, match="no JSON object found in the response"):
        parse_plan("I would parallelize the outer loop.")


def test_parse_plan_rejects_wrong_version():
    with pytest.raises(MalformedPlan, match="plan_version must be 1"):
        parse_plan('{"plan_version": 2, "loops": []}')


def test_plan_from_dict_rejects_shape_errors():
    with pytest.raises(MalformedPlan):
        plan_from_dict({"plan_version": 1, "loops": [{"loop": ""}]})
    with pytest.raises(MalformedPlan):
        plan_from_dict({"plan_version": 1, "loops": [{"loop": "f.L1", "collapse": "two"}]})
    with pytest.raises(MalformedPlan):
        plan_from_dict({"plan_version": 1, "loops": [{"loop": "f.L1", "schedule": {"kind": 7}}]})


# ------------------------------------------------------------ rule checks


def test_unknown_loop_id_is_a_harness_error(mix_report):
    with pytest.raises(UnknownLoopId):
        validate(Plan(directives=(d("mix.L99"),)), mix_report)


ADVERSARIAL = [
    # (name, directive-factory, expected rule ids)
    ("carried_flow_dep", lambda: (d("mix.L3"),), {"R1"}),
    ("collapse_into_dependence", lambda: (d("mix.L1", collapse=3),), {"R4"}),
    ("reduction_wrong_op", lambda: (d("mix.L5", reductions=(ReductionClause("s", "*"),)),), {"R2"}),
    ("reduction_unknown_var", lambda: (d("mix.L1", reductions=(ReductionClause("zz", "+"),)),), {"R2"}),
    ("private_not_privatizable", lambda: (d("mix.L1", privates=("s",)),), {"R3"}),
    # bare directive on the reduction loop also leaves its scalar dependence
    # undeclared, so the too-deep collapse arrives together with R1
    ("collapse_deeper_than_nest", lambda: (d("mix.L5", collapse=2),), {"R1", "R4"}),
    ("duplicate_directives", lambda: (d("mix.L1"), d("mix.L1")), {"R5"}),
    ("nested_parallel", lambda: (d("mix.L1"), d("mix.L2")), {"R5"}),
    ("bad_schedule_kind", lambda: (d("mix.L1", schedule=ScheduleSpec("fastest")),), {"R5"}),
    ("chunked_auto_schedule", lambda: (d("mix.L1", schedule=ScheduleSpec("auto", chunk=2)),), {"R5"}),
    ("zero_chunk", lambda: (d("mix.L1", schedule=ScheduleSpec("static", chunk=0)),), {"R5"}),
    ("zero_threads", lambda: (d("mix.L1", num_threads=0),), {"R5"}),
    # the overlapping private is itself not a privatizable variable (R3)
    ("reduction_and_private_overlap", lambda: (
        d("mix.L5", reductions=(ReductionClause("s", "+"),), privates=("s",)),), {"R3", "R5"}),
    ("gpu_target_reserved", lambda: (d("mix.L1", target="gpu"),), {"R5"}),
    ("unknown_verdict_loop", lambda: (d("mix.L4"),), {"R6"}),
]


@pytest.mark.parametrize("name,mk,expected", ADVERSARIAL, ids=[a[0] for a in ADVERSARIAL])
def test_adversarial_plan_is_rejected(mix_report, name, mk, expected):
    plan = Plan(directives=tuple(mk()))
    got = rules(plan, mix_report)
    assert got == expected
    assert not accepted(plan, mix_report)


def test_adversarial_catalogue_is_large_enough():
    assert len(ADVERSARIAL) >= 10


# ------------------------------------------------------- positive checks


def test_clean_directives_validate(mix_report):
    ok = Plan(directives=(d("mix.L1", collapse=2, schedule=ScheduleSpec("static")),))
    assert validate(ok, mix_report) == []
    assert accepted(ok, mix_report)

    red = Plan(directives=(d("mix.L5", reductions=(ReductionClause("s", "+"),)),))
    assert validate(red, mix_report) == []


def test_empty_plan_is_valid_but_does_nothing(mix_report):
    empty = Plan()
    assert validate(empty, mix_report) == []
    assert accepted(empty, mix_report)
    assert empty.directives == ()


def test_heuristic_plan_on_matmul(matmul_unit):
    report = analyze(matmul_unit)
    plan = heuristic_plan(report)
    assert len(plan.directives) == 1
    x = plan.directives[0]
    assert x.loop_id == "matmul.L1"
    assert x.collapse == 2
    assert x.schedule.kind == "dynamic"
    assert x.reductions == ()
    assert x.privates == ("C_priv",)
    assert validate(plan, report) == []


def test_heuristic_plan_declines_an_all_unknown_unit():
    _, report = analyze_src(
        "void scatter(float* a, int* idx, float* x, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        a[idx[i]] = x[i];\n"
        "    }\n"
        "}\n",
        "scatter.c",
    )
    assert heuristic_plan(report).directives == ()


def test_has_fp_reduction(mix_report, matmul_unit):
    red_plan = Plan(directives=(d("mix.L5", reductions=(ReductionClause("s", "+"),)),))
    assert has_fp_reduction(red_plan, mix_report)
    plain = Plan(directives=(d("mix.L1"),))
    assert not has_fp_reduction(plain, mix_report)
