"""Parser, spans, and the splice-based re-emitter."""

import pytest

from ompar.cparse import Edit, emit, parse, tokenize
from ompar.errors import AnchorError, CSyntaxError, RewriteConflict
from ompar.ir import (
    Assign,
    BinOp,
    CompoundAssign,
    Decl,
    ForLoop,
    If,
    IndexExpr,
    OpaqueStmt,
    VarRef,
    walk_stmts,
)

SIMPLE = """\
void scale(float* a, int n) {
    for (int i = 0; i < n; i++) {
        a[i] = a[i] * 2.0f;
    }
}
"""


def test_emit_identity_is_byte_exact():
    unit = parse(SIMPLE, "scale.c")
    assert emit(unit) == SIMPLE
    assert unit.text == SIMPLE


def test_function_and_loop_shape():
    unit = parse(SIMPLE, "scale.c")
    assert [f.name for f in unit.functions] == ["scale"]
    f = unit.functions[0]
    assert [(p.name, p.is_pointer) for p in f.params] == [("a", True), ("n", False)]
    loops = list(f.loops())
    assert len(loops) == 1
    loop = loops[0]
    assert loop.loop_id == "scale.L1"
    assert loop.var == "i"
    assert loop.line == 2


def test_spans_slice_back_to_source():
    unit = parse(SIMPLE, "scale.c")
    loop = unit.loop_by_id("scale.L1")
    text = unit.slice(loop.span)
    assert text.startswith("for (int i = 0;")
    assert text.endswith("}")
    body_stmt = loop.body[0]
    assert unit.slice(body_stmt.span) == "a[i] = a[i] * 2.0f;"


def test_edit_before_inserts_own_line_above_anchor():
    unit = parse(SIMPLE, "scale.c")
    loop = unit.loop_by_id("scale.L1")
    out = emit(unit, [Edit(loop.span, "before", "    #pragma omp parallel for\n")])
    lines = out.splitlines()
    assert lines[1] == "    #pragma omp parallel for"
    assert lines[2].lstrip().startswith("for (int i = 0;")


def test_edit_after_inserts_below_anchor_end():
    unit = parse(SIMPLE, "scale.c")
    stmt = unit.loop_by_id("scale.L1").body[0]
    out = emit(unit, [Edit(stmt.span, "after", "        a[i] = a[i] + 1.0f;\n")])
    assert "a[i] = a[i] * 2.0f;\n        a[i] = a[i] + 1.0f;" in out


def test_edit_replace_swaps_exact_byte_range():
    unit = parse(SIMPLE, "scale.c")
    stmt = unit.loop_by_id("scale.L1").body[0]
    out = emit(unit, [Edit(stmt.span, "replace", "a[i] = 0.0f;")])
    assert "a[i] = 0.0f;" in out
    assert "2.0f" not in out


def test_edits_at_distinct_positions_apply_in_order():
    unit = parse(SIMPLE, "scale.c")
    loop = unit.loop_by_id("scale.L1")
    stmt = loop.body[0]
    out = emit(
        unit,
        [
            Edit(stmt.span, "after", "        /* tail */\n"),
            Edit(loop.span, "before", "    /* head */\n"),
        ],
    )
    assert out.index("/* head */") < out.index("for (int i") < out.index("/* tail */")


def test_overlapping_replacements_conflict():
    unit = parse(SIMPLE, "scale.c")
    loop = unit.loop_by_id("scale.L1")
    stmt = loop.body[0]
    with pytest.raises(RewriteConflict):
        emit(
            unit,
            [
                Edit(loop.span, "replace", "/* gone */"),
                Edit(stmt.span, "replace", "/* also gone */"),
            ],
        )


def test_foreign_span_is_rejected():
    unit = parse(SIMPLE, "scale.c")
    with pytest.raises(AnchorError):
        emit(unit, [Edit((1, 5), "replace", "nope")])


def test_unbraced_for_body_is_parsed():
    src = "void f(float* a, int n) {\n    for (int i = 0; i < n; i++)\n        a[i] = 0.0f;\n}\n"
    unit = parse(src, "un.c")
    loop = unit.loop_by_id("f.L1")
    assert loop is not None
    assert len(loop.body) == 1
    assert emit(unit) == src


def test_nested_loops_get_document_order_ids():
    src = (
        "void g(float* a, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        for (int j = 0; j < n; j++) {\n"
        "            a[i*n + j] = 0.0f;\n"
        "        }\n"
        "    }\n"
        "    for (int k = 0; k < n; k++) {\n"
        "        a[k] = 1.0f;\n"
        "    }\n"
        "}\n"
    )
    unit = parse(src, "g.c")
    ids = [loop.loop_id for _, loop in unit.loops()]
    assert ids == ["g.L1", "g.L2", "g.L3"]
    l1 = unit.loop_by_id("g.L1")
    l2 = unit.loop_by_id("g.L2")
    assert l2.span[0] > l1.span[0] and l2.span[1] < l1.span[1]


def test_out_of_subset_statement_degrades_to_opaque():
    src = (
        "void h(float* a, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        switch (n) { default: break; }\n"
        "    }\n"
        "}\n"
    )
    unit = parse(src, "h.c")
    loop = unit.loop_by_id("h.L1")
    kinds = [type(st).__name__ for st in walk_stmts(loop.body)]
    assert "OpaqueStmt" in kinds
    assert emit(unit) == src


def test_structural_breakage_raises_with_location():
    with pytest.raises(CSyntaxError) as exc:
        parse("void f(int n) {\n    for (int i = 0; i < n; i++) {\n", "broken.c")
    msg = str(exc.value)
    assert "line 2" in msg
    assert exc.value.line == 2


def test_statement_node_variety():
    src = (
        "void v(float* a, int n) {\n"
        "    int t = 0;\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        t += 1;\n"
        "        if (a[i] > 0.0f) {\n"
        "            a[i] = a[i] - 1.0f;\n"
        "        }\n"
        "    }\n"
        "    a[0] = t;\n"
        "}\n"
    )
    unit = parse(src, "v.c")
    f = unit.functions[0]
    kinds = {type(s).__name__ for s in walk_stmts(f.body)}
    assert {"Decl", "ForLoop", "CompoundAssign", "If", "Assign"} <= kinds
    assert emit(unit) == src


def test_expression_shapes():
    unit = parse(SIMPLE, "scale.c")
    stmt = unit.loop_by_id("scale.L1").body[0]
    assert isinstance(stmt, Assign)
    assert isinstance(stmt.target, IndexExpr)
    assert isinstance(stmt.target.base, VarRef)
    assert isinstance(stmt.value, BinOp)
    assert stmt.value.op == "*"


def test_tokenize_reports_positions():
    toks = tokenize("int x = 1;\n", "t.c")
    assert toks[0].text == "int"
    assert toks[0].line == 1
    kinds = [t.text for t in toks if t.text]
    assert "x" in kinds and "=" in kinds and "1" in kinds


def test_loop_lookup_helpers():
    unit = parse(SIMPLE, "scale.c")
    assert unit.function("scale") is not None
    assert unit.function("missing") is None
    assert unit.loop_by_id("scale.L9") is None
    assert unit.loop_at_line(2).loop_id == "scale.L1"
    assert unit.function_of_loop("scale.L1").name == "scale"
