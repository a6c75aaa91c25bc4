"""Dependence analysis verdicts on canonical loop shapes."""

import json

from conftest import analyze_src

from ompar.analysis import REDUCTION_OPS


def verdict_of(src: str, loop_id: str):
    _, report = analyze_src(src)
    return report.loop(loop_id)


def test_reduction_ops_catalogue():
    assert REDUCTION_OPS == ("+", "*", "min", "max", "&", "|", "^")


def test_elementwise_fill_is_parallelizable():
    e = verdict_of(
        "void fill(float* a, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        a[i] = 0.0f;\n"
        "    }\n"
        "}\n",
        "fill.L1",
    )
    assert e.verdict == "parallelizable"
    assert e.dependences == ()
    assert e.unknown_causes == ()


def test_scalar_sum_is_a_float_plus_reduction():
    e = verdict_of(
        "float sum(float* a, int n) {\n"
        "    float s = 0.0f;\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        s += a[i];\n"
        "    }\n"
        "    return s;\n"
        "}\n",
        "sum.L1",
    )
    assert e.verdict == "parallelizable-with-clauses"
    assert [(r.variable, r.op, r.fp) for r in e.reductions] == [("s", "+", True)]


def test_product_reduction():
    e = verdict_of(
        "float prod(float* a, int n) {\n"
        "    float p = 1.0f;\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        p *= a[i];\n"
        "    }\n"
        "    return p;\n"
        "}\n",
        "prod.L1",
    )
    assert e.verdict == "parallelizable-with-clauses"
    assert [(r.variable, r.op) for r in e.reductions] == [("p", "*")]


def test_guarded_count_is_an_integer_reduction():
    e = verdict_of(
        "int countpos(float* a, int n) {\n"
        "    int c = 0;\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        if (a[i] > 0.0f) {\n"
        "            c += 1;\n"
        "        }\n"
        "    }\n"
        "    return c;\n"
        "}\n",
        "countpos.L1",
    )
    assert e.verdict == "parallelizable-with-clauses"
    assert [(r.variable, r.op, r.fp) for r in e.reductions] == [("c", "+", False)]
    assert e.has_conditional


def test_min_through_guard_is_a_min_reduction():
    e = verdict_of(
        "float minval(float* a, int n) {\n"
        "    float m = a[0];\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        if (a[i] < m) {\n"
        "            m = a[i];\n"
        "        }\n"
        "    }\n"
        "    return m;\n"
        "}\n",
        "minval.L1",
    )
    assert e.verdict == "parallelizable-with-clauses"
    assert [(r.variable, r.op) for r in e.reductions] == [("m", "min")]


def test_prefix_sum_is_sequential():
    e = verdict_of(
        "void prefix(float* a, int n) {\n"
        "    for (int i = 1; i < n; i++) {\n"
        "        a[i] = a[i-1] + a[i];\n"
        "    }\n"
        "}\n",
        "prefix.L1",
    )
    assert e.verdict == "sequential"
    kinds = {(d.kind, d.distance) for d in e.dependences}
    assert ("flow", 1) in kinds


def test_neighbour_read_is_a_carried_anti_dependence():
    e = verdict_of(
        "void shift(float* a, int n) {\n"
        "    for (int i = 0; i < n - 1; i++) {\n"
        "        a[i] = a[i+1];\n"
        "    }\n"
        "}\n",
        "shift.L1",
    )
    assert e.verdict == "sequential"
    assert [(d.kind, d.distance) for d in e.dependences] == [("anti", 1)]


def test_scalar_live_out_without_pattern_is_sequential():
    e = verdict_of(
        "float last(float* a, int n) {\n"
        "    float t = 0.0f;\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        t = a[i];\n"
        "    }\n"
        "    return t;\n"
        "}\n",
        "last.L1",
    )
    assert e.verdict == "sequential"


def test_indirect_write_is_unknown():
    e = verdict_of(
        "void scatter(float* a, int* idx, float* x, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        a[idx[i]] = x[i];\n"
        "    }\n"
        "}\n",
        "scatter.L1",
    )
    assert e.verdict == "unknown"
    assert "non-affine array access" in e.unknown_causes


def test_indirect_read_of_read_only_array_is_harmless():
    e = verdict_of(
        "void gather(float* out, float* table, int* idx, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        out[i] = table[idx[i]];\n"
        "    }\n"
        "}\n",
        "gather.L1",
    )
    assert e.verdict == "parallelizable"
    assert e.unknown_causes == ()


def test_indirect_access_to_a_written_array_is_unknown():
    e = verdict_of(
        "void bump(float* a, int* idx, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        a[idx[i]] = a[i] + 1.0f;\n"
        "    }\n"
        "}\n",
        "bump.L1",
    )
    assert e.verdict == "unknown"
    assert "non-affine array access" in e.unknown_causes


def test_non_unit_step_is_reported_as_unknown():
    e = verdict_of(
        "void even(float* a, int n) {\n"
        "    for (int i = 0; i < n; i += 2) {\n"
        "        a[i] = 1.0f;\n"
        "    }\n"
        "}\n",
        "even.L1",
    )
    assert e.verdict == "unknown"
    assert "non-unit step 2" in e.unknown_causes


def test_outer_scope_temp_is_privatizable():
    e = verdict_of(
        "void axpy2(float* a, float* b, int n) {\n"
        "    float t;\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        t = a[i] * 2.0f;\n"
        "        b[i] = t + 1.0f;\n"
        "    }\n"
        "}\n",
        "axpy2.L1",
    )
    assert e.verdict == "parallelizable-with-clauses"
    assert [(p.variable, p.body_local) for p in e.privatizable] == [("t", False)]


def test_body_local_temp_needs_no_clause():
    e = verdict_of(
        "void axpy3(float* a, float* b, int n) {\n"
        "    for (int i = 0; i < n; i++) {\n"
        "        float t = a[i] * 2.0f;\n"
        "        b[i] = t + 1.0f;\n"
        "    }\n"
        "}\n",
        "axpy3.L1",
    )
    assert e.verdict == "parallelizable"
    assert [(p.variable, p.body_local) for p in e.privatizable] == [("t", True)]


def test_matmul_nest_verdicts(matmul_unit):
    from ompar.analysis import analyze

    report = analyze(matmul_unit)
    l1, l2, l3 = (report.loop(f"matmul.L{i}") for i in (1, 2, 3))
    assert l1.verdict == "parallelizable"
    assert l1.perfect_nest_prefix == 2
    assert l1.bounds == "[0, n)"
    assert l1.has_inner_loop and not l1.has_conditional
    assert l2.verdict == "parallelizable"
    assert l2.ancestors == ("matmul.L1",)
    assert l3.verdict == "parallelizable-with-clauses"


def test_matmul_innermost_cell_accumulator(matmul_unit):
    from ompar.analysis import analyze

    report = analyze(matmul_unit)
    l3 = report.loop("matmul.L3")
    assert len(l3.cells) == 1
    cell = l3.cells[0]
    assert cell.array == "C"
    assert cell.op == "+"
    assert cell.elem_type == "float"
    assert cell.synthetic_name == "C_priv"
    assert cell.cell_text == "C[i*n + j]"
    assert [(r.variable, r.op, r.fp, r.synthetic) for r in l3.reductions] == [
        ("C_priv", "+", True, True)
    ]


def test_double_buffered_sweep_verdicts(corpus_dir):
    import os

    from ompar.analysis import analyze
    from ompar.cparse import parse

    src = open(os.path.join(corpus_dir, "jacobi", "jacobi.c")).read()
    report = analyze(parse(src, "jacobi.c"))
    assert report.loop("jacobi.L1").verdict == "sequential"
    assert report.loop("jacobi.L2").verdict == "parallelizable"
    assert report.loop("jacobi.L2").perfect_nest_prefix == 2
    assert report.loop("jacobi.L4").verdict == "parallelizable"


def test_csr_sweep_with_read_only_gather(corpus_dir):
    import os

    from ompar.analysis import analyze
    from ompar.cparse import parse

    src = open(os.path.join(corpus_dir, "pagerank", "pagerank.c")).read()
    report = analyze(parse(src, "pagerank.c"))
    # outer power iteration carries rank <-> tmp through the copy-back
    assert report.loop("pagerank.L1").verdict == "unknown"
    # the per-vertex sweep only gathers from arrays nothing in it writes
    assert report.loop("pagerank.L2").verdict == "parallelizable"
    l3 = report.loop("pagerank.L3")
    assert l3.verdict == "parallelizable-with-clauses"
    assert [(r.variable, r.op) for r in l3.reductions] == [("s", "+")]
    assert report.loop("pagerank.L4").verdict == "parallelizable"


def test_report_json_is_loadable_and_complete(matmul_unit):
    from ompar.analysis import analyze

    report = analyze(matmul_unit)
    doc = json.loads(report.to_json())
    assert sorted(doc.keys()) == ["loops", "unit"]
    assert [entry["loop"] for entry in doc["loops"]] == [
        "matmul.L1",
        "matmul.L2",
        "matmul.L3",
    ]
    by_id = {entry["loop"]: entry for entry in doc["loops"]}
    assert by_id["matmul.L1"]["verdict"] == "parallelizable"
    assert by_id["matmul.L3"]["reductions"][0]["variable"] == "C_priv"
    assert report.loop_ids() == ("matmul.L1", "matmul.L2", "matmul.L3")
