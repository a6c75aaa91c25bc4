"""OpenMP pragma insertion and accumulator scalarization.

Transforms are byte-surgical edits against the original text, so untouched
code re-emits byte-identical. Per active plan directive:

* a ``#pragma omp parallel for`` line is inserted directly above the loop,
  clauses in canonical order ``collapse``, ``schedule``, ``reduction``,
  ``private`` (then ``num_threads``);
* clause filtering: body-local privatizable variables never become
  ``private`` clauses (they are scoped inside the region already), and
  synthetic accumulator names become ``private`` clauses never — they are
  *realized* by scalarization instead;
* scalarization rewrites a compound accumulation into an array cell
  (``C[i*n+j] += ...``) to go through a fresh local scalar: declare it
  before the accumulation loop (absorbing an adjacent initialization of the
  same cell when present, else starting from the operator's identity),
  retarget the accumulation statements, and write the scalar back after the
  loop (plain assignment when the initialization was absorbed, else a
  compound/if update that preserves the cell's prior value).

``generate`` trusts the plan's intent but not its safety — safety is the
validator's job; this module only refuses edits it cannot express
faithfully (:class:`NotScalarizable`, :class:`RewriteConflict`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .analysis import AnalysisReport, CellAccumulator, REDUCTION_OPS
from .cparse import Edit, emit
from .errors import NotScalarizable, RewriteConflict, UnknownLoopId
from .ir import (
    Assign,
    Block,
    CompoundAssign,
    Expr,
    ForLoop,
    FunctionDecl,
    If,
    IndexExpr,
    SourceUnit,
    Stmt,
    expr_eq,
)
from .planning import LoopDirective, Plan

_MINMAX_WB = {"min": "<", "max": ">"}

_IDENTITY = {
    ("+", "float"): "0.0f",
    ("+", "double"): "0.0",
    ("*", "float"): "1.0f",
    ("*", "double"): "1.0",
}


def _identity(op: str, elem_type: str) -> Optional[str]:
    if (op, elem_type) in _IDENTITY:
        return _IDENTITY[(op, elem_type)]
    if op == "+":
        return "0"
    if op == "*":
        return "1"
    if op == "&":
        return "-1"
    if op in ("|", "^"):
        return "0"
    return None  # min/max need a typed extreme; require an absorbable init


# --------------------------------------------------------------------------
# source-geometry helpers
# --------------------------------------------------------------------------


def _line_start(text: str, pos: int) -> int:
    return text.rfind("\n", 0, pos) + 1


def _indent_of(text: str, pos: int) -> str:
    start = _line_start(text, pos)
    line = text[start:pos]
    return line if line.strip() == "" else line[: len(line) - len(line.lstrip())]


def _owns_line_start(text: str, pos: int) -> bool:
    return text[_line_start(text, pos):pos].strip() == ""


def _owns_line_end(text: str, end: int) -> bool:
    nl = text.find("\n", end)
    tail = text[end:] if nl < 0 else text[end:nl]
    return tail.strip() == ""


@dataclass
class _Context:
    container: tuple[Stmt, ...]
    index: int
    braced: bool


def _context_of(unit: SourceUnit, func: FunctionDecl, target: Stmt) -> Optional[_Context]:
    """The statement list holding ``target`` and whether that spot is inside
    braces (so sibling statements can be inserted)."""

    def braced_body(owner_end: int, first: Stmt) -> bool:
        return "{" in unit.text[owner_end : first.span[0]]

    def search(stmts: tuple[Stmt, ...], braced: bool) -> Optional[_Context]:
        for i, s in enumerate(stmts):
            if s is target:
                return _Context(container=stmts, index=i, braced=braced)
        for s in stmts:
            if isinstance(s, ForLoop):
                b = len(s.body) > 1 or (
                    bool(s.body) and braced_body(s.header_span[1], s.body[0])
                )
                found = search(s.body, b)
                if found:
                    return found
            elif isinstance(s, If):
                b = len(s.then_body) > 1 or (
                    bool(s.then_body) and braced_body(s.cond.span[1], s.then_body[0])
                )
                found = search(s.then_body, b)
                if found:
                    return found
                if s.else_body:
                    found = search(s.else_body, len(s.else_body) > 1)
                    if found:
                        return found
            elif isinstance(s, Block):
                found = search(s.body, True)
                if found:
                    return found
        return None

    return search(func.body, True)


def _cell_target(cell: CellAccumulator) -> IndexExpr:
    s = cell.stmts[0]
    if isinstance(s, CompoundAssign):
        t = s.target
    elif isinstance(s, Assign):
        t = s.target
    elif isinstance(s, If):
        inner = s.then_body[0]
        assert isinstance(inner, (Assign, CompoundAssign))
        t = inner.target
    else:  # pragma: no cover - detector only produces the shapes above
        raise NotScalarizable(f"unsupported accumulation statement for {cell.synthetic_name}")
    assert isinstance(t, IndexExpr)
    return t


def _stmt_exprs(s: Stmt) -> list[Expr]:
    if isinstance(s, (Assign, CompoundAssign)):
        return [s.target, s.value]
    if isinstance(s, If):
        out: list[Expr] = [s.cond]
        for child in s.then_body + (s.else_body or ()):
            out.extend(_stmt_exprs(child))
        return out
    return []


def _equal_cells(root: Expr, target: IndexExpr) -> list[IndexExpr]:
    """Topmost IndexExpr nodes structurally equal to the cell reference —
    never descending into a match, so replacements cannot overlap."""
    out: list[IndexExpr] = []

    def rec(e: Expr) -> None:
        if isinstance(e, IndexExpr) and expr_eq(e, target):
            out.append(e)
            return
        for child in _children(e):
            rec(child)

    rec(root)
    return out


def _children(e: Expr) -> tuple[Expr, ...]:
    from .ir import BinOp, CallExpr, UnaryOp

    if isinstance(e, UnaryOp):
        return (e.operand,)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, IndexExpr):
        return (e.base, e.index)
    if isinstance(e, CallExpr):
        return tuple(e.args)
    return ()


# --------------------------------------------------------------------------
# scalarization
# --------------------------------------------------------------------------


def scalarize_accumulator(unit: SourceUnit, cell: CellAccumulator) -> list[Edit]:
    """Edits that reroute ``cell``'s accumulation through its fresh local
    scalar. Raises :class:`NotScalarizable` when the surrounding shape
    cannot take the rewrite."""
    func = unit.function_of_loop(cell.loop_id)
    loop = unit.loop_by_id(cell.loop_id)
    if func is None or loop is None:
        raise UnknownLoopId(f"no loop {cell.loop_id!r} in {unit.path}")
    ctx = _context_of(unit, func, loop)
    if ctx is None:  # pragma: no cover - the loop always sits somewhere
        raise NotScalarizable(f"cannot locate the context of {cell.loop_id}")
    if not ctx.braced:
        raise NotScalarizable(
            f"the accumulation loop {cell.loop_id} is an unbraced single-statement "
            "body; sibling statements cannot be inserted"
        )
    if not _owns_line_start(unit.text, loop.span[0]) or not _owns_line_end(unit.text, loop.span[1]):
        raise NotScalarizable(
            f"the accumulation loop {cell.loop_id} shares a source line with other code"
        )

    target = _cell_target(cell)
    name = cell.synthetic_name
    edits: list[Edit] = []

    # retarget every reference to the cell inside the accumulation statements
    for s in cell.stmts:
        for root in _stmt_exprs(s):
            for node in _equal_cells(root, target):
                edits.append(Edit(anchor=node.span, where="replace", text=name))

    # initialization: absorb an adjacent preceding init of the same cell
    prev = ctx.container[ctx.index - 1] if ctx.index > 0 else None
    absorb = (
        isinstance(prev, Assign)
        and isinstance(prev.target, IndexExpr)
        and expr_eq(prev.target, target)
    )
    indent = _indent_of(unit.text, loop.span[0])
    if absorb:
        assert isinstance(prev, Assign)
        edits.append(
            Edit(
                anchor=prev.target.span,
                where="replace",
                text=f"{cell.elem_type} {name}",
            )
        )
        writeback = f"{cell.cell_text} = {name};"
    else:
        ident = _identity(cell.op, cell.elem_type)
        if ident is None:
            raise NotScalarizable(
                f"{cell.op} accumulation into {cell.cell_text} has no adjacent "
                "initialization to absorb and no untyped identity value"
            )
        edits.append(
            Edit(
                anchor=loop.span,
                where="before",
                text=f"{indent}{cell.elem_type} {name} = {ident};\n",
            )
        )
        if cell.op in _MINMAX_WB:
            cmp = _MINMAX_WB[cell.op]
            writeback = f"if ({name} {cmp} {cell.cell_text}) {cell.cell_text} = {name};"
        else:
            writeback = f"{cell.cell_text} {cell.op}= {name};"
    edits.append(Edit(anchor=loop.span, where="after", text=f"{indent}{writeback}\n"))
    return edits


# --------------------------------------------------------------------------
# pragma assembly
# --------------------------------------------------------------------------


def _collapsed_loop_vars(unit: SourceUnit, loop_id: str, k: int) -> set[str]:
    loop = unit.loop_by_id(loop_id)
    vars_: set[str] = set()
    while loop is not None and k > 0:
        vars_.add(loop.var)
        k -= 1
        inner = [s for s in loop.body if isinstance(s, ForLoop)]
        loop = inner[0] if len(loop.body) == 1 and inner else None
    return vars_


def pragma_text(
    unit: SourceUnit, d: LoopDirective, report: AnalysisReport
) -> str:
    """The pragma line (no indentation, no newline) for one directive."""
    entry = report.loop(d.loop_id)
    clauses: list[str] = []
    if d.collapse >= 2:
        clauses.append(f"collapse({d.collapse})")
    if d.schedule is not None:
        if d.schedule.chunk is not None:
            clauses.append(f"schedule({d.schedule.kind}, {d.schedule.chunk})")
        else:
            clauses.append(f"schedule({d.schedule.kind})")
    by_op: dict[str, list[str]] = {}
    for r in d.reductions:
        by_op.setdefault(r.op, []).append(r.var)
    for op in REDUCTION_OPS:
        if op in by_op:
            clauses.append(f"reduction({op}:{','.join(sorted(by_op[op]))})")
    skip = {
        p.variable
        for p in entry.privatizable
        if p.body_local or p.synthetic
    }
    skip |= _collapsed_loop_vars(unit, d.loop_id, max(d.collapse, 1))
    privs = sorted(set(d.privates) - skip)
    if privs:
        clauses.append(f"private({','.join(privs)})")
    if d.num_threads is not None:
        clauses.append(f"num_threads({d.num_threads})")
    text = "#pragma omp parallel for"
    if clauses:
        text += " " + " ".join(clauses)
    return text


# --------------------------------------------------------------------------
# whole-plan transformation
# --------------------------------------------------------------------------


def generate(unit: SourceUnit, plan: Plan, report: AnalysisReport) -> str:
    """Transformed source text for ``plan``. An empty plan returns the
    original text byte-identically."""
    edits: list[Edit] = []
    for d in plan.directives:
        if not d.parallelize:
            continue
        loop = unit.loop_by_id(d.loop_id)
        func = unit.function_of_loop(d.loop_id)
        if loop is None or func is None:
            raise UnknownLoopId(f"no loop {d.loop_id!r} in {unit.path}")
        if not _owns_line_start(unit.text, loop.span[0]):
            raise RewriteConflict(
                f"{d.loop_id} shares its source line with preceding code; "
                "a pragma line cannot be attached unambiguously"
            )

        mentioned = set(d.privates) | {r.var for r in d.reductions}
        entry = report.loop(d.loop_id)
        in_scope = {e.loop_id for e in report.entries if d.loop_id in e.ancestors}
        in_scope.add(d.loop_id)
        for e in report.entries:
            if e.loop_id not in in_scope:
                continue
            for cell in e.cells:
                if cell.synthetic_name in mentioned:
                    edits.extend(scalarize_accumulator(unit, cell))

        indent = _indent_of(unit.text, loop.span[0])
        edits.append(
            Edit(
                anchor=loop.span,
                where="before",
                text=f"{indent}{pragma_text(unit, d, report)}\n",
            )
        )
    return emit(unit, edits)
