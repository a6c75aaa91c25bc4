"""Static dependence analysis over the loop-nest IR.

Per loop, the analyzer produces:

* dependence facts from pairwise subscript tests — ZIV (loop-invariant
  subscripts), strong SIV (same integer coefficient on the tested variable),
  and a GCD test for mismatched integer coefficients; anything inconclusive
  becomes a conservative fact with unknown distance;
* reduction patterns (``x ⊕= e`` / ``x = x ⊕ e`` with one operator, plus the
  if-statement min/max idiom), including *cell accumulators* — compound
  accumulation into an array cell whose subscript is invariant in the
  accumulating loop (the scalarization targets);
* privatizable scalars (never read before being written in an iteration, and
  never read outside the loop);
* a verdict: ``parallelizable`` | ``parallelizable-with-clauses`` |
  ``sequential`` | ``unknown``.

Conservatism contract: ``parallelizable`` must imply that no execution order
of the iterations can change the observable result.  When in doubt the
analyzer degrades to ``unknown`` (opaque statements, non-affine accesses,
non-unit steps, non-invariant bounds) or ``sequential`` (real or unprovable
dependences).

Aliasing assumption (documented contract): distinct pointer parameters do
not alias.  Drivers and callers own that guarantee.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Literal, Mapping, Optional, Sequence

from .errors import UnknownLoopId
from .ir import (
    AffineExpr,
    ArrayAccess,
    Assign,
    BinOp,
    Block,
    CompoundAssign,
    Decl,
    Expr,
    ForLoop,
    FunctionDecl,
    If,
    IndexExpr,
    OpaqueStmt,
    SourceUnit,
    Span,
    Stmt,
    UnaryOp,
    VarRef,
    affine_of,
    expr_eq,
    expr_reads_var,
    walk_expr,
    walk_stmts,
)

Verdict = Literal["parallelizable", "parallelizable-with-clauses", "sequential", "unknown"]

REDUCTION_OPS = ("+", "*", "min", "max", "&", "|", "^")

_FP_TYPES = ("float", "double")


# --------------------------------------------------------------------------
# result records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DependenceFact:
    """One dependence between two accesses (or on one scalar).

    ``carried_at`` is the nesting level (1 = outermost) of ``carried_loop``;
    ``None`` means loop-independent.  ``distance`` is the iteration distance
    at the carried level when the strong-SIV test pinned it, else ``None``
    (unknown).
    """

    kind: Literal["flow", "anti", "output"]
    array: Optional[str]
    variable: Optional[str]
    source: str
    sink: str
    carried_at: Optional[int]
    carried_loop: Optional[str]
    distance: Optional[int]
    explained_by: Optional[tuple[str, str]] = None  # ("reduction"|"private", name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "array": self.array,
            "variable": self.variable,
            "source": self.source,
            "sink": self.sink,
            "carried_at": self.carried_at,
            "carried_loop": self.carried_loop,
            "distance": self.distance,
            "explained_by": list(self.explained_by) if self.explained_by else None,
        }


@dataclass(frozen=True)
class CellAccumulator:
    """Accumulation into a loop-invariant array cell: the scalarization target.

    ``C[i*n + j] += ...`` inside the k-loop, with no other access to ``C`` in
    that loop, is a ``+`` cell accumulator with synthetic name ``C_priv``.
    """

    array: str
    op: str
    elem_type: str
    synthetic_name: str
    loop_id: str
    subscript: AffineExpr
    cell_text: str
    stmts: tuple[Stmt, ...]

    def to_dict(self) -> dict:
        return {
            "array": self.array,
            "op": self.op,
            "elem_type": self.elem_type,
            "synthetic_name": self.synthetic_name,
            "loop": self.loop_id,
            "cell": self.cell_text,
        }


@dataclass(frozen=True)
class ReductionPattern:
    variable: str
    op: str
    loop_id: str
    loop_level: int
    fp: bool
    synthetic: bool = False
    cell: Optional[CellAccumulator] = None

    def to_dict(self) -> dict:
        d = {
            "variable": self.variable,
            "op": self.op,
            "loop": self.loop_id,
            "level": self.loop_level,
            "fp": self.fp,
            "synthetic": self.synthetic,
        }
        if self.cell is not None:
            d["cell"] = self.cell.to_dict()
        return d


@dataclass(frozen=True)
class PrivatizableVar:
    variable: str
    loop_id: str
    loop_level: int
    body_local: bool
    synthetic: bool = False

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "loop": self.loop_id,
            "level": self.loop_level,
            "body_local": self.body_local,
            "synthetic": self.synthetic,
        }


@dataclass(frozen=True)
class LoopAnalysis:
    loop_id: str
    function: str
    induction: str
    line: int
    level: int
    ancestors: tuple[str, ...]
    verdict: Verdict
    unknown_causes: tuple[str, ...]
    dependences: tuple[DependenceFact, ...]
    reductions: tuple[ReductionPattern, ...]
    privatizable: tuple[PrivatizableVar, ...]
    cells: tuple[CellAccumulator, ...]
    perfect_nest_prefix: int
    bounds: str
    has_conditional: bool
    has_inner_loop: bool

    def to_dict(self) -> dict:
        return {
            "loop": self.loop_id,
            "function": self.function,
            "induction": self.induction,
            "line": self.line,
            "level": self.level,
            "ancestors": list(self.ancestors),
            "verdict": self.verdict,
            "unknown_causes": list(self.unknown_causes),
            "dependences": [d.to_dict() for d in self.dependences],
            "reductions": [r.to_dict() for r in self.reductions],
            "privatizable": [p.to_dict() for p in self.privatizable],
            "perfect_nest_prefix": self.perfect_nest_prefix,
            "bounds": self.bounds,
        }


@dataclass(frozen=True)
class AnalysisReport:
    unit_path: str
    entries: tuple[LoopAnalysis, ...]

    def loop(self, loop_id: str) -> LoopAnalysis:
        for e in self.entries:
            if e.loop_id == loop_id:
                return e
        raise UnknownLoopId(f"loop id {loop_id!r} not present in the analysis report")

    def loop_ids(self) -> tuple[str, ...]:
        return tuple(e.loop_id for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "unit": self.unit_path,
            "loops": [e.to_dict() for e in self.entries],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


# --------------------------------------------------------------------------
# access & scalar-event collection
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _ScalarEvent:
    name: str
    mode: Literal["read", "write"]
    stmt_order: int
    span: Span  # of the statement
    loop_context: tuple[str, ...]


def _root_array(e: IndexExpr) -> Optional[str]:
    base = e.base
    while isinstance(base, IndexExpr):
        base = base.base
    return base.name if isinstance(base, VarRef) else None


class _FunctionScan:
    """Single execution-order walk of one function body.

    Collects array accesses (subscript classification deferred until the
    whole function's written-scalar sets are known), scalar read/write
    events, and per-loop structure.
    """

    def __init__(self, unit: SourceUnit, func: FunctionDecl):
        self.unit = unit
        self.func = func
        self.accesses: list[ArrayAccess] = []
        self.scalar_events: list[_ScalarEvent] = []
        self.loops: list[ForLoop] = []
        self.ancestry: dict[str, tuple[str, ...]] = {}
        self.loop_objs: dict[str, ForLoop] = {}
        self.types: dict[str, str] = {}
        self.pointer_params = frozenset(p.name for p in func.params if p.is_pointer)
        self.decl_counts: dict[str, int] = {}
        self.opaques: list[tuple[Span, tuple[str, ...]]] = []
        self._order = 0
        # (index expr | bare pointer VarRef, mode, ctx, order, stmt_span)
        self._pending: list[tuple[Expr, str, tuple[str, ...], int, Span]] = []
        self._written_cache: dict[str, frozenset[str]] = {}
        for p in func.params:
            self.types[p.name] = p.ctype
        self._walk(func.body, ())
        for loop in self.loops:
            written: set[str] = {loop.var}
            for s in walk_stmts(loop.body):
                if isinstance(s, (Assign, CompoundAssign)) and isinstance(s.target, VarRef):
                    written.add(s.target.name)
                elif isinstance(s, Decl):
                    written.add(s.name)
                elif isinstance(s, ForLoop):
                    written.add(s.var)
            self._written_cache[loop.loop_id] = frozenset(written)
        self._finalize_accesses()

    # -- collection ----------------------------------------------------------

    def _walk(self, stmts: Sequence[Stmt], ctx: tuple[str, ...]) -> None:
        for s in stmts:
            self._order += 1
            order = self._order
            if isinstance(s, Assign):
                self._expr_reads(s.value, ctx, order, s.span)
                self._target(s.target, ctx, order, s.span, compound=False)
            elif isinstance(s, CompoundAssign):
                self._expr_reads(s.value, ctx, order, s.span)
                self._target(s.target, ctx, order, s.span, compound=True)
            elif isinstance(s, Decl):
                self.types.setdefault(s.name, s.ctype)
                self.decl_counts[s.name] = self.decl_counts.get(s.name, 0) + 1
                if s.init is not None:
                    self._expr_reads(s.init, ctx, order, s.span)
                    self.scalar_events.append(_ScalarEvent(s.name, "write", order, s.span, ctx))
            elif isinstance(s, If):
                self._expr_reads(s.cond, ctx, order, s.span)
                self._walk(s.then_body, ctx)
                if s.else_body is not None:
                    self._walk(s.else_body, ctx)
            elif isinstance(s, Block):
                self._walk(s.body, ctx)
            elif isinstance(s, ForLoop):
                self.loops.append(s)
                self.ancestry[s.loop_id] = ctx
                self.loop_objs[s.loop_id] = s
                if s.var_decl_type is not None:
                    self.types.setdefault(s.var, s.var_decl_type)
                self._expr_reads(s.lower, ctx, order, s.span)
                self._expr_reads(s.upper, ctx, order, s.span)
                if s.var_decl_type is None:
                    self.scalar_events.append(_ScalarEvent(s.var, "write", order, s.span, ctx))
                self._walk(s.body, ctx + (s.loop_id,))
            elif isinstance(s, OpaqueStmt):
                self.opaques.append((s.span, ctx))

    def _target(self, target: Expr, ctx: tuple[str, ...], order: int, stmt_span: Span, compound: bool) -> None:
        if isinstance(target, VarRef):
            if compound:
                self.scalar_events.append(_ScalarEvent(target.name, "read", order, stmt_span, ctx))
            self.scalar_events.append(_ScalarEvent(target.name, "write", order, stmt_span, ctx))
        elif isinstance(target, IndexExpr):
            t: Expr = target
            while isinstance(t, IndexExpr):
                self._expr_reads(t.index, ctx, order, stmt_span)
                t = t.base
            if compound:
                self._pending.append((target, "read", ctx, order, stmt_span))
            self._pending.append((target, "write", ctx, order, stmt_span))

    def _expr_reads(self, e: Expr, ctx: tuple[str, ...], order: int, stmt_span: Span) -> None:
        """Record reads in an expression: scalars and array cells."""
        if isinstance(e, VarRef):
            if e.name in self.pointer_params:
                # bare pointer value used as data: conservative unknown region
                self._pending.append((e, "write", ctx, order, stmt_span))
            else:
                self.scalar_events.append(_ScalarEvent(e.name, "read", order, stmt_span, ctx))
            return
        if isinstance(e, IndexExpr):
            t: Expr = e
            while isinstance(t, IndexExpr):
                self._expr_reads(t.index, ctx, order, stmt_span)
                t = t.base
            self._pending.append((e, "read", ctx, order, stmt_span))
            return
        if isinstance(e, BinOp):
            self._expr_reads(e.left, ctx, order, stmt_span)
            self._expr_reads(e.right, ctx, order, stmt_span)
        elif isinstance(e, UnaryOp):
            self._expr_reads(e.operand, ctx, order, stmt_span)
        # literals only beyond this point; statements containing calls or
        # embedded increments never reach the analyzer (they parse as opaque)

    def _finalize_accesses(self) -> None:
        for e, mode, ctx, order, stmt_span in self._pending:
            ctx_vars = tuple(self.loop_objs[lid].var for lid in ctx)
            if isinstance(e, IndexExpr):
                name = _root_array(e)
                if name is None:
                    continue
                affine: Optional[AffineExpr] = None
                if isinstance(e.base, VarRef) and name in self.pointer_params:
                    affine = self._subscript_affine(e.index, ctx)
            else:  # bare pointer VarRef
                name = e.name  # type: ignore[union-attr]
                affine = None
            self.accesses.append(
                ArrayAccess(
                    array=name,
                    mode=mode,
                    affine=affine is not None,
                    subscript=affine,
                    loop_context=ctx,
                    span=e.span,
                    stmt_span=stmt_span,
                    stmt_order=order,
                    reads_before_writes=(mode == "read"),
                    loop_vars=ctx_vars,
                )
            )

    def _subscript_affine(self, idx: Expr, ctx: tuple[str, ...]) -> Optional[AffineExpr]:
        """Affine form of a subscript, or None.

        Valid atoms multiply at most one enclosing induction variable with
        loop-invariant symbols: symbols never written inside the outermost
        enclosing loop (pointer names excluded).
        """
        aff = affine_of(idx)
        if aff is None:
            return None
        inductions = {self.loop_objs[lid].var for lid in ctx}
        outer_written = self._outermost_written(ctx)
        for atom, _ in aff.terms:
            ind = [v for v in atom if v in inductions]
            if len(ind) > 1:
                return None
            for v in atom:
                if v in inductions:
                    continue
                if v in self.pointer_params or v in outer_written:
                    return None
        return aff

    def _outermost_written(self, ctx: tuple[str, ...]) -> frozenset[str]:
        if not ctx:
            return frozenset()
        return self._written_cache.get(ctx[0], frozenset())

    # -- per-loop helpers ------------------------------------------------------

    def written_in(self, loop_id: str) -> frozenset[str]:
        return self._written_cache.get(loop_id, frozenset())

    def loop_level(self, loop_id: str) -> int:
        return len(self.ancestry[loop_id]) + 1

    def subtree_has_opaque(self, loop: ForLoop) -> bool:
        return any(isinstance(s, OpaqueStmt) for s in walk_stmts(loop.body))

    def accesses_in(self, loop_id: str) -> list[ArrayAccess]:
        return [a for a in self.accesses if loop_id in a.loop_context]

    def scalar_events_in(self, loop_id: str) -> list[_ScalarEvent]:
        return [e for e in self.scalar_events if loop_id in e.loop_context]

    def induction_vars(self) -> frozenset[str]:
        return frozenset(l.var for l in self.loops)

    def read_outside(self, loop: ForLoop, name: str) -> bool:
        """Whether ``name`` may be read anywhere in the function outside
        ``loop`` — including by opaque statements, which can read anything."""
        lo, hi = loop.span
        if any(
            ev.mode == "read" and not (lo <= ev.span[0] and ev.span[1] <= hi)
            for ev in self.scalar_events
            if ev.name == name
        ):
            return True
        return any(not (lo <= sp[0] and sp[1] <= hi) for sp, _ in self.opaques)


# --------------------------------------------------------------------------
# pairwise dependence testing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _PairResult:
    independent: bool
    # (loop_id, distance | None): one entry per level the dependence can be
    # carried at, outermost first; distance is the absolute value when pinned
    blocked: tuple[tuple[str, Optional[int]], ...] = ()
    loop_independent: bool = False
    # orientation for the primary (outermost pinned) level
    source_is_a: bool = True


class _Unbounded:
    """Stand-in when a referenced loop object is unavailable: unit step
    assumed, bounds unknown."""

    step = 1
    lower_affine = AffineExpr.var("__lo")
    upper_affine = AffineExpr.var("__hi")
    var = "__v"


_UNBOUNDED = _Unbounded()


def _ctx_vars(acc: ArrayAccess, loops: Mapping[str, object]) -> tuple[str, ...]:
    if len(acc.loop_vars) == len(acc.loop_context):
        return acc.loop_vars
    out = []
    for i, lid in enumerate(acc.loop_context):
        loop = loops.get(lid)
        out.append(loop.var if isinstance(loop, ForLoop) else f"__L{i}")
    return tuple(out)


def _classify_levels(
    a: ArrayAccess,
    b: ArrayAccess,
    loops: Mapping[str, object],
) -> Optional[_PairResult]:
    """Core ZIV / strong-SIV / GCD reasoning.

    Returns None when either side is non-affine (callers treat that as a
    conservative dependence at every common level).
    """
    if not (a.affine and b.affine and a.subscript is not None and b.subscript is not None):
        return None

    avars = _ctx_vars(a, loops)
    bvars = _ctx_vars(b, loops)
    common: list[tuple[str, str]] = []  # (loop_id, var)
    for (la, va), (lb, vb) in zip(zip(a.loop_context, avars), zip(b.loop_context, bvars)):
        if la == lb:
            common.append((la, va))
        else:
            break

    f, g = a.subscript, b.subscript
    common_vars = {v for _, v in common}
    a_inner = set(avars[len(common):]) - common_vars
    b_inner = set(bvars[len(common):]) - common_vars

    def conservative() -> _PairResult:
        return _PairResult(
            False,
            tuple((lid, None) for lid, _ in common),
            source_is_a=_earlier(a, b),
        )

    # pure parameter atoms must cancel exactly between the two sides
    pure_a = {at: c for at, c in f.terms if not any(v in common_vars or v in a_inner for v in at)}
    pure_b = {at: c for at, c in g.terms if not any(v in common_vars or v in b_inner for v in at)}
    if pure_a != pure_b:
        return conservative()

    # atoms over a side's own non-common induction variables iterate freely:
    # plain integer coefficients join the GCD pool, symbolic ones defeat it
    free_coeffs: list[int] = []
    for side_terms, inner in ((f.terms, a_inner), (g.terms, b_inner)):
        for at, c0 in side_terms:
            n_common = sum(1 for v in at if v in common_vars)
            n_inner = sum(1 for v in at if v in inner)
            if n_common + n_inner > 1:
                return conservative()
            if n_inner == 1:
                if len(at) == 1:
                    free_coeffs.append(c0)
                else:
                    return conservative()

    c = f.constant - g.constant

    # classify each common level
    level_kind: dict[str, tuple] = {}
    for lid, v in common:
        loop = loops.get(lid, _UNBOUNDED)
        fa = f.atoms_with(v)
        fb = g.atoms_with(v)
        if not fa and not fb:
            level_kind[lid] = ("any",)
        elif getattr(loop, "step", 1) != 1:
            # value space ≠ iteration space here: never pin a distance
            level_kind[lid] = ("stride",)
        elif fa == fb:
            if len(fa) == 1 and fa[0][0] == (v,):
                level_kind[lid] = ("strong", fa[0][1])
            else:
                level_kind[lid] = ("symmatch",)
        else:
            fa_plain = all(at == (v,) for at, _ in fa)
            fb_plain = all(at == (v,) for at, _ in fb)
            if fa_plain and fb_plain:
                ca = fa[0][1] if fa else 0
                cb = fb[0][1] if fb else 0
                level_kind[lid] = ("mixed", ca, cb)
            else:
                return conservative()

    has_symmatch = any(k[0] == "symmatch" for k in level_kind.values())
    has_stride = any(k[0] == "stride" for k in level_kind.values())
    if has_symmatch and c != 0:
        return conservative()

    mixed = [(k[1], k[2]) for k in level_kind.values() if k[0] == "mixed"]
    strong = [(lid, k[1]) for lid, k in level_kind.items() if k[0] == "strong"]

    if mixed or free_coeffs or has_stride:
        pool = [x for pair in mixed for x in pair] + [co for _, co in strong] + free_coeffs
        for lid, v in common:
            if level_kind[lid][0] == "stride":
                pool.extend(co for _, co in f.atoms_with(v))
                pool.extend(co for _, co in g.atoms_with(v))
        pool = [x for x in pool if x != 0]
        g_ = 0
        for x in pool:
            g_ = math.gcd(g_, abs(x))
        if g_ and c % g_ != 0 and not has_symmatch:
            return _PairResult(True)
        return conservative()

    # only strong / any / pinned-symmatch levels remain
    distances: dict[str, Optional[int]] = {}
    for lid, k in level_kind.items():
        if k[0] == "any":
            distances[lid] = None  # unconstrained level
        elif k[0] == "symmatch":
            distances[lid] = 0

    if len(strong) == 1:
        lid, coeff = strong[0]
        # a·x + rest = a·y + rest + (g.const − f.const)  ⇒  d = y − x = c / a
        if c % coeff != 0:
            return _PairResult(True)
        d = c // coeff
        loop = loops.get(lid, _UNBOUNDED)
        lo = getattr(loop, "lower_affine", None)
        hi = getattr(loop, "upper_affine", None)
        if lo is not None and hi is not None and lo.is_constant and hi.is_constant:
            trip = hi.constant - lo.constant
            if abs(d) >= max(trip, 0):
                return _PairResult(True)
        distances[lid] = d
    elif len(strong) > 1:
        g_ = 0
        for _, coeff in strong:
            g_ = math.gcd(g_, abs(coeff))
        if g_ and c % g_ != 0:
            return _PairResult(True)
        for lid, _ in strong:
            distances[lid] = None  # solvable but the per-level split is ambiguous
    elif c != 0:
        # nothing can absorb a nonzero constant difference
        return _PairResult(True)

    # blocked levels, outermost first: a level can carry the dependence when
    # it can take a nonzero distance while every outer level is zero
    blocked: list[tuple[str, Optional[int]]] = []
    source_is_a = _earlier(a, b)
    for lid, _ in common:
        d = distances.get(lid, 0)
        if d is None:
            blocked.append((lid, None))
            continue  # unconstrained: may also be zero, deeper levels stay reachable
        if d != 0:
            blocked.append((lid, abs(d)))
            source_is_a = d > 0
            break  # pinned nonzero: no deeper level can be first-nonzero
    if blocked:
        return _PairResult(False, tuple(blocked), source_is_a=source_is_a)
    if a is b:
        return _PairResult(True)  # same access instance, same iteration only
    return _PairResult(False, (), loop_independent=True, source_is_a=_earlier(a, b))


def _earlier(a: ArrayAccess, b: ArrayAccess) -> bool:
    """Execution order within one iteration: statement order, reads first."""
    ka = (a.stmt_order, 0 if a.reads_before_writes else 1)
    kb = (b.stmt_order, 0 if b.reads_before_writes else 1)
    return ka <= kb


def _fact_kind(src_mode: str, snk_mode: str) -> Literal["flow", "anti", "output"]:
    if src_mode == "write" and snk_mode == "read":
        return "flow"
    if src_mode == "read" and snk_mode == "write":
        return "anti"
    return "output"


def _level_of(lid: str, context: tuple[str, ...]) -> Optional[int]:
    return context.index(lid) + 1 if lid in context else None


def _facts_from_result(a: ArrayAccess, b: ArrayAccess, res: _PairResult) -> list[DependenceFact]:
    src, snk = (a, b) if res.source_is_a else (b, a)
    kind = _fact_kind(src.mode, snk.mode)
    ctx = src.loop_context
    if res.loop_independent:
        return [
            DependenceFact(
                kind=kind, array=a.array, variable=None,
                source=src.describe(), sink=snk.describe(),
                carried_at=None, carried_loop=None, distance=0,
            )
        ]
    return [
        DependenceFact(
            kind=kind, array=a.array, variable=None,
            source=src.describe(), sink=snk.describe(),
            carried_at=_level_of(lid, ctx), carried_loop=lid, distance=dist,
        )
        for lid, dist in res.blocked
    ]


def _conservative_unknown_facts(
    a: ArrayAccess, b: ArrayAccess, common: Sequence[str]
) -> list[DependenceFact]:
    src, snk = (a, b) if _earlier(a, b) else (b, a)
    kind = _fact_kind(src.mode, snk.mode)
    return [
        DependenceFact(
            kind=kind, array=a.array, variable=None,
            source=src.describe(), sink=snk.describe(),
            carried_at=_level_of(lid, src.loop_context), carried_loop=lid, distance=None,
        )
        for lid in common
    ]


def test_dependence(
    a: ArrayAccess,
    b: ArrayAccess,
    loops: Optional[Mapping[str, ForLoop]] = None,
) -> Optional[DependenceFact]:
    """Pairwise dependence test: ZIV → strong SIV → GCD, conservative fallback.

    Returns None when the accesses are provably independent, otherwise the
    fact for the outermost level the dependence can be carried at
    (``carried_at=None`` for a loop-independent dependence).  Without
    ``loops``, bounds are unknown and every distance is assumed in range.
    """
    if a.mode != "write" and b.mode != "write":
        return None
    loop_map: dict[str, object] = dict(loops or {})
    common = [x for x, y in zip(a.loop_context, b.loop_context) if x == y]
    res = _classify_levels(a, b, loop_map)
    if res is None:
        facts = _conservative_unknown_facts(a, b, common)
        return facts[0] if facts else None
    if res.independent:
        return None
    facts = _facts_from_result(a, b, res)
    return facts[0] if facts else None


# --------------------------------------------------------------------------
# reduction / privatization / cell-accumulator detection
# --------------------------------------------------------------------------


def _accumulation_shape(s: Stmt) -> Optional[tuple[Expr, str, Expr]]:
    """Match ``t ⊕= e`` / ``t = t ⊕ e`` / ``t = e ⊕ t`` / the if-min/max idiom.

    Returns (target expr, op, contributed expr) or None.
    """
    if isinstance(s, CompoundAssign) and s.op in ("+", "*", "&", "|", "^"):
        return s.target, s.op, s.value
    if isinstance(s, Assign) and isinstance(s.value, BinOp) and s.value.op in ("+", "*", "&", "|", "^"):
        l, r = s.value.left, s.value.right
        if expr_eq(l, s.target):
            return s.target, s.value.op, r
        if expr_eq(r, s.target):
            return s.target, s.value.op, l
    if isinstance(s, If) and s.else_body is None and len(s.then_body) == 1:
        inner = s.then_body[0]
        if isinstance(inner, Assign) and isinstance(s.cond, BinOp) and s.cond.op in ("<", "<=", ">", ">="):
            l, r = s.cond.left, s.cond.right
            tgt, val = inner.target, inner.value
            less = s.cond.op in ("<", "<=")
            if expr_eq(val, l) and expr_eq(tgt, r):
                return tgt, ("min" if less else "max"), val
            if expr_eq(val, r) and expr_eq(tgt, l):
                return tgt, ("max" if less else "min"), val
    return None


def _stmts_touching_scalar(loop: ForLoop, name: str) -> list[Stmt]:
    out = []
    for s in walk_stmts(loop.body):
        touched = False
        if isinstance(s, (Assign, CompoundAssign)):
            touched = (
                expr_reads_var(s.value, name)
                or expr_reads_var(s.target, name)
                or (isinstance(s.target, VarRef) and s.target.name == name)
            )
        elif isinstance(s, Decl):
            touched = s.name == name or (s.init is not None and expr_reads_var(s.init, name))
        elif isinstance(s, If):
            touched = expr_reads_var(s.cond, name)
        elif isinstance(s, ForLoop):
            touched = s.var == name or expr_reads_var(s.lower, name) or expr_reads_var(s.upper, name)
        elif isinstance(s, OpaqueStmt):
            touched = True  # may touch anything
        if touched:
            out.append(s)
    return out


class _FunctionAnalyzer:
    def __init__(self, unit: SourceUnit, func: FunctionDecl):
        self.unit = unit
        self.func = func
        self.scan = _FunctionScan(unit, func)

    # -- reductions ------------------------------------------------------------

    def detect_reductions(self, loop: ForLoop) -> list[ReductionPattern]:
        scan = self.scan
        level = scan.loop_level(loop.loop_id)
        out: list[ReductionPattern] = []
        inductions = scan.induction_vars()
        candidates: set[str] = set()
        if_inner_ids: set[int] = set()
        for s in walk_stmts(loop.body):
            shape = _accumulation_shape(s)
            if shape and isinstance(shape[0], VarRef):
                candidates.add(shape[0].name)
                if isinstance(s, If):
                    if_inner_ids.add(id(s.then_body[0]))
        for name in sorted(candidates):
            if name in inductions or name in scan.pointer_params:
                continue
            if scan.decl_counts.get(name, 0) > 1:
                continue  # shadowed somewhere: stay conservative
            if any(isinstance(s, Decl) and s.name == name for s in walk_stmts(loop.body)):
                continue  # fresh variable per iteration, not a recurrence
            ops: set[str] = set()
            ok = True
            for s in _stmts_touching_scalar(loop, name):
                if id(s) in if_inner_ids:
                    continue  # body of a recognized if-min/max pattern
                shape = _accumulation_shape(s)
                if (
                    shape is None
                    or not isinstance(shape[0], VarRef)
                    or shape[0].name != name
                    or expr_reads_var(shape[2], name)
                ):
                    ok = False
                    break
                ops.add(shape[1])
            if ok and len(ops) == 1:
                out.append(
                    ReductionPattern(
                        variable=name, op=ops.pop(), loop_id=loop.loop_id,
                        loop_level=level, fp=scan.types.get(name) in _FP_TYPES,
                    )
                )
        return out

    # -- cell accumulators -------------------------------------------------------

    def detect_cells(self, loop: ForLoop) -> list[CellAccumulator]:
        scan = self.scan
        by_array: dict[str, list[tuple[Stmt, IndexExpr, str, Expr]]] = {}
        for s in walk_stmts(loop.body):
            shape = _accumulation_shape(s)
            if shape is None or not isinstance(shape[0], IndexExpr):
                continue
            tgt, op, e = shape
            name = _root_array(tgt)
            if name is None or name not in scan.pointer_params:
                continue
            by_array.setdefault(name, []).append((s, tgt, op, e))
        out: list[CellAccumulator] = []
        inner_vars = {loop.var} | {
            l.var for l in walk_stmts(loop.body) if isinstance(l, ForLoop)
        }
        for name in sorted(by_array):
            entries = by_array[name]
            first_idx = entries[0][1].index
            sub = affine_of(first_idx)
            if sub is None or any(v in inner_vars for v in sub.variables()):
                continue
            if not all(expr_eq(e_[1].index, first_idx) for e_ in entries):
                continue
            ops = {e_[2] for e_ in entries}
            if len(ops) != 1:
                continue
            if any(_expr_mentions_array(e_[3], name) for e_ in entries):
                continue
            acc_spans: set[Span] = set()
            for s, _, _, _ in entries:
                acc_spans.add(s.span)
                if isinstance(s, If):
                    acc_spans.add(s.then_body[0].span)
            stray = [
                acc
                for acc in scan.accesses_in(loop.loop_id)
                if acc.array == name and acc.stmt_span not in acc_spans
            ]
            if stray:
                continue
            out.append(
                CellAccumulator(
                    array=name,
                    op=ops.pop(),
                    elem_type=scan.types.get(name, "double"),
                    synthetic_name=self._fresh_name(f"{name}_priv"),
                    loop_id=loop.loop_id,
                    subscript=sub,
                    cell_text=self.unit.slice(entries[0][1].span),
                    stmts=tuple(e_[0] for e_ in entries),
                )
            )
        return out

    def _fresh_name(self, base: str) -> str:
        taken = set(self.scan.types) | {p.name for p in self.func.params}
        taken |= self.scan.induction_vars()
        name = base
        n = 1
        while name in taken:
            n += 1
            name = f"{base}{n}"
        return name

    # -- privatizable scalars ----------------------------------------------------

    def detect_privatizable(self, loop: ForLoop) -> list[PrivatizableVar]:
        scan = self.scan
        level = scan.loop_level(loop.loop_id)
        inductions = scan.induction_vars()
        written = {
            e.name for e in scan.scalar_events_in(loop.loop_id) if e.mode == "write"
        }
        exposed: set[str] = set()
        opaque_seen = [False]

        def scan_reads(e: Expr, wr: set[str]) -> None:
            # scalar reads only; an array's own name is not a scalar read
            if isinstance(e, VarRef):
                if e.name not in wr:
                    exposed.add(e.name)
            elif isinstance(e, IndexExpr):
                t: Expr = e
                while isinstance(t, IndexExpr):
                    scan_reads(t.index, wr)
                    t = t.base
            elif isinstance(e, BinOp):
                scan_reads(e.left, wr)
                scan_reads(e.right, wr)
            elif isinstance(e, UnaryOp):
                scan_reads(e.operand, wr)

        def walk(stmts: Sequence[Stmt], wr: set[str]) -> set[str]:
            for s in stmts:
                if isinstance(s, Assign):
                    scan_reads(s.value, wr)
                    if isinstance(s.target, IndexExpr):
                        t: Expr = s.target
                        while isinstance(t, IndexExpr):
                            scan_reads(t.index, wr)
                            t = t.base
                    elif isinstance(s.target, VarRef):
                        wr.add(s.target.name)
                elif isinstance(s, CompoundAssign):
                    scan_reads(s.value, wr)
                    if isinstance(s.target, IndexExpr):
                        t = s.target
                        while isinstance(t, IndexExpr):
                            scan_reads(t.index, wr)
                            t = t.base
                    elif isinstance(s.target, VarRef):
                        if s.target.name not in wr:
                            exposed.add(s.target.name)
                        wr.add(s.target.name)
                elif isinstance(s, Decl):
                    if s.init is not None:
                        scan_reads(s.init, wr)
                        wr.add(s.name)
                elif isinstance(s, If):
                    scan_reads(s.cond, wr)
                    w1 = walk(s.then_body, set(wr))
                    w2 = walk(s.else_body, set(wr)) if s.else_body is not None else set(wr)
                    wr.clear()
                    wr.update(w1 & w2)
                elif isinstance(s, Block):
                    walk(s.body, wr)
                elif isinstance(s, ForLoop):
                    scan_reads(s.lower, wr)
                    scan_reads(s.upper, wr)
                    if s.var_decl_type is None:
                        wr.add(s.var)  # the header init always runs
                    inner = set(wr)
                    inner.add(s.var)
                    # body writes don't survive: the loop may run zero times
                    walk(s.body, inner)
                elif isinstance(s, OpaqueStmt):
                    opaque_seen[0] = True
            return wr

        walk(loop.body, set())
        if opaque_seen[0]:
            return []

        out: list[PrivatizableVar] = []
        for name in sorted(written):
            if name == loop.var or name in scan.pointer_params:
                continue
            if name in inductions:
                # only a header-assigned inner loop's variable may qualify;
                # declaration-form variables are already iteration-scoped
                if not any(
                    isinstance(s, ForLoop) and s.var == name and s.var_decl_type is None
                    for s in walk_stmts(loop.body)
                ):
                    continue
            if scan.decl_counts.get(name, 0) > 1:
                continue
            if name in exposed:
                continue
            body_local = any(
                isinstance(s, Decl) and s.name == name for s in walk_stmts(loop.body)
            )
            # a variable declared inside the loop is invisible outside it
            # (single declaration checked above); others must be dead on exit
            if not body_local and scan.read_outside(loop, name):
                continue
            out.append(
                PrivatizableVar(
                    variable=name, loop_id=loop.loop_id, loop_level=level,
                    body_local=body_local,
                )
            )
        return out


def _expr_mentions_array(e: Expr, name: str) -> bool:
    return any(isinstance(n, IndexExpr) and _root_array(n) == name for n in walk_expr(e))


# --------------------------------------------------------------------------
# the analyzer
# --------------------------------------------------------------------------


def _perfect_prefix(loop: ForLoop) -> int:
    depth = 1
    cur = loop
    while len(cur.body) == 1 and isinstance(cur.body[0], ForLoop):
        depth += 1
        cur = cur.body[0]
    return depth


def analyze(unit: SourceUnit) -> AnalysisReport:
    """Analyze every loop of every function; deterministic for a given unit."""
    entries: list[LoopAnalysis] = []
    for func in unit.functions:
        fa = _FunctionAnalyzer(unit, func)
        scan = fa.scan
        loops = scan.loops  # preorder
        loop_map = dict(scan.loop_objs)

        reductions_by_loop: dict[str, list[ReductionPattern]] = {}
        cells_by_loop: dict[str, list[CellAccumulator]] = {}
        privat_by_loop: dict[str, list[PrivatizableVar]] = {}
        for loop in loops:
            reductions_by_loop[loop.loop_id] = fa.detect_reductions(loop)
            cells_by_loop[loop.loop_id] = fa.detect_cells(loop)
            privat_by_loop[loop.loop_id] = fa.detect_privatizable(loop)
        for loop in loops:
            for cell in cells_by_loop[loop.loop_id]:
                reductions_by_loop[loop.loop_id].append(
                    ReductionPattern(
                        variable=cell.synthetic_name, op=cell.op,
                        loop_id=loop.loop_id,
                        loop_level=scan.loop_level(loop.loop_id),
                        fp=cell.elem_type in _FP_TYPES, synthetic=True, cell=cell,
                    )
                )
                for anc in scan.ancestry[loop.loop_id]:
                    privat_by_loop[anc].append(
                        PrivatizableVar(
                            variable=cell.synthetic_name, loop_id=anc,
                            loop_level=scan.loop_level(anc), body_local=True,
                            synthetic=True,
                        )
                    )

        # pairwise array dependences, facts binned by carried loop
        facts_by_loop: dict[str, list[DependenceFact]] = {l.loop_id: [] for l in loops}
        accs = scan.accesses
        for i in range(len(accs)):
            for j in range(i, len(accs)):
                a, b = accs[i], accs[j]
                if a.array != b.array:
                    continue
                if a.mode != "write" and b.mode != "write":
                    continue
                common = [x for x, y in zip(a.loop_context, b.loop_context) if x == y]
                if not common:
                    continue
                res = _classify_levels(a, b, loop_map)
                if res is None:
                    for fct in _conservative_unknown_facts(a, b, common):
                        if fct.carried_loop:
                            facts_by_loop[fct.carried_loop].append(fct)
                    continue
                if res.independent:
                    continue
                for fct in _facts_from_result(a, b, res):
                    if fct.carried_loop is not None:
                        facts_by_loop[fct.carried_loop].append(fct)
                    else:
                        facts_by_loop[common[-1]].append(fct)

        for loop in loops:
            lid = loop.loop_id
            level = scan.loop_level(lid)
            causes: list[str] = []
            if scan.subtree_has_opaque(loop):
                causes.append("opaque statement in body")
            loop_accs = scan.accesses_in(lid)
            written_arrays = {a.array for a in loop_accs if a.mode == "write"}
            # a non-affine read is harmless unless the same array is written
            # somewhere in the loop: dependences need at least one write
            if any(
                not a.affine and (a.mode == "write" or a.array in written_arrays)
                for a in loop_accs
            ):
                causes.append("non-affine array access")
            if loop.step != 1:
                causes.append(f"non-unit step {loop.step}")
            bound_vars = loop.lower_affine.variables() | loop.upper_affine.variables()
            if bound_vars & set(scan.written_in(lid)):
                causes.append("loop bound not invariant")

            reductions = tuple(reductions_by_loop[lid])
            privs = tuple(
                sorted(privat_by_loop[lid], key=lambda p: (p.variable, not p.synthetic))
            )
            red_vars = {r.variable for r in reductions if not r.synthetic}
            cell_arrays = {c.array: c for c in cells_by_loop[lid]}
            priv_vars = {p.variable for p in privs}

            # scalar recurrences
            scalar_facts: list[DependenceFact] = []
            written_scalars = sorted(
                {e.name for e in scan.scalar_events_in(lid) if e.mode == "write"}
            )
            body_decl = {s.name for s in walk_stmts(loop.body) if isinstance(s, Decl)}
            body_decl |= {
                s.var
                for s in walk_stmts(loop.body)
                if isinstance(s, ForLoop) and s.var_decl_type is not None
            }
            read_in_subtree = {
                e.name for e in scan.scalar_events_in(lid) if e.mode == "read"
            }
            for name in written_scalars:
                if name == loop.var or name in body_decl:
                    continue
                if name in red_vars:
                    scalar_facts.append(
                        DependenceFact(
                            kind="flow", array=None, variable=name,
                            source=f"{name} (accumulation)", sink=f"{name} (accumulation)",
                            carried_at=level, carried_loop=lid, distance=1,
                            explained_by=("reduction", name),
                        )
                    )
                elif name in priv_vars:
                    scalar_facts.append(
                        DependenceFact(
                            kind="output", array=None, variable=name,
                            source=f"{name} (write)", sink=f"{name} (write)",
                            carried_at=level, carried_loop=lid, distance=1,
                            explained_by=("private", name),
                        )
                    )
                else:
                    scalar_facts.append(
                        DependenceFact(
                            kind="flow" if name in read_in_subtree else "output",
                            array=None, variable=name,
                            source=f"{name} (write)", sink=f"{name} (use)",
                            carried_at=level, carried_loop=lid, distance=None,
                        )
                    )
            # a header-assigned induction variable read after the loop would
            # hold a different value under parallel execution
            if loop.var_decl_type is None:
                if scan.read_outside(loop, loop.var):
                    scalar_facts.append(
                        DependenceFact(
                            kind="output", array=None, variable=loop.var,
                            source=f"{loop.var} (loop header)",
                            sink=f"{loop.var} (read after loop)",
                            carried_at=level, carried_loop=lid, distance=None,
                        )
                    )

            array_facts: list[DependenceFact] = []
            for fct in facts_by_loop[lid]:
                if (
                    fct.carried_loop == lid
                    and fct.array is not None
                    and fct.array in cell_arrays
                ):
                    fct = dataclasses.replace(
                        fct,
                        explained_by=("reduction", cell_arrays[fct.array].synthetic_name),
                    )
                array_facts.append(fct)

            all_facts = tuple(array_facts) + tuple(scalar_facts)
            carried = [f for f in all_facts if f.carried_loop == lid]

            if causes:
                verdict: Verdict = "unknown"
            elif not carried:
                verdict = "parallelizable"
            elif all(f.explained_by for f in carried):
                verdict = "parallelizable-with-clauses"
            else:
                verdict = "sequential"

            entries.append(
                LoopAnalysis(
                    loop_id=lid,
                    function=func.name,
                    induction=loop.var,
                    line=loop.line,
                    level=level,
                    ancestors=scan.ancestry[lid],
                    verdict=verdict,
                    unknown_causes=tuple(causes),
                    dependences=all_facts,
                    reductions=reductions,
                    privatizable=privs,
                    cells=tuple(cells_by_loop[lid]),
                    perfect_nest_prefix=_perfect_prefix(loop),
                    bounds=f"[{loop.lower_affine.render()}, {loop.upper_affine.render()})",
                    has_conditional=any(isinstance(s, If) for s in walk_stmts(loop.body)),
                    has_inner_loop=any(isinstance(s, ForLoop) for s in walk_stmts(loop.body)),
                )
            )
    return AnalysisReport(unit_path=unit.path, entries=tuple(entries))


# convenience wrappers keyed by loop id --------------------------------------


def detect_reductions(unit: SourceUnit, loop_id: str) -> list[ReductionPattern]:
    func = unit.function_of_loop(loop_id)
    if func is None:
        raise UnknownLoopId(f"loop id {loop_id!r} not found")
    fa = _FunctionAnalyzer(unit, func)
    loop = unit.loop_by_id(loop_id)
    assert loop is not None
    out = fa.detect_reductions(loop)
    for cell in fa.detect_cells(loop):
        out.append(
            ReductionPattern(
                variable=cell.synthetic_name, op=cell.op, loop_id=loop_id,
                loop_level=fa.scan.loop_level(loop_id),
                fp=cell.elem_type in _FP_TYPES, synthetic=True, cell=cell,
            )
        )
    return out


def detect_privatizable(unit: SourceUnit, loop_id: str) -> list[PrivatizableVar]:
    func = unit.function_of_loop(loop_id)
    if func is None:
        raise UnknownLoopId(f"loop id {loop_id!r} not found")
    fa = _FunctionAnalyzer(unit, func)
    loop = unit.loop_by_id(loop_id)
    assert loop is not None
    return fa.detect_privatizable(loop)


def collect_accesses(unit: SourceUnit, func_name: str) -> list[ArrayAccess]:
    func = unit.function(func_name)
    if func is None:
        raise KeyError(func_name)
    return _FunctionScan(unit, func).accesses
