"""Loop-nest IR for a restricted C subset.

The IR records exactly what dependence testing and pragma insertion need:
functions, affine for-loops, statements, and byte spans.  Every node keeps its
span ``[start, end)`` into the original source text, so code generation can
splice edits back into the file without ever pretty-printing expressions.

Affine forms are canonical: an :class:`AffineExpr` is an integer constant plus
integer coefficients over *atoms*, where an atom is a single variable name or
a product of two names (``i*n`` from linearized subscripts).  Structural
equality of two instances is semantic equality of the affine forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Literal, Mapping, Optional, Union

Span = tuple[int, int]  # [start, end) byte offsets into SourceUnit.text

# An atom is a sorted tuple of variable names, length 1 or 2.  Plain scalars
# are 1-tuples; a linearized subscript like i*n contributes ("i", "n").
Atom = tuple[str, ...]


def _atom(*names: str) -> Atom:
    return tuple(sorted(names))


# --------------------------------------------------------------------------
# affine expressions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineExpr:
    """Canonical affine form: constant + sum of integer-coefficient atoms.

    Invariants: ``terms`` is sorted by atom, holds no zero coefficients, and
    every atom has one or two factors.  Construct through :meth:`make` (or the
    ``const``/``var`` helpers) so the invariants hold and ``==`` means
    semantic equality.
    """

    constant: int = 0
    terms: tuple[tuple[Atom, int], ...] = ()

    @staticmethod
    def make(constant: int = 0, coeffs: Optional[Mapping[Atom, int]] = None) -> "AffineExpr":
        items = tuple(sorted((a, c) for a, c in (coeffs or {}).items() if c != 0))
        return AffineExpr(constant, items)

    @staticmethod
    def const(value: int) -> "AffineExpr":
        return AffineExpr(value, ())

    @staticmethod
    def var(name: str, coeff: int = 1) -> "AffineExpr":
        return AffineExpr.make(0, {_atom(name): coeff})

    # -- algebra ------------------------------------------------------------

    def _coeffs(self) -> dict[Atom, int]:
        return dict(self.terms)

    def add(self, other: "AffineExpr") -> "AffineExpr":
        coeffs = self._coeffs()
        for atom, c in other.terms:
            coeffs[atom] = coeffs.get(atom, 0) + c
        return AffineExpr.make(self.constant + other.constant, coeffs)

    def sub(self, other: "AffineExpr") -> "AffineExpr":
        return self.add(other.scale(-1))

    def scale(self, k: int) -> "AffineExpr":
        return AffineExpr.make(self.constant * k, {a: c * k for a, c in self.terms})

    def mul(self, other: "AffineExpr") -> Optional["AffineExpr"]:
        """Product, or None when the result leaves the affine subset
        (an atom would need more than two factors)."""
        coeffs: dict[Atom, int] = {}

        def bump(atom: Atom, c: int) -> None:
            coeffs[atom] = coeffs.get(atom, 0) + c

        for atom, c in self.terms:
            bump(atom, c * other.constant)
        for atom, c in other.terms:
            bump(atom, c * self.constant)
        for a1, c1 in self.terms:
            for a2, c2 in other.terms:
                merged = _atom(*(a1 + a2))
                if len(merged) > 2:
                    return None
                bump(merged, c1 * c2)
        return AffineExpr.make(self.constant * other.constant, coeffs)

    # -- queries ------------------------------------------------------------

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def coefficient(self, atom: Atom) -> int:
        for a, c in self.terms:
            if a == atom:
                return c
        return 0

    def variables(self) -> frozenset[str]:
        return frozenset(name for atom, _ in self.terms for name in atom)

    def atoms_with(self, var: str) -> tuple[tuple[Atom, int], ...]:
        return tuple((a, c) for a, c in self.terms if var in a)

    def drop_var(self, var: str) -> "AffineExpr":
        """The expression with every atom mentioning ``var`` removed."""
        return AffineExpr.make(self.constant, {a: c for a, c in self.terms if var not in a})

    def eval(self, env: Mapping[str, int]) -> int:
        total = self.constant
        for atom, c in self.terms:
            v = c
            for name in atom:
                v *= env[name]
            total += v
        return total

    def render(self) -> str:
        if not self.terms:
            return str(self.constant)
        parts: list[str] = []
        for atom, c in self.terms:
            body = "*".join(atom)
            if c == 1:
                term = body
            elif c == -1:
                term = f"-{body}"
            else:
                term = f"{c}*{body}"
            parts.append(term)
        if self.constant:
            parts.append(str(self.constant))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


# --------------------------------------------------------------------------
# expressions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    span: Span


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    text: str


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float
    text: str


@dataclass(frozen=True)
class VarRef(Expr):
    name: str


@dataclass(frozen=True)
class UnaryOp(Expr):
    op: str  # "-", "!", "+"
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class IndexExpr(Expr):
    base: Expr  # VarRef in the subset; nested IndexExpr parses but is non-affine
    index: Expr


@dataclass(frozen=True)
class CallExpr(Expr):
    """Parsed for span bookkeeping only; a statement containing a call is
    outside the subset and becomes opaque."""

    name: str
    args: tuple[Expr, ...]


def walk_expr(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, UnaryOp):
        yield from walk_expr(e.operand)
    elif isinstance(e, BinOp):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, IndexExpr):
        yield from walk_expr(e.base)
        yield from walk_expr(e.index)
    elif isinstance(e, CallExpr):
        for a in e.args:
            yield from walk_expr(a)


def expr_eq(a: Expr, b: Expr) -> bool:
    """Structural equality ignoring spans (and literal spelling)."""
    if type(a) is not type(b):
        return False
    if isinstance(a, (IntLit, FloatLit)):
        return a.value == b.value  # type: ignore[union-attr]
    if isinstance(a, VarRef):
        return a.name == b.name  # type: ignore[union-attr]
    if isinstance(a, UnaryOp):
        return a.op == b.op and expr_eq(a.operand, b.operand)  # type: ignore[union-attr]
    if isinstance(a, BinOp):
        return a.op == b.op and expr_eq(a.left, b.left) and expr_eq(a.right, b.right)  # type: ignore[union-attr]
    if isinstance(a, IndexExpr):
        return expr_eq(a.base, b.base) and expr_eq(a.index, b.index)  # type: ignore[union-attr]
    if isinstance(a, CallExpr):
        return (
            a.name == b.name  # type: ignore[union-attr]
            and len(a.args) == len(b.args)  # type: ignore[union-attr]
            and all(expr_eq(x, y) for x, y in zip(a.args, b.args))  # type: ignore[union-attr]
        )
    return False


def expr_reads_var(e: Expr, name: str) -> bool:
    return any(isinstance(n, VarRef) and n.name == name for n in walk_expr(e))


def affine_of(e: Expr) -> Optional[AffineExpr]:
    """Translate an expression tree into canonical affine form, or None when
    it falls outside the affine subset (division, shifts, calls, subscripted
    operands, degree > 2 products...)."""
    if isinstance(e, IntLit):
        return AffineExpr.const(e.value)
    if isinstance(e, VarRef):
        return AffineExpr.var(e.name)
    if isinstance(e, UnaryOp):
        inner = affine_of(e.operand)
        if inner is None:
            return None
        if e.op == "-":
            return inner.scale(-1)
        if e.op == "+":
            return inner
        return None
    if isinstance(e, BinOp):
        left = affine_of(e.left)
        right = affine_of(e.right)
        if left is None or right is None:
            return None
        if e.op == "+":
            return left.add(right)
        if e.op == "-":
            return left.sub(right)
        if e.op == "*":
            return left.mul(right)
        return None
    return None


# --------------------------------------------------------------------------
# statements
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Stmt:
    span: Span


@dataclass(frozen=True)
class Assign(Stmt):
    target: Expr  # VarRef or IndexExpr
    value: Expr


@dataclass(frozen=True)
class CompoundAssign(Stmt):
    target: Expr
    op: str  # "+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>"
    value: Expr


@dataclass(frozen=True)
class Decl(Stmt):
    ctype: str  # "int" | "long" | "float" | "double"
    name: str
    init: Optional[Expr]


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then_body: tuple[Stmt, ...]
    else_body: Optional[tuple[Stmt, ...]]


@dataclass(frozen=True)
class Block(Stmt):
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class OpaqueStmt(Stmt):
    """A balanced construct outside the subset.  Loops containing one can
    never be judged parallelizable."""

    reason: str


@dataclass(frozen=True)
class ForLoop(Stmt):
    loop_id: str  # "<function>.L<n>", preorder within the function
    var: str
    var_decl_type: Optional[str]  # "int"/"long" when declared in the header
    lower: Expr
    upper: Expr  # exclusive (``<=`` headers are normalized to ``< e+1``)
    lower_affine: AffineExpr
    upper_affine: AffineExpr
    step: int  # 1 for unit step; anything else is recorded, not analyzed
    body: tuple[Stmt, ...]
    header_span: Span
    line: int  # 1-based source line of the ``for`` keyword


def walk_stmts(stmts: tuple[Stmt, ...]) -> Iterator[Stmt]:
    """Preorder walk of a statement sequence, descending into bodies."""
    for s in stmts:
        yield s
        if isinstance(s, ForLoop):
            yield from walk_stmts(s.body)
        elif isinstance(s, If):
            yield from walk_stmts(s.then_body)
            if s.else_body is not None:
                yield from walk_stmts(s.else_body)
        elif isinstance(s, Block):
            yield from walk_stmts(s.body)


# --------------------------------------------------------------------------
# functions and units
# --------------------------------------------------------------------------

CType = Literal["void", "int", "long", "float", "double"]


@dataclass(frozen=True)
class Param:
    name: str
    ctype: str
    is_pointer: bool
    span: Span


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    return_type: str
    params: tuple[Param, ...]
    body: tuple[Stmt, ...]
    span: Span

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def loops(self) -> Iterator[ForLoop]:
        for s in walk_stmts(self.body):
            if isinstance(s, ForLoop):
                yield s


@dataclass(frozen=True)
class SourceUnit:
    """A parsed translation unit.  ``text`` is the exact input; re-emitting
    with no edits reproduces it byte for byte."""

    path: str
    text: str
    functions: tuple[FunctionDecl, ...]

    def slice(self, span: Span) -> str:
        return self.text[span[0] : span[1]]

    def function(self, name: str) -> Optional[FunctionDecl]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def loops(self) -> Iterator[tuple[FunctionDecl, ForLoop]]:
        for f in self.functions:
            for loop in f.loops():
                yield f, loop

    def loop_by_id(self, loop_id: str) -> Optional[ForLoop]:
        for _, loop in self.loops():
            if loop.loop_id == loop_id:
                return loop
        return None

    def loop_at_line(self, line: int) -> Optional[ForLoop]:
        for _, loop in self.loops():
            if loop.line == line:
                return loop
        return None

    def function_of_loop(self, loop_id: str) -> Optional[FunctionDecl]:
        for f in self.functions:
            for loop in f.loops():
                if loop.loop_id == loop_id:
                    return f
        return None

    def node_spans(self) -> frozenset[Span]:
        """All statement and expression spans — the valid edit anchors."""
        spans: set[Span] = set()

        def add_expr(e: Expr) -> None:
            for node in walk_expr(e):
                spans.add(node.span)

        for f in self.functions:
            spans.add(f.span)
            for s in walk_stmts(f.body):
                spans.add(s.span)
                if isinstance(s, Assign):
                    add_expr(s.target)
                    add_expr(s.value)
                elif isinstance(s, CompoundAssign):
                    add_expr(s.target)
                    add_expr(s.value)
                elif isinstance(s, Decl) and s.init is not None:
                    add_expr(s.init)
                elif isinstance(s, If):
                    add_expr(s.cond)
                elif isinstance(s, ForLoop):
                    add_expr(s.lower)
                    add_expr(s.upper)
        return frozenset(spans)


# --------------------------------------------------------------------------
# array accesses (collected from loop bodies for dependence analysis)
# --------------------------------------------------------------------------

AccessMode = Literal["read", "write"]


@dataclass(frozen=True)
class ArrayAccess:
    """One subscripted access as seen from inside a loop nest.

    ``subscript`` is the canonical affine form when the subscript is affine
    over enclosing induction variables and loop-invariant symbols.  Otherwise
    ``affine`` is False, the access is conservatively treated as a *write* to
    an unknown region, and every enclosing loop's verdict degrades to
    unknown.
    """

    array: str
    mode: AccessMode
    affine: bool
    subscript: Optional[AffineExpr]
    loop_context: tuple[str, ...]  # enclosing loop ids, outermost first
    span: Span
    stmt_span: Span
    stmt_order: int  # execution-order index of the statement within its function
    reads_before_writes: bool  # within one statement, reads happen first
    loop_vars: tuple[str, ...] = ()  # induction variables of loop_context

    def describe(self) -> str:
        sub = self.subscript.render() if self.subscript is not None else "?"
        return f"{self.array}[{sub}] ({self.mode})"
