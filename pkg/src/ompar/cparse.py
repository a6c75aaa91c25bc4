"""Recursive-descent parser and span-splicing emitter for a restricted C subset.

Subset (the whole grammar this pipeline understands):

* one translation unit, no preprocessor (inputs are pre-expanded; stray
  ``#`` lines at top level are skipped, never recorded);
* function definitions over ``void/int/long/float/double`` with scalar or
  single-star pointer parameters of those types;
* statements: ``for`` loops with affine bounds, ``if``/``else``, assignments,
  compound assignments, scalar declarations, braced blocks;
* expressions: integer/float literals, scalar reads, ``p[subscript]`` array
  reads/writes, the usual arithmetic/comparison/logical/bit operators.

Anything else — ``while``, ``goto``, calls, pointer arithmetic, multi
declarators, ternaries — degrades to :class:`~ompar.ir.OpaqueStmt` as long as
braces and parentheses balance.  Only structural breakage raises
:class:`~ompar.errors.CSyntaxError`: unbalanced braces/parens/comments, or a
for-header that does not have three ``;``-separated parts.

For-headers inside the subset look like ``for (int i = LB; i < UB; i++)``:
the induction variable is initialized in the header (declared ``int``/``long``
or assigned), the condition is ``var < e`` or ``var <= e`` (normalized to an
exclusive bound), and the increment is ``++v``, ``v++``, ``v += c`` or
``v = v + c``.  Non-unit steps are recorded but mark the loop non-analyzable.

Statement and expression spans are byte-accurate: ``unit.text[s.span[0]:
s.span[1]]`` reproduces the exact statement text, and re-emitting a unit with
no edits is the identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal, Optional

from .errors import AnchorError, CSyntaxError, RewriteConflict
from .ir import (
    AffineExpr,
    Assign,
    BinOp,
    Block,
    CallExpr,
    CompoundAssign,
    Decl,
    Expr,
    FloatLit,
    ForLoop,
    FunctionDecl,
    If,
    IndexExpr,
    IntLit,
    OpaqueStmt,
    Param,
    SourceUnit,
    Span,
    Stmt,
    UnaryOp,
    VarRef,
    affine_of,
    walk_expr,
)

SCALAR_TYPES = ("int", "long", "float", "double")
_TYPE_WORDS = SCALAR_TYPES + ("void",)

_OPAQUE_KEYWORDS = frozenset(
    ["while", "do", "switch", "return", "break", "continue", "goto", "case", "default", "else"]
)

_PUNCTS = [
    "<<=", ">>=",
    "<=", ">=", "==", "!=", "&&", "||", "<<", ">>",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "++", "--", "->",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "~",
    "?", ":", ";", ",", ".", "(", ")", "[", "]", "{", "}", "#",
]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(
    r"""
    (?:
        0[xX][0-9a-fA-F]+[uUlL]*            # hex int
      | (?:\d+\.\d*|\.\d+|\d+)               # decimal digits w/ optional dot
        (?:[eE][+-]?\d+)?                    # exponent
        [fFlLuU]*                            # suffix soup
    )
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "float" | "str" | "punct" | "eof"
    text: str
    pos: int
    line: int
    col: int

    @property
    def end(self) -> int:
        return self.pos + len(self.text)


def tokenize(text: str, path: str = "<memory>") -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance_to(j: int) -> None:
        nonlocal i, line, col
        seg = text[i:j]
        nl = seg.count("\n")
        if nl:
            line_ = line + nl
            col_ = j - text.rfind("\n", i, j)
        else:
            line_ = line
            col_ = col + (j - i)
        i, (line, col) = j, (line_, col_)  # noqa: F841  (names rebound via nonlocal)

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance_to(i + 1)
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            advance_to(n if j < 0 else j)
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise CSyntaxError("unterminated comment", line, col)
            advance_to(j + 2)
            continue
        if c in "\"'":
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == c:
                    break
                j += 1
            if j >= n:
                raise CSyntaxError("unterminated literal", line, col)
            tokens.append(Token("str", text[i : j + 1], i, line, col))
            advance_to(j + 1)
            continue
        m = _NUM_RE.match(text, i) if (c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit())) else None
        if m:
            t = m.group(0)
            lowered = t.lower()
            is_float = (not lowered.startswith("0x")) and ("." in t or "e" in lowered or lowered.rstrip("ul").endswith("f"))
            tokens.append(Token("float" if is_float else "int", t, i, line, col))
            advance_to(m.end())
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(Token("ident", m.group(0), i, line, col))
            advance_to(m.end())
            continue
        for p in _PUNCTS:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, i, line, col))
                advance_to(i + len(p))
                break
        else:
            raise CSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", n, line, col))
    return tokens


class _NoParse(Exception):
    """Internal: expression/statement shape not recognized; caller recovers."""


def _int_value(text: str) -> int:
    raw = text.rstrip("uUlL")
    if raw.lower().startswith("0x"):
        return int(raw, 16)
    if raw.startswith("0") and len(raw) > 1:
        return int(raw, 8)
    return int(raw)


_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {")": "(", "]": "[", "}": "{"}

# binary operator precedence, low to high
_BIN_LEVELS = [
    ["||"],
    ["&&"],
    ["|"],
    ["^"],
    ["&"],
    ["==", "!="],
    ["<", "<=", ">", ">="],
    ["<<", ">>"],
    ["+", "-"],
    ["*", "/", "%"],
]

_COMPOUND_OPS = {"+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}


class _Parser:
    def __init__(self, tokens: list[Token], text: str, path: str):
        self.toks = tokens
        self.text = text
        self.path = path
        self.pos = 0
        self._loop_counter = 0
        self._current_function = ""

    # -- token helpers -------------------------------------------------------

    def peek(self, off: int = 0) -> Token:
        return self.toks[min(self.pos + off, len(self.toks) - 1)]

    def at(self, text: str, off: int = 0) -> bool:
        return self.peek(off).text == text and self.peek(off).kind != "eof"

    def at_kind(self, kind: str, off: int = 0) -> bool:
        return self.peek(off).kind == kind

    def take(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise _NoParse(f"expected {text!r}, found {t.text!r}")
        return self.take()

    def error(self, msg: str, tok: Optional[Token] = None) -> CSyntaxError:
        t = tok or self.peek()
        return CSyntaxError(msg, t.line, t.col)

    # -- balanced consumption -----------------------------------------------

    def skip_balanced_group(self) -> None:
        """Consume one ( [ { ... } ] ) group; current token must open it."""
        opener = self.take()
        stack = [opener]
        while stack:
            t = self.take()
            if t.kind == "eof":
                raise self.error(f"unbalanced {stack[-1].text!r}", stack[-1])
            if t.text in _OPEN:
                stack.append(t)
            elif t.text in _CLOSE:
                if _CLOSE[t.text] != stack[-1].text:
                    raise self.error(f"unbalanced {t.text!r}", t)
                stack.pop()

    def consume_opaque(self, start_idx: int, reason: str) -> OpaqueStmt:
        """Recover from a non-subset construct: rewind, then consume balanced
        tokens through the terminating ``;`` or one braced block."""
        self.pos = start_idx
        start_tok = self.peek()
        if start_tok.kind == "eof" or start_tok.text == "}":
            raise self.error("unexpected end of statement", start_tok)
        last = start_tok
        while True:
            t = self.peek()
            if t.kind == "eof":
                raise self.error("unbalanced statement", start_tok)
            if t.text == ";":
                last = self.take()
                break
            if t.text == "{":
                open_pos = self.pos
                self.skip_balanced_group()
                last = self.toks[self.pos - 1]
                break
            if t.text == "}":
                # enclosing block boundary; stop before it
                break
            if t.text in "([":
                self.skip_balanced_group()
                last = self.toks[self.pos - 1]
                continue
            if t.text in ")]":
                raise self.error(f"unbalanced {t.text!r}", t)
            last = self.take()
        return OpaqueStmt(span=(start_tok.pos, last.end), reason=reason)

    # -- expressions ----------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self._parse_bin(0)

    def _parse_bin(self, level: int) -> Expr:
        if level >= len(_BIN_LEVELS):
            return self._parse_unary()
        ops = _BIN_LEVELS[level]
        left = self._parse_bin(level + 1)
        while self.peek().kind == "punct" and self.peek().text in ops:
            op = self.take().text
            right = self._parse_bin(level + 1)
            left = BinOp(span=(left.span[0], right.span[1]), op=op, left=left, right=right)
        return left

    def _parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "punct" and t.text in ("-", "!", "+", "~"):
            self.take()
            inner = self._parse_unary()
            return UnaryOp(span=(t.pos, inner.span[1]), op=t.text, operand=inner)
        if t.kind == "punct" and t.text in ("++", "--"):
            self.take()
            inner = self._parse_unary()
            return UnaryOp(span=(t.pos, inner.span[1]), op="pre" + t.text, operand=inner)
        return self._parse_postfix()

    def _parse_postfix(self) -> Expr:
        e = self._parse_primary()
        while True:
            t = self.peek()
            if t.text == "[":
                self.take()
                idx = self.parse_expr()
                closer = self.expect("]")
                e = IndexExpr(span=(e.span[0], closer.end), base=e, index=idx)
            elif t.text in ("++", "--"):
                self.take()
                e = UnaryOp(span=(e.span[0], t.end), op="post" + t.text, operand=e)
            else:
                return e

    def _parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.take()
            return IntLit(span=(t.pos, t.end), value=_int_value(t.text), text=t.text)
        if t.kind == "float":
            self.take()
            return FloatLit(span=(t.pos, t.end), value=float(t.text.rstrip("fFlL")), text=t.text)
        if t.kind == "ident":
            self.take()
            if self.at("("):
                self.take()
                args: list[Expr] = []
                if not self.at(")"):
                    args.append(self.parse_expr())
                    while self.at(","):
                        self.take()
                        args.append(self.parse_expr())
                closer = self.expect(")")
                return CallExpr(span=(t.pos, closer.end), name=t.text, args=tuple(args))
            return VarRef(span=(t.pos, t.end), name=t.text)
        if t.text == "(":
            self.take()
            inner = self.parse_expr()
            closer = self.expect(")")
            # keep the parenthesized extent so spans stay splice-accurate
            return _respan(inner, (t.pos, closer.end))
        raise _NoParse(f"unexpected token {t.text!r}")

    # -- statements -----------------------------------------------------------

    def parse_stmt_list(self, terminator: str = "}") -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        while not self.at(terminator) and not self.at_kind("eof"):
            out.append(self.parse_stmt())
        return tuple(out)

    def parse_stmt(self) -> Stmt:
        start_idx = self.pos
        t = self.peek()
        if t.text == "{":
            open_tok = self.take()
            body = self.parse_stmt_list("}")
            if not self.at("}"):
                raise self.error("unbalanced '{'", open_tok)
            close = self.take()
            return Block(span=(open_tok.pos, close.end), body=body)
        if t.text == "for":
            return self.parse_for(start_idx)
        if t.text == "if":
            return self.parse_if(start_idx)
        if t.kind == "ident" and t.text in SCALAR_TYPES:
            return self.parse_decl(start_idx)
        if t.kind == "ident" and t.text in _OPAQUE_KEYWORDS:
            return self.consume_opaque(start_idx, f"'{t.text}' statement")
        if t.text == ";":
            tok = self.take()
            return OpaqueStmt(span=(tok.pos, tok.end), reason="empty statement")
        return self.parse_expr_stmt(start_idx)

    def parse_decl(self, start_idx: int) -> Stmt:
        type_tok = self.take()
        if self.at("*"):
            return self.consume_opaque(start_idx, "pointer local")
        name_tok = self.peek()
        if name_tok.kind != "ident":
            return self.consume_opaque(start_idx, "declaration outside subset")
        self.take()
        if self.at(";"):
            semi = self.take()
            return Decl(span=(type_tok.pos, semi.end), ctype=type_tok.text, name=name_tok.text, init=None)
        if self.at("="):
            self.take()
            try:
                init = self.parse_expr()
            except _NoParse:
                return self.consume_opaque(start_idx, "declaration initializer outside subset")
            if not self.at(";") or _has_disallowed(init):
                return self.consume_opaque(start_idx, "declaration initializer outside subset")
            semi = self.take()
            return Decl(span=(type_tok.pos, semi.end), ctype=type_tok.text, name=name_tok.text, init=init)
        return self.consume_opaque(start_idx, "declaration outside subset")

    def parse_expr_stmt(self, start_idx: int) -> Stmt:
        try:
            e = self.parse_expr()
        except _NoParse:
            return self.consume_opaque(start_idx, "expression outside subset")
        t = self.peek()
        if t.text == "=":
            self.take()
            try:
                rhs = self.parse_expr()
            except _NoParse:
                return self.consume_opaque(start_idx, "assignment outside subset")
            if not self.at(";") or not _is_lvalue(e) or _has_disallowed(e) or _has_disallowed(rhs):
                return self.consume_opaque(start_idx, "assignment outside subset")
            semi = self.take()
            return Assign(span=(e.span[0], semi.end), target=e, value=rhs)
        if t.kind == "punct" and t.text in _COMPOUND_OPS:
            self.take()
            try:
                rhs = self.parse_expr()
            except _NoParse:
                return self.consume_opaque(start_idx, "assignment outside subset")
            if not self.at(";") or not _is_lvalue(e) or _has_disallowed(e) or _has_disallowed(rhs):
                return self.consume_opaque(start_idx, "assignment outside subset")
            semi = self.take()
            return CompoundAssign(span=(e.span[0], semi.end), target=e, op=t.text[:-1], value=rhs)
        if t.text == ";" and isinstance(e, UnaryOp) and e.op in ("post++", "post--", "pre++", "pre--"):
            if _is_lvalue(e.operand) and not _has_disallowed(e.operand):
                semi = self.take()
                op = "+" if "++" in e.op else "-"
                one = IntLit(span=e.span, value=1, text="1")
                return CompoundAssign(span=(e.span[0], semi.end), target=e.operand, op=op, value=one)
        return self.consume_opaque(start_idx, "expression statement outside subset")

    def parse_if(self, start_idx: int) -> Stmt:
        if_tok = self.take()
        if not self.at("("):
            return self.consume_opaque(start_idx, "malformed if")
        self.take()
        try:
            cond = self.parse_expr()
        except _NoParse:
            return self.consume_opaque(start_idx, "if condition outside subset")
        if not self.at(")") or _has_disallowed(cond):
            return self.consume_opaque(start_idx, "if condition outside subset")
        self.take()
        then_stmt = self.parse_stmt()
        then_body = then_stmt.body if isinstance(then_stmt, Block) else (then_stmt,)
        else_body: Optional[tuple[Stmt, ...]] = None
        end = then_stmt.span[1]
        if self.at("else"):
            self.take()
            else_stmt = self.parse_stmt()
            else_body = else_stmt.body if isinstance(else_stmt, Block) else (else_stmt,)
            end = else_stmt.span[1]
        return If(span=(if_tok.pos, end), cond=cond, then_body=then_body, else_body=else_body)

    def parse_for(self, start_idx: int) -> Stmt:
        for_tok = self.take()
        if not self.at("("):
            raise self.error("malformed for-header: expected '('", for_tok)
        open_tok = self.take()
        # collect header tokens up to the matching ')'
        header: list[Token] = []
        depth = 1
        while depth:
            t = self.take()
            if t.kind == "eof":
                raise self.error("unbalanced '(' in for-header", open_tok)
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    break
            header.append(t)
        close_tok = self.toks[self.pos - 1]
        parts: list[list[Token]] = [[]]
        d = 0
        for t in header:
            if t.text in "([":
                d += 1
            elif t.text in ")]":
                d -= 1
            if t.text == ";" and d == 0:
                parts.append([])
            else:
                parts[-1].append(t)
        if len(parts) != 3:
            raise self.error("malformed for-header: expected three ';'-separated parts", for_tok)

        parsed = self._parse_for_parts(parts)
        if parsed is None:
            # subset violation, not a syntax error: swallow header + body
            self._skip_loop_body()
            last = self.toks[self.pos - 1]
            return OpaqueStmt(span=(for_tok.pos, last.end), reason="for-header outside subset")
        var, decl_type, lower, upper, lo_aff, up_aff, step = parsed
        self._loop_counter += 1
        loop_id = f"{self._current_function}.L{self._loop_counter}"
        body_stmt = self.parse_stmt()
        body = body_stmt.body if isinstance(body_stmt, Block) else (body_stmt,)
        return ForLoop(
            span=(for_tok.pos, body_stmt.span[1]),
            loop_id=loop_id,
            var=var,
            var_decl_type=decl_type,
            lower=lower,
            upper=upper,
            lower_affine=lo_aff,
            upper_affine=up_aff,
            step=step,
            body=body,
            header_span=(for_tok.pos, close_tok.end),
            line=for_tok.line,
        )

    def _skip_loop_body(self) -> None:
        """After an out-of-subset for-header: consume the body statement."""
        t = self.peek()
        if t.text == "{":
            self.skip_balanced_group()
            return
        # single-statement body: consume like an opaque statement
        self.consume_opaque(self.pos, "for body")

    def _parse_for_parts(self, parts: list[list[Token]]):
        init, cond, incr = parts
        sub = lambda toks: _Parser(toks + [Token("eof", "", toks[-1].end if toks else 0, 0, 0)], self.text, self.path)

        # --- init: [int|long] var = expr
        decl_type: Optional[str] = None
        it = list(init)
        if not it:
            return None
        if it[0].kind == "ident" and it[0].text in ("int", "long"):
            decl_type = it[0].text
            it = it[1:]
        if len(it) < 3 or it[0].kind != "ident" or it[1].text != "=":
            return None
        var = it[0].text
        p = sub(it[2:])
        try:
            lower = p.parse_expr()
        except _NoParse:
            return None
        if p.peek().kind != "eof" or _has_disallowed(lower):
            return None

        # --- cond: var < expr | var <= expr
        if len(cond) < 3 or cond[0].kind != "ident" or cond[0].text != var or cond[1].text not in ("<", "<="):
            return None
        p = sub(cond[2:])
        try:
            bound = p.parse_expr()
        except _NoParse:
            return None
        if p.peek().kind != "eof" or _has_disallowed(bound):
            return None
        if cond[1].text == "<=":
            upper: Expr = BinOp(span=bound.span, op="+", left=bound, right=IntLit(span=bound.span, value=1, text="1"))
        else:
            upper = bound

        # --- incr: v++ | ++v | v += c | v -= c | v = v + c | v = v - c | v--
        step = self._parse_for_step(incr, var)
        if step is None or step == 0:
            return None

        lo_aff = affine_of(lower)
        up_aff = affine_of(upper)
        if lo_aff is None or up_aff is None:
            return None
        return var, decl_type, lower, upper, lo_aff, up_aff, step

    @staticmethod
    def _parse_for_step(incr: list[Token], var: str) -> Optional[int]:
        ts = [t.text for t in incr]
        if ts == [var, "++"] or ts == ["++", var]:
            return 1
        if ts == [var, "--"] or ts == ["--", var]:
            return -1
        if len(ts) == 3 and ts[0] == var and ts[1] in ("+=", "-=") and incr[2].kind == "int":
            v = _int_value(ts[2])
            return v if ts[1] == "+=" else -v
        if (
            len(ts) == 5
            and ts[0] == var
            and ts[1] == "="
            and ts[2] == var
            and ts[3] in ("+", "-")
            and incr[4].kind == "int"
        ):
            v = _int_value(ts[4])
            return v if ts[3] == "+" else -v
        return None

    # -- top level --------------------------------------------------------------

    def parse_unit(self, path: str) -> SourceUnit:
        functions: list[FunctionDecl] = []
        while not self.at_kind("eof"):
            t = self.peek()
            if t.text == "#":
                # tolerated at top level only; skip to end of line
                line = t.line
                while self.peek().kind != "eof" and self.peek().line == line:
                    self.take()
                continue
            if t.text == ";":
                self.take()
                continue
            fn = self._try_function()
            if fn is not None:
                if any(f.name == fn.name for f in functions):
                    raise self.error(f"duplicate function name {fn.name!r}", t)
                functions.append(fn)
                continue
            self._skip_toplevel()
        return SourceUnit(path=path, text=self.text, functions=tuple(functions))

    def _try_function(self) -> Optional[FunctionDecl]:
        t = self.peek()
        if not (t.kind == "ident" and t.text in _TYPE_WORDS):
            return None
        # shape check: type ident ( ... ) {
        if not (self.peek(1).kind == "ident" and self.at("(", 2)):
            return None
        start = self.pos
        rtype = self.take().text
        name = self.take().text
        self.take()  # "("
        params: list[Param] = []
        supported = True
        if self.at(")"):
            pass
        elif self.at("void") and self.at(")", 1):
            self.take()
        else:
            while True:
                p = self._parse_param()
                if p is None:
                    supported = False
                    break
                params.append(p)
                if self.at(","):
                    self.take()
                    continue
                break
        if supported and not self.at(")"):
            supported = False
        if not supported:
            # consume through the param list and body, record nothing
            self.pos = start
            self._skip_toplevel()
            return None
        self.take()  # ")"
        if not self.at("{"):
            # prototype or K&R shape: not a definition
            self.pos = start
            self._skip_toplevel()
            return None
        self._current_function = name
        self._loop_counter = 0
        open_tok = self.take()
        body = self.parse_stmt_list("}")
        if not self.at("}"):
            raise self.error("unbalanced '{' in function body", open_tok)
        close = self.take()
        start_tok = self.toks[start]
        return FunctionDecl(
            name=name,
            return_type=rtype,
            params=tuple(params),
            body=body,
            span=(start_tok.pos, close.end),
        )

    def _parse_param(self) -> Optional[Param]:
        first = self.peek()
        if first.text == "const":
            self.take()
        t = self.peek()
        if not (t.kind == "ident" and t.text in SCALAR_TYPES):
            return None
        self.take()
        is_ptr = False
        if self.at("*"):
            self.take()
            is_ptr = True
            if self.at("*"):
                return None
        if self.at("restrict"):
            self.take()
        name_tok = self.peek()
        if name_tok.kind != "ident":
            return None
        self.take()
        if self.at("["):
            return None  # array-typed params are outside the subset
        return Param(name=name_tok.text, ctype=t.text, is_pointer=is_ptr, span=(first.pos, name_tok.end))

    def _skip_toplevel(self) -> None:
        """Skip one unrecognized top-level construct, keeping balance."""
        start = self.peek()
        while True:
            t = self.peek()
            if t.kind == "eof":
                raise self.error("unbalanced construct at top level", start)
            if t.text == ";":
                self.take()
                return
            if t.text == "{":
                self.skip_balanced_group()
                return
            if t.text in "([":
                self.skip_balanced_group()
                continue
            if t.text in ")]}":
                raise self.error(f"unbalanced {t.text!r}", t)
            self.take()


def _respan(e: Expr, span: Span) -> Expr:
    """Widen an expression's span (parenthesized exprs keep their parens)."""
    import dataclasses

    return dataclasses.replace(e, span=span)


def _is_lvalue(e: Expr) -> bool:
    if isinstance(e, VarRef):
        return True
    return isinstance(e, IndexExpr) and isinstance(e.base, (VarRef, IndexExpr))


def _has_disallowed(e: Expr) -> bool:
    """Calls, increments, ternary leftovers: fine to *parse*, but any statement
    containing them is outside the subset."""
    for node in walk_expr(e):
        if isinstance(node, CallExpr):
            return True
        if isinstance(node, UnaryOp) and node.op in ("pre++", "pre--", "post++", "post--"):
            return True
    return False


def parse(text: str, path: str = "<memory>") -> SourceUnit:
    """Parse a translation unit.

    Raises :class:`CSyntaxError` (with line/column) only for structural
    breakage; subset violations degrade to opaque statements.
    """
    tokens = tokenize(text, path)
    return _Parser(tokens, text, path).parse_unit(path)


# --------------------------------------------------------------------------
# emitter
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Edit:
    """A splice against the original text.

    ``before`` inserts whole lines above the line containing the anchor
    (text must end with a newline and carry its own indentation); ``after``
    inserts whole lines below the line where the anchor ends; ``replace``
    substitutes the anchor's exact byte range.
    """

    anchor: Span
    where: Literal["before", "after", "replace"]
    text: str


def emit(unit: SourceUnit, edits: list[Edit] | tuple[Edit, ...] = ()) -> str:
    """Re-emit a unit with edits spliced in.  No edits → byte-identical text.

    Raises :class:`AnchorError` when an edit references a span that is not a
    node of the unit, :class:`RewriteConflict` when replacements overlap.
    """
    if not edits:
        return unit.text
    valid = unit.node_spans()
    text = unit.text
    concrete: list[tuple[int, int, str]] = []
    for e in edits:
        if e.anchor not in valid:
            raise AnchorError(f"edit anchor {e.anchor} is not a node span of {unit.path}")
        if e.where == "replace":
            concrete.append((e.anchor[0], e.anchor[1], e.text))
        elif e.where == "before":
            pos = text.rfind("\n", 0, e.anchor[0]) + 1
            concrete.append((pos, pos, e.text))
        elif e.where == "after":
            nl = text.find("\n", e.anchor[1])
            pos = (nl + 1) if nl >= 0 else len(text)
            concrete.append((pos, pos, e.text))
        else:
            raise AnchorError(f"unknown edit mode {e.where!r}")
    order = sorted(range(len(concrete)), key=lambda i: (concrete[i][0], concrete[i][1]))
    out: list[str] = []
    cur = 0
    for i in order:
        s, e_, t = concrete[i]
        if s < cur:
            raise RewriteConflict(f"overlapping edits near byte {s}")
        out.append(text[cur:s])
        out.append(t)
        cur = max(cur, e_)
    out.append(text[cur:])
    return "".join(out)
