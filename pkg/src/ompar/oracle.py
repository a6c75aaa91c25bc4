"""Iteration-permutation oracle.

Runs a loop's iterations in different orders under a small reference
interpreter and compares the final memory states.  Order-insensitivity is a
necessary condition for safe parallelization, so this is the independent
ground truth the analyzer's ``parallelizable`` verdicts are tested against:
whenever analysis says a loop is parallelizable, every iteration order must
produce identical memory.

The interpreter implements C scalar semantics for the statement subset the
front end accepts: truncating integer division/remainder, short-circuit
logicals, comparisons yielding 0/1, and value coercion on stores to typed
variables.  Memory is a flat environment: scalars map to values and arrays
map to Python lists.

Small loops (trip count ≤ ``full_limit``) get exhaustive permutation
enumeration; larger ones get the reversed order plus seeded random shuffles.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Mapping, Optional, Sequence

from .errors import OracleOverflow, UnknownLoopId
from .ir import (
    Assign,
    BinOp,
    Block,
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
    SourceUnit,
    Stmt,
    UnaryOp,
    VarRef,
    walk_stmts,
)

Env = dict[str, object]

_INT_TYPES = ("int", "long")
_FLOAT_TYPES = ("float", "double")


@dataclass(frozen=True)
class OracleResult:
    equivalent: bool
    trip: int
    permutations_tested: int
    mode: str  # "trivial" | "full" | "sampled"
    counterexample: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.equivalent


# --------------------------------------------------------------------------
# reference interpreter
# --------------------------------------------------------------------------


def _c_div(a: int, b: int) -> int:
    if b == 0:
        raise OracleOverflow("integer division by zero during interpretation")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _c_mod(a: int, b: int) -> int:
    return a - _c_div(a, b) * b


class _Interp:
    def __init__(self, scalar_types: Mapping[str, str], array_types: Mapping[str, str]):
        self.scalar_types = dict(scalar_types)
        self.array_types = dict(array_types)

    # -- values ------------------------------------------------------------

    def _coerce(self, name: str, value: object, elem: bool = False) -> object:
        ctype = (self.array_types if elem else self.scalar_types).get(name)
        if ctype in _INT_TYPES:
            return math.trunc(value)  # type: ignore[arg-type]
        if ctype in _FLOAT_TYPES:
            return float(value)  # type: ignore[arg-type]
        return value

    def eval(self, e: Expr, env: Env) -> object:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, FloatLit):
            return e.value
        if isinstance(e, VarRef):
            try:
                return env[e.name]
            except KeyError:
                raise OracleOverflow(f"unbound symbol {e.name!r} during interpretation") from None
        if isinstance(e, IndexExpr):
            arr = self.eval(e.base, env)
            idx = self.eval(e.index, env)
            if not isinstance(arr, list):
                raise OracleOverflow(f"subscript of non-array value in {e!r}")
            if not isinstance(idx, int):
                raise OracleOverflow("non-integer subscript during interpretation")
            if idx < 0 or idx >= len(arr):
                raise OracleOverflow(f"index {idx} out of bounds (array of {len(arr)})")
            return arr[idx]
        if isinstance(e, UnaryOp):
            v = self.eval(e.operand, env)
            if e.op == "-":
                return -v  # type: ignore[operator]
            if e.op == "+":
                return v
            if e.op == "!":
                return 0 if v else 1
            if e.op == "~":
                return ~v  # type: ignore[operator]
            raise OracleOverflow(f"unary operator {e.op!r} not interpretable")
        if isinstance(e, BinOp):
            if e.op == "&&":
                return 1 if self.eval(e.left, env) and self.eval(e.right, env) else 0
            if e.op == "||":
                return 1 if self.eval(e.left, env) or self.eval(e.right, env) else 0
            l = self.eval(e.left, env)
            r = self.eval(e.right, env)
            return self._binop(e.op, l, r)
        raise OracleOverflow(f"expression {type(e).__name__} not interpretable")

    @staticmethod
    def _binop(op: str, l: object, r: object) -> object:
        if op == "+":
            return l + r  # type: ignore[operator]
        if op == "-":
            return l - r  # type: ignore[operator]
        if op == "*":
            return l * r  # type: ignore[operator]
        if op == "/":
            if isinstance(l, int) and isinstance(r, int):
                return _c_div(l, r)
            if r == 0:
                raise OracleOverflow("floating division by zero during interpretation")
            return l / r  # type: ignore[operator]
        if op == "%":
            if isinstance(l, int) and isinstance(r, int):
                return _c_mod(l, r)
            return math.fmod(l, r)  # type: ignore[arg-type]
        if op == "<":
            return 1 if l < r else 0  # type: ignore[operator]
        if op == "<=":
            return 1 if l <= r else 0  # type: ignore[operator]
        if op == ">":
            return 1 if l > r else 0  # type: ignore[operator]
        if op == ">=":
            return 1 if l >= r else 0  # type: ignore[operator]
        if op == "==":
            return 1 if l == r else 0
        if op == "!=":
            return 1 if l != r else 0
        if op == "<<":
            return l << r  # type: ignore[operator]
        if op == ">>":
            return l >> r  # type: ignore[operator]
        if op == "&":
            return l & r  # type: ignore[operator]
        if op == "|":
            return l | r  # type: ignore[operator]
        if op == "^":
            return l ^ r  # type: ignore[operator]
        raise OracleOverflow(f"operator {op!r} not interpretable")

    # -- statements ----------------------------------------------------------

    def exec_stmts(self, stmts: Sequence[Stmt], env: Env) -> None:
        for s in stmts:
            self.exec_stmt(s, env)

    def exec_stmt(self, s: Stmt, env: Env) -> None:
        if isinstance(s, Assign):
            self._store(s.target, self.eval(s.value, env), env)
        elif isinstance(s, CompoundAssign):
            cur = self.eval(s.target, env)
            val = self._binop(s.op, cur, self.eval(s.value, env))
            self._store(s.target, val, env)
        elif isinstance(s, Decl):
            if s.init is not None:
                env[s.name] = self._coerce(s.name, self.eval(s.init, env))
            else:
                env[s.name] = 0.0 if self.scalar_types.get(s.name) in _FLOAT_TYPES else 0
        elif isinstance(s, If):
            if self.eval(s.cond, env):
                self.exec_stmts(s.then_body, env)
            elif s.else_body is not None:
                self.exec_stmts(s.else_body, env)
        elif isinstance(s, Block):
            self.exec_stmts(s.body, env)
        elif isinstance(s, ForLoop):
            self.exec_loop(s, env, order=None)
        elif isinstance(s, OpaqueStmt):
            raise OracleOverflow(f"opaque statement not interpretable: {s.reason}")
        else:
            raise OracleOverflow(f"statement {type(s).__name__} not interpretable")

    def _store(self, target: Expr, value: object, env: Env) -> None:
        if isinstance(target, VarRef):
            env[target.name] = self._coerce(target.name, value)
        elif isinstance(target, IndexExpr):
            arr = self.eval(target.base, env)
            idx = self.eval(target.index, env)
            if not isinstance(arr, list) or not isinstance(idx, int):
                raise OracleOverflow("bad array store during interpretation")
            if idx < 0 or idx >= len(arr):
                raise OracleOverflow(f"index {idx} out of bounds (array of {len(arr)})")
            name = target.base.name if isinstance(target.base, VarRef) else ""
            arr[idx] = self._coerce(name, value, elem=True)
        else:
            raise OracleOverflow("store target not interpretable")

    def iteration_values(self, loop: ForLoop, env: Env) -> list[int]:
        lo = self.eval(loop.lower, env)
        hi = self.eval(loop.upper, env)
        if not isinstance(lo, int) or not isinstance(hi, int):
            raise OracleOverflow("non-integer loop bounds during interpretation")
        step = loop.step
        if step > 0:
            return list(range(lo, hi, step))
        if step < 0:
            return list(range(lo, hi, step))
        raise OracleOverflow("zero-step loop")

    def exec_loop(self, loop: ForLoop, env: Env, order: Optional[Sequence[int]]) -> None:
        vals = self.iteration_values(loop, env)
        seq = vals if order is None else [vals[i] for i in order]
        for v in seq:
            env[loop.var] = v
            self.exec_stmts(loop.body, env)
        # normal form after the loop: first out-of-range value — computed
        # from the sequential value list, identical for every order
        if vals:
            env[loop.var] = vals[-1] + loop.step
        else:
            env[loop.var] = self.eval(loop.lower, env)
        if loop.var_decl_type is not None:
            del env[loop.var]  # declaration-form variable is loop-scoped


# --------------------------------------------------------------------------
# environment plumbing
# --------------------------------------------------------------------------


def _types_of(func: FunctionDecl) -> tuple[dict[str, str], dict[str, str]]:
    scalars: dict[str, str] = {}
    arrays: dict[str, str] = {}
    for p in func.params:
        if p.is_pointer:
            arrays[p.name] = p.ctype
        else:
            scalars[p.name] = p.ctype
    for s in walk_stmts(func.body):
        if isinstance(s, Decl):
            scalars.setdefault(s.name, s.ctype)
        elif isinstance(s, ForLoop) and s.var_decl_type is not None:
            scalars.setdefault(s.var, s.var_decl_type)
    return scalars, arrays


def copy_env(env: Mapping[str, object]) -> Env:
    return {k: list(v) if isinstance(v, list) else v for k, v in env.items()}


def _mismatch(
    base: Env, other: Env, exclude: frozenset[str], tolerance: float
) -> Optional[dict]:
    for name in sorted(base):
        if name in exclude:
            continue
        bv = base[name]
        ov = other.get(name, None)
        if isinstance(bv, list):
            if not isinstance(ov, list) or len(ov) != len(bv):
                return {"name": name, "expected": bv, "got": ov}
            for i, (x, y) in enumerate(zip(bv, ov)):
                if not _close(x, y, tolerance):
                    return {"name": f"{name}[{i}]", "expected": x, "got": y}
        else:
            if ov is None or not _close(bv, ov, tolerance):
                return {"name": name, "expected": bv, "got": ov}
    return None


def _close(x: object, y: object, tol: float) -> bool:
    if isinstance(x, float) or isinstance(y, float):
        if x == y:
            return True
        if tol <= 0:
            return False
        m = max(1.0, abs(x), abs(y))  # type: ignore[arg-type]
        return abs(x - y) <= tol * m  # type: ignore[arg-type]
    return x == y


# --------------------------------------------------------------------------
# the oracle
# --------------------------------------------------------------------------


def run_function(unit: SourceUnit, func_name: str, env: Mapping[str, object]) -> Env:
    """Interpret a whole function body over a copy of ``env``; returns the
    final environment.  The reference executor for whole-kernel checks."""
    func = unit.function(func_name)
    if func is None:
        raise KeyError(func_name)
    scalars, arrays = _types_of(func)
    interp = _Interp(scalars, arrays)
    out = copy_env(env)
    interp.exec_stmts(func.body, out)
    return out


def run_loop(
    unit: SourceUnit,
    loop_id: str,
    env: Mapping[str, object],
    order: Optional[Sequence[int]] = None,
) -> Env:
    """Execute one loop over a copy of ``env`` in the given iteration order
    (indices into the iteration-value list; None = sequential)."""
    func = unit.function_of_loop(loop_id)
    loop = unit.loop_by_id(loop_id)
    if func is None or loop is None:
        raise UnknownLoopId(f"loop id {loop_id!r} not found")
    scalars, arrays = _types_of(func)
    interp = _Interp(scalars, arrays)
    out = copy_env(env)
    interp.exec_loop(loop, out, order)
    return out


def brute_force_oracle(
    unit: SourceUnit,
    loop_id: str,
    env: Mapping[str, object],
    *,
    tolerance: float = 0.0,
    exclude: Iterable[str] = (),
    full_limit: int = 6,
    samples: int = 1000,
    seed: int = 0,
    max_trip: int = 512,
) -> OracleResult:
    """Check whether every iteration order of one loop yields the same memory.

    ``exclude`` names variables whose final values are ignored (privatized
    scalars whose values are dead after the loop).  ``tolerance`` is the
    relative tolerance for float comparison (0 = bit-identical), used when
    reordering is expected to commute only up to rounding.

    Raises :class:`OracleOverflow` when the loop cannot be interpreted or its
    trip count exceeds ``max_trip``.
    """
    func = unit.function_of_loop(loop_id)
    loop = unit.loop_by_id(loop_id)
    if func is None or loop is None:
        raise UnknownLoopId(f"loop id {loop_id!r} not found")
    scalars, arrays = _types_of(func)
    interp = _Interp(scalars, arrays)

    probe = copy_env(env)
    trip = len(interp.iteration_values(loop, probe))
    if trip > max_trip:
        raise OracleOverflow(f"trip count {trip} exceeds oracle limit {max_trip}")

    base = copy_env(env)
    interp.exec_loop(loop, base, None)
    excl = frozenset(exclude)

    if trip <= 1:
        return OracleResult(True, trip, 0, "trivial")

    if trip <= full_limit:
        orders: Iterable[Sequence[int]] = (
            p for p in permutations(range(trip)) if p != tuple(range(trip))
        )
        mode = "full"
        budget = None
    else:
        rng = random.Random(seed)

        def sampled() -> Iterable[Sequence[int]]:
            yield tuple(reversed(range(trip)))
            for _ in range(samples - 1):
                order = list(range(trip))
                rng.shuffle(order)
                yield tuple(order)

        orders = sampled()
        mode = "sampled"
        budget = samples

    tested = 0
    for order in orders:
        tested += 1
        run = copy_env(env)
        interp.exec_loop(loop, run, order)
        bad = _mismatch(base, run, excl, tolerance)
        if bad is not None:
            bad = dict(bad)
            bad["order"] = list(order)
            return OracleResult(False, trip, tested, mode, counterexample=bad)
        if budget is not None and tested >= budget:
            break
    return OracleResult(True, trip, tested, mode)
