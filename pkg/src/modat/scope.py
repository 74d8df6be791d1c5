"""Name resolution inside one behavior diagram.

A diagram is always resolved in the context of a concrete host block: an
inherited body sees the variant's parts and the variant's versions of self
functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import model as m
from . import sysfuncs
from .behavior import (
    ARITHMETIC,
    COMPARISONS,
    Binary,
    Expr,
    FunctionCall,
    Literal,
    Ref,
    TypeTag,
    Unary,
    INT_MIN,
    INT_MAX,
    TIME_MAX,
)


class ScopeError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class Resolved:
    kind: str  # "param" | "attr"
    lane: Optional[str]  # "self" or a part name for attributes
    name: str
    type: TypeTag
    io: Optional[m.IO] = None


@dataclass(frozen=True)
class ResolvedCall:
    kind: str  # "self" | "part" | "system"
    lane: str
    function: m.FunctionDef
    block: Optional[str]  # callee block for self/part


class Scope:
    def __init__(self, model: m.Model, block: str, fn: m.FunctionDef):
        self.model = model
        self.block = block
        self.fn = fn
        self.parts = {p.name: p.block for p in m.effective_parts(model, block)}
        self.lanes = set(fn.body.lanes) if fn.body is not None else set()

    def lane_block(self, lane: str) -> Optional[str]:
        if lane == "self":
            return self.block
        return self.parts.get(lane)

    def _check_lane(self, head: str) -> None:
        if head not in self.lanes:
            raise ScopeError("E003", f"{head!r} is used but not declared as a lane of this diagram")

    def resolve(self, ref: Ref) -> Resolved:
        path = ref.path
        if len(path) == 1:
            p = self.fn.param(path[0])
            if p is not None:
                return Resolved("param", None, p.name, p.type)
            raise ScopeError("E004", f"{path[0]!r} is not a parameter of {self.fn.name}(); "
                                     "attributes must be qualified with their lane")
        head = path[0]
        if head == "system":
            raise ScopeError("E004", "the system lane offers functions only, no attributes")
        if head == "self":
            block = self.block
            if len(path) > 2:
                raise ScopeError("E005", f"{ref.text!r} reaches below the host block; "
                                         "use the part lane directly")
        elif head in self.parts:
            if len(path) > 2:
                raise ScopeError("E005", f"{ref.text!r} accesses more than one hierarchy level down")
            block = self.parts[head]
        else:
            raise ScopeError("E004", f"{head!r} is neither self, a part of {self.block} nor system")
        self._check_lane(head)
        attr = m.effective_attribute(self.model, block, path[1])
        if attr is None:
            raise ScopeError("E004", f"block {block} has no attribute {path[1]!r}")
        return Resolved("attr", head, attr.name, attr.type, attr.io)

    def resolve_target(self, ref: Ref) -> Resolved:
        r = self.resolve(ref)
        if r.kind == "param":
            raise ScopeError("E004", f"parameter {r.name!r} is read-only")
        if r.lane != "self":
            blk = self.model.block(self.parts[r.lane])
            if blk.kind is not m.BlockKind.COMPONENT or r.name != m.SIGNAL:
                raise ScopeError("E004", f"{ref.text!r}: only a component's Signal may be written from outside")
        return r

    def resolve_call(self, call: FunctionCall) -> ResolvedCall:
        head = call.lane[0]
        if len(call.lane) > 1:
            if head in self.parts or head == "self":
                raise ScopeError("E005", f"call {'.'.join(call.lane)}.{call.function}() reaches more than "
                                         "one hierarchy level down")
            raise ScopeError("E004", f"{head!r} is neither self, a part of {self.block} nor system")
        if head == "system":
            self._check_lane(head)
            decl = self.model.system_function(call.function)
            if decl is None:
                raise ScopeError("E008", f"system function {call.function!r} is not declared")
            if sysfuncs.lookup(call.function) is None:
                raise ScopeError("E008", f"system function {call.function!r} has no registered implementation")
            return ResolvedCall("system", head, decl, None)
        if head == "self":
            block = self.block
        elif head in self.parts:
            block = self.parts[head]
        else:
            raise ScopeError("E004", f"{head!r} is neither self, a part of {self.block} nor system")
        self._check_lane(head)
        f = m.effective_function(self.model, block, call.function)
        if f is None:
            raise ScopeError("E008", f"block {block} has no function {call.function!r}")
        return ResolvedCall("self" if head == "self" else "part", head, f, block)


# ---------------------------------------------------------------------------
# Typing
# ---------------------------------------------------------------------------


def literal_range_error(lit: Literal) -> Optional[str]:
    if lit.type is TypeTag.INT and not (INT_MIN <= lit.value <= INT_MAX):
        return f"INT literal {lit.value} is outside {INT_MIN}..{INT_MAX}"
    if lit.type is TypeTag.TIME and not (0 <= lit.value <= TIME_MAX):
        return f"TIME literal {lit.value}ms is outside 0..{TIME_MAX}ms"
    if lit.type is TypeTag.REAL and (lit.value != lit.value or abs(lit.value) == float("inf")):
        return "REAL literal is not finite"
    return None


def infer(expr: Expr, lookup, errors: list) -> Optional[TypeTag]:
    """Type of ``expr``; ``lookup(ref)`` returns a TypeTag or None if unresolved.

    Type errors are appended to ``errors`` as (message, span). None means the
    type is unknown (already reported elsewhere or an error here).
    """
    if isinstance(expr, Literal):
        msg = literal_range_error(expr)
        if msg:
            errors.append((msg, expr.span))
        return expr.type
    if isinstance(expr, Ref):
        return lookup(expr)
    if isinstance(expr, Unary):
        t = infer(expr.operand, lookup, errors)
        if t is None:
            return None
        if expr.op == "not":
            if t is not TypeTag.BOOL:
                errors.append((f"'not' needs BOOL, got {t}", expr.span))
                return None
            return TypeTag.BOOL
        if t not in (TypeTag.INT, TypeTag.REAL):
            errors.append((f"unary '-' needs INT or REAL, got {t}", expr.span))
            return None
        return t
    lt = infer(expr.left, lookup, errors)
    rt = infer(expr.right, lookup, errors)
    if lt is None or rt is None:
        return TypeTag.BOOL if expr.op in COMPARISONS or expr.op in ("and", "or") else None
    if expr.op in ("and", "or"):
        if lt is not TypeTag.BOOL or rt is not TypeTag.BOOL:
            errors.append((f"'{expr.op}' needs BOOL operands, got {lt} and {rt}", expr.span))
        return TypeTag.BOOL
    if lt is not rt:
        errors.append((f"operands of '{expr.op}' differ in type: {lt} vs {rt}", expr.span))
        return TypeTag.BOOL if expr.op in COMPARISONS else None
    if expr.op in COMPARISONS:
        if lt is TypeTag.BOOL and expr.op not in ("==", "!="):
            errors.append((f"'{expr.op}' is not defined on BOOL", expr.span))
        return TypeTag.BOOL
    assert expr.op in ARITHMETIC
    if lt is TypeTag.BOOL or (lt is TypeTag.TIME and expr.op == "*"):
        errors.append((f"'{expr.op}' is not defined on {lt}", expr.span))
        return None
    return lt
