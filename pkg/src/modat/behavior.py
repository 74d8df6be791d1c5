"""Behavior-layer data: expressions and the state diagrams built from them.

All classes are frozen dataclasses. Spans are excluded from equality so that
a formatted-and-reparsed model compares equal to the original.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from .diagnostics import NO_SPAN, SourceSpan


class TypeTag(enum.Enum):
    BOOL = "BOOL"
    INT = "INT"
    REAL = "REAL"
    TIME = "TIME"

    def __str__(self) -> str:
        return self.value


INT_MIN, INT_MAX = -32768, 32767
TIME_MAX = 2**31 - 1


def default_value(t: TypeTag):
    return {TypeTag.BOOL: False, TypeTag.INT: 0, TypeTag.REAL: 0.0, TypeTag.TIME: 0}[t]


def format_literal(t: TypeTag, value) -> str:
    if t is TypeTag.BOOL:
        return "TRUE" if value else "FALSE"
    if t is TypeTag.TIME:
        return f"T#{value}ms"
    if t is TypeTag.REAL:
        text = repr(float(value))
        if "e" in text and "." not in text.split("e")[0]:
            mant, exp = text.split("e")
            text = f"{mant}.0e{exp}"
        return text
    return str(value)


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    type: TypeTag
    value: object
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Ref:
    """A dotted name: ``p`` (parameter), ``self.x``, ``lane.x`` or deeper."""

    path: tuple[str, ...]
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def text(self) -> str:
        return ".".join(self.path)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not"
    operand: "Expr"
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str  # or and == != < <= > >= + - *
    left: "Expr"
    right: "Expr"
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


Expr = Union[Literal, Ref, Unary, Binary]

COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")
ARITHMETIC = ("+", "-", "*")
LOGICAL = ("and", "or")


def walk_refs(expr: Expr):
    """Yield every Ref inside an expression, left to right."""
    if isinstance(expr, Ref):
        yield expr
    elif isinstance(expr, Unary):
        yield from walk_refs(expr.operand)
    elif isinstance(expr, Binary):
        yield from walk_refs(expr.left)
        yield from walk_refs(expr.right)


# ---------------------------------------------------------------------------
# Diagram elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Assignment:
    target: Ref
    value: Expr
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class FunctionCall:
    lane: tuple[str, ...]  # callee lane path, usually one element
    function: str
    args: tuple[Expr, ...] = ()
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class AttributeOp:
    assignments: tuple[Assignment, ...]
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


Action = Union[FunctionCall, AttributeOp]


@dataclass(frozen=True)
class Node:
    id: str
    action: Action
    entry: tuple[Assignment, ...] = ()
    exit: tuple[Assignment, ...] = ()
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def lane(self) -> str:
        if isinstance(self.action, FunctionCall):
            return self.action.lane[0]
        if self.action.assignments:
            return self.action.assignments[0].target.path[0]
        return "self"


class Policy(enum.Enum):
    RESUME = "resume"
    RESTART = "restart"
    CONTINUE = "continue"


DEFAULT_POLICY = Policy.RESTART

START = "start"
END = "end"


@dataclass(frozen=True)
class Transition:
    source: str  # node id or START
    target: str  # node id or END
    kind: Optional[str]  # "completion" | "condition" | None (start transitions)
    condition: Optional[Expr] = None
    policy: Optional[Policy] = None
    operation: tuple[Assignment, ...] = ()
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class BehaviorDef:
    lanes: tuple[str, ...]
    nodes: tuple[Node, ...]
    transitions: tuple[Transition, ...]
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    def node(self, node_id: str) -> Optional[Node]:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None

    def outgoing(self, source: str) -> list[Transition]:
        return [t for t in self.transitions if t.source == source]

    def start_transitions(self) -> list[Transition]:
        return self.outgoing(START)
