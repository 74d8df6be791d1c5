"""Canonical text form of models, used for round-tripping and body hashing."""

from __future__ import annotations

import hashlib

from . import model as m
from .behavior import (
    AttributeOp,
    Assignment,
    BehaviorDef,
    Binary,
    Expr,
    FunctionCall,
    Literal,
    Ref,
    START,
    Transition,
    TypeTag,
    Unary,
    default_value,
    format_literal,
)

INDENT = "    "

_PREC = {"or": 1, "and": 2, "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6}


def literal_text(lit: Literal) -> str:
    if lit.type in (TypeTag.INT, TypeTag.REAL, TypeTag.TIME) and _negative(lit.value):
        return "-" + format_literal(lit.type, -lit.value)
    return format_literal(lit.type, lit.value)


def _negative(v) -> bool:
    return v < 0 or (isinstance(v, float) and str(v).startswith("-"))


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return 3 if e.op == "not" else 7
    return 8


def expr_text(e: Expr) -> str:
    if isinstance(e, Literal):
        return literal_text(e)
    if isinstance(e, Ref):
        return e.text
    if isinstance(e, Unary):
        inner = expr_text(e.operand)
        if e.op == "not":
            if _prec(e.operand) < 3:
                inner = f"({inner})"
            return f"not {inner}"
        if _prec(e.operand) < 7 or (isinstance(e.operand, Literal) and e.operand.type is not TypeTag.BOOL):
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[e.op]
    left, right = expr_text(e.left), expr_text(e.right)
    if p == 4:
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
    else:
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
    return f"{left} {e.op} {right}"


def assignments_text(items) -> str:
    return ", ".join(f"{a.target.text} := {expr_text(a.value)}" for a in items)


def _params_text(f: m.FunctionDef) -> str:
    return ", ".join(f"{p.name}: {p.type}" for p in f.params)


def transition_text(t: Transition) -> str:
    out = f"{t.source} -> {t.target}"
    if t.kind == "completion":
        out += " on completion"
    elif t.kind == "condition":
        out += f" when {expr_text(t.condition)}"
        if t.policy is not None:
            out += f" policy {t.policy.value}"
    if t.operation:
        out += f" do {assignments_text(t.operation)}"
    return out


def behavior_lines(b: BehaviorDef, indent: str) -> list[str]:
    lines = [f"{indent}lanes {', '.join(b.lanes)}"]
    for n in b.nodes:
        if isinstance(n.action, FunctionCall):
            call = ".".join(n.action.lane + (n.action.function,))
            args = ", ".join(expr_text(a) for a in n.action.args)
            lines.append(f"{indent}node {n.id} : call {call}({args})")
        else:
            lines.append(f"{indent}node {n.id} : set {assignments_text(n.action.assignments)}")
        if n.entry:
            lines.append(f"{indent}{INDENT}entry {assignments_text(n.entry)}")
        if n.exit:
            lines.append(f"{indent}{INDENT}exit {assignments_text(n.exit)}")
    for t in b.transitions:
        lines.append(indent + transition_text(t))
    return lines


def function_lines(f: m.FunctionDef, indent: str) -> list[str]:
    head = f"{indent}{'override ' if f.override else ''}function {f.name}({_params_text(f)})"
    if f.body is None:
        return [head]
    return [head + " {"] + behavior_lines(f.body, indent + INDENT) + [indent + "}"]


def function_text(f: m.FunctionDef) -> str:
    """Canonical text of one function, independent of the override marker."""
    plain = m.FunctionDef(f.name, f.params, f.body)
    return "\n".join(function_lines(plain, ""))


def function_hash(f: m.FunctionDef) -> str:
    return hashlib.sha256(function_text(f).encode()).hexdigest()[:16]


def block_lines(b: m.BlockDef) -> list[str]:
    attrs = list(b.attributes)
    if b.base is not None:
        head = f"variant {b.name} of {b.base} {{"
    elif b.kind is m.BlockKind.COMPONENT:
        head = f"block {b.name} kind component"
        sig = next((a for a in attrs if a.io is not None), None)
        if sig is not None:
            attrs.remove(sig)
            head += f" {sig.io.value} {sig.type}"
            if sig.initial != default_value(sig.type) or _negative_zero(sig.initial):
                head += f" = {literal_text(Literal(sig.type, sig.initial))}"
        head += " {"
    else:
        head = f"block {b.name} kind composite {{"
    body = []
    for p in b.parts:
        body.append(f"{INDENT}part {p.name} : {p.block}")
    for a in attrs:
        body.append(f"{INDENT}attr {a.name} : {a.type} = {literal_text(Literal(a.type, a.initial))}")
    for f in b.functions:
        body.extend(function_lines(f, INDENT))
    if not body:
        return [head + "}"]
    return [head] + body + ["}"]


def _negative_zero(v) -> bool:
    return isinstance(v, float) and v == 0.0 and str(v).startswith("-")


def format_model(model: m.Model) -> str:
    chunks: list[str] = []
    for f in model.system_functions:
        chunks.append(f"system function {f.name}({_params_text(f)})")
    for b in model.blocks.values():
        chunks.append("\n".join(block_lines(b)))
    if model.root is not None:
        blk, inst = model.root
        chunks.append(f"root {inst} : {blk}")
    return "\n\n".join(chunks) + "\n"
