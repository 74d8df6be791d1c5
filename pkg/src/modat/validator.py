"""Well-formedness rules for parsed models.

Every rule is a function ``model -> list[Diagnostic]`` registered under a
stable code. ``validate`` is the ordered union of all rules.

=====  =================================================================
Code   Rule
=====  =================================================================
E001   inheritance depth: a variant's base must not itself be a variant
E002   component leaf: components declare no parts and no functions
E003   lane binding: lanes are self, effective parts of the host, system;
       every lane used by a node or transition must be declared
E004   access scope: targets are self, a direct part or a system function;
       only a component's Signal is writable from outside
E005   deep access: dotted paths through more than one part level
E006   condition operands: attribute compared to a literal, a parameter of
       the host function or an attribute of a lane of the same diagram
E007   behavior shape: one unconditional start transition, typed node
       transitions, known node ids, policies only on call nodes, composite
       functions need a body, no recursive self calls
E008   typing: assignments, comparisons, arithmetic, call arity and
       argument types, literal ranges, system function signatures
W001   node unreachable from start
W002   node without outgoing transition
=====  =================================================================
"""

from __future__ import annotations

from typing import Callable, Iterable

from . import model as m
from . import sysfuncs
from .behavior import (
    AttributeOp,
    Binary,
    COMPARISONS,
    END,
    FunctionCall,
    Literal,
    Ref,
    START,
    Unary,
    walk_refs,
)
from .diagnostics import Diagnostic, error, warning
from .scope import Scope, ScopeError, infer, literal_range_error


class UnknownRule(KeyError):
    pass


def _bodies(model: m.Model):
    """Yield (block name, function) for every body in its host context.

    Inherited bodies are yielded once per inheriting block so that they are
    checked against the variant's parts and overridden functions too.
    """
    for name, blk in model.blocks.items():
        if blk.kind is not m.BlockKind.COMPOSITE:
            continue
        try:
            funcs = m.effective_functions(model, name)
        except m.ModelError:
            continue
        for f in funcs:
            if f.body is not None:
                yield name, f


def _own_bodies(model: m.Model):
    for name, blk in model.blocks.items():
        if blk.kind is not m.BlockKind.COMPOSITE:
            continue
        for f in blk.functions:
            if f.body is not None:
                yield name, f


def _dedupe(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    seen, out = set(), []
    for d in diags:
        key = (d.code, d.message, d.span)
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


# ---------------------------------------------------------------------------
# Structural rules
# ---------------------------------------------------------------------------


def rule_e001(model: m.Model) -> list[Diagnostic]:
    out = []
    for blk in model.blocks.values():
        if blk.base is None:
            continue
        base = model.blocks.get(blk.base)
        if base is not None and base.base is not None:
            out.append(error("E001", f"variant {blk.name} derives from {base.name}, which is itself a variant "
                                     f"of {base.base}; inheritance depth is limited to one", blk.base_span))
    return out


def rule_e002(model: m.Model) -> list[Diagnostic]:
    out = []
    for blk in model.blocks.values():
        if blk.kind is not m.BlockKind.COMPONENT:
            continue
        for p in blk.parts:
            out.append(error("E002", f"component {blk.name} cannot integrate part {p.name!r}", p.span))
        for f in blk.functions:
            what = "a behavior" if f.body is not None else "functions beyond setSignal/getSignal"
            out.append(error("E002", f"component {blk.name} cannot declare {what} ({f.name})", f.span))
    return out


# ---------------------------------------------------------------------------
# Scope rules: one traversal, filtered by code
# ---------------------------------------------------------------------------


def _scope_findings(model: m.Model) -> list[Diagnostic]:
    """E003/E004/E005 findings for nodes, routines and transition operations."""
    out: list[Diagnostic] = []
    for block, f in _bodies(model):
        sc = Scope(model, block, f)
        body = f.body
        for lane in body.lanes:
            if lane not in ("self", "system") and lane not in sc.parts:
                out.append(error("E003", f"lane {lane!r} is not self, system or a part of the host block", body.span))
        if len(set(body.lanes)) != len(body.lanes):
            out.append(error("E003", "a lane is listed twice", body.span))

        def check(fn, arg, span):
            try:
                fn(arg)
            except ScopeError as exc:
                if exc.code in ("E003", "E004", "E005"):
                    out.append(error(exc.code, exc.message, span))

        def assignments(items):
            for a in items:
                check(sc.resolve_target, a.target, a.span)
                for r in _refs(a.value):
                    check(sc.resolve, r, r.span)

        for n in body.nodes:
            if isinstance(n.action, FunctionCall):
                check(sc.resolve_call, n.action, n.action.span)
                for arg in n.action.args:
                    for r in _refs(arg):
                        check(sc.resolve, r, r.span)
            else:
                assignments(n.action.assignments)
            assignments(n.entry)
            assignments(n.exit)
        for t in body.transitions:
            assignments(t.operation)
    return out


def _refs(expr):
    return list(walk_refs(expr))


def rule_e003(model):
    return [d for d in _scope_findings(model) if d.code == "E003"]


def rule_e004(model):
    return [d for d in _scope_findings(model) if d.code == "E004"]


def rule_e005(model):
    return [d for d in _scope_findings(model) if d.code == "E005"]


def rule_e006(model: m.Model) -> list[Diagnostic]:
    out = []
    for block, f in _bodies(model):
        sc = Scope(model, block, f)
        for t in f.body.transitions:
            if t.condition is not None:
                _check_condition(sc, t.condition, out)
    return out


def _check_condition(sc: Scope, e, out: list) -> None:
    if isinstance(e, Binary) and e.op in ("and", "or"):
        _check_condition(sc, e.left, out)
        _check_condition(sc, e.right, out)
        return
    if isinstance(e, Unary) and e.op == "not":
        _check_condition(sc, e.operand, out)
        return
    if isinstance(e, Literal):
        return
    if isinstance(e, Ref):
        _operand(sc, e, out, allow_param=True, allow_literal=False)
        return
    if isinstance(e, Binary) and e.op in COMPARISONS:
        _operand(sc, e.left, out, allow_param=False, allow_literal=False)
        _operand(sc, e.right, out, allow_param=True, allow_literal=True)
        return
    out.append(error("E006", "a condition must compare attributes; arithmetic is not allowed here", e.span))


def _operand(sc: Scope, e, out, allow_param: bool, allow_literal: bool) -> None:
    if isinstance(e, Literal):
        if not allow_literal:
            out.append(error("E006", "the left side of a condition must be an attribute", e.span))
        return
    if not isinstance(e, Ref):
        out.append(error("E006", "condition operands must be an attribute, a parameter or a literal", e.span))
        return
    try:
        r = sc.resolve(e)
    except ScopeError as exc:
        out.append(error("E006", f"condition operand {e.text!r} is not visible in this diagram: {exc.message}",
                         e.span))
        return
    if r.kind == "param" and not allow_param:
        out.append(error("E006", "the left side of a condition must be an attribute, not a parameter", e.span))


# ---------------------------------------------------------------------------
# Shape
# ---------------------------------------------------------------------------


def rule_e007(model: m.Model) -> list[Diagnostic]:
    out = []
    for name, blk in model.blocks.items():
        if blk.kind is m.BlockKind.COMPOSITE:
            for f in blk.functions:
                if f.body is None:
                    out.append(error("E007", f"function {f.name} of composite block {name} has no behavior", f.span))
    for name, f in _own_bodies(model):
        out.extend(_shape(f))
    out.extend(_self_call_cycles(model))
    return out


def _shape(f: m.FunctionDef) -> list[Diagnostic]:
    body = f.body
    out = []
    ids: set[str] = set()
    for n in body.nodes:
        if n.id in ids:
            out.append(error("E007", f"node id {n.id!r} is used twice", n.span))
        ids.add(n.id)
    starts = body.start_transitions()
    if not starts:
        out.append(error("E007", f"behavior of {f.name} has no start transition", body.span))
    for extra in starts[1:]:
        out.append(error("E007", "only one start transition is allowed", extra.span))
    for t in body.transitions:
        if t.source == START:
            if t.kind is not None:
                out.append(error("E007", "the start transition fires unconditionally; "
                                         "remove 'on completion'/'when'", t.span))
        else:
            if t.source not in ids:
                out.append(error("E007", f"unknown transition source {t.source!r}", t.span))
            if t.kind is None:
                out.append(error("E007", "a node transition needs 'on completion' or 'when <condition>'", t.span))
            src = body.node(t.source)
            if t.policy is not None and src is not None and isinstance(src.action, AttributeOp):
                out.append(error("E007", "a policy applies only to transitions leaving a function call", t.span))
        if t.target != END and t.target not in ids:
            out.append(error("E007", f"unknown transition target {t.target!r}", t.span))
    return out


def _self_call_cycles(model: m.Model) -> list[Diagnostic]:
    out = []
    for name, blk in model.blocks.items():
        if blk.kind is not m.BlockKind.COMPOSITE:
            continue
        try:
            funcs = {f.name: f for f in m.effective_functions(model, name)}
        except m.ModelError:
            continue
        edges: dict[str, list] = {}
        for fname, f in funcs.items():
            edges[fname] = []
            if f.body is None:
                continue
            for n in f.body.nodes:
                a = n.action
                if isinstance(a, FunctionCall) and a.lane == ("self",) and a.function in funcs:
                    edges[fname].append((a.function, a.span))
        color: dict[str, int] = {}

        def dfs(u):
            color[u] = 1
            for v, span in edges[u]:
                if color.get(v) == 1:
                    out.append(error("E007", f"recursive self call {u}() -> {v}() is not allowed", span))
                elif color.get(v) is None:
                    dfs(v)
            color[u] = 2

        for fname in funcs:
            if fname not in color:
                dfs(fname)
    return out


# ---------------------------------------------------------------------------
# Typing
# ---------------------------------------------------------------------------


def rule_e008(model: m.Model) -> list[Diagnostic]:
    out = []
    for blk in model.blocks.values():
        for a in blk.attributes:
            msg = literal_range_error(Literal(a.type, a.initial))
            if msg:
                out.append(error("E008", f"initial value of {a.name}: {msg}", a.span))
    for f in model.system_functions:
        b = sysfuncs.lookup(f.name)
        if b is not None and b.signature.params != f.params:
            out.append(error("E008", f"system function {f.name} must have signature "
                                     f"({', '.join(f'{p.name}: {p.type}' for p in b.signature.params)})", f.span))
    for block, f in _bodies(model):
        sc = Scope(model, block, f)

        def lookup(ref):
            try:
                return sc.resolve(ref).type
            except ScopeError:
                return None

        def expr_type(e):
            errs: list = []
            t = infer(e, lookup, errs)
            for msg, span in errs:
                out.append(error("E008", msg, span))
            return t

        def assignments(items):
            for a in items:
                vt = expr_type(a.value)
                try:
                    tt = sc.resolve(a.target).type
                except ScopeError:
                    continue
                if vt is not None and vt is not tt:
                    out.append(error("E008", f"cannot assign {vt} to {a.target.text} of type {tt}", a.span))

        for n in f.body.nodes:
            act = n.action
            if isinstance(act, FunctionCall):
                arg_types = [expr_type(x) for x in act.args]
                try:
                    rc = sc.resolve_call(act)
                except ScopeError as exc:
                    if exc.code == "E008":
                        out.append(error("E008", exc.message, act.span))
                    continue
                params = rc.function.params
                if len(params) != len(act.args):
                    out.append(error("E008", f"{act.function}() expects {len(params)} argument(s), "
                                             f"got {len(act.args)}", act.span))
                    continue
                for p, t, x in zip(params, arg_types, act.args):
                    if t is not None and t is not p.type:
                        out.append(error("E008", f"argument {p.name} of {act.function}() must be {p.type}, "
                                                 f"got {t}", x.span))
            else:
                assignments(act.assignments)
            assignments(n.entry)
            assignments(n.exit)
        for t in f.body.transitions:
            if t.condition is not None:
                ct = expr_type(t.condition)
                if ct is not None and ct is not m.TypeTag.BOOL:
                    out.append(error("E008", f"condition must be BOOL, got {ct}", t.condition.span))
            assignments(t.operation)
    return out


# ---------------------------------------------------------------------------
# Warnings
# ---------------------------------------------------------------------------


def _graph(body):
    ids = {n.id for n in body.nodes}
    succ: dict[str, set] = {START: set()}
    for n in ids:
        succ[n] = set()
    for t in body.transitions:
        if t.source in succ and (t.target in ids or t.target == END):
            succ[t.source].add(t.target)
    return succ


def rule_w001(model: m.Model) -> list[Diagnostic]:
    out = []
    for _, f in _own_bodies(model):
        succ = _graph(f.body)
        seen, todo = {START}, [START]
        while todo:
            u = todo.pop()
            for v in succ.get(u, ()):
                if v not in seen and v != END:
                    seen.add(v)
                    todo.append(v)
        for n in f.body.nodes:
            if n.id not in seen:
                out.append(warning("W001", f"node {n.id!r} is unreachable from start", n.span))
    return out


def rule_w002(model: m.Model) -> list[Diagnostic]:
    out = []
    for _, f in _own_bodies(model):
        for n in f.body.nodes:
            if not f.body.outgoing(n.id):
                out.append(warning("W002", f"node {n.id!r} has no outgoing transition", n.span))
    return out


RULES: dict[str, tuple[str, Callable[[m.Model], list[Diagnostic]]]] = {
    "E001": ("inheritance depth is limited to one", rule_e001),
    "E002": ("component blocks are leaves", rule_e002),
    "E003": ("behavior lanes bind to self, parts and system", rule_e003),
    "E004": ("access scope: self, direct parts, system functions", rule_e004),
    "E005": ("no access through more than one hierarchy level", rule_e005),
    "E006": ("condition operands", rule_e006),
    "E007": ("behavior shape", rule_e007),
    "E008": ("type checking", rule_e008),
    "W001": ("unreachable node", rule_w001),
    "W002": ("dead-end node", rule_w002),
}


def check_rule(model: m.Model, rule: str) -> list[Diagnostic]:
    if rule not in RULES:
        raise UnknownRule(rule)
    return sorted(_dedupe(RULES[rule][1](model)), key=Diagnostic.sort_key)


def validate(model: m.Model) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for code in RULES:
        out.extend(check_rule(model, code))
    return sorted(out, key=Diagnostic.sort_key)


def errors_only(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.is_error]
