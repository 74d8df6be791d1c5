"""Independent reference implementations used as test oracles.

These deliberately avoid the package's own helpers (effective_*, compile_expr,
the Mangler) so that agreement is evidence, not tautology.
"""

from __future__ import annotations

import re

from modat.behavior import Binary, Literal, Ref, TypeTag, Unary

# ---------------------------------------------------------------------------
# Inheritance
# ---------------------------------------------------------------------------


def _overlay(base_items, own_items):
    """Base order, own members replacing same-named ones, new ones appended."""
    own = {x.name: x for x in own_items}
    out = [own.pop(x.name, x) for x in base_items]
    return out + [x for x in own_items if x.name in own]


def flat_members(model, name):
    """(parts, attrs, functions) of a block, computed from raw definitions."""
    b = model.blocks[name]
    if b.base is None:
        fns = list(b.functions)
        if b.kind.value == "component":
            from modat.model import intrinsic_functions

            sig = [a for a in b.attributes if a.name == "Signal"]
            fns = list(intrinsic_functions(sig[0].type)) + fns if sig else fns
        return list(b.parts), list(b.attributes), fns
    bp, ba, bf = flat_members(model, b.base)
    return bp + list(b.parts), _overlay(ba, b.attributes), _overlay(bf, b.functions)


def flat_signature(model, name, rename=None):
    rename = rename or {}
    parts, attrs, fns = flat_members(model, name)
    return (
        model.blocks[name].kind,
        tuple((p.name, rename.get(p.block, p.block)) for p in parts),
        tuple((a.name, a.type, a.initial, a.io) for a in attrs),
        tuple((f.name, f.params, f.body, f.intrinsic) for f in fns),
    )


def lock_status(model, variant, fn):
    """Inherited / Overridden / New by direct inspection of the two blocks."""
    v = model.blocks[variant]
    _, _, base_fns = flat_members(model, v.base)
    inherited = [f for f in base_fns if f.name == fn]
    own = [f for f in v.functions if f.name == fn]
    if not inherited:
        return "New"
    if own and (own[0].params, own[0].body) != (inherited[0].params, inherited[0].body):
        return "Overridden"
    return "Inherited"


def count_instances(model, block):
    parts, _, _ = flat_members(model, block)
    return 1 + sum(count_instances(model, p.block) for p in parts)


def depth(model, name):
    d, b = 0, model.blocks[name]
    while b.base is not None:
        d += 1
        b = model.blocks[b.base]
    return d


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


def _wrap(t, v):
    if t == "INT":
        v = v % 65536
        return v - 65536 if v > 32767 else v
    if t == "TIME":
        v = v % 2**32
        return v - 2**32 if v > 2**31 - 1 else v
    return v


def eval_expr(e, env, types):
    """Returns (value, type name). ``env``/``types`` are keyed by ref text."""
    if isinstance(e, Literal):
        return e.value, e.type.value
    if isinstance(e, Ref):
        return env[e.text], types[e.text]
    if isinstance(e, Unary):
        v, t = eval_expr(e.operand, env, types)
        if e.op == "not":
            return (not v), "BOOL"
        return _wrap(t, -v), t
    lv, lt = eval_expr(e.left, env, types)
    if e.op == "and":
        return (lv and eval_expr(e.right, env, types)[0]), "BOOL"
    if e.op == "or":
        return (lv or eval_expr(e.right, env, types)[0]), "BOOL"
    rv, _ = eval_expr(e.right, env, types)
    if e.op in ("==", "!=", "<", "<=", ">", ">="):
        res = {"==": lv == rv, "!=": lv != rv, "<": lv < rv, "<=": lv <= rv,
               ">": lv > rv, ">=": lv >= rv}[e.op]
        return res, "BOOL"
    raw = {"+": lv + rv, "-": lv - rv, "*": lv * rv}[e.op]
    if lt == "REAL":
        return float(raw), lt
    return _wrap(lt, raw), lt


# ---------------------------------------------------------------------------
# Generated ST identifiers
# ---------------------------------------------------------------------------

_DECL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:\s*[A-Za-z_]", re.M)
_POU = re.compile(r"^(FUNCTION_BLOCK|PROGRAM)\s+([A-Za-z_][A-Za-z0-9_]*)(.*?)^END_\1", re.S | re.M)
_METHOD = re.compile(r"^\s*METHOD\s+(?:PUBLIC\s+)?([A-Za-z_][A-Za-z0-9_]*)(.*?)^\s*END_METHOD", re.S | re.M)
_VARS = re.compile(r"^\s*VAR[A-Z_]*[^\n]*$(.*?)^\s*END_VAR", re.S | re.M)


def _declared(text: str) -> list[str]:
    names = []
    for block in _VARS.findall(text):
        names += _DECL.findall(block)
    return names


def identifier_problems(st_text: str, keywords) -> list[str]:
    """Scan every POU and method for clashing or malformed identifiers."""
    problems = []
    pous = [m.group(2) for m in _POU.finditer(st_text)]
    if len({p.lower() for p in pous}) != len(pous):
        problems.append(f"duplicate POU names: {pous}")
    scopes = []
    for m in _POU.finditer(st_text):
        body = m.group(3)
        methods = list(_METHOD.finditer(body))
        names = [x.group(1) for x in methods]
        if len({n.lower() for n in names}) != len(names):
            problems.append(f"{m.group(2)}: duplicate methods {names}")
        scopes.append((m.group(2), _declared(_METHOD.sub("", body)), [m.group(2), *names]))
        for x in methods:
            scopes.append((f"{m.group(2)}.{x.group(1)}", _declared(x.group(2)), []))
    for owner, names, extra in scopes:
        low = [n.lower() for n in names]
        if len(set(low)) != len(low):
            dup = sorted({n for n in low if low.count(n) > 1})
            problems.append(f"{owner}: duplicate declarations {dup}")
        for n in names + extra:
            if "__" in n or n.endswith("_") or n.upper() in keywords:
                problems.append(f"{owner}: bad identifier {n!r}")
    return problems


__all__ = ["flat_members", "flat_signature", "lock_status", "count_instances", "depth",
           "eval_expr", "identifier_problems", "TypeTag"]
