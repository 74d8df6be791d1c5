"""Structured Text emission.

Every block becomes ``FB_<Block>``; a ``PROGRAM Main`` owns the root
instance. Each function is a CASE state machine over ``<fn>_state``
(0 idle, 1..n node codes in declaration order, -1 done) that performs one
scan-cycle step per call, mirroring the simulator step by step.

Flattened mode (default) needs no OOP extensions. A block FB is driven
through two inputs: ``Cmd`` picks a function by its 1-based position in the
block's effective interface (0 runs the detached pass) and ``Op`` picks the
operation: 0 invoke, 1 suspend, 2 restart, 3 detach, 4 root step. Calls to
functions of the same block are inlined, which is finite because self-call
cycles are rejected by validation.

OOP mode emits ``EXTENDS`` for variants and one METHOD triple per function
(``_invoke``, ``_step``, ``_ctl``) plus ``DetachedPass``. Adapted initial
values of a variant are applied in ``FB_init``.

Two relaxations of strict IEC 61131-3 are used in both modes: a composite
writes ``part.Signal`` of an output component directly, and ``Main`` reaches
nested instances by hierarchical path to start a non-root entry function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import model as m
from .. import sysfuncs
from ..behavior import END, FunctionCall, Literal, Policy, DEFAULT_POLICY, Ref, TypeTag, Unary, Binary
from ..formatter import literal_text
from ..parser import GRAMMAR_VERSION
from ..scope import Scope
from ..validator import errors_only, validate
from .mangle import Mangler

ST_TYPES = {TypeTag.BOOL: "BOOL", TypeTag.INT: "INT", TypeTag.REAL: "LREAL", TypeTag.TIME: "TIME"}
FIELDS = (("state", "INT", "0"), ("done", "BOOL", "FALSE"), ("mode", "INT", "0"),
          ("last", "DINT", "-1"), ("cnt", "INT", "0"), ("dcyc", "DINT", "-1"))
RESERVED = ("Cmd", "Op", "gCycle", "CYCLE_MS", "DetachedPass", "FB_init", "Main", "Entry")
CNT_LIMIT = 30000
OPS = {"invoke": 0, "suspend": 1, "restart": 2, "detach": 3, "root": 4}


class InvalidModel(Exception):
    def __init__(self, diagnostics):
        super().__init__("model has validation errors:\n" + "\n".join(d.render() for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class EmitOptions:
    oop: bool = False

    @property
    def mode(self) -> str:
        return "oop" if self.oop else "flattened"


@dataclass
class STUnit:
    text: str
    blocks: dict
    main: str
    options: EmitOptions
    symbols: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Literals and expressions
# ---------------------------------------------------------------------------


def st_literal(lit: Literal) -> str:
    if lit.type is TypeTag.BOOL:
        return "TRUE" if lit.value else "FALSE"
    if lit.type is TypeTag.TIME:
        text = f"T#{abs(lit.value)}ms"
        return f"(-{text})" if lit.value < 0 else text
    text = literal_text(lit)
    return f"({text})" if text.startswith("-") else text


def st_decl_literal(t: TypeTag, value) -> str:
    return st_literal(Literal(t, value)).strip("()")


_BINOPS = {"==": "=", "!=": "<>", "and": "AND", "or": "OR"}


def st_expr(e, ref_text) -> str:
    if isinstance(e, Literal):
        return st_literal(e)
    if isinstance(e, Ref):
        return ref_text(e)
    if isinstance(e, Unary):
        inner = st_expr(e.operand, ref_text)
        return f"NOT ({inner})" if e.op == "not" else f"-({inner})"
    assert isinstance(e, Binary)
    op = _BINOPS.get(e.op, e.op)
    return f"({st_expr(e.left, ref_text)} {op} {st_expr(e.right, ref_text)})"


def indent(lines: list[str], n: int = 1) -> list[str]:
    pad = "    " * n
    return [pad + line if line else line for line in lines]


def if_chain(branches: list[tuple[str, list[str]]], otherwise: Optional[list[str]] = None) -> list[str]:
    if not branches:
        return list(otherwise or [])
    out = []
    for i, (cond, body) in enumerate(branches):
        out.append(f"{'IF' if i == 0 else 'ELSIF'} {cond} THEN")
        out.extend(indent(body))
    if otherwise:
        out.append("ELSE")
        out.extend(indent(otherwise))
    out.append("END_IF;")
    return out


# ---------------------------------------------------------------------------
# Built-in system functions in ST
# ---------------------------------------------------------------------------


def _delay_st(v) -> list[str]:
    return [
        f"{v['elapsed']} := {v['elapsed']} + CYCLE_MS;",
        *if_chain([(f"{v['elapsed']} >= {v['arg:duration']}", v["finish"])]),
    ]


def _wait_cycles_st(v) -> list[str]:
    return [
        f"{v['count']} := {v['count']} + 1;",
        *if_chain([(f"{v['count']} >= {v['arg:n']}", v["finish"])]),
    ]


BUILTIN_ST = {"delay": _delay_st, "waitCycles": _wait_cycles_st}


# ---------------------------------------------------------------------------
# Per-block naming and layout
# ---------------------------------------------------------------------------


@dataclass
class _Callee:
    kind: str  # self | part | system
    lane: str
    fn: m.FunctionDef
    block: Optional[str]


class _BlockInfo:
    def __init__(self, em: "Emitter", name: str):
        model = em.model
        self.name = name
        self.block = model.block(name)
        self.fb = em.fb_names[name]
        base = em.info(self.block.base) if self.block.base else None
        self.base = base
        self.names = base.names.copy() if base else Mangler(RESERVED)
        self.parts = m.effective_parts(model, name)
        self.attrs = m.effective_attributes(model, name)
        self.functions = m.effective_functions(model, name)
        self.index = {f.name: i + 1 for i, f in enumerate(self.functions)}
        used = set()
        if self.block.kind is m.BlockKind.COMPOSITE:
            for f in self.functions:
                if f.body is not None:
                    for n in f.body.nodes:
                        if isinstance(n.action, FunctionCall) and n.action.lane == ("system",):
                            used.add(n.action.function)
        self.systems = sorted(used)
        nm = self.names
        for p in self.parts:
            nm.request(("part", p.name), p.name)
        for a in self.attrs:
            nm.request(("attr", a.name), a.name)
        for f in self.functions:
            for fld, _, _ in FIELDS:
                nm.request(("fn", f.name, fld), f"{f.name}_{fld}")
            for p in f.params:
                nm.request(("in", f.name, p.name), f"{f.name}_{p.name}")
                nm.request(("arg", f.name, p.name), f"{f.name}_arg_{p.name}")
            for kind in ("invoke", "step", "ctl"):
                nm.request(("meth", f.name, kind), f"{f.name}_{kind}")
        for s in self.systems:
            b = sysfuncs.lookup(s)
            for fld, _, _ in FIELDS:
                nm.request(("sys", s, fld), f"sys_{s}_{fld}")
            for p in b.signature.params:
                nm.request(("sysarg", s, p.name), f"sys_{s}_arg_{p.name}")
            for loc, _ in b.locals:
                nm.request(("syslocal", s, loc), f"sys_{s}_{loc}")

    def n(self, *key) -> str:
        return self.names[key]

    def declarations(self, oop: bool) -> list[tuple[str, str, str, str, Optional[str]]]:
        """(section, key-id, name, type, init) for every variable this FB needs."""
        out = []
        if not oop:
            out.append(("VAR_INPUT", "Cmd", "Cmd", "INT", "0"))
            out.append(("VAR_INPUT", "Op", "Op", "INT", "0"))
        for a in self.attrs:
            if a.io is m.IO.INPUT:
                out.append(("VAR_INPUT", f"attr:{a.name}", self.n("attr", a.name), ST_TYPES[a.type],
                            st_decl_literal(a.type, a.initial)))
        for f in self.functions:
            for p in f.params:
                out.append(("VAR_INPUT", f"in:{f.name}:{p.name}", self.n("in", f.name, p.name), ST_TYPES[p.type], None))
        for a in self.attrs:
            if a.io is not m.IO.INPUT:
                out.append(("VAR_OUTPUT", f"attr:{a.name}", self.n("attr", a.name), ST_TYPES[a.type],
                            st_decl_literal(a.type, a.initial)))
        for f in self.functions:
            for fld, t, init in FIELDS:
                out.append(("VAR_OUTPUT", f"fn:{f.name}:{fld}", self.n("fn", f.name, fld), t, init))
        for p in self.parts:
            out.append(("VAR", f"part:{p.name}", self.n("part", p.name), None, p.block))
        for f in self.functions:
            for p in f.params:
                out.append(("VAR", f"arg:{f.name}:{p.name}", self.n("arg", f.name, p.name), ST_TYPES[p.type], None))
        for s in self.systems:
            b = sysfuncs.lookup(s)
            for fld, t, init in FIELDS:
                out.append(("VAR", f"sys:{s}:{fld}", self.n("sys", s, fld), t, init))
            for p in b.signature.params:
                out.append(("VAR", f"sysarg:{s}:{p.name}", self.n("sysarg", s, p.name), ST_TYPES[p.type], None))
            for loc, t in b.locals:
                out.append(("VAR", f"syslocal:{s}:{loc}", self.n("syslocal", s, loc), ST_TYPES[t], None))
        return out


# ---------------------------------------------------------------------------
# Function bodies
# ---------------------------------------------------------------------------


class _FnGen:
    """Statement generation for one function hosted by one block FB."""

    def __init__(self, em: "Emitter", info: _BlockInfo, f: m.FunctionDef):
        self.em = em
        self.info = info
        self.f = f
        self.oop = em.options.oop
        self.scope = Scope(em.model, info.name, f) if f.body is not None else None

    def v(self, fld: str) -> str:
        return self.info.n("fn", self.f.name, fld)

    # -- references --------------------------------------------------------

    def ref(self, ref: Ref) -> str:
        r = self.scope.resolve(ref)
        if r.kind == "param":
            return self.info.n("arg", self.f.name, r.name)
        if r.lane == "self":
            return self.info.n("attr", r.name)
        pblock = m.part_block(self.em.model, self.info.name, r.lane)
        return f"{self.info.n('part', r.lane)}.{self.em.info(pblock).n('attr', r.name)}"

    def expr(self, e) -> str:
        return st_expr(e, self.ref)

    def assigns(self, items) -> list[str]:
        out = []
        for a in items:
            target = self.ref(a.target)
            out.append(f"{target} := {self.expr(a.value)};")
        return out

    def callee(self, call: FunctionCall) -> _Callee:
        rc = self.scope.resolve_call(call)
        return _Callee(rc.kind, rc.lane, rc.function, rc.block)

    def cvar(self, c: _Callee, fld: str) -> str:
        if c.kind == "self":
            return self.info.n("fn", c.fn.name, fld)
        if c.kind == "system":
            return self.info.n("sys", c.fn.name, fld)
        return f"{self.info.n('part', c.lane)}.{self.em.info(c.block).n('fn', c.fn.name, fld)}"

    def running(self, c: _Callee) -> str:
        return f"({self.cvar(c, 'state')} > 0 AND {self.cvar(c, 'mode')} = 0)"

    # -- state changes -----------------------------------------------------

    def finish(self, var) -> list[str]:
        return [f"{var('state')} := -1;", f"{var('done')} := TRUE;", f"{var('mode')} := 0;"]

    def count(self) -> list[str]:
        return if_chain([(f"{self.v('cnt')} < {CNT_LIMIT}", [f"{self.v('cnt')} := {self.v('cnt')} + 1;"])])

    def enter(self, target: str, first_do: bool) -> list[str]:
        if target == END:
            return self.finish(self.v)
        body = self.f.body
        k = [n.id for n in body.nodes].index(target) + 1
        node = body.nodes[k - 1]
        out = [f"{self.v('state')} := {k};", f"{self.v('cnt')} := 0;"]
        out += self.assigns(node.entry)
        if first_do:
            out += self.do(node)
            out += self.count()
        return out

    def do(self, node) -> list[str]:
        if isinstance(node.action, FunctionCall):
            c = self.callee(node.action)
            return self.invoke(c, [self.expr(a) for a in node.action.args])
        return self.assigns(node.action.assignments)

    # -- step ----------------------------------------------------------------

    def step(self) -> list[str]:
        f = self.f
        if f.intrinsic:
            out = [f"{self.v('last')} := gCycle;"]
            if f.name == "setSignal":
                out.append(f"{self.info.n('attr', m.SIGNAL)} := {self.info.n('arg', f.name, 'v')};")
            return out + self.finish(self.v)
        body = f.body
        start = body.start_transitions()[0]
        fresh = self.assigns(start.operation) + self.enter(start.target, True)
        cases = []
        for i, node in enumerate(body.nodes, 1):
            branches = []
            c = self.callee(node.action) if isinstance(node.action, FunctionCall) else None
            for t in body.outgoing(node.id):
                if t.kind == "completion":
                    cond = f"{self.v('cnt')} >= 1"
                    if c is not None:
                        cond = f"({cond}) AND {self.cvar(c, 'done')}"
                else:
                    cond = self.expr(t.condition)
                act = self.assigns(node.exit)
                if c is not None:
                    act += if_chain([(self.running(c), self.preempt(c, t.policy or DEFAULT_POLICY))])
                act += self.assigns(t.operation)
                act += self.enter(t.target, False)
                branches.append((cond, act))
            cases.append((i, if_chain(branches, self.do(node) + self.count())))
        out = [f"{self.v('last')} := gCycle;"]
        node_case = [f"CASE {self.v('state')} OF"]
        for i, lines in cases:
            node_case.append(f"{i}:")
            node_case.extend(indent(lines))
        node_case.append("END_CASE;")
        out += if_chain([(f"{self.v('state')} = 0", fresh)], node_case)
        return out

    def invoke_self(self, args: list[tuple[str, str]], step_lines: list[str]) -> list[str]:
        """Inline invoke protocol for this function; ``args`` are (arg var, value)."""
        v = self.v
        out = if_chain([(f"{v('state')} = -1", [f"{v('state')} := 0;", f"{v('done')} := FALSE;"])])
        if args:
            out += if_chain([(f"{v('state')} = 0", [f"{a} := {e};" for a, e in args])])
        out.append(f"{v('mode')} := 0;")
        out += step_lines
        return if_chain([(f"{v('last')} <> gCycle", out)])

    def reset(self) -> list[str]:
        out = []
        if self.f.body is not None and not self.f.intrinsic:
            cases = []
            for i, node in enumerate(self.f.body.nodes, 1):
                if isinstance(node.action, FunctionCall):
                    c = self.callee(node.action)
                    cases.append((i, if_chain([(self.running(c), self.callee_reset(c))])))
            if cases:
                inner = [f"CASE {self.v('state')} OF"]
                for i, lines in cases:
                    inner.append(f"{i}:")
                    inner.extend(indent(lines))
                inner.append("END_CASE;")
                out += if_chain([(f"{self.v('state')} > 0", inner)])
        return out + [f"{self.v('state')} := 0;", f"{self.v('done')} := FALSE;", f"{self.v('mode')} := 0;"]

    # -- callee operations ------------------------------------------------

    def _system_step(self, c: _Callee) -> list[str]:
        s = c.fn.name
        b = sysfuncs.lookup(s)
        var = lambda fld: self.info.n("sys", s, fld)  # noqa: E731
        names = {loc: self.info.n("syslocal", s, loc) for loc, _ in b.locals}
        names.update({f"arg:{p.name}": self.info.n("sysarg", s, p.name) for p in b.signature.params})
        names["finish"] = self.finish(var)
        zero = [f"{names[loc]} := {st_decl_literal(t, 0)};" for loc, t in b.locals]
        out = [f"{var('last')} := gCycle;"]
        out += if_chain([(f"{var('state')} = 0", zero + [f"{var('state')} := 1;"])])
        return out + BUILTIN_ST[s](names)

    def system_gen(self, name: str) -> "_SysGen":
        return _SysGen(self, name)

    def invoke(self, c: _Callee, args: list[str]) -> list[str]:
        if c.kind == "system":
            return self.system_gen(c.fn.name).invoke(args)
        names = [p.name for p in c.fn.params]
        if c.kind == "self":
            g = _FnGen(self.em, self.info, c.fn)
            if self.oop:
                sets = [f"{self.info.n('in', c.fn.name, p)} := {a};" for p, a in zip(names, args)]
                return sets + [f"THIS^.{self.info.n('meth', c.fn.name, 'invoke')}();"]
            binds = [(self.info.n("arg", c.fn.name, p), a) for p, a in zip(names, args)]
            return g.invoke_self(binds, g.step())
        part = self.info.n("part", c.lane)
        pinfo = self.em.info(c.block)
        if self.oop:
            sets = [f"{part}.{pinfo.n('in', c.fn.name, p)} := {a};" for p, a in zip(names, args)]
            return sets + [f"{part}.{pinfo.n('meth', c.fn.name, 'invoke')}();"]
        ins = "".join(f", {pinfo.n('in', c.fn.name, p)} := {a}" for p, a in zip(names, args))
        return [f"{part}(Cmd := {pinfo.index[c.fn.name]}, Op := 0{ins});"]

    def _part_op(self, c: _Callee, op: str) -> list[str]:
        part = self.info.n("part", c.lane)
        pinfo = self.em.info(c.block)
        if self.oop:
            return [f"{part}.{pinfo.n('meth', c.fn.name, 'ctl')}(op := {OPS[op]});"]
        return [f"{part}(Cmd := {pinfo.index[c.fn.name]}, Op := {OPS[op]});"]

    def callee_reset(self, c: _Callee) -> list[str]:
        if c.kind == "part":
            return self._part_op(c, "restart")
        if c.kind == "system":
            var = lambda fld: self.info.n("sys", c.fn.name, fld)  # noqa: E731
            return [f"{var('state')} := 0;", f"{var('done')} := FALSE;", f"{var('mode')} := 0;"]
        if self.oop:
            return [f"THIS^.{self.info.n('meth', c.fn.name, 'ctl')}(op := {OPS['restart']});"]
        return _FnGen(self.em, self.info, c.fn).reset()

    def preempt(self, c: _Callee, policy: Policy) -> list[str]:
        if policy is Policy.RESTART:
            return self.callee_reset(c)
        if c.kind == "part":
            return self._part_op(c, "suspend" if policy is Policy.RESUME else "detach")
        if policy is Policy.RESUME:
            return [f"{self.cvar(c, 'mode')} := 1;"]
        return [f"{self.cvar(c, 'mode')} := 2;", f"{self.cvar(c, 'dcyc')} := gCycle;"]

    # -- dispatch handlers ------------------------------------------------

    def input_binds(self) -> list[tuple[str, str]]:
        return [(self.info.n("arg", self.f.name, p.name), self.info.n("in", self.f.name, p.name))
                for p in self.f.params]

    def step_ref(self) -> list[str]:
        if self.oop:
            return [f"THIS^.{self.info.n('meth', self.f.name, 'step')}();"]
        return self.step()

    def ops(self) -> list[tuple[int, list[str]]]:
        v = self.v
        binds = self.input_binds()
        root = if_chain([(f"{v('state')} = 0", [f"{a} := {e};" for a, e in binds])]) if binds else []
        root += self.step_ref()
        return [
            (OPS["suspend"], [f"{v('mode')} := 1;"]),
            (OPS["restart"], self.reset()),
            (OPS["detach"], [f"{v('mode')} := 2;", f"{v('dcyc')} := gCycle;"]),
            (OPS["root"], if_chain([(f"{v('state')} <> -1 AND {v('last')} <> gCycle", root)])),
        ]

    def detached_guard(self, var) -> str:
        return (f"{var('mode')} = 2 AND {var('state')} > 0 AND {var('dcyc')} <> gCycle "
                f"AND {var('last')} <> gCycle")


class _SysGen:
    def __init__(self, host: _FnGen, name: str):
        self.host = host
        self.name = name
        self.builtin = sysfuncs.lookup(name)

    def var(self, fld: str) -> str:
        return self.host.info.n("sys", self.name, fld)

    def step(self) -> list[str]:
        c = _Callee("system", "system", self.builtin.signature, None)
        return self.host._system_step(c)

    def invoke(self, args: list[str]) -> list[str]:
        info = self.host.info
        binds = [(info.n("sysarg", self.name, p.name), a) for p, a in zip(self.builtin.signature.params, args)]
        v = self.var
        out = if_chain([(f"{v('state')} = -1", [f"{v('state')} := 0;", f"{v('done')} := FALSE;"])])
        if binds:
            out += if_chain([(f"{v('state')} = 0", [f"{a} := {e};" for a, e in binds])])
        out.append(f"{v('mode')} := 0;")
        out += self.step()
        return if_chain([(f"{v('last')} <> gCycle", out)])


# ---------------------------------------------------------------------------
# Emitter
# ---------------------------------------------------------------------------


class Emitter:
    def __init__(self, model: m.Model, options: EmitOptions):
        self.model = model
        self.options = options
        self.global_names = Mangler(RESERVED)
        self.fb_names = {name: self.global_names.request(("fb", name), f"FB_{name}") for name in model.blocks}
        self._infos: dict[str, _BlockInfo] = {}

    def info(self, name: str) -> _BlockInfo:
        got = self._infos.get(name)
        if got is None:
            got = _BlockInfo(self, name)
            self._infos[name] = got
        return got

    # -- declarations -----------------------------------------------------

    def _var_blocks(self, decls) -> list[str]:
        out = []
        for section in ("VAR_INPUT", "VAR_OUTPUT", "VAR"):
            items = [d for d in decls if d[0] == section]
            if not items:
                continue
            out.append(section)
            for _, _, name, t, init in items:
                if t is None:
                    out.append(f"    {name} : {self.fb_names[init]};")
                elif init is None:
                    out.append(f"    {name} : {t};")
                else:
                    out.append(f"    {name} : {t} := {init};")
            out.append("END_VAR")
        return out

    def _detached_pass(self, info: _BlockInfo) -> list[str]:
        out = []
        oop = self.options.oop
        for f in info.functions:
            if f.intrinsic:
                continue
            g = _FnGen(self, info, f)
            out += if_chain([(g.detached_guard(g.v), g.step_ref())])
        if info.systems:
            host = _FnGen(self, info, m.FunctionDef("_"))
            for s in info.systems:
                sg = _SysGen(host, s)
                out += if_chain([(host.detached_guard(sg.var), sg.step())])
        for p in info.parts:
            pn = info.n("part", p.name)
            out.append(f"{pn}.DetachedPass();" if oop else f"{pn}(Cmd := 0);")
        return out

    def _fb_flat(self, info: _BlockInfo) -> list[str]:
        lines = [f"FUNCTION_BLOCK {info.fb}"]
        lines += self._var_blocks(info.declarations(oop=False))
        body = ["CASE Cmd OF", "0:"]
        body += indent(self._detached_pass(info) or [";"])
        for f in info.functions:
            g = _FnGen(self, info, f)
            body.append(f"{info.index[f.name]}:  (* {f.name} *)")
            handler = ["CASE Op OF", f"{OPS['invoke']}:"]
            handler += indent(g.invoke_self(g.input_binds(), g.step()))
            for op, code in g.ops():
                handler.append(f"{op}:")
                handler += indent(code)
            handler.append("END_CASE;")
            body += indent(handler)
        body.append("END_CASE;")
        lines += body
        lines.append("END_FUNCTION_BLOCK")
        return lines

    def _method(self, name: str, body: list[str], inputs: list[str] = ()) -> list[str]:
        out = [f"METHOD {name}"]
        if inputs:
            out.append("VAR_INPUT")
            out += [f"    {i};" for i in inputs]
            out.append("END_VAR")
        out += indent(body or [";"])
        out.append("END_METHOD")
        return out

    def _methods_for(self, info: _BlockInfo) -> list[m.FunctionDef]:
        b = info.block
        if b.base is None:
            return list(info.functions)
        own = {f.name for f in b.functions}
        out = []
        for f in info.functions:
            if f.name in own:
                out.append(f)
            elif f.body is not None and not f.intrinsic and any(
                isinstance(n.action, FunctionCall) and n.action.lane == ("self",) and n.action.function in own
                for n in f.body.nodes
            ):
                out.append(f)
        return out

    def _fb_oop(self, info: _BlockInfo) -> list[str]:
        head = f"FUNCTION_BLOCK {info.fb}"
        decls = info.declarations(oop=True)
        if info.base is not None:
            head += f" EXTENDS {info.base.fb}"
            inherited = {d[1] for d in info.base.declarations(oop=True)}
            decls = [d for d in decls if d[1] not in inherited]
        lines = [head] + self._var_blocks(decls)
        for f in self._methods_for(info):
            g = _FnGen(self, info, f)
            invoke = g.invoke_self(g.input_binds(), g.step_ref())
            lines += self._method(info.n("meth", f.name, "invoke"), invoke)
            lines += self._method(info.n("meth", f.name, "step"), g.step())
            ctl = ["CASE op OF"]
            for op, code in g.ops():
                ctl.append(f"{op}:")
                ctl += indent(code)
            ctl.append("END_CASE;")
            lines += self._method(info.n("meth", f.name, "ctl"), ctl, ["op : INT"])
        lines += self._method("DetachedPass", self._detached_pass(info))
        if info.base is not None:
            base_init = {a.name: a.initial for a in info.base.attrs}
            adapted = [a for a in info.attrs if a.name in base_init and base_init[a.name] != a.initial]
            if adapted:
                lines += self._method("FB_init", [f"{info.n('attr', a.name)} := "
                                                  f"{st_decl_literal(a.type, a.initial)};" for a in adapted])
        lines.append("END_FUNCTION_BLOCK")
        return lines

    # -- program ------------------------------------------------------------

    def _main(self) -> tuple[list[str], dict]:
        model = self.model
        tree = m.instantiate_root(model)
        root_block, root_inst = model.root
        mn = Mangler(RESERVED + tuple(self.fb_names.values()))
        root_var = mn.request(("root",), root_inst)
        st_path: dict[str, str] = {}
        for inst in tree.walk():
            if inst.path == tree.path:
                st_path[inst.path] = root_var
            else:
                parent, _, part = inst.path.rpartition(".")
                pblock = tree.find(parent).block
                st_path[inst.path] = f"{st_path[parent]}.{self.info(pblock).n('part', part)}"
        symbols = {"root": root_var, "vars": {}, "functions": {}, "entries": {}, "types": {}}
        entries = []
        arg_inputs = []
        for inst in tree.walk():
            info = self.info(inst.block)
            base = st_path[inst.path]
            for a in info.attrs:
                symbols["vars"][f"{inst.path}.{a.name}"] = f"{base}.{info.n('attr', a.name)}"
                symbols["types"][f"{inst.path}.{a.name}"] = ST_TYPES[a.type]
            for f in info.functions:
                symbols["functions"][f"{inst.path}:{f.name}"] = {
                    fld: f"{base}.{info.n('fn', f.name, fld)}" for fld in ("state", "mode", "done")}
            for s in info.systems:
                symbols["functions"][f"{inst.path}:system.{s}"] = {
                    fld: f"{base}.{info.n('sys', s, fld)}" for fld in ("state", "mode", "done")}
            for f in info.functions:
                idx = len(entries) + 1
                args = []
                for p in f.params:
                    name = mn.request(("arg", inst.path, f.name, p.name), f"A_{inst.path}_{f.name}_{p.name}")
                    arg_inputs.append(f"    {name} : {ST_TYPES[p.type]};")
                    args.append((p.name, name, info.n("in", f.name, p.name)))
                entries.append((idx, inst.path, base, info, f, args))
                symbols["entries"][f"{inst.path}:{f.name}"] = {"index": idx, "args": {a[0]: a[1] for a in args}}
        lines = ["PROGRAM Main", "VAR_INPUT", "    Entry : INT := 0;", *arg_inputs, "END_VAR",
                 "VAR", f"    {root_var} : {self.fb_names[root_block]};", "END_VAR"]
        io_lines = []
        for inst in tree.walk():
            for a in self.info(inst.block).attrs:
                if a.io is not None:
                    where = "%I*" if a.io is m.IO.INPUT else "%Q*"
                    io_lines.append(f"    {symbols['vars'][inst.path + '.' + a.name]} AT {where} : "
                                    f"{ST_TYPES[a.type]}")
        if io_lines:
            lines += ["(* I/O wiring placeholders:"] + io_lines + ["*)"]
        lines.append("CASE Entry OF")
        for idx, path, base, info, f, args in entries:
            lines.append(f"{idx}:  (* {path}:{f.name} *)")
            if self.options.oop:
                body = [f"{base}.{inner} := {outer};" for _, outer, inner in args]
                body.append(f"{base}.{info.n('meth', f.name, 'ctl')}(op := {OPS['root']});")
            else:
                ins = "".join(f", {inner} := {outer}" for _, outer, inner in args)
                body = [f"{base}(Cmd := {info.index[f.name]}, Op := {OPS['root']}{ins});"]
            lines += indent(body)
        lines.append("END_CASE;")
        lines.append(f"{root_var}.DetachedPass();" if self.options.oop else f"{root_var}(Cmd := 0);")
        lines.append("gCycle := gCycle + 1;")
        table = ["(* Symbol table:"]
        table += [f"    {k} => {v}" for k, v in symbols["vars"].items()]
        table += [f"    entry {e['index']} => {k}" for k, e in symbols["entries"].items()]
        table.append("*)")
        lines += table
        lines.append("END_PROGRAM")
        return lines, symbols

    def emit(self) -> STUnit:
        order = []
        for name, b in self.model.blocks.items():
            if b.base is not None and b.base not in order:
                order.append(b.base)
            if name not in order:
                order.append(name)
        blocks = {}
        for name in order:
            info = self.info(name)
            lines = self._fb_oop(info) if self.options.oop else self._fb_flat(info)
            blocks[name] = "\n".join(lines) + "\n"
        main, symbols = "", {}
        if self.model.root is not None:
            main_lines, symbols = self._main()
            main = "\n".join(main_lines) + "\n"
        header = (f"(* Generated by modat-lc from a {GRAMMAR_VERSION} model; "
                  f"emission mode: {self.options.mode}. *)\n\n"
                  "VAR_GLOBAL\n    gCycle : DINT := 0;\nEND_VAR\n\n"
                  "VAR_GLOBAL CONSTANT\n"
                  f"    CYCLE_MS : TIME := T#{sysfuncs.CYCLE_MS}ms;\nEND_VAR\n")
        text = header + "".join("\n" + blocks[n] for n in order) + ("\n" + main if main else "")
        return STUnit(text, blocks, main, self.options, symbols)


def generate_st(model: m.Model, options: Optional[EmitOptions] = None, check: bool = True) -> STUnit:
    """Generate Structured Text; raises InvalidModel unless validation is clean."""
    if check:
        errs = errors_only(validate(model))
        if errs:
            raise InvalidModel(errs)
    return Emitter(model, options or EmitOptions()).emit()
