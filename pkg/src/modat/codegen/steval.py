"""Interpreter for the Structured Text subset produced by the emitter.

This is a test oracle, not a PLC runtime. It understands global variable
blocks, FUNCTION_BLOCK with EXTENDS and METHODs, PROGRAM, IF/ELSIF/ELSE,
CASE, assignments, FB and method calls and ``THIS^``. Anything else raises
``UnsupportedConstruct``, which flags drift between emitter and evaluator.

Integer arithmetic wraps to the declared width: INT 16 bit, DINT and TIME
32 bit (TIME counted in milliseconds). Untyped integer literals adopt the
type of the other operand.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional


class UnsupportedConstruct(Exception):
    pass


class STSyntaxError(Exception):
    pass


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\(\*.*?\*\)|//[^\n]*)
  | (?P<time>(?:T|TIME)\#(?P<tval>\d+)(?P<tunit>ms|s))
  | (?P<real>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|<>|<=|>=|[=<>+\-*/(),;:.^])
    """,
    re.VERBOSE | re.DOTALL | re.IGNORECASE,
)


@dataclass(frozen=True)
class Tok:
    kind: str  # ident int real time op eof
    text: str
    value: object
    line: int


def lex(text: str) -> list[Tok]:
    out, pos, line = [], 0, 1
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:
            raise STSyntaxError(f"line {line}: unexpected character {text[pos]!r}")
        kind = mt.lastgroup
        s = mt.group(0)
        if kind in ("tval", "tunit"):
            kind = "time"
        if mt.group("time"):
            ms = int(mt.group("tval")) * (1000 if mt.group("tunit").lower() == "s" else 1)
            out.append(Tok("time", s, ms, line))
        elif kind == "real":
            out.append(Tok("real", s, float(s), line))
        elif kind == "int":
            out.append(Tok("int", s, int(s), line))
        elif kind == "ident":
            out.append(Tok("ident", s.upper(), s, line))
        elif kind == "op":
            out.append(Tok("op", s, s, line))
        line += s.count("\n")
        pos = mt.end()
    out.append(Tok("eof", "", None, line))
    return out


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass
class VarDecl:
    section: str
    name: str  # lower case
    type: str  # upper case
    init: object = None  # expression AST or None


@dataclass
class MethodDef:
    name: str
    vars: list
    body: list


@dataclass
class FBDef:
    name: str
    extends: Optional[str]
    vars: list
    methods: dict
    body: list
    is_program: bool = False


@dataclass
class Unit:
    globals: list = field(default_factory=list)
    fbs: dict = field(default_factory=dict)  # upper name -> FBDef


# expression / statement nodes as tuples: ("lit", value, type), ("des", parts, this),
# ("un", op, e), ("bin", op, l, r); ("assign", des, e), ("call", des, args),
# ("if", [(cond, body)], else), ("case", e, [(labels, body)], else), ("nop",)


class _Parser:
    def __init__(self, text: str):
        self.toks = lex(text)
        self.i = 0

    @property
    def peek(self) -> Tok:
        return self.toks[self.i]

    def look(self, k: int) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def is_kw(self, *words) -> bool:
        return self.peek.kind == "ident" and self.peek.text in words

    def is_op(self, op: str) -> bool:
        return self.peek.kind == "op" and self.peek.text == op

    def expect_kw(self, word: str) -> None:
        if not self.is_kw(word):
            self.fail(word)
        self.next()

    def expect_op(self, op: str) -> None:
        if not self.is_op(op):
            self.fail(op)
        self.next()

    def accept_op(self, op: str) -> bool:
        if self.is_op(op):
            self.next()
            return True
        return False

    def ident(self) -> str:
        if self.peek.kind != "ident":
            self.fail("identifier")
        return self.next().value.lower()

    def fail(self, what: str):
        t = self.peek
        raise STSyntaxError(f"line {t.line}: expected {what}, found {t.text!r}")

    # -- declarations -----------------------------------------------------

    def unit(self) -> Unit:
        u = Unit()
        while self.peek.kind != "eof":
            if self.is_kw("VAR_GLOBAL"):
                u.globals.extend(self.var_block())
            elif self.is_kw("FUNCTION_BLOCK"):
                fb = self.pou("FUNCTION_BLOCK", "END_FUNCTION_BLOCK")
                u.fbs[fb.name.upper()] = fb
            elif self.is_kw("PROGRAM"):
                fb = self.pou("PROGRAM", "END_PROGRAM")
                fb.is_program = True
                u.fbs[fb.name.upper()] = fb
            else:
                raise UnsupportedConstruct(f"line {self.peek.line}: top-level {self.peek.text!r}")
        return u

    def var_block(self) -> list[VarDecl]:
        section = self.next().text
        if self.is_kw("CONSTANT"):
            self.next()
        out = []
        while not self.is_kw("END_VAR"):
            name = self.ident()
            self.expect_op(":")
            if self.peek.kind != "ident":
                self.fail("type")
            t = self.next().text
            init = None
            if self.accept_op(":="):
                init = self.expr()
            self.expect_op(";")
            out.append(VarDecl(section, name, t, init))
        self.next()
        return out

    def pou(self, head: str, tail: str) -> FBDef:
        self.expect_kw(head)
        name = self.next().value
        extends = None
        if self.is_kw("EXTENDS"):
            self.next()
            extends = self.next().text
        vars_, methods = [], {}
        while True:
            if self.is_kw("VAR", "VAR_INPUT", "VAR_OUTPUT", "VAR_TEMP"):
                vars_.extend(self.var_block())
            elif self.is_kw("METHOD"):
                md = self.method()
                methods[md.name] = md
            else:
                break
        body = self.stmts((tail,))
        self.expect_kw(tail)
        return FBDef(name, extends, vars_, methods, body)

    def method(self) -> MethodDef:
        self.expect_kw("METHOD")
        if self.is_kw("PUBLIC", "PRIVATE", "PROTECTED", "INTERNAL"):
            self.next()
        name = self.ident()
        if self.accept_op(":"):
            raise UnsupportedConstruct("methods with return values")
        vars_ = []
        while self.is_kw("VAR", "VAR_INPUT", "VAR_TEMP"):
            vars_.extend(self.var_block())
        body = self.stmts(("END_METHOD",))
        self.expect_kw("END_METHOD")
        return MethodDef(name, vars_, body)

    # -- statements -------------------------------------------------------

    def at_case_label(self) -> bool:
        k = 1 if self.is_op("-") else 0
        t = self.look(k)
        n = self.look(k + 1)
        return t.kind == "int" and n.kind == "op" and n.text in (":", ",")

    def stmts(self, stops, case_arm: bool = False) -> list:
        out = []
        while not self.is_kw(*stops):
            if self.peek.kind == "eof":
                self.fail(" or ".join(stops))
            if case_arm and self.at_case_label():
                break
            out.append(self.stmt())
        return out

    def stmt(self):
        if self.accept_op(";"):
            return ("nop",)
        if self.is_kw("IF"):
            self.next()
            branches = []
            cond = self.expr()
            self.expect_kw("THEN")
            branches.append((cond, self.stmts(("ELSIF", "ELSE", "END_IF"))))
            otherwise = []
            while self.is_kw("ELSIF"):
                self.next()
                cond = self.expr()
                self.expect_kw("THEN")
                branches.append((cond, self.stmts(("ELSIF", "ELSE", "END_IF"))))
            if self.is_kw("ELSE"):
                self.next()
                otherwise = self.stmts(("END_IF",))
            self.expect_kw("END_IF")
            self.accept_op(";")
            return ("if", branches, otherwise)
        if self.is_kw("CASE"):
            self.next()
            sel = self.expr()
            self.expect_kw("OF")
            arms = []
            otherwise = []
            while not self.is_kw("END_CASE", "ELSE"):
                labels = [self.label()]
                while self.accept_op(","):
                    labels.append(self.label())
                self.expect_op(":")
                arms.append((labels, self.stmts(("END_CASE", "ELSE"), case_arm=True)))
            if self.is_kw("ELSE"):
                self.next()
                otherwise = self.stmts(("END_CASE",))
            self.expect_kw("END_CASE")
            self.accept_op(";")
            return ("case", sel, arms, otherwise)
        if self.is_kw("RETURN"):
            self.next()
            self.expect_op(";")
            return ("return",)
        if self.is_kw("FOR", "WHILE", "REPEAT", "EXIT"):
            raise UnsupportedConstruct(f"line {self.peek.line}: {self.peek.text}")
        des = self.designator()
        if self.accept_op(":="):
            e = self.expr()
            self.expect_op(";")
            return ("assign", des, e)
        if self.accept_op("("):
            args = []
            if not self.is_op(")"):
                while True:
                    name = self.ident()
                    self.expect_op(":=")
                    args.append((name, self.expr()))
                    if not self.accept_op(","):
                        break
            self.expect_op(")")
            self.expect_op(";")
            return ("call", des, args)
        self.fail("':=' or '('")

    def label(self) -> int:
        neg = self.accept_op("-")
        t = self.next()
        if t.kind != "int":
            raise UnsupportedConstruct(f"line {t.line}: non-integer CASE label")
        return -t.value if neg else t.value

    def designator(self):
        this = False
        parts = []
        if self.is_kw("THIS"):
            self.next()
            self.expect_op("^")
            this = True
            self.expect_op(".")
        parts.append(self.ident())
        while self.accept_op("."):
            parts.append(self.ident())
        return ("des", tuple(parts), this)

    # -- expressions ------------------------------------------------------

    def expr(self):
        return self._binary(0)

    _LEVELS = (("OR",), ("XOR",), ("AND", "&"), ("=", "<>"), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "MOD"))

    def _at_level(self, level: int):
        t = self.peek
        if t.kind in ("op", "ident") and t.text in self._LEVELS[level]:
            return t.text
        return None

    def _binary(self, level: int):
        if level == len(self._LEVELS):
            return self._unary()
        left = self._binary(level + 1)
        while (op := self._at_level(level)) is not None:
            self.next()
            right = self._binary(level + 1)
            if op in ("/", "MOD", "XOR", "&"):
                raise UnsupportedConstruct(f"operator {op}")
            left = ("bin", op, left, right)
        return left

    def _unary(self):
        if self.accept_op("-"):
            return ("un", "-", self._unary())
        if self.is_kw("NOT"):
            self.next()
            return ("un", "NOT", self._unary())
        return self._primary()

    def _primary(self):
        t = self.peek
        if self.accept_op("("):
            e = self.expr()
            self.expect_op(")")
            return e
        if t.kind == "int":
            self.next()
            return ("lit", t.value, None)
        if t.kind == "real":
            self.next()
            return ("lit", t.value, "LREAL")
        if t.kind == "time":
            self.next()
            return ("lit", t.value, "TIME")
        if t.kind == "ident" and t.text in ("TRUE", "FALSE"):
            self.next()
            return ("lit", t.text == "TRUE", "BOOL")
        if t.kind == "ident":
            des = self.designator()
            if self.is_op("("):
                raise UnsupportedConstruct("function calls inside expressions")
            return des
        self.fail("expression")


def parse_st(text: str) -> Unit:
    return _Parser(text).unit()


def parse_st_expr(text: str):
    p = _Parser(text)
    e = p.expr()
    if p.peek.kind != "eof":
        p.fail("end of expression")
    return e


# ---------------------------------------------------------------------------
# Runtime
# ---------------------------------------------------------------------------

ELEMENTARY = {"BOOL", "INT", "DINT", "LREAL", "REAL", "TIME"}


def wrap(t: Optional[str], v):
    if t == "INT":
        return ((v + 32768) & 0xFFFF) - 32768
    if t in ("DINT", "TIME"):
        return ((v + 2**31) & 0xFFFFFFFF) - 2**31
    if t in ("LREAL", "REAL"):
        return float(v)
    if t == "BOOL":
        return bool(v)
    return v


def default(t: str):
    if t == "BOOL":
        return False
    if t in ("LREAL", "REAL"):
        return 0.0
    return 0


class Instance:
    __slots__ = ("fb", "vars")

    def __init__(self, fb: "_CompiledFB"):
        self.fb = fb
        self.vars: dict = {}


class Frame:
    __slots__ = ("inst", "locals")

    def __init__(self, inst, locals_=None):
        self.inst = inst
        self.locals = locals_


class _Return(Exception):
    pass


class _CompiledFB:
    def __init__(self, rt: "Runtime", d: FBDef):
        self.rt = rt
        self.d = d
        self.name = d.name.upper()
        self.base: Optional[_CompiledFB] = None
        self.types: dict[str, str] = {}  # var -> type (own and inherited)
        self.decls: list[VarDecl] = []
        self.methods: dict[str, Callable] = {}
        self.method_vars: dict[str, list] = {}
        self.body: Optional[Callable] = None
        self.compiled = False
        self.prepared = False
        self.inits: list = []

    def method(self, name: str):
        fb = self
        while fb is not None:
            if name in fb.methods:
                return fb.methods[name], fb.method_vars[name]
            fb = fb.base
        return None, None


class Runtime:
    def __init__(self, unit: Unit, program: str = "MAIN"):
        self.unit = unit
        self.globals: dict = {}
        self.global_types: dict = {}
        self.fbs: dict[str, _CompiledFB] = {n: _CompiledFB(self, d) for n, d in unit.fbs.items()}
        for g in unit.globals:
            if g.type not in ELEMENTARY:
                raise UnsupportedConstruct(f"global {g.name} of type {g.type}")
            self.global_types[g.name] = g.type
        for g in unit.globals:
            self.globals[g.name] = self._const(g)
        for fb in self.fbs.values():
            self._prepare(fb)
        for fb in self.fbs.values():
            self._compile(fb)
        if program.upper() not in self.fbs:
            raise UnsupportedConstruct(f"no PROGRAM {program}")
        self.main = self.new_instance(program.upper())

    def _const(self, decl: VarDecl):
        if decl.init is None:
            return default(decl.type)
        f, _ = self._expr(decl.init, _Scope(self, None, {}))
        return wrap(decl.type, f(Frame(None)))

    # -- preparation --------------------------------------------------------

    def _prepare(self, fb: _CompiledFB) -> None:
        if fb.prepared:
            return
        fb.prepared = True
        if fb.d.extends:
            base = self.fbs.get(fb.d.extends.upper())
            if base is None:
                raise UnsupportedConstruct(f"unknown base {fb.d.extends}")
            self._prepare(base)
            fb.base = base
            fb.types.update(base.types)
            fb.decls.extend(base.decls)
        for v in fb.d.vars:
            if v.type not in ELEMENTARY and v.type not in self.fbs:
                raise UnsupportedConstruct(f"type {v.type}")
            fb.types[v.name] = v.type
            fb.decls.append(v)

    def _compile(self, fb: _CompiledFB) -> None:
        if fb.compiled:
            return
        fb.compiled = True
        scope = _Scope(self, fb, {})
        for v in fb.decls:
            if v.type in ELEMENTARY:
                init = self._expr(v.init, scope)[0] if v.init is not None else None
                fb.inits.append((v.name, v.type, init))
            else:
                fb.inits.append((v.name, v.type, None))
        fb.body = self._block(fb.d.body, scope) if fb.d.body else None
        for name, md in fb.d.methods.items():
            local_types = {v.name: v.type for v in md.vars}
            for t in local_types.values():
                if t not in ELEMENTARY:
                    raise UnsupportedConstruct(f"method local of type {t}")
            ms = _Scope(self, fb, local_types)
            fb.methods[name] = self._block(md.body, ms)
            fb.method_vars[name] = [(v.name, v.type, self._expr(v.init, ms)[0] if v.init else None)
                                    for v in md.vars]

    def new_instance(self, type_name: str) -> Instance:
        fb = self.fbs[type_name]
        inst = Instance(fb)
        fr = Frame(inst)
        for name, t, init in fb.inits:
            if t in ELEMENTARY:
                inst.vars[name] = wrap(t, init(fr)) if init is not None else default(t)
            else:
                inst.vars[name] = self.new_instance(t)
        fn, _ = fb.method("fb_init")
        if fn is not None:
            fn(Frame(inst, {}))
        return inst

    def body_of(self, fb: _CompiledFB):
        while fb is not None:
            if fb.body is not None:
                return fb.body
            fb = fb.base
        return None

    # -- compilation ------------------------------------------------------

    def _block(self, stmts: list, scope: "_Scope") -> Callable:
        fns = [self._stmt(s, scope) for s in stmts]
        fns = [f for f in fns if f is not None]

        def run(fr):
            for f in fns:
                f(fr)
        return run

    def _stmt(self, s, scope):
        kind = s[0]
        if kind == "nop":
            return None
        if kind == "return":
            def ret(fr):
                raise _Return()
            return ret
        if kind == "assign":
            setter, t = scope.setter(s[1])
            value, _ = self._expr(s[2], scope)

            def assign(fr):
                setter(fr, wrap(t, value(fr)))
            return assign
        if kind == "if":
            branches = [(self._expr(c, scope)[0], self._block(b, scope)) for c, b in s[1]]
            otherwise = self._block(s[2], scope)

            def run_if(fr):
                for cond, body in branches:
                    if cond(fr):
                        body(fr)
                        return
                otherwise(fr)
            return run_if
        if kind == "case":
            sel, _ = self._expr(s[1], scope)
            table = {}
            for labels, body in s[2]:
                b = self._block(body, scope)
                for lab in labels:
                    table.setdefault(lab, b)
            otherwise = self._block(s[3], scope)

            def run_case(fr):
                table.get(sel(fr), otherwise)(fr)
            return run_case
        if kind == "call":
            return scope.call(s[1], [(n, self._expr(e, scope)) for n, e in s[2]])
        raise UnsupportedConstruct(f"statement {kind}")

    def _expr(self, e, scope):
        kind = e[0]
        if kind == "lit":
            v, t = e[1], e[2]
            return (lambda fr: v), t
        if kind == "des":
            return scope.getter(e)
        if kind == "un":
            f, t = self._expr(e[2], scope)
            if e[1] == "NOT":
                return (lambda fr: not f(fr)), "BOOL"
            if t is None:
                return (lambda fr: -f(fr)), None
            return (lambda fr: wrap(t, -f(fr))), t
        op = e[1]
        lf, lt = self._expr(e[2], scope)
        rf, rt = self._expr(e[3], scope)
        if op == "AND":
            return (lambda fr: bool(lf(fr)) and bool(rf(fr))), "BOOL"
        if op == "OR":
            return (lambda fr: bool(lf(fr)) or bool(rf(fr))), "BOOL"
        cmp = {
            "=": lambda a, b: a == b, "<>": lambda a, b: a != b, "<": lambda a, b: a < b,
            "<=": lambda a, b: a <= b, ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
        }.get(op)
        if cmp is not None:
            return (lambda fr: cmp(lf(fr), rf(fr))), "BOOL"
        t = lt or rt or "INT"
        arith = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b}[op]
        return (lambda fr: wrap(t, arith(lf(fr), rf(fr)))), t

    # -- external access --------------------------------------------------

    def _resolve(self, path: str):
        parts = path.lower().split(".")
        obj = self.main
        for p in parts[:-1]:
            obj = obj.vars[p]
        return obj, parts[-1]

    def read(self, path: str):
        obj, name = self._resolve(path)
        return obj.vars[name]

    def write(self, path: str, value) -> None:
        obj, name = self._resolve(path)
        obj.vars[name] = wrap(obj.fb.types[name], value)

    def eval(self, text: str):
        f, _ = self._expr(parse_st_expr(text), _Scope(self, self.main.fb, {}))
        return f(Frame(self.main, {}))

    def run_cycle(self) -> None:
        body = self.body_of(self.main.fb)
        if body is not None:
            body(Frame(self.main, {}))


class _Scope:
    """Static name resolution for one POU or method body."""

    def __init__(self, rt: Runtime, fb: Optional[_CompiledFB], locals_: dict):
        self.rt = rt
        self.fb = fb
        self.locals = locals_

    def _head(self, name: str):
        """Return (getter of container dict, type) for the first segment."""
        if name in self.locals:
            return (lambda fr: fr.locals), self.locals[name]
        if self.fb is not None and name in self.fb.types:
            return (lambda fr: fr.inst.vars), self.fb.types[name]
        if name in self.rt.global_types:
            g = self.rt.globals
            return (lambda fr: g), self.rt.global_types[name]
        raise UnsupportedConstruct(f"unknown name {name!r}")

    def _walk(self, des):
        """(container getter, last name, type of last) for a designator."""
        _, parts, this = des
        if this:
            container, t = (lambda fr: fr.inst.vars), None
            cur_fb = self.fb
            first = parts[0]
            if first not in cur_fb.types:
                return ("this", parts), None, None
            t = cur_fb.types[first]
        else:
            container, t = self._head(parts[0])
        name = parts[0]
        for nxt in parts[1:]:
            if t not in self.rt.fbs:
                return ("member", container, name, parts[parts.index(nxt):]), None, None
            fbt = self.rt.fbs[t]
            prev_container, prev_name = container, name
            container = (lambda pc, pn: (lambda fr: pc(fr)[pn].vars))(prev_container, prev_name)
            if nxt not in fbt.types:
                return ("method", prev_container, prev_name, nxt), None, None
            t = fbt.types[nxt]
            name = nxt
        return container, name, t

    def getter(self, des):
        container, name, t = self._walk(des)
        if isinstance(container, tuple):
            raise UnsupportedConstruct(f"cannot read {'.'.join(des[1])}")
        return (lambda fr: container(fr)[name]), t

    def setter(self, des):
        container, name, t = self._walk(des)
        if isinstance(container, tuple):
            raise UnsupportedConstruct(f"cannot assign {'.'.join(des[1])}")

        def put(fr, v):
            container(fr)[name] = v
        return put, t

    def call(self, des, args):
        _, parts, this = des
        rt = self.rt
        if this:
            if len(parts) != 1:
                raise UnsupportedConstruct("THIS^ paths")
            mname = parts[0]
            return self._method_call(lambda fr: fr.inst, mname, args)
        container, name, t = self._walk(des)
        if isinstance(container, tuple) and container[0] == "method":
            _, pc, pn, mname = container
            return self._method_call(lambda fr: pc(fr)[pn], mname, args)
        if isinstance(container, tuple):
            raise UnsupportedConstruct(f"call {'.'.join(parts)}")
        if t not in rt.fbs:
            raise UnsupportedConstruct(f"call of non-FB {'.'.join(parts)}")
        fbt = rt.fbs[t]
        binds = []
        for n, (f, _) in args:
            if n not in fbt.types:
                raise UnsupportedConstruct(f"{t} has no input {n}")
            binds.append((n, f, fbt.types[n]))

        def fb_call(fr):
            inst = container(fr)[name]
            vals = [(n, wrap(ty, f(fr))) for n, f, ty in binds]
            for n, v in vals:
                inst.vars[n] = v
            body = rt.body_of(inst.fb)
            if body is not None:
                try:
                    body(Frame(inst, {}))
                except _Return:
                    pass
        return fb_call

    def _method_call(self, target, mname, args):
        def m_call(fr):
            inst = target(fr)
            fn, mvars = inst.fb.method(mname)
            if fn is None:
                raise UnsupportedConstruct(f"{inst.fb.name} has no method {mname}")
            locals_ = {}
            for n, ty, init in mvars:
                locals_[n] = wrap(ty, init(fr)) if init else default(ty)
            types = {n: ty for n, ty, _ in mvars}
            for n, (f, _) in args:
                if n not in types:
                    raise UnsupportedConstruct(f"method {mname} has no input {n}")
                locals_[n] = wrap(types[n], f(fr))
            try:
                fn(Frame(inst, locals_))
            except _Return:
                pass
        return m_call


# ---------------------------------------------------------------------------
# Scenario execution
# ---------------------------------------------------------------------------


def execute_st(unit, scenario):
    """Run ``scenario`` on a generated unit; returns a simulator-style Trace.

    Termination and assertion timing follow the simulator's run loop.
    Records carry variable snapshots and the detached set; fired transitions
    and active chains are not observable from ST.
    """
    from ..formatter import expr_text
    from ..simulator import AssertionResult, CycleRecord, Trace
    from .emit import st_expr

    sym = unit.symbols
    rt = Runtime(parse_st(unit.text))
    path, fn, args = scenario.invocation
    entry = sym["entries"][f"{path}:{fn}"]
    rt.write("entry", entry["index"])
    for (pname, input_name), lit in zip(entry["args"].items(), args):
        rt.write(input_name, lit.value if hasattr(lit, "value") else lit)
    root = sym["functions"][f"{path}:{fn}"]
    fkeys = list(sym["functions"].items())

    def detached():
        return [k for k, v in fkeys if rt.read(v["mode"]) == 2 and rt.read(v["state"]) > 0]

    def finished():
        return rt.read(root["state"]) == -1 and not detached()

    inputs: dict = {}
    for ev in scenario.inputs:
        inputs.setdefault(ev.cycle, []).append((ev.target, ev.value))
    asserts: dict = {}
    for a in scenario.assertions:
        st_text = st_expr(a.expr, lambda r: sym["vars"][r.text])
        asserts.setdefault(a.cycle, []).append((a, st_text))
    last_event = max([*inputs, *asserts], default=-1)
    records, results = [], []
    diverged = False
    cycle = 0
    while True:
        if finished() and cycle > last_event:
            break
        if cycle >= scenario.max_cycles:
            diverged = not finished()
            break
        latched = []
        for key, value in inputs.get(cycle, ()):
            rt.write(sym["vars"][key], value)
            latched.append([key, value])
        rt.run_cycle()
        snap = {k: rt.read(v) for k, v in sym["vars"].items()}
        rec = CycleRecord(cycle, latched, [], [], detached(), snap)
        for a, st_text in asserts.get(cycle, ()):
            actual = bool(rt.eval(st_text))
            res = AssertionResult(cycle, expr_text(a.expr), a.expected, actual)
            results.append(res)
            rec.asserts.append({"expr": res.text, "expected": res.expected, "actual": actual, "ok": res.ok})
        records.append(rec)
        cycle += 1
    for c, items in sorted(asserts.items()):
        if c >= cycle:
            for a, _ in items:
                results.append(AssertionResult(c, expr_text(a.expr), a.expected, None))
    results.sort(key=lambda r: r.cycle)
    return Trace(records, results, diverged, finished())
