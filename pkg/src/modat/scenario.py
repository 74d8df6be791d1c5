"""Scenario files (``.scn``): an invocation plus timed stimuli and checks.

Example::

    invoke stamp.stampCylinder.extend(40)
    maxcycles 20
    at 2 set stamp.stampCylinder.pressureSensor.Signal = 20
    at 4 expect stamp.stampCylinder.valveExtend.Signal is TRUE
    at 6 expect stamp.cycles == 1

Paths are absolute instance paths starting at the root instance name.
An assertion ``at c`` is checked on the snapshot taken at the end of cycle c.

Codes: E300 syntax, E301 invoke missing or repeated, E302 unknown target,
E303 invocation arity or argument type, E304 input not drivable or wrongly
typed, E305 malformed assertion, E306 cycle index out of range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import model as m
from .behavior import Expr, Literal, Ref, TypeTag, walk_refs
from .diagnostics import Diagnostic, DiagnosticError, SourceSpan, error
from .lexer import LexError, decode_source, tokenize
from .parser import ParseError, TokenStream, parse_expr, parse_literal, parse_ref
from .scope import infer, literal_range_error

SCENARIO_KEYWORDS = frozenset("invoke at set expect maxcycles is TRUE FALSE and or not".split())
DEFAULT_MAX_CYCLES = 1000


@dataclass(frozen=True)
class InputEvent:
    cycle: int
    target: str
    value: object


@dataclass(frozen=True)
class Assertion:
    cycle: int
    expr: Expr
    expected: bool = True


@dataclass
class Scenario:
    invocation: tuple  # (path, fn, tuple of Literal)
    inputs: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    max_cycles: int = DEFAULT_MAX_CYCLES


class _ScenarioParser:
    def __init__(self, text: str, file: str, model: m.Model):
        self.ts = TokenStream(tokenize(text, SCENARIO_KEYWORDS), file)
        self.file = file
        self.model = model
        self.tree = m.instantiate_root(model)
        self.types: dict[str, TypeTag] = {}
        self.io: dict[str, Optional[m.IO]] = {}
        for inst in self.tree.walk():
            for a in m.effective_attributes(model, inst.block):
                self.types[f"{inst.path}.{a.name}"] = a.type
                self.io[f"{inst.path}.{a.name}"] = a.io
        self.diags: list[Diagnostic] = []

    def parse(self) -> Optional[Scenario]:
        ts = self.ts
        invocation = None
        invoke_span = None
        max_cycles = DEFAULT_MAX_CYCLES
        max_span = None
        events: list[tuple[InputEvent, SourceSpan]] = []
        asserts: list[tuple[Assertion, SourceSpan]] = []
        while not ts.at("EOF"):
            start = ts.peek
            if ts.accept_kw("invoke"):
                inv = self._invoke()
                if invocation is not None:
                    self.diags.append(error("E301", "scenario has more than one invoke", ts.span_from(start)))
                invocation, invoke_span = inv, ts.span_from(start)
            elif ts.accept_kw("maxcycles"):
                tok = ts.peek
                if tok.kind != "INT":
                    ts.fail("cycle count", "E300")
                ts.advance()
                max_cycles, max_span = tok.value, ts.span_from(start)
            elif ts.accept_kw("at"):
                tok = ts.peek
                if tok.kind != "INT":
                    ts.fail("cycle index", "E300")
                ts.advance()
                cycle = tok.value
                if ts.accept_kw("set"):
                    ev = self._set(cycle)
                    if ev is not None:
                        events.append((ev, ts.span_from(start)))
                elif ts.accept_kw("expect"):
                    a = self._expect(cycle)
                    if a is not None:
                        asserts.append((a, ts.span_from(start)))
                else:
                    ts.fail("'set' or 'expect'", "E300")
            else:
                ts.fail("'invoke', 'maxcycles' or 'at'", "E300")
        if invocation is None:
            self.diags.append(error("E301", "scenario has no invoke line", SourceSpan(self.file, 1, 1, 1, 1)))
        for item, span in [*events, *asserts]:
            if item.cycle > max_cycles:
                self.diags.append(error("E306", f"cycle {item.cycle} lies beyond maxcycles {max_cycles}", span))
        if self.diags:
            return None
        return Scenario(invocation, [e for e, _ in events], [a for a, _ in asserts], max_cycles)

    def _invoke(self):
        ts = self.ts
        ref = parse_ref(ts)
        ts.expect_punct("(")
        args = []
        if not ts.at_punct(")"):
            args.append(parse_literal(ts))
            while ts.accept_punct(","):
                args.append(parse_literal(ts))
        ts.expect_punct(")")
        if len(ref.path) < 2:
            self.diags.append(error("E302", f"{ref.text!r} does not name a function of an instance", ref.span))
            return None
        path, fn = ".".join(ref.path[:-1]), ref.path[-1]
        inst = self.tree.find(path)
        if inst is None:
            self.diags.append(error("E302", f"no object instance {path!r}", ref.span))
            return None
        f = m.effective_function(self.model, inst.block, fn)
        if f is None:
            self.diags.append(error("E302", f"{path} ({inst.block}) has no function {fn!r}", ref.span))
            return None
        if len(args) != len(f.params):
            self.diags.append(error("E303", f"{fn}() expects {len(f.params)} argument(s), got {len(args)}",
                                    ref.span))
            return None
        for p, a in zip(f.params, args):
            if a.type is not p.type:
                self.diags.append(error("E303", f"argument {p.name} must be {p.type}, got {a.type}", a.span))
                return None
            msg = literal_range_error(a)
            if msg:
                self.diags.append(error("E303", msg, a.span))
                return None
        return (path, fn, tuple(args))

    def _set(self, cycle: int) -> Optional[InputEvent]:
        ts = self.ts
        ref = parse_ref(ts)
        ts.expect_punct("=")
        lit = parse_literal(ts)
        key = ref.text
        if key not in self.types:
            self.diags.append(error("E302", f"no variable {key!r}", ref.span))
            return None
        if self.io[key] is not m.IO.INPUT:
            self.diags.append(error("E304", f"cannot drive output or internal variable {key!r}", ref.span))
            return None
        if lit.type is not self.types[key]:
            self.diags.append(error("E304", f"{key} is {self.types[key]}, got {lit.type}", lit.span))
            return None
        msg = literal_range_error(lit)
        if msg:
            self.diags.append(error("E304", msg, lit.span))
            return None
        return InputEvent(cycle, key, lit.value)

    def _expect(self, cycle: int) -> Optional[Assertion]:
        ts = self.ts
        expr = parse_expr(ts)
        expected = True
        if ts.accept_kw("is"):
            lit = parse_literal(ts, allow_sign=False)
            if lit.type is not TypeTag.BOOL:
                raise ParseError("E300", "'is' must be followed by TRUE or FALSE", lit.span)
            expected = lit.value
        for r in walk_refs(expr):
            if r.text not in self.types:
                self.diags.append(error("E302", f"no variable {r.text!r}", r.span))
                return None
        problems: list = []
        t = infer(expr, lambda r: self.types[r.text], problems)
        if problems:
            msg, span = problems[0]
            self.diags.append(error("E305", msg, span))
            return None
        if t is not TypeTag.BOOL:
            self.diags.append(error("E305", f"assertion must be BOOL, got {t}", getattr(expr, "span", None)
                                    or SourceSpan(self.file, 1, 1, 1, 1)))
            return None
        return Assertion(cycle, expr, expected)


def parse_scenario_diagnostics(text, model: m.Model, file: str = "<scenario>"):
    """Return ``(scenario or None, diagnostics)``."""
    try:
        src = decode_source(text)
        p = _ScenarioParser(src, file, model)
        sc = p.parse()
    except UnicodeDecodeError:
        return None, [error("E300", "scenario is not valid UTF-8", SourceSpan(file, 1, 1, 1, 1))]
    except LexError as exc:
        return None, [error("E300", exc.message, SourceSpan(file, exc.line, exc.col, exc.line, exc.col))]
    except ParseError as exc:
        d = exc.diagnostic
        return None, [Diagnostic(d.severity, "E300", d.message, d.span)]
    return sc, sorted(p.diags, key=Diagnostic.sort_key)


def parse_scenario(text, model: m.Model, file: str = "<scenario>") -> Scenario:
    sc, diags = parse_scenario_diagnostics(text, model, file)
    if sc is None:
        raise DiagnosticError(diags)
    return sc
