"""Recursive-descent parser for ``.modat`` model files.

Grammar (version 1)::

    model      := { blockDecl | variantDecl | systemDecl } rootDecl { ... }
    blockDecl  := "block" ID "kind" ( "component" [ioClause] | "composite" ) "{" {member} "}"
    ioClause   := ("input" | "output") TYPE ["=" literal]
    variantDecl:= "variant" ID "of" ID "{" {member} "}"
    systemDecl := "system" "function" ID "(" [params] ")"
    member     := "part" ID ":" ID
                | "attr" ID ":" TYPE ["=" literal]
                | ["override"] "function" ID "(" [params] ")" [behavior]
    behavior   := "{" "lanes" ID {"," ID} {nodeDecl} {transDecl} "}"
    nodeDecl   := "node" ID ":" ( "call" path "(" [args] ")" | "set" assignList )
                  ["entry" assignList] ["exit" assignList]
    transDecl  := (ID | "start") "->" (ID | "end")
                  [ "on" "completion" | "when" expr ["policy" ("resume"|"restart"|"continue")] ]
                  ["do" assignList]
    assignList := assignment {"," assignment}
    assignment := ref ":=" expr
    rootDecl   := "root" ID ":" ID

Expressions use ``or``/``and``/``not``, the comparisons ``== != < <= > >=``
(``<>`` is accepted for ``!=``) and ``+ - *``.

Syntax errors carry codes E1xx, reference errors E2xx. Depth-two inheritance
is accepted here and reported by the validator (E001).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from . import model as m
from .behavior import (
    AttributeOp,
    Assignment,
    BehaviorDef,
    Binary,
    END,
    Expr,
    FunctionCall,
    Literal,
    Node,
    Policy,
    Ref,
    START,
    Transition,
    TypeTag,
    Unary,
    default_value,
)
from .diagnostics import Diagnostic, DiagnosticError, SourceSpan, error
from .lexer import LexError, Token, decode_source, tokenize

GRAMMAR_VERSION = "modat v1"

TYPES = {t.value: t for t in TypeTag}
TOP_LEVEL = ("block", "variant", "system", "root")


class ParseError(Exception):
    def __init__(self, code: str, message: str, span: SourceSpan):
        super().__init__(message)
        self.diagnostic = error(code, message, span)


class TokenStream:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.pos = 0
        self.file = file

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def look(self, offset: int) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    @property
    def prev(self) -> Token:
        return self.tokens[max(self.pos - 1, 0)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.peek.is_(kind, text)

    def at_punct(self, text: str) -> bool:
        return self.peek.is_("PUNCT", text)

    def at_kw(self, text: str) -> bool:
        return self.peek.is_("KW", text)

    def accept_punct(self, text: str) -> bool:
        if self.at_punct(text):
            self.advance()
            return True
        return False

    def accept_kw(self, text: str) -> bool:
        if self.at_kw(text):
            self.advance()
            return True
        return False

    def fail(self, expected: str, code: str = "E101"):
        tok = self.peek
        raise ParseError(code, f"expected {expected}, found {tok}", tok.span(self.file))

    def expect_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            self.fail(repr(text))
        return self.advance()

    def expect_kw(self, text: str) -> Token:
        if not self.at_kw(text):
            self.fail(repr(text))
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if not self.at("IDENT"):
            self.fail(what)
        return self.advance()

    def span_from(self, start: Token) -> SourceSpan:
        end = self.prev
        return SourceSpan(self.file, start.line, start.col, end.end_line, end.end_col)


# ---------------------------------------------------------------------------
# Expressions (shared with the scenario parser)
# ---------------------------------------------------------------------------

_CMP = {"==": "==", "!=": "!=", "<>": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def parse_literal(ts: TokenStream, allow_sign: bool = True) -> Literal:
    start = ts.peek
    neg = allow_sign and ts.accept_punct("-")
    tok = ts.peek
    if tok.kind in ("INT", "REAL", "TIME"):
        ts.advance()
        value = tok.value
        if neg:
            value = -value
        t = {"INT": TypeTag.INT, "REAL": TypeTag.REAL, "TIME": TypeTag.TIME}[tok.kind]
        return Literal(t, value, ts.span_from(start))
    if not neg and tok.kind == "KW" and tok.text in ("TRUE", "FALSE"):
        ts.advance()
        return Literal(TypeTag.BOOL, tok.text == "TRUE", ts.span_from(start))
    ts.fail("literal")


def parse_ref(ts: TokenStream) -> Ref:
    start = ts.peek
    parts = [_name_token(ts).text]
    while ts.at_punct(".") and _is_name(ts.look(1)):
        ts.advance()
        parts.append(ts.advance().text)
    return Ref(tuple(parts), ts.span_from(start))


def _is_name(tok: Token) -> bool:
    return tok.kind == "IDENT" or tok.is_("KW", "system")


def _name_token(ts: TokenStream) -> Token:
    if not _is_name(ts.peek):
        ts.fail("name")
    return ts.advance()


def parse_expr(ts: TokenStream) -> Expr:
    return _parse_or(ts)


def _parse_or(ts):
    start = ts.peek
    left = _parse_and(ts)
    while ts.accept_kw("or"):
        right = _parse_and(ts)
        left = Binary("or", left, right, ts.span_from(start))
    return left


def _parse_and(ts):
    start = ts.peek
    left = _parse_not(ts)
    while ts.accept_kw("and"):
        right = _parse_not(ts)
        left = Binary("and", left, right, ts.span_from(start))
    return left


def _parse_not(ts):
    start = ts.peek
    if ts.accept_kw("not"):
        operand = _parse_not(ts)
        return Unary("not", operand, ts.span_from(start))
    return _parse_cmp(ts)


def _parse_cmp(ts):
    start = ts.peek
    left = _parse_sum(ts)
    tok = ts.peek
    if tok.kind == "PUNCT" and tok.text in _CMP:
        ts.advance()
        right = _parse_sum(ts)
        left = Binary(_CMP[tok.text], left, right, ts.span_from(start))
        nxt = ts.peek
        if nxt.kind == "PUNCT" and nxt.text in _CMP:
            raise ParseError("E101", "comparisons cannot be chained; use 'and'", nxt.span(ts.file))
    return left


def _parse_sum(ts):
    start = ts.peek
    left = _parse_term(ts)
    while ts.peek.kind == "PUNCT" and ts.peek.text in ("+", "-"):
        op = ts.advance().text
        right = _parse_term(ts)
        left = Binary(op, left, right, ts.span_from(start))
    return left


def _parse_term(ts):
    start = ts.peek
    left = _parse_unary(ts)
    while ts.at_punct("*"):
        ts.advance()
        right = _parse_unary(ts)
        left = Binary("*", left, right, ts.span_from(start))
    return left


def _parse_unary(ts):
    start = ts.peek
    if ts.at_punct("-"):
        if ts.look(1).kind in ("INT", "REAL", "TIME"):
            return parse_literal(ts)
        ts.advance()
        operand = _parse_unary(ts)
        return Unary("-", operand, ts.span_from(start))
    return _parse_atom(ts)


def _parse_atom(ts):
    tok = ts.peek
    if ts.accept_punct("("):
        e = parse_expr(ts)
        ts.expect_punct(")")
        return e
    if tok.kind in ("INT", "REAL", "TIME") or tok.is_("KW", "TRUE") or tok.is_("KW", "FALSE"):
        return parse_literal(ts)
    if _is_name(tok):
        return parse_ref(ts)
    ts.fail("expression")


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


@dataclass
class _Decl:
    block: m.BlockDef
    base_name: Optional[str] = None
    base_span: Optional[SourceSpan] = None
    name_span: Optional[SourceSpan] = None
    member_spans: dict = field(default_factory=dict)


class ModelParser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.ts = TokenStream(tokenize(text), file)
        self.decls: list[_Decl] = []
        self.system_functions: list[m.FunctionDef] = []
        self.roots: list[tuple[str, str, SourceSpan, SourceSpan]] = []

    def parse(self) -> None:
        ts = self.ts
        if ts.at("EOF"):
            raise ParseError("E100", "expected top-level declaration", ts.peek.span(self.file))
        while not ts.at("EOF"):
            tok = ts.peek
            if ts.at_kw("block"):
                self.decls.append(self._block())
            elif ts.at_kw("variant"):
                self.decls.append(self._variant())
            elif ts.at_kw("system"):
                self.system_functions.append(self._system())
            elif ts.at_kw("root"):
                start = ts.advance()
                inst = ts.expect_ident("root instance name")
                ts.expect_punct(":")
                blk = ts.expect_ident("block name")
                self.roots.append((blk.text, inst.text, ts.span_from(start), blk.span(self.file)))
            else:
                raise ParseError(
                    "E100",
                    f"expected top-level declaration (block, variant, system or root), found {tok}",
                    tok.span(self.file),
                )

    # -- blocks ---------------------------------------------------------

    def _block(self) -> _Decl:
        ts = self.ts
        start = ts.expect_kw("block")
        name = ts.expect_ident("block name")
        ts.expect_kw("kind")
        signal = None
        if ts.accept_kw("component"):
            kind = m.BlockKind.COMPONENT
            io_tok = ts.peek
            if ts.at_kw("input") or ts.at_kw("output"):
                ts.advance()
                io = m.IO.INPUT if io_tok.text == "input" else m.IO.OUTPUT
                t = self._type()
                init = default_value(t)
                if ts.accept_punct("="):
                    init = self._initial(t)
                signal = m.AttributeDef(m.SIGNAL, t, init, io, ts.span_from(io_tok))
        elif ts.accept_kw("composite"):
            kind = m.BlockKind.COMPOSITE
        else:
            ts.fail("'component' or 'composite'")
        parts, attrs, funcs = self._members()
        if signal is not None:
            attrs.insert(0, signal)
        span = ts.span_from(start)
        blk = m.BlockDef(name.text, kind, None, tuple(parts), tuple(attrs), tuple(funcs), span)
        return _Decl(blk, name_span=name.span(self.file))

    def _variant(self) -> _Decl:
        ts = self.ts
        start = ts.expect_kw("variant")
        name = ts.expect_ident("variant name")
        ts.expect_kw("of")
        base = ts.expect_ident("base block name")
        parts, attrs, funcs = self._members()
        span = ts.span_from(start)
        # kind is fixed up from the base during resolution
        blk = m.BlockDef(name.text, m.BlockKind.COMPOSITE, base.text, tuple(parts), tuple(attrs),
                         tuple(funcs), span, base.span(self.file))
        return _Decl(blk, base.text, base.span(self.file), name.span(self.file))

    def _system(self) -> m.FunctionDef:
        ts = self.ts
        start = ts.expect_kw("system")
        ts.expect_kw("function")
        name = ts.expect_ident("function name")
        params = self._params()
        return m.FunctionDef(name.text, params, None, span=ts.span_from(start))

    def _members(self):
        ts = self.ts
        ts.expect_punct("{")
        parts, attrs, funcs = [], [], []
        while not ts.accept_punct("}"):
            start = ts.peek
            if ts.accept_kw("part"):
                pname = ts.expect_ident("part name")
                ts.expect_punct(":")
                blk = ts.expect_ident("block name")
                parts.append(m.PartDef(pname.text, blk.text, ts.span_from(start)))
            elif ts.accept_kw("attr"):
                aname = ts.expect_ident("attribute name")
                ts.expect_punct(":")
                t = self._type()
                init = default_value(t)
                if ts.accept_punct("="):
                    init = self._initial(t)
                attrs.append(m.AttributeDef(aname.text, t, init, None, ts.span_from(start)))
            elif ts.at_kw("function") or ts.at_kw("override"):
                override = ts.accept_kw("override")
                ts.expect_kw("function")
                fname = ts.expect_ident("function name")
                params = self._params()
                body = self._behavior() if ts.at_punct("{") else None
                funcs.append(m.FunctionDef(fname.text, params, body, override, span=ts.span_from(start)))
            else:
                ts.fail("member ('part', 'attr', 'function', 'override') or '}'")
        return parts, attrs, funcs

    def _type(self) -> TypeTag:
        tok = self.ts.peek
        if tok.kind == "KW" and tok.text in TYPES:
            self.ts.advance()
            return TYPES[tok.text]
        self.ts.fail("type (BOOL, INT, REAL, TIME)")

    def _initial(self, t: TypeTag):
        lit = parse_literal(self.ts)
        if lit.type is not t:
            raise ParseError("E101", f"initial value {lit.type} literal does not match type {t}", lit.span)
        return lit.value

    def _params(self) -> tuple[m.Param, ...]:
        ts = self.ts
        ts.expect_punct("(")
        params = []
        if not ts.at_punct(")"):
            while True:
                pname = ts.expect_ident("parameter name")
                ts.expect_punct(":")
                params.append(m.Param(pname.text, self._type()))
                if not ts.accept_punct(","):
                    break
        ts.expect_punct(")")
        return tuple(params)

    # -- behavior -------------------------------------------------------

    def _behavior(self) -> BehaviorDef:
        ts = self.ts
        start = ts.expect_punct("{")
        ts.expect_kw("lanes")
        lanes = [_name_token(ts).text]
        while ts.accept_punct(","):
            lanes.append(_name_token(ts).text)
        nodes = []
        while ts.at_kw("node"):
            nodes.append(self._node())
        transitions = []
        while not ts.accept_punct("}"):
            transitions.append(self._transition())
        return BehaviorDef(tuple(lanes), tuple(nodes), tuple(transitions), ts.span_from(start))

    def _node(self) -> Node:
        ts = self.ts
        start = ts.expect_kw("node")
        nid = ts.expect_ident("node id")
        ts.expect_punct(":")
        astart = ts.peek
        if ts.accept_kw("call"):
            path = [_name_token(ts).text]
            while ts.accept_punct("."):
                path.append(_name_token(ts).text)
            if len(path) < 2:
                ts.fail("'.' followed by a function name")
            ts.expect_punct("(")
            args = []
            if not ts.at_punct(")"):
                args.append(parse_expr(ts))
                while ts.accept_punct(","):
                    args.append(parse_expr(ts))
            ts.expect_punct(")")
            action = FunctionCall(tuple(path[:-1]), path[-1], tuple(args), ts.span_from(astart))
        elif ts.accept_kw("set"):
            action = AttributeOp(self._assign_list(), ts.span_from(astart))
        else:
            ts.fail("'call' or 'set'")
        entry = self._assign_list() if ts.accept_kw("entry") else ()
        exit_ = self._assign_list() if ts.accept_kw("exit") else ()
        return Node(nid.text, action, entry, exit_, ts.span_from(start))

    def _assign_list(self) -> tuple[Assignment, ...]:
        out = [self._assignment()]
        while self.ts.accept_punct(","):
            out.append(self._assignment())
        return tuple(out)

    def _assignment(self) -> Assignment:
        ts = self.ts
        start = ts.peek
        target = parse_ref(ts)
        ts.expect_punct(":=")
        value = parse_expr(ts)
        return Assignment(target, value, ts.span_from(start))

    def _transition(self) -> Transition:
        ts = self.ts
        start = ts.peek
        if ts.accept_kw("start"):
            source = START
        else:
            source = ts.expect_ident("transition source, 'start' or '}'").text
        ts.expect_punct("->")
        if ts.accept_kw("end"):
            target = END
        else:
            target = ts.expect_ident("transition target or 'end'").text
        kind, cond, policy = None, None, None
        if ts.accept_kw("on"):
            ts.expect_kw("completion")
            kind = "completion"
        elif ts.accept_kw("when"):
            kind = "condition"
            cond = parse_expr(ts)
            if ts.accept_kw("policy"):
                tok = ts.peek
                if tok.kind == "KW" and tok.text in ("resume", "restart", "continue"):
                    ts.advance()
                    policy = Policy(tok.text)
                else:
                    ts.fail("'resume', 'restart' or 'continue'")
        op = self._assign_list() if ts.accept_kw("do") else ()
        return Transition(source, target, kind, cond, policy, op, ts.span_from(start))


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------


def _resolve(p: ModelParser, allow_deep: bool) -> tuple[Optional[m.Model], list[Diagnostic]]:
    diags: list[Diagnostic] = []
    by_name: dict[str, _Decl] = {}
    for d in p.decls:
        if d.block.name in by_name:
            diags.append(error("E202", f"block {d.block.name!r} is already defined", d.name_span))
            continue
        by_name[d.block.name] = d

    # base chains
    valid: dict[str, _Decl] = {}
    for name, d in by_name.items():
        if d.base_name is None:
            valid[name] = d
            continue
        if d.base_name == name:
            diags.append(error("E201", f"variant {name!r} cannot be a variant of itself", d.base_span))
            continue
        if d.base_name not in by_name:
            diags.append(error("E200", f"unknown base block {d.base_name!r}", d.base_span))
            continue
        seen, cur = {name}, by_name[d.base_name]
        cyclic = False
        while cur.base_name is not None:
            if cur.block.name in seen or cur.base_name in seen:
                cyclic = True
                break
            seen.add(cur.block.name)
            if cur.base_name not in by_name:
                break
            cur = by_name[cur.base_name]
        if cyclic:
            diags.append(error("E207", f"inheritance cycle through {name!r}", d.base_span))
            continue
        valid[name] = d

    # part references
    for name, d in valid.items():
        for part in d.block.parts:
            if part.block not in by_name:
                diags.append(error("E200", f"unknown block {part.block!r} for part {part.name!r}", part.span))
        _member_dups(d, diags)

    sysnames: set[str] = set()
    for f in p.system_functions:
        if f.name in sysnames:
            diags.append(error("E202", f"system function {f.name!r} is already declared", f.span))
        sysnames.add(f.name)

    if not p.roots:
        diags.append(error("E103", "missing root declaration ('root <instance> : <block>')",
                           SourceSpan(p.file, p.ts.peek.line, p.ts.peek.col, p.ts.peek.line, p.ts.peek.col)))
    for extra in p.roots[1:]:
        diags.append(error("E103", "only one root declaration is allowed", extra[2]))
    if p.roots and p.roots[0][0] not in by_name:
        diags.append(error("E200", f"unknown root block {p.roots[0][0]!r}", p.roots[0][3]))
    if diags:
        return None, diags

    # build in dependency order, then restore declaration order
    model = m.Model()
    names = list(valid)
    done: set[str] = set()

    def add(name: str) -> None:
        nonlocal model
        if name in done:
            return
        d = valid[name]
        if d.base_name is not None:
            add(d.base_name)
            model = m.define_variant(model, d.base_name, d.block, forward=names, allow_deep=True)
        else:
            model = m.define_block(model, d.block, forward=names)
        done.add(name)

    for name in names:
        try:
            add(name)
        except m.DuplicatePart as exc:
            diags.append(error("E206", str(exc), _part_span(valid[name], str(exc))))
        except m.AttributeTypeChange as exc:
            diags.append(error("E205", str(exc), _attr_span(valid[name], str(exc))))
        except m.ModelError as exc:
            diags.append(error("E200", str(exc), valid[name].name_span))
    if diags:
        return None, diags
    model = replace(model, blocks={n: model.blocks[n] for n in names})

    # override discipline
    for name, d in valid.items():
        blk = model.blocks[name]
        base_fns = {f.name for f in m.effective_functions(model, blk.base)} if blk.base else set()
        for f in blk.functions:
            if f.name in base_fns and not f.override:
                diags.append(error("E203", f"function {f.name!r} redeclares a base function; mark it 'override'", f.span))
            elif f.name not in base_fns and f.override:
                diags.append(error("E204", f"'override' on {f.name!r} but the base has no such function", f.span))

    for f in p.system_functions:
        if f.name not in {s.name for s in model.system_functions}:
            model = m.declare_system_function(model, f)
    blk, inst, rspan, _ = p.roots[0]
    model = m.set_root(model, blk, inst, rspan)
    try:
        m.check_containment(model)
    except m.CyclicContainment as exc:
        diags.append(error("E207", f"cyclic containment: {exc}", valid[str(exc).split(' -> ')[0]].name_span))
    if diags:
        return None, diags
    return model, []


def _member_dups(d: _Decl, diags: list[Diagnostic]) -> None:
    seen: set[str] = set()
    for part in d.block.parts:
        if part.name in seen:
            diags.append(error("E206", f"part {part.name!r} is declared twice", part.span))
        seen.add(part.name)
    seen = set()
    for a in d.block.attributes:
        if a.name in seen:
            diags.append(error("E202", f"attribute {a.name!r} is declared twice", a.span))
        seen.add(a.name)
    seen = set()
    for f in d.block.functions:
        if f.name in seen:
            diags.append(error("E202", f"function {f.name!r} is declared twice", f.span))
        seen.add(f.name)
        pseen: set[str] = set()
        for prm in f.params:
            if prm.name in pseen:
                diags.append(error("E202", f"parameter {prm.name!r} of {f.name!r} is declared twice", f.span))
            pseen.add(prm.name)


def _part_span(d: _Decl, message: str) -> SourceSpan:
    for part in d.block.parts:
        if repr(part.name) in message:
            return part.span
    return d.name_span


def _attr_span(d: _Decl, message: str) -> SourceSpan:
    for a in d.block.attributes:
        if f".{a.name}:" in message:
            return a.span
    return d.name_span


def _lex_or_parse(text, file: str):
    try:
        text = decode_source(text)
    except UnicodeDecodeError as exc:
        raw = bytes(text)
        prefix = raw[: exc.start].decode("utf-8", errors="replace")
        line = prefix.count("\n") + 1
        col = len(prefix) - (prefix.rfind("\n") + 1) + 1
        raise ParseError("E102", "input is not valid UTF-8", SourceSpan(file, line, col, line, col))
    return text


def parse_model_diagnostics(text, file: str = "<input>", allow_deep: bool = True):
    """Parse ``text``; return ``(model, diagnostics)`` with model None on error."""
    try:
        src = _lex_or_parse(text, file)
        parser = ModelParser(src, file)
        parser.parse()
    except LexError as exc:
        span = SourceSpan(file, exc.line, exc.col, exc.line, exc.col)
        return None, [error("E102", exc.message, span)]
    except ParseError as exc:
        return None, [exc.diagnostic]
    except RecursionError:
        return None, [error("E101", "expression nesting too deep", SourceSpan(file, 1, 1, 1, 1))]
    model, diags = _resolve(parser, allow_deep)
    return model, sorted(diags, key=Diagnostic.sort_key)


def parse_model(text, file: str = "<input>") -> m.Model:
    """Parse a model; raise DiagnosticError with positioned diagnostics on failure."""
    model, diags = parse_model_diagnostics(text, file)
    if model is None:
        raise DiagnosticError(diags)
    return model
