"""Cyclic scan execution of behavior models.

One call to ``step_cycle`` is one PLC scan:

1. latch the scenario inputs into Input signals,
2. step the root function instance (unless it has completed),
3. step every detached instance, in instance-tree pre-order,
4. snapshot all variables.

Function instances are persistent, one per (object path, function name).
``state`` encodes the instance status the same way the generated Structured
Text does: 0 idle/fresh, k > 0 active node k (1-based), -1 completed.
``mode`` distinguishes an attached running call (0), a call suspended by a
``resume`` preemption (1) and a detached call (2).

Transition choice is by declaration order and at most one transition fires
per instance per cycle; an instance is never stepped twice in one cycle.
When a condition transition leaves a call node whose callee is still
running, the transition's policy applies (default ``restart``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import model as m
from . import sysfuncs
from .behavior import (
    AttributeOp,
    Binary,
    DEFAULT_POLICY,
    END,
    Expr,
    FunctionCall,
    Literal,
    Policy,
    Ref,
    TypeTag,
    Unary,
)
from .scope import Scope


class SimulationError(Exception):
    pass


class UnknownTarget(SimulationError):
    pass


class ArityMismatch(SimulationError):
    pass


class DivergenceGuard(SimulationError):
    pass


class RuntimeTypeError(SimulationError):
    pass


FRESH, COMPLETED = 0, -1
ATTACHED, SUSPENDED, DETACHED = 0, 1, 2


# ---------------------------------------------------------------------------
# Value semantics
# ---------------------------------------------------------------------------


def wrap(t: TypeTag, v):
    if t is TypeTag.INT:
        return ((v + 32768) & 0xFFFF) - 32768
    if t is TypeTag.TIME:
        return ((v + 2**31) & 0xFFFFFFFF) - 2**31
    return v


_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}

_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}


def compile_expr(expr: Expr, typeof: Callable[[Ref], TypeTag], fetch: Callable[[Ref], Callable]):
    """Compile to ``(closure(vars, args), type)``.

    ``fetch(ref)`` returns a closure reading the referenced value.
    """
    if isinstance(expr, Literal):
        v = expr.value
        return (lambda vars, args: v), expr.type
    if isinstance(expr, Ref):
        return fetch(expr), typeof(expr)
    if isinstance(expr, Unary):
        f, t = compile_expr(expr.operand, typeof, fetch)
        if expr.op == "not":
            return (lambda vars, args: not f(vars, args)), TypeTag.BOOL
        return (lambda vars, args: wrap(t, -f(vars, args))), t
    lf, lt = compile_expr(expr.left, typeof, fetch)
    rf, _ = compile_expr(expr.right, typeof, fetch)
    op = expr.op
    if op == "and":
        return (lambda vars, args: lf(vars, args) and rf(vars, args)), TypeTag.BOOL
    if op == "or":
        return (lambda vars, args: lf(vars, args) or rf(vars, args)), TypeTag.BOOL
    if op in _CMP:
        c = _CMP[op]
        return (lambda vars, args: c(lf(vars, args), rf(vars, args))), TypeTag.BOOL
    a = _ARITH[op]
    if lt is TypeTag.REAL:
        return (lambda vars, args: float(a(lf(vars, args), rf(vars, args)))), lt
    return (lambda vars, args: wrap(lt, a(lf(vars, args), rf(vars, args)))), lt


# ---------------------------------------------------------------------------
# Compiled program
# ---------------------------------------------------------------------------


@dataclass
class CNode:
    id: str
    kind: str  # "call" | "attr"
    assigns: list = field(default_factory=list)  # [(var key, closure)]
    entry: list = field(default_factory=list)
    exit: list = field(default_factory=list)
    callee: Optional[tuple[str, str]] = None
    arg_names: tuple = ()
    arg_fns: list = field(default_factory=list)


@dataclass
class CTransition:
    source: str
    target: str
    target_index: int  # 0 for END
    kind: Optional[str]
    cond: Optional[Callable] = None
    policy: Policy = DEFAULT_POLICY
    op: list = field(default_factory=list)


@dataclass
class CFunction:
    key: tuple[str, str]
    kind: str  # "body" | "intrinsic" | "system"
    params: tuple = ()
    nodes: list = field(default_factory=list)
    start: Optional[CTransition] = None
    outgoing: list = field(default_factory=list)  # per node index-1
    builtin: Optional[sysfuncs.Builtin] = None
    signal_key: Optional[str] = None


class Program:
    """Static, shareable compilation of a model's instance tree."""

    def __init__(self, model: m.Model, tree: Optional[m.ObjectInstance] = None):
        self.model = model
        self.tree = tree or m.instantiate_root(model)
        self.var_types: dict[str, TypeTag] = {}
        self.var_io: dict[str, Optional[m.IO]] = {}
        self.initial: dict[str, object] = {}
        self.order: list[tuple[str, str]] = []  # instance keys in step order
        self.functions: dict[tuple[str, str], CFunction] = {}
        self.objects: dict[str, m.ObjectInstance] = {}
        for inst in self.tree.walk():
            self.objects[inst.path] = inst
            for a in m.effective_attributes(model, inst.block):
                key = f"{inst.path}.{a.name}"
                self.var_types[key] = a.type
                self.var_io[key] = a.io
                self.initial[key] = a.initial
        for inst in self.tree.walk():
            self._compile_object(inst)

    def _compile_object(self, inst: m.ObjectInstance) -> None:
        blk = self.model.block(inst.block)
        funcs = m.effective_functions(self.model, inst.block)
        system_used: set[str] = set()
        for f in funcs:
            key = (inst.path, f.name)
            if f.intrinsic:
                cf = CFunction(key, "intrinsic", tuple(p.name for p in f.params),
                               signal_key=f"{inst.path}.{m.SIGNAL}")
            elif f.body is None or blk.kind is not m.BlockKind.COMPOSITE:
                cf = CFunction(key, "intrinsic", tuple(p.name for p in f.params))
            else:
                cf = self._compile_body(inst, f)
                for n in f.body.nodes:
                    if isinstance(n.action, FunctionCall) and n.action.lane == ("system",):
                        system_used.add(n.action.function)
            self.functions[key] = cf
            self.order.append(key)
        for name in sorted(system_used):
            key = (inst.path, f"system.{name}")
            b = sysfuncs.lookup(name)
            self.functions[key] = CFunction(key, "system", tuple(p.name for p in b.signature.params), builtin=b)
            self.order.append(key)

    def _compile_body(self, inst: m.ObjectInstance, f: m.FunctionDef) -> CFunction:
        sc = Scope(self.model, inst.block, f)
        path = inst.path

        def var_key(r) -> str:
            return f"{path}.{r.name}" if r.lane == "self" else f"{path}.{r.lane}.{r.name}"

        def typeof(ref):
            return sc.resolve(ref).type

        def fetch(ref):
            r = sc.resolve(ref)
            if r.kind == "param":
                name = r.name
                return lambda vars, args: args[name]
            k = var_key(r)
            return lambda vars, args: vars[k]

        def expr(e):
            return compile_expr(e, typeof, fetch)[0]

        def assigns(items):
            return [(var_key(sc.resolve_target(a.target)), expr(a.value)) for a in items]

        index = {n.id: i + 1 for i, n in enumerate(f.body.nodes)}
        nodes = []
        for n in f.body.nodes:
            if isinstance(n.action, FunctionCall):
                rc = sc.resolve_call(n.action)
                if rc.kind == "self":
                    callee = (path, rc.function.name)
                elif rc.kind == "part":
                    callee = (f"{path}.{rc.lane}", rc.function.name)
                else:
                    callee = (path, f"system.{rc.function.name}")
                cn = CNode(n.id, "call", callee=callee,
                           arg_names=tuple(p.name for p in rc.function.params),
                           arg_fns=[expr(a) for a in n.action.args])
            else:
                cn = CNode(n.id, "attr", assigns=assigns(n.action.assignments))
            cn.entry = assigns(n.entry)
            cn.exit = assigns(n.exit)
            nodes.append(cn)

        def ctrans(t):
            return CTransition(
                t.source, t.target, 0 if t.target == END else index[t.target], t.kind,
                expr(t.condition) if t.condition is not None else None,
                t.policy or DEFAULT_POLICY, assigns(t.operation))

        start = ctrans(f.body.start_transitions()[0])
        outgoing = [[ctrans(t) for t in f.body.outgoing(n.id)] for n in f.body.nodes]
        return CFunction((path, f.name), "body", tuple(p.name for p in f.params), nodes, start, outgoing)


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------


@dataclass
class FunctionInstanceState:
    key: tuple[str, str]
    state: int = FRESH
    mode: int = ATTACHED
    cycles_in_node: int = 0
    last: int = -1
    detached_at: int = -1
    args: dict = field(default_factory=dict)
    local: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if self.state == FRESH:
            return "Fresh"
        if self.state == COMPLETED:
            return "Completed"
        return ("Running", "Suspended", "Detached")[self.mode]

    def copy(self) -> "FunctionInstanceState":
        return FunctionInstanceState(self.key, self.state, self.mode, self.cycles_in_node, self.last,
                                     self.detached_at, dict(self.args), dict(self.local))


def key_text(key: tuple[str, str]) -> str:
    return f"{key[0]}:{key[1]}"


@dataclass
class CycleRecord:
    cycle: int
    inputs: list
    fired: list
    active: list
    detached: list
    vars: dict
    asserts: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "cycle": self.cycle,
                "fired": self.fired,
                "active": self.active,
                "detached": self.detached,
                "vars": self.vars,
                "asserts": self.asserts,
            },
            separators=(",", ":"),
        )


@dataclass
class ScanState:
    program: Program
    root: tuple[str, str]
    vars: dict
    instances: dict
    cycle: int = 0
    max_cycles: Optional[int] = None

    def clone(self) -> "ScanState":
        return ScanState(self.program, self.root, dict(self.vars),
                         {k: v.copy() for k, v in self.instances.items()}, self.cycle, self.max_cycles)

    def instance(self, key) -> FunctionInstanceState:
        return self.instances[key]

    @property
    def root_completed(self) -> bool:
        return self.instances[self.root].state == COMPLETED

    def detached(self) -> list[tuple[str, str]]:
        return [k for k in self.program.order
                if self.instances[k].mode == DETACHED and self.instances[k].state > 0]

    @property
    def finished(self) -> bool:
        return self.root_completed and not self.detached()


def init_run(model: m.Model, invocation, program: Optional[Program] = None,
             max_cycles: Optional[int] = None) -> ScanState:
    """Prepare a run of ``invocation = (instance path, function, args)``.

    ``args`` are Python values or ``Literal`` nodes.
    """
    path, fn, args = invocation
    program = program or Program(model)
    inst = program.objects.get(path)
    if inst is None:
        raise UnknownTarget(f"no object instance {path!r}")
    f = m.effective_function(model, inst.block, fn)
    if f is None:
        raise UnknownTarget(f"{path} ({inst.block}) has no function {fn!r}")
    if len(args) != len(f.params):
        raise ArityMismatch(f"{fn}() expects {len(f.params)} argument(s), got {len(args)}")
    bound = {}
    for p, a in zip(f.params, args):
        if isinstance(a, Literal):
            if a.type is not p.type:
                raise ArityMismatch(f"argument {p.name} of {fn}() must be {p.type}, got {a.type}")
            a = a.value
        bound[p.name] = a
    instances = {k: FunctionInstanceState(k) for k in program.order}
    instances[(path, fn)].args = bound
    return ScanState(program, (path, fn), dict(program.initial), instances, 0, max_cycles)


class _Cycle:
    """Executes one scan cycle in place on a ScanState."""

    def __init__(self, st: ScanState):
        self.st = st
        self.prog = st.program
        self.vars = st.vars
        self.insts = st.instances
        self.now = st.cycle
        self.fired: list = []

    def run(self, inputs) -> CycleRecord:
        st = self.st
        latched = []
        for key, value in inputs:
            if key not in self.vars:
                raise UnknownTarget(f"no variable {key!r}")
            self.vars[key] = value
            latched.append([key, value])
        root = self.insts[st.root]
        if root.state != COMPLETED and root.last != self.now:
            self.step(root)
        for key in self.prog.order:
            inst = self.insts[key]
            if (inst.mode == DETACHED and inst.state > 0 and inst.detached_at != self.now
                    and inst.last != self.now):
                self.step(inst)
        rec = CycleRecord(self.now, latched, self.fired, self._active(), [key_text(k) for k in st.detached()],
                          dict(self.vars))
        st.cycle += 1
        return rec

    def _active(self) -> list[str]:
        chain = []
        inst = self.insts[self.st.root]
        while inst is not None and inst.state > 0:
            cf = self.prog.functions[inst.key]
            if cf.kind != "body":
                chain.append(f"{key_text(inst.key)}@run")
                break
            node = cf.nodes[inst.state - 1]
            chain.append(f"{key_text(inst.key)}@{node.id}")
            inst = None
            if node.kind == "call":
                callee = self.insts[node.callee]
                if callee.state > 0 and callee.mode == ATTACHED:
                    inst = callee
        return chain

    # -- instance stepping ------------------------------------------------

    def invoke(self, inst: FunctionInstanceState, args: dict) -> None:
        if inst.last == self.now:
            return
        if inst.state == COMPLETED:
            inst.state = FRESH
        if inst.state == FRESH:
            inst.args = args
        inst.mode = ATTACHED
        self.step(inst)

    def step(self, inst: FunctionInstanceState) -> None:
        inst.last = self.now
        cf = self.prog.functions[inst.key]
        if cf.kind == "intrinsic":
            if cf.signal_key is not None and inst.key[1] == "setSignal":
                self.vars[cf.signal_key] = inst.args["v"]
            inst.state = COMPLETED
            inst.mode = ATTACHED
            return
        if cf.kind == "system":
            if inst.state == FRESH:
                inst.local = {name: 0 for name, _ in cf.builtin.locals}
                inst.state = 1
            if cf.builtin.step(inst.local, inst.args):
                inst.state = COMPLETED
                inst.mode = ATTACHED
            return
        if inst.state == FRESH:
            t = cf.start
            self._assign(t.op, inst)
            self._fire(inst, t, None)
            if t.target_index == 0:
                inst.state = COMPLETED
                inst.mode = ATTACHED
                return
            inst.state = t.target_index
            inst.cycles_in_node = 0
            node = cf.nodes[inst.state - 1]
            self._assign(node.entry, inst)
            self._do(node, inst)
            inst.cycles_in_node += 1
            return
        node = cf.nodes[inst.state - 1]
        for t in cf.outgoing[inst.state - 1]:
            if self._enabled(t, node, inst):
                self._assign(node.exit, inst)
                applied = None
                if node.kind == "call":
                    callee = self.insts[node.callee]
                    if callee.state > 0 and callee.mode == ATTACHED:
                        applied = t.policy
                        self._preempt(callee, t.policy)
                self._assign(t.op, inst)
                self._fire(inst, t, applied)
                if t.target_index == 0:
                    inst.state = COMPLETED
                    inst.mode = ATTACHED
                else:
                    inst.state = t.target_index
                    inst.cycles_in_node = 0
                    self._assign(cf.nodes[inst.state - 1].entry, inst)
                return
        self._do(node, inst)
        inst.cycles_in_node += 1

    def _enabled(self, t: CTransition, node: CNode, inst) -> bool:
        if t.kind == "completion":
            if inst.cycles_in_node < 1:
                return False
            if node.kind == "call":
                return self.insts[node.callee].state == COMPLETED
            return True
        return bool(t.cond(self.vars, inst.args))

    def _do(self, node: CNode, inst) -> None:
        if node.kind == "attr":
            self._assign(node.assigns, inst)
            return
        args = {name: f(self.vars, inst.args) for name, f in zip(node.arg_names, node.arg_fns)}
        self.invoke(self.insts[node.callee], args)

    def _assign(self, items, inst) -> None:
        for key, f in items:
            self.vars[key] = f(self.vars, inst.args)

    def _preempt(self, callee: FunctionInstanceState, policy: Policy) -> None:
        if policy is Policy.RESUME:
            callee.mode = SUSPENDED
        elif policy is Policy.CONTINUE:
            callee.mode = DETACHED
            callee.detached_at = self.now
        else:
            self._reset(callee)

    def _reset(self, inst: FunctionInstanceState) -> None:
        cf = self.prog.functions[inst.key]
        if inst.state > 0 and cf.kind == "body":
            node = cf.nodes[inst.state - 1]
            if node.kind == "call":
                callee = self.insts[node.callee]
                if callee.state > 0 and callee.mode == ATTACHED:
                    self._reset(callee)
        inst.state = FRESH
        inst.mode = ATTACHED

    def _fire(self, inst, t: CTransition, policy) -> None:
        self.fired.append({
            "inst": key_text(inst.key),
            "from": t.source,
            "to": t.target,
            "kind": t.kind or "start",
            "policy": policy.value if policy is not None else None,
        })


def step_cycle(state: ScanState, inputs=()) -> tuple[ScanState, CycleRecord]:
    """Pure single-cycle step: returns the successor state and its record."""
    if state.max_cycles is not None and state.cycle >= state.max_cycles:
        raise DivergenceGuard(f"cycle bound {state.max_cycles} reached")
    new = state.clone()
    rec = _Cycle(new).run(inputs)
    return new, rec


# ---------------------------------------------------------------------------
# Expressions over absolute paths (assertions, eval_condition)
# ---------------------------------------------------------------------------


def evaluate(expr: Expr, vars: dict, var_types: dict, bindings: Optional[dict] = None,
             binding_types: Optional[dict] = None):
    """Evaluate ``expr`` whose dotted refs are absolute instance paths."""
    bindings = bindings or {}
    binding_types = binding_types or {}

    def typeof(ref):
        if len(ref.path) == 1 and ref.path[0] in bindings:
            return binding_types.get(ref.path[0], _guess(bindings[ref.path[0]]))
        return var_types[ref.text]

    def fetch(ref):
        if len(ref.path) == 1 and ref.path[0] in bindings:
            name = ref.path[0]
            return lambda v, a: a[name]
        key = ref.text
        if key not in vars:
            raise UnknownTarget(f"no variable {key!r}")
        return lambda v, a: v[key]

    f, _ = compile_expr(expr, typeof, fetch)
    return f(vars, bindings)


def _guess(v) -> TypeTag:
    if isinstance(v, bool):
        return TypeTag.BOOL
    if isinstance(v, float):
        return TypeTag.REAL
    return TypeTag.INT


def eval_condition(state: ScanState, expr: Expr, bindings: Optional[dict] = None,
                   host: Optional[str] = None) -> bool:
    """Two-valued evaluation of a condition against the current variables.

    With ``host`` set, ``self.x`` and ``lane.x`` resolve relative to that
    object path as inside a behavior diagram.
    """
    if host is not None:
        expr = _absolutize(expr, host, set(bindings or ()))
    return bool(evaluate(expr, state.vars, state.program.var_types, bindings))


def _absolutize(e: Expr, host: str, params: set) -> Expr:
    if isinstance(e, Ref):
        if len(e.path) == 1 and e.path[0] in params:
            return e
        if e.path[0] == "self":
            return Ref(tuple(host.split(".")) + e.path[1:], e.span)
        return Ref(tuple(host.split(".")) + e.path, e.span)
    if isinstance(e, Unary):
        return Unary(e.op, _absolutize(e.operand, host, params), e.span)
    if isinstance(e, Binary):
        return Binary(e.op, _absolutize(e.left, host, params), _absolutize(e.right, host, params), e.span)
    return e


# ---------------------------------------------------------------------------
# Scenario runs
# ---------------------------------------------------------------------------


@dataclass
class AssertionResult:
    cycle: int
    text: str
    expected: bool
    actual: Optional[bool]

    @property
    def ok(self) -> bool:
        return self.actual is not None and self.actual == self.expected


@dataclass
class Trace:
    records: list
    assertions: list
    diverged: bool
    completed: bool

    @property
    def passed(self) -> bool:
        return not self.diverged and all(a.ok for a in self.assertions)

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def summary(self) -> str:
        ok = sum(a.ok for a in self.assertions)
        word = "PASS" if self.passed else "FAIL"
        return f"{word} {ok}/{len(self.assertions)} assertions"


def run(model: m.Model, scenario, program: Optional[Program] = None) -> Trace:
    """Run a parsed scenario until it finishes or reaches its cycle bound."""
    from .formatter import expr_text

    state = init_run(model, scenario.invocation, program, scenario.max_cycles)
    inputs: dict[int, list] = {}
    for ev in scenario.inputs:
        inputs.setdefault(ev.cycle, []).append((ev.target, ev.value))
    asserts: dict[int, list] = {}
    for a in scenario.assertions:
        asserts.setdefault(a.cycle, []).append(a)
    last_event = max([*inputs, *asserts], default=-1)
    records = []
    results = []
    diverged = False
    while True:
        if state.finished and state.cycle > last_event:
            break
        if state.cycle >= scenario.max_cycles:
            diverged = not state.finished
            break
        rec = _Cycle(state).run(inputs.get(state.cycle, ()))
        for a in asserts.get(rec.cycle, ()):
            actual = bool(evaluate(a.expr, rec.vars, state.program.var_types))
            res = AssertionResult(rec.cycle, expr_text(a.expr), a.expected, actual)
            results.append(res)
            rec.asserts.append({"expr": res.text, "expected": res.expected, "actual": actual, "ok": res.ok})
        records.append(rec)
    reached = {r.cycle for r in records}
    for c, items in sorted(asserts.items()):
        if c not in reached:
            for a in items:
                results.append(AssertionResult(c, expr_text(a.expr), a.expected, None))
    results.sort(key=lambda r: r.cycle)
    return Trace(records, results, diverged, state.finished)
