"""Seeded generators for random test models and the desk-scale plant.

Everything here emits source text, so generated models go through the same
front end as hand-written ones. All generators are deterministic in their
``random.Random`` argument.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .behavior import INT_MAX, INT_MIN

TYPES = ("BOOL", "INT", "REAL", "TIME")
OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass
class GenConfig:
    components: int = 4
    layers: int = 2
    composites_per_layer: int = 2
    max_parts: int = 3
    max_attrs: int = 3
    max_functions: int = 3
    max_nodes: int = 4
    variant_prob: float = 0.5
    policy_prob: float = 0.3
    literal_ints: tuple = (-40, 40)


# ---------------------------------------------------------------------------
# Literals and expressions
# ---------------------------------------------------------------------------


def literal(rng: random.Random, t: str, lo: int = -40, hi: int = 40) -> str:
    if t == "BOOL":
        return rng.choice(("TRUE", "FALSE"))
    if t == "INT":
        return str(rng.randint(lo, hi))
    if t == "REAL":
        return repr(rng.randint(-80, 80) / 8)
    return f"T#{rng.randint(0, 20) * 10}ms"


def _value_expr(rng, t: str, refs: list[str]) -> str:
    """A typed right-hand side over ``refs`` (all of type ``t``)."""
    pick = lambda: rng.choice(refs) if refs and rng.random() < 0.7 else literal(rng, t)  # noqa: E731
    if t == "BOOL":
        forms = [lambda: pick(), lambda: f"not {pick()}", lambda: f"{pick()} and {pick()}",
                 lambda: f"{pick()} or not {pick()}"]
    elif t == "INT":
        forms = [lambda: pick(), lambda: f"{pick()} + {rng.randint(1, 9)}",
                 lambda: f"{pick()} - {pick()}", lambda: f"{pick()} * {rng.randint(-3, 3)}",
                 lambda: f"-{pick()}" if refs else literal(rng, t)]
    elif t == "REAL":
        forms = [lambda: pick(), lambda: f"{pick()} + 0.25", lambda: f"{pick()} * {pick()}",
                 lambda: f"{pick()} - 1.5"]
    else:
        forms = [lambda: pick(), lambda: f"{pick()} + T#10ms", lambda: f"{pick()} - {pick()}"]
    return rng.choice(forms)()


# ---------------------------------------------------------------------------
# Random valid models
# ---------------------------------------------------------------------------


@dataclass
class _Comp:
    name: str
    io: str
    type: str


@dataclass
class _Fn:
    name: str
    params: list  # (name, type)


@dataclass
class _Block:
    name: str
    parts: list = field(default_factory=list)  # (part name, block name)
    attrs: list = field(default_factory=list)  # (name, type)
    functions: list = field(default_factory=list)  # _Fn
    text: str = ""


class ModelGenerator:
    def __init__(self, rng: random.Random, cfg: GenConfig | None = None):
        self.rng = rng
        self.cfg = cfg or GenConfig()
        self.comps: dict[str, _Comp] = {}
        self.blocks: dict[str, _Block] = {}
        self.variant_texts: list[str] = []
        self.variant_of: dict[str, str] = {}

    # -- pieces ------------------------------------------------------------

    def _components(self) -> list[str]:
        out = []
        for i in range(self.cfg.components):
            io = "input" if i % 2 == 0 else "output"
            t = self.rng.choice(TYPES)
            name = f"Io{i}"
            self.comps[name] = _Comp(name, io, t)
            out.append(f"block {name} kind component {io} {t} {{}}")
        return out

    def _params(self) -> list:
        return [(f"q{i}", self.rng.choice(("INT", "BOOL", "REAL"))) for i in range(self.rng.randint(0, 2))]

    def _condition(self, blk: _Block, params: list, lanes: set) -> str:
        rng = self.rng
        cands = [(f"self.{a}", t) for a, t in blk.attrs]
        for pname, bname in blk.parts:
            c = self.comps.get(bname)
            if c is not None:
                cands.append((f"{pname}.Signal", c.type))
        ref, t = rng.choice(cands)
        if ref.split(".")[0] != "self":
            lanes.add(ref.split(".")[0])
        else:
            lanes.add("self")
        op = rng.choice(OPS) if t != "BOOL" else rng.choice(("==", "!="))
        same_params = [p for p, pt in params if pt == t]
        if same_params and rng.random() < 0.3:
            rhs = rng.choice(same_params)
        else:
            rhs = literal(rng, t)
        text = f"{ref} {op} {rhs}"
        if rng.random() < 0.2:
            return f"not {text}"
        return text

    def _node(self, blk: _Block, fn_index: int, params: list, lanes: set) -> tuple[str, bool]:
        """Return (node text after ':', is_call)."""
        rng = self.rng
        kinds = ["attr"]
        outs = [(p, b) for p, b in blk.parts if b in self.comps and self.comps[b].io == "output"]
        subs = [(p, b) for p, b in blk.parts if b in self.blocks and self.blocks[b].functions]
        if outs:
            kinds += ["signal", "setsig"]
        if subs:
            kinds += ["sub", "sub"]
        if fn_index > 0:
            kinds.append("self")
        kinds.append("system")
        kind = rng.choice(kinds)
        if kind == "attr" and blk.attrs:
            a, t = rng.choice(blk.attrs)
            refs = [f"self.{n}" for n, tt in blk.attrs if tt == t] + [p for p, pt in params if pt == t]
            lanes.add("self")
            return f"set self.{a} := {_value_expr(rng, t, refs)}", False
        if kind in ("signal", "setsig") and outs:
            p, b = rng.choice(outs)
            lanes.add(p)
            val = literal(rng, self.comps[b].type)
            if kind == "signal":
                return f"set {p}.Signal := {val}", False
            return f"call {p}.setSignal({val})", True
        if kind == "sub" and subs:
            p, b = rng.choice(subs)
            f = rng.choice(self.blocks[b].functions)
            lanes.add(p)
            return f"call {p}.{f.name}({', '.join(literal(rng, t) for _, t in f.params)})", True
        if kind == "self" and fn_index > 0:
            f = rng.choice(blk.functions[:fn_index])
            lanes.add("self")
            return f"call self.{f.name}({', '.join(literal(rng, t) for _, t in f.params)})", True
        lanes.add("system")
        if rng.random() < 0.5:
            return f"call system.delay(T#{rng.randint(0, 5) * 10}ms)", True
        return f"call system.waitCycles({rng.randint(0, 4)})", True

    def _body(self, blk: _Block, fn_index: int, params: list, indent: str = "        ") -> list[str]:
        rng = self.rng
        n = rng.randint(1, self.cfg.max_nodes)
        lanes: set = set()
        nodes, calls = [], []
        for i in range(n):
            text, is_call = self._node(blk, fn_index, params, lanes)
            if rng.random() < 0.15 and blk.attrs:
                a, t = rng.choice(blk.attrs)
                text += f" entry self.{a} := {literal(rng, t)}"
                lanes.add("self")
            nodes.append(f"{indent}node n{i} : {text}")
            calls.append(is_call)
        trans = [f"{indent}start -> n0"]
        for i in range(n):
            nxt = f"n{i + 1}" if i + 1 < n else "end"
            if rng.random() < 0.35 and (blk.attrs or any(b in self.comps for _, b in blk.parts)):
                cond = self._condition(blk, params, lanes)
                pol = ""
                if calls[i] and rng.random() < self.cfg.policy_prob:
                    pol = " policy " + rng.choice(("resume", "restart", "continue"))
                target = rng.choice([f"n{j}" for j in range(n)] + ["end"])
                trans.append(f"{indent}n{i} -> {target} when {cond}{pol}")
            do = ""
            if rng.random() < 0.2 and blk.attrs:
                a, t = rng.choice(blk.attrs)
                do = f" do self.{a} := {_value_expr(rng, t, [f'self.{a}'])}"
                lanes.add("self")
            trans.append(f"{indent}n{i} -> {nxt} on completion{do}")
        lane_list = sorted(lanes) or ["self"]
        return [f"{indent}lanes {', '.join(lane_list)}", *nodes, *trans]

    def _function(self, blk: _Block, fn: _Fn, index: int, override: bool = False) -> list[str]:
        ps = ", ".join(f"{n}: {t}" for n, t in fn.params)
        head = f"    {'override ' if override else ''}function {fn.name}({ps}) {{"
        return [head, *self._body(blk, index, fn.params), "    }"]

    def _composite(self, name: str, pool: list[str]) -> _Block:
        rng = self.rng
        blk = _Block(name)
        nparts = rng.randint(1, self.cfg.max_parts)
        for i in range(nparts):
            blk.parts.append((f"p{i}", rng.choice(pool)))
        for i in range(rng.randint(0, self.cfg.max_attrs)):
            blk.attrs.append((f"a{i}", rng.choice(TYPES)))
        for i in range(rng.randint(1, self.cfg.max_functions)):
            blk.functions.append(_Fn(f"f{i}", self._params()))
        self.blocks[name] = blk
        lines = [f"block {name} kind composite {{"]
        lines += [f"    part {p} : {b}" for p, b in blk.parts]
        lines += [f"    attr {a} : {t} = {literal(rng, t)}" for a, t in blk.attrs]
        for i, f in enumerate(blk.functions):
            lines += self._function(blk, f, i)
        lines.append("}")
        blk.text = "\n".join(lines)
        return blk

    def _variant(self, vname: str, base: _Block, adapt_only: bool) -> str:
        """A depth-one variant; ``adapt_only`` forbids new parts/attrs/functions."""
        rng = self.rng
        view = _Block(vname, list(base.parts), list(base.attrs), list(base.functions))
        lines = [f"variant {vname} of {base.name} {{"]
        if not adapt_only and rng.random() < 0.4:
            comp = rng.choice(list(self.comps))
            view.parts.append(("extra", comp))
            lines.append(f"    part extra : {comp}")
        for a, t in base.attrs:
            if rng.random() < 0.5:
                lines.append(f"    attr {a} : {t} = {literal(rng, t)}")
        if not adapt_only and rng.random() < 0.4:
            t = rng.choice(TYPES)
            view.attrs.append(("v0", t))
            lines.append(f"    attr v0 : {t} = {literal(rng, t)}")
        for i, f in enumerate(base.functions):
            if rng.random() < 0.5:
                lines += self._function(view, f, i, override=True)
        if not adapt_only and rng.random() < 0.4:
            f = _Fn("g0", self._params())
            view.functions.append(f)
            lines += self._function(view, f, len(view.functions) - 1)
        lines.append("}")
        return "\n".join(lines)

    # -- whole model -------------------------------------------------------

    def generate(self, adapt_only_variants: bool = False) -> str:
        rng = self.rng
        out = ["// generated", "system function delay(duration: TIME)",
               "system function waitCycles(n: INT)", ""]
        out += self._components()
        pool = list(self.comps)
        for layer in range(self.cfg.layers):
            made = []
            for j in range(self.cfg.composites_per_layer):
                blk = self._composite(f"B{layer}x{j}", pool)
                out.append(blk.text)
                made.append(blk.name)
                for k in range(2):
                    if rng.random() < self.cfg.variant_prob:
                        vname = f"{blk.name}v{k}"
                        out.append(self._variant(vname, blk, adapt_only_variants))
                        self.variant_of[vname] = blk.name
                        made.append(vname)
            pool = pool + made
        top = self._composite("Top", [b for b in pool if b not in self.comps] or pool)
        out.append(top.text)
        out.append("root top : Top")
        return "\n\n".join(out) + "\n"


def random_model(seed: int, cfg: GenConfig | None = None, adapt_only_variants: bool = False) -> str:
    return ModelGenerator(random.Random(seed), cfg).generate(adapt_only_variants)


# ---------------------------------------------------------------------------
# Scenarios for a model
# ---------------------------------------------------------------------------


def random_scenario(model, rng: random.Random, max_cycles: int = 40, events: int = 8) -> str:
    """Drive random inputs and invoke a random function of the root tree."""
    from . import model as m

    tree = m.instantiate_root(model)
    calls, inputs = [], []
    for inst in tree.walk():
        blk = model.block(inst.block)
        if blk.kind is m.BlockKind.COMPOSITE:
            for f in m.effective_functions(model, inst.block):
                calls.append((inst.path, f))
        sig = m.signal_attribute(model, inst.block)
        if sig is not None and sig.io is m.IO.INPUT:
            inputs.append((f"{inst.path}.Signal", sig.type.value))
    path, f = rng.choice(calls)
    args = ", ".join(literal(rng, p.type.value) for p in f.params)
    lines = [f"invoke {path}.{f.name}({args})", f"maxcycles {max_cycles}"]
    for _ in range(events if inputs else 0):
        target, t = rng.choice(inputs)
        lines.append(f"at {rng.randrange(max_cycles)} set {target} = {literal(rng, t)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Desk-scale plant: 5 transport portals x 11 I/O + 4 units x 10 I/O + 5 = 100
# ---------------------------------------------------------------------------

_DESK_LIBRARY = """\
system function delay(duration: TIME)
system function waitCycles(n: INT)

block Drive kind component output BOOL {}
block Limit kind component input BOOL {}
block Button kind component input BOOL {}
block Lamp kind component output BOOL {}
block Analog kind component input INT {}

block Axis kind composite {
    part fwd : Drive
    part rev : Drive
    part atFront : Limit
    part atBack : Limit
    attr moves : INT = 0
    function toFront() {
        lanes self, fwd, rev, atFront
        node go : set fwd.Signal := TRUE, rev.Signal := FALSE
        node stop : set fwd.Signal := FALSE
        start -> go
        go -> stop when atFront.Signal == TRUE
        stop -> end on completion do self.moves := self.moves + 1
    }
    function toBack() {
        lanes self, fwd, rev, atBack
        node go : set rev.Signal := TRUE, fwd.Signal := FALSE
        node stop : set rev.Signal := FALSE
        start -> go
        go -> stop when atBack.Signal == TRUE
        stop -> end on completion do self.moves := self.moves + 1
    }
}

block Gripper kind composite {
    part close : Drive
    part open : Drive
    part vacuum : Limit
    function grip() {
        lanes close, open, vacuum
        node c : set close.Signal := TRUE, open.Signal := FALSE
        start -> c
        c -> end when vacuum.Signal == TRUE
    }
    function release() {
        lanes close, open
        node o : set close.Signal := FALSE, open.Signal := TRUE
        start -> o
        o -> end on completion
    }
}

block TransportPortal kind composite {
    part x : Axis
    part y : Axis
    part grip : Gripper
    attr transfers : INT = 0
    function transfer() {
        lanes self, x, y, grip, system
        node reach : call x.toFront()
        node lower : call y.toFront()
        node take : call grip.grip()
        node raise : call y.toBack()
        node back : call x.toBack()
        node drop : call grip.release()
        node settle : call system.waitCycles(1)
        start -> reach
        reach -> lower on completion
        lower -> take on completion
        take -> raise on completion
        raise -> back on completion
        back -> drop on completion
        drop -> settle on completion
        settle -> end on completion do self.transfers := self.transfers + 1
    }
}

block ProcessingUnit kind composite {
    part clamp : Axis
    part spindle : Drive
    part coolant : Drive
    part load : Analog
    part ready : Limit
    part done : Lamp
    part fault : Lamp
    attr limit : INT = 900
    attr parts : INT = 0
    function process(t: TIME) {
        lanes self, clamp, spindle, coolant, load, ready, done, fault, system
        node wait : set done.Signal := FALSE
        node fix : call clamp.toFront()
        node cut : set spindle.Signal := TRUE, coolant.Signal := TRUE
        node dwell : call system.delay(t)
        node stop : set spindle.Signal := FALSE, coolant.Signal := FALSE
        node unfix : call clamp.toBack()
        node alarm : call fault.setSignal(TRUE)
        start -> wait
        wait -> fix when ready.Signal == TRUE
        fix -> cut on completion
        cut -> alarm when load.Signal > self.limit
        cut -> dwell on completion
        dwell -> stop on completion
        stop -> unfix on completion
        unfix -> end on completion do self.parts := self.parts + 1
        alarm -> stop on completion
    }
}
"""


def desk_scale_model(portals: int = 5, units: int = 4) -> str:
    """Plant at the scale of the desk study; 100 I/O for the default sizes."""
    parts = [f"    part portal{i} : TransportPortal" for i in range(portals)]
    parts += [f"    part unit{i} : ProcessingUnit" for i in range(units)]
    parts += ["    part startButton : Button", "    part stopButton : Button",
              "    part resetButton : Button", "    part greenLamp : Lamp", "    part redLamp : Lamp"]
    nodes = ["        node on1 : call greenLamp.setSignal(TRUE)"]
    order = ["on1"]
    for i in range(portals):
        nodes.append(f"        node t{i} : call portal{i}.transfer()")
        order.append(f"t{i}")
    for i in range(units):
        nodes.append(f"        node u{i} : call unit{i}.process(T#30ms)")
        order.append(f"u{i}")
    lanes = ["self", "greenLamp", "redLamp", "stopButton"] + [f"portal{i}" for i in range(portals)] \
        + [f"unit{i}" for i in range(units)]
    trans = ["        start -> on1"]
    for a, b in zip(order, order[1:]):
        trans.append(f"        {a} -> {b} on completion")
    trans.append(f"        {order[-1]} -> on1 on completion do self.rounds := self.rounds + 1")
    plant = "\n".join([
        "block Plant kind composite {",
        *parts,
        "    attr rounds : INT = 0",
        "    function operate() {",
        f"        lanes {', '.join(lanes)}",
        *nodes,
        "        node halt : call redLamp.setSignal(TRUE)",
        *trans,
        *[f"        {n} -> halt when stopButton.Signal == TRUE" for n in order[1:]],
        "        halt -> end on completion",
        "    }",
        "}",
    ])
    return f"// Desk-scale plant: {portals} transport portals, {units} processing units.\n\n" \
        f"{_DESK_LIBRARY}\n{plant}\n\nroot plant : Plant\n"


def desk_scale_scenario(cycles: int = 1000, portals: int = 5, units: int = 4) -> str:
    """Close every limit switch early so the plant keeps cycling."""
    lines = ["invoke plant.operate()", f"maxcycles {cycles}"]
    for i in range(portals):
        for ax in ("x", "y"):
            lines.append(f"at 1 set plant.portal{i}.{ax}.atFront.Signal = TRUE")
            lines.append(f"at 1 set plant.portal{i}.{ax}.atBack.Signal = TRUE")
        lines.append(f"at 1 set plant.portal{i}.grip.vacuum.Signal = TRUE")
    for i in range(units):
        lines.append(f"at 1 set plant.unit{i}.ready.Signal = TRUE")
        lines.append(f"at 1 set plant.unit{i}.clamp.atFront.Signal = TRUE")
        lines.append(f"at 1 set plant.unit{i}.clamp.atBack.Signal = TRUE")
        lines.append(f"at {2 + i * 97} set plant.unit{i}.load.Signal = {INT_MAX if i == 3 else 500}")
    lines.append(f"at {cycles - 1} expect plant.rounds >= 1")
    return "\n".join(lines) + "\n"


__all__ = [
    "GenConfig", "ModelGenerator", "random_model", "random_scenario", "desk_scale_model",
    "desk_scale_scenario", "literal", "INT_MIN", "INT_MAX",
]
