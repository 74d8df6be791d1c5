"""Structure layer of the meta-model: block definitions and their instances.

Models are immutable values. ``define_block`` and ``define_variant`` return a
new ``Model``; the resolution helpers (``effective_parts``,
``effective_interface``, ...) compute inherited views on demand.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .behavior import BehaviorDef, TypeTag, default_value
from .diagnostics import NO_SPAN, SourceSpan


class ModelError(Exception):
    pass


class DuplicateBlock(ModelError):
    pass


class UnresolvedReference(ModelError):
    pass


class BaseIsVariant(ModelError):
    pass


class UnknownBlock(ModelError):
    pass


class UnknownFunction(ModelError):
    pass


class DuplicatePart(ModelError):
    pass


class DuplicateMember(ModelError):
    pass


class AttributeTypeChange(ModelError):
    pass


class CyclicContainment(ModelError):
    pass


class BlockKind(enum.Enum):
    COMPONENT = "component"
    COMPOSITE = "composite"
    SYSTEM = "system"


class IO(enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


class LockStatus(enum.Enum):
    INHERITED = "inherited"  # closed padlock
    OVERRIDDEN = "overridden"  # open padlock
    NEW = "new"  # key


SIGNAL = "Signal"


@dataclass(frozen=True)
class AttributeDef:
    name: str
    type: TypeTag
    initial: object
    io: Optional[IO] = None
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Param:
    name: str
    type: TypeTag


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[Param, ...] = ()
    body: Optional[BehaviorDef] = None
    override: bool = False
    intrinsic: bool = False
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def signature(self) -> tuple:
        return (self.name, tuple((p.name, p.type) for p in self.params))

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class PartDef:
    name: str
    block: str
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class BlockDef:
    name: str
    kind: BlockKind
    base: Optional[str] = None
    parts: tuple[PartDef, ...] = ()
    attributes: tuple[AttributeDef, ...] = ()
    functions: tuple[FunctionDef, ...] = ()
    span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)
    base_span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def is_variant(self) -> bool:
        return self.base is not None

    def own_function(self, name: str) -> Optional[FunctionDef]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def own_attribute(self, name: str) -> Optional[AttributeDef]:
        for a in self.attributes:
            if a.name == name:
                return a
        return None


@dataclass(frozen=True)
class Model:
    blocks: dict = field(default_factory=dict)  # name -> BlockDef, declaration order
    system_functions: tuple[FunctionDef, ...] = ()
    root: Optional[tuple[str, str]] = None  # (block name, instance name)
    root_span: SourceSpan = field(default=NO_SPAN, compare=False, repr=False)

    def block(self, name: str) -> BlockDef:
        try:
            return self.blocks[name]
        except KeyError:
            raise UnknownBlock(name) from None

    def system_function(self, name: str) -> Optional[FunctionDef]:
        for f in self.system_functions:
            if f.name == name:
                return f
        return None

    def variants_of(self, name: str) -> list[str]:
        return [b.name for b in self.blocks.values() if b.base == name]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _check_members(d: BlockDef) -> None:
    seen: set[str] = set()
    for p in d.parts:
        if p.name in seen:
            raise DuplicatePart(f"{d.name}: part {p.name!r} declared twice")
        seen.add(p.name)
    names = [a.name for a in d.attributes]
    if len(set(names)) != len(names):
        raise DuplicateMember(f"{d.name}: attribute declared twice")
    fnames = [f.name for f in d.functions]
    if len(set(fnames)) != len(fnames):
        raise DuplicateMember(f"{d.name}: function declared twice")
    for f in d.functions:
        pnames = [p.name for p in f.params]
        if len(set(pnames)) != len(pnames):
            raise DuplicateMember(f"{d.name}.{f.name}: parameter declared twice")


def _check_refs(model: Model, d: BlockDef, forward: Iterable[str]) -> None:
    known = set(model.blocks) | set(forward) | {d.name}
    for p in d.parts:
        if p.block not in known:
            raise UnresolvedReference(f"{d.name}.{p.name}: unknown block {p.block!r}")


def define_block(model: Model, d: BlockDef, forward: Iterable[str] = ()) -> Model:
    """Add a base block; part types may name blocks listed in ``forward``."""
    if d.name in model.blocks:
        raise DuplicateBlock(d.name)
    if d.base is not None:
        return define_variant(model, d.base, d, forward=forward)
    _check_members(d)
    _check_refs(model, d, forward)
    blocks = dict(model.blocks)
    blocks[d.name] = d
    return replace(model, blocks=blocks)


def define_variant(
    model: Model,
    base_name: str,
    d: BlockDef,
    forward: Iterable[str] = (),
    allow_deep: bool = False,
) -> Model:
    """Add ``d`` as a variant of ``base_name``.

    Depth beyond one raises ``BaseIsVariant`` unless ``allow_deep`` is set, in
    which case the violation is left for the validator to report.
    """
    if d.name in model.blocks:
        raise DuplicateBlock(d.name)
    if base_name == d.name:
        raise UnresolvedReference(f"{d.name}: a block cannot be its own base")
    if base_name not in model.blocks:
        raise UnresolvedReference(f"{d.name}: unknown base block {base_name!r}")
    base = model.blocks[base_name]
    if base.base is not None and not allow_deep:
        raise BaseIsVariant(f"{d.name}: base {base_name!r} is itself a variant of {base.base!r}")
    if base.kind is BlockKind.SYSTEM:
        raise ModelError(f"{d.name}: system blocks cannot be specialised")
    d = replace(d, base=base_name, kind=base.kind)
    _check_members(d)
    _check_refs(model, d, forward)
    blocks = dict(model.blocks)
    blocks[d.name] = d
    m = replace(model, blocks=blocks)
    # surface part shadowing and attribute type changes eagerly
    effective_parts(m, d.name)
    effective_attributes(m, d.name)
    return m


def declare_system_function(model: Model, f: FunctionDef) -> Model:
    if model.system_function(f.name) is not None:
        raise DuplicateMember(f"system function {f.name!r} declared twice")
    return replace(model, system_functions=model.system_functions + (f,))


def set_root(model: Model, block: str, instance: str, span: SourceSpan = NO_SPAN) -> Model:
    if block not in model.blocks:
        raise UnresolvedReference(f"root: unknown block {block!r}")
    return replace(model, root=(block, instance), root_span=span)


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------


def intrinsic_functions(signal_type: TypeTag) -> tuple[FunctionDef, ...]:
    return (
        FunctionDef("setSignal", (Param("v", signal_type),), intrinsic=True),
        FunctionDef("getSignal", (), intrinsic=True),
    )


def _base_chain(model: Model, name: str) -> list[BlockDef]:
    chain, seen = [], set()
    cur: Optional[str] = name
    while cur is not None:
        if cur in seen:
            raise CyclicContainment(f"inheritance cycle through {cur!r}")
        seen.add(cur)
        b = model.block(cur)
        chain.append(b)
        cur = b.base
    return chain


def effective_attributes(model: Model, name: str) -> list[AttributeDef]:
    """Inherited attributes first (variant initials win), then added ones."""
    b = model.block(name)
    if b.base is None:
        attrs = list(b.attributes)
        if b.kind is BlockKind.COMPONENT and not any(a.name == SIGNAL for a in attrs):
            attrs.insert(0, AttributeDef(SIGNAL, TypeTag.BOOL, False))
        return attrs
    inherited = effective_attributes(model, b.base)
    names = {a.name for a in inherited}
    out = []
    for a in inherited:
        own = b.own_attribute(a.name)
        if own is None:
            out.append(a)
        elif own.type is not a.type:
            raise AttributeTypeChange(f"{name}.{a.name}: type {a.type} cannot change to {own.type}")
        else:
            out.append(replace(own, io=a.io))
    out.extend(a for a in b.attributes if a.name not in names)
    return out


def effective_attribute(model: Model, name: str, attr: str) -> Optional[AttributeDef]:
    for a in effective_attributes(model, name):
        if a.name == attr:
            return a
    return None


def signal_attribute(model: Model, name: str) -> Optional[AttributeDef]:
    if model.block(name).kind is not BlockKind.COMPONENT:
        return None
    return effective_attribute(model, name, SIGNAL)


def effective_parts(model: Model, name: str) -> list[PartDef]:
    b = model.block(name)
    if b.base is None:
        return list(b.parts)
    inherited = effective_parts(model, b.base)
    names = {p.name for p in inherited}
    for p in b.parts:
        if p.name in names:
            raise DuplicatePart(f"{name}: part {p.name!r} shadows an inherited part")
    return inherited + list(b.parts)


def part_block(model: Model, name: str, part: str) -> Optional[str]:
    for p in effective_parts(model, name):
        if p.name == part:
            return p.block
    return None


def effective_interface(model: Model, name: str) -> list[tuple[FunctionDef, LockStatus]]:
    """Functions visible on ``name`` tagged with their padlock/key status.

    Base blocks report every function as NEW. For variants the base order is
    kept and functions added by the variant follow in declaration order.
    """
    b = model.block(name)
    if b.base is None:
        funcs: list[FunctionDef] = []
        if b.kind is BlockKind.COMPONENT:
            sig = signal_attribute(model, name)
            funcs.extend(intrinsic_functions(sig.type if sig else TypeTag.BOOL))
        funcs.extend(b.functions)
        return [(f, LockStatus.NEW) for f in funcs]
    inherited = [f for f, _ in effective_interface(model, b.base)]
    names = {f.name for f in inherited}
    out = []
    for f in inherited:
        own = b.own_function(f.name)
        if own is None:
            out.append((f, LockStatus.INHERITED))
        elif _same_definition(own, f):
            out.append((own, LockStatus.INHERITED))
        else:
            out.append((own, LockStatus.OVERRIDDEN))
    out.extend((f, LockStatus.NEW) for f in b.functions if f.name not in names)
    return out


def _same_definition(a: FunctionDef, b: FunctionDef) -> bool:
    return a.params == b.params and a.body == b.body and a.intrinsic == b.intrinsic


def effective_functions(model: Model, name: str) -> list[FunctionDef]:
    return [f for f, _ in effective_interface(model, name)]


def effective_function(model: Model, name: str, fn: str) -> Optional[FunctionDef]:
    for f in effective_functions(model, name):
        if f.name == fn:
            return f
    return None


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObjectInstance:
    path: str
    block: str
    children: tuple["ObjectInstance", ...] = ()
    variables: dict = field(default_factory=dict)  # attribute name -> initial value

    def walk(self):
        """Pre-order traversal."""
        yield self
        for c in self.children:
            yield from c.walk()

    def find(self, path: str) -> Optional["ObjectInstance"]:
        for inst in self.walk():
            if inst.path == path:
                return inst
        return None

    def child(self, name: str) -> Optional["ObjectInstance"]:
        prefix = f"{self.path}.{name}"
        for c in self.children:
            if c.path == prefix:
                return c
        return None


def check_containment(model: Model) -> None:
    """Raise CyclicContainment if any block transitively contains itself."""
    state: dict[str, int] = {}

    def visit(name: str, stack: list[str]) -> None:
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            cycle = stack[stack.index(name):] + [name]
            raise CyclicContainment(" -> ".join(cycle))
        state[name] = 1
        stack.append(name)
        for p in effective_parts(model, name):
            visit(p.block, stack)
        stack.pop()
        state[name] = 2

    for name in model.blocks:
        visit(name, [])


def instantiate(model: Model, block: str, instance: str) -> ObjectInstance:
    model.block(block)
    check_containment(model)

    def build(name: str, path: str) -> ObjectInstance:
        children = tuple(build(p.block, f"{path}.{p.name}") for p in effective_parts(model, name))
        variables = {a.name: a.initial for a in effective_attributes(model, name)}
        return ObjectInstance(path, name, children, variables)

    return build(block, instance)


def instantiate_root(model: Model) -> ObjectInstance:
    if model.root is None:
        raise UnresolvedReference("model has no root declaration")
    return instantiate(model, *model.root)


def initial_value(attr: AttributeDef):
    return attr.initial if attr.initial is not None else default_value(attr.type)
