"""Variant bookkeeping and the base-block change (``rebase``).

``rebase`` promotes a variant to be the family base. The promoted block
takes the family name and the old base is demoted to ``<Name>_Classic``.
Other variants are re-parented onto the new base. Whatever a block used to inherit but
would no longer get from the new base is copied down into it, so the fully
flattened form of every pre-existing block stays the same.

Variants can only add or adapt members, never remove them. If the promoted
variant adds a part, an attribute or a new function, the demoted base would
inherit it, and no depth-one re-expression can keep the old base intact.
That case raises ``RebaseConflict`` naming the leaked members.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import model as m
from .formatter import function_hash


class NotAVariant(m.ModelError):
    pass


class NotAVariantOf(m.ModelError):
    pass


class RebaseConflict(m.ModelError):
    def __init__(self, variant: str, leaked: list[str]):
        super().__init__(f"promoting {variant} would push {', '.join(leaked)} into the demoted base "
                         "and its siblings; variants cannot remove inherited members")
        self.variant = variant
        self.leaked = leaked


class DepthViolation(m.ModelError):
    pass


# ---------------------------------------------------------------------------
# Lock status and diffs
# ---------------------------------------------------------------------------


def compute_lock_status(model: m.Model, variant: str, function: str) -> m.LockStatus:
    b = model.block(variant)
    if b.base is None:
        raise NotAVariant(f"{variant} is a base block")
    for f, status in m.effective_interface(model, variant):
        if f.name == function:
            return status
    raise m.UnknownFunction(f"{variant} has no function {function!r}")


@dataclass(frozen=True)
class InterfaceDiff:
    added: frozenset
    removed: frozenset
    changed: frozenset

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.changed)


def _fingerprint(f: m.FunctionDef) -> tuple:
    return (f.signature, f.intrinsic, function_hash(f))


def diff_interface(model: m.Model, a: str, b: str) -> InterfaceDiff:
    fa = {f.name: _fingerprint(f) for f in m.effective_functions(model, a)}
    fb = {f.name: _fingerprint(f) for f in m.effective_functions(model, b)}
    return InterfaceDiff(
        frozenset(fb.keys() - fa.keys()),
        frozenset(fa.keys() - fb.keys()),
        frozenset(n for n in fa.keys() & fb.keys() if fa[n] != fb[n]),
    )


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatBlock:
    """A block with every inherited member materialized; lock tags dropped."""

    kind: m.BlockKind
    parts: tuple  # (name, block)
    attributes: tuple  # (name, type, initial, io)
    functions: tuple  # (name, params, body, intrinsic)


def flatten(model: m.Model, name: str, rename: Optional[dict] = None) -> FlatBlock:
    """Flatten ``name``; part block names are mapped through ``rename``."""
    rename = rename or {}
    b = model.block(name)
    return FlatBlock(
        b.kind,
        tuple((p.name, rename.get(p.block, p.block)) for p in m.effective_parts(model, name)),
        tuple((a.name, a.type, a.initial, a.io) for a in m.effective_attributes(model, name)),
        tuple((f.name, f.params, f.body, f.intrinsic) for f in m.effective_functions(model, name)),
    )


# ---------------------------------------------------------------------------
# Rebase
# ---------------------------------------------------------------------------


def rebase_conflicts(model: m.Model, old_base: str, variant: str) -> list[str]:
    """Members the promoted variant adds on top of its base."""
    v = model.block(variant)
    base_attrs = {a.name for a in m.effective_attributes(model, old_base)}
    base_funcs = {f.name for f in m.effective_functions(model, old_base)}
    leaked = [f"part {p.name}" for p in v.parts]
    leaked += [f"attribute {a.name}" for a in v.attributes if a.name not in base_attrs]
    leaked += [f"function {f.name}" for f in v.functions if f.name not in base_funcs]
    return leaked


def _declared(model: m.Model, name: str) -> set[str]:
    names = set()
    for b in m._base_chain(model, name):
        names.update(a.name for a in b.attributes)
    return names


def rebase(model: m.Model, old_base: str, variant: str, classic_name: Optional[str] = None) -> m.Model:
    base = model.block(old_base)
    v = model.block(variant)
    if v.base != old_base:
        raise NotAVariantOf(f"{variant} is not a variant of {old_base}")
    if base.base is not None:
        raise DepthViolation(f"{old_base} is itself a variant")
    leaked = rebase_conflicts(model, old_base, variant)
    if leaked:
        raise RebaseConflict(variant, leaked)
    classic = classic_name or f"{old_base}_Classic"
    if classic in model.blocks and classic not in (old_base, variant):
        raise m.DuplicateBlock(f"block {classic} already exists")
    if not classic or classic in (old_base, variant):
        raise m.DuplicateBlock(f"demoted base name {classic!r} collides with the family")

    rename = {old_base: classic, variant: old_base}

    # New base: the promoted variant, fully materialized.
    declared = _declared(model, variant)
    new_attrs = tuple(a for a in m.effective_attributes(model, variant) if a.name in declared)
    new_funcs = tuple(replace(f, override=False) for f in m.effective_functions(model, variant)
                      if not f.intrinsic)
    new_base = m.BlockDef(old_base, base.kind, None,
                          tuple(replace(p, block=rename.get(p.block, p.block)) for p in m.effective_parts(model, variant)),
                          new_attrs, new_funcs, base.span)
    nb_attrs = {a.name: a for a in new_attrs}
    nb_funcs = {f.name: f for f in new_funcs}

    def reexpress(name: str, new_name: str) -> m.BlockDef:
        """Re-express a former family member as a variant of the new base."""
        old = model.block(name)
        own_parts = old.parts if old.base is not None else ()
        inherited_part_names = {p.name for p in m.effective_parts(model, variant)}
        own_parts = tuple(replace(p, block=rename.get(p.block, p.block)) for p in own_parts
                          if p.name not in inherited_part_names)
        attrs = []
        for a in m.effective_attributes(model, name):
            target = nb_attrs.get(a.name)
            if target is None:
                if a.name in _declared(model, name):
                    attrs.append(a)
                continue
            own = old.own_attribute(a.name) if old.base is not None else None
            if own is not None or target.initial != a.initial:
                attrs.append(replace(a, io=None))
        funcs = []
        for f in m.effective_functions(model, name):
            if f.intrinsic:
                continue
            target = nb_funcs.get(f.name)
            own = old.own_function(f.name) if old.base is not None else None
            if target is None:
                funcs.append(replace(f, override=False))
            elif own is not None or not m._same_definition(f, target):
                funcs.append(replace(f, override=True))
        return m.BlockDef(new_name, old.kind, old_base, own_parts, tuple(attrs), tuple(funcs),
                          old.span, old.base_span)

    blocks: dict[str, m.BlockDef] = {}
    for name, b in model.blocks.items():
        if name == old_base:
            blocks[old_base] = new_base
            blocks[classic] = reexpress(old_base, classic)
        elif name == variant:
            continue
        elif b.base == old_base:
            blocks[name] = reexpress(name, name)
        else:
            blocks[name] = replace(b, parts=tuple(replace(p, block=rename.get(p.block, p.block))
                                                  for p in b.parts))
    root = model.root
    if root is not None:
        root = (rename.get(root[0], root[0]), root[1])
    out = m.Model(blocks, model.system_functions, root, model.root_span)
    for b in out.blocks.values():
        if b.base is not None and out.block(b.base).base is not None:
            raise DepthViolation(f"{b.name} would inherit from variant {b.base}")
    return out


def rebase_renames(old_base: str, variant: str, classic_name: Optional[str] = None) -> dict:
    """Pre-rebase block name -> post-rebase block name."""
    return {old_base: classic_name or f"{old_base}_Classic", variant: old_base}
