import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import corpus_models
from modat import model as m
from modat.behavior import TypeTag
from modat.gen import random_model
from modat.parser import parse_model
from modat.variants import compute_lock_status, flatten


def test_stamp_instance_tree(stamp):
    tree = m.instantiate_root(stamp)
    paths = [i.path for i in tree.walk()]
    assert len(paths) == 13
    assert paths[:4] == ["stamp", "stamp.stampCylinder", "stamp.stampCylinder.valveExtend",
                         "stamp.stampCylinder.valveRetract"]
    assert tree.find("stamp.transportCylinder.endPosBack").block == "BinarySensor"
    assert tree.child("warningLamp").variables == {"Signal": False}
    assert tree.variables == {"pressure": 40, "cycles": 0}


def test_interface_keeps_base_order(stamp):
    iface = m.effective_interface(stamp, "StampCylinder")
    assert [(f.name, s.value) for f, s in iface] == [
        ("extend", "overridden"), ("retract", "inherited"), ("selftest", "inherited"), ("press", "new")]


def test_component_interface_has_intrinsics(stamp):
    fs = m.effective_functions(stamp, "AnalogSensor")
    assert [f.name for f in fs] == ["setSignal", "getSignal"]
    assert fs[0].params[0].type is TypeTag.INT and all(f.intrinsic for f in fs)


def test_variant_keeps_base_kind_and_io(family):
    v = family.blocks["Block_X_Variant1"]
    assert v.kind is m.BlockKind.COMPOSITE
    assert m.effective_attribute(family, "Block_X_Variant1", "limit").initial == 5
    assert m.effective_attribute(family, "Block_X_Variant1", "blinks").initial == 0


# ---------------------------------------------------------------------------
# Construction API
# ---------------------------------------------------------------------------


def _base(name="A", **kw):
    return m.BlockDef(name, m.BlockKind.COMPOSITE, **kw)


def test_define_rejects_duplicates_and_dangling_parts():
    mod = m.define_block(m.Model(), _base())
    with pytest.raises(m.DuplicateBlock):
        m.define_block(mod, _base())
    with pytest.raises(m.UnresolvedReference):
        m.define_block(mod, _base("B", parts=(m.PartDef("p", "Nope"),)))
    with pytest.raises(m.DuplicatePart):
        m.define_block(mod, _base("C", parts=(m.PartDef("p", "A"), m.PartDef("p", "A"))))


def test_depth_two_is_refused_by_default():
    mod = m.define_variant(m.define_block(m.Model(), _base()), "A", _base("V"))
    with pytest.raises(m.BaseIsVariant):
        m.define_variant(mod, "V", _base("W"))
    deep = m.define_variant(mod, "V", _base("W"), allow_deep=True)
    assert oracles.depth(deep, "W") == 2


def test_variant_cannot_retype_attribute():
    a = m.AttributeDef("x", TypeTag.INT, 1)
    mod = m.define_block(m.Model(), _base(attributes=(a,)))
    with pytest.raises(m.AttributeTypeChange):
        m.define_variant(mod, "A", _base("V", attributes=(m.AttributeDef("x", TypeTag.BOOL, True),)))


def test_cyclic_containment_detected():
    mod = m.define_block(m.Model(), _base("A", parts=(m.PartDef("b", "B"),)), forward=["B"])
    mod = m.define_block(mod, _base("B", parts=(m.PartDef("a", "A"),)))
    with pytest.raises(m.CyclicContainment):
        m.instantiate(mod, "A", "a")


def test_root_required_for_instantiation():
    with pytest.raises(m.UnresolvedReference):
        m.instantiate_root(m.define_block(m.Model(), _base()))


def test_models_are_immutable_values():
    mod = m.define_block(m.Model(), _base())
    mod2 = m.define_block(mod, _base("B"))
    assert list(mod.blocks) == ["A"] and list(mod2.blocks) == ["A", "B"]


# ---------------------------------------------------------------------------
# Oracle agreement
# ---------------------------------------------------------------------------


def _check_against_oracles(model):
    for name, b in model.blocks.items():
        assert tuple(flatten(model, name).__dict__.values()) == oracles.flat_signature(model, name)
        if b.base is not None:
            for f in m.effective_functions(model, name):
                got = compute_lock_status(model, name, f.name).value
                assert got == oracles.lock_status(model, name, f.name).lower(), (name, f.name)
    if model.root is not None:
        n = sum(1 for _ in m.instantiate_root(model).walk())
        assert n == oracles.count_instances(model, model.root[0])


@pytest.mark.parametrize("path", [mf for mf, _ in corpus_models()], ids=lambda p: p.parent.name)
def test_corpus_matches_oracles(path, load):
    _check_against_oracles(load(path))


@given(st.integers(0, 10**6))
def test_generated_models_match_oracles(seed):
    _check_against_oracles(parse_model(random_model(seed)))
