import random
import re

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import CORPUS, corpus_models
from differential import differential
from modat import model as m
from modat.behavior import TypeTag
from modat.codegen import EmitOptions, InvalidModel, Mangler, generate_st, mangle_name
from modat.codegen.emit import st_expr
from modat.codegen.mangle import IEC_KEYWORDS
from modat.codegen.steval import STSyntaxError, Runtime, parse_st
from modat.gen import GenConfig, random_model, random_scenario
from modat.parser import parse_model
from modat.scenario import parse_scenario
from test_simulator import typed_expr

SMALL = GenConfig(max_functions=2, max_nodes=3, layers=2)


# ---------------------------------------------------------------------------
# Goldens
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("oop", [False, True], ids=["flat", "oop"])
@pytest.mark.parametrize("path", [mf for mf, _ in corpus_models()], ids=lambda p: p.stem)
def test_goldens_byte_identical(path, oop, load):
    golden = path.parent / "golden" / f"{path.stem}.{'oop' if oop else 'flat'}.st"
    assert generate_st(load(path), EmitOptions(oop=oop)).text == golden.read_text(encoding="utf-8")


def test_generation_is_deterministic(stamp):
    assert generate_st(stamp).text == generate_st(parse_model((CORPUS / "stamp" / "stamp.modat").read_text())).text


# ---------------------------------------------------------------------------
# Structure of the output
# ---------------------------------------------------------------------------


def test_stamp_flat_structure(stamp):
    unit = generate_st(stamp)
    fbs = re.findall(r"^FUNCTION_BLOCK (\w+)", unit.text, re.M)
    assert fbs == ["FB_BinaryActuator", "FB_BinarySensor", "FB_AnalogSensor", "FB_Cylinder",
                   "FB_StampCylinder", "FB_TransportCylinder", "FB_Stamp"]
    assert "EXTENDS" not in unit.text and "METHOD" not in unit.text
    assert re.search(r"^PROGRAM Main", unit.text, re.M)
    sc = unit.blocks["StampCylinder"]
    assert "extend_state : INT" in sc and "extend_done : BOOL" in sc
    assert re.search(r"VAR_INPUT\n(    .*\n)*    Signal : INT", unit.blocks["AnalogSensor"])
    assert re.search(r"VAR_OUTPUT\s+Signal : BOOL", unit.blocks["BinaryActuator"])


def test_stamp_oop_structure(stamp):
    text = generate_st(stamp, EmitOptions(oop=True)).text
    assert "FUNCTION_BLOCK FB_StampCylinder EXTENDS FB_Cylinder" in text
    assert re.search(r"^METHOD extend_step$", text, re.M)


def test_symbol_table(stamp):
    sym = generate_st(stamp).symbols
    assert "stamp.stampCylinder:extend" in sym["entries"]
    assert sym["vars"]["stamp.stampCylinder.pressureSensor.Signal"].endswith("Signal")


def test_invalid_model_is_refused(load):
    with pytest.raises(InvalidModel):
        generate_st(load(CORPUS / "bad_depth.modat"))


def test_rootless_single_component_emits_one_fb():
    sig = m.AttributeDef("Signal", TypeTag.BOOL, False, m.IO.INPUT)
    model = m.define_block(m.Model(), m.BlockDef("Sensor", m.BlockKind.COMPONENT, attributes=(sig,)))
    unit = generate_st(model)
    assert re.findall(r"^FUNCTION_BLOCK (\w+)", unit.text, re.M) == ["FB_Sensor"]
    assert "PROGRAM" not in unit.text and unit.main == ""
    parse_st(unit.text)


# ---------------------------------------------------------------------------
# Names
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name, want", [
    ("stamp.stampCylinder", "stamp_stampCylinder"),
    ("a__b", "a_b"),
    ("end_", "end"),
    ("if", "if_v"),
    ("9lives", "n9lives"),
])
def test_mangle_examples(name, want):
    assert mangle_name(name) == want


def test_mangler_collisions():
    mg = Mangler()
    assert mg.request("a.b_c", "a.b_c") == "a_b_c"
    assert mg.request("a_b.c", "a_b.c") == "a_b_c_1"
    assert mg.request("A.B_C", "A.B_C") == "A_B_C_2"  # case-insensitive
    assert mg.request("a.b_c", "ignored") == "a_b_c"
    assert Mangler(reserved=["Main"]).request("x", "main") == "main_1"


@given(st.lists(st.from_regex(r"[A-Za-z_][A-Za-z0-9_.]{0,8}", fullmatch=True), max_size=30))
def test_mangler_is_injective(names):
    mg = Mangler()
    out = [mg.request(n, n) for n in dict.fromkeys(names)]
    assert len({o.lower() for o in out}) == len(out)
    for o in out:
        assert re.fullmatch(r"_?[A-Za-z0-9]+(_[A-Za-z0-9]+)*", o)
        assert o.upper() not in IEC_KEYWORDS and not o[0].isdigit()


@pytest.mark.parametrize("oop", [False, True], ids=["flat", "oop"])
def test_identifiers_corpus(oop, load):
    for path, _ in corpus_models():
        text = generate_st(load(path), EmitOptions(oop=oop)).text
        assert oracles.identifier_problems(text, IEC_KEYWORDS) == [], path


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.booleans())
def test_identifiers_generated(seed, oop):
    text = generate_st(parse_model(random_model(seed, SMALL)), EmitOptions(oop=oop)).text
    assert oracles.identifier_problems(text, IEC_KEYWORDS) == []


# ---------------------------------------------------------------------------
# Differential: simulator vs generated code
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("path, scns", corpus_models(), ids=lambda p: getattr(p, "stem", ""))
def test_differential_corpus(path, scns, load):
    model = load(path)
    scenarios = [parse_scenario(s.read_text(), model, str(s)) for s in scns]
    assert differential(model, scenarios) == []


@pytest.mark.parametrize("seed", range(6))
def test_differential_generated(seed):
    model = parse_model(random_model(seed, SMALL))
    rng = random.Random(seed)
    scenarios = [parse_scenario(random_scenario(model, rng, max_cycles=25), model) for _ in range(2)]
    assert differential(model, scenarios) == []


_REFS = {"i": "INT", "j": "INT", "r": "REAL", "t": "TIME", "b": "BOOL"}
_ST_TYPES = {"INT": "INT", "REAL": "LREAL", "TIME": "TIME", "BOOL": "BOOL"}
_PROBE = parse_st("PROGRAM MAIN\nVAR\n" + "".join(f"    {k} : {_ST_TYPES[t]};\n" for k, t in _REFS.items())
                  + "END_VAR\nEND_PROGRAM\n")


@given(st.sampled_from(["BOOL", "INT", "REAL", "TIME"]).flatmap(typed_expr),
       st.integers(-32768, 32767), st.integers(-32768, 32767), st.floats(-1e3, 1e3),
       st.integers(-2**31, 2**31 - 1), st.booleans())
def test_st_expressions_match_oracle(e, i, j, r, t, b):
    env = {"i": i, "j": j, "r": r, "t": t, "b": b}
    rt = Runtime(_PROBE)
    for k, v in env.items():
        rt.write(k, v)
    got = rt.eval(st_expr(e, lambda ref: ref.text))
    want, _ = oracles.eval_expr(e, env, _REFS)
    assert got == want or abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_st_parser_rejects_garbage():
    with pytest.raises(STSyntaxError):
        parse_st("FUNCTION_BLOCK X\nVAR x : INT END_VAR\nx := ;\nEND_FUNCTION_BLOCK\n")
