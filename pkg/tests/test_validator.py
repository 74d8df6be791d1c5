import pytest
from hypothesis import given, strategies as st

from conftest import CORPUS, corpus_models, expected_code, mutant_files
from modat.gen import random_model
from modat.parser import parse_model
from modat.validator import UnknownRule, check_rule, errors_only, validate

HEADER = """
system function delay(duration: TIME)
block Out kind component output BOOL {}
block In kind component input BOOL {}
block Num kind component input INT {}
block P kind composite { attr y : INT = 0 }
"""


def diag_codes(body, root="H"):
    model = parse_model(HEADER + body + f"\nroot r : {root}\n")
    return sorted({d.code for d in validate(model)})


def host(fn_body, extra=""):
    return f"""
block H kind composite {{
    part o : Out
    part i : In
    part n : Num
    part p : P
    attr x : INT = 0
    attr flag : BOOL = FALSE
    {extra}
    function f(k: INT) {{
{fn_body}
    }}
}}
"""


# ---------------------------------------------------------------------------
# Corpus and mutants
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("path", [mf for mf, _ in corpus_models()], ids=lambda p: p.parent.name)
def test_corpus_is_clean(path, load):
    assert validate(load(path)) == []


@pytest.mark.parametrize("path", mutant_files(), ids=lambda p: p.stem)
def test_mutant_yields_exactly_its_code(path, load):
    codes = {d.code for d in errors_only(validate(load(path)))}
    assert codes == {expected_code(path)}


def test_depth_two_points_at_the_variant(load):
    (d,) = validate(load(CORPUS / "bad_depth.modat"))
    assert d.code == "E001" and "HeavyStampCylinder" in d.message and d.span.start_line > 1


# ---------------------------------------------------------------------------
# Individual rules
# ---------------------------------------------------------------------------

OK = """        lanes self, o
        node a : call o.setSignal(TRUE)
        start -> a
        a -> end on completion"""


def test_baseline_host_is_clean():
    assert diag_codes(host(OK)) == []


@pytest.mark.parametrize("body, code", [
    # lanes
    ("""        lanes self
        node a : call o.setSignal(TRUE)
        start -> a
        a -> end on completion""", "E003"),
    ("""        lanes self, ghost
        node a : set self.x := 1
        start -> a
        a -> end on completion""", "E003"),
    # scope
    ("""        lanes self, p
        node a : set p.y := 1
        start -> a
        a -> end on completion""", "E004"),
    # conditions
    ("""        lanes self
        node a : set self.x := 1
        start -> a
        a -> end when self.x + 1 > 2""", "E006"),
    ("""        lanes self
        node a : set self.x := 1
        start -> a
        a -> end when self.flag""", None),
    ("""        lanes self
        node a : set self.x := 1
        start -> a
        a -> end when self.x >= k""", None),
    ("""        lanes self, n
        node a : set self.x := 1
        start -> a
        a -> end when n.Signal > self.x""", None),
    # shape
    ("""        lanes self
        node a : set self.x := 1
        start -> a
        start -> a
        a -> end on completion""", "E007"),
    ("""        lanes self
        node a : set self.x := 1
        start -> a when self.x == 1
        a -> end on completion""", "E007"),
    ("""        lanes self
        node a : set self.x := 1
        start -> b
        a -> end on completion""", "E007"),
    ("""        lanes self
        node a : call self.f(1)
        start -> a
        a -> end on completion""", "E007"),
    # typing
    ("""        lanes self
        node a : set self.x := TRUE
        start -> a
        a -> end on completion""", "E008"),
    ("""        lanes self
        node a : set self.x := 40000
        start -> a
        a -> end on completion""", "E008"),
    ("""        lanes system
        node a : call system.delay(5)
        start -> a
        a -> end on completion""", "E008"),
    ("""        lanes self
        node a : set self.x := 1
        start -> a
        a -> end when self.x == TRUE""", "E008"),
    # warnings
    ("""        lanes self
        node a : set self.x := 1
        node b : set self.x := 2
        start -> a
        a -> end on completion""", "W001"),
    ("""        lanes self
        node a : set self.x := 1
        node b : set self.x := 2
        start -> a
        a -> b on completion""", "W002"),
])
def test_rule(body, code):
    codes = diag_codes(host(body))
    if code is None:
        assert codes == []
    else:
        assert code in codes, codes


def test_component_leaf_rule():
    assert "E002" in diag_codes("block C kind component input BOOL { attr extra : INT = 0 "
                                "function g() }\nblock H kind composite { part c : C }")


def test_mutual_self_calls_are_recursion():
    body = """
block H kind composite {
    attr x : INT = 0
    function f() {
        lanes self
        node a : call self.g()
        start -> a
        a -> end on completion
    }
    function g() {
        lanes self
        node a : call self.f()
        start -> a
        a -> end on completion
    }
}"""
    assert "E007" in diag_codes(body)


def test_inherited_body_checked_in_variant_context():
    body = """
block H kind composite {
    part o : Out
    function f() {
        lanes self
        node a : call self.g()
        start -> a
        a -> end on completion
    }
    function g() {
        lanes o
        node a : call o.setSignal(TRUE)
        start -> a
        a -> end on completion
    }
}
variant V of H {
    override function g(v: INT) {
        lanes self
        node a : set self.Missing := 1
        start -> a
        a -> end on completion
    }
}"""
    codes = diag_codes(body)
    assert "E008" in codes  # f's call self.g() no longer matches g(v: INT)


def test_check_rule_selects_one_rule(load):
    model = load(CORPUS / "mutants" / "call_arity.modat")
    assert [d.code for d in check_rule(model, "E008")] == ["E008"]
    assert check_rule(model, "E001") == []
    with pytest.raises(UnknownRule):
        check_rule(model, "E999")


def test_diagnostics_are_sorted_and_rendered(load):
    model = load(CORPUS / "mutants" / "no_start.modat")
    diags = validate(model)
    assert diags == sorted(diags, key=lambda d: d.sort_key())
    line = diags[0].render()
    assert line.startswith(str(CORPUS / "mutants" / "no_start.modat")) and diags[0].code in line


@given(st.integers(0, 10**6))
def test_generated_models_validate_clean(seed):
    assert errors_only(validate(parse_model(random_model(seed)))) == []
