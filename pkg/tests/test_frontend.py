import random

import pytest
from hypothesis import given, strategies as st

from conftest import CORPUS, corpus_models, mutant_files
from modat.behavior import Binary, Literal, Ref, TypeTag, Unary
from modat.diagnostics import DiagnosticError
from modat.formatter import expr_text, format_model
from modat.gen import random_model
from modat.lexer import LexError, tokenize
from modat.parser import ParseError, TokenStream, parse_expr, parse_model, parse_model_diagnostics


def codes(text):
    model, diags = parse_model_diagnostics(text, "t.modat")
    return model, [d.code for d in diags]


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------


def test_time_literals_in_milliseconds():
    toks = tokenize("T#50ms T#2s")
    assert [t.value for t in toks[:2]] == [50, 2000]


@pytest.mark.parametrize("src", ["T#5", "T#msx", "1.5e", "9abc", "a $ b"])
def test_lex_errors_have_positions(src):
    with pytest.raises(LexError) as exc:
        tokenize(src)
    assert exc.value.line == 1 and exc.value.col >= 1


def test_keywords_are_not_identifiers():
    kinds = [t.kind for t in tokenize("block blocks on one")][:4]
    assert kinds == ["KW", "IDENT", "KW", "IDENT"]


def test_comments_and_crlf():
    model, errs = codes(b"// hi\r\nblock A kind component input BOOL {}\r\nroot a : A\r\n")
    assert errs == [] and model.root == ("A", "a")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _expr(src):
    return parse_expr(TokenStream(tokenize(src), "e"))


def test_precedence_and_associativity():
    e = _expr("a + b * c == d or not e and f")
    assert isinstance(e, Binary) and e.op == "or"
    assert e.left.op == "==" and e.left.left.op == "+" and e.left.left.right.op == "*"
    assert e.right.op == "and" and isinstance(e.right.left, Unary)
    assert _expr("a - b - c").left.op == "-"


def test_diamond_is_not_equal():
    assert _expr("a <> b").op == "!="


def test_stamp_structure(stamp):
    sc = stamp.blocks["StampCylinder"]
    assert sc.base == "Cylinder"
    assert [f.name for f in sc.functions] == ["extend", "press"]
    assert sc.functions[0].override and not sc.functions[1].override
    assert stamp.root == ("Stamp", "stamp")
    assert [f.name for f in stamp.system_functions] == ["delay"]


@pytest.mark.parametrize("src, code", [
    ("block A kind composite {}", "E103"),
    ("block A kind composite {}\nblock A kind composite {}\nroot a : A", "E202"),
    ("variant V of Nope {}\nblock A kind composite {}\nroot a : A", "E200"),
    ("block A kind composite { part p : Missing }\nroot a : A", "E200"),
    ("block A kind composite { part b : B }\nblock B kind composite { part a : A }\nroot a : A", "E207"),
    ("block A kind composite { function f() }\nvariant V of A { function f() }\nroot a : A", "E203"),
    ("block A kind composite {}\nvariant V of A { override function g() }\nroot a : A", "E204"),
    ("block A kind composite { attr x : INT = 1 }\nvariant V of A { attr x : BOOL = TRUE }\nroot a : A", "E205"),
    ("block A kind composite { part p : A2 }\nblock A2 kind composite {}\nvariant V of A { part p : A2 }\n"
     "root a : A", "E206"),
    ("block A kind composite {\n  function f() {\n    lanes self\n    node n1 call\n  }\n}\nroot a : A", "E101"),
    ("block A kind composite { attr x : INT = T#5 }", "E102"),
])
def test_front_end_error_codes(src, code):
    model, errs = codes(src)
    assert model is None
    assert code in errs


def test_empty_input():
    model, diags = parse_model_diagnostics("", "e.modat")
    (d,) = diags
    assert model is None and d.code == "E100" and d.message == "expected top-level declaration"
    assert (d.span.start_line, d.span.start_col) == (1, 1)


def test_self_based_variant():
    model, errs = codes("variant V of V { }\nroot v : V")
    assert model is None and errs == ["E201"]


def test_parse_model_raises_with_span():
    with pytest.raises(DiagnosticError) as exc:
        parse_model("block A kind composite {\n  attr : INT\n}\nroot a : A", "x.modat")
    d = exc.value.diagnostics[0]
    assert d.span.file == "x.modat" and d.span.start_line == 2


def test_depth_two_parses_for_the_validator():
    model, errs = codes((CORPUS / "bad_depth.modat").read_text())
    assert errs == [] and model.blocks["HeavyStampCylinder"].base == "StampCylinder"


def test_non_utf8_is_a_diagnostic():
    model, errs = codes(b"\xff\xfe block")
    assert model is None and errs


# ---------------------------------------------------------------------------
# Formatter round trip
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("path", [mf for mf, _ in corpus_models()] + mutant_files(),
                         ids=lambda p: p.stem)
def test_round_trip_fixtures(path):
    m1 = parse_model(path.read_bytes())
    text = format_model(m1)
    m2 = parse_model(text)
    assert m1 == m2
    assert format_model(m2) == text  # idempotent


@given(st.integers(0, 10**6))
def test_round_trip_generated(seed):
    m1 = parse_model(random_model(seed))
    assert parse_model(format_model(m1)) == m1


_names = st.sampled_from(["a", "b", "self.x", "p.Signal"])
_lits = st.one_of(
    st.integers(-32768, 32767).map(lambda v: Literal(TypeTag.INT, v)),
    st.booleans().map(lambda v: Literal(TypeTag.BOOL, v)),
    st.integers(0, 10**6).map(lambda v: Literal(TypeTag.TIME, v)),
    st.floats(-1e6, 1e6, allow_nan=False).map(lambda v: Literal(TypeTag.REAL, v)),
)
_exprs = st.recursive(
    st.one_of(_lits, _names.map(lambda n: Ref(tuple(n.split("."))))),
    lambda inner: st.one_of(
        st.builds(Unary, st.sampled_from(["-", "not"]), inner),
        st.builds(Binary, st.sampled_from(["or", "and", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*"]),
                  inner, inner),
    ),
    max_leaves=12,
)


@given(_exprs)
def test_expression_text_round_trip(e):
    """Printing inserts exactly the parentheses needed to keep the tree."""
    assert _expr(expr_text(e)) == e


# ---------------------------------------------------------------------------
# Robustness
# ---------------------------------------------------------------------------


def _mutate(rng, text):
    ops = rng.randrange(1, 6)
    s = list(text)
    for _ in range(ops):
        k = rng.randrange(4)
        i = rng.randrange(len(s) + 1)
        if k == 0 and s:
            del s[min(i, len(s) - 1)]
        elif k == 1:
            s.insert(i, rng.choice("{}()=:;.,-><#Tx9 \né\x00"))
        elif k == 2 and s:
            j = rng.randrange(len(s))
            s[i % len(s)], s[j] = s[j], s[i % len(s)]
        else:
            a = rng.randrange(len(s) + 1)
            s[a:a] = s[i:i + rng.randrange(20)]
    return "".join(s)


def fuzz_inputs(n, seed=0):
    rng = random.Random(seed)
    seeds = [p.read_text() for p, _ in corpus_models()]
    for _ in range(n):
        r = rng.random()
        if r < 0.1:
            yield bytes(rng.randrange(256) for _ in range(rng.randrange(64)))
        elif r < 0.2:
            yield "".join(rng.choice("block variant of {}()->:= node start end when T#1ms 42 \n")
                          for _ in range(rng.randrange(80)))
        else:
            yield _mutate(rng, rng.choice(seeds))


def test_parser_never_crashes_small_fuzz():
    for text in fuzz_inputs(500, seed=1):
        model, diags = parse_model_diagnostics(text, "fuzz")
        assert (model is None) == bool([d for d in diags if d.is_error])
        src = text.decode("utf-8", "replace") if isinstance(text, bytes) else text
        lines = src.replace("\r\n", "\n").split("\n")
        for d in diags:  # spans stay inside the text
            assert 1 <= d.span.start_line <= len(lines)
            assert 1 <= d.span.start_col <= len(lines[d.span.start_line - 1]) + 1


@given(st.text(max_size=200))
def test_parser_total_on_text(text):
    parse_model_diagnostics(text, "h")


def test_parse_error_class_carries_diagnostic():
    with pytest.raises(ParseError) as exc:
        _expr(")")
    assert exc.value.diagnostic.code.startswith("E1")
