import random

from hypothesis import given, strategies as st

from modat.cli import model_stats
from modat.gen import desk_scale_model, desk_scale_scenario, random_model, random_scenario
from modat.parser import parse_model
from modat.scenario import parse_scenario
from modat.validator import validate


@given(st.integers(0, 10**6))
def test_random_models_are_deterministic(seed):
    assert random_model(seed) == random_model(seed)


@given(st.integers(0, 10**6), st.booleans())
def test_random_scenarios_parse(seed, adapt):
    model = parse_model(random_model(seed, adapt_only_variants=adapt))
    text = random_scenario(model, random.Random(seed))
    assert parse_scenario(text, model).invocation[0].startswith("top")


def test_adapt_only_variants_add_nothing():
    model = parse_model(random_model(7, adapt_only_variants=True))
    for b in model.blocks.values():
        if b.base is not None:
            assert b.parts == ()
            assert all(f.override for f in b.functions)


def test_desk_scale_size():
    model = parse_model(desk_scale_model())
    assert validate(model) == []
    st_ = model_stats(model)
    assert st_["io"]["total"] == 100
    assert st_["instances_per_definition"]["TransportPortal"] == 5
    assert st_["instances_per_definition"]["ProcessingUnit"] == 4
    sc = parse_scenario(desk_scale_scenario(), model)
    assert sc.max_cycles == 1000
