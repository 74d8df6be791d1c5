import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def corpus_models():
    out = []
    for d in sorted(p for p in CORPUS.iterdir() if p.is_dir() and p.name != "mutants"):
        for mf in sorted(d.glob("*.modat")):
            out.append((mf, sorted(d.glob("*.scn"))))
    return out


def corpus_scenarios():
    return [(mf, sf) for mf, scns in corpus_models() for sf in scns]


def mutant_files():
    return [CORPUS / "bad_depth.modat", *sorted((CORPUS / "mutants").glob("*.modat"))]


def expected_code(path: Path) -> str:
    first = path.read_text(encoding="utf-8").splitlines()[0]
    return first.rsplit("Expected diagnostic: ", 1)[1].rstrip(".")


@pytest.fixture(scope="session")
def load():
    from modat.parser import parse_model

    cache = {}

    def _load(path):
        path = Path(path)
        if path not in cache:
            cache[path] = parse_model(path.read_bytes(), str(path))
        return cache[path]

    return _load


@pytest.fixture(scope="session")
def stamp(load):
    return load(CORPUS / "stamp" / "stamp.modat")


@pytest.fixture(scope="session")
def family(load):
    return load(CORPUS / "family" / "family.modat")


ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
