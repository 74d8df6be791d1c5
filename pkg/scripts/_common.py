"""Shared paths for the helper scripts."""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
sys.path.insert(0, str(ROOT / "src"))


def corpus_models():
    """(model path, [scenario paths]) for every corpus directory with a model."""
    out = []
    for d in sorted(p for p in CORPUS.iterdir() if p.is_dir() and p.name != "mutants"):
        for mf in sorted(d.glob("*.modat")):
            out.append((mf, sorted(d.glob("*.scn"))))
    return out
