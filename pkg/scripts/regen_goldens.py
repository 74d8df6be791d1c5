"""Rewrite the frozen ST goldens (flat and --oop) for every corpus model.

Run only after an intentional change to the emitter, then review the diff.
"""

import argparse

from _common import corpus_models

from modat.codegen import EmitOptions, generate_st
from modat.parser import parse_model


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--check", action="store_true", help="only report drift; write nothing")
    args = ap.parse_args()
    drift = 0
    for mf, _ in corpus_models():
        model = parse_model(mf.read_bytes(), mf.name)
        gdir = mf.parent / "golden"
        gdir.mkdir(exist_ok=True)
        for oop, suffix in ((False, "flat"), (True, "oop")):
            text = generate_st(model, EmitOptions(oop=oop)).text
            path = gdir / f"{mf.stem}.{suffix}.st"
            old = path.read_text(encoding="utf-8") if path.exists() else None
            if old != text:
                drift += 1
                print(f"{'drift' if args.check else 'wrote'} {path.relative_to(mf.parents[1])}")
                if not args.check:
                    path.write_text(text, encoding="utf-8")
    print(f"{drift} golden file(s) {'out of date' if args.check else 'updated'}")
    raise SystemExit(1 if args.check and drift else 0)


if __name__ == "__main__":
    main()
