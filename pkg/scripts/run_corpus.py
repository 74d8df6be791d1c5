"""Check every corpus model and run all its scenarios; one line per scenario.

With ``--st`` each scenario is also executed on the generated Structured Text
(flat and OOP) and the verdicts are compared with the simulator's.
"""

import argparse
import time

from _common import corpus_models

from modat.codegen import EmitOptions, generate_st
from modat.codegen.steval import execute_st
from modat.parser import parse_model
from modat.scenario import parse_scenario
from modat.simulator import run
from modat.validator import errors_only, validate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--st", action="store_true", help="also run the scenarios on the generated ST")
    args = ap.parse_args()
    t0 = time.perf_counter()
    failed = 0
    for mf, scns in corpus_models():
        model = parse_model(mf.read_bytes(), str(mf))
        errs = errors_only(validate(model))
        print(f"{mf.parent.name}/{mf.name}: {len(errs)} error(s)")
        units = [generate_st(model, EmitOptions(oop=oop)) for oop in (False, True)] if args.st else []
        for sf in scns:
            sc = parse_scenario(sf.read_bytes(), model, str(sf))
            trace = run(model, sc)
            failed += not trace.passed
            extra = ""
            for unit in units:
                st_trace = execute_st(unit, sc)
                same = st_trace.summary() == trace.summary() and len(st_trace.records) == len(trace.records)
                failed += not same
                extra += f"  {unit.options.mode}:{'same' if same else 'DIFFERS'}"
            print(f"  {sf.name:<22} {trace.summary():<24} {len(trace.records)} cycles{extra}")
    print(f"{failed} failing scenario(s), {time.perf_counter() - t0:.2f} s")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
