"""Time check + 1000-cycle simulation + ST generation on the desk-scale plant."""

import time

import _common  # noqa: F401

from modat.cli import model_stats
from modat.codegen import EmitOptions, generate_st
from modat.gen import desk_scale_model, desk_scale_scenario
from modat.parser import parse_model
from modat.scenario import parse_scenario
from modat.simulator import run
from modat.validator import errors_only, validate


def main() -> None:
    t0 = time.perf_counter()
    model = parse_model(desk_scale_model(), "desk.modat")
    errs = errors_only(validate(model))
    t1 = time.perf_counter()
    trace = run(model, parse_scenario(desk_scale_scenario(), model))
    t2 = time.perf_counter()
    flat = generate_st(model, check=False)
    oop = generate_st(model, EmitOptions(oop=True), check=False)
    t3 = time.perf_counter()
    st = model_stats(model)
    print(f"I/O {st['io']['total']}, instances {st['instances']}, errors {len(errs)}")
    print(f"check {t1 - t0:.3f} s, simulate {len(trace.records)} cycles {t2 - t1:.3f} s, "
          f"gen {t3 - t2:.3f} s ({len(flat.text)} + {len(oop.text)} chars)")
    print(f"total {t3 - t0:.3f} s")


if __name__ == "__main__":
    main()
