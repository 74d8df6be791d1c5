"""Compare simulator traces with traces of the generated Structured Text."""

from __future__ import annotations

import math

from modat.codegen import EmitOptions, generate_st
from modat.codegen.steval import execute_st
from modat.simulator import Program, run

REAL_TOL = 1e-9


def _same_value(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return math.isclose(a, b, rel_tol=REAL_TOL, abs_tol=REAL_TOL)
    return type(a) is type(b) and a == b


def trace_mismatches(ref, other, label="st") -> list[str]:
    """Cycle-by-cycle differences in snapshots, detached sets and verdicts."""
    out = []
    if len(ref.records) != len(other.records):
        out.append(f"{label}: {len(other.records)} cycles, simulator ran {len(ref.records)}")
    for a, b in zip(ref.records, other.records):
        if a.detached != b.detached:
            out.append(f"{label} cycle {a.cycle}: detached {b.detached} != {a.detached}")
        for k, v in a.vars.items():
            if k not in b.vars or not _same_value(v, b.vars[k]):
                out.append(f"{label} cycle {a.cycle}: {k} = {b.vars.get(k)!r}, simulator {v!r}")
    if (ref.diverged, ref.completed) != (other.diverged, other.completed):
        out.append(f"{label}: termination differs")
    if [(r.cycle, r.actual) for r in ref.assertions] != [(r.cycle, r.actual) for r in other.assertions]:
        out.append(f"{label}: assertion outcomes differ")
    return out


def differential(model, scenarios, program=None) -> list[str]:
    """Run every scenario on the simulator and on both ST emission modes."""
    program = program or Program(model)
    flat = generate_st(model, EmitOptions(oop=False))
    oop = generate_st(model, EmitOptions(oop=True))
    problems = []
    for sc in scenarios:
        sim = run(model, sc, program)
        t_flat = execute_st(flat, sc)
        t_oop = execute_st(oop, sc)
        problems += trace_mismatches(sim, t_flat, "flat")
        problems += trace_mismatches(sim, t_oop, "oop")
        problems += trace_mismatches(t_flat, t_oop, "flat-vs-oop")
    return problems
