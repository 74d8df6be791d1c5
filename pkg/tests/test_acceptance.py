"""Acceptance criteria, one test each, with the thresholds they are judged by.

Every test records a ``PASS``/``FAIL`` line (see ``conftest.ACCEPTANCE``);
the lines are printed again in the terminal summary.
"""

import random
import time

from conftest import ACCEPTANCE, CORPUS, corpus_models, corpus_scenarios, mutant_files, expected_code
from differential import differential
from modat import model as m
from modat.codegen import EmitOptions, generate_st
from modat.formatter import format_model
from modat.gen import desk_scale_model, desk_scale_scenario, random_model
from modat.parser import parse_model, parse_model_diagnostics
from modat.scenario import parse_scenario
from modat.simulator import Program, run
from modat.validator import errors_only, validate
from modat.variants import RebaseConflict, rebase, rebase_renames
from test_frontend import fuzz_inputs
from test_simulator import POLICY_TABLES, check_scan_invariants
from test_variants import _assert_flatten_equal, rebase_pairs


def report(n: int, name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} [{n}] {name}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def test_1_stamp_corpus():
    t0 = time.perf_counter()
    path = CORPUS / "stamp" / "stamp.modat"
    model = parse_model(path.read_bytes(), str(path))
    errs = errors_only(validate(model))
    scns = sorted((CORPUS / "stamp").glob("*.scn"))
    traces = [run(model, parse_scenario(s.read_text(), model, str(s))) for s in scns]
    goldens = [generate_st(model, EmitOptions(oop=oop)).text
               == (CORPUS / "stamp" / "golden" / f"stamp.{'oop' if oop else 'flat'}.st").read_text()
               for oop in (False, True)]
    dt = time.perf_counter() - t0
    ok = not errs and traces and all(t.passed for t in traces) and all(goldens) and dt < 1.0
    report(1, "stamp corpus", ok,
           f"{len(errs)} errors, {sum(t.passed for t in traces)}/{len(traces)} scenarios PASS, "
           f"{sum(goldens)}/2 goldens identical, {dt:.3f}s (< 1s)")


def test_2_mutants():
    files = mutant_files()
    wrong = []
    for f in files:
        codes = sorted({d.code for d in errors_only(validate(parse_model(f.read_bytes(), str(f))))})
        if codes != [expected_code(f)]:
            wrong.append(f"{f.stem}: {codes}")
    depth = {d.code for d in validate(parse_model((CORPUS / "bad_depth.modat").read_text()))}
    ok = len(files) >= 10 and not wrong and depth == {"E001"}
    report(2, "single-fault mutants", ok,
           f"{len(files) - len(wrong)}/{len(files)} yield exactly their code (need >= 10); "
           f"depth-two mutant -> {sorted(depth)}" + (f"; wrong: {wrong}" if wrong else ""))


def test_3_rebase_pairs():
    t0 = time.perf_counter()
    done, problems, seed = 0, [], 0
    family = parse_model((CORPUS / "family" / "family.modat").read_text())
    sources = [("family", family)]
    while done < 100 and seed < 1000:
        sources.append((f"seed {seed}", parse_model(random_model(seed, adapt_only_variants=True))))
        seed += 1
        for label, old in sources:
            for base, v in rebase_pairs(old):
                try:
                    new = rebase(old, base, v)
                except RebaseConflict:
                    continue
                try:
                    _assert_flatten_equal(old, new, rebase_renames(base, v))
                except AssertionError as exc:
                    problems.append(f"{label} {base}/{v}: flatten {exc}")
                if errors_only(validate(new)):
                    problems.append(f"{label} {base}/{v}: post-rebase errors")
                done += 1
        sources = []
    dt = time.perf_counter() - t0
    ok = done >= 100 and not problems and dt < 30
    report(3, "rebase", ok, f"{done} pairs (need >= 100), {len(problems)} violations "
           f"(flatten equality, clean validation, depth <= 1), {dt:.2f}s (< 30s)")


def test_4_scan_properties():
    cycles, bad = 0, []
    for mf, scn in corpus_scenarios():
        model = parse_model(mf.read_bytes(), str(mf))
        try:
            cycles += check_scan_invariants(model, parse_scenario(scn.read_text(), model))
        except AssertionError as exc:
            bad.append(f"{scn.stem}: {exc}")
    model = parse_model((CORPUS / "policies" / "policies.modat").read_text())
    tables = 0
    for policy, table in POLICY_TABLES.items():
        t = run(model, parse_scenario((CORPUS / "policies" / f"{policy.lower()}.scn").read_text(), model))
        got = [([(f["inst"], f["from"], f["to"], f["policy"]) for f in r.fired],
                r.vars["cell.worker.ticks"], r.vars["cell.pauses"], r.detached) for r in t.records]
        want = [([(i.format(policy), a, b, p) for i, a, b, p in fs], tk, ps, det) for fs, tk, ps, det in table]
        tables += got == want
    ok = not bad and tables == 3
    report(4, "scan properties", ok,
           f"{len(corpus_scenarios())} traces / {cycles} cycles checked, {len(bad)} violations "
           f"(<= 1 fired per instance, no completion while callee running); policy tables {tables}/3 exact")


def test_5_differential():
    t0 = time.perf_counter()
    pairs, problems, models = 0, [], 0
    for mf, scns in corpus_models():
        model = parse_model(mf.read_bytes(), str(mf))
        scenarios = [parse_scenario(s.read_text(), model, str(s)) for s in scns]
        if len(scenarios) < 3:
            continue
        models += 1
        pairs += len(scenarios)
        problems += [f"{mf.parent.name}: {p}" for p in differential(model, scenarios)]
    dt = time.perf_counter() - t0
    ok = models >= 10 and pairs >= 30 and not problems and dt < 60
    report(5, "differential codegen", ok,
           f"{models} models x {pairs} scenarios, simulator == flat ST == OOP ST on every snapshot "
           f"(REAL tol 1e-9): {len(problems)} mismatches, {dt:.2f}s (< 60s)")


def test_6_round_trip_and_fuzz():
    bad = []
    fixtures = [mf for mf, _ in corpus_models()] + mutant_files()
    texts = [(f.stem, f.read_text()) for f in fixtures]
    texts += [(f"seed {s}", random_model(s)) for s in range(100)]
    for label, text in texts:
        m1 = parse_model(text)
        if parse_model(format_model(m1)) != m1:
            bad.append(label)
    crashes = 0
    n = 0
    for text in fuzz_inputs(10_000, seed=2024):
        n += 1
        try:
            model, diags = parse_model_diagnostics(text, "fuzz")
            if model is None and not diags:
                crashes += 1
        except Exception:  # noqa: BLE001 - any escape is a crash
            crashes += 1
    ok = not bad and crashes == 0 and n == 10_000
    report(6, "round trip", ok,
           f"{len(texts) - len(bad)}/{len(texts)} structurally equal ({len(fixtures)} fixtures + 100 generated); "
           f"{n} fuzzed inputs, {crashes} crashes")


def test_7_desk_scale():
    t0 = time.perf_counter()
    model = parse_model(desk_scale_model())
    errs = errors_only(validate(model))
    io = sum(1 for inst in m.instantiate_root(model).walk()
             if (s := m.signal_attribute(model, inst.block)) is not None and s.io is not None)
    trace = run(model, parse_scenario(desk_scale_scenario(), model), Program(model))
    unit = generate_st(model, check=False)
    dt = time.perf_counter() - t0
    ok = not errs and io == 100 and len(trace.records) == 1000 and unit.text and dt < 5
    report(7, "desk scale", ok,
           f"{io} I/O, check + {len(trace.records)} simulated cycles + gen ({len(unit.text) // 1024} KiB) "
           f"in {dt:.2f}s (< 5s)")
