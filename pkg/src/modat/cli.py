"""``modat-lc`` command line.

Exit codes: 0 success, 1 validation errors, 2 parse errors, 3 assertion
failure or divergence, 4 usage error. Diagnostics go to stderr; data goes to
stdout or to the ``-o`` file.
"""

from __future__ import annotations

import argparse
import difflib
import json
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import __version__
from . import model as m
from .codegen import EmitOptions, generate_st
from .diagnostics import Diagnostic
from .formatter import format_model
from .parser import GRAMMAR_VERSION, parse_model_diagnostics
from .scenario import parse_scenario_diagnostics
from .simulator import SimulationError, run
from .validator import errors_only, validate
from .variants import rebase, rebase_renames

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_SIM, EXIT_USAGE = 0, 1, 2, 3, 4


class CliExit(Exception):
    def __init__(self, code: int):
        super().__init__(code)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise CliExit(EXIT_USAGE)


@dataclass
class Ctx:
    json: bool = False

    def report(self, diags: list[Diagnostic]) -> None:
        for d in diags:
            print(d.to_json() if self.json else d.render(), file=sys.stderr)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        print(f"modat-lc: cannot read {path}: {exc.strerror}", file=sys.stderr)
        raise CliExit(EXIT_USAGE) from None


def load_pipeline(path: str, ctx: Ctx, check: bool = True) -> m.Model:
    """Parse, resolve and (optionally) validate; raise CliExit on failure."""
    model, diags = parse_model_diagnostics(_read(path), path)
    if model is None:
        ctx.report(diags)
        raise CliExit(EXIT_PARSE)
    if not check:
        ctx.report(diags)
        return model
    diags = sorted([*diags, *validate(model)], key=Diagnostic.sort_key)
    ctx.report(diags)
    if errors_only(diags):
        raise CliExit(EXIT_INVALID)
    return model


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_check(args, ctx: Ctx) -> int:
    load_pipeline(args.model, ctx)
    return EXIT_OK


def cmd_sim(args, ctx: Ctx) -> int:
    model = load_pipeline(args.model, ctx)
    sc, diags = parse_scenario_diagnostics(_read(args.scenario), model, args.scenario)
    if sc is None:
        ctx.report(diags)
        return EXIT_PARSE if any(d.code == "E300" for d in diags) else EXIT_INVALID
    try:
        trace = run(model, sc)
    except SimulationError as exc:
        print(f"modat-lc: simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM
    if args.trace:
        Path(args.trace).write_text(trace.to_jsonl(), encoding="utf-8")
    for a in trace.assertions:
        status = "ok  " if a.ok else "FAIL"
        actual = "not reached" if a.actual is None else str(a.actual).upper()
        print(f"{status} cycle {a.cycle}: {a.text} is {str(a.expected).upper()} (got {actual})")
    if trace.diverged:
        print(f"diverged: cycle bound {sc.max_cycles} reached before completion")
    print(trace.summary())
    return EXIT_OK if trace.passed else EXIT_SIM


def cmd_gen(args, ctx: Ctx) -> int:
    model = load_pipeline(args.model, ctx)
    unit = generate_st(model, EmitOptions(oop=args.oop), check=False)
    _emit(unit.text, args.output)
    if args.symbols:
        Path(args.symbols).write_text(json.dumps(unit.symbols, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    return EXIT_OK


def cmd_rebase(args, ctx: Ctx) -> int:
    model = load_pipeline(args.model, ctx)
    try:
        new = rebase(model, args.old_base, args.variant, args.classic)
    except m.ModelError as exc:
        print(f"modat-lc: rebase refused: {exc}", file=sys.stderr)
        return EXIT_INVALID
    post = errors_only(validate(new))
    if post:
        ctx.report(post)
        return EXIT_INVALID
    before, after = format_model(model), format_model(new)
    renames = rebase_renames(args.old_base, args.variant, args.classic)
    header = "".join(f"// renamed {a} -> {b}\n" for a, b in renames.items())
    diff = header + "".join(difflib.unified_diff(
        before.splitlines(keepends=True), after.splitlines(keepends=True),
        fromfile=args.model, tofile=args.output or "<rebased>"))
    if args.output:
        _emit(after, args.output)
        sys.stdout.write(diff)
    else:
        sys.stdout.write(after)
        sys.stderr.write(diff)
    return EXIT_OK


def cmd_fmt(args, ctx: Ctx) -> int:
    model = load_pipeline(args.model, ctx, check=False)
    _emit(format_model(model), args.output)
    return EXIT_OK


def model_stats(model: m.Model) -> dict:
    """Size figures of a model, from definitions down to I/O points."""
    bases = [b for b in model.blocks.values() if b.base is None]
    variants = [b for b in model.blocks.values() if b.base is not None]
    per_def: Counter = Counter()
    io = Counter()
    n_inst = 0
    if model.root is not None:
        for inst in m.instantiate_root(model).walk():
            n_inst += 1
            per_def[inst.block] += 1
            sig = m.signal_attribute(model, inst.block)
            if sig is not None and sig.io is not None:
                io[sig.io.value] += 1
    fam = Counter(len(model.variants_of(b.name)) for b in bases)
    return {
        "blocks": len(bases),
        "variants": len(variants),
        "components": sum(b.kind is m.BlockKind.COMPONENT for b in model.blocks.values()),
        "instances": n_inst,
        "instances_per_definition": dict(sorted(per_def.items())),
        "io": {"input": io.get("input", 0), "output": io.get("output", 0),
               "total": sum(io.values())},
        "variants_per_base": {str(k): v for k, v in sorted(fam.items())},
    }


def cmd_stats(args, ctx: Ctx) -> int:
    model = load_pipeline(args.model, ctx)
    st = model_stats(model)
    if ctx.json:
        print(json.dumps(st, indent=2))
        return EXIT_OK
    print(f"blocks      {st['blocks']}")
    print(f"variants    {st['variants']}")
    print(f"components  {st['components']}")
    print(f"instances   {st['instances']}")
    io = st["io"]
    print(f"I/O         {io['total']} ({io['input']} in, {io['output']} out)")
    print("instances per definition:")
    for name, n in st["instances_per_definition"].items():
        print(f"  {name:<24} {n}")
    print("variants per base block:")
    for k, v in st["variants_per_base"].items():
        print(f"  {k} variant(s): {v} base block(s)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modat-lc", description="Validate modAT4rMS models and compile them to Structured Text.")
    p.add_argument("--version", action="version",
                   version=f"modat-lc {__version__} (grammar {GRAMMAR_VERSION}, IEC 61131-3 ST)")
    p.add_argument("--json", action="store_true", help="diagnostics (and stats) as JSON lines")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    s = sub.add_parser("check", help="parse and validate a model")
    s.add_argument("model")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("sim", help="run a scenario on the scan-cycle simulator")
    s.add_argument("model")
    s.add_argument("scenario")
    s.add_argument("--trace", metavar="OUT.jsonl", help="write the per-cycle trace as JSON lines")
    s.set_defaults(func=cmd_sim)

    s = sub.add_parser("gen", help="generate IEC 61131-3 Structured Text")
    s.add_argument("model")
    s.add_argument("-o", "--output")
    s.add_argument("--oop", action="store_true", help="use EXTENDS and METHODs instead of flattening")
    s.add_argument("--symbols", metavar="OUT.json", help="also write the symbol table")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("rebase", help="promote a variant to base of its family")
    s.add_argument("model")
    s.add_argument("old_base")
    s.add_argument("variant")
    s.add_argument("-o", "--output")
    s.add_argument("--classic", help="name for the demoted base (default <Base>_Classic)")
    s.set_defaults(func=cmd_rebase)

    s = sub.add_parser("fmt", help="print a model in canonical form")
    s.add_argument("model")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_fmt)

    s = sub.add_parser("stats", help="sizes: blocks, variants, instances, I/O")
    s.add_argument("model")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.error("a command is required")
        return args.func(args, Ctx(json=args.json))
    except CliExit as exc:
        return exc.code
    except SystemExit as exc:  # --version / --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
