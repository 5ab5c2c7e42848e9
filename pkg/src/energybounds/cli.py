"""Command-line interface: ``python -m energybounds <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import zlib
from pathlib import Path

import numpy as np

from . import corpus
from .bounds import (
    ACCEPT,
    REJECT,
    UNKNOWN,
    AnalysisError,
    DeviationReport,
    analyze,
    block_bounds,
    deviation_rows,
    verify_budget,
)
from .cfg import cfg_to_json, extract_blocks, harness_transform, location_name
from .evo import LOWER, UPPER, EaCache, EaConfig
from .hcir import format_hcir, to_hcir
from .isa import IsaError
from .simkernel import SimulationError, load_model, run_program_profile

EXIT_CODES = {ACCEPT: 0, UNKNOWN: 2, REJECT: 3}
EXIT_USAGE = 64
EXIT_ANALYSIS = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x, 0) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _bitwidth(text: str) -> int:
    v = int(text)
    if not 1 <= v <= 12:
        raise argparse.ArgumentTypeError("bitwidth must be in 1..12")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="default", help="energy model JSON (default: shipped model)")
    common.add_argument("--seed", type=int, default=0, help="seed for the EA and generated inputs")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--word-bits", type=int, default=32, help="machine word width")

    ea = argparse.ArgumentParser(add_help=False)
    ea.add_argument("--direction", choices=("upper", "lower", "both"), default="both")
    ea.add_argument("--bounds", choices=("ea", "exhaustive"), default="ea",
                    help="block bounds from the EA or by enumeration")
    ea.add_argument("--bitwidth", type=_bitwidth, default=8,
                    help="input bit width of the exhaustive oracle")
    ea.add_argument("--ea-pop", type=int, default=EaConfig.population_size)
    ea.add_argument("--ea-gens", type=int, default=EaConfig.max_generations)
    ea.add_argument("--ea-stagnation", type=int, default=EaConfig.stagnation_limit)
    ea.add_argument("--ea-gene-bits", type=int, default=32, help="restrict EA genes to low bits")
    ea.add_argument("--cache", help="EA result cache JSON file")
    ea.add_argument("--safety-margin", type=float, default=1.0,
                    help="factor applied to block upper bounds before composition")

    p = _Parser(prog="energybounds", description="Static energy bounds for toy-ISA programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common, ea], help="closed-form energy bounds")
    a.add_argument("program", help="corpus name or .toyisa file")

    mb = sub.add_parser("model-blocks", parents=[common, ea], help="per-block energy bounds")
    mb.add_argument("program")

    s = sub.add_parser("simulate", parents=[common], help="profile one execution")
    s.add_argument("program")
    s.add_argument("--n", type=int, required=True, help="size argument passed in r0")
    s.add_argument("--array", type=_int_list, help="data segment contents (default: random)")

    v = sub.add_parser("verify", parents=[common, ea], help="check an energy budget")
    v.add_argument("program")
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--budget", type=float, required=True, help="budget in pJ")

    r = sub.add_parser("report", parents=[common, ea], help="CFG, HC IR and cost equations")
    r.add_argument("program")

    b = sub.add_parser("bench", parents=[common, ea], help="Est/Prof/Obs deviation report")
    b.add_argument("--programs", default=",".join(corpus.CORPUS))
    b.add_argument("--sizes", type=_int_list, default=[5, 15, 25])
    b.add_argument("--out", help="also write the JSON report to this file")
    return p


def _ea_config(args) -> EaConfig:
    try:
        return EaConfig(
            population_size=args.ea_pop,
            max_generations=args.ea_gens,
            stagnation_limit=args.ea_stagnation,
            rng_seed=args.seed,
            gene_bits=args.ea_gene_bits,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e


def _load(args):
    try:
        model = load_model(args.model)
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot load model {args.model}: {e}") from e
    src = args.program
    if src not in corpus.CORPUS and not Path(src).exists() and Path(src).stem not in corpus.CORPUS:
        raise UsageError(f"no such program: {src}")
    try:
        name, prog = corpus.load(src)
    except IsaError as e:
        raise AnalysisError("isa", str(e)) from e
    return name, prog, model


def _start(name: str) -> int:
    b = corpus.CORPUS.get(name)
    return b.min_n if b else 0


def _analyze(args, name, prog, model):
    cache = EaCache(args.cache) if args.cache else None
    pair = analyze(
        prog, model, _ea_config(args), name=name, bound_source=args.bounds,
        bit_width=args.bitwidth, word_bits=args.word_bits, cache=cache,
        safety_margin=args.safety_margin, start=_start(name),
    )
    if cache is not None:
        cache.save()
    return pair


def _emit(args, text: str, doc) -> None:
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_analyze(args) -> int:
    name, prog, model = _load(args)
    pair = _analyze(args, name, prog, model)
    doc = pair.to_dict()
    lines = [f"{name} [{pair.metric}]"]
    if args.direction in ("upper", "both"):
        lines.append(f"  ub = {pair.ub}")
    if args.direction in ("lower", "both"):
        lines.append(f"  lb = {pair.lb}")
    if args.direction != "both":
        doc.pop("lb" if args.direction == "upper" else "ub")
    _emit(args, "\n".join(lines), doc)
    return 0


def cmd_model_blocks(args) -> int:
    name, prog, model = _load(args)
    cfg = extract_blocks(prog)
    cache = EaCache(args.cache) if args.cache else None
    try:
        bounds = block_bounds(cfg, model, _ea_config(args), source=args.bounds,
                              bit_width=args.bitwidth, word_bits=args.word_bits, cache=cache)
    except Exception as e:  # noqa: BLE001
        raise AnalysisError("evo", str(e)) from e
    if cache is not None:
        cache.save()
    dirs = [d for d in (UPPER, LOWER) if args.direction in (d, "both")]
    head = f"{'block':<8}{'inputs':<28}" + "".join(f"{d + ' pJ':>12}{'gens':>6}" for d in dirs)
    lines = [head, "-" * len(head)]
    doc = {}
    for part_id, per_dir in bounds.items():
        ins = ",".join(_part_inputs(cfg, part_id))
        row = f"{part_id:<8}{ins:<28}"
        for d in dirs:
            bb = per_dir[d]
            row += f"{float(bb.value_pJ):>12.3f}{bb.generations_run:>6}"
        lines.append(row)
        doc[part_id] = {d: {**per_dir[d].to_dict(), "value_pJ": f"{float(per_dir[d].value_pJ):.3f}"}
                        for d in dirs}
    _emit(args, "\n".join(lines), doc)
    return 0


def _part_inputs(cfg, part_id: str) -> list[str]:
    origin = part_id.split("_")[0]
    for h in harness_transform(cfg.blocks[origin]):
        if h.id == part_id:
            return [location_name(x) for x in h.inputs]
    return []


def _input_rng(seed: int, name: str, n: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(name.encode()), n]))


def cmd_simulate(args) -> int:
    name, prog, model = _load(args)
    array = args.array
    if array is None and corpus.is_array_program(name):
        array = corpus.random_array(args.n, _input_rng(args.seed, name, args.n), args.word_bits)
    trace = run_program_profile(prog, [args.n], array, model, word_bits=args.word_bits)
    doc = {
        "program": name,
        "n": args.n,
        "total_pJ": f"{float(trace.total_pJ):.3f}",
        "instruction_count": trace.instruction_count,
        "block_counts": trace.block_counts,
        "result": trace.result,
    }
    lines = [f"{name}(n={args.n}): {float(trace.total_pJ):.3f} pJ, "
             f"{trace.instruction_count} instructions, r0={trace.result}"]
    lines += [f"  {b}: {c}" for b, c in trace.block_counts.items()]
    _emit(args, "\n".join(lines), doc)
    return 0


def cmd_verify(args) -> int:
    name, prog, model = _load(args)
    pair = _analyze(args, name, prog, model)
    v = verify_budget(pair, args.n, args.budget)
    doc = {"program": name, "n": args.n, "verdict": v.kind, "lb_pJ": f"{float(v.lb):.3f}",
           "ub_pJ": f"{float(v.ub):.3f}", "budget_pJ": f"{float(v.budget):.3f}"}
    _emit(args, f"{name}(n={args.n}) {v}", doc)
    return EXIT_CODES[v.kind]


def cmd_report(args) -> int:
    name, prog, model = _load(args)
    cfg = extract_blocks(prog)
    hc = to_hcir(cfg)
    pair = _analyze(args, name, prog, model)
    doc = {"cfg": json.loads(cfg_to_json(cfg)), "hcir": format_hcir(hc).splitlines(),
           "analysis": pair.to_dict()}
    text = [f"# {name}", "", "## HC IR", format_hcir(hc), "## cost equations"]
    for d in (UPPER, LOWER):
        text += [f"[{d}]", str(pair.systems[d]), ""]
    text += ["## bounds", f"ub = {pair.ub}", f"lb = {pair.lb}"]
    _emit(args, "\n".join(text), doc)
    return 0


def bench_report(programs, sizes, model, ea: EaConfig, *, seed: int = 0, word_bits: int = 32,
                 bound_source: str = "ea", bit_width: int = 8, cache=None,
                 safety_margin=1.0) -> DeviationReport:
    report = DeviationReport()
    for name in programs:
        if name not in corpus.CORPUS:
            raise UsageError(f"unknown corpus program {name!r}")
        bm = corpus.CORPUS[name]
        prog = bm.program()
        pair = analyze(prog, model, ea, name=name, bound_source=bound_source, bit_width=bit_width,
                       word_bits=word_bits, cache=cache, safety_margin=safety_margin,
                       start=bm.min_n)
        report.functions[name] = {"metric": pair.metric, "ub": pair.ub.render(), "lb": pair.lb.render()}
        runs = []
        for n in sizes:
            if n < bm.min_n:
                continue
            rng = _input_rng(seed, name, n)
            if bm.kind == "array":
                worst = corpus.WORST_CASE.get(name, corpus.random_array)(n, rng, word_bits)
                best = corpus.BEST_CASE.get(name)
                best = best(n, rng, word_bits) if best else worst
            else:
                worst = best = None
            runs.append((n, UPPER, [n], worst))
            runs.append((n, LOWER, [n], best))
        report.rows.extend(deviation_rows(name, prog, pair, model, runs, word_bits))
    return report


def cmd_bench(args) -> int:
    try:
        model = load_model(args.model)
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot load model {args.model}: {e}") from e
    programs = [x for x in args.programs.split(",") if x]
    cache = EaCache(args.cache) if args.cache else None
    report = bench_report(programs, args.sizes, model, _ea_config(args), seed=args.seed,
                          word_bits=args.word_bits, bound_source=args.bounds,
                          bit_width=args.bitwidth, cache=cache, safety_margin=args.safety_margin)
    if cache is not None:
        cache.save()
    if args.direction != "both":
        report.rows = [r for r in report.rows if r.direction == args.direction]
    doc = report.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _emit(args, report.render(), doc)
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "model-blocks": cmd_model_blocks,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "report": cmd_report,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"energybounds: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AnalysisError as e:
        print(f"energybounds: analysis failed {e}", file=sys.stderr)
        return EXIT_ANALYSIS
    except SimulationError as e:
        print(f"energybounds: analysis failed [simkernel] {e}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    raise SystemExit(main())
