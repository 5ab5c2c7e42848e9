"""Pipeline orchestration, budget verdicts and deviation reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cfg import Cfg, HarnessBlock, extract_blocks, harness_transform
from .evo import LOWER, UPPER, BlockBound, EaCache, EaConfig, optimize
from .hcir import CostEquationSystem, HcError, HcProgram, setup_cost_equations, to_hcir, infer_metrics
from .isa import COST_TAG_OPS, Program
from .simkernel import EnergyModelParams, EnergyTrace, exhaustive_extrema, run_program_profile
from .solver import SolveResult, SolverError, solve

CHECK_RANGE = 30


class AnalysisError(Exception):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


@dataclass
class EnergyFunctionPair:
    name: str
    metric: str
    ub: SolveResult
    lb: SolveResult
    model_hash: str
    ea_hash: str
    block_bounds: dict[str, dict[str, BlockBound]] = field(default_factory=dict, repr=False)
    systems: dict[str, CostEquationSystem] = field(default_factory=dict, repr=False)
    hc: HcProgram | None = field(default=None, repr=False)
    start: int = 0

    def at(self, n: int) -> tuple[Fraction, Fraction]:
        return self.lb.evaluate(n), self.ub.evaluate(n)

    def ordered(self, horizon: int = CHECK_RANGE) -> bool:
        return all(self.lb(n) <= self.ub(n) for n in range(self.start, horizon + 1))

    def to_dict(self) -> dict:
        return {
            "function": self.name,
            "metric": self.metric,
            "ub": self.ub.to_dict(),
            "lb": self.lb.to_dict(),
            "model_hash": self.model_hash,
            "ea_hash": self.ea_hash,
            "equations": {d: str(s) for d, s in sorted(self.systems.items())},
            "blocks": {
                part: {d: {"value_pJ": f"{float(b.value_pJ):.3f}", "witness": list(b.witness)}
                       for d, b in sorted(dirs.items())}
                for part, dirs in self.block_bounds.items()
            },
        }


def tag_costs(m: EnergyModelParams) -> dict[str, Fraction]:
    return {op: m.base(op) for op in COST_TAG_OPS}


def harness_parts(cfg: Cfg) -> list[HarnessBlock]:
    return [h for b in cfg.blocks.values() if b.reachable for h in harness_transform(b)]


def exhaustive_bound(h: HarnessBlock, m: EnergyModelParams, bit_width: int, word_bits: int) -> dict[str, BlockBound]:
    lo, hi, w_lo, w_hi = exhaustive_extrema(h, bit_width, m, word_bits)
    pts = 1 << (len(h.inputs) * bit_width)
    return {
        UPPER: BlockBound(h.id, UPPER, hi, w_hi, 0, pts, (hi,)),
        LOWER: BlockBound(h.id, LOWER, lo, w_lo, 0, pts, (lo,)),
    }


def block_bounds(
    cfg: Cfg,
    m: EnergyModelParams,
    ea: EaConfig,
    *,
    source: str = "ea",
    bit_width: int = 8,
    word_bits: int = 32,
    cache: EaCache | None = None,
) -> dict[str, dict[str, BlockBound]]:
    """Upper and lower bound of every harness part, from the EA or by enumeration."""
    out: dict[str, dict[str, BlockBound]] = {}
    for h in harness_parts(cfg):
        if source == "exhaustive":
            out[h.id] = exhaustive_bound(h, m, bit_width, word_bits)
        elif source == "ea":
            out[h.id] = {d: optimize(h, m, ea, d, word_bits, cache) for d in (UPPER, LOWER)}
        else:
            raise ValueError(f"unknown bound source {source!r}")
    return out


def analyze(
    p: Program,
    m: EnergyModelParams,
    ea: EaConfig | None = None,
    *,
    name: str | None = None,
    bound_source: str = "ea",
    bit_width: int = 8,
    word_bits: int = 32,
    cache: EaCache | None = None,
    safety_margin: Fraction | float = 1,
    start: int = 0,
) -> EnergyFunctionPair:
    """Block bounds, cost equations and closed forms for the entry function of ``p``."""
    ea = ea or EaConfig()
    try:
        cfg = extract_blocks(p)
    except Exception as e:  # noqa: BLE001 - re-raised with the stage
        raise AnalysisError("cfg", str(e)) from e
    try:
        bounds = block_bounds(cfg, m, ea, source=bound_source, bit_width=bit_width,
                              word_bits=word_bits, cache=cache)
    except Exception as e:
        raise AnalysisError("evo", str(e)) from e
    margin = Fraction(str(safety_margin)) if isinstance(safety_margin, float) else Fraction(safety_margin)
    try:
        hc = to_hcir(cfg)
        metrics = infer_metrics(hc)
        systems = {}
        for d in (UPPER, LOWER):
            costs = {
                part: b[d].value_pJ * (margin if d == UPPER else 1) for part, b in bounds.items()
            }
            systems[d] = setup_cost_equations(hc, costs, d, metrics, tag_costs(m))
    except HcError as e:
        raise AnalysisError("hcir", str(e)) from e
    try:
        ub = solve(systems[UPPER], start=start)
        lb = solve(systems[LOWER], start=start)
    except SolverError as e:
        raise AnalysisError("solver", str(e)) from e
    entry = hc.entry[p.entry]
    return EnergyFunctionPair(
        name or p.entry, metrics[entry], ub, lb, m.digest(),
        "exhaustive-%d" % bit_width if bound_source == "exhaustive" else ea.digest(),
        bounds, systems, hc, start,
    )


# ------------------------------------------------------------------ verdicts

ACCEPT, UNKNOWN, REJECT = "Accept", "Unknown", "Reject"


@dataclass(frozen=True)
class Verdict:
    kind: str
    lb: Fraction
    ub: Fraction
    budget: Fraction

    def __str__(self) -> str:
        return (f"{self.kind}: lb={float(self.lb):.3f} pJ, ub={float(self.ub):.3f} pJ, "
                f"budget={float(self.budget):.3f} pJ")


def verdict_for(lb: Fraction, ub: Fraction, budget) -> Verdict:
    b = Fraction(str(budget)) if isinstance(budget, float) else Fraction(budget)
    if ub <= b:
        kind = ACCEPT
    elif b < lb:
        kind = REJECT
    else:
        kind = UNKNOWN
    return Verdict(kind, lb, ub, b)


def verify_budget(pair: EnergyFunctionPair, n: int, budget) -> Verdict:
    lb, ub = pair.at(n)
    return verdict_for(lb, ub, budget)


# ----------------------------------------------------------------- accuracy


def rel_harmonic_diff(est, obs) -> float:
    """Relative harmonic difference in percent."""
    est, obs = Fraction(str(est)) if isinstance(est, float) else Fraction(est), \
        Fraction(str(obs)) if isinstance(obs, float) else Fraction(obs)
    if est <= 0 or obs <= 0:
        raise ValueError("relative harmonic difference needs positive energies")
    return float((est - obs) * (1 / est + 1 / obs) / 2 * 100)


def block_visit_bounds(cfg: Cfg, bounds: Mapping[str, Mapping[str, BlockBound]],
                       m: EnergyModelParams, direction: str) -> dict[str, Fraction]:
    """Bound of one visit of each basic block: its parts plus its cost tags."""
    tags = tag_costs(m)
    out = {}
    for b in cfg.blocks.values():
        if not b.reachable:
            continue
        total = Fraction(0)
        for part in harness_transform(b):
            total += bounds[part.id][direction].value_pJ
            total += sum((tags[t] for t in part.omitted), Fraction(0))
        out[b.id] = total
    return out


def profile_estimate(trace: EnergyTrace, visit_bounds: Mapping[str, Fraction]) -> Fraction:
    return sum((c * visit_bounds[b] for b, c in trace.block_counts.items() if c), Fraction(0))


@dataclass(frozen=True)
class DeviationRow:
    program: str
    n: int
    direction: str
    est: Fraction
    prof: Fraction
    obs: Fraction

    @property
    def d(self) -> float:
        return rel_harmonic_diff(self.est, self.obs)

    @property
    def prd(self) -> float:
        return rel_harmonic_diff(self.prof, self.obs)

    def to_dict(self) -> dict:
        return {
            "program": self.program, "n": self.n, "direction": self.direction,
            "est_pJ": f"{float(self.est):.3f}", "prof_pJ": f"{float(self.prof):.3f}",
            "obs_pJ": f"{float(self.obs):.3f}", "D_pct": f"{self.d:.2f}", "PrD_pct": f"{self.prd:.2f}",
        }


@dataclass
class DeviationReport:
    rows: list[DeviationRow] = field(default_factory=list)
    functions: dict[str, dict] = field(default_factory=dict)

    def render(self) -> str:
        lines = []
        for name, f in self.functions.items():
            lines.append(f"{name}({f['metric']}): ub = {f['ub']}; lb = {f['lb']}")
        if lines:
            lines.append("")
        head = f"{'program':<14}{'N':>4} {'dir':<4}{'Est':>12}{'Prof':>12}{'Obs':>12}{'D%':>9}{'PrD%':>9}"
        lines += [head, "-" * len(head)]
        for r in self.rows:
            lines.append(
                f"{r.program:<14}{r.n:>4} {('U' if r.direction == UPPER else 'L'):<4}"
                f"{float(r.est):>12.3f}{float(r.prof):>12.3f}{float(r.obs):>12.3f}"
                f"{r.d:>9.2f}{r.prd:>9.2f}"
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"functions": self.functions, "rows": [r.to_dict() for r in self.rows]}


def deviation_rows(
    name: str,
    p: Program,
    pair: EnergyFunctionPair,
    m: EnergyModelParams,
    runs: Sequence[tuple[int, str, list[int], list[int] | None]],
    word_bits: int = 32,
) -> list[DeviationRow]:
    """One row per (n, direction, args, memory) run."""
    cfg = extract_blocks(p)
    visit = {d: block_visit_bounds(cfg, pair.block_bounds, m, d) for d in (UPPER, LOWER)}
    rows = []
    for n, direction, args, mem in runs:
        trace = run_program_profile(p, args, mem, m, word_bits=word_bits, cfg=cfg)
        est = pair.ub(n) if direction == UPPER else pair.lb(n)
        rows.append(DeviationRow(name, n, direction, est, profile_estimate(trace, visit[direction]),
                                 trace.total_pJ))
    return rows
