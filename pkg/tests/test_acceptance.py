"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line (visible with ``-s`` or in
the summary written by ``scripts/run_acceptance.py``) before asserting.
"""

import itertools
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from energybounds.bounds import (
    ACCEPT,
    REJECT,
    UNKNOWN,
    analyze,
    harness_parts,
    rel_harmonic_diff,
    verdict_for,
)
from energybounds.cfg import extract_blocks
from energybounds.cli import bench_report
from energybounds.corpus import CORPUS, ascending_array, descending_array, program_inputs
from energybounds.evo import LOWER, UPPER, EaConfig, optimize
from energybounds.hcir import block_level_costs, replay, setup_cost_equations, to_hcir
from energybounds.simkernel import (
    DomainTooLarge,
    exhaustive_extrema,
    load_model,
    run_program_profile,
    zero_model,
)
from energybounds.solver import eval_recurrence, solve

pytestmark = pytest.mark.acceptance


def _report(capsys, k: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def m():
    return load_model()


# ----------------------------------------------------------------- 1


def test_c1_hcir_matches_profile(capsys, m):
    t0 = time.perf_counter()
    bad = []
    runs = 0
    rng = np.random.default_rng(1)
    for name, bm in CORPUS.items():
        p = bm.program()
        cfg = extract_blocks(p)
        hc = to_hcir(cfg)
        for n in range(13):
            data = [int(v) for v in rng.integers(0, 2**32, size=n, dtype=np.uint64)]
            args, mem = program_inputs(name, n, data)
            trace = run_program_profile(p, args, mem, m, cfg=cfg)
            got = replay(hc, hc.entry[p.entry], block_level_costs(hc, trace.per_visit()), trace.decisions)
            runs += 1
            if got != trace.total_pJ:
                bad.append((name, n, got, trace.total_pJ))
    dt = time.perf_counter() - t0
    _report(capsys, 1, not bad and dt < 10,
            f"{runs} runs, {len(bad)} mismatches, {dt:.2f} s (limit 10 s)")


# ----------------------------------------------------------------- 2


def test_c2_unit_fact(capsys):
    p = CORPUS["fact"].program()
    hc = to_hcir(extract_blocks(p))
    sys_ = setup_cost_equations(hc, block_level_costs(hc, {b: Fraction(1) for b in hc.cfg.blocks}),
                                UPPER, tag_costs={})
    cf = solve(sys_)
    ok = cf.render() == "2*N + 2" and all(
        cf(n) == eval_recurrence(sys_, n) == 2 * n + 2 for n in range(31)
    )
    _report(capsys, 2, ok, f"unit-cost fact = {cf.render()}, checked n = 0..30")


# ----------------------------------------------------------------- 3

SIZES_C3 = (2, 4, 6, 8, 10, 12)
SAMPLES_C3 = 1000


def _c3_inputs(name, n, rng):
    bm = CORPUS[name]
    if bm.kind != "array":
        yield None
        return
    if n * 8 <= 20:
        for combo in itertools.product(range(256), repeat=n):
            yield list(combo)
        return
    for _ in range(SAMPLES_C3):
        yield [int(v) for v in rng.integers(0, 256, size=n)]
    yield ascending_array(n, rng, 8)
    yield descending_array(n, rng, 8)


def test_c3_safety_envelope(capsys, m):
    t0 = time.perf_counter()
    violations, runs = [], 0
    for name, bm in CORPUS.items():
        p = bm.program()
        cfg = extract_blocks(p)
        pair = analyze(p, m, bound_source="exhaustive", bit_width=8, word_bits=8, start=bm.min_n)
        for n in SIZES_C3:
            lb, ub = pair.at(n)
            rng = np.random.default_rng([3, n, len(name)])
            for data in _c3_inputs(name, n, rng):
                args, mem = program_inputs(name, n, data)
                e = run_program_profile(p, args, mem, m, word_bits=8, cfg=cfg).total_pJ
                runs += 1
                if not lb <= e <= ub:
                    violations.append((name, n, data, lb, e, ub))
    dt = time.perf_counter() - t0
    _report(capsys, 3, not violations and dt < 300,
            f"{runs} simulations, {len(violations)} violations, {dt:.1f} s (limit 300 s)")


# ----------------------------------------------------------------- 4 and 5

SEEDS = range(5)


@pytest.fixture(scope="module")
def ea_runs(m):
    """EA bounds and exhaustive extrema of every harness block searchable at 10 bits."""
    t0 = time.perf_counter()
    out = []
    for name, bm in CORPUS.items():
        for h in harness_parts(extract_blocks(bm.program())):
            if not h.inputs:
                continue
            try:
                lo, hi, _, _ = exhaustive_extrema(h, 10, m)
            except DomainTooLarge:
                continue
            runs = []
            for s in SEEDS:
                cfg = EaConfig(rng_seed=s, gene_bits=10)
                runs.append((optimize(h, m, cfg, UPPER), optimize(h, m, cfg, LOWER)))
            out.append((f"{name}:{h.id}", lo, hi, runs))
    return out, time.perf_counter() - t0


def test_c4_ea_quality(capsys, ea_runs):
    blocks, dt = ea_runs
    good = 0
    for _, lo, hi, runs in blocks:
        if all(up.value_pJ >= Fraction(99, 100) * hi and low.value_pJ <= Fraction(101, 100) * lo
               for up, low in runs):
            good += 1
    frac = good / len(blocks)
    _report(capsys, 4, frac >= 0.95 and dt < 300,
            f"{good}/{len(blocks)} blocks within 1% over {len(SEEDS)} seeds ({frac:.1%}), {dt:.1f} s")


def _trailing_stagnation(history) -> int:
    k = 0
    for a, b in zip(history[::-1], history[-2::-1]):
        if a != b:
            break
        k += 1
    return k


def test_c5_ea_termination(capsys, ea_runs, m):
    limit = EaConfig().stagnation_limit
    bad = []
    count = 0
    for name, _, _, runs in ea_runs[0]:
        for pair in runs:
            for bb in pair:
                count += 1
                stag = _trailing_stagnation(bb.history)
                if bb.generations_run > 20 or len(bb.history) != bb.generations_run:
                    bad.append((name, bb.generations_run))
                elif bb.generations_run < 20 and stag != limit:
                    bad.append((name, bb.generations_run, stag))
                elif bb.generations_run == 20 and stag > limit:
                    bad.append((name, bb.generations_run, stag))
    # a zero model never improves: generation 1 plus exactly four stagnant ones
    h = harness_parts(extract_blocks(CORPUS["fact"].program()))[1]
    flat = optimize(h, zero_model(), EaConfig(), UPPER)
    ok = not bad and flat.generations_run == 1 + limit
    _report(capsys, 5, ok, f"{count} EA runs, {len(bad)} violations of the 20-generation / "
                           f"{limit}-stagnation rule")


# ----------------------------------------------------------------- 6


def test_c6_shapes(capsys, m):
    pairs = {name: analyze(bm.program(), m, start=bm.min_n) for name, bm in CORPUS.items()}
    msgs, ok = [], True
    for name in ("fact", "reverse", "findMax", "fir"):
        d = (pairs[name].ub.degree, pairs[name].lb.degree)
        ok &= d == (1, 1)
        msgs.append(f"{name} {d}")
    d = (pairs["selectionSort"].ub.degree, pairs["selectionSort"].lb.degree)
    ok &= d == (2, 2)
    msgs.append(f"selectionSort {d}")
    fib_ok = all({"fib", "lucas"} <= f.kinds and "lucas(N)" in f.render() and "fib(N)" in f.render()
                 for f in (pairs["fib"].ub, pairs["fib"].lb))
    ok &= fib_ok
    msgs.append(f"fib ub = {pairs['fib'].ub.render()}")
    _report(capsys, 6, ok, "; ".join(msgs))


# ----------------------------------------------------------------- 7


def test_c7_rhd(capsys):
    a, b = rel_harmonic_diff(31.9, 29.4), rel_harmonic_diff(22.3, 27.3)
    ok = abs(a - 8.1) <= 1 and abs(b + 20.1) <= 1
    _report(capsys, 7, ok, f"rhd(31.9, 29.4) = {a:+.2f}%, rhd(22.3, 27.3) = {b:+.2f}%")


# ----------------------------------------------------------------- 8


def test_c8_findmax_inputs(capsys, m):
    report = bench_report(["findMax"], [5, 15, 25], m, EaConfig(), seed=0)
    rows = {(r.n, r.direction): r for r in report.rows}
    msgs, ok = [], True
    for n in (5, 15, 25):
        up, low = rows[(n, UPPER)], rows[(n, LOWER)]
        # upper rows run the ascending input, lower rows the descending one
        good = up.est >= up.obs >= low.obs >= low.est
        ok &= good
        msgs.append(f"N={n}: {float(up.est):.1f} >= {float(up.obs):.1f} >= "
                    f"{float(low.obs):.1f} >= {float(low.est):.1f}")
    _report(capsys, 8, ok, "; ".join(msgs))


# ----------------------------------------------------------------- 9


def test_c9_trichotomy(capsys, m):
    rng = np.random.default_rng(9)
    pairs = [analyze(bm.program(), m, start=bm.min_n) for bm in CORPUS.values()]
    rank = {REJECT: 0, UNKNOWN: 1, ACCEPT: 2}
    bad = 0
    for i in range(10_000):
        if i % 2:
            pair = pairs[i // 2 % len(pairs)]
            lb, ub = pair.at(int(rng.integers(pair.start, 13)))
        else:
            a, b = (Fraction(int(x), 8) for x in rng.integers(0, 8000, size=2))
            lb, ub = min(a, b), max(a, b)
        span = max(ub, Fraction(1))
        b1, b2 = sorted(Fraction(int(x), 100) * span / 50 for x in rng.integers(0, 10_000, size=2))
        v1, v2 = verdict_for(lb, ub, b1), verdict_for(lb, ub, b2)
        exactly_one = sum(v1.kind == k for k in rank) == 1
        if not exactly_one or rank[v1.kind] > rank[v2.kind]:
            bad += 1
    _report(capsys, 9, bad == 0, f"10000 cases, {bad} with a missing or non-monotone verdict")


# ----------------------------------------------------------------- 10


def test_c10_bench_deterministic(capsys, tmp_path):
    cmd = [sys.executable, "-m", "energybounds", "bench", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    _report(capsys, 10, a == b and len(a) > 0, f"{len(a)} bytes, identical = {a == b}")
