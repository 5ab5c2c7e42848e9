"""Slack of the exhaustive 8-bit bounds over sampled executions on the 8-bit machine."""

import argparse

import numpy as np

from energybounds.bounds import analyze
from energybounds.cfg import extract_blocks
from energybounds.corpus import CORPUS, program_inputs
from energybounds.simkernel import load_model, run_program_profile

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--samples", type=int, default=300)
ap.add_argument("--sizes", default="2,4,6,8,10,12")
args = ap.parse_args()

m = load_model()
rng = np.random.default_rng(0)
print(f"{'program':<14}{'N':>4}{'lb':>10}{'min obs':>10}{'max obs':>10}{'ub':>10}")
for name, bm in CORPUS.items():
    p = bm.program()
    cfg = extract_blocks(p)
    pair = analyze(p, m, bound_source="exhaustive", bit_width=8, word_bits=8, start=bm.min_n)
    for n in (int(s) for s in args.sizes.split(",")):
        obs = []
        for _ in range(args.samples if bm.kind == "array" else 1):
            data = [int(v) for v in rng.integers(0, 256, size=n)]
            a, mem = program_inputs(name, n, data)
            obs.append(run_program_profile(p, a, mem, m, word_bits=8, cfg=cfg).total_pJ)
        lb, ub = pair.at(n)
        flag = "" if lb <= min(obs) and max(obs) <= ub else "  VIOLATION"
        print(f"{name:<14}{n:>4}{float(lb):>10.2f}{float(min(obs)):>10.2f}"
              f"{float(max(obs)):>10.2f}{float(ub):>10.2f}{flag}")
