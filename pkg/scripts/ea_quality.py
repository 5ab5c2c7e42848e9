"""EA bound versus exhaustive extremum for every block searchable at a given bit width."""

import argparse
from fractions import Fraction

from energybounds.bounds import harness_parts
from energybounds.cfg import extract_blocks
from energybounds.corpus import CORPUS
from energybounds.evo import LOWER, UPPER, EaConfig, optimize
from energybounds.simkernel import DomainTooLarge, exhaustive_extrema, load_model

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--bits", type=int, default=10)
ap.add_argument("--seeds", type=int, default=5)
args = ap.parse_args()

m = load_model()
print(f"{'block':<22}{'min':>10}{'max':>10}{'worst lo':>10}{'worst hi':>10}  ok")
total = good = 0
for name, bm in CORPUS.items():
    for h in harness_parts(extract_blocks(bm.program())):
        if not h.inputs:
            continue
        try:
            lo, hi, _, _ = exhaustive_extrema(h, args.bits, m)
        except DomainTooLarge:
            continue
        ups, lows = [], []
        for s in range(args.seeds):
            cfg = EaConfig(rng_seed=s, gene_bits=args.bits)
            ups.append(optimize(h, m, cfg, UPPER).value_pJ)
            lows.append(optimize(h, m, cfg, LOWER).value_pJ)
        ok = min(ups) >= Fraction(99, 100) * hi and max(lows) <= Fraction(101, 100) * lo
        total += 1
        good += ok
        print(f"{name + ':' + h.id:<22}{float(lo):>10.2f}{float(hi):>10.2f}"
              f"{float(max(lows)):>10.2f}{float(min(ups)):>10.2f}  {'yes' if ok else 'NO'}")
print(f"\n{good}/{total} blocks within 1%")
