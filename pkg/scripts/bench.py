"""Deviation report (Est/Prof/Obs) for the corpus, written as text and JSON."""

import argparse
import json
from pathlib import Path

from energybounds.cli import bench_report
from energybounds.corpus import CORPUS
from energybounds.evo import EaConfig
from energybounds.simkernel import load_model

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--seed", type=int, default=7)
ap.add_argument("--sizes", default="5,15,25")
ap.add_argument("--out", default="results")
args = ap.parse_args()

report = bench_report(list(CORPUS), [int(s) for s in args.sizes.split(",")], load_model(),
                      EaConfig(rng_seed=args.seed), seed=args.seed)
out = Path(args.out)
out.mkdir(exist_ok=True)
(out / "bench.txt").write_text(report.render())

(out / "bench.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
print(report.render(), end="")
