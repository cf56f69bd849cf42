"""Median c_d of the full LDME chain and of each single-stage ablation over many seeds.

    python scripts/ablation_sweep.py --seeds 1-20 --out results/ablation
"""
import argparse
import json
from pathlib import Path

import numpy as np

from ldme.bench import seed_sweep
from ldme.enhance import STAGES
from ldme.pipeline import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--seeds", default="1-20")
    ap.add_argument("--stages", default=",".join(sorted(STAGES)),
                    help="comma-separated; '+' disables stages together")
    ap.add_argument("--out", default="results/ablation")
    args = ap.parse_args()

    lo, _, hi = args.seeds.partition("-")
    seeds = range(int(lo), int(hi or lo) + 1)
    cfg = load_config(args.config)
    variants = {"ldme": ("ldme", ())}
    for tok in args.stages.split(","):
        variants["no_" + tok] = ("ldme", tuple(tok.split("+")))

    cds = seed_sweep(cfg, seeds, variants)
    full = float(np.median(cds["ldme"]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "per_seed.json").write_text(json.dumps({"seeds": list(seeds), **cds}, indent=2) + "\n")
    print(f"{'variant':<22} median c_d   vs full")
    for name, v in cds.items():
        med = float(np.median(v))
        print(f"{name:<22} {med:10.1f}   {med - full:+6.1f}")


if __name__ == "__main__":
    main()
