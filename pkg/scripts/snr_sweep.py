"""LDME template-projection SNR enhancement and detection delay across input SNR levels.

    python scripts/snr_sweep.py --snr -10,-5,0,5 --seeds 1-10
"""
import argparse
from dataclasses import replace

import numpy as np

from ldme.bench import censored_cd, series_snr_enhancement
from ldme.pipeline import load_config, run_method
from ldme.simulator import generate_series


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--snr", default="-10,-5,0,5")
    ap.add_argument("--seeds", default="1-10")
    args = ap.parse_args()

    lo, _, hi = args.seeds.partition("-")
    seeds = range(int(lo), int(hi or lo) + 1)
    cfg = load_config(args.config)
    print(f"{'input dB':>8} {'enh dB':>8} {'c_d':>7}")
    for snr in (float(s) for s in args.snr.split(",")):
        enh, cd = [], []
        for seed in seeds:
            sim = replace(cfg.simulator, seed=seed, noise=replace(cfg.simulator.noise, snr_db=snr))
            series = generate_series(sim)
            enh.append(series_snr_enhancement(series, "ldme", cfg))
            cd.append(censored_cd(run_method(series, "ldme", cfg)[0], sim.n_cycles))
        print(f"{snr:8.1f} {np.median(enh):8.2f} {np.median(cd):7.1f}", flush=True)


if __name__ == "__main__":
    main()
