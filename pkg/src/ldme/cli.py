"""Command-line entry point: simulate, analyze, bench, ablate, envspec."""
from __future__ import annotations

import argparse
import json
from pathlib import Path
import sys

import numpy as np

from .bench import ablation, compare, comparison_rows, write_tables
from .core_dsp import SignalSegment, envelope_spectrum
from .enhance import STAGES
from .io import IngestError, atomic_write_text, ingest, read_cycle_csv, write_columns_csv
from .pipeline import METHODS, StageError, load_config, run_pipeline
from .simulator import generate_dataset


class UsageError(Exception):
    pass


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _runs_json(runs) -> str:
    payload = [
        {"method": r.method, "dataset": r.dataset_id, **r.report.summary(),
         "snr_enh_db": r.snr_enh_db, "disabled": sorted(r.disabled), "flags": r.flags}
        for r in runs
    ]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_simulate(args, cfg):
    series = generate_dataset(cfg.simulator, args.out)
    print(f"wrote {len(series)} cycles to {args.out}")


def cmd_analyze(args, cfg):
    report = run_pipeline(cfg, args.data, args.out)
    print(json.dumps(report.summary()))


def cmd_bench(args, cfg):
    methods = _split(args.methods)
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"--methods must list some of {','.join(METHODS)}; got {args.methods!r}")
    series = ingest(args.data, cfg.data_format)
    runs = compare(series, cfg, methods, dataset_id=str(args.data))
    rows = comparison_rows(runs)
    write_tables(rows, args.out, "comparison")
    atomic_write_text(Path(args.out) / "runs.json", _runs_json(runs))
    for r in rows:
        print(f"{r['method']}: c_d={r['c_d']} c_m={r['c_m']}")


def cmd_ablate(args, cfg):
    items = []
    for tok in _split(args.disable):
        group = frozenset(tok.split("+"))
        unknown = group - STAGES
        if unknown:
            raise UsageError(f"unknown stage(s) {sorted(unknown)}; choose from {','.join(sorted(STAGES))}")
        items.append(group)
    series = ingest(args.data, cfg.data_format)
    runs = ablation(series, cfg, [frozenset()] + items, dataset_id=str(args.data))
    rows = comparison_rows(runs)
    write_tables(rows, args.out, "ablation")
    atomic_write_text(Path(args.out) / "runs.json", _runs_json(runs))
    for r in rows:
        print(f"{r['method']}: c_d={r['c_d']}")


def cmd_envspec(args, cfg):
    x, fs_file = read_cycle_csv(args.input)
    fs = args.fs or fs_file
    if fs is None:
        raise UsageError("sample rate unknown: pass --fs or add an fs_hz header")
    spec = envelope_spectrum(SignalSegment(x, float(fs)))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_columns_csv(out, ["frequency_hz", "magnitude"], [spec.frequencies, spec.magnitudes])
    peak = int(np.argmax(spec.magnitudes[1:])) + 1
    print(f"peak {spec.frequencies[peak]:.3f} Hz (bin {peak}, resolution {spec.bin_hz:.4f} Hz)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldme", description="LDME early fault detection toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("simulate", cmd_simulate, "generate a synthetic gearbox dataset")
    sp.add_argument("--config")
    sp.add_argument("--out", required=True)

    sp = add("analyze", cmd_analyze, "run the LDME pipeline on a dataset")
    sp.add_argument("--config")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)

    sp = add("bench", cmd_bench, "compare LDME with the TSA baselines")
    sp.add_argument("--config")
    sp.add_argument("--data", required=True)
    sp.add_argument("--methods", default=",".join(METHODS))
    sp.add_argument("--out", required=True)

    sp = add("ablate", cmd_ablate, "rerun LDME with stages replaced by identity")
    sp.add_argument("--config")
    sp.add_argument("--data", required=True)
    sp.add_argument("--disable", required=True,
                    help="comma-separated stages, one run each; join with '+' to disable together")
    sp.add_argument("--out", required=True)

    sp = add("envspec", cmd_envspec, "envelope spectrum of a single record")
    sp.add_argument("--input", required=True)
    sp.add_argument("--fs", type=float)
    sp.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(getattr(args, "config", None))
    except (KeyError, TypeError, ValueError) as e:
        parser.print_usage(sys.stderr)
        print(f"ldme: invalid config: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"ldme: cannot read config: {e}", file=sys.stderr)
        return 2
    try:
        args.func(args, cfg)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"ldme: {e}", file=sys.stderr)
        return 2
    except (IngestError, StageError, OSError, ValueError) as e:
        print(f"ldme: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
