"""Dataset ingestion and atomic artifact writing."""
from __future__ import annotations

import json
import os
from pathlib import Path
import tempfile

import numpy as np

from .simulator import CycleSeries

CSV_LAYOUT = "a directory of cycle_*.csv files (header 'fs_hz=<rate>', one sample per row) with optional manifest.json"
RAW_LAYOUT = "a .f32/.f64 binary file with a sidecar <file>.json holding sample_rate_hz, samples_per_cycle, n_cycles"


class IngestError(ValueError):
    pass


def atomic_write_text(path, text: str):
    """Write to a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(v: float) -> str:
    return "%.17g" % v


def write_cycle_csv(path, samples, sample_rate_hz: float):
    lines = [f"fs_hz={format_float(sample_rate_hz)}"]
    lines.extend(format_float(v) for v in np.asarray(samples, dtype=float))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_columns_csv(path, header: list[str], columns):
    rows = [",".join(header)]
    for vals in zip(*columns):
        rows.append(",".join(str(v) if isinstance(v, (int, np.integer)) else format_float(v) for v in vals))
    atomic_write_text(path, "\n".join(rows) + "\n")


def read_cycle_csv(path) -> tuple[np.ndarray, float | None]:
    fs = None
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if lineno == 1 and not _is_number(s.split(",")[0]):
                if s.startswith("fs_hz="):
                    fs = float(s.split("=", 1)[1])
                continue
            try:
                v = float(s.split(",")[0])
            except ValueError:
                raise IngestError(f"{path}: row {lineno}: cannot parse {s!r}") from None
            if not np.isfinite(v):
                raise IngestError(f"{path}: row {lineno}: non-finite sample {s!r}")
            values.append(v)
    return np.array(values), fs


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def ingest(path, fmt: str = "csv_dir", sample_rate_hz: float | None = None) -> CycleSeries:
    """Load cycles from a csv directory or a raw float32/float64 file with sidecar metadata."""
    p = Path(path)
    if not p.exists():
        raise IngestError(f"{p} does not exist; expected {CSV_LAYOUT if fmt == 'csv_dir' else RAW_LAYOUT}")
    if fmt == "csv_dir":
        return _ingest_csv_dir(p, sample_rate_hz)
    if fmt in ("raw_f32", "raw_f64"):
        return _ingest_raw(p, np.float32 if fmt == "raw_f32" else np.float64)
    raise IngestError(f"unknown format {fmt!r}; use csv_dir, raw_f32 or raw_f64")


def _ingest_csv_dir(p: Path, sample_rate_hz):
    files = sorted(p.glob("cycle_*.csv"))
    if not files:
        raise IngestError(f"no cycle_*.csv files in {p}; expected {CSV_LAYOUT}")
    manifest = None
    if (p / "manifest.json").exists():
        manifest = json.loads((p / "manifest.json").read_text())
    rows, cycles, rates = [], [], set()
    n = None
    for f in files:
        x, fs = read_cycle_csv(f)
        if n is None:
            n = x.size
        elif x.size != n:
            raise IngestError(f"{f.name} has {x.size} samples, expected {n} like the first cycle file")
        if fs is not None:
            rates.add(fs)
        rows.append(x)
        try:
            cycles.append(int(f.stem.split("_", 1)[1]))
        except ValueError:
            raise IngestError(f"cannot read a cycle number from file name {f.name}") from None
    if len(rates) > 1:
        raise IngestError(f"cycle files disagree on sample rate: {sorted(rates)}")
    fs = sample_rate_hz or (rates.pop() if rates else None) or (manifest or {}).get("sample_rate_hz")
    if fs is None:
        raise IngestError("sample rate missing: add an fs_hz header, a manifest, or pass it explicitly")
    labels = None
    if manifest and "labels" in manifest and len(manifest["labels"]) == len(rows):
        labels = np.array([lab == "faulty" for lab in manifest["labels"]])
    return CycleSeries(np.vstack(rows), float(fs), np.array(cycles), labels, manifest)


def _ingest_raw(p: Path, dtype):
    side = p.with_suffix(p.suffix + ".json")
    if not side.exists():
        side = p.with_suffix(".json")
    if not side.exists():
        raise IngestError(f"missing sidecar metadata for {p}; expected {RAW_LAYOUT}")
    meta = json.loads(side.read_text())
    try:
        fs, n, c = float(meta["sample_rate_hz"]), int(meta["samples_per_cycle"]), int(meta["n_cycles"])
    except KeyError as e:
        raise IngestError(f"{side}: missing key {e.args[0]!r}") from None
    data = np.fromfile(p, dtype=dtype).astype(float)
    if data.size != n * c:
        raise IngestError(f"{p}: {data.size} values, metadata promises {c} x {n}")
    X = data.reshape(c, n)
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        raise IngestError(f"{p}: non-finite sample at cycle row {bad[0][0]}, offset {bad[0][1]}")
    labels = meta.get("labels")
    if labels is not None:
        labels = np.array([lab == "faulty" for lab in labels])
    return CycleSeries(X, fs, np.arange(1, c + 1), labels, meta)
