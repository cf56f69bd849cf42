"""End-to-end orchestration: configs, per-cycle processing, detection, artifacts.

Processing runs on the whole (cycles x samples) matrix at once; the detector
then consumes the indicator records strictly in cycle order.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
import json
import os
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .anomaly import DetectionReport, DetectorConfig, run_detector
from .core_dsp import analytic_envelope, envelope_spectrum
from .denoise import DenoiseConfig, dual_path_denoise
from .enhance import STAGES, EnhanceConfig, enhance
from .indicators import CiRecord, KinematicsSpec, adaptive_modulation, ci_arrays, cycle_spectrum, write_ci_csv
from .io import atomic_write_text, ingest, write_columns_csv
from .simulator import CycleSeries, SimulatorConfig

METHODS = ("ldme", "ht_tsa", "planet_tsa")


class StageError(RuntimeError):
    """A processing stage failed; carries the stage name and the first offending cycle."""

    def __init__(self, stage: str, cycle, cause: Exception):
        super().__init__(f"stage {stage!r} failed at cycle {cycle}: {cause}")
        self.stage, self.cycle = stage, cycle


@dataclass
class PipelineConfig:
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)
    enhance: EnhanceConfig = field(default_factory=EnhanceConfig)
    kinematics: KinematicsSpec = field(default_factory=KinematicsSpec)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    simulator: SimulatorConfig = field(default_factory=SimulatorConfig)
    tsa_averages: int = 1
    modulation_gamma: float = 1.0
    data_format: str = "csv_dir"
    write_reconstructed: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["simulator"] = self.simulator.to_dict()
        return d


_SECTIONS = {
    "denoise": DenoiseConfig,
    "enhance": EnhanceConfig,
    "kinematics": KinematicsSpec,
    "detector": DetectorConfig,
    "simulator": SimulatorConfig,
}


def config_from_dict(raw: dict) -> PipelineConfig:
    """Build a config from nested key/value sections, rejecting unknown keys."""
    kwargs = {}
    top = {f.name for f in fields(PipelineConfig)}
    for key, value in raw.items():
        if key not in top:
            raise KeyError(f"unknown config key {key!r}")
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise KeyError(f"config section [{key}] must be a table")
            cls = _SECTIONS[key]
            allowed = {f.name for f in fields(cls)}
            extra = set(value) - allowed
            if extra:
                raise KeyError(f"unknown key(s) {sorted(extra)} in [{key}]")
            kwargs[key] = cls(**value)
        else:
            kwargs[key] = value
    cfg = PipelineConfig(**kwargs)
    seed = os.environ.get("LDME_SEED")
    if seed:
        cfg.simulator.seed = int(seed)
    return cfg


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return config_from_dict({})
    with open(path, "rb") as fh:
        return config_from_dict(tomllib.load(fh))


def _rolling_mean(X: np.ndarray, window: int) -> np.ndarray:
    if window == 1:
        return X
    cs = np.cumsum(X, axis=0)
    out = cs.copy()
    out[window:] = cs[window:] - cs[:-window]
    counts = np.minimum(np.arange(1, X.shape[0] + 1), window)[:, None]
    return out / counts


def tsa_envelopes(X: np.ndarray, averages: int = 1) -> np.ndarray:
    """Batched HT-TSA: rolling mean over the last ``averages`` cycles, then envelope."""
    return np.asarray(analytic_envelope(_rolling_mean(X, averages)))


def planet_fold(X: np.ndarray, n_planets: int) -> np.ndarray:
    """Average the P consecutive planet-pass windows of each record (tail samples dropped)."""
    if n_planets == 1:
        return X
    w = X.shape[-1] // n_planets
    return X[..., : w * n_planets].reshape(*X.shape[:-1], n_planets, w).mean(axis=-2)


def records_from_envelopes(env: np.ndarray, fs: float, kin: KinematicsSpec, cycles) -> list[CiRecord]:
    spec = cycle_spectrum(env, sample_rate_hz=fs)
    ci1, ci2 = ci_arrays(spec, kin)
    return [CiRecord(int(c), float(a), float(b)) for c, a, b in zip(cycles, ci1, ci2)]


def _stage(name, fn, *args, cycles=None, **kw):
    try:
        return fn(*args, **kw)
    except Exception as e:  # re-raised with location
        raise StageError(name, _first_bad_cycle(args, cycles), e) from e


def _first_bad_cycle(args, cycles):
    for a in args:
        if isinstance(a, np.ndarray) and a.ndim == 2 and cycles is not None:
            bad = np.flatnonzero(~np.isfinite(a).all(axis=1))
            if bad.size:
                return int(cycles[bad[0]])
            rms = np.sqrt(np.mean((a - a.mean(axis=1, keepdims=True)) ** 2, axis=1))
            bad = np.flatnonzero(rms == 0)
            if bad.size:
                return int(cycles[bad[0]])
    return "unknown"


def ldme_signals(X: np.ndarray, cfg: PipelineConfig, disabled=frozenset(), cycles=None) -> np.ndarray:
    """Denoise + enhance every row of X (before HT-TSA)."""
    y = _stage("denoise", dual_path_denoise, X, cfg.denoise, cycles=cycles,
               wavelet_path="wavelet_path" not in disabled, sg_path="sg_path" not in disabled)
    return _stage("enhance", enhance, y, cfg.denoise, cfg.enhance, disabled, cycles=cycles)


def method_signals(series: CycleSeries, method: str, cfg: PipelineConfig, disabled=frozenset()) -> np.ndarray:
    X = series.samples
    if method == "ldme":
        return ldme_signals(X, cfg, disabled, series.cycles)
    if method == "ht_tsa":
        return X
    if method == "planet_tsa":
        return planet_fold(X, cfg.kinematics.n_planets)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def method_records(series: CycleSeries, method: str, cfg: PipelineConfig, disabled=frozenset()):
    cfg.kinematics.check_nyquist(series.sample_rate_hz)
    U = method_signals(series, method, cfg, disabled)
    env = _stage("ht_tsa", tsa_envelopes, U, cfg.tsa_averages, cycles=series.cycles)
    recs = _stage("indicators", records_from_envelopes, env, series.sample_rate_hz, cfg.kinematics,
                  series.cycles, cycles=series.cycles)
    return U, recs


def run_method(series: CycleSeries, method: str, cfg: PipelineConfig, disabled=frozenset()):
    """Return (report, scored records, processed signals) for one method on one series."""
    unknown = set(disabled) - STAGES
    if unknown:
        raise ValueError(f"unknown stages {sorted(unknown)}")
    U, recs = method_records(series, method, cfg, disabled)
    report, scored = _stage("detector", run_detector, recs, cfg.detector, series.labels)
    return report, scored, U


def modulate(U: np.ndarray, scored: list[CiRecord], cfg: PipelineConfig) -> np.ndarray:
    """CCI-driven gain per cycle against the calibration-window median CCI."""
    h = cfg.detector.calibration_cycles
    ref = float(np.median([r.cci for r in scored[:h]]))
    return np.vstack([
        np.asarray(adaptive_modulation(u, r.cci, ref, cfg.modulation_gamma)) for u, r in zip(U, scored)
    ])


def report_dict(report: DetectionReport, cfg: PipelineConfig, method: str, extra: dict | None = None) -> dict:
    d = {"method": method, **report.summary(), "config": cfg.to_dict()}
    if extra:
        d.update(extra)
    return d


def run_pipeline(cfg: PipelineConfig, data_dir, out_dir, series: CycleSeries | None = None) -> DetectionReport:
    """Run LDME on a dataset directory and write the artifact set into ``out_dir``.

    Outputs: report.json, ci_trace.csv, score_trace.csv, envelope_spectrum_last.csv,
    and reconstructed.npy when ``write_reconstructed`` is set.  Nothing is
    written if any stage fails.
    """
    if series is None:
        series = ingest(data_dir, cfg.data_format)
    report, scored, U = run_method(series, "ldme", cfg)
    # everything is computed before the first file is written
    last = envelope_spectrum(U[-1], sample_rate_hz=series.sample_rate_hz)
    recon = modulate(U, scored, cfg) if cfg.write_reconstructed else None
    payload = report_dict(report, cfg, "ldme", {
        "data": str(data_dir),
        "score_trace": "score_trace.csv",
        "ci_trace": "ci_trace.csv",
        "threshold": cfg.detector.mad_k,
    })
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_ci_csv(out / "ci_trace.csv", scored)
    write_columns_csv(out / "score_trace.csv", ["cycle", "score"], [report.cycles, report.scores])
    write_columns_csv(out / "envelope_spectrum_last.csv", ["frequency_hz", "magnitude"],
                      [last.frequencies, last.magnitudes])
    if recon is not None:
        np.save(out / "reconstructed.npy", recon)
    atomic_write_text(out / "report.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return report
