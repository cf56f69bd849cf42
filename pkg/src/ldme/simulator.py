"""Synthetic gearbox vibration with a growing impulsive crack signature.

Each cycle is mesh harmonics + A(c) * damped-resonance impulse train + AR(1)
noise.  A(c) = g * max(0, c - c0), so cycles after c0 are labelled faulty.
Noise for cycle c is drawn from a generator seeded by (seed, c), hence any
cycle can be produced independently and the output is bit-reproducible.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
import json
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .core_dsp import SignalSegment


@dataclass
class ImpulseSpec:
    resonance_hz: float = 2000.0
    damping: float = 0.02
    repetition_hz: float = 23.4375
    phase_s: float = 0.005


@dataclass
class NoiseSpec:
    snr_db: float = 0.0
    ar1: float = 0.8


@dataclass
class SimulatorConfig:
    n_cycles: int = 500
    samples_per_cycle: int = 4096
    sample_rate_hz: float = 12000.0
    mesh_fund_hz: float = 375.0
    mesh_harmonics: list = field(default_factory=lambda: [(1, 1.0, 0.0), (2, 0.5, 0.0), (3, 0.25, 0.0)])
    crack_onset_cycle: int = 250
    crack_growth: float = 0.04
    impulse: ImpulseSpec = field(default_factory=ImpulseSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 1

    def __post_init__(self):
        if isinstance(self.impulse, dict):
            self.impulse = ImpulseSpec(**self.impulse)
        if isinstance(self.noise, dict):
            self.noise = NoiseSpec(**self.noise)
        self.mesh_harmonics = [tuple(float(v) for v in h) for h in self.mesh_harmonics]
        nyq = self.sample_rate_hz / 2
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be >= 1")
        if not 1 <= self.crack_onset_cycle <= self.n_cycles:
            raise ValueError(f"crack_onset_cycle must lie in [1, {self.n_cycles}]")
        if self.crack_growth < 0:
            raise ValueError("crack_growth must be >= 0")
        if not 0 <= self.noise.ar1 < 1:
            raise ValueError("ar1 coefficient must lie in [0, 1)")
        if not 0 < self.impulse.resonance_hz < nyq:
            raise ValueError(f"resonance_hz must be below Nyquist ({nyq} Hz)")
        if not 0 < self.impulse.repetition_hz < nyq / 4:
            raise ValueError(f"repetition_hz must be below Nyquist/4 ({nyq / 4} Hz)")
        if self.samples_per_cycle < 8:
            raise ValueError("samples_per_cycle must be >= 8")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mesh_harmonics"] = [list(h) for h in self.mesh_harmonics]
        return d


def amplitude(cfg: SimulatorConfig, c) -> np.ndarray | float:
    """Crack amplitude schedule A(c) = g * max(0, c - c0)."""
    return cfg.crack_growth * np.maximum(0, np.asarray(c) - cfg.crack_onset_cycle)


def _time(cfg: SimulatorConfig) -> np.ndarray:
    return np.arange(cfg.samples_per_cycle) / cfg.sample_rate_hz


def harmonic_part(cfg: SimulatorConfig) -> np.ndarray:
    t = _time(cfg)
    out = np.zeros_like(t)
    for k, a, phi in cfg.mesh_harmonics:
        out += a * np.cos(2 * np.pi * k * cfg.mesh_fund_hz * t + phi)
    return out


def impulse_train(cfg: SimulatorConfig) -> np.ndarray:
    """Unit-amplitude train of decaying resonances exp(-zeta w t) sin(w t)."""
    imp = cfg.impulse
    t = _time(cfg)
    w = 2 * np.pi * imp.resonance_hz
    period = 1.0 / imp.repetition_hz
    # time since the most recent impact; impacts before t=0 ring into the record
    tau = np.mod(t - imp.phase_s, period)
    out = np.exp(-imp.damping * w * tau) * np.sin(w * tau)
    # tail of the previous impact (only matters for very light damping)
    out += np.exp(-imp.damping * w * (tau + period)) * np.sin(w * (tau + period))
    return out


def noise_variance(cfg: SimulatorConfig) -> float:
    """Noise variance hitting snr_db against the deterministic part at cycle C."""
    det = harmonic_part(cfg) + amplitude(cfg, cfg.n_cycles) * impulse_train(cfg)
    return float(np.var(det) / 10 ** (cfg.noise.snr_db / 10))


def noise(cfg: SimulatorConfig, c: int, variance: float | None = None) -> np.ndarray:
    """AR(1) Gaussian noise for cycle c, rescaled to the exact target sample variance."""
    var = noise_variance(cfg) if variance is None else variance
    rng = np.random.default_rng([int(cfg.seed), int(c)])
    e = rng.standard_normal(cfg.samples_per_cycle)
    rho = cfg.noise.ar1
    zi = [rho * e[0] / np.sqrt(1 - rho**2)]  # stationary start
    w = lfilter([1.0], [1.0, -rho], e, zi=zi)[0]
    w -= w.mean()
    return w * np.sqrt(var / np.var(w))


def cycle_components(cfg: SimulatorConfig, c: int, variance: float | None = None):
    """(harmonics, fault, noise) arrays for cycle c; their sum is the observed record."""
    if not 1 <= c <= cfg.n_cycles:
        raise ValueError(f"cycle index {c} outside 1..{cfg.n_cycles}")
    return harmonic_part(cfg), amplitude(cfg, c) * impulse_train(cfg), noise(cfg, c, variance)


def generate_cycle(cfg: SimulatorConfig, c: int) -> tuple[SignalSegment, str]:
    h, f, w = cycle_components(cfg, c)
    label = "faulty" if c > cfg.crack_onset_cycle and cfg.crack_growth > 0 else "healthy"
    return SignalSegment(h + f + w, cfg.sample_rate_hz, c), label


@dataclass
class CycleSeries:
    """Ordered cycles as a (C, N) array; ``cycles`` holds the 1-based indices."""

    samples: np.ndarray
    sample_rate_hz: float
    cycles: np.ndarray
    labels: np.ndarray | None = None
    manifest: dict | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.cycles = np.asarray(self.cycles, dtype=int)
        if self.samples.ndim != 2:
            raise ValueError("samples must be 2-D (cycles x samples)")
        if self.samples.shape[0] != self.cycles.size:
            raise ValueError("one cycle index per row required")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=bool)

    def __len__(self):
        return self.samples.shape[0]

    def segment(self, i: int) -> SignalSegment:
        return SignalSegment(self.samples[i], self.sample_rate_hz, int(self.cycles[i]))


def generate_series(cfg: SimulatorConfig) -> CycleSeries:
    var = noise_variance(cfg)
    h = harmonic_part(cfg)
    p = impulse_train(cfg)
    cycles = np.arange(1, cfg.n_cycles + 1)
    X = np.empty((cfg.n_cycles, cfg.samples_per_cycle))
    for i, c in enumerate(cycles):
        X[i] = h + amplitude(cfg, c) * p + noise(cfg, c, var)
    labels = (cycles > cfg.crack_onset_cycle) & (cfg.crack_growth > 0)
    return CycleSeries(X, cfg.sample_rate_hz, cycles, labels, manifest(cfg))


def manifest(cfg: SimulatorConfig) -> dict:
    cycles = np.arange(1, cfg.n_cycles + 1)
    labels = (cycles > cfg.crack_onset_cycle) & (cfg.crack_growth > 0)
    return {
        "seed": cfg.seed,
        "crack_onset_cycle": cfg.crack_onset_cycle,
        "n_cycles": cfg.n_cycles,
        "sample_rate_hz": cfg.sample_rate_hz,
        "samples_per_cycle": cfg.samples_per_cycle,
        "labels": ["faulty" if lab else "healthy" for lab in labels],
        "amplitude": [float(a) for a in amplitude(cfg, cycles)],
        "noise_variance": noise_variance(cfg),
        "config": cfg.to_dict(),
    }


def generate_dataset(cfg: SimulatorConfig, out_dir) -> CycleSeries:
    """Write ``cycle_%04d.csv`` files plus ``manifest.json`` into ``out_dir``."""
    from .io import write_cycle_csv, atomic_write_text

    series = generate_series(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for row, c in zip(series.samples, series.cycles):
        write_cycle_csv(out / f"cycle_{c:04d}.csv", row, cfg.sample_rate_hz)
    atomic_write_text(out / "manifest.json", json.dumps(series.manifest, indent=2, sort_keys=True) + "\n")
    return series
