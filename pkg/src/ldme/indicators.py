"""Cycle spectrum (HT-TSA), harmonic condition indicators and CCI gain modulation."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core_dsp import SignalSegment, Spectrum, analytic_envelope, as_array, fft_magnitude, rewrap


@dataclass
class KinematicsSpec:
    """Machine constants.  Harmonics k * fund_hz, k = 1..2 * n_tooth, feed CI1."""

    n_tooth: int = 16
    fund_hz: float = 23.4375
    shaft_hz: float = 23.4375
    char_coeffs: dict = field(default_factory=lambda: {"BPFI": 5.415, "BSF": 4.714, "BPFO": 3.585})
    n_planets: int = 3

    def __post_init__(self):
        if self.n_tooth < 2:
            raise ValueError(f"n_tooth must be >= 2, got {self.n_tooth}")
        if not self.fund_hz > 0:
            raise ValueError(f"fund_hz must be positive, got {self.fund_hz}")
        if self.n_planets < 1:
            raise ValueError(f"n_planets must be >= 1, got {self.n_planets}")

    @property
    def max_harmonic_hz(self) -> float:
        return 2 * self.n_tooth * self.fund_hz

    def fault_frequency(self, kind: str) -> float:
        return self.char_coeffs[kind] * self.shaft_hz

    def check_nyquist(self, sample_rate_hz: float):
        if self.max_harmonic_hz >= sample_rate_hz / 2:
            raise ValueError(
                f"harmonic range 2*{self.n_tooth}*{self.fund_hz} Hz = {self.max_harmonic_hz} Hz "
                f"exceeds Nyquist {sample_rate_hz / 2} Hz"
            )


@dataclass(frozen=True)
class CiRecord:
    cycle_index: int
    ci1: float
    ci2: float
    score: float | None = None

    def __post_init__(self):
        if self.ci1 < 0:
            raise ValueError(f"ci1 must be non-negative, got {self.ci1}")
        if not 0.0 <= self.ci2 <= 1.0:
            raise ValueError(f"ci2 must lie in [0, 1], got {self.ci2}")

    @property
    def cci(self) -> float:
        return (self.ci1 + self.ci2) / 2

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.ci1, self.ci2])

    def with_score(self, s: float) -> "CiRecord":
        return CiRecord(self.cycle_index, self.ci1, self.ci2, s)


def ht_tsa(segments, averages: int = 1):
    """Sample-wise mean of the last ``averages`` segments, then its analytic envelope."""
    if averages < 1:
        raise ValueError(f"averages must be >= 1, got {averages}")
    if isinstance(segments, SignalSegment) or (isinstance(segments, np.ndarray) and segments.ndim == 1):
        segments = [segments]
    segs = list(segments)[-averages:]
    if not segs:
        raise ValueError("no segments to average")
    arrs = [as_array(s) for s in segs]
    lengths = {a.shape[-1] for a in arrs}
    if len(lengths) > 1:
        raise ValueError(f"segments differ in length: {sorted(lengths)}")
    avg = arrs[0] if len(arrs) == 1 else np.mean(arrs, axis=0)
    return rewrap(segs[-1], np.asarray(analytic_envelope(avg)))


def cycle_spectrum(tsa_out, sample_rate_hz: float | None = None, n_fft: int | None = None) -> Spectrum:
    """Magnitude spectrum of the mean-removed, unit-RMS record."""
    x = as_array(tsa_out)
    x = x - x.mean(axis=-1, keepdims=True)
    rms = np.sqrt(np.mean(x * x, axis=-1, keepdims=True))
    if np.any(rms <= 0):
        raise ValueError("cycle spectrum undefined for a zero-RMS record")
    fs = tsa_out.sample_rate_hz if isinstance(tsa_out, SignalSegment) else sample_rate_hz
    return fft_magnitude(x / rms, n_fft, sample_rate_hz=fs)


def harmonic_bins(spec: Spectrum, kin: KinematicsSpec) -> np.ndarray:
    nyq = spec.bin_hz * (spec.n_fft // 2)
    if kin.max_harmonic_hz > nyq:
        raise ValueError(f"harmonic range {kin.max_harmonic_hz} Hz exceeds spectrum limit {nyq} Hz")
    k = np.arange(1, 2 * kin.n_tooth + 1)
    return np.rint(k * kin.fund_hz / spec.bin_hz).astype(int)


def ci_arrays(spec: Spectrum, kin: KinematicsSpec) -> tuple[np.ndarray, np.ndarray]:
    """CI1 and CI2 for a (possibly batched) spectrum.

    Each harmonic is the largest magnitude within +-1 bin of k * fund_hz.  The
    CI2 denominator sums all bins except DC.
    """
    mags = spec.magnitudes
    centres = harmonic_bins(spec, kin)
    last = mags.shape[-1] - 1
    nb = np.clip(centres[:, None] + np.array([-1, 0, 1])[None, :], 1, last)
    ci1 = mags[..., nb].max(axis=-1).sum(axis=-1)
    total = mags[..., 1:].sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        ci2 = np.where(total > 0, ci1 / np.where(total > 0, total, 1.0), 0.0)
    # neighbouring windows can overlap when harmonics sit < 3 bins apart
    return ci1, np.clip(ci2, 0.0, 1.0)


def compute_ci(spec: Spectrum, kin: KinematicsSpec, cycle_index: int = 0) -> CiRecord:
    ci1, ci2 = ci_arrays(spec, kin)
    return CiRecord(int(cycle_index), float(ci1), float(ci2))


def adaptive_modulation(seg, cci: float, reference_cci: float, gamma: float = 1.0):
    """Scale by 1 + gamma * max(0, cci / reference - 1); a pure gain."""
    if not reference_cci > 0:
        raise ValueError(f"reference_cci must be positive, got {reference_cci}")
    gain = 1.0 + gamma * max(0.0, cci / reference_cci - 1.0)
    return rewrap(seg, as_array(seg) * gain)


def write_ci_csv(path, records: Iterable[CiRecord]):
    from .io import atomic_write_text

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cycle", "ci1", "ci2", "cci", "score"])
    for r in records:
        w.writerow([r.cycle_index, repr(r.ci1), repr(r.ci2), repr(r.cci), "" if r.score is None else repr(r.score)])
    atomic_write_text(path, buf.getvalue())


def read_ci_csv(path) -> list[CiRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(CiRecord(int(row["cycle"]), float(row["ci1"]), float(row["ci2"]),
                                float(row["score"]) if row["score"] else None))
    return out
