"""Shared numeric kernels: FFT magnitude, analytic envelope, moments, flatness.

Functions accept either a :class:`SignalSegment` or a plain array.  Arrays may
carry leading batch axes (one row per cycle); the transform runs along the last
axis.  When given a segment, the result is wrapped back into a segment that
keeps the sample rate and cycle index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DegenerateInputError(ValueError):
    """Raised when an estimator is undefined for the given data (zero variance, all-zero spectrum)."""


@dataclass(frozen=True)
class SignalSegment:
    """One cycle-synchronous vibration record."""

    samples: np.ndarray
    sample_rate_hz: float
    cycle_index: int = 0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {x.shape}")
        if x.size < 8:
            raise ValueError(f"segment needs at least 8 samples, got {x.size}")
        if not np.isfinite(x).all():
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise ValueError(f"non-finite sample at index {bad}")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if self.cycle_index < 0:
            raise ValueError(f"cycle_index must be non-negative, got {self.cycle_index}")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    def with_samples(self, samples) -> "SignalSegment":
        return SignalSegment(samples, self.sample_rate_hz, self.cycle_index)


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum on a uniform bin grid."""

    bin_hz: float
    magnitudes: np.ndarray
    n_fft: int
    frequencies: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=float)
        if mags.shape[-1] != self.n_fft // 2 + 1:
            raise ValueError(
                f"expected {self.n_fft // 2 + 1} bins for n_fft={self.n_fft}, got {mags.shape[-1]}"
            )
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "frequencies", np.arange(mags.shape[-1]) * self.bin_hz)

    def scaled(self, a: float) -> "Spectrum":
        return Spectrum(self.bin_hz, a * self.magnitudes, self.n_fft)


def as_array(x) -> np.ndarray:
    """Samples of ``x`` as a float array, rejecting NaN/Inf."""
    arr = np.asarray(x.samples if isinstance(x, SignalSegment) else x, dtype=float)
    if not np.isfinite(arr).all():
        idx = np.argwhere(~np.isfinite(arr))[0]
        raise ValueError(f"non-finite input value at index {tuple(int(i) for i in idx)}")
    return arr


def rewrap(template, out: np.ndarray):
    if isinstance(template, SignalSegment):
        return template.with_samples(out)
    return out


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def fft_magnitude(seg, n_fft: int | None = None, sample_rate_hz: float | None = None) -> Spectrum:
    """Rectangular-window one-sided magnitude spectrum ``|X[k]|``, k = 0..n_fft/2.

    ``n_fft`` defaults to the next power of two at or above the segment length;
    the input is zero-padded to that length.  Magnitudes are unscaled DFT
    moduli, so Parseval reads ``sum(x**2) == sum(|X|**2 over both sides) / n_fft``.
    """
    x = as_array(seg)
    fs = seg.sample_rate_hz if isinstance(seg, SignalSegment) else sample_rate_hz
    if fs is None:
        raise ValueError("sample_rate_hz is required for array input")
    n = x.shape[-1]
    if n_fft is None:
        n_fft = next_pow2(n)
    if n_fft < n or n_fft & (n_fft - 1):
        raise ValueError(f"n_fft must be a power of two >= {n}, got {n_fft}")
    mags = np.abs(np.fft.rfft(x, n=n_fft, axis=-1))
    return Spectrum(fs / n_fft, mags, n_fft)


def _analytic(x: np.ndarray) -> np.ndarray:
    # one-sided spectrum doubling: keep DC (and Nyquist for even n), double positive bins
    n = x.shape[-1]
    X = np.fft.fft(x, axis=-1)
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1 : n // 2] = 2.0
    else:
        h[1 : (n + 1) // 2] = 2.0
    return np.fft.ifft(X * h, axis=-1)


def analytic_envelope(seg):
    """Modulus of the analytic signal ``|x + i H{x}|``, same length as the input."""
    x = as_array(seg)
    if x.shape[-1] < 8:
        raise ValueError(f"envelope needs at least 8 samples, got {x.shape[-1]}")
    return rewrap(seg, np.abs(_analytic(x)))


def envelope_spectrum(seg, n_fft: int | None = None, sample_rate_hz: float | None = None) -> Spectrum:
    """Magnitude spectrum of the mean-removed analytic envelope."""
    env = np.asarray(analytic_envelope(as_array(seg)))
    env = env - env.mean(axis=-1, keepdims=True)
    fs = seg.sample_rate_hz if isinstance(seg, SignalSegment) else sample_rate_hz
    return fft_magnitude(env, n_fft, sample_rate_hz=fs)


def kurtosis(window) -> float:
    """Biased moment-ratio kurtosis m4 / m2**2 (Gaussian -> 3)."""
    x = as_array(window).ravel()
    if x.size < 4:
        raise ValueError(f"kurtosis needs at least 4 values, got {x.size}")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 <= 0.0:
        raise DegenerateInputError("degenerate window: zero variance")
    return float(np.mean(d**4) / m2**2)


def spectral_flatness(spec: Spectrum | np.ndarray, floor: float = 1e-30) -> float:
    """Geometric over arithmetic mean of power; zero-power bins are floored at ``floor``."""
    mags = spec.magnitudes if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    power = np.asarray(mags, dtype=float).ravel() ** 2
    if not np.any(power > 0):
        raise DegenerateInputError("spectral flatness undefined for an all-zero spectrum")
    arith = power.mean()
    geo = np.exp(np.mean(np.log(np.maximum(power, floor))))
    return float(min(1.0, geo / arith))
