"""Dual-path denoising: wavelet shrinkage and Savitzky-Golay smoothing, plus fusion."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .core_dsp import DegenerateInputError, as_array, fft_magnitude, kurtosis, rewrap, spectral_flatness
from .wavelets import FILTERS, dwt, idwt, max_levels

MAD_NORMAL = 0.6745


@dataclass
class DenoiseConfig:
    wavelet_family: str = "sym8"
    decomposition_levels: int | None = None  # None -> default_levels(N)
    threshold_mode: str = "soft"
    sg_half_window: int = 3
    sg_poly_order: int = 3
    fusion_mode: str = "fixed"
    fixed_weights: tuple[float, float] = (0.4, 1.6)
    log_base: float = math.e  # 'e' accepted in config files
    adaptive_a: float = 0.5
    adaptive_b: float = 1.0

    def __post_init__(self):
        self.fixed_weights = tuple(float(w) for w in self.fixed_weights)
        if self.log_base == "e":
            self.log_base = math.e
        if not (isinstance(self.log_base, (int, float)) and self.log_base > 1):
            raise ValueError(f"log_base must be 'e' or a number > 1, got {self.log_base!r}")
        if self.wavelet_family not in FILTERS:
            raise ValueError(f"unsupported wavelet family {self.wavelet_family!r}")
        if self.threshold_mode not in ("soft", "hard"):
            raise ValueError(f"threshold_mode must be 'soft' or 'hard', got {self.threshold_mode!r}")
        if self.fusion_mode not in ("fixed", "adaptive"):
            raise ValueError(f"fusion_mode must be 'fixed' or 'adaptive', got {self.fusion_mode!r}")
        if not 2 * self.sg_half_window + 1 > self.sg_poly_order >= 0:
            raise ValueError("Savitzky-Golay needs 2m+1 > p >= 0")
        if self.fusion_mode == "fixed" and abs(sum(self.fixed_weights) - 2.0) > 1e-12:
            raise ValueError(f"fixed fusion weights must sum to 2, got {self.fixed_weights}")
        if self.decomposition_levels is not None and self.decomposition_levels < 1:
            raise ValueError("decomposition_levels must be >= 1")

    def levels_for(self, n: int) -> int:
        if self.decomposition_levels is None:
            return default_levels(n, self.wavelet_family)
        if self.decomposition_levels > int(math.log2(n)) - 2:
            raise ValueError(f"{self.decomposition_levels} levels too deep for length {n}")
        return self.decomposition_levels


def default_levels(n: int, family: str = "sym8") -> int:
    return max(1, min(5, int(math.log2(n)) - 3, max_levels(n, family)))


def noise_sigma(detail_level_1) -> float:
    """Robust noise scale median(|d1|) / 0.6745."""
    d = np.asarray(detail_level_1, dtype=float)
    if d.size == 0:
        raise ValueError("empty detail band")
    if d.shape[-1] < 8:
        raise ValueError(f"noise estimate needs at least 8 coefficients, got {d.shape[-1]}")
    return np.median(np.abs(d), axis=-1) / MAD_NORMAL if d.ndim > 1 else float(np.median(np.abs(d)) / MAD_NORMAL)


def universal_threshold(sigma, n: int, log_base: float = math.e):
    return sigma * np.sqrt(2.0 * math.log(n) / math.log(log_base))


def threshold(d, t, mode: str = "soft") -> np.ndarray:
    d = np.asarray(d, dtype=float)
    t = np.asarray(t, dtype=float)[..., None] if np.ndim(t) else t
    if mode == "soft":
        return np.sign(d) * np.maximum(np.abs(d) - t, 0.0)
    if mode == "hard":
        return np.where(np.abs(d) > t, d, 0.0)
    raise ValueError(f"unknown threshold mode {mode!r}")


def wavelet_denoise(seg, cfg: DenoiseConfig | None = None):
    """Shrink every detail band with T = sigma * sqrt(2 ln N); sigma from level-1 details."""
    cfg = cfg or DenoiseConfig()
    x = as_array(seg)
    n = x.shape[-1]
    coeffs = dwt(x, cfg.wavelet_family, cfg.levels_for(n))
    t = universal_threshold(noise_sigma(coeffs.details[0]), n, cfg.log_base)
    coeffs.details = [threshold(d, t, cfg.threshold_mode) for d in coeffs.details]
    return rewrap(seg, idwt(coeffs))


@lru_cache(maxsize=32)
def _sg_solve(m: int, p: int) -> np.ndarray:
    offsets = np.arange(-m, m + 1, dtype=float)
    A = np.vander(offsets, p + 1, increasing=True)
    # pseudo-inverse rows map window samples to polynomial coefficients
    pinv = np.linalg.solve(A.T @ A, A.T)
    pinv.setflags(write=False)
    return pinv


def sg_coefficients(m: int, p: int) -> np.ndarray:
    """Central smoothing kernel of length 2m+1 (symmetric, so correlation == convolution)."""
    if not 2 * m + 1 > p >= 0:
        raise ValueError(f"Savitzky-Golay needs 2m+1 > p >= 0, got m={m}, p={p}")
    return _sg_solve(m, p)[0].copy()


def sg_filter(seg, m: int = 3, p: int = 3):
    """Savitzky-Golay smoothing.

    Interior samples use the central kernel.  The first and last m samples are
    read off the least-squares polynomial fitted to the edge window, so
    polynomials of degree <= p pass through unchanged everywhere.
    """
    x = as_array(seg)
    w = 2 * m + 1
    n = x.shape[-1]
    if n < w:
        raise ValueError(f"input of length {n} shorter than window {w}")
    pinv = _sg_solve(m, p)
    kernel = pinv[0]
    out = np.empty_like(x)
    windows = np.lib.stride_tricks.sliding_window_view(x, w, axis=-1)
    out[..., m : n - m] = windows @ kernel
    offsets = np.arange(-m, m + 1, dtype=float)
    V = np.vander(offsets, p + 1, increasing=True)
    proj = V @ pinv  # fitted values at each window position
    out[..., :m] = x[..., :w] @ proj[:m].T
    out[..., n - m :] = x[..., n - w :] @ proj[m + 1 :].T
    return rewrap(seg, out)


def adaptive_alpha(raw, cfg: DenoiseConfig) -> np.ndarray:
    """Per-segment wavelet weight from kurtosis and spectral flatness of the raw record."""
    x = np.atleast_2d(as_array(raw))
    alphas = []
    for row in x:
        try:
            k = kurtosis(row)
            f = spectral_flatness(fft_magnitude(row, sample_rate_hz=1.0))
        except DegenerateInputError:
            k, f = 3.0, 1.0
        z = cfg.adaptive_a * (k - 3.0) + cfg.adaptive_b * (1.0 - f)
        alphas.append(1.0 / (1.0 + math.exp(-z)))
    return np.asarray(alphas).reshape(np.shape(as_array(raw))[:-1])


def fuse(y_wavelet, y_sg, cfg: DenoiseConfig | None = None, raw=None, alpha=None):
    """Combine the two paths.

    Fixed mode: (w1 * Yw + w2 * Ysg) / 2 with (w1, w2) = cfg.fixed_weights.
    Adaptive mode: alpha * Yw + (1 - alpha) * Ysg, alpha from :func:`adaptive_alpha`
    of ``raw`` unless given explicitly.
    """
    cfg = cfg or DenoiseConfig()
    yw, ys = as_array(y_wavelet), as_array(y_sg)
    if yw.shape != ys.shape:
        raise ValueError(f"path length mismatch: {yw.shape} vs {ys.shape}")
    if cfg.fusion_mode == "fixed":
        w1, w2 = cfg.fixed_weights
        out = (w1 * yw + w2 * ys) / 2.0
    else:
        if alpha is None:
            if raw is None:
                raise ValueError("adaptive fusion needs the raw segment or an explicit alpha")
            alpha = adaptive_alpha(raw, cfg)
        a = np.asarray(alpha, dtype=float)[..., None] if np.ndim(alpha) else float(alpha)
        out = a * yw + (1.0 - a) * ys
    return rewrap(y_wavelet, out)


def dual_path_denoise(seg, cfg: DenoiseConfig | None = None, *, wavelet_path: bool = True, sg_path: bool = True):
    """Both paths plus fusion; a disabled path is replaced by the raw input."""
    cfg = cfg or DenoiseConfig()
    x = as_array(seg)
    if not (wavelet_path or sg_path):
        return rewrap(seg, x.copy())
    yw = np.asarray(wavelet_denoise(x, cfg)) if wavelet_path else x
    ys = np.asarray(sg_filter(x, cfg.sg_half_window, cfg.sg_poly_order)) if sg_path else x
    return rewrap(seg, fuse(yw, ys, cfg, raw=x))
