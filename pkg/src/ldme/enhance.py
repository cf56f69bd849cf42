"""Enhancement layer: wavelet band selection, Teager-Kaiser energy, Hadamard fractional sum.

The composite operator is ``hadamard_caputo(tkeo(band_select(denoised)))``; the
order is fixed.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma

from .core_dsp import as_array, rewrap
from .denoise import DenoiseConfig, dual_path_denoise
from .wavelets import WaveletCoeffs, dwt, idwt

STAGES = frozenset({"wavelet_path", "sg_path", "band_select", "tkeo", "fractional", "cci_modulation"})


@dataclass
class EnhanceConfig:
    beta: float = 0.3
    tkeo_enabled: bool = True
    band_selection: tuple[int, ...] = (2,)
    fractional_normalization: str = "unit_dc_gain"
    memory: int | None = None  # truncated memory window M; None -> full record
    periodic_warmup: bool = True

    def __post_init__(self):
        self.band_selection = tuple(int(b) for b in self.band_selection)
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.band_selection or min(self.band_selection) < 1:
            raise ValueError(f"band_selection must be a non-empty set of levels >= 1, got {self.band_selection}")
        if self.fractional_normalization not in ("unit_dc_gain", "none"):
            raise ValueError(f"unknown fractional_normalization {self.fractional_normalization!r}")
        if self.memory is not None and self.memory < 1:
            raise ValueError("memory must be >= 1")


def band_select(coeffs: WaveletCoeffs, bands, keep_approx: bool = False) -> np.ndarray:
    """Reconstruct from the chosen detail levels only (others and, by default, the approximation zeroed)."""
    bands = set(int(b) for b in bands)
    if not bands and not keep_approx:
        raise ValueError("empty band selection")
    bad = bands - set(range(1, coeffs.levels + 1))
    if bad:
        raise ValueError(f"bands {sorted(bad)} outside available levels 1..{coeffs.levels}")
    kept = WaveletCoeffs(
        coeffs.approx if keep_approx else np.zeros_like(coeffs.approx),
        [d if lv in bands else np.zeros_like(d) for lv, d in enumerate(coeffs.details, start=1)],
        coeffs.family,
        coeffs.length,
    )
    return idwt(kept)


def tkeo(seg):
    """Teager-Kaiser energy x[n]^2 - x[n-1] x[n+1]; the two endpoints copy their neighbours."""
    x = as_array(seg)
    if x.shape[-1] < 3:
        raise ValueError(f"TKEO needs at least 3 samples, got {x.shape[-1]}")
    out = np.empty_like(x)
    out[..., 1:-1] = x[..., 1:-1] ** 2 - x[..., :-2] * x[..., 2:]
    out[..., 0] = out[..., 1]
    out[..., -1] = out[..., -2]
    return rewrap(seg, out)


def _hadamard_rows(first: int, count: int, beta: float, memory: int | None) -> np.ndarray:
    """Unnormalised rows first..first+count-1 of the discrete Hadamard integral.

    Grid t_k = k + 1.  Off-diagonal weights are rectangle-rule cells
    (ln(t_n/t_k))**(beta-1) * ln(t_{k+1}/t_k) / Gamma(beta); the singular
    diagonal cell is integrated exactly: (ln(t_{n+1}/t_n))**beta / Gamma(beta+1).
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    n_total = first + count
    logt = np.log(np.arange(1, n_total + 2, dtype=float))
    cell = np.diff(logt)  # ln(t_{k+1}/t_k)
    g = gamma(beta)
    W = np.zeros((count, n_total))
    for r in range(count):
        i = first + r
        lo = 0 if memory is None else max(0, i - memory + 1)
        W[r, lo:i] = (logt[i] - logt[lo:i]) ** (beta - 1.0) * cell[lo:i] / g
        W[r, i] = cell[i] ** beta / (g * beta)
    return W


def _normalise(W: np.ndarray, normalization: str) -> np.ndarray:
    if normalization == "unit_dc_gain":
        W /= W.sum(axis=1, keepdims=True)
    elif normalization != "none":
        raise ValueError(f"unknown normalization {normalization!r}")
    W.setflags(write=False)
    return W


@lru_cache(maxsize=4)
def hadamard_weights(n: int, beta: float, normalization: str = "unit_dc_gain", memory: int | None = None) -> np.ndarray:
    """Lower-triangular n x n weight matrix (see :func:`_hadamard_rows`)."""
    return _normalise(_hadamard_rows(0, n, beta, memory), normalization)


def hadamard_caputo(seg, beta: float = 0.5, normalization: str = "unit_dc_gain", memory: int | None = None):
    """Causal log-kernel fractional sum; linear, and DC-preserving under ``unit_dc_gain``."""
    x = as_array(seg)
    n = x.shape[-1]
    if n < 2:
        raise ValueError(f"fractional operator needs at least 2 samples, got {n}")
    if memory is not None and memory >= n:
        memory = None
    W = hadamard_weights(n, float(beta), normalization, memory)
    return rewrap(seg, x @ W.T)


@lru_cache(maxsize=4)
def periodic_hadamard_weights(n: int, beta: float, normalization: str = "unit_dc_gain", memory: int | None = None) -> np.ndarray:
    """Weights of the fractional sum run over two back-to-back copies of a record, last copy kept.

    Folding the history copy onto the record gives a single n x n matrix.
    """
    rows = _hadamard_rows(n, n, beta, memory)
    return _normalise(rows[:, :n] + rows[:, n:], normalization)


def periodic_hadamard(seg, beta: float = 0.5, normalization: str = "unit_dc_gain", memory: int | None = None):
    """Fractional sum of a cycle-periodic record, warmed up on one prior period.

    Removes the start-up transient of :func:`hadamard_caputo` (the first outputs
    otherwise average only a handful of samples).  Linear and DC-preserving,
    but each output sees the whole record, so it is not causal within it.
    """
    x = as_array(seg)
    n = x.shape[-1]
    if memory is not None and memory >= 2 * n:
        memory = None
    return rewrap(seg, x @ periodic_hadamard_weights(n, float(beta), normalization, memory).T)


def enhance(y, dcfg: DenoiseConfig, ecfg: EnhanceConfig, disabled=frozenset()) -> np.ndarray:
    """Band selection -> TKEO -> fractional sum on an already denoised signal."""
    y = as_array(y)
    if "band_select" not in disabled:
        coeffs = dwt(y, dcfg.wavelet_family, dcfg.levels_for(y.shape[-1]))
        y = band_select(coeffs, ecfg.band_selection)
    if ecfg.tkeo_enabled and "tkeo" not in disabled:
        y = tkeo(y)
    if "fractional" not in disabled:
        op = periodic_hadamard if ecfg.periodic_warmup else hadamard_caputo
        y = op(y, ecfg.beta, ecfg.fractional_normalization, ecfg.memory)
    return y


def ldme_operator(seg, dcfg: DenoiseConfig | None = None, ecfg: EnhanceConfig | None = None, disabled=frozenset()):
    """Denoise (both paths, fused) then :func:`enhance`.

    ``disabled`` names stages from :data:`STAGES` to replace with identity.
    """
    dcfg = dcfg or DenoiseConfig()
    ecfg = ecfg or EnhanceConfig()
    unknown = set(disabled) - STAGES
    if unknown:
        raise ValueError(f"unknown stages {sorted(unknown)}")
    x = as_array(seg)
    y = dual_path_denoise(
        x, dcfg, wavelet_path="wavelet_path" not in disabled, sg_path="sg_path" not in disabled
    )
    return rewrap(seg, enhance(y, dcfg, ecfg, disabled))
