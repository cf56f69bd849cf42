"""Periodic orthogonal DWT (Mallat cascade) with an embedded filter table.

Each level is an orthogonal N x N sparse matrix ``[lowpass rows; highpass rows]``
built once per (length, family) and cached, so analysis is a sparse product
and synthesis is its transpose.  Batches of cycles run in a single call.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

# Decomposition low-pass taps (standard orthonormal construction, sum = sqrt(2)).
FILTERS: dict[str, tuple[float, ...]] = {
    "db4": (
        -0.010597401785069032, 0.0328830116668852, 0.030841381835560764,
        -0.18703481171909309, -0.027983769416859854, 0.6308807679298589,
        0.7148465705529157, 0.2303778133088965,
    ),
    "sym4": (
        -0.07576571478927333, -0.02963552764599851, 0.49761866763201545,
        0.8037387518059161, 0.29785779560527736, -0.09921954357684722,
        -0.012603967262037833, 0.0322231006040427,
    ),
    "sym8": (
        -0.0033824159510061256, -0.0005421323317911481, 0.03169508781149298,
        0.007607487324917605, -0.1432942383508097, -0.061273359067658524,
        0.4813596512583722, 0.7771857517005235, 0.3644418948353314,
        -0.05194583810770904, -0.027219029917056003, 0.049137179673607506,
        0.003808752013890615, -0.01495225833704823, -0.0003029205147213668,
        0.0018899503327594609,
    ),
}


@dataclass
class WaveletCoeffs:
    """Approximation band plus detail bands; ``details[0]`` is level 1 (finest)."""

    approx: np.ndarray
    details: list[np.ndarray]
    family: str
    length: int

    @property
    def levels(self) -> int:
        return len(self.details)

    def copy(self) -> "WaveletCoeffs":
        return WaveletCoeffs(self.approx.copy(), [d.copy() for d in self.details], self.family, self.length)

    def energy(self) -> np.ndarray:
        return np.sum(self.approx**2, axis=-1) + sum(np.sum(d**2, axis=-1) for d in self.details)


def filter_length(family: str) -> int:
    return len(_taps(family))


def _taps(family: str) -> np.ndarray:
    try:
        return np.asarray(FILTERS[family])
    except KeyError:
        raise ValueError(f"unsupported wavelet family {family!r}; choose from {sorted(FILTERS)}") from None


def max_levels(n: int, family: str) -> int:
    """Deepest level satisfying n >= 2**L * filter_length."""
    flen = filter_length(family)
    lv = 0
    while n >= 2 ** (lv + 1) * flen:
        lv += 1
    return lv


@lru_cache(maxsize=64)
def _level_matrix(n: int, family: str) -> sp.csr_matrix:
    dec_lo = _taps(family)
    L = dec_lo.size
    # analysis as correlation with the reconstruction filters, shifted by L/2 - 1
    # so coefficients line up with the usual periodised Mallat convention
    h = dec_lo[::-1]
    g = dec_lo * (-1.0) ** np.arange(L)
    half = n // 2
    rows = np.repeat(np.arange(half), L)
    cols = ((2 * np.arange(half)[:, None] + np.arange(L)[None, :] - (L // 2 - 1)) % n).ravel()
    lo = sp.coo_matrix((np.tile(h, half), (rows, cols)), shape=(half, n))
    hi = sp.coo_matrix((np.tile(g, half), (rows, cols)), shape=(half, n))
    # duplicate (row, col) pairs from wrap-around are summed by tocsr
    return sp.vstack([lo, hi]).tocsr()


def _check(n: int, family: str, levels: int):
    _taps(family)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    need = 2**levels * filter_length(family)
    if n < need:
        raise ValueError(
            f"signal of length {n} too short for {levels} levels of {family} (needs >= {need})"
        )
    if n % 2**levels:
        raise ValueError(f"length {n} must be divisible by 2**levels = {2**levels}")


def dwt(x, family: str = "sym8", levels: int = 5) -> WaveletCoeffs:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    _check(n, family, levels)
    batch = x.shape[:-1]
    a = x.reshape(-1, n).T  # (n, batch)
    details = []
    m = n
    for _ in range(levels):
        c = _level_matrix(m, family) @ a
        m //= 2
        details.append(c[m:].T.reshape(*batch, m))
        a = c[:m]
    return WaveletCoeffs(a.T.reshape(*batch, m), details, family, n)


def idwt(coeffs: WaveletCoeffs) -> np.ndarray:
    a = coeffs.approx
    batch = a.shape[:-1]
    a = a.reshape(-1, a.shape[-1]).T
    for d in reversed(coeffs.details):
        d2 = d.reshape(-1, d.shape[-1]).T
        m = 2 * d2.shape[0]
        a = _level_matrix(m, coeffs.family).T @ np.vstack([a, d2])
    return a.T.reshape(*batch, coeffs.length)


def band_edges_hz(level: int, sample_rate_hz: float) -> tuple[float, float]:
    """Nominal dyadic pass band of a detail level: [fs/2**(L+1), fs/2**L]."""
    return sample_rate_hz / 2 ** (level + 1), sample_rate_hz / 2**level
