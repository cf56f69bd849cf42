import numpy as np
import pytest
import pywt
from hypothesis import given, strategies as st

from ldme.wavelets import FILTERS, band_edges_hz, dwt, filter_length, idwt, max_levels

FAMILIES = sorted(FILTERS)


@pytest.mark.parametrize("family", FAMILIES)
def test_taps_match_reference_library(family):
    np.testing.assert_allclose(FILTERS[family], pywt.Wavelet(family).dec_lo, atol=1e-15)
    h = np.asarray(FILTERS[family])
    assert h.sum() == pytest.approx(np.sqrt(2), abs=1e-12)
    # orthonormality of even shifts
    for s in range(0, h.size, 2):
        assert np.dot(h[s:], h[: h.size - s]) == pytest.approx(1.0 if s == 0 else 0.0, abs=1e-10)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("levels", [1, 3, 5])
def test_coefficients_match_reference_library(family, levels, rng):
    x = rng.standard_normal(1024)
    ours = dwt(x, family, levels)
    ref = pywt.wavedec(x, family, mode="periodization", level=levels)
    np.testing.assert_allclose(ours.approx, ref[0], atol=1e-12)
    for d, r in zip(ours.details, ref[:0:-1]):
        np.testing.assert_allclose(d, r, atol=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_perfect_reconstruction_and_energy(family, rng):
    x = rng.standard_normal(1024)
    c = dwt(x, family, 4)
    assert np.linalg.norm(idwt(c) - x) / np.linalg.norm(x) < 1e-10
    assert c.energy().sum() == pytest.approx(np.sum(x**2), rel=1e-10)


def test_zero_signal_zero_coefficients():
    c = dwt(np.zeros(512), "sym8", 3)
    assert not c.approx.any() and not any(d.any() for d in c.details)


def test_batched_rows_equal_single_calls(rng):
    X = rng.standard_normal((3, 512))
    cb = dwt(X, "db4", 3)
    for i in range(3):
        ci = dwt(X[i], "db4", 3)
        np.testing.assert_array_equal(cb.approx[i], ci.approx)
        for db, di in zip(cb.details, ci.details):
            np.testing.assert_array_equal(db[i], di)
    np.testing.assert_allclose(idwt(cb), X, atol=1e-10)


def test_errors():
    with pytest.raises(ValueError, match="unsupported"):
        dwt(np.zeros(256), "haar", 1)
    with pytest.raises(ValueError, match="too short"):
        dwt(np.zeros(256), "sym8", 5)  # needs 2**5 * 16 = 512
    assert max_levels(256, "sym8") == 4
    assert filter_length("db4") == 8


def test_band_edges():
    assert band_edges_hz(1, 12000) == (3000, 6000)
    assert band_edges_hz(2, 12000) == (1500, 3000)


@given(st.sampled_from(FAMILIES), st.sampled_from([256, 512, 2048]), st.integers(0, 2**31))
def test_reconstruction_property(family, n, seed):
    x = np.random.default_rng(seed).standard_normal(n) * 10.0 ** np.random.default_rng(seed).uniform(-3, 3)
    lv = max_levels(n, family)
    assert np.linalg.norm(idwt(dwt(x, family, lv)) - x) <= 1e-10 * np.linalg.norm(x)
