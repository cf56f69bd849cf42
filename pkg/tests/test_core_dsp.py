import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldme.core_dsp import (
    DegenerateInputError,
    SignalSegment,
    Spectrum,
    analytic_envelope,
    envelope_spectrum,
    fft_magnitude,
    kurtosis,
    spectral_flatness,
)


def direct_dft(x):
    n = x.size
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def test_segment_invariants():
    with pytest.raises(ValueError):
        SignalSegment(np.zeros(7), 100.0)
    with pytest.raises(ValueError):
        SignalSegment(np.zeros(16), 0.0)
    x = np.zeros(16)
    x[3] = np.nan
    with pytest.raises(ValueError, match="index 3"):
        SignalSegment(x, 10.0)


def test_tone_on_bin_is_isolated():
    n, k = 256, 17
    x = np.cos(2 * np.pi * k * np.arange(n) / n)
    mags = fft_magnitude(x, sample_rate_hz=1.0).magnitudes
    assert np.argmax(mags) == k
    others = np.delete(mags, k)
    assert others.max() < 1e-9 * mags[k]


def test_zero_segment_zero_spectrum():
    spec = fft_magnitude(SignalSegment(np.zeros(64), 8.0))
    assert spec.magnitudes.shape == (33,)
    assert not spec.magnitudes.any()


def test_100hz_tone_against_direct_dft():
    fs, n = 1024.0, 1024
    x = np.sin(2 * np.pi * 100 * np.arange(n) / fs)
    spec = fft_magnitude(SignalSegment(x, fs), n_fft=1024)
    assert spec.bin_hz == 1.0
    assert np.argmax(spec.magnitudes) == 100
    np.testing.assert_allclose(spec.magnitudes, np.abs(direct_dft(x))[: n // 2 + 1], atol=1e-8)


def test_zero_padding_and_bad_nfft():
    x = np.ones(100)
    assert fft_magnitude(x, sample_rate_hz=1.0).n_fft == 128
    with pytest.raises(ValueError):
        fft_magnitude(x, n_fft=96, sample_rate_hz=1.0)
    with pytest.raises(ValueError):
        fft_magnitude(x, n_fft=64, sample_rate_hz=1.0)
    with pytest.raises(ValueError):
        fft_magnitude(np.array([1.0, np.inf] * 8), sample_rate_hz=1.0)


def test_spectrum_shape_invariant():
    with pytest.raises(ValueError):
        Spectrum(1.0, np.zeros(10), 32)


@given(st.integers(64, 4096), st.integers(0, 2**32 - 1))
def test_parseval(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    spec = fft_magnitude(x, sample_rate_hz=1.0)
    m2 = spec.magnitudes**2
    two_sided = m2[0] + m2[-1] + 2 * m2[1:-1].sum()
    assert np.isclose(np.sum(x**2), two_sided / spec.n_fft, rtol=1e-8)


def test_envelope_of_tone_is_flat():
    n = 2048
    x = np.cos(0.3 * np.arange(n))
    env = np.asarray(analytic_envelope(x))
    inner = env[n // 10 : -n // 10]
    assert np.max(np.abs(inner - 1)) < 1e-2


def test_am_demodulation():
    n = 4096
    t = np.arange(n)
    wm, wc = 2 * np.pi * 8 / n, 2 * np.pi * 800 / n
    x = (1 + 0.5 * np.cos(wm * t)) * np.cos(wc * t)
    env = np.asarray(analytic_envelope(x))
    np.testing.assert_allclose(env, 1 + 0.5 * np.cos(wm * t), atol=1e-9)


def test_zero_envelope():
    assert not np.asarray(analytic_envelope(np.zeros(32))).any()


@given(st.floats(1e-3, 1e3), st.integers(0, 1000))
def test_envelope_positive_homogeneity(a, seed):
    x = np.random.default_rng(seed).standard_normal(256)
    np.testing.assert_allclose(analytic_envelope(a * x), a * np.asarray(analytic_envelope(x)), rtol=1e-10)


def test_segment_wrapping_keeps_metadata():
    seg = SignalSegment(np.random.default_rng(0).standard_normal(64), 500.0, 7)
    env = analytic_envelope(seg)
    assert isinstance(env, SignalSegment)
    assert (env.sample_rate_hz, env.cycle_index, len(env)) == (500.0, 7, 64)


def test_envelope_spectrum_am_peak():
    fs, n = 12000.0, 4096
    t = np.arange(n) / fs
    x = (1 + 0.5 * np.cos(2 * np.pi * 100 * t)) * np.cos(2 * np.pi * 3000 * t)
    spec = envelope_spectrum(SignalSegment(x, fs))
    peak = np.argmax(spec.magnitudes)
    assert abs(spec.frequencies[peak] - 100) <= spec.bin_hz


def test_envelope_spectrum_unmodulated_tone_is_flat():
    fs, n = 12000.0, 4096
    x = np.cos(2 * np.pi * 3000 * np.arange(n) / fs)  # exactly on a bin: constant envelope
    spec = envelope_spectrum(SignalSegment(x, fs))
    assert spec.magnitudes.max() < 1e-9 * n


def test_envelope_spectrum_ignores_dc_offset_of_envelope():
    # on-bin carrier, slow positive envelope: analytic envelope is exactly e(t) + offset
    n = 1024
    t = np.arange(n)
    e = 2 + np.cos(2 * np.pi * 10 * t / n)
    carrier = np.cos(2 * np.pi * 200 * t / n)
    s1 = envelope_spectrum(e * carrier, sample_rate_hz=1.0)
    s2 = envelope_spectrum((e + 3.0) * carrier, sample_rate_hz=1.0)
    np.testing.assert_allclose(s1.magnitudes, s2.magnitudes, atol=1e-8 * n)


def test_kurtosis_gaussian_monte_carlo():
    x = np.random.default_rng(1).standard_normal(100_000)
    assert abs(kurtosis(x) - 3.0) < 0.1


def test_kurtosis_spike_and_degenerate():
    rng = np.random.default_rng(2)
    x = 1e-6 * rng.standard_normal(1000)
    x[500] = 1.0
    m = x - x.mean()
    oracle = np.mean(m**4) / np.mean(m**2) ** 2
    assert kurtosis(x) == pytest.approx(oracle)
    assert kurtosis(x) > 100
    with pytest.raises(DegenerateInputError):
        kurtosis(np.full(10, 2.5))
    with pytest.raises(ValueError):
        kurtosis([1.0, 2.0, 3.0])


def test_flatness_examples():
    assert spectral_flatness(np.ones(100)) == pytest.approx(1.0)
    one = np.zeros(512)
    one[7] = 1.0
    assert spectral_flatness(one) <= 0.01
    white = np.random.default_rng(3).standard_normal(4096)
    assert spectral_flatness(fft_magnitude(white, sample_rate_hz=1.0)) > 0.5
    with pytest.raises(DegenerateInputError):
        spectral_flatness(np.zeros(16))


@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-100, 1e6)), min_size=1, max_size=200).filter(lambda v: max(v) > 0))
def test_flatness_in_unit_interval(mags):
    f = spectral_flatness(np.array(mags))
    assert 0.0 <= f <= 1.0
