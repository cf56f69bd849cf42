import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldme.anomaly import DetectorConfig
from ldme.bench import (
    SNR_CAP_DB,
    BenchmarkRun,
    ablation,
    baseline_ht_tsa,
    baseline_planet_tsa,
    censored_cd,
    compare,
    comparison_rows,
    projection_snr_db,
    seed_sweep,
    snr_enhancement,
    table_csv,
    table_markdown,
)
from ldme.indicators import KinematicsSpec
from ldme.pipeline import PipelineConfig, run_method
from ldme.simulator import CycleSeries, SimulatorConfig, generate_series, impulse_train


@given(st.integers(0, 10_000))
def test_snr_enhancement_identity_is_zero(seed):
    r = np.random.default_rng(seed)
    x, t = r.standard_normal((2, 256))
    assert snr_enhancement(x, x, t) == 0.0


def test_snr_enhancement_perfect_recovery_capped(rng):
    t = rng.standard_normal(512)
    raw = t + rng.standard_normal(512)
    assert snr_enhancement(raw, t, t) == SNR_CAP_DB
    assert np.isfinite(snr_enhancement(raw, 0.5 * raw + 0.5 * t, t))


def test_projection_snr_oracle(rng):
    t = np.sin(np.linspace(0, 20, 1000))
    n = rng.standard_normal(1000)
    n -= (n - n.mean()) @ (t - t.mean()) / np.sum((t - t.mean()) ** 2) * (t - t.mean())  # orthogonal residual
    x = 2.0 * t + n
    expected = 10 * np.log10(np.var(2.0 * t) / np.var(n))
    assert projection_snr_db(x, t) == pytest.approx(expected, abs=1e-9)


def test_snr_errors():
    with pytest.raises(ValueError):
        snr_enhancement(np.ones(8), np.ones(8), np.full(8, 3.0))
    with pytest.raises(ValueError):
        snr_enhancement(np.ones(8), np.ones(9), np.ones(8))


def _series(**kw):
    cfg = SimulatorConfig(**{"n_cycles": 120, "crack_onset_cycle": 70, **kw})
    return cfg, generate_series(cfg)


DET = DetectorConfig(calibration_cycles=50)


def test_ht_tsa_zero_noise_strong_fault():
    cfg, s = _series(crack_growth=0.2, noise={"snr_db": 200.0, "ar1": 0.8})
    rep = baseline_ht_tsa(s, KinematicsSpec(), DET)
    assert rep.detection_cycle is not None
    assert rep.detection_cycle <= cfg.crack_onset_cycle + DET.sustain_m + 5


def test_identical_cycles_never_detect():
    cfg, s = _series()
    X = np.tile(s.samples[0], (len(s), 1))
    same = CycleSeries(X, s.sample_rate_hz, s.cycles)
    rep = baseline_ht_tsa(same, KinematicsSpec(), DET)
    assert rep.detection_cycle is None
    assert all(v == 0.0 for v in rep.scores[DET.calibration_cycles:])


def test_planet_with_one_planet_is_ht_bit_exact():
    _, s = _series(crack_growth=0.1)
    kin = KinematicsSpec(n_planets=1)
    a = baseline_planet_tsa(s, kin, DET)
    b = baseline_ht_tsa(s, kin, DET)
    assert a == b


def test_benchmark_determinism():
    _, s = _series(crack_growth=0.1)
    cfg = PipelineConfig(detector=DET)
    r1 = compare(s, cfg, with_snr=True)
    r2 = compare(s, cfg, with_snr=True)
    assert [(r.method, r.report, r.snr_enh_db) for r in r1] == [(r.method, r.report, r.snr_enh_db) for r in r2]
    assert all(np.isfinite(r.snr_enh_db) for r in r1)


def test_ablation_empty_set_is_full_run():
    _, s = _series(crack_growth=0.1)
    cfg = PipelineConfig(detector=DET)
    full = run_method(s, "ldme", cfg)[0]
    (run,) = ablation(s, cfg, [frozenset()])
    assert run.report == full and run.method == "LDME"


def test_ablation_everything_off_is_raw_envelope():
    _, s = _series(crack_growth=0.1)
    cfg = PipelineConfig(detector=DET)
    everything = frozenset({"wavelet_path", "sg_path", "band_select", "tkeo", "fractional", "cci_modulation"})
    (run,) = ablation(s, cfg, [everything])
    assert run.report == run_method(s, "ht_tsa", cfg)[0]
    assert run.flags  # both denoise paths off is flagged
    with pytest.raises(ValueError):
        ablation(s, cfg, ["not_a_stage"])


def test_comparison_table():
    from ldme.anomaly import DetectionReport

    runs = [
        BenchmarkRun("LDME", "d", DetectionReport(200, 220, [], []), 4.0),
        BenchmarkRun("HT_TSA", "d", DetectionReport(300, 330, [], []), 0.0),
        BenchmarkRun("PLANET_TSA", "d", DetectionReport(400, None, [], []), 0.1),
    ]
    rows = comparison_rows(runs)
    assert rows[0]["improvement_cd_pct"] == pytest.approx(50.0)
    assert rows[0]["improvement_cm_pct"] == pytest.approx(100 * 110 / 330)
    assert rows[2]["improvement_cd_pct"] == 0.0
    csv = table_csv(rows).splitlines()
    assert csv[0].startswith("method,dataset,c_d,c_m") and len(csv) == 4
    md = table_markdown(rows)
    assert md.startswith("| Method | c_d | c_m |") and "| PLANET_TSA | 400 | - |" in md


def test_censored_cd():
    from ldme.anomaly import DetectionReport

    assert censored_cd(DetectionReport(None, None, [], []), 500) == 501
    assert censored_cd(DetectionReport(260, None, [], []), 500) == 260


def test_planet_not_earlier_than_ht_in_most_seeds():
    cfg = PipelineConfig()
    res = seed_sweep(cfg, range(1, 21), {"ht": ("ht_tsa", ()), "planet": ("planet_tsa", ())})
    later = sum(p >= h for p, h in zip(res["planet"], res["ht"]))
    assert later > 10


def test_series_snr_on_simulated_data():
    from ldme.bench import series_snr_enhancement

    cfg = PipelineConfig(detector=DET)
    _, s = _series(crack_growth=0.1, noise={"snr_db": -5.0, "ar1": 0.8})
    assert series_snr_enhancement(s, "ht_tsa", cfg) == 0.0
    assert series_snr_enhancement(s, "ldme", cfg) > 2.0
    bare = CycleSeries(s.samples, s.sample_rate_hz, s.cycles)
    assert series_snr_enhancement(bare, "ldme", cfg) is None
    assert impulse_train(SimulatorConfig()).shape == (4096,)
