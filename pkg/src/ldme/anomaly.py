"""Unsupervised scoring (robust MAD z-score combined with a one-class Mahalanobis
distance), sustained-alarm decisions and detection metrics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .indicators import CiRecord

MAD_TO_SIGMA = 1.4826


@dataclass
class DetectorConfig:
    calibration_cycles: int = 50
    mad_k: float = 3.0
    sustain_m: int = 5
    maintain_m: int = 15
    cov_ridge: float = 1e-6
    combine: str = "max"

    def __post_init__(self):
        if self.calibration_cycles < 10:
            raise ValueError(f"calibration_cycles must be >= 10, got {self.calibration_cycles}")
        if not self.mad_k > 0:
            raise ValueError(f"mad_k must be positive, got {self.mad_k}")
        if self.sustain_m < 1:
            raise ValueError(f"sustain_m must be >= 1, got {self.sustain_m}")
        if self.maintain_m < self.sustain_m:
            raise ValueError("maintain_m must be >= sustain_m")
        if self.combine not in ("max", "mean"):
            raise ValueError(f"combine must be 'max' or 'mean', got {self.combine!r}")


class NotCalibratedError(RuntimeError):
    pass


class DegenerateCalibrationError(ValueError):
    pass


@dataclass
class DetectorState:
    mean: np.ndarray | None = None
    cov: np.ndarray | None = None
    cov_inv: np.ndarray | None = None
    median_cci: float = 0.0
    mad_cci: float = 0.0
    counter: int = 0
    run_start: int | None = None
    detection_cycle: int | None = None
    maintenance_cycle: int | None = None
    frozen: bool = False
    buffer: list = field(default_factory=list)
    combine: str = "max"


def calibrate(records: Sequence[CiRecord], h: int | None = None, cov_ridge: float = 1e-6, combine: str = "max",
              strict: bool = True) -> DetectorState:
    """Fit centre/covariance of (CI1, CI2) and median/MAD of CCI on the first ``h`` records.

    ``strict=False`` accepts a constant calibration window by flooring MAD and
    covariance at a negligible scale: records equal to the centre still score 0,
    any departure scores very high.
    """
    h = len(records) if h is None else h
    if len(records) < h:
        raise ValueError(f"calibration needs {h} records, got {len(records)}")
    recs = list(records[:h])
    V = np.array([r.vector for r in recs], dtype=float)
    cci = np.array([r.cci for r in recs], dtype=float)
    if not np.isfinite(V).all():
        raise ValueError("calibration records contain non-finite values")
    med = float(np.median(cci))
    mad = float(np.median(np.abs(cci - med)))
    tiny = 1e-12 * max(1.0, abs(med))
    if mad == 0.0:
        if strict:
            raise DegenerateCalibrationError(
                f"calibration CCI has zero MAD over {h} cycles; use a larger calibration window"
            )
        mad = tiny
    mu = V.mean(axis=0)
    cov = np.cov(V, rowvar=False, bias=False)
    const = np.ptp(V, axis=0) == 0
    if const.any():
        # the mean of identical floats can be off by an ulp; centre constant columns exactly
        mu[const] = V[0, const]
        cov[const, :] = 0.0
        cov[:, const] = 0.0
    # scale-free ridge keeps the inverse defined for near-collinear indicators
    cov = cov + cov_ridge * np.trace(cov) / 2 * np.eye(2)
    if not strict and np.linalg.det(cov) <= 0.0:
        cov = cov + tiny**2 * np.eye(2)
    return DetectorState(
        mean=mu, cov=cov, cov_inv=np.linalg.inv(cov), median_cci=med, mad_cci=mad,
        frozen=True, buffer=recs, combine=combine,
    )


def score(state: DetectorState, rec: CiRecord) -> float:
    if not state.frozen:
        raise NotCalibratedError("detector must be calibrated before scoring")
    z_mad = abs(rec.cci - state.median_cci) / (state.mad_cci * MAD_TO_SIGMA)
    d = rec.vector - state.mean
    maha = float(np.sqrt(max(0.0, d @ state.cov_inv @ d)))
    if state.combine == "mean":
        return 0.5 * (z_mad + maha)
    return max(z_mad, maha)


def update_decision(state: DetectorState, s_c: float, c: int, cfg: DetectorConfig) -> tuple[DetectorState, list]:
    """Advance the hysteresis counter.  Returns the state and a list of (event, cycle) pairs.

    c_d is the first cycle of the first run of ``sustain_m`` consecutive alarms;
    c_m is the cycle at which a run first reaches ``maintain_m``.  Both latch.
    """
    events = []
    if s_c > cfg.mad_k:
        if state.counter == 0:
            state.run_start = c
            events.append(("alarm_start", c))
        state.counter += 1
    else:
        state.counter = 0
        state.run_start = None
    if state.detection_cycle is None and state.counter >= cfg.sustain_m:
        state.detection_cycle = state.run_start
        events.append(("detection", state.run_start))
    if state.maintenance_cycle is None and state.counter >= cfg.maintain_m:
        state.maintenance_cycle = c
        events.append(("maintenance", c))
    return state, events


@dataclass
class DetectionReport:
    detection_cycle: int | None
    maintenance_cycle: int | None
    scores: list[float]
    cycles: list[int]
    far: float | None = None
    roc_auc: float | None = None
    pr_auc: float | None = None

    def __post_init__(self):
        if (self.detection_cycle is not None and self.maintenance_cycle is not None
                and self.maintenance_cycle < self.detection_cycle):
            raise ValueError("maintenance cycle precedes detection cycle")

    def summary(self) -> dict:
        return {
            "c_d": self.detection_cycle,
            "c_m": self.maintenance_cycle,
            "far": self.far,
            "roc_auc": self.roc_auc,
            "pr_auc": self.pr_auc,
        }


def _tie_groups(scores, labels):
    """Positives/negatives per distinct score, highest score first."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(bool)
    uniq, inv = np.unique(-s, return_inverse=True)
    pos = np.bincount(inv, weights=y, minlength=uniq.size)
    neg = np.bincount(inv, weights=~y, minlength=uniq.size)
    return pos, neg


def roc_auc(scores, labels) -> float | None:
    """Area under ROC over tie groups; equals P(faulty > healthy) + P(tie) / 2."""
    pos, neg = _tie_groups(scores, labels)
    P, N = pos.sum(), neg.sum()
    if P == 0 or N == 0:
        return None
    # trapezoid area as an exact pair count: wins + half the ties, one division
    neg_below = N - np.cumsum(neg)
    wins = float(pos @ neg_below) + 0.5 * float(pos @ neg)
    return float(wins / (P * N))


def pr_auc(scores, labels) -> float | None:
    """Step-wise area under precision-recall (average precision over tie groups)."""
    pos, neg = _tie_groups(scores, labels)
    P = pos.sum()
    if P == 0 or neg.sum() == 0:
        return None
    tp, fp = np.cumsum(pos), np.cumsum(neg)
    precision = tp / (tp + fp)
    recall_step = pos / P
    return float(np.sum(recall_step * precision))


def evaluate(scores, labels, threshold: float) -> tuple[float | None, float | None, float | None]:
    """FAR at ``threshold`` over healthy cycles, ROC AUC and PR AUC (None for one-class labels)."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape:
        raise ValueError(f"scores and labels differ in length: {s.shape} vs {y.shape}")
    healthy = ~y
    far = float(np.mean(s[healthy] > threshold)) if healthy.any() else None
    return far, roc_auc(s, y), pr_auc(s, y)


def run_detector(records: Sequence[CiRecord], cfg: DetectorConfig, labels=None) -> tuple[DetectionReport, list[CiRecord]]:
    """Calibrate on the first H records, score everything, decide on cycles after H.

    Metrics use post-calibration cycles only.
    """
    state = calibrate(records, cfg.calibration_cycles, cfg.cov_ridge, cfg.combine, strict=False)
    scored = [r.with_score(score(state, r)) for r in records]
    for r in scored[cfg.calibration_cycles:]:
        update_decision(state, r.score, r.cycle_index, cfg)
    report = DetectionReport(
        state.detection_cycle, state.maintenance_cycle,
        [r.score for r in scored], [r.cycle_index for r in scored],
    )
    if labels is not None:
        post = slice(cfg.calibration_cycles, None)
        report.far, report.roc_auc, report.pr_auc = evaluate(
            [r.score for r in scored[post]], np.asarray(labels)[post], cfg.mad_k
        )
    return report, scored
