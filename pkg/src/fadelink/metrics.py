"""Quality and diagnostic metrics shared by the tests and the harness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .aging import csi_nmse  # noqa: F401  (re-exported: NMSE lives with CSI)

PEAK_PIXEL_VALUE = 255.0


def mse(original, reconstructed) -> float:
    """Mean squared error over all pixels and color channels."""
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(reconstructed, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(original, reconstructed) -> float:
    """Peak SNR in dB against the 8-bit peak of 255; math.inf when identical.

    The infinity is a sentinel: serialize it as the string "inf", never as a
    float in machine-readable output.
    """
    err = mse(original, reconstructed)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK_PIXEL_VALUE**2 / err)


def spearman(a, b) -> float:
    """Spearman rank correlation with average-rank tie handling.

    Returns 0.0 when either input is constant (no ordering to correlate).
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-D sequences of equal length")
    if x.size < 2:
        raise ValueError("at least two observations are required")
    rx = rankdata(x)
    ry = rankdata(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = math.sqrt(float(np.sum(rx**2) * np.sum(ry**2)))
    if denom == 0.0:
        return 0.0
    return float(np.sum(rx * ry) / denom)


def measured_snr(sent, received) -> float:
    """Empirical SNR in dB, treating received - sent as the noise.

    Meaningful for >= 1e3 symbols; math.inf when the residual is zero.
    """
    s = np.asarray(sent, dtype=np.complex128)
    r = np.asarray(received, dtype=np.complex128)
    if s.shape != r.shape:
        raise ValueError(f"length mismatch: {s.shape} vs {r.shape}")
    noise_power = float(np.sum(np.abs(r - s) ** 2))
    if noise_power == 0.0:
        return math.inf
    return 10.0 * math.log10(float(np.sum(np.abs(s) ** 2)) / noise_power)


@dataclass(frozen=True)
class QualityReport:
    """Per-transmission quality summary."""

    mse: float
    psnr_db: float
    nmse: float
    snr_measured_db: float
    per_slot_impairment: tuple[float, ...]
    score_impairment_spearman: float

    def __post_init__(self) -> None:
        if self.mse < 0.0 or self.nmse < 0.0:
            raise ValueError("mse and nmse must be non-negative")
        if (self.mse == 0.0) != math.isinf(self.psnr_db):
            raise ValueError("psnr_db must be the +inf sentinel exactly when mse = 0")

    def to_jsonable(self) -> dict:
        """Plain-dict form with +inf rendered as the string "inf"."""
        def scrub(value):
            if isinstance(value, float) and math.isinf(value):
                return "inf"
            return value

        return {
            "mse": scrub(self.mse),
            "psnr_db": scrub(self.psnr_db),
            "nmse": scrub(self.nmse),
            "snr_measured_db": scrub(self.snr_measured_db),
            "per_slot_impairment": [scrub(v) for v in self.per_slot_impairment],
            "score_impairment_spearman": scrub(self.score_impairment_spearman),
        }
