"""Faithfulness/realism metrics and the dual-reference evaluation report.

PSNR and SSIM are computed on [0, 1] images (dynamic range 1). SSIM uses
the classic 11x11 Gaussian window (sigma 1.5) in valid mode, constants
C1 = 0.01^2 and C2 = 0.03^2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import correlate2d

from .imagecore import check_same_shape
from .spectral import frequency_mse

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB (peak 1.0), capped at 100 dB."""
    a, b = check_same_shape(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(a, b) -> float:
    """Mean local structural similarity over valid window positions."""
    a, b = check_same_shape(a, b)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} pixels per side, got {a.shape}")
    w = _gaussian_window()
    mu_a = correlate2d(a, w, mode="valid")
    mu_b = correlate2d(b, w, mode="valid")
    var_a = correlate2d(a * a, w, mode="valid") - mu_a**2
    var_b = correlate2d(b * b, w, mode="valid") - mu_b**2
    cov = correlate2d(a * b, w, mode="valid") - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mu_a**2 + mu_b**2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.mean(num / den))


@dataclass
class EvalRow:
    index: int
    psnr_source: float
    ssim_source: float
    psnr_target: float | None = None
    ssim_target: float | None = None
    freq_mse_target: float | None = None


@dataclass
class EvalReport:
    """Per-image metric rows plus their arithmetic means.

    ``feature_distance`` stays None unless a feature embedder is plugged
    in; the column is kept so reports stay schema-stable.
    """

    rows: list[EvalRow] = field(default_factory=list)
    means: dict = field(default_factory=dict)
    feature_distance: float | None = None

    _COLUMNS = ("psnr_source", "ssim_source", "psnr_target", "ssim_target", "freq_mse_target")

    def compute_means(self) -> None:
        self.means = {}
        for col in self._COLUMNS:
            values = [getattr(r, col) for r in self.rows]
            if all(v is not None for v in values) and values:
                self.means[col] = float(np.mean(values))

    def to_json(self) -> str:
        return json.dumps(
            {
                "rows": [vars(r) for r in self.rows],
                "means": self.means,
                "feature_distance": self.feature_distance,
            },
            indent=2,
        )

    def to_csv(self, path) -> None:
        cols = [c for c in self._COLUMNS if c in self.means]
        lines = ["index," + ",".join(cols)]
        for r in self.rows:
            lines.append(f"{r.index}," + ",".join(f"{getattr(r, c):.6f}" for c in cols))
        lines.append("mean," + ",".join(f"{self.means[c]:.6f}" for c in cols))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def evaluate(translated, sources, targets=None) -> EvalReport:
    """Metric report for aligned image lists.

    Faithfulness columns compare against the sources; the target columns
    (including spectral MSE) are filled only when references are given, as
    in unpaired protocols they do not exist.
    """
    translated = list(translated)
    sources = list(sources)
    if len(translated) != len(sources):
        raise ValueError(f"translated/sources length mismatch: {len(translated)} vs {len(sources)}")
    if targets is not None:
        targets = list(targets)
        if len(targets) != len(translated):
            raise ValueError(f"translated/targets length mismatch: {len(translated)} vs {len(targets)}")

    report = EvalReport()
    for i, (out, src) in enumerate(zip(translated, sources)):
        row = EvalRow(index=i, psnr_source=psnr(out, src), ssim_source=ssim(out, src))
        if targets is not None:
            ref = targets[i]
            row.psnr_target = psnr(out, ref)
            row.ssim_target = ssim(out, ref)
            row.freq_mse_target = frequency_mse(out, ref)
        report.rows.append(row)
    report.compute_means()
    return report
