"""Fourier-domain analysis: amplitude spectra, radial profiles, the
power-law PSD model, the per-step SNR model, and the low-pass step picker.

All transforms use the orthonormal FFT convention so Parseval holds
exactly; spectra are shifted so DC sits at the grid center. Radial spatial
frequency is measured in cycles/pixel and spans [0, sqrt(2)/2].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .imagecore import check_image, check_same_shape
from .schedule import NoiseSchedule

MAX_RADIAL_FREQ = math.sqrt(2.0) / 2.0
DEFAULT_NBINS = 64


@dataclass(frozen=True)
class Spectrum:
    """DC-centered amplitude spectrum with the matching radial-frequency grid."""

    amplitude: np.ndarray
    freq: np.ndarray


@dataclass(frozen=True)
class SpectralProfile:
    """Radially binned profile over [0, sqrt(2)/2]."""

    bin_edges: np.ndarray
    values: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def rows(self) -> list[tuple[float, float]]:
        return [(float(f), float(v)) for f, v in zip(self.centers, self.values)]


@dataclass(frozen=True)
class SnrModelParams:
    """Power-law PSD parameters plus the SNR/frequency thresholds.

    ``k`` and ``a`` describe the image PSD ``k / f**a``; ``phi`` is the SNR
    level below which content counts as corrupted and ``psi`` the radial
    frequency the low-pass cutoff should land on.
    """

    k: float
    a: float
    sigma2: float
    phi: float
    psi: float

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if self.a <= 1:
            raise ValueError(f"a must be > 1, got {self.a}")
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        if self.phi <= 0:
            raise ValueError(f"phi must be > 0, got {self.phi}")
        if not 0 < self.psi <= MAX_RADIAL_FREQ:
            raise ValueError(f"psi must lie in (0, {MAX_RADIAL_FREQ:.4f}], got {self.psi}")


def radial_frequency_grid(height: int, width: int) -> np.ndarray:
    """Radial frequency (cycles/pixel) per element of a DC-centered spectrum."""
    fy = np.fft.fftshift(np.fft.fftfreq(height))
    fx = np.fft.fftshift(np.fft.fftfreq(width))
    return np.hypot.outer(fy, fx)


def amplitude_spectrum(img) -> Spectrum:
    """Orthonormal 2-D DFT magnitude, shifted so DC is at the center."""
    arr = check_image(img)
    amp = np.abs(np.fft.fftshift(np.fft.fft2(arr, norm="ortho")))
    return Spectrum(amplitude=amp, freq=radial_frequency_grid(*arr.shape))


def _bin_index(freq: np.ndarray, nbins: int) -> np.ndarray:
    """Bin membership by rounding radial distance to the nearest bin center."""
    width = MAX_RADIAL_FREQ / nbins
    return np.minimum((freq / width).astype(int), nbins - 1)


def _bin_edges(nbins: int) -> np.ndarray:
    return np.linspace(0.0, MAX_RADIAL_FREQ, nbins + 1)


def radial_profile(values: np.ndarray, freq: np.ndarray, nbins: int) -> SpectralProfile:
    """Per-bin mean of ``values`` over radial frequency bins (empty bins = 0)."""
    if nbins < 2:
        raise ValueError(f"nbins must be >= 2, got {nbins}")
    idx = _bin_index(freq, nbins).ravel()
    sums = np.bincount(idx, weights=values.ravel(), minlength=nbins)
    counts = np.bincount(idx, minlength=nbins)
    out = np.zeros(nbins)
    nonzero = counts > 0
    out[nonzero] = sums[nonzero] / counts[nonzero]
    return SpectralProfile(bin_edges=_bin_edges(nbins), values=out)


def radial_psd_profile(imgs, nbins: int = DEFAULT_NBINS) -> SpectralProfile:
    """Radial profile of the mean power spectral density of one or more images."""
    if isinstance(imgs, np.ndarray) and imgs.ndim == 2:
        imgs = [imgs]
    imgs = [check_image(im) for im in imgs]
    if not imgs:
        raise ValueError("need at least one image")
    psd = np.zeros_like(imgs[0])
    for im in imgs:
        spec = amplitude_spectrum(im)
        psd += spec.amplitude**2
    psd /= len(imgs)
    return radial_profile(psd, radial_frequency_grid(*imgs[0].shape), nbins)


def radial_frequency_mse(a, b, nbins: int = DEFAULT_NBINS) -> SpectralProfile:
    """Per-radial-bin mean of the squared amplitude-spectrum difference."""
    a, b = check_same_shape(a, b)
    sa = amplitude_spectrum(a)
    sb = amplitude_spectrum(b)
    diff2 = (sa.amplitude - sb.amplitude) ** 2
    return radial_profile(diff2, sa.freq, nbins)


def _peak_bin(values: np.ndarray) -> int | None:
    """Index of the maximum entry; ties resolve to the lowest index.

    Returns None when the profile is identically zero (no peak).
    """
    values = np.asarray(values)
    if np.all(values == 0):
        return None
    return int(np.argmax(values))


def peak_difference_frequency(a, b, nbins: int = DEFAULT_NBINS) -> float | None:
    """Bin-center frequency where the spectral difference profile peaks.

    Identical images yield a flat zero profile and return None.
    """
    profile = radial_frequency_mse(a, b, nbins)
    peak = _peak_bin(profile.values)
    if peak is None:
        return None
    return float(profile.centers[peak])


def frequency_mse(a, b) -> float:
    """Mean squared difference of the two amplitude spectra."""
    a, b = check_same_shape(a, b)
    sa = amplitude_spectrum(a)
    sb = amplitude_spectrum(b)
    return float(np.mean((sa.amplitude - sb.amplitude) ** 2))


def fit_psd_powerlaw(imgs, nbins: int = DEFAULT_NBINS) -> tuple[float, float]:
    """Least-squares fit of ``log psd = log k - a * log f`` over radial bins.

    The PSD is averaged over the images and the DC element is excluded
    before binning. Emits a warning when the fitted exponent violates the
    ``a > 1`` model assumption (e.g. white noise fits a ~ 0).
    """
    if isinstance(imgs, np.ndarray) and imgs.ndim == 2:
        imgs = [imgs]
    imgs = [check_image(im) for im in imgs]
    if not imgs:
        raise ValueError("need at least one image")
    h, w = imgs[0].shape
    freq = radial_frequency_grid(h, w)
    psd = np.zeros((h, w))
    for im in imgs:
        if im.shape != (h, w):
            raise ValueError("all images must share a shape")
        psd += amplitude_spectrum(im).amplitude ** 2
    psd /= len(imgs)

    keep = freq > 0  # drop DC before binning
    if not np.any(psd[keep] > 0):
        raise ValueError("images have no nonzero AC energy (constant input?)")
    profile = radial_profile(psd[keep], freq[keep], nbins)
    use = profile.values > 0  # skips empty bins too

    logf = np.log(profile.centers[use])
    logp = np.log(profile.values[use])
    slope, intercept = np.polyfit(logf, logp, 1)
    k = float(np.exp(intercept))
    a = float(-slope)
    if a <= 1:
        warnings.warn(
            f"fitted PSD exponent a={a:.3f} <= 1: power-law model assumption violated",
            RuntimeWarning,
            stacklevel=2,
        )
    return k, a


def snr_at(params: SnrModelParams, alpha_t: float, freq: float) -> float:
    """Model SNR of the partially diffused image at a given radial frequency.

    ``sqrt(alpha) * k / (sqrt(1 - alpha) * freq**a * sigma2)``; the
    zero-noise limit ``alpha_t = 1`` returns +inf.
    """
    if freq == 0:
        raise ValueError("freq must be > 0: the power-law PSD diverges at DC")
    if freq < 0:
        raise ValueError(f"freq must be > 0, got {freq}")
    if not 0 < alpha_t <= 1:
        raise ValueError(f"alpha_t must lie in (0, 1], got {alpha_t}")
    if alpha_t == 1.0:
        return math.inf
    signal = math.sqrt(alpha_t) * params.k
    noise = math.sqrt(1.0 - alpha_t) * freq**params.a * params.sigma2
    return signal / noise


def select_tilde_T(params: SnrModelParams, sched: NoiseSchedule) -> int:
    """Pick the forward step whose SNR at the cutoff frequency ``psi`` sits
    closest to the corruption threshold ``phi``; ties go to the smaller t."""
    best_t, best_gap = 1, math.inf
    for t in range(1, sched.T + 1):
        snr = snr_at(params, sched.alpha_at(t), params.psi)
        gap = abs(snr - params.phi)
        if gap < best_gap:
            best_t, best_gap = t, gap
    return best_t
