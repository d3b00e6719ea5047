"""The two frequency conditioners.

High pass: Sobel gradient magnitude, thresholded at ``eta`` and rescaled to
[0, 1]. Magnitudes are computed on the 0-255 intensity scale so the usual
integer threshold range (roughly 1-25) is meaningful for [0, 1] images.

Low pass: forward diffusion to step ``tilde_T``, which buries content above
a schedule-dependent cutoff frequency under the added noise floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imagecore import check_image
from .schedule import NoiseSchedule, forward_sample

SOBEL_KX = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_KY = SOBEL_KX.T.copy()
INTENSITY_SCALE = 255.0
# Largest possible gradient magnitude on 0-255 images: |gx|,|gy| <= 4*255.
MAGNITUDE_MAX = INTENSITY_SCALE * 4.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class FilterThresholds:
    """The two test-time knobs: edge threshold and low-pass step count."""

    eta: float
    tilde_T: int

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.tilde_T < 1:
            raise ValueError(f"tilde_T must be >= 1, got {self.tilde_T}")

    def check_against(self, sched: NoiseSchedule) -> None:
        if self.tilde_T > sched.T:
            raise ValueError(f"tilde_T={self.tilde_T} exceeds schedule T={sched.T}")


@dataclass(frozen=True)
class GradientField:
    """Sobel responses: horizontal gx, vertical gy, and their magnitude."""

    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray


def sobel_gradient(img) -> GradientField:
    """Sobel responses of a [0, 1] image on the 0-255 intensity scale.

    Cross-correlation with the kernels as written (gx > 0 where intensity
    increases left to right), replicate padding at the borders.
    """
    arr = check_image(img)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3 for a 3x3 kernel, got {arr.shape}")
    scaled = INTENSITY_SCALE * arr
    gx = ndimage.correlate(scaled, SOBEL_KX, mode="nearest")
    gy = ndimage.correlate(scaled, SOBEL_KY, mode="nearest")
    return GradientField(gx=gx, gy=gy, magnitude=np.hypot(gx, gy))


def high_pass(img, eta: float) -> np.ndarray:
    """Thresholded gradient magnitude, rescaled into [0, 1].

    Pixels keep their magnitude where it reaches ``eta`` (0-255 scale) and
    are zeroed elsewhere; the surviving field is divided by the largest
    possible magnitude so it can feed a network alongside [0, 1] images.
    """
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    mag = sobel_gradient(img).magnitude
    kept = np.where(mag >= eta, mag, 0.0)
    return kept / MAGNITUDE_MAX


def low_pass(img, tilde_T: int, sched: NoiseSchedule, rng: np.random.Generator) -> np.ndarray:
    """Forward-diffuse to step ``tilde_T``: the noisy low-frequency start state."""
    return forward_sample(img, tilde_T, sched, rng)
