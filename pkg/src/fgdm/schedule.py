"""Noise schedules, forward diffusion sampling, and the Gaussian posterior step.

The schedule stores the cumulative signal coefficients ``alpha[t-1]`` for
steps t = 1..T, so the forward marginal at step t is
``N(sqrt(alpha_t) * s0, (1 - alpha_t) * sigma2)`` and the per-step ratio
``alpha_t / alpha_{t-1}`` recovers the single-step transition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .imagecore import check_image, check_same_shape

COSINE_OFFSET = 0.008
ALPHA_FLOOR = 1e-5
SCHEDULE_KINDS = ("cosine",)


@dataclass(frozen=True)
class NoiseSchedule:
    """Diffusion schedule: step count T, cumulative alphas, noise variance."""

    T: int
    alpha: np.ndarray
    sigma2: float = 1.0

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        object.__setattr__(self, "alpha", alpha)
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if alpha.shape != (self.T,):
            raise ValueError(f"alpha must have shape ({self.T},), got {alpha.shape}")
        if not np.all(np.isfinite(alpha)):
            raise ValueError("alpha contains non-finite values")
        if alpha[0] <= 0 or alpha[0] > 1:
            raise ValueError(f"alpha_1 must lie in (0, 1], got {alpha[0]}")
        if np.any(np.diff(alpha) >= 0):
            raise ValueError("alpha must be strictly decreasing in t")
        if alpha[-1] <= 0:
            raise ValueError(f"alpha_T must be > 0, got {alpha[-1]}")
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")

    def alpha_at(self, t: int) -> float:
        """Cumulative alpha for 1-based step t."""
        self.check_step(t)
        return float(self.alpha[t - 1])

    def check_step(self, t: int, minimum: int = 1) -> None:
        if not minimum <= t <= self.T:
            raise ValueError(f"step t={t} outside [{minimum}, {self.T}]")

    def to_json(self) -> str:
        return json.dumps({"T": self.T, "alpha": self.alpha.tolist(), "sigma2": self.sigma2})

    @classmethod
    def from_json(cls, text: str) -> "NoiseSchedule":
        obj = json.loads(text)
        return cls(T=int(obj["T"]), alpha=np.asarray(obj["alpha"]), sigma2=float(obj["sigma2"]))


def make_schedule(T: int, kind: str = "cosine") -> NoiseSchedule:
    """Build a noise schedule with unit noise variance.

    The cosine schedule follows
    ``alpha_t = cos^2(((t/T + s) / (1 + s)) * pi/2) / cos^2((s / (1 + s)) * pi/2)``
    with offset s = 0.008, floored at 1e-5.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if kind not in SCHEDULE_KINDS:
        raise ValueError(f"unknown schedule kind {kind!r}, expected one of {SCHEDULE_KINDS}")
    s = COSINE_OFFSET
    t = np.arange(1, T + 1, dtype=np.float64)
    f = np.cos((t / T + s) / (1.0 + s) * math.pi / 2.0) ** 2
    f0 = math.cos(s / (1.0 + s) * math.pi / 2.0) ** 2
    alpha = np.clip(f / f0, ALPHA_FLOOR, 1.0)
    if np.any(np.diff(alpha) >= 0):
        raise ValueError(f"T={T} is too large for the cosine schedule floor; alphas tie at {ALPHA_FLOOR}")
    return NoiseSchedule(T=T, alpha=alpha, sigma2=1.0)


def forward_marginal_stats(s0, t: int, sched: NoiseSchedule) -> tuple[np.ndarray, float]:
    """Mean image and scalar variance of the forward marginal at step t."""
    s0 = check_image(s0, "s0")
    a = sched.alpha_at(t)
    return np.sqrt(a) * s0, (1.0 - a) * sched.sigma2


def forward_from_noise(s0, t: int, sched: NoiseSchedule, z) -> np.ndarray:
    """Deterministic core of forward sampling: ``sqrt(a)*s0 + sqrt(1-a)*z``."""
    s0, z = check_same_shape(s0, z, "s0/z")
    a = sched.alpha_at(t)
    return np.sqrt(a) * s0 + np.sqrt(1.0 - a) * z

def forward_sample(s0, t: int, sched: NoiseSchedule, rng: np.random.Generator) -> np.ndarray:
    """Draw one forward-diffused state at step t (noise variance sigma2)."""
    s0 = check_image(s0, "s0")
    sched.check_step(t)
    z = rng.normal(0.0, math.sqrt(sched.sigma2), size=s0.shape)
    return forward_from_noise(s0, t, sched, z)


def posterior_coefficients(t: int, sched: NoiseSchedule) -> tuple[float, float, float]:
    """Coefficients (on the clean estimate, on the current state) and variance
    of the Gaussian posterior for stepping t -> t-1, valid for t >= 2."""
    sched.check_step(t, minimum=2)
    a_t = sched.alpha_at(t)
    a_prev = sched.alpha_at(t - 1)
    r = a_t / a_prev
    coef_clean = math.sqrt(a_prev) * (1.0 - r) / (1.0 - a_t)
    coef_state = math.sqrt(r) * (1.0 - a_prev) / (1.0 - a_t)
    var = (1.0 - r) * (1.0 - a_prev) / (1.0 - a_t)
    return coef_clean, coef_state, var


def posterior_from_noise(s_t, s0_hat, t: int, sched: NoiseSchedule, z) -> np.ndarray:
    """Deterministic core of the posterior step; t = 1 returns ``s0_hat``."""
    s_t, s0_hat = check_same_shape(s_t, s0_hat, "s_t/s0_hat")
    sched.check_step(t)
    if t == 1:
        return s0_hat.copy()
    coef_clean, coef_state, var = posterior_coefficients(t, sched)
    z = check_image(z, "z")
    return coef_clean * s0_hat + coef_state * s_t + math.sqrt(var * sched.sigma2) * z


def posterior_sample(s_t, s0_hat, t: int, sched: NoiseSchedule, rng: np.random.Generator) -> np.ndarray:
    """Sample the reverse-process Gaussian posterior for stepping t -> t-1.

    For t >= 2 this draws from ``N(mu, var * sigma2)`` where ``mu`` mixes
    the clean estimate and the current state with the coefficients from
    :func:`posterior_coefficients`; t = 1 deterministically returns the
    clean estimate.
    """
    s_t, s0_hat = check_same_shape(s_t, s0_hat, "s_t/s0_hat")
    sched.check_step(t)
    if t == 1:
        return s0_hat.copy()
    z = rng.normal(0.0, 1.0, size=s_t.shape)
    return posterior_from_noise(s_t, s0_hat, t, sched, z)
