"""Frequency-guided few-step diffusion for zero-shot image translation.

Train on target-domain images alone; translate source-domain images by
conditioning on their thresholded Sobel edges (high pass) and a
forward-diffused copy (low pass), letting the model regenerate the
intermediate frequencies where the domains differ.
"""

from .estimators import ForwardDiffusionLowPass, FrequencyGuidedTranslator, SobelHighPass
from .filters import FilterThresholds, GradientField, high_pass, low_pass, sobel_gradient
from .imagecore import clamp_unit, load_image, save_image
from .metrics import EvalReport, evaluate, psnr, ssim
from .model import DenoiserParams, CriticParams, generator_predict, discriminator_score
from .phantoms import DegradationSpec, PhantomSpec, degrade_to_source, make_paired_dataset, make_target_phantom
from .schedule import NoiseSchedule, forward_marginal_stats, forward_sample, make_schedule, posterior_sample
from .spectral import (
    SnrModelParams,
    SpectralProfile,
    Spectrum,
    amplitude_spectrum,
    fit_psd_powerlaw,
    frequency_mse,
    peak_difference_frequency,
    radial_frequency_mse,
    select_tilde_T,
    snr_at,
)
from .training import TrainingConfig, TrainingLog, train
from .translate import TranslationConfig, TranslationResult, sweep, translate

__version__ = "0.1.0"

__all__ = [
    "ForwardDiffusionLowPass",
    "FrequencyGuidedTranslator",
    "SobelHighPass",
    "FilterThresholds",
    "GradientField",
    "high_pass",
    "low_pass",
    "sobel_gradient",
    "clamp_unit",
    "load_image",
    "save_image",
    "EvalReport",
    "evaluate",
    "psnr",
    "ssim",
    "DenoiserParams",
    "CriticParams",
    "generator_predict",
    "discriminator_score",
    "DegradationSpec",
    "PhantomSpec",
    "degrade_to_source",
    "make_paired_dataset",
    "make_target_phantom",
    "NoiseSchedule",
    "forward_marginal_stats",
    "forward_sample",
    "make_schedule",
    "posterior_sample",
    "SnrModelParams",
    "SpectralProfile",
    "Spectrum",
    "amplitude_spectrum",
    "fit_psd_powerlaw",
    "frequency_mse",
    "peak_difference_frequency",
    "radial_frequency_mse",
    "select_tilde_T",
    "snr_at",
    "TrainingConfig",
    "TrainingLog",
    "train",
    "TranslationConfig",
    "TranslationResult",
    "sweep",
    "translate",
    "__version__",
]
