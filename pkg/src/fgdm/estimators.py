"""Scikit-learn style wrappers around the functional core.

The translator follows the fit/transform contract: ``fit`` trains on a
stack of target-domain images, ``transform`` translates source-domain
images it has never seen. The two filter transformers are stateless and
compose in pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import filters, model, schedule, training
from .imagecore import check_image
from .translate import TranslationConfig, translate


def _as_stack(X) -> np.ndarray:
    """Validate input as an (n, h, w) image stack; a single 2-D image is lifted."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError(f"expected (n, h, w) image stack or single image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input images contain non-finite values")
    return arr


class SobelHighPass(BaseEstimator, TransformerMixin):
    """Thresholded Sobel edge extractor (stateless transformer)."""

    def __init__(self, eta=10.0):
        self.eta = eta

    def fit(self, X, y=None):
        _as_stack(X)
        return self

    def transform(self, X):
        stack = _as_stack(X)
        return np.stack([filters.high_pass(img, self.eta) for img in stack])


class ForwardDiffusionLowPass(BaseEstimator, TransformerMixin):
    """Forward-diffusion low-pass: noisy start states at a chosen step."""

    def __init__(self, tilde_t=4, n_steps=8, random_state=0):
        self.tilde_t = tilde_t
        self.n_steps = n_steps
        self.random_state = random_state

    def fit(self, X, y=None):
        _as_stack(X)
        self.schedule_ = schedule.make_schedule(self.n_steps)
        return self

    def transform(self, X):
        if not hasattr(self, "schedule_"):
            self.fit(X)
        stack = _as_stack(X)
        rng = np.random.default_rng(self.random_state)
        return np.stack([filters.low_pass(img, self.tilde_t, self.schedule_, rng) for img in stack])


class FrequencyGuidedTranslator(BaseEstimator):
    """Few-step conditional diffusion translator trained on target images only.

    ``fit(X)`` expects a stack of target-domain images in [0, 1];
    ``transform(X)`` (alias ``predict``) translates unseen source-domain
    images using the edge condition and forward-diffused start state.
    """

    def __init__(
        self,
        n_steps=8,
        eta=10.0,
        tilde_t=4,
        epochs=60,
        batch_size=8,
        lr_initial=1e-4,
        lr_min=1e-5,
        eta_range=(1, 25),
        base_width=32,
        latent_dim=32,
        loss="adversarial",
        recon_weight=10.0,
        r1_gamma=0.0,
        random_state=0,
    ):
        self.n_steps = n_steps
        self.eta = eta
        self.tilde_t = tilde_t
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr_initial = lr_initial
        self.lr_min = lr_min
        self.eta_range = eta_range
        self.base_width = base_width
        self.latent_dim = latent_dim
        self.loss = loss
        self.recon_weight = recon_weight
        self.r1_gamma = r1_gamma
        self.random_state = random_state

    def _training_config(self) -> training.TrainingConfig:
        return training.TrainingConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr_initial=self.lr_initial,
            lr_min=self.lr_min,
            eta_range=tuple(self.eta_range),
            T=self.n_steps,
            seed=self.random_state,
            base_width=self.base_width,
            latent_dim=self.latent_dim,
            loss=self.loss,
            recon_weight=self.recon_weight,
            r1_gamma=self.r1_gamma,
        )

    def fit(self, X, y=None, val_images=None):
        stack = _as_stack(X)
        gen, critic, log = training.train(stack, self._training_config(), val_images=val_images)
        self.generator_ = gen
        self.critic_ = critic
        self.schedule_ = schedule.make_schedule(self.n_steps)
        self.log_ = log
        self.image_shape_ = stack.shape[1:]
        return self

    def _check_fitted(self):
        if not hasattr(self, "generator_"):
            raise RuntimeError("this translator is not fitted; call fit() or load()")

    def transform(self, X, seed=None, ablation="full"):
        self._check_fitted()
        stack = _as_stack(X)
        base_seed = self.random_state if seed is None else seed
        outputs = []
        for i, img in enumerate(stack):
            cfg = TranslationConfig(eta=self.eta, tilde_T=self.tilde_t, seed=base_seed + i, ablation=ablation)
            outputs.append(translate(img, cfg, self.generator_, self.schedule_).output)
        return np.stack(outputs)

    def predict(self, X):
        return self.transform(X)

    def translate_one(self, img, cfg: TranslationConfig):
        """Full-result single-image translation with an explicit config."""
        self._check_fitted()
        return translate(check_image(img), cfg, self.generator_, self.schedule_)

    def save(self, path) -> None:
        self._check_fitted()
        meta = {"estimator_params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.get_params().items()}}
        model.save_checkpoint(path, self.generator_, self.critic_, self.schedule_, meta)

    @classmethod
    def load(cls, path) -> "FrequencyGuidedTranslator":
        gen, critic, sched, meta = model.load_checkpoint(path)
        params = meta.get("estimator_params", {})
        if "eta_range" in params:
            params["eta_range"] = tuple(params["eta_range"])
        est = cls(**params) if params else cls(n_steps=sched.T)
        est.generator_ = gen
        est.critic_ = critic
        est.schedule_ = sched
        est.log_ = training.TrainingLog()
        return est
