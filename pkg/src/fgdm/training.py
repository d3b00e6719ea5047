"""Adversarial training on target-domain images only.

Each batch draws a per-sample step t and edge threshold, forms the noisy
state, a real denoising pair from the analytic posterior around the true
image, and a fake pair from the generator's clean-image prediction pushed
through the same posterior. The critic is trained to tell the pairs apart
and the generator to fool it (non-saturating logistic losses). A plain
regression mode ("simple") is kept for smoke tests.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import torch
from torch.nn.functional import binary_cross_entropy_with_logits as bce_logits

from .filters import MAGNITUDE_MAX, sobel_gradient
from .model import CriticArch, GeneratorArch, init_critic, init_generator
from .schedule import make_schedule


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 60
    batch_size: int = 8
    lr_initial: float = 1e-4
    lr_min: float = 1e-5
    eta_range: tuple[int, int] = (1, 25)
    T: int = 8
    seed: int = 0
    checkpoint_every: int = 0  # epochs between checkpoint callbacks; 0 = final only
    base_width: int = 32
    latent_dim: int = 32
    loss: str = "adversarial"  # "adversarial" | "simple"
    recon_weight: float = 10.0  # weight of the clean-image regression term in adversarial mode
    r1_gamma: float = 0.0  # critic gradient penalty weight; 0 disables
    grad_clip: float = 1.0  # max gradient norm per step; 0 disables
    val_batch: int = 8

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.lr_min < self.lr_initial:
            raise ValueError("lr_min must be smaller than lr_initial")
        lo, hi = self.eta_range
        if not 0 <= lo <= hi <= MAGNITUDE_MAX:
            raise ValueError(f"eta_range must satisfy 0 <= lo <= hi <= {MAGNITUDE_MAX:.1f}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.loss not in ("adversarial", "simple"):
            raise ValueError(f"loss must be 'adversarial' or 'simple', got {self.loss!r}")


@dataclass
class EpochStats:
    epoch: int
    d_loss: float
    g_loss: float
    lr: float
    val_psnr: float


@dataclass
class TrainingLog:
    epochs: list[EpochStats] = field(default_factory=list)
    eta_counts: Counter = field(default_factory=Counter)

    def to_csv(self, path) -> None:
        lines = ["epoch,d_loss,g_loss,lr,val_psnr"]
        for e in self.epochs:
            lines.append(f"{e.epoch},{e.d_loss:.6f},{e.g_loss:.6f},{e.lr:.3e},{e.val_psnr:.4f}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass
class PairBatch:
    """One batch of denoising pairs as seen by the critic."""

    real_prev: torch.Tensor
    fake_prev: torch.Tensor
    s_t: torch.Tensor
    edge_cond: torch.Tensor
    t: torch.Tensor


def discriminator_loss(critic, batch: PairBatch) -> torch.Tensor:
    """Mean of -log D(real pair) - log(1 - D(fake pair))."""
    module = getattr(critic, "module", critic)
    real_logits = module(batch.real_prev, batch.s_t, batch.edge_cond, batch.t)
    fake_logits = module(batch.fake_prev, batch.s_t, batch.edge_cond, batch.t)
    return bce_logits(real_logits, torch.ones_like(real_logits)) + bce_logits(
        fake_logits, torch.zeros_like(fake_logits)
    )


def generator_loss(critic, batch: PairBatch) -> torch.Tensor:
    """Non-saturating objective: mean of -log D(fake pair)."""
    module = getattr(critic, "module", critic)
    fake_logits = module(batch.fake_prev, batch.s_t, batch.edge_cond, batch.t)
    return bce_logits(fake_logits, torch.ones_like(fake_logits))


def cosine_lr(epoch: int, total_epochs: int, lr_initial: float, lr_min: float) -> float:
    """Closed-form cosine annealing with exact endpoints."""
    if total_epochs <= 1:
        return lr_initial
    frac = epoch / (total_epochs - 1)
    return lr_min + 0.5 * (lr_initial - lr_min) * (1.0 + math.cos(math.pi * frac))


class Trainer:
    """Owns the seeded state of one training run; one instance per run."""

    def __init__(self, target_images, cfg: TrainingConfig, val_images=None):
        images = np.asarray(target_images, dtype=np.float32)
        if images.ndim != 3 or images.shape[0] == 0:
            raise ValueError(f"target_images must be a non-empty (n, h, w) stack, got {images.shape}")
        if not np.all(np.isfinite(images)):
            raise ValueError("target_images contain non-finite values")
        self.images = torch.from_numpy(images)
        self.cfg = cfg
        self.sched = make_schedule(cfg.T)
        self.alphas = torch.from_numpy(self.sched.alpha.astype(np.float32))
        self.sigma = math.sqrt(self.sched.sigma2)

        g_arch = GeneratorArch(base_width=cfg.base_width, latent_dim=cfg.latent_dim)
        c_arch = CriticArch(base_width=cfg.base_width)
        self.gen = init_generator(g_arch, seed=cfg.seed)
        self.critic = init_critic(c_arch, seed=cfg.seed)
        self.gen.module.train()
        self.critic.module.train()

        self.opt_g = torch.optim.Adam(self.gen.module.parameters(), lr=cfg.lr_initial, betas=(0.5, 0.999))
        self.opt_d = torch.optim.Adam(self.critic.module.parameters(), lr=cfg.lr_initial, betas=(0.5, 0.999))
        self.rng = np.random.default_rng(cfg.seed)
        self.tgen = torch.Generator().manual_seed(cfg.seed)

        # Sobel magnitudes are threshold-independent: cache once per image.
        mags = np.stack([sobel_gradient(im).magnitude for im in images.astype(np.float64)])
        self.magnitudes = torch.from_numpy(mags.astype(np.float32))

        self.val_images = None
        if val_images is not None and len(val_images) > 0:
            self.val_images = torch.from_numpy(np.asarray(val_images, dtype=np.float32))
        self.log = TrainingLog()
        self._nonfinite_streak = 0

    # --- sampling helpers (torch mirrors of the schedule module formulas) ---

    def _gather_alpha(self, t: torch.Tensor) -> torch.Tensor:
        return self.alphas[t - 1].view(-1, 1, 1, 1)

    def _forward_state(self, x0: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        a_t = self._gather_alpha(t)
        z = torch.randn(x0.shape, generator=self.tgen) * self.sigma
        return torch.sqrt(a_t) * x0 + torch.sqrt(1.0 - a_t) * z

    def _posterior_state(self, s_t: torch.Tensor, s0_hat: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        a_t = self._gather_alpha(t)
        a_prev = self.alphas[torch.clamp(t - 2, min=0)].view(-1, 1, 1, 1)
        r = a_t / a_prev
        coef_clean = torch.sqrt(a_prev) * (1.0 - r) / (1.0 - a_t)
        coef_state = torch.sqrt(r) * (1.0 - a_prev) / (1.0 - a_t)
        var = (1.0 - r) * (1.0 - a_prev) / (1.0 - a_t)
        z = torch.randn(s_t.shape, generator=self.tgen)
        stepped = coef_clean * s0_hat + coef_state * s_t + torch.sqrt(var * self.sched.sigma2) * z
        terminal = (t == 1).view(-1, 1, 1, 1)
        return torch.where(terminal, s0_hat, stepped)

    def _draw_conditions(self, idx: np.ndarray) -> tuple[torch.Tensor, ...]:
        cfg = self.cfg
        x0 = self.images[idx][:, None]
        t = torch.from_numpy(self.rng.integers(1, cfg.T + 1, size=len(idx))).long()
        etas = self.rng.integers(cfg.eta_range[0], cfg.eta_range[1] + 1, size=len(idx))
        self.log.eta_counts.update(int(e) for e in etas)
        mags = self.magnitudes[idx][:, None]
        eta_t = torch.from_numpy(etas.astype(np.float32)).view(-1, 1, 1, 1)
        edge_cond = torch.where(mags >= eta_t, mags, torch.zeros(())) / MAGNITUDE_MAX
        return x0, t, edge_cond

    def _latent(self, batch: int) -> torch.Tensor:
        return torch.randn((batch, self.cfg.latent_dim), generator=self.tgen)

    # --- optimization steps -------------------------------------------------

    def discriminator_step(self, x0, t, edge_cond, s_t, real_prev) -> float:
        with torch.no_grad():
            s0_hat = self.gen.module(s_t, edge_cond, t, self._latent(len(t)))
            fake_prev = self._posterior_state(s_t, s0_hat, t)
        if self.cfg.r1_gamma > 0:
            real_prev = real_prev.detach().requires_grad_(True)
        batch = PairBatch(real_prev, fake_prev, s_t, edge_cond, t)
        loss = discriminator_loss(self.critic, batch)
        if self.cfg.r1_gamma > 0:
            real_logits = self.critic.module(real_prev, s_t, edge_cond, t)
            (grad,) = torch.autograd.grad(real_logits.sum(), real_prev, create_graph=True)
            loss = loss + 0.5 * self.cfg.r1_gamma * grad.pow(2).sum(dim=(1, 2, 3)).mean()
        self.opt_d.zero_grad(set_to_none=True)
        loss.backward()
        if self.cfg.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(self.critic.module.parameters(), self.cfg.grad_clip)
        self.opt_d.step()
        return float(loss.detach())

    def generator_step(self, x0, t, edge_cond, s_t) -> float:
        s0_hat = self.gen.module(s_t, edge_cond, t, self._latent(len(t)))
        if self.cfg.loss == "simple":
            loss = torch.mean((s0_hat - x0) ** 2)
        else:
            fake_prev = self._posterior_state(s_t, s0_hat, t)
            for p in self.critic.module.parameters():
                p.requires_grad_(False)
            batch = PairBatch(None, fake_prev, s_t, edge_cond, t)
            loss = generator_loss(self.critic, batch)
            if self.cfg.recon_weight > 0:
                # conditional-GAN style regression anchor: keeps pointwise
                # fidelity learnable within a desk-scale step budget
                loss = loss + self.cfg.recon_weight * torch.mean((s0_hat - x0) ** 2)
            for p in self.critic.module.parameters():
                p.requires_grad_(True)
        self.opt_g.zero_grad(set_to_none=True)
        loss.backward()
        if self.cfg.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(self.gen.module.parameters(), self.cfg.grad_clip)
        self.opt_g.step()
        return float(loss.detach())

    def _check_finite(self, *losses: float) -> None:
        if all(math.isfinite(x) for x in losses):
            self._nonfinite_streak = 0
            return
        self._nonfinite_streak += 1
        if self._nonfinite_streak >= 3:
            raise RuntimeError(
                "training diverged: 3 consecutive non-finite losses "
                f"(last d/g: {losses}); try a lower learning rate"
            )

    def run_epoch(self, epoch: int) -> EpochStats:
        cfg = self.cfg
        lr = cosine_lr(epoch, cfg.epochs, cfg.lr_initial, cfg.lr_min)
        for opt in (self.opt_g, self.opt_d):
            for group in opt.param_groups:
                group["lr"] = lr

        order = self.rng.permutation(len(self.images))
        d_losses, g_losses = [], []
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x0, t, edge_cond = self._draw_conditions(idx)
            s_t = self._forward_state(x0, t)
            d_loss = 0.0
            if cfg.loss == "adversarial":
                with torch.no_grad():
                    real_prev = self._posterior_state(s_t, x0, t)
                d_loss = self.discriminator_step(x0, t, edge_cond, s_t, real_prev)
            g_loss = self.generator_step(x0, t, edge_cond, s_t)
            self._check_finite(d_loss, g_loss)
            d_losses.append(d_loss)
            g_losses.append(g_loss)

        stats = EpochStats(
            epoch=epoch,
            d_loss=float(np.mean(d_losses)) if d_losses else math.nan,
            g_loss=float(np.mean(g_losses)) if g_losses else math.nan,
            lr=lr,
            val_psnr=self._validation_psnr(),
        )
        self.log.epochs.append(stats)
        return stats

    def _validation_psnr(self) -> float:
        """Reconstruction PSNR of held-out target images through the full
        translation loop started at t = T (eta fixed at 10)."""
        if self.val_images is None:
            return math.nan
        cfg = self.cfg
        k = min(cfg.val_batch, len(self.val_images))
        x = self.val_images[:k][:, None]
        mags = torch.stack(
            [torch.from_numpy(sobel_gradient(im.numpy().astype(np.float64)).magnitude.astype(np.float32)) for im in self.val_images[:k]]
        )[:, None]
        edge_cond = torch.where(mags >= 10.0, mags, torch.zeros(())) / MAGNITUDE_MAX
        vgen = torch.Generator().manual_seed(self.cfg.seed + 7777)
        self.gen.module.eval()
        with torch.no_grad():
            a_T = self.alphas[cfg.T - 1]
            s = torch.sqrt(a_T) * x + torch.sqrt(1 - a_T) * self.sigma * torch.randn(x.shape, generator=vgen)
            for step in range(cfg.T, 0, -1):
                t_vec = torch.full((k,), step, dtype=torch.long)
                latent = torch.randn((k, cfg.latent_dim), generator=vgen)
                s0_hat = self.gen.module(s, edge_cond, t_vec, latent)
                if step == 1:
                    s = s0_hat
                else:
                    a_t = self.alphas[step - 1]
                    a_prev = self.alphas[step - 2]
                    r = a_t / a_prev
                    coef_clean = torch.sqrt(a_prev) * (1 - r) / (1 - a_t)
                    coef_state = torch.sqrt(r) * (1 - a_prev) / (1 - a_t)
                    var = (1 - r) * (1 - a_prev) / (1 - a_t)
                    z = torch.randn(s.shape, generator=vgen)
                    s = coef_clean * s0_hat + coef_state * s + math.sqrt(float(var) * self.sched.sigma2) * z
            out = torch.clamp(s, 0.0, 1.0)
        self.gen.module.train()
        mse = torch.mean((out - x) ** 2, dim=(1, 2, 3))
        psnr = torch.where(mse > 0, 10.0 * torch.log10(1.0 / mse), torch.full_like(mse, 100.0))
        return float(torch.clamp(psnr, max=100.0).mean())


def train(target_images, cfg: TrainingConfig, val_images=None, on_epoch=None):
    """Run the full training loop; returns (generator, critic, log).

    ``on_epoch(trainer, stats)`` fires after every epoch; callers decide
    what to do with it (logging, checkpoint cadence). With ``epochs=0``
    the freshly initialized weights come back untouched with an empty log.
    """
    trainer = Trainer(target_images, cfg, val_images=val_images)
    for epoch in range(cfg.epochs):
        stats = trainer.run_epoch(epoch)
        if on_epoch is not None:
            on_epoch(trainer, stats)
    trainer.gen.module.eval()
    trainer.critic.module.eval()
    return trainer.gen, trainer.critic, trainer.log
