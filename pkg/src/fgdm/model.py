"""Conditional denoiser and time-dependent critic.

The generator is a small U-shaped encoder-decoder that predicts the clean
image from the channel-concatenated noisy state and edge condition, with a
sinusoidal step embedding added in every block and a latent vector
concatenated at the bottleneck. The critic is a strided convolutional
classifier over (previous state, current state, edge condition) triples
that scores whether a denoising step looks real at step t.

All activations are smooth (SiLU/GroupNorm/sigmoid), which keeps
finite-difference gradient checks meaningful.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from .imagecore import check_image
from .schedule import NoiseSchedule


@dataclass(frozen=True)
class GeneratorArch:
    base_width: int = 32
    width_mults: tuple[int, ...] = (1, 2, 4)
    latent_dim: int = 32
    time_dim: int = 64
    in_channels: int = 2  # noisy state + edge condition


@dataclass(frozen=True)
class CriticArch:
    base_width: int = 32
    width_mults: tuple[int, ...] = (1, 2, 4, 4)
    time_dim: int = 64
    in_channels: int = 3  # previous state + current state + edge condition


def _groups(channels: int) -> int:
    return math.gcd(8, channels)


def sinusoidal_embedding(t: torch.Tensor, dim: int, dtype: torch.dtype | None = None) -> torch.Tensor:
    """Standard sin/cos positional embedding of integer steps, shape (B, dim)."""
    half = dim // 2
    dtype = dtype or torch.get_default_dtype()
    freqs = torch.exp(torch.arange(half, dtype=dtype, device=t.device)
                      * (-math.log(10000.0) / max(half - 1, 1)))
    args = t.to(dtype)[:, None] * freqs[None, :]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=1)


class TimeMlp(nn.Module):
    def __init__(self, time_dim: int):
        super().__init__()
        if time_dim % 2:
            raise ValueError(f"time_dim must be even, got {time_dim}")
        self.time_dim = time_dim
        self.net = nn.Sequential(nn.Linear(time_dim, time_dim), nn.SiLU(), nn.Linear(time_dim, time_dim))

    def forward(self, t):
        return self.net(sinusoidal_embedding(t, self.time_dim, dtype=self.net[0].weight.dtype))


class ConvBlock(nn.Module):
    """GroupNorm/SiLU double conv with additive step embedding and residual."""

    def __init__(self, c_in: int, c_out: int, time_dim: int):
        super().__init__()
        self.norm1 = nn.GroupNorm(_groups(c_in), c_in)
        self.conv1 = nn.Conv2d(c_in, c_out, 3, padding=1)
        self.temb = nn.Linear(time_dim, c_out)
        self.norm2 = nn.GroupNorm(_groups(c_out), c_out)
        self.conv2 = nn.Conv2d(c_out, c_out, 3, padding=1)
        self.skip = nn.Conv2d(c_in, c_out, 1) if c_in != c_out else nn.Identity()

    def forward(self, x, emb):
        h = self.conv1(torch.nn.functional.silu(self.norm1(x)))
        h = h + self.temb(emb)[:, :, None, None]
        h = self.conv2(torch.nn.functional.silu(self.norm2(h)))
        return h + self.skip(x)


class GeneratorNet(nn.Module):
    """U-shaped clean-image predictor conditioned on edges, step, and latent."""

    def __init__(self, arch: GeneratorArch):
        super().__init__()
        self.arch = arch
        w = [arch.base_width * m for m in arch.width_mults]
        self.time_mlp = TimeMlp(arch.time_dim)
        self.stem = nn.Conv2d(arch.in_channels, w[0], 3, padding=1)
        self.enc1 = ConvBlock(w[0], w[0], arch.time_dim)
        self.down1 = nn.Conv2d(w[0], w[1], 3, stride=2, padding=1)
        self.enc2 = ConvBlock(w[1], w[1], arch.time_dim)
        self.down2 = nn.Conv2d(w[1], w[2], 3, stride=2, padding=1)
        self.mid = ConvBlock(w[2] + arch.latent_dim, w[2], arch.time_dim)
        self.up1 = nn.Conv2d(w[2], w[1], 3, padding=1)
        self.dec1 = ConvBlock(w[1] * 2, w[1], arch.time_dim)
        self.up2 = nn.Conv2d(w[1], w[0], 3, padding=1)
        self.dec2 = ConvBlock(w[0] * 2, w[0], arch.time_dim)
        self.head = nn.Conv2d(w[0], 1, 3, padding=1)

    def forward(self, s_t, edge_cond, t, latent):
        if s_t.shape[-1] % 4 or s_t.shape[-2] % 4:
            raise ValueError(f"spatial dims must be divisible by 4, got {tuple(s_t.shape[-2:])}")
        emb = self.time_mlp(t)
        h0 = self.enc1(self.stem(torch.cat([s_t, edge_cond], dim=1)), emb)
        h1 = self.enc2(self.down1(h0), emb)
        h2 = self.down2(h1)
        lat = latent[:, :, None, None].expand(-1, -1, h2.shape[-2], h2.shape[-1])
        h2 = self.mid(torch.cat([h2, lat], dim=1), emb)
        u1 = self.up1(torch.nn.functional.interpolate(h2, scale_factor=2, mode="nearest"))
        u1 = self.dec1(torch.cat([u1, h1], dim=1), emb)
        u2 = self.up2(torch.nn.functional.interpolate(u1, scale_factor=2, mode="nearest"))
        u2 = self.dec2(torch.cat([u2, h0], dim=1), emb)
        return self.head(u2)


class CriticNet(nn.Module):
    """Strided conv classifier scoring (s_prev, s_t, edges) at step t."""

    def __init__(self, arch: CriticArch):
        super().__init__()
        self.arch = arch
        w = [arch.base_width * m for m in arch.width_mults]
        self.time_mlp = TimeMlp(arch.time_dim)
        self.stem = nn.Conv2d(arch.in_channels, w[0], 3, padding=1)
        blocks = []
        downs = []
        c_prev = w[0]
        for c in w:
            blocks.append(ConvBlock(c_prev, c, arch.time_dim))
            downs.append(nn.Conv2d(c, c, 3, stride=2, padding=1))
            c_prev = c
        self.blocks = nn.ModuleList(blocks)
        self.downs = nn.ModuleList(downs)
        self.out_norm = nn.LayerNorm(c_prev)  # applied after pooling: spatial size free
        self.fc = nn.Linear(c_prev, 1)

    def forward(self, s_prev, s_t, edge_cond, t):
        emb = self.time_mlp(t)
        h = self.stem(torch.cat([s_prev, s_t, edge_cond], dim=1))
        for block, down in zip(self.blocks, self.downs):
            h = down(block(h, emb))
        h = torch.nn.functional.silu(self.out_norm(h.mean(dim=(2, 3))))
        return self.fc(h).squeeze(1)  # logits, shape (B,)


@dataclass
class DenoiserParams:
    """Opaque trained generator weights plus their architecture descriptor."""

    arch: GeneratorArch
    module: GeneratorNet


@dataclass
class CriticParams:
    """Opaque trained critic weights plus their architecture descriptor."""

    arch: CriticArch
    module: CriticNet


def init_generator(arch: GeneratorArch, seed: int = 0) -> DenoiserParams:
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        module = GeneratorNet(arch)
    module.eval()
    return DenoiserParams(arch=arch, module=module)


def init_critic(arch: CriticArch, seed: int = 0) -> CriticParams:
    with torch.random.fork_rng():
        torch.manual_seed(seed + 1)
        module = CriticNet(arch)
    module.eval()
    return CriticParams(arch=arch, module=module)


def _as_batch(img: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(img, dtype=np.float32))[None, None]


def generator_predict(s_t, t: int, edge_cond, latent, params: DenoiserParams) -> np.ndarray:
    """Predict the clean image from one noisy state (single-image API)."""
    s_t = check_image(s_t, "s_t")
    edge_cond = check_image(edge_cond, "edge condition")
    if s_t.shape != edge_cond.shape:
        raise ValueError(f"shape mismatch: s_t {s_t.shape} vs condition {edge_cond.shape}")
    latent = np.asarray(latent, dtype=np.float32).reshape(1, -1)
    if latent.shape[1] != params.arch.latent_dim:
        raise ValueError(f"latent must have length {params.arch.latent_dim}, got {latent.shape[1]}")
    with torch.no_grad():
        out = params.module(
            _as_batch(s_t),
            _as_batch(edge_cond),
            torch.tensor([t], dtype=torch.long),
            torch.from_numpy(latent),
        )
    return out[0, 0].numpy().astype(np.float64)


def discriminator_score(s_prev, s_t, edge_cond, t: int, params: CriticParams) -> float:
    """Probability in (0, 1) that a denoising step (s_t -> s_prev) is real."""
    s_prev = check_image(s_prev, "s_prev")
    s_t = check_image(s_t, "s_t")
    edge_cond = check_image(edge_cond, "edge condition")
    if not (s_prev.shape == s_t.shape == edge_cond.shape):
        raise ValueError("s_prev, s_t and the edge condition must share a shape")
    with torch.no_grad():
        logit = params.module(
            _as_batch(s_prev), _as_batch(s_t), _as_batch(edge_cond), torch.tensor([t], dtype=torch.long)
        )
    return float(torch.sigmoid(logit)[0])


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


# --- checkpoint format: flat float32 blobs + a JSON metadata record -------

CHECKPOINT_VERSION = 1


def _flatten_state(module: nn.Module) -> tuple[np.ndarray, list[dict]]:
    index = []
    chunks = []
    for name, tensor in module.state_dict().items():
        arr = tensor.detach().cpu().numpy().astype(np.float32)
        index.append({"name": name, "shape": list(arr.shape)})
        chunks.append(arr.ravel())
    blob = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.float32)
    return blob.astype(np.float32), index


def _restore_state(module: nn.Module, blob: np.ndarray, index: list[dict]) -> None:
    state = {}
    offset = 0
    for entry in index:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        state[entry["name"]] = torch.from_numpy(blob[offset : offset + size].reshape(shape).copy())
        offset += size
    module.load_state_dict(state)


def save_checkpoint(path, gen: DenoiserParams, critic: CriticParams, sched: NoiseSchedule, train_meta: dict | None = None) -> None:
    """Write both networks as flat float32 blobs with a JSON metadata record."""
    gen_blob, gen_index = _flatten_state(gen.module)
    critic_blob, critic_index = _flatten_state(critic.module)
    meta = {
        "version": CHECKPOINT_VERSION,
        "schedule": json.loads(sched.to_json()),
        "generator_arch": asdict(gen.arch),
        "critic_arch": asdict(critic.arch),
        "generator_index": gen_index,
        "critic_index": critic_index,
        "training": train_meta or {},
    }
    with open(path, "wb") as fh:  # keep the exact path (np.savez appends .npz)
        np.savez(
            fh,
            meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
            generator=gen_blob,
            critic=critic_blob,
        )


def load_checkpoint(path) -> tuple[DenoiserParams, CriticParams, NoiseSchedule, dict]:
    """Load a checkpoint written by :func:`save_checkpoint`."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        gen_blob = data["generator"]
        critic_blob = data["critic"]
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
    sched = NoiseSchedule(
        T=int(meta["schedule"]["T"]),
        alpha=np.asarray(meta["schedule"]["alpha"]),
        sigma2=float(meta["schedule"]["sigma2"]),
    )
    g_arch = GeneratorArch(**{**meta["generator_arch"], "width_mults": tuple(meta["generator_arch"]["width_mults"])})
    c_arch = CriticArch(**{**meta["critic_arch"], "width_mults": tuple(meta["critic_arch"]["width_mults"])})
    gen = DenoiserParams(arch=g_arch, module=GeneratorNet(g_arch))
    critic = CriticParams(arch=c_arch, module=CriticNet(c_arch))
    _restore_state(gen.module, gen_blob, meta["generator_index"])
    _restore_state(critic.module, critic_blob, meta["critic_index"])
    gen.module.eval()
    critic.module.eval()
    return gen, critic, sched, meta["training"]
