"""Synthetic paired-domain data.

Targets are piecewise-constant phantoms (anti-aliased random ellipses and
convex polygons over a dark background, including a share of low-contrast
shapes so edge strength spans a useful range). Sources are the same images
degraded by band-limited shading plus a few faint streaks, so the domain
gap concentrates in a configurable intermediate radial-frequency band.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from .imagecore import check_image, load_image, save_image

SUPERSAMPLE = 4
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class PhantomSpec:
    """Geometry and intensity configuration for target phantoms."""

    size: int = 64
    n_shapes: tuple[int, int] = (4, 8)
    intensity_levels: tuple[float, ...] = (0.3, 0.45, 0.6, 0.75, 0.9)
    background: float = 0.15
    low_contrast_fraction: float = 0.4
    low_contrast_delta: tuple[float, float] = (0.03, 0.08)
    seed: int = 0

    def __post_init__(self):
        if self.size < 32:
            raise ValueError(f"size must be >= 32, got {self.size}")
        lo, hi = self.n_shapes
        if lo < 1 or hi < lo:
            raise ValueError(f"n_shapes must be a range with 1 <= lo <= hi, got {self.n_shapes}")
        if not self.intensity_levels:
            raise ValueError("need at least one intensity level")
        for v in (*self.intensity_levels, self.background):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"intensities must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class DegradationSpec:
    """Band-limited shading plus streaks turning a target into a source.

    The shading band sits low enough that its gradients stay mostly below
    the usable edge-threshold range while its amplitude carries the bulk
    of the domain gap; streaks are faint but steep, so they are the part
    the edge threshold can include or exclude.
    """

    band: tuple[float, float] = (0.015, 0.06)
    shading_strength: float = 0.04
    streak_strength: float = 0.05
    streak_count: int = 5
    seed: int = 0

    def __post_init__(self):
        f_lo, f_hi = self.band
        if not 0.0 < f_lo < f_hi < np.sqrt(2.0) / 2.0:
            raise ValueError(f"band must satisfy 0 < f_lo < f_hi < sqrt(2)/2, got {self.band}")
        if self.shading_strength < 0 or self.streak_strength < 0:
            raise ValueError("strengths must be >= 0")
        if self.streak_count < 0:
            raise ValueError(f"streak_count must be >= 0, got {self.streak_count}")


def _subpixel_grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Supersampled pixel-center coordinates, shape (size*SS, size*SS)."""
    n = size * SUPERSAMPLE
    coords = (np.arange(n) + 0.5) / SUPERSAMPLE
    return np.meshgrid(coords, coords, indexing="ij")


def _downsample(mask: np.ndarray, size: int) -> np.ndarray:
    """Box-average a supersampled boolean mask into per-pixel coverage."""
    m = mask.reshape(size, SUPERSAMPLE, size, SUPERSAMPLE)
    return m.mean(axis=(1, 3))


def ellipse_coverage(size: int, cy: float, cx: float, ry: float, rx: float, angle: float) -> np.ndarray:
    """Anti-aliased coverage of a rotated ellipse, values in [0, 1]."""
    yy, xx = _subpixel_grid(size)
    dy, dx = yy - cy, xx - cx
    c, s = np.cos(angle), np.sin(angle)
    u = (c * dx + s * dy) / rx
    v = (-s * dx + c * dy) / ry
    return _downsample(u * u + v * v <= 1.0, size)


def polygon_coverage(size: int, vertices: np.ndarray) -> np.ndarray:
    """Anti-aliased coverage of a convex polygon given (y, x) vertices."""
    hull = ConvexHull(vertices)
    pts = vertices[hull.vertices]
    # Shoelace sign tells the traversal orientation in (y, x) coordinates.
    ys, xs = pts[:, 0], pts[:, 1]
    area2 = np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys)
    sign = 1.0 if area2 >= 0 else -1.0
    yy, xx = _subpixel_grid(size)
    inside = np.ones(yy.shape, dtype=bool)
    for i in range(len(pts)):
        y1, x1 = pts[i]
        y2, x2 = pts[(i + 1) % len(pts)]
        cross = (x2 - x1) * (yy - y1) - (y2 - y1) * (xx - x1)
        inside &= sign * cross >= 0
    return _downsample(inside, size)


def make_target_phantom(spec: PhantomSpec, rng: np.random.Generator) -> np.ndarray:
    """Render one target-domain phantom; deterministic per RNG state.

    Shapes are painted largest-first so later (smaller) shapes read as
    inserts. Each shape takes one of the configured intensity levels,
    except low-contrast shapes, which sit a small delta above or below
    whatever they cover.
    """
    size = spec.size
    canvas = np.full((size, size), spec.background)
    n = int(rng.integers(spec.n_shapes[0], spec.n_shapes[1] + 1))

    shapes = []
    for _ in range(n):
        kind = rng.choice(["ellipse", "polygon"])
        cy, cx = rng.uniform(0.2 * size, 0.8 * size, size=2)
        if kind == "ellipse":
            ry, rx = rng.uniform(0.07 * size, 0.26 * size, size=2)
            angle = rng.uniform(0.0, np.pi)
            cov = ellipse_coverage(size, cy, cx, ry, rx, angle)
        else:
            cov = None
            while cov is None:
                n_pts = int(rng.integers(3, 8))
                radius = rng.uniform(0.07 * size, 0.24 * size)
                pts = np.stack([cy, cx]) + rng.uniform(-radius, radius, size=(n_pts, 2))
                try:
                    cov = polygon_coverage(size, pts)
                except Exception:  # degenerate (collinear) draw: redraw
                    cov = None
        low_contrast = rng.random() < spec.low_contrast_fraction
        level = float(rng.choice(spec.intensity_levels))
        delta = float(rng.uniform(*spec.low_contrast_delta) * rng.choice([-1.0, 1.0]))
        shapes.append((float(cov.sum()), cov, low_contrast, level, delta))

    shapes.sort(key=lambda item: -item[0])  # paint big shapes first
    for _, cov, low_contrast, level, delta in shapes:
        interior = cov > 0.5
        if low_contrast and interior.any():
            value = float(np.clip(canvas[interior].mean() + delta, 0.0, 1.0))
        else:
            value = level
        canvas = canvas * (1.0 - cov) + value * cov
    return np.clip(canvas, 0.0, 1.0)


def band_limited_field(shape: tuple[int, int], band: tuple[float, float], rng: np.random.Generator) -> np.ndarray:
    """Unit-variance random field with spectral support inside a radial band."""
    h, w = shape
    rf = np.hypot.outer(np.fft.fftfreq(h), np.fft.fftfreq(w))
    mask = (rf >= band[0]) & (rf <= band[1])
    spectrum = np.fft.fft2(rng.standard_normal((h, w))) * mask
    field = np.real(np.fft.ifft2(spectrum))
    std = field.std()
    if std == 0:
        raise ValueError(f"band {band} contains no frequency samples for shape {shape}")
    return field / std


def _add_streaks(img: np.ndarray, spec: DegradationSpec, rng: np.random.Generator) -> np.ndarray:
    h, w = img.shape
    yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    field = np.zeros_like(img)
    for _ in range(spec.streak_count):
        py, px = rng.uniform(0, h), rng.uniform(0, w)
        theta = rng.uniform(0.0, np.pi)
        width = rng.uniform(0.7, 1.2)
        amp = spec.streak_strength * rng.uniform(0.4, 1.0) * rng.choice([-1.0, 1.0])
        dist = np.abs(-(xx - px) * np.sin(theta) + (yy - py) * np.cos(theta))
        field += amp * np.exp(-(dist**2) / (2.0 * width**2))
    # keep the degradation DC-neutral: the gap lives in the band, not at DC
    return img + field - field.mean()


def degrade_to_source(img, spec: DegradationSpec, rng: np.random.Generator) -> np.ndarray:
    """Degrade a target image into its paired source-domain counterpart."""
    arr = check_image(img)
    out = arr
    if spec.shading_strength > 0:
        out = out + spec.shading_strength * band_limited_field(arr.shape, spec.band, rng)
    if spec.streak_strength > 0 and spec.streak_count > 0:
        out = _add_streaks(out, spec, rng)
    if out is arr:
        return arr.copy()
    return np.clip(out, 0.0, 1.0)


def pair_rngs(pspec: PhantomSpec, dspec: DegradationSpec, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent per-pair RNG streams derived from the spec seeds."""
    target_rng = np.random.default_rng([pspec.seed, index, 0])
    degrade_rng = np.random.default_rng([dspec.seed, index, 1])
    return target_rng, degrade_rng


def make_pair(pspec: PhantomSpec, dspec: DegradationSpec, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministically build the (target, source) pair for one index."""
    target_rng, degrade_rng = pair_rngs(pspec, dspec, index)
    target = make_target_phantom(pspec, target_rng)
    source = degrade_to_source(target, dspec, degrade_rng)
    return target, source


def make_paired_dataset(n: int, pspec: PhantomSpec, dspec: DegradationSpec, out_dir) -> dict:
    """Write n (target, source) pairs as raw float32 plus a JSON manifest.

    Layout: ``target/NNNN.f32(+json)``, ``source/NNNN.f32(+json)``,
    ``manifest.json``. Per-pair seeds derive from the spec seeds and the
    pair index, so re-running reproduces the files byte for byte.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out_dir = Path(out_dir)
    (out_dir / "target").mkdir(parents=True, exist_ok=True)
    (out_dir / "source").mkdir(parents=True, exist_ok=True)

    pairs = []
    for i in range(n):
        target, source = make_pair(pspec, dspec, i)
        t_rel, s_rel = f"target/{i:04d}.f32", f"source/{i:04d}.f32"
        save_image(target, out_dir / t_rel)
        save_image(source, out_dir / s_rel)
        pairs.append(
            {
                "index": i,
                "target": t_rel,
                "source": s_rel,
                "target_seed": [pspec.seed, i, 0],
                "source_seed": [dspec.seed, i, 1],
            }
        )

    manifest = {
        "format_version": 1,
        "n": n,
        "size": pspec.size,
        "phantom_spec": asdict(pspec),
        "degradation_spec": asdict(dspec),
        "pairs": pairs,
    }
    (out_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2))
    return manifest


def load_paired_dataset(dataset_dir) -> dict:
    """Load a dataset written by :func:`make_paired_dataset`.

    Returns ``{"targets": (n, h, w), "sources": (n, h, w), "manifest": ...}``.
    """
    dataset_dir = Path(dataset_dir)
    manifest = json.loads((dataset_dir / MANIFEST_NAME).read_text())
    targets = np.stack([load_image(dataset_dir / p["target"]) for p in manifest["pairs"]])
    sources = np.stack([load_image(dataset_dir / p["source"]) for p in manifest["pairs"]])
    return {"targets": targets, "sources": sources, "manifest": manifest}


def load_image_dir(directory) -> tuple[np.ndarray, list[str]]:
    """Load all .f32/.png images of a directory in sorted-name order."""
    directory = Path(directory)
    paths = sorted(p for p in directory.iterdir() if p.suffix in (".f32", ".png"))
    if not paths:
        raise ValueError(f"no .f32 or .png images under {directory}")
    return np.stack([load_image(p) for p in paths]), [p.name for p in paths]
