"""Grayscale image handling shared by the whole package.

Images are plain 2-D numpy arrays (float64 internally). Domain images live
in [0, 1]; intermediate noisy states may leave that range. Two on-disk
formats are supported:

* 16-bit grayscale PNG for human-visible assets,
* raw little-endian float32 (``<name>.f32``) with a JSON sidecar
  (``<name>.json`` holding ``height``, ``width``, ``dtype``) for lossless
  fixtures that must round-trip bit-exactly.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

PNG_MAX = 65535
RAW_DTYPE = "f32le"
_GRAY_PNG_MODES = {"I;16": 65535.0, "I;16B": 65535.0, "I": 65535.0, "L": 255.0}


def check_image(img, name: str = "image") -> np.ndarray:
    """Validate a 2-D finite image and return it as a float64 array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf values")
    return arr


def check_same_shape(a, b, names: str = "images") -> tuple[np.ndarray, np.ndarray]:
    """Validate two images and require matching shapes."""
    a = check_image(a, name=names + "[0]")
    b = check_image(b, name=names + "[1]")
    if a.shape != b.shape:
        raise ValueError(f"{names} must share a shape, got {a.shape} vs {b.shape}")
    return a, b


def clamp_unit(img) -> np.ndarray:
    """Clamp every value into [0, 1]; values already inside are unchanged."""
    return np.clip(check_image(img), 0.0, 1.0)


def white_noise(height: int, width: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Sample an i.i.d. Gaussian noise field with variance ``sigma2``."""
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    return rng.normal(0.0, np.sqrt(sigma2), size=(height, width))


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def decode_png_bytes(data: bytes) -> np.ndarray:
    """Decode grayscale PNG bytes to a [0, 1] image.

    Accepts 16-bit (preferred) and 8-bit grayscale. Anything else is a
    format error.
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode not in _GRAY_PNG_MODES:
                raise ValueError(f"expected grayscale PNG, got mode {mode!r}")
            arr = np.asarray(im, dtype=np.float64)
    except ValueError:
        raise
    except Exception as exc:  # Pillow raises a zoo of decode errors
        raise OSError(f"could not decode PNG data: {exc}") from exc
    return arr / _GRAY_PNG_MODES[mode]


def encode_png_bytes(img: np.ndarray) -> bytes:
    """Encode a [0, 1] image as 16-bit grayscale PNG bytes."""
    arr = _require_unit_range(img)
    quantized = np.rint(arr * PNG_MAX).astype(np.uint16)
    buf = io.BytesIO()
    Image.fromarray(quantized).save(buf, format="PNG")
    return buf.getvalue()


def load_image(path) -> np.ndarray:
    """Load an image from 16-bit grayscale PNG or raw float32 (+ sidecar).

    Returns a float64 array scaled to [0, 1] for PNG; raw floats are
    returned as stored.
    """
    path = Path(path)
    if path.suffix == ".f32":
        return _load_raw(path)
    try:
        data = path.read_bytes()
    except OSError:
        raise
    return decode_png_bytes(data)


def save_image(img, path) -> None:
    """Write an image as 16-bit grayscale PNG or raw float32 (+ sidecar).

    The format is picked from the extension (``.f32`` for raw, anything
    else is PNG). Values must be in [0, 1]; tiny excursions (<= 1e-6) are
    clamped, larger ones are a range error.
    """
    path = Path(path)
    arr = _require_unit_range(img)
    if path.suffix == ".f32":
        _save_raw(arr, path)
        return
    path.write_bytes(encode_png_bytes(arr))


def _require_unit_range(img) -> np.ndarray:
    arr = check_image(img)
    lo, hi = float(arr.min()), float(arr.max())
    if lo < -1e-6 or hi > 1.0 + 1e-6:
        raise ValueError(f"image values outside [0, 1]: min={lo:.6g}, max={hi:.6g}")
    return np.clip(arr, 0.0, 1.0)


def _save_raw(arr: np.ndarray, path: Path) -> None:
    path.write_bytes(arr.astype("<f4").tobytes())
    sidecar = {"height": arr.shape[0], "width": arr.shape[1], "dtype": RAW_DTYPE}
    _sidecar_path(path).write_text(json.dumps(sidecar))


def _load_raw(path: Path) -> np.ndarray:
    sidecar = json.loads(_sidecar_path(path).read_text())
    if sidecar.get("dtype") != RAW_DTYPE:
        raise ValueError(f"unsupported raw dtype {sidecar.get('dtype')!r}")
    h, w = int(sidecar["height"]), int(sidecar["width"])
    data = np.frombuffer(path.read_bytes(), dtype="<f4")
    if data.size != h * w:
        raise ValueError(f"raw file holds {data.size} values, sidecar says {h}x{w}")
    return data.reshape(h, w).astype(np.float64)
