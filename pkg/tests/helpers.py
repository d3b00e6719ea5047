"""Independent oracle implementations shared by the unit and acceptance suites.

Everything here deliberately avoids the library's own code paths: explicit
padding + shifted sums instead of scipy correlation, window loops instead
of vectorized filtering, DFT matrices instead of np.fft where feasible.
"""

import math

import numpy as np

SOBEL_KX = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_KY = SOBEL_KX.T


def sobel_oracle_shifted(img, intensity_scale=255.0):
    """Replicate-padded cross-correlation via nine shifted slices."""
    scaled = intensity_scale * np.asarray(img, dtype=np.float64)
    padded = np.pad(scaled, 1, mode="edge")
    h, w = scaled.shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            window = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
            gx += SOBEL_KX[dy + 1, dx + 1] * window
            gy += SOBEL_KY[dy + 1, dx + 1] * window
    return gx, gy, np.sqrt(gx**2 + gy**2)


def high_pass_oracle(img, eta, magnitude_max=255.0 * 4.0 * math.sqrt(2.0)):
    _, _, mag = sobel_oracle_shifted(img)
    return np.where(mag >= eta, mag, 0.0) / magnitude_max


def psnr_oracle(a, b):
    """Pixel-loop PSNR, peak 1, capped at 100 dB."""
    total = 0.0
    h, w = a.shape
    for y in range(h):
        for x in range(w):
            d = a[y, x] - b[y, x]
            total += d * d
    mse = total / (h * w)
    if mse == 0:
        return 100.0
    return min(10.0 * math.log10(1.0 / mse), 100.0)


def ssim_oracle(a, b, size=11, sigma=1.5, c1=0.01**2, c2=0.03**2):
    """Window-loop SSIM over valid positions with a Gaussian window."""
    offs = np.arange(size) - (size - 1) / 2
    g = np.exp(-(offs**2) / (2 * sigma**2))
    w = np.outer(g, g)
    w /= w.sum()
    h, wid = a.shape
    vals = []
    for y in range(h - size + 1):
        for x in range(wid - size + 1):
            pa = a[y : y + size, x : x + size]
            pb = b[y : y + size, x : x + size]
            mu_a = np.sum(w * pa)
            mu_b = np.sum(w * pb)
            var_a = np.sum(w * pa * pa) - mu_a**2
            var_b = np.sum(w * pb * pb) - mu_b**2
            cov = np.sum(w * pa * pb) - mu_a * mu_b
            num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
            den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
            vals.append(num / den)
    return float(np.mean(vals))


def frequency_mse_oracle(a, b):
    """Spectral MSE via explicit DFT matrices (independent of np.fft)."""
    h, w = a.shape
    wy = np.exp(-2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    wx = np.exp(-2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    fa = np.abs(wy @ a @ wx) / np.sqrt(h * w)
    fb = np.abs(wy @ b @ wx) / np.sqrt(h * w)
    return float(np.mean((fa - fb) ** 2))


def synthesize_powerlaw_field(shape, k0, a0, rng):
    """Real field whose orthonormal PSD is exactly k0 / f^a0 away from DC."""
    h, w = shape
    rf = np.hypot.outer(np.fft.fftfreq(h), np.fft.fftfreq(w))
    F = np.zeros(shape, dtype=complex)
    for u in range(h):
        for v in range(w):
            if rf[u, v] == 0:
                continue
            uu, vv = (-u) % h, (-v) % w
            mag = np.sqrt(k0 / rf[u, v] ** a0)
            if (u, v) == (uu, vv):
                F[u, v] = mag * rng.choice([-1.0, 1.0])
            elif (u, v) < (uu, vv):
                phase = rng.uniform(0, 2 * np.pi)
                F[u, v] = mag * np.exp(1j * phase)
                F[uu, vv] = mag * np.exp(-1j * phase)
    return np.real(np.fft.ifft2(F, norm="ortho"))


def select_tilde_T_oracle(params, sched):
    """Independent exhaustive scan of |SNR - phi| over all steps."""
    gaps = []
    for t in range(1, sched.T + 1):
        alpha = sched.alpha_at(t)
        if alpha == 1.0:
            gaps.append(math.inf)
            continue
        snr = math.sqrt(alpha) * params.k / (math.sqrt(1 - alpha) * params.psi**params.a * params.sigma2)
        gaps.append(abs(snr - params.phi))
    best = min(range(len(gaps)), key=lambda i: (gaps[i], i))
    return best + 1
