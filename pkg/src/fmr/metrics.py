"""Reconstruction fidelity metrics: disk MSE, SSIM, PSNR."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate

from .errors import DimMismatch, TooSmall
from .image import GrayImage, disk_mask

_C1 = 0.01**2
_C2 = 0.03**2
_PSNR_CAP = 99.0


def _check_dims(a: GrayImage, b: GrayImage) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise DimMismatch(f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}")


def mse_reconstruction_error(a: GrayImage, b: GrayImage) -> float:
    """Mean squared difference over the inscribed disk."""
    _check_dims(a, b)
    mask = disk_mask(a).pixel_mask(a.height, a.width)
    return float(np.mean((a.pixels[mask] - b.pixels[mask]) ** 2))


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(a: GrayImage, b: GrayImage) -> float:
    """Structural similarity on [0,1] images, 11x11 Gaussian window.

    The per-pixel SSIM map is averaged over windows centered inside the
    inscribed disk; windows touching the frame use reflected padding.
    """
    _check_dims(a, b)
    if min(a.pixels.shape) < 11:
        raise TooSmall("need at least 11 pixels per side for the SSIM window")
    w = _gaussian_window()
    x, y = a.pixels, b.pixels
    opts = {"mode": "reflect"}
    mu_x = correlate(x, w, **opts)
    mu_y = correlate(y, w, **opts)
    var_x = correlate(x * x, w, **opts) - mu_x**2
    var_y = correlate(y * y, w, **opts) - mu_y**2
    cov = correlate(x * y, w, **opts) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _C1) * (2.0 * cov + _C2)
    den = (mu_x**2 + mu_y**2 + _C1) * (var_x + var_y + _C2)
    mask = disk_mask(a).pixel_mask(a.height, a.width)
    return float(np.mean(num[mask] / den[mask]))


def psnr(a: GrayImage, b: GrayImage) -> float:
    """10 log10(1/MSE) in dB, capped at 99 for (near-)identical images."""
    mse = mse_reconstruction_error(a, b)
    if mse <= 0.0:
        return _PSNR_CAP
    return float(min(10.0 * np.log10(1.0 / mse), _PSNR_CAP))
