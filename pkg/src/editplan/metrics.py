"""Evaluation metrics: L1 distance, SSIM, and across-image variance."""

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .cost import l1_cost
from .image import luminance

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(a, b):
    """Mean SSIM over 11x11 Gaussian windows (sigma 1.5) on luminance.

    Constants C1 = 0.01^2 and C2 = 0.03^2 on the [0, 1] range; windows are
    taken at every fully-interior position.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} pixels per side")

    x = luminance(a)
    y = luminance(b)
    win = _gaussian_window()

    def filt(img):
        return signal.convolve2d(img, win, mode="valid")

    mu_x = filt(x)
    mu_y = filt(y)
    mu_xx = mu_x * mu_x
    mu_yy = mu_y * mu_y
    mu_xy = mu_x * mu_y
    var_x = filt(x * x) - mu_xx
    var_y = filt(y * y) - mu_yy
    cov = filt(x * y) - mu_xy

    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    ssim_map = ((2.0 * mu_xy + c1) * (2.0 * cov + c2)) / (
        (mu_xx + mu_yy + c1) * (var_x + var_y + c2)
    )
    return float(ssim_map.mean())


def image_variance(images):
    """Per-element population variance across a list of images, averaged
    over all positions and channels."""
    if len(images) < 2:
        raise ValueError("image_variance needs at least 2 images")
    stack = np.stack([np.asarray(im, dtype=np.float64) for im in images])
    if len({im.shape for im in stack}) > 1:
        raise ValueError("images must share dimensions")
    return float(stack.var(axis=0).mean())


@dataclass
class MetricReport:
    l1: float
    ssim: float
    pairs: list | None = None  # per-image breakdown when batched

    def to_dict(self):
        d = {"l1": self.l1, "ssim": self.ssim}
        if self.pairs is not None:
            d["pairs"] = self.pairs
        return d


def compare(a, b):
    """L1 and SSIM between two images."""
    return MetricReport(l1=l1_cost(a, b), ssim=ssim(a, b))
