"""Image representation, HSV color math, and PNG/JPEG file I/O.

Images are plain numpy float64 arrays of shape (H, W, 3) in RGB order with
every value in [0, 1]. Arrays are treated as immutable: every function
returns a new array and never mutates its input.
"""

import logging
import os

import cv2
import numpy as np

logger = logging.getLogger("editplan")


class ImageError(ValueError):
    """Raised for invalid image data or unsupported image files."""


def validate_image(img):
    """Check that `img` is a valid (H, W, 3) float image in [0, 1].

    Returns the array as float64 (copying only if a cast is needed).
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ImageError(f"expected (H, W, 3) RGB array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ImageError("image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ImageError("image values must lie in [0, 1]")
    return arr


def clamp01(arr):
    """Clip an array into [0, 1]."""
    return np.clip(arr, 0.0, 1.0)


def rgb_to_hsv(img):
    """Vectorized hexcone RGB -> HSV conversion.

    Hue is normalized to [0, 1); gray pixels get H = 0 and S = 0.
    """
    img = np.asarray(img, dtype=np.float64)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    maxc = img.max(axis=-1)
    minc = img.min(axis=-1)
    delta = maxc - minc

    v = maxc
    s = np.where(maxc > 0.0, delta / np.where(maxc > 0.0, maxc, 1.0), 0.0)

    safe = np.where(delta > 0.0, delta, 1.0)
    h = np.zeros_like(maxc)
    is_r = (maxc == r) & (delta > 0.0)
    is_g = (maxc == g) & (delta > 0.0) & ~is_r
    is_b = (delta > 0.0) & ~is_r & ~is_g
    h = np.where(is_r, np.mod((g - b) / safe, 6.0), h)
    h = np.where(is_g, (b - r) / safe + 2.0, h)
    h = np.where(is_b, (r - g) / safe + 4.0, h)
    h = np.mod(h / 6.0, 1.0)
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv):
    """Vectorized hexcone HSV -> RGB conversion, output clamped to [0, 1]."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = np.mod(h, 1.0) * 6.0
    i = np.floor(h6).astype(np.int64) % 6
    f = h6 - np.floor(h6)

    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))

    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return clamp01(np.stack([r, g, b], axis=-1))


def _decode(path, flags):
    if not os.path.exists(path):
        raise ImageError(f"no such file: {path}")
    raw = cv2.imread(str(path), flags)
    if raw is None:
        raise ImageError(f"could not decode image file: {path}")
    return raw


def load_image(path):
    """Load an 8-bit or 16-bit PNG/JPEG as an (H, W, 3) float array in [0, 1].

    Integer codes are mapped linearly (x / 255 or x / 65535). An alpha
    channel, if present, is dropped with a warning. Grayscale files are
    replicated to three channels.
    """
    raw = _decode(path, cv2.IMREAD_UNCHANGED)
    if raw.ndim == 2:
        raw = raw[:, :, None].repeat(3, axis=2)
    elif raw.shape[2] == 4:
        logger.warning("dropping alpha channel of %s", path)
        raw = raw[:, :, :3]
    elif raw.shape[2] != 3:
        raise ImageError(f"unsupported channel count {raw.shape[2]} in {path}")

    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise ImageError(f"unsupported sample type {raw.dtype} in {path}")
    # OpenCV decodes in BGR order.
    rgb = raw[:, :, ::-1].astype(np.float64) / scale
    return rgb


def save_image(img, path):
    """Save an image as 8-bit PNG, quantizing with round-half-up."""
    img = validate_image(img)
    codes = np.floor(img * 255.0 + 0.5).astype(np.uint8)
    ok = cv2.imwrite(str(path), codes[:, :, ::-1])
    if not ok:
        raise ImageError(f"could not write image file: {path}")


def luminance(img):
    """Rec. 601 luma (0.299 R + 0.587 G + 0.114 B) as an (H, W) array."""
    img = np.asarray(img, dtype=np.float64)
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


def load_mask(path, threshold=0.5):
    """Load a binary mask: luminance >= threshold -> 1.0, else 0.0.

    Accepts single-channel or RGB files. Values in the returned (H, W)
    float array are exactly 0.0 or 1.0.
    """
    rgb = load_image(path)
    lum = luminance(rgb)
    return (lum >= threshold).astype(np.float64)


def validate_mask(mask):
    """Check that `mask` is an (H, W) float array with values in {0, 1}."""
    arr = np.asarray(mask, dtype=np.float64)
    if arr.ndim != 2:
        raise ImageError(f"expected (H, W) mask, got shape {arr.shape}")
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise ImageError("mask values must be exactly 0 or 1")
    return arr


def resize_bilinear(img, width, height):
    """Bilinear resize to (height, width); used by the planning downscale."""
    img = np.asarray(img, dtype=np.float64)
    out = cv2.resize(img, (int(width), int(height)), interpolation=cv2.INTER_LINEAR)
    if out.ndim == 2:
        out = out[:, :, None].repeat(3, axis=2)
    return clamp01(out)
