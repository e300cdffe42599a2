"""The six parametric editing operations and their parameter spaces.

Every operation is a pure function (image in, new image out) and the output
is always clamped to [0, 1]. Scalar operations (brightness, saturation,
contrast, sharpness) take a single parameter with identity at 0; tone takes
8 positive curve weights and color 24 (one 8-weight curve per RGB channel),
identity at all-ones.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .image import clamp01, hsv_to_rgb, rgb_to_hsv, validate_mask

CURVE_PIECES = 8

# Reject curve weight vectors whose normalizer falls below this, even if
# per-component bounds are relaxed by configuration: division stability.
Z_MIN = 0.5

LAPLACIAN_KERNEL = np.array(
    [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]]
)


class ParamBoundsError(ValueError):
    """Raised when a parameter vector violates its operation's bounds."""


class OpKind(enum.Enum):
    BRIGHTNESS = "brightness"
    SATURATION = "saturation"
    CONTRAST = "contrast"
    SHARPNESS = "sharpness"
    TONE = "tone"
    COLOR = "color"

    def __str__(self):
        return self.value


ALL_OPS = (
    OpKind.BRIGHTNESS,
    OpKind.SATURATION,
    OpKind.CONTRAST,
    OpKind.SHARPNESS,
    OpKind.TONE,
    OpKind.COLOR,
)

PARAM_DIM = {
    OpKind.BRIGHTNESS: 1,
    OpKind.SATURATION: 1,
    OpKind.CONTRAST: 1,
    OpKind.SHARPNESS: 1,
    OpKind.TONE: CURVE_PIECES,
    OpKind.COLOR: 3 * CURVE_PIECES,
}


def op_from_name(name):
    try:
        return OpKind(name)
    except ValueError:
        raise ValueError(f"unknown operation {name!r}") from None


@dataclass(frozen=True)
class ParamSpace:
    """Box bounds and identity point for one operation's parameters."""

    lower: np.ndarray
    upper: np.ndarray
    identity: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        ident = np.asarray(self.identity, dtype=np.float64)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "identity", ident)
        if not (np.all(lo < ident) and np.all(ident < hi)):
            raise ValueError("identity point must lie strictly inside bounds")

    @property
    def dim(self):
        return self.lower.size

    @property
    def half_range(self):
        return (self.upper - self.lower) / 2.0

    def clip(self, params):
        return np.clip(np.asarray(params, dtype=np.float64), self.lower, self.upper)

    def contains(self, params):
        p = np.asarray(params, dtype=np.float64)
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))


# Default bounds: symmetric [-1, 1] for the scalar operations, and a
# positive floor on curve weights that keeps the normalizer Z >= 0.8 and
# the curves monotone.
SCALAR_BOUNDS = (-1.0, 1.0)
CURVE_BOUNDS = (0.1, 2.0)


def default_space(kind):
    dim = PARAM_DIM[kind]
    if dim == 1:
        lo, hi = SCALAR_BOUNDS
        ident = 0.0
    else:
        lo, hi = CURVE_BOUNDS
        ident = 1.0
    return ParamSpace(
        lower=np.full(dim, lo),
        upper=np.full(dim, hi),
        identity=np.full(dim, ident),
    )


DEFAULT_SPACES = {kind: default_space(kind) for kind in ALL_OPS}


def identity_params(kind, space=None):
    space = space or DEFAULT_SPACES[kind]
    return space.identity.copy()


def _check_params(kind, params, space):
    p = np.asarray(params, dtype=np.float64).ravel()
    if p.size != PARAM_DIM[kind]:
        raise ParamBoundsError(
            f"{kind} expects {PARAM_DIM[kind]} parameters, got {p.size}"
        )
    if not space.contains(p):
        raise ParamBoundsError(f"{kind} parameters {p} outside bounds")
    if kind in (OpKind.TONE, OpKind.COLOR):
        for block in p.reshape(-1, CURVE_PIECES):
            if block.sum() < Z_MIN:
                raise ParamBoundsError(
                    f"{kind} curve weights sum {block.sum():g} below {Z_MIN}"
                )
    return p


def apply_brightness(img, p):
    """Scale the HSV value channel by (1 + p) and clip."""
    hsv = rgb_to_hsv(img)
    hsv[..., 2] = clamp01((1.0 + p) * hsv[..., 2])
    return hsv_to_rgb(hsv)


def apply_saturation(img, p):
    """Scale the HSV saturation channel by (1 + p) and clip."""
    hsv = rgb_to_hsv(img)
    hsv[..., 1] = clamp01((1.0 + p) * hsv[..., 1])
    return hsv_to_rgb(hsv)


def apply_contrast(img, p):
    """Blend the image with its cosine-curve contrast enhancement.

    lum = 0.27 R + 0.67 G + 0.06 B; the enhanced image rescales each pixel
    by 0.5 * (1 - cos(pi * lum)) / lum, and the output is the convex-style
    combination (1 - p) * I + p * enhanced.
    """
    img = np.asarray(img, dtype=np.float64)
    lum = 0.27 * img[..., 0] + 0.67 * img[..., 1] + 0.06 * img[..., 2]
    enhanced_lum = 0.5 * (1.0 - np.cos(np.pi * lum))
    # lum -> 0 is a removable singularity: the enhanced pixel is black too.
    safe = np.where(lum < 1e-6, 1.0, lum)
    ratio = np.where(lum < 1e-6, 0.0, enhanced_lum / safe)
    enhanced = img * ratio[..., None]
    return clamp01((1.0 - p) * img + p * enhanced)


def apply_sharpness(img, p):
    """Add the scaled per-channel discrete Laplacian: I + p * lap(I).

    4-neighbor 3x3 kernel with replicate (clamp-to-edge) padding.
    """
    img = np.asarray(img, dtype=np.float64)
    lap = np.empty_like(img)
    for c in range(3):
        lap[..., c] = ndimage.convolve(img[..., c], LAPLACIAN_KERNEL, mode="nearest")
    return clamp01(img + p * lap)


def eval_curve(x, weights):
    """Piecewise-linear tone curve f(x) = (1/Z) sum_i clip(N x - i, 0, 1) w_i.

    Equal weights give the identity f(x) = x; f(0) = 0 and f(1) = 1 for any
    positive weights.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    n = w.size
    z = w.sum()
    out = np.zeros_like(x)
    for i in range(n):
        out += np.clip(n * x - i, 0.0, 1.0) * w[i]
    return out / z


def fit_curve_weights(x, y):
    """Least-squares curve weights w such that eval_curve(x, w) ~ y.

    eval_curve is linear in q = w / Z with sum(q) = 1, so the fit solves an
    equality-constrained least squares via its KKT system, then rescales to
    the all-ones identity scale (Z = CURVE_PIECES). Returns None when the
    system is degenerate. The result is a seed, not a final answer: callers
    should clip it into bounds and refine.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    n = CURVE_PIECES
    basis = np.stack([np.clip(n * x - i, 0.0, 1.0) for i in range(n)], axis=1)
    gram = basis.T @ basis + 1e-9 * np.eye(n)
    kkt = np.zeros((n + 1, n + 1))
    kkt[:n, :n] = gram
    kkt[:n, n] = 1.0
    kkt[n, :n] = 1.0
    rhs = np.concatenate([basis.T @ y, [1.0]])
    try:
        q = np.linalg.solve(kkt, rhs)[:n]
    except np.linalg.LinAlgError:
        return None
    return q * float(n)


def apply_tone(img, p):
    """Apply one 8-piece curve to all three channels."""
    img = np.asarray(img, dtype=np.float64)
    return clamp01(eval_curve(img, p))


def apply_color(img, p):
    """Apply three independent 8-piece curves, one per RGB channel."""
    img = np.asarray(img, dtype=np.float64)
    blocks = np.asarray(p, dtype=np.float64).reshape(3, CURVE_PIECES)
    out = np.empty_like(img)
    for c in range(3):
        out[..., c] = eval_curve(img[..., c], blocks[c])
    return clamp01(out)


_APPLY = {
    OpKind.BRIGHTNESS: lambda img, p: apply_brightness(img, p[0]),
    OpKind.SATURATION: lambda img, p: apply_saturation(img, p[0]),
    OpKind.CONTRAST: lambda img, p: apply_contrast(img, p[0]),
    OpKind.SHARPNESS: lambda img, p: apply_sharpness(img, p[0]),
    OpKind.TONE: apply_tone,
    OpKind.COLOR: apply_color,
}


def apply(kind, img, params, space=None):
    """Dispatch to the operation for `kind` after validating `params`."""
    space = space or DEFAULT_SPACES[kind]
    p = _check_params(kind, params, space)
    return _APPLY[kind](img, p)


def apply_masked(kind, img, params, mask, space=None):
    """Apply an operation only where mask == 1: edited*M + original*(1-M)."""
    img = np.asarray(img, dtype=np.float64)
    mask = validate_mask(mask)
    if mask.shape != img.shape[:2]:
        raise ValueError(
            f"mask shape {mask.shape} does not match image {img.shape[:2]}"
        )
    edited = apply(kind, img, params, space=space)
    m = mask[..., None]
    return edited * m + img * (1.0 - m)
