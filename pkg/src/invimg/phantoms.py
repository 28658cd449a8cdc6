"""Analytic test images so benchmarks need no external data."""

import numpy as np

from .core import RngState
from .errors import ValidationError
from .priors import periodic_gaussian_kernel

PHANTOMS = ("disc", "shepp-like", "random-smooth")


def disc(shape) -> np.ndarray:
    """Centered circle of radius 0.3*H, intensity 1 on background 0."""
    h, w = shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    r2 = (yy - cy) ** 2 + (xx - cx) ** 2
    return (r2 <= (0.3 * h) ** 2).astype(np.float64)


# (cy, cx, semi_y, semi_x, angle_deg, value) in unit coordinates
_SHEPP_ELLIPSES = [
    (0.00, 0.00, 0.42, 0.34, 0.0, 0.8),
    (0.00, 0.00, 0.39, 0.31, 0.0, -0.4),
    (0.02, 0.11, 0.15, 0.05, 18.0, 0.3),
    (0.02, -0.11, 0.15, 0.05, -18.0, 0.3),
    (-0.18, 0.00, 0.12, 0.12, 0.0, 0.25),
    (0.22, 0.00, 0.05, 0.09, 0.0, 0.35),
]


def shepp_like(shape) -> np.ndarray:
    """A piecewise-constant head-style phantom built from a few ellipses."""
    h, w = shape
    ys = (np.arange(h) - (h - 1) / 2.0) / (h / 2.0)
    xs = (np.arange(w) - (w - 1) / 2.0) / (w / 2.0)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    img = np.zeros(shape)
    for cy, cx, sy, sx, angle, value in _SHEPP_ELLIPSES:
        th = np.deg2rad(angle)
        dy, dx = yy - cy, xx - cx
        u = dx * np.cos(th) + dy * np.sin(th)
        v = -dx * np.sin(th) + dy * np.cos(th)
        img[(u / sx) ** 2 + (v / sy) ** 2 <= 1.0] += value
    return np.clip(img, 0.0, 1.0)


def random_smooth(shape, rng: RngState) -> np.ndarray:
    """Low-frequency random field, min-max normalized to [0, 1]."""
    h, w = shape
    noise = rng.normal(shape=shape)
    k = periodic_gaussian_kernel(shape, max(h, w) / 8.0)
    field = np.fft.ifft2(np.fft.fft2(noise) * np.fft.fft2(k)).real
    lo, hi = field.min(), field.max()
    if hi == lo:
        return np.zeros(shape)
    return (field - lo) / (hi - lo)


def make_phantom(name: str, shape, rng: RngState = None) -> np.ndarray:
    if name == "disc":
        return disc(shape)
    if name == "shepp-like":
        return shepp_like(shape)
    if name == "random-smooth":
        if rng is None:
            raise ValidationError("random-smooth phantom needs an rng")
        return random_smooth(shape, rng)
    raise ValidationError(f"unknown phantom {name!r} (choose from {PHANTOMS})")
