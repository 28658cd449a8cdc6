"""Full-reference distortion metrics: MSE, MAE, PSNR, single-scale SSIM.

SSIM follows the standard recipe: 11x11 Gaussian window with std 1.5,
constants C1 = (0.01 L)^2 and C2 = (0.03 L)^2, local statistics over the
valid region (no padding), and the mean of the local map.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class MetricConfig:
    """Shared metric options: data range, per-image min-max normalization,
    complex-magnitude comparison."""

    data_range: float = 1.0
    normalize_inputs: bool = False
    complex_magnitude: bool = False

    def __post_init__(self):
        if self.data_range <= 0:
            raise ValidationError("data_range must be > 0")


DEFAULT_CONFIG = MetricConfig()


def _prepare(x_hat, x, cfg: MetricConfig):
    x_hat = np.asarray(x_hat)
    x = np.asarray(x)
    if x_hat.shape != x.shape:
        raise ShapeError(f"metric inputs differ in shape: {x_hat.shape} vs {x.shape}")
    if cfg.complex_magnitude:
        x_hat = np.abs(x_hat)
        x = np.abs(x)
    if cfg.normalize_inputs:
        x_hat = _minmax(x_hat)
        x = _minmax(x)
    return np.real(x_hat).astype(np.float64), np.real(x).astype(np.float64)


def _minmax(a):
    lo, hi = np.min(a), np.max(a)
    if hi == lo:
        return np.zeros_like(a)
    return (a - lo) / (hi - lo)


def mse(x_hat, x, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    a, b = _prepare(x_hat, x, cfg)
    return float(np.mean((a - b) ** 2))


def mae(x_hat, x, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    a, b = _prepare(x_hat, x, cfg)
    return float(np.mean(np.abs(a - b)))


def psnr(x_hat, x, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    """10 log10(L^2 / mse) in dB; identical inputs give +inf."""
    m = mse(x_hat, x, cfg)
    if m == 0.0:
        return float("inf")
    return float(10.0 * np.log10(cfg.data_range ** 2 / m))


def _gaussian_window(size=11, sigma=1.5):
    d = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(d[:, None] ** 2 + d[None, :] ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _local_mean(img, window):
    ws = window.shape[0]
    view = np.lib.stride_tricks.sliding_window_view(img, (ws, ws))
    return np.einsum("ijkl,kl->ij", view, window)


def ssim(x_hat, x, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    a, b = _prepare(x_hat, x, cfg)
    if a.ndim != 2 or min(a.shape) < 11:
        raise ShapeError(f"ssim needs a 2D image at least 11x11, got {a.shape}")
    window = _gaussian_window()
    c1 = (0.01 * cfg.data_range) ** 2
    c2 = (0.03 * cfg.data_range) ** 2
    mu1 = _local_mean(a, window)
    mu2 = _local_mean(b, window)
    s11 = _local_mean(a * a, window) - mu1 ** 2
    s22 = _local_mean(b * b, window) - mu2 ** 2
    s12 = _local_mean(a * b, window) - mu1 * mu2
    num = (2 * mu1 * mu2 + c1) * (2 * s12 + c2)
    den = (mu1 ** 2 + mu2 ** 2 + c1) * (s11 + s22 + c2)
    return float(np.mean(num / den))


METRICS = {"mse": mse, "mae": mae, "psnr": psnr, "ssim": ssim}


def format_metric(value: float) -> str:
    """CSV serialization: 6 significant digits, infinities as 'inf'."""
    if np.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.6g}"
