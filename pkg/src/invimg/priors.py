"""Regularizers with eval/grad/prox and the classical denoisers used by
plug-and-play reconstruction and artifact removal.

Total variation uses forward differences with replicate (Neumann) boundary
and an isotropic coupling; its prox runs Chambolle's dual projected gradient
with dual step 1/8.  The wavelet transform is orthonormal 2D Haar, so its
l1 prox is exact.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import CapabilityError, DtypeError, ShapeError, ValidationError


def _require_real(x, what):
    if np.iscomplexobj(x):
        raise DtypeError(f"{what} is real-only; split complex images into "
                         "real/imaginary parts or use the l1/tikhonov priors")
    return x

PRIOR_VARIANTS = ("tv", "wavelet_l1", "l1", "tikhonov")
DENOISER_VARIANTS = ("gaussian_smoother", "tv", "median")


def soft_threshold(v, tau: float):
    """Shrink magnitudes by tau; complex values keep their phase."""
    if tau < 0:
        raise ValidationError("soft_threshold needs tau >= 0")
    v = np.asarray(v)
    if np.iscomplexobj(v):
        mag = np.abs(v)
        scale = np.maximum(mag - tau, 0.0) / np.where(mag > 0, mag, 1.0)
        return v * scale
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


# -- orthonormal 2D Haar ------------------------------------------------------

def _check_haar_shape(shape, levels):
    if levels < 0:
        raise ValidationError("levels must be >= 0")
    h, w = shape
    f = 1 << levels
    if h % f or w % f:
        raise ValidationError(
            f"Haar with {levels} levels needs sides divisible by {f}, got {shape}")


def haar_dwt(x, levels: int):
    """J-level orthonormal Haar transform, coefficients packed in place."""
    x = np.asarray(_require_real(x, "haar_dwt"), dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("haar_dwt wants a 2D image")
    _check_haar_shape(x.shape, levels)
    out = x.copy()
    h, w = x.shape
    for _ in range(levels):
        a = out[0:h:2, 0:w:2]
        b = out[0:h:2, 1:w:2]
        c = out[1:h:2, 0:w:2]
        d = out[1:h:2, 1:w:2]
        ll = (a + b + c + d) / 2.0
        lh = (a - b + c - d) / 2.0
        hl = (a + b - c - d) / 2.0
        hh = (a - b - c + d) / 2.0
        out[: h // 2, : w // 2] = ll
        out[: h // 2, w // 2 : w] = lh
        out[h // 2 : h, : w // 2] = hl
        out[h // 2 : h, w // 2 : w] = hh
        h //= 2
        w //= 2
    return out


def haar_idwt(coeffs, levels: int):
    """Inverse of :func:`haar_dwt`."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.ndim != 2:
        raise ShapeError("haar_idwt wants a 2D coefficient array")
    _check_haar_shape(c.shape, levels)
    out = c.copy()
    hs = [out.shape[0] >> l for l in range(levels, 0, -1)]
    ws = [out.shape[1] >> l for l in range(levels, 0, -1)]
    for h2, w2 in zip(hs, ws):
        h, w = 2 * h2, 2 * w2
        ll = out[:h2, :w2].copy()
        lh = out[:h2, w2:w].copy()
        hl = out[h2:h, :w2].copy()
        hh = out[h2:h, w2:w].copy()
        out[0:h:2, 0:w:2] = (ll + lh + hl + hh) / 2.0
        out[0:h:2, 1:w:2] = (ll - lh + hl - hh) / 2.0
        out[1:h:2, 0:w:2] = (ll + lh - hl - hh) / 2.0
        out[1:h:2, 1:w:2] = (ll - lh - hl + hh) / 2.0
    return out


# -- total variation machinery -------------------------------------------------

def _tv_grad(x):
    """Forward differences with replicate boundary (last row/col zero)."""
    dx = np.zeros_like(x)
    dy = np.zeros_like(x)
    dx[:, :-1] = x[:, 1:] - x[:, :-1]
    dy[:-1, :] = x[1:, :] - x[:-1, :]
    return dy, dx


def _tv_div(py, px):
    """Negative adjoint of :func:`_tv_grad`."""
    out = np.zeros_like(px)
    out[:, :-1] += px[:, :-1]
    out[:, 1:] -= px[:, :-1]
    out[:-1, :] += py[:-1, :]
    out[1:, :] -= py[:-1, :]
    return out


def tv_value(x, eps: float = 0.0) -> float:
    dy, dx = _tv_grad(np.asarray(_require_real(x, "tv"), dtype=np.float64))
    return float(np.sum(np.sqrt(dx ** 2 + dy ** 2 + eps ** 2)))


def tv_prox(v, gamma: float, max_iter: int = 200, dual_tol: float = 1e-5,
            dual_step: float = 0.125):
    """Chambolle dual projected gradient for the isotropic TV prox."""
    v = np.asarray(_require_real(v, "tv_prox"), dtype=np.float64)
    if gamma < 0:
        raise ValidationError("tv_prox needs gamma >= 0")
    if gamma == 0:
        return v.copy()
    py = np.zeros_like(v)
    px = np.zeros_like(v)
    for _ in range(max_iter):
        u = _tv_div(py, px) - v / gamma
        gy, gx = _tv_grad(u)
        denom = 1.0 + dual_step * np.sqrt(gx ** 2 + gy ** 2)
        py_new = (py + dual_step * gy) / denom
        px_new = (px + dual_step * gx) / denom
        delta = max(np.max(np.abs(py_new - py)), np.max(np.abs(px_new - px)))
        py, px = py_new, px_new
        if delta < dual_tol:
            break
    return v - gamma * _tv_div(py, px)


@dataclass(frozen=True)
class Prior:
    """Regularizer g(x) with eval / grad / prox.

    Variants: tv(eps) | wavelet_l1(levels) | l1 | tikhonov.  ``weight`` scales
    the whole term, so prox(v, gamma) solves gamma*weight*g0 + 0.5||.-v||^2.
    For tv, ``eps`` smooths the norm: 0 gives the exact nonsmooth prox; grad
    requests fall back to 1e-8 when eps is 0.
    """

    variant: str = "tv"
    weight: float = 1.0
    eps: float = 0.0
    levels: int = 2
    tv_max_iter: int = 200
    tv_dual_tol: float = 1e-5

    def __post_init__(self):
        if self.variant not in PRIOR_VARIANTS:
            raise ValidationError(f"unknown prior variant {self.variant!r}")
        if self.weight < 0 or self.eps < 0:
            raise ValidationError("weight and eps must be >= 0")

    def eval(self, x) -> float:
        x = np.asarray(x)
        if self.variant == "tv":
            return self.weight * tv_value(x, self.eps)
        if self.variant == "wavelet_l1":
            return self.weight * float(np.sum(np.abs(haar_dwt(x, self.levels))))
        if self.variant == "l1":
            return self.weight * float(np.sum(np.abs(x)))
        return self.weight * 0.5 * float(np.real(np.vdot(x, x)))

    def grad(self, x):
        x = np.asarray(x)
        if self.variant == "tikhonov":
            return self.weight * x
        if self.variant == "tv":
            eps = self.eps if self.eps > 0 else 1e-8
            dy, dx = _tv_grad(x)
            s = np.sqrt(dx ** 2 + dy ** 2 + eps ** 2)
            return -self.weight * _tv_div(dy / s, dx / s)
        raise CapabilityError(f"{self.variant} prior has no gradient")

    def prox(self, v, gamma: float):
        if gamma <= 0:
            raise ValidationError("prox needs gamma > 0")
        v = np.asarray(v)
        g = gamma * self.weight
        if self.variant == "tv":
            return tv_prox(v, g, self.tv_max_iter, self.tv_dual_tol)
        if self.variant == "wavelet_l1":
            return haar_idwt(soft_threshold(haar_dwt(v, self.levels), g), self.levels)
        if self.variant == "l1":
            return soft_threshold(v, g)
        return v / (1.0 + g)

    def to_config(self):
        cfg = {"variant": self.variant, "weight": self.weight}
        if self.variant == "tv" and self.eps:
            cfg["eps"] = self.eps
        if self.variant == "wavelet_l1":
            cfg["levels"] = self.levels
        return cfg

    @staticmethod
    def from_config(cfg):
        return Prior(**cfg)


def periodic_gaussian_kernel(shape, sigma: float):
    """Normalized Gaussian window on the torus, centered at index (0, 0)."""
    h, w = shape
    iy = np.arange(h)
    ix = np.arange(w)
    dy = np.minimum(iy, h - iy)[:, None]
    dx = np.minimum(ix, w - ix)[None, :]
    k = np.exp(-(dy ** 2 + dx ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


@dataclass(frozen=True)
class Denoiser:
    """Classical denoisers standing in for learned ones.

    gaussian_smoother convolves with a fixed window of std ``sigma_w``
    (independent of the requested noise level); tv solves a TV prox with
    strength sigma^2 * lam_tv; median is a 3x3 median filter with replicate
    boundary.
    """

    variant: str = "gaussian_smoother"
    sigma_w: float = 1.5
    lam_tv: float = 1.0

    def __post_init__(self):
        if self.variant not in DENOISER_VARIANTS:
            raise ValidationError(f"unknown denoiser variant {self.variant!r}")

    def denoise(self, v, sigma: float = 0.0):
        if sigma < 0:
            raise ValidationError("denoise needs sigma >= 0")
        v = np.asarray(v)
        if self.variant == "gaussian_smoother":
            if self.sigma_w <= 0:
                return v.copy()
            k = periodic_gaussian_kernel(v.shape, self.sigma_w)
            out = np.fft.ifft2(np.fft.fft2(v) * np.fft.fft2(k))
            return out if np.iscomplexobj(v) else out.real
        if self.variant == "tv":
            gamma = sigma ** 2 * self.lam_tv
            if gamma == 0:
                return v.copy()
            return tv_prox(v, gamma)
        return ndimage.median_filter(v, size=3, mode="nearest")

    def to_config(self):
        cfg = {"variant": self.variant}
        if self.variant == "gaussian_smoother":
            cfg["sigma_w"] = self.sigma_w
        if self.variant == "tv":
            cfg["lam_tv"] = self.lam_tv
        return cfg

    @staticmethod
    def from_config(cfg):
        return Denoiser(**cfg)
