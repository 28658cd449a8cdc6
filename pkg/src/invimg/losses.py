"""Supervised and self-supervised losses for evaluating reconstructors.

Every loss consumes some subset of (x_hat, x, y, physics, model): only
``sup_mse`` sees ground truth, the rest are measurement-only.  ``model`` is a
callable ``model(y, physics) -> x_hat`` (for SURE, a plain denoiser
``model(y) -> x_hat`` since measurement and image domains coincide).
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .core import RngState
from .errors import CapabilityError, ShapeError, ValidationError
from .physics import Physics, make_inpainting, make_mri
from . import transforms


@dataclass
class LossValue:
    """Scalar loss with its named sub-terms."""

    value: float
    components: Dict[str, float] = field(default_factory=dict)
    samples_used: int = 1


def _mean_sq(a) -> float:
    a = np.asarray(a)
    return float(np.real(np.vdot(a, a)) / a.size)


def sup_mse(x_hat, x) -> LossValue:
    """Supervised per-element mean squared error."""
    x_hat = np.asarray(x_hat)
    x = np.asarray(x)
    if x_hat.shape != x.shape:
        raise ShapeError(f"sup_mse: shapes {x_hat.shape} and {x.shape} differ")
    return LossValue(_mean_sq(x_hat - x))


def sure_gaussian(model, y, sigma: float, rng: RngState, mc_probes: int = 1,
                  probe_step: float = None) -> LossValue:
    """Gaussian SURE with a Hutchinson divergence estimate.

    SURE = (1/n)||D(y) - y||^2 - sigma^2 + (2 sigma^2 / n) * div_hat, where
    div_hat averages b^T (D(y + tau*b) - D(y)) / tau over Rademacher probes b.
    """
    if sigma <= 0:
        raise ValidationError("sure_gaussian needs sigma > 0")
    if mc_probes < 1:
        raise ValidationError("need at least one probe")
    y = np.asarray(y)
    n = y.size
    tau = probe_step
    if tau is None:
        tau = max(0.01 * float(np.max(np.abs(y))), 1e-6)
    dy = model(y)
    residual = _mean_sq(dy - y)
    div = 0.0
    for _ in range(mc_probes):
        b = np.where(rng.uniform(shape=y.shape) < 0.5, -1.0, 1.0)
        div += float(np.real(np.vdot(b, model(y + tau * b) - dy))) / tau
    div /= mc_probes
    value = residual - sigma ** 2 + (2.0 * sigma ** 2 / n) * div
    return LossValue(value,
                     components={"residual": residual, "minus_sigma2": -sigma ** 2,
                                 "divergence": div},
                     samples_used=mc_probes)


def r2r_gaussian(model, y, physics: Physics, sigma: float, alpha: float = 0.5,
                 rng: RngState = None, draws: int = 1) -> LossValue:
    """Recorrupted2Recorrupted for Gaussian noise.

    Each draw recorrupts y into y1 = y + alpha*w and validates against
    y2 = y - w/alpha with w ~ N(0, sigma^2 I).
    """
    if sigma <= 0:
        raise ValidationError("r2r_gaussian needs sigma > 0")
    if alpha <= 0:
        raise ValidationError("r2r_gaussian needs alpha > 0")
    if draws < 1:
        raise ValidationError("need at least one draw")
    y = np.asarray(y)
    total = 0.0
    for _ in range(draws):
        w = sigma * rng.standard(y.shape, y.dtype)
        y1 = y + alpha * w
        y2 = y - w / alpha
        total += _mean_sq(physics.map.apply(model(y1, physics)) - y2)
    return LossValue(total / draws, samples_used=draws)


def _masked_variant(physics: Physics, new_mask):
    if physics.descriptor == "inpainting":
        return make_inpainting(new_mask, physics.noise)
    if physics.descriptor == "mri":
        return make_mri(new_mask, physics.noise)
    raise CapabilityError(
        f"splitting loss needs mask-structured physics, got {physics.descriptor!r}")


def splitting_loss(model, y, physics: Physics, split_ratio: float = 0.9,
                   rng: RngState = None) -> LossValue:
    """Measurement-splitting loss: reconstruct from a kept fraction of the
    observed entries, validate on the complement (in measurement space)."""
    if not 0 < split_ratio <= 1:
        raise ValidationError("split_ratio must be in (0, 1]")
    mask = physics.params.get("mask")
    if mask is None:
        raise CapabilityError(
            f"splitting loss needs mask-structured physics, got {physics.descriptor!r}")
    y = np.asarray(y)
    keep = (rng.uniform(shape=mask.shape) < split_ratio).astype(np.float64)
    m1 = mask * keep
    m2 = mask * (1.0 - keep)
    held_out = int(m2.sum())
    if held_out == 0:
        raise ValidationError("empty validation split: every observed entry was kept")
    sub_physics = _masked_variant(physics, m1)
    x_hat = model(m1 * y, sub_physics)
    r = m2 * (physics.map.apply(x_hat) - y)
    value = float(np.real(np.vdot(r, r))) / held_out
    return LossValue(value, components={"held_out": float(held_out)})


def ei_loss(model, y, physics: Physics, g_sampler, rng: RngState) -> LossValue:
    """Equivariant-imaging nullspace loss.

    x1 = R(y); x2 = T_g x1; y2 = A(x2) noiseless; x3 = R(y2);
    loss = mean squared ||x3 - x2||.
    """
    x1 = model(y, physics)
    g = g_sampler(rng)
    x2 = transforms.apply(g, x1)
    y2 = physics.map.apply(x2)
    x3 = model(y2, physics)
    return LossValue(_mean_sq(x3 - x2))
