"""Measurement noise models and data-fidelity terms.

A :class:`NoiseModel` corrupts noiseless measurements; a
:class:`DataFidelity` scores measurement consistency and exposes
evaluate/gradient/prox as available for its variant.  Both are immutable
value objects that serialize into physics descriptors.
"""

from dataclasses import dataclass

import numpy as np

from .core import RngState
from .errors import CapabilityError, DomainError, ValidationError

NOISE_VARIANTS = ("none", "gaussian", "poisson", "poisson_gaussian", "uniform", "gamma")

# Above this mean the Poisson sampler switches from exact inversion to a
# rounded normal approximation; inversion itself runs in chunks of <= 500 to
# stay clear of exp underflow.
_POISSON_NORMAL_THRESHOLD = 1e3
_POISSON_CHUNK = 500.0


def _poisson_inversion(lam, rng: RngState):
    """Exact inversion sampling, one uniform per element."""
    lam = np.asarray(lam, dtype=np.float64)
    u = rng.uniform(shape=lam.shape)
    k = np.zeros(lam.shape, dtype=np.int64)
    p = np.exp(-lam)
    cdf = p.copy()
    active = u > cdf
    # expected iterations ~ max(lam); bounded hard for safety
    limit = int(np.max(lam) + 12.0 * np.sqrt(np.max(lam) + 1.0) + 25)
    for _ in range(limit):
        if not np.any(active):
            break
        k[active] += 1
        p = np.where(active, p * lam / np.maximum(k, 1), p)
        cdf = np.where(active, cdf + p, cdf)
        active = active & (u > cdf)
    return k.astype(np.float64)


def sample_poisson(lam, rng: RngState):
    """Poisson draw with the documented inversion/normal split at mean 1e3."""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0):
        raise DomainError("Poisson mean must be nonnegative")
    out = np.zeros(lam.shape)
    small = lam <= _POISSON_NORMAL_THRESHOLD
    if np.any(small):
        lam_small = np.where(small, lam, 0.0)
        # additivity: split large small-side means into <=500 chunks
        total = np.zeros(lam.shape)
        remaining = lam_small.copy()
        while np.any(remaining > 0):
            chunk = np.minimum(remaining, _POISSON_CHUNK)
            total += _poisson_inversion(chunk, rng)
            remaining -= chunk
        out = np.where(small, total, out)
    if np.any(~small):
        draws = np.round(rng.normal(shape=lam.shape) * np.sqrt(lam) + lam)
        out = np.where(~small, np.maximum(draws, 0.0), out)
    return out


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic corruption applied to noiseless measurements.

    Variants: none | gaussian(sigma) | poisson(gain) |
    poisson_gaussian(gain, sigma) | uniform(amplitude) | gamma(concentration).
    """

    variant: str = "none"
    sigma: float = 0.0
    gain: float = 1.0
    amplitude: float = 0.0
    concentration: float = 1.0

    def __post_init__(self):
        if self.variant not in NOISE_VARIANTS:
            raise ValidationError(f"unknown noise variant {self.variant!r}")
        if self.variant in ("gaussian", "poisson_gaussian") and self.sigma < 0:
            raise ValidationError("gaussian sigma must be >= 0")
        if self.variant in ("poisson", "poisson_gaussian") and self.gain <= 0:
            raise ValidationError("poisson gain must be > 0")
        if self.variant == "uniform" and self.amplitude < 0:
            raise ValidationError("uniform amplitude must be >= 0")
        if self.variant == "gamma" and self.concentration <= 0:
            raise ValidationError("gamma concentration must be > 0")

    def apply(self, z, rng: RngState):
        z = np.asarray(z)
        if self.variant == "none":
            return z.copy()
        if self.variant == "gaussian":
            return z + self.sigma * rng.standard(z.shape, z.dtype)
        if self.variant == "uniform":
            return z + rng.uniform(-self.amplitude, self.amplitude, z.shape)
        if self.variant == "poisson":
            self._require_nonneg(z)
            return self.gain * sample_poisson(z / self.gain, rng)
        if self.variant == "poisson_gaussian":
            self._require_nonneg(z)
            shot = self.gain * sample_poisson(z / self.gain, rng)
            return shot + self.sigma * rng.normal(shape=z.shape)
        # gamma: unit-mean multiplicative speckle, variance z^2 / k
        self._require_nonneg(z)
        k = self.concentration
        return z * rng.gen.gamma(k, 1.0 / k, size=z.shape)

    @staticmethod
    def _require_nonneg(z):
        if np.iscomplexobj(z) or np.any(z < 0):
            raise DomainError("poisson/gamma noise needs real nonnegative input")

    def to_config(self):
        cfg = {"variant": self.variant}
        if self.variant in ("gaussian", "poisson_gaussian"):
            cfg["sigma"] = self.sigma
        if self.variant in ("poisson", "poisson_gaussian"):
            cfg["gain"] = self.gain
        if self.variant == "uniform":
            cfg["amplitude"] = self.amplitude
        if self.variant == "gamma":
            cfg["concentration"] = self.concentration
        return cfg

    @staticmethod
    def from_config(cfg):
        return NoiseModel(**cfg)


FIDELITY_VARIANTS = ("l2", "l1", "poisson_nll")


@dataclass(frozen=True)
class DataFidelity:
    """Measurement-consistency term f(y, z) with eval / grad / prox.

    ``weight`` scales the whole term, letting callers encode noise-level
    weighting (e.g. 1/sigma^2 for Gaussian likelihoods).  ``background`` is
    the poisson_nll offset beta.
    """

    variant: str = "l2"
    background: float = 0.0
    weight: float = 1.0

    def __post_init__(self):
        if self.variant not in FIDELITY_VARIANTS:
            raise ValidationError(f"unknown fidelity variant {self.variant!r}")
        if self.background < 0:
            raise ValidationError("poisson_nll background must be >= 0")
        if self.weight <= 0:
            raise ValidationError("fidelity weight must be > 0")

    @property
    def smooth(self):
        return self.variant in ("l2", "poisson_nll")

    def eval(self, y, z) -> float:
        y = np.asarray(y)
        z = np.asarray(z)
        if self.variant == "l2":
            d = y - z
            return self.weight * 0.5 * float(np.real(np.vdot(d, d)))
        if self.variant == "l1":
            return self.weight * float(np.sum(np.abs(y - z)))
        zb = z + self.background
        self._require_domain(zb, y)
        # convention 0*log(0) = 0 for zero counts at zero intensity
        logterm = np.zeros_like(zb)
        pos = y > 0
        logterm[pos] = y[pos] * np.log(zb[pos])
        return self.weight * float(np.sum(zb - logterm))

    def grad(self, y, z):
        """Gradient in z; only the smooth variants support it."""
        y = np.asarray(y)
        z = np.asarray(z)
        if self.variant == "l2":
            return self.weight * (z - y)
        if self.variant == "poisson_nll":
            zb = z + self.background
            self._require_domain(zb, y)
            return self.weight * (1.0 - y / zb)
        raise CapabilityError("l1 fidelity has no gradient")

    def prox(self, y, v, gamma: float):
        """Exact minimizer of gamma*f(y, .) + 0.5||. - v||^2."""
        if gamma <= 0:
            raise ValidationError("prox needs gamma > 0")
        y = np.asarray(y)
        v = np.asarray(v)
        g = gamma * self.weight
        if self.variant == "l2":
            return (v + g * y) / (1.0 + g)
        if self.variant == "l1":
            from .priors import soft_threshold
            return y + soft_threshold(v - y, g)
        # poisson_nll: positive root of the per-element stationarity quadratic
        # (z - v) + g*(1 - y/(z + beta)) = 0
        beta = self.background
        half_b = (v - beta - g)
        disc = half_b ** 2 + 4.0 * (g * y + beta * (v - g))
        z = 0.5 * (half_b + np.sqrt(disc))
        return z

    def _require_domain(self, zb, y):
        if np.any(zb < 0) or (np.any(zb == 0) and np.any(y[zb == 0] > 0)):
            raise DomainError("poisson_nll needs z + background > 0 where y > 0")

    def to_config(self):
        cfg = {"variant": self.variant}
        if self.variant == "poisson_nll":
            cfg["background"] = self.background
        if self.weight != 1.0:
            cfg["weight"] = self.weight
        return cfg

    @staticmethod
    def from_config(cfg):
        return DataFidelity(**cfg)
