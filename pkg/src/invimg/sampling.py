"""Unadjusted Langevin posterior sampling and chain statistics.

The chain targets p(x|y) proportional to exp(-f(y, Ax) - g(x)) for a smooth
fidelity f and smooth prior g:

    x_{t+1} = x_t - step * (A^H grad_f + grad_g) + sqrt(2*step) * noise.

Statistics over the retained samples are accumulated with a single-pass
(Welford) update.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import RngState, Tensor
from .errors import CapabilityError, DivergenceError, ValidationError
from .fidelity import DataFidelity
from .physics import Physics
from .priors import Prior


@dataclass
class ChainConfig:
    """Langevin chain settings.

    ``burn_in`` defaults to 10% of the iteration count; ``noise_scale`` is a
    test hook that turns the chain into plain gradient descent at 0.
    """

    step: float = 1e-3
    iterations: int = 1000
    burn_in: Optional[int] = None
    thinning: int = 1
    init: str = "adjoint"
    noise_scale: float = 1.0

    def resolved_burn_in(self):
        b = self.burn_in if self.burn_in is not None else self.iterations // 10
        if not 0 <= b < self.iterations:
            raise ValidationError("burn_in must lie in [0, iterations)")
        return b

    def validate(self):
        if self.step <= 0:
            raise ValidationError("chain step must be > 0")
        if self.thinning < 1:
            raise ValidationError("thinning must be >= 1")
        b = self.resolved_burn_in()
        if (self.iterations - b) // self.thinning < 2:
            raise ValidationError("config retains fewer than 2 samples")


class _Welford:
    """Numerically stable streaming mean/variance."""

    def __init__(self):
        self.count = 0
        self.mean = None
        self.m2 = None

    def update(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.count == 0:
            self.mean = np.zeros_like(x)
            self.m2 = np.zeros_like(x)
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    def stats(self):
        if self.count < 2:
            raise ValidationError("need at least 2 samples for statistics")
        return ChainStats(self.mean.copy(), self.m2 / (self.count - 1), self.count)


@dataclass
class ChainStats:
    """Per-pixel posterior summaries over retained samples."""

    mean: Tensor
    variance: Tensor  # unbiased
    count: int


def chain_statistics(samples) -> ChainStats:
    """Single-pass mean and unbiased variance of a sample sequence."""
    acc = _Welford()
    for s in samples:
        acc.update(s)
    return acc.stats()


def ula_sample(y, physics: Physics, fid: DataFidelity, prior: Prior,
               cfg: ChainConfig, rng: RngState):
    """Run the unadjusted Langevin chain; returns (retained samples, stats).

    Requires gradients from both the fidelity and the prior; NaN during the
    chain raises DivergenceError naming the iteration.
    """
    cfg.validate()
    if not fid.smooth:
        raise CapabilityError("ULA needs a smooth data fidelity")
    if prior is not None and prior.variant in ("l1", "wavelet_l1"):
        raise CapabilityError(f"ULA needs a smooth prior, got {prior.variant}")
    y = np.asarray(y)
    A = physics.map
    if cfg.init == "adjoint":
        x = A.apply_adjoint(y)
    elif cfg.init == "zero":
        x = np.zeros(A.domain_shape, dtype=A.domain_dtype)
    else:
        x = np.asarray(cfg.init)

    step = cfg.step
    noise_amp = cfg.noise_scale * np.sqrt(2.0 * step)
    burn = cfg.resolved_burn_in()
    samples: List[np.ndarray] = []
    acc = _Welford()
    for t in range(cfg.iterations):
        with np.errstate(over="ignore", invalid="ignore"):
            drift = A.apply_adjoint(fid.grad(y, A.apply(x)))
            if prior is not None:
                drift = drift + prior.grad(x)
            x = x - step * drift + noise_amp * rng.standard(x.shape, x.dtype)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"ULA chain diverged at iteration {t}")
        if t >= burn and (t - burn) % cfg.thinning == 0:
            samples.append(x.copy())
            acc.update(x)
    return samples, acc.stats()
