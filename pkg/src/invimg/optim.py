"""Iterative reconstruction algorithms and non-iterative artifact removal.

All algorithms share the reconstruction contract: they consume
(y, physics, fidelity, prior, config) and return a domain-shaped estimate
plus a :class:`ConvergenceLog`.  A :class:`~invimg.priors.Denoiser` may stand
in for the prior's prox (plug-and-play); objectives are then unavailable and
only fixed-point residuals are meaningful.

Initialization is A^H y everywhere (``init='zero'`` overrides); stopping is
relative iterate change below ``tol`` or ``max_iter``.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .core import RngState
from .errors import CapabilityError, ValidationError
from .fidelity import DataFidelity
from .linop import operator_norm
from .physics import Physics, fbp
from .priors import Denoiser, Prior
from .solvers import tikhonov_solve

ALGORITHMS = ("pgd", "fista", "admm", "drs", "pdhg")

# fixed seed for the power iteration behind "auto" steps; keeps the whole
# reconstruction deterministic without threading an RngState through Eq-style
# reconstruct(y, physics) calls
_AUTO_NORM_SEED = 0x5EED0A07


@dataclass
class AlgoConfig:
    """Hyperparameters shared by the splitting algorithms.

    ``step`` is the gradient/prox step (or "auto" = 0.9 / Lipschitz bound);
    ``rho`` is the ADMM/DRS penalty, ``tau``/``sigma_d`` the primal/dual
    steps of PDHG (auto: 0.99 / ||A||), ``tol`` the relative iterate-change
    stopping threshold.
    """

    algorithm: str = "pgd"
    max_iter: int = 500
    step: Union[str, float] = "auto"
    rho: float = 1.0
    tau: Optional[float] = None
    sigma_d: Optional[float] = None
    tol: float = 1e-6
    record_objective: bool = False
    init: str = "adjoint"
    denoiser_sigma: float = 0.1
    inner_tol: float = 1e-8

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {self.algorithm!r}")
        if isinstance(self.step, str) and self.step != "auto":
            raise ValidationError("step must be a positive number or 'auto'")
        if not isinstance(self.step, str) and self.step <= 0:
            raise ValidationError("step must be positive")
        if self.rho <= 0:
            raise ValidationError("rho must be positive")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")


@dataclass
class ConvergenceLog:
    """Per-iteration trace of an algorithm run."""

    objectives: Optional[List[float]] = None
    step_norms: List[float] = field(default_factory=list)
    iterations: int = 0
    stop_reason: str = ""


def estimated_operator_norm(physics: Physics) -> float:
    """Cached ||A|| estimate from a fixed-seed power iteration."""
    m = physics.map
    cached = getattr(m, "_cached_opnorm", None)
    if cached is None:
        cached, _ = operator_norm(m, RngState(_AUTO_NORM_SEED), tol=1e-8,
                                  max_iter=2000)
        m._cached_opnorm = cached
    return cached


def _lipschitz(physics: Physics, fid: DataFidelity, y) -> float:
    opn = estimated_operator_norm(physics)
    if fid.variant == "l2":
        lip_f = fid.weight
    else:  # poisson_nll with background guard
        if fid.background <= 0:
            raise CapabilityError("auto step for poisson_nll needs background > 0")
        lip_f = fid.weight * float(np.max(np.asarray(y))) / fid.background ** 2
    return max(opn ** 2 * lip_f, np.finfo(np.float64).tiny)


def _resolve_step(cfg: AlgoConfig, physics: Physics, fid: DataFidelity, y) -> float:
    if cfg.step == "auto":
        return 0.9 / _lipschitz(physics, fid, y)
    return float(cfg.step)


def _init_x(physics: Physics, y, cfg: AlgoConfig):
    if cfg.init == "zero":
        return np.zeros(physics.map.domain_shape, dtype=physics.map.domain_dtype)
    return physics.map.apply_adjoint(np.asarray(y))


def _prox_g(prior, v, gamma, cfg: AlgoConfig):
    if prior is None:
        return np.asarray(v).copy()
    if isinstance(prior, Denoiser):
        return prior.denoise(v, cfg.denoiser_sigma)
    return prior.prox(v, gamma)


def _objective(fid: DataFidelity, prior, physics: Physics, y, x):
    val = fid.eval(y, physics.map.apply(x))
    if isinstance(prior, Prior):
        val += prior.eval(x)
    return val


def _can_record(cfg: AlgoConfig, prior) -> bool:
    return cfg.record_objective and (prior is None or isinstance(prior, Prior))


def _rel_change(x_new, x_old) -> float:
    return float(np.linalg.norm(x_new - x_old)
                 / max(np.linalg.norm(x_old), 1e-12))


def pgd(y, physics: Physics, fid: DataFidelity, prior, cfg: AlgoConfig = None):
    """Proximal gradient descent x+ = prox_{step*g}(x - step * A^H grad_f)."""
    cfg = cfg or AlgoConfig(algorithm="pgd")
    cfg.validate()
    if not fid.smooth:
        raise CapabilityError("pgd needs a smooth fidelity (l2 or poisson_nll)")
    y = np.asarray(y)
    A = physics.map
    step = _resolve_step(cfg, physics, fid, y)
    x = _init_x(physics, y, cfg)
    log = ConvergenceLog(objectives=[] if _can_record(cfg, prior) else None)
    for it in range(1, cfg.max_iter + 1):
        grad = A.apply_adjoint(fid.grad(y, A.apply(x)))
        x_new = _prox_g(prior, x - step * grad, step, cfg)
        rel = _rel_change(x_new, x)
        log.step_norms.append(rel)
        if log.objectives is not None:
            log.objectives.append(_objective(fid, prior, physics, y, x_new))
        x = x_new
        if rel < cfg.tol:
            log.iterations, log.stop_reason = it, "tolerance reached"
            return x, log
    log.iterations, log.stop_reason = cfg.max_iter, "max_iter reached"
    return x, log


def fista(y, physics: Physics, fid: DataFidelity, prior, cfg: AlgoConfig = None):
    """FISTA: proximal gradient with Nesterov extrapolation."""
    cfg = cfg or AlgoConfig(algorithm="fista")
    cfg.validate()
    if not fid.smooth:
        raise CapabilityError("fista needs a smooth fidelity (l2 or poisson_nll)")
    y = np.asarray(y)
    A = physics.map
    step = _resolve_step(cfg, physics, fid, y)
    x = _init_x(physics, y, cfg)
    z = x.copy()
    t = 1.0
    log = ConvergenceLog(objectives=[] if _can_record(cfg, prior) else None)
    for it in range(1, cfg.max_iter + 1):
        grad = A.apply_adjoint(fid.grad(y, A.apply(z)))
        x_new = _prox_g(prior, z - step * grad, step, cfg)
        t_new = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        z = x_new + ((t - 1.0) / t_new) * (x_new - x)
        rel = _rel_change(x_new, x)
        log.step_norms.append(rel)
        if log.objectives is not None:
            log.objectives.append(_objective(fid, prior, physics, y, x_new))
        x, t = x_new, t_new
        if rel < cfg.tol:
            log.iterations, log.stop_reason = it, "tolerance reached"
            return x, log
    log.iterations, log.stop_reason = cfg.max_iter, "max_iter reached"
    return x, log


def admm(y, physics: Physics, fid: DataFidelity, prior, cfg: AlgoConfig = None):
    """ADMM on the x = v splitting; the x-update is a Tikhonov solve."""
    cfg = cfg or AlgoConfig(algorithm="admm")
    cfg.validate()
    if fid.variant != "l2":
        raise CapabilityError("admm here requires the l2 fidelity")
    y = np.asarray(y)
    A = physics.map
    rho = cfg.rho / fid.weight  # scale so the x-update matches weight*0.5||Ax-y||^2
    v = np.zeros(A.domain_shape, dtype=A.domain_dtype)
    u = np.zeros_like(v)
    x = v
    log = ConvergenceLog(objectives=[] if _can_record(cfg, prior) else None)
    for it in range(1, cfg.max_iter + 1):
        x = tikhonov_solve(A, y, v - u, rho, tol=cfg.inner_tol)
        v_prev = v
        v = _prox_g(prior, x + u, 1.0 / cfg.rho, cfg)
        u = u + x - v
        if log.objectives is not None:
            log.objectives.append(_objective(fid, prior, physics, y, v))
        primal = np.linalg.norm(x - v)
        dual = cfg.rho * np.linalg.norm(v - v_prev)
        rel = max(primal, dual) / max(np.linalg.norm(x), 1e-12)
        log.step_norms.append(rel)
        if rel < cfg.tol:
            log.iterations, log.stop_reason = it, "tolerance reached"
            return v, log
    log.iterations, log.stop_reason = cfg.max_iter, "max_iter reached"
    return v, log


def drs(y, physics: Physics, fid: DataFidelity, prior, cfg: AlgoConfig = None):
    """Douglas-Rachford splitting with unit relaxation.

    prox of the fidelity-through-A term is a Tikhonov solve with rho = 1/step.
    """
    cfg = cfg or AlgoConfig(algorithm="drs")
    cfg.validate()
    if fid.variant != "l2":
        raise CapabilityError("drs here requires the l2 fidelity")
    y = np.asarray(y)
    A = physics.map
    gamma = 1.0 if cfg.step == "auto" else float(cfg.step)

    def prox_f(zz):
        return tikhonov_solve(A, y, zz, 1.0 / (gamma * fid.weight), tol=cfg.inner_tol)

    z = _init_x(physics, y, cfg)
    x = prox_f(z)
    log = ConvergenceLog(objectives=[] if _can_record(cfg, prior) else None)
    for it in range(1, cfg.max_iter + 1):
        w = _prox_g(prior, 2.0 * x - z, gamma, cfg)
        z_new = z + (w - x)
        rel = _rel_change(z_new, z)
        z = z_new
        x = prox_f(z)
        log.step_norms.append(rel)
        if log.objectives is not None:
            log.objectives.append(_objective(fid, prior, physics, y, x))
        if rel < cfg.tol:
            log.iterations, log.stop_reason = it, "tolerance reached"
            return x, log
    log.iterations, log.stop_reason = cfg.max_iter, "max_iter reached"
    return x, log


def pdhg(y, physics: Physics, fid: DataFidelity, prior, cfg: AlgoConfig = None):
    """Chambolle-Pock primal-dual iteration on f(y, Ax) + g(x).

    The dual prox comes from Moreau's identity through the fidelity prox, so
    nonsmooth fidelities (l1) are supported.
    """
    cfg = cfg or AlgoConfig(algorithm="pdhg")
    cfg.validate()
    y = np.asarray(y)
    A = physics.map
    opn = estimated_operator_norm(physics)
    tau = cfg.tau
    sig = cfg.sigma_d
    if tau is None or sig is None:
        base = 0.99 / max(opn, 1e-12)
        tau = base if tau is None else tau
        sig = base if sig is None else sig
    if tau * sig * opn ** 2 >= 1.0:
        raise ValidationError(
            f"pdhg needs tau*sigma_d*||A||^2 < 1, got {tau * sig * opn ** 2:.3f}")
    x = _init_x(physics, y, cfg)
    xbar = x.copy()
    u = np.zeros(A.range_shape, dtype=A.range_dtype)
    log = ConvergenceLog(objectives=[] if _can_record(cfg, prior) else None)
    for it in range(1, cfg.max_iter + 1):
        w = u + sig * A.apply(xbar)
        u = w - sig * fid.prox(y, w / sig, 1.0 / sig)
        x_new = _prox_g(prior, x - tau * A.apply_adjoint(u), tau, cfg)
        xbar = 2.0 * x_new - x
        rel = _rel_change(x_new, x)
        log.step_norms.append(rel)
        if log.objectives is not None:
            log.objectives.append(_objective(fid, prior, physics, y, x_new))
        x = x_new
        if rel < cfg.tol:
            log.iterations, log.stop_reason = it, "tolerance reached"
            return x, log
    log.iterations, log.stop_reason = cfg.max_iter, "max_iter reached"
    return x, log


SOLVE_FUNCTIONS = {"pgd": pgd, "fista": fista, "admm": admm, "drs": drs,
                   "pdhg": pdhg}


def solve(y, physics: Physics, fid: DataFidelity, prior, cfg: AlgoConfig):
    """Dispatch on cfg.algorithm."""
    cfg.validate()
    return SOLVE_FUNCTIONS[cfg.algorithm](y, physics, fid, prior, cfg)


def artifact_removal(denoiser: Denoiser, y, physics: Physics, sigma: float = 0.0,
                     mode: str = "adjoint"):
    """Non-iterative reconstruction: denoise a backprojection or pseudoinverse.

    ``mode='adjoint'`` uses A^H y; ``mode='pinv'`` uses A+ y (filtered
    backprojection for tomography).
    """
    if mode not in ("adjoint", "pinv"):
        raise ValidationError(f"unknown artifact_removal mode {mode!r}")
    y = np.asarray(y)
    if mode == "adjoint":
        back = physics.map.apply_adjoint(y)
    elif physics.descriptor == "tomography":
        back = fbp(physics, y)
    else:
        from .solvers import pinv_apply
        back = pinv_apply(physics.map, y)
    return denoiser.denoise(back, sigma)
