"""Matrix-free iterative solvers: CG, BiCGStab, LSQR, pseudoinverse, Tikhonov.

All solvers take a :class:`~invimg.linop.LinearMap`, work on arrays shaped
like its domain/range, and return ``(x, SolveReport)``.  Defaults everywhere:
``tol=1e-6``, ``max_iter=1000``.  LSQR additionally accumulates the standard
condition-number estimate from its bidiagonalization recurrences.
"""

import numpy as np

from .core import dot, fft2c, ifft2c
from .errors import DivergenceError, ValidationError
from .linop import LinearMap, FunctionMap, SolveReport

_EPS = np.finfo(np.float64).eps


def _checked(x, where):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"{where}: NaN/Inf encountered")
    return x


def cg_solve(B: LinearMap, b, tol: float = 1e-6, max_iter: int = 1000, x0=None):
    """Conjugate gradients for self-adjoint positive (semi)definite B.

    Stops when ||Bx - b|| <= tol * ||b||.  The residual is recomputed from
    scratch every 50 iterations to defeat accumulation drift.
    """
    b = np.asarray(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(B.domain_shape, B.domain_dtype), SolveReport(0, 0.0, True)
    x = np.zeros_like(b) if x0 is None else np.array(x0)
    r = b - B.apply(x) if x0 is not None else b.copy()
    p = r.copy()
    rs = float(np.real(dot(r, r)))
    for it in range(1, max_iter + 1):
        Bp = _checked(B.apply(p), "cg_solve")
        denom = float(np.real(dot(p, Bp)))
        if denom == 0.0:
            return x, SolveReport(it, np.sqrt(rs), False, reason="breakdown: <p,Bp>=0")
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * Bp
        if it % 50 == 0:
            r = b - B.apply(x)
        rs_new = float(np.real(dot(r, r)))
        _checked(np.array([rs_new]), "cg_solve")
        if np.sqrt(rs_new) <= tol * bnorm:
            res = np.linalg.norm(b - B.apply(x))
            return x, SolveReport(it, float(res), bool(res <= tol * bnorm))
        p = r + (rs_new / rs) * p
        rs = rs_new
    res = np.linalg.norm(b - B.apply(x))
    return x, SolveReport(max_iter, float(res), False, reason="max_iter reached")


def bicgstab_solve(B: LinearMap, b, tol: float = 1e-6, max_iter: int = 1000):
    """BiCGStab for square (not necessarily symmetric) B.

    Breakdown (vanishing rho or omega) is reported as non-convergence with a
    reason rather than raised.
    """
    if B.domain_shape != B.range_shape:
        raise ValidationError("bicgstab_solve requires a square map")
    b = np.asarray(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(B.domain_shape, B.domain_dtype), SolveReport(0, 0.0, True)
    x = np.zeros_like(b, dtype=np.result_type(b.dtype, B.domain_dtype))
    r = b.astype(x.dtype)
    r0 = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(r)
    p = np.zeros_like(r)
    breakdown_scale = _EPS ** 2 * bnorm * bnorm  # true breakdowns only
    for it in range(1, max_iter + 1):
        rho_new = dot(r0, r)
        if abs(rho_new) < max(breakdown_scale, 1e-300):
            res = np.linalg.norm(b - B.apply(x))
            return x, SolveReport(it, float(res), False, reason="breakdown: rho ~ 0")
        beta = (rho_new / rho) * (alpha / omega)
        p = r + beta * (p - omega * v)
        v = _checked(B.apply(p), "bicgstab_solve")
        alpha = rho_new / dot(r0, v)
        s = r - alpha * v
        if np.linalg.norm(s) <= tol * bnorm:
            x = x + alpha * p
            res = np.linalg.norm(b - B.apply(x))
            return x, SolveReport(it, float(res), bool(res <= tol * bnorm))
        t = _checked(B.apply(s), "bicgstab_solve")
        tt = float(np.real(dot(t, t)))
        if tt == 0.0:
            res = np.linalg.norm(b - B.apply(x))
            return x, SolveReport(it, float(res), False, reason="breakdown: t = 0")
        omega = dot(t, s) / tt
        x = x + alpha * p + omega * s
        r = s - omega * t
        _checked(r, "bicgstab_solve")
        if np.linalg.norm(r) <= tol * bnorm:
            res = np.linalg.norm(b - B.apply(x))
            return x, SolveReport(it, float(res), bool(res <= tol * bnorm))
        rho = rho_new
    res = np.linalg.norm(b - B.apply(x))
    return x, SolveReport(max_iter, float(res), False, reason="max_iter reached")


def _sym_ortho(a, b):
    """Stable Givens rotation (SymOrtho)."""
    if b == 0:
        return np.sign(a), 0.0, abs(a)
    if a == 0:
        return 0.0, np.sign(b), abs(b)
    if abs(b) > abs(a):
        tau = a / b
        s = np.sign(b) / np.sqrt(1 + tau * tau)
        c = s * tau
        r = b / s
    else:
        tau = b / a
        c = np.sign(a) / np.sqrt(1 + tau * tau)
        s = c * tau
        r = a / c
    return c, s, r


def lsqr_solve(A: LinearMap, b, tol: float = 1e-6, max_iter: int = 1000,
               damping: float = 0.0):
    """Damped least squares min ||Ax-b||^2 + damping^2 ||x||^2 via LSQR.

    Golub-Kahan bidiagonalization with the classical stopping tests; the
    returned report carries the accumulated condition-number estimate of the
    (damped) operator.
    """
    b = np.asarray(b, dtype=np.result_type(A.range_dtype, np.asarray(b).dtype))
    atol = btol = tol
    damp = float(damping)
    if damp < 0:
        raise ValidationError("damping must be >= 0")

    x = np.zeros(A.domain_shape, dtype=A.domain_dtype)
    u = b.copy()
    bnorm = np.linalg.norm(b)
    beta = bnorm
    if beta > 0:
        u = u / beta
        v = A.apply_adjoint(u)
        alfa = np.linalg.norm(v)
    else:
        v = np.zeros(A.domain_shape, dtype=A.domain_dtype)
        alfa = 0.0
    if alfa > 0:
        v = v / alfa
    w = v.copy()

    rhobar, phibar = alfa, beta
    anorm = acond = 0.0
    ddnorm = res2 = xxnorm = z = 0.0
    cs2, sn2 = -1.0, 0.0
    rnorm = beta
    arnorm = alfa * beta
    if arnorm == 0.0:
        return x, SolveReport(0, float(rnorm), True, condition_estimate=1.0,
                              reason="b in nullspace of A^H or b = 0")

    itn = 0
    converged = False
    reason = "max_iter reached"
    while itn < max_iter:
        itn += 1
        u = A.apply(v) - alfa * u
        beta = np.linalg.norm(u)
        anorm = np.sqrt(anorm ** 2 + alfa ** 2 + beta ** 2 + damp ** 2)
        if beta > 0:
            u = u / beta
            v = A.apply_adjoint(u) - beta * v
            alfa = np.linalg.norm(v)
            if alfa > 0:
                v = v / alfa
        if damp > 0:
            rhobar1 = np.sqrt(rhobar ** 2 + damp ** 2)
            cs1 = rhobar / rhobar1
            psi = (damp / rhobar1) * phibar
            phibar = cs1 * phibar
        else:
            rhobar1 = rhobar
            psi = 0.0
        cs, sn, rho = _sym_ortho(rhobar1, beta)
        theta = sn * alfa
        rhobar = -cs * alfa
        phi = cs * phibar
        phibar = sn * phibar
        tau = sn * phi

        dk = w / rho
        x = x + (phi / rho) * w
        w = v + (-theta / rho) * w
        ddnorm = ddnorm + np.linalg.norm(dk) ** 2
        _checked(x, "lsqr_solve")

        # estimate ||x|| through the rotation that kills the super-diagonal
        delta = sn2 * rho
        gambar = -cs2 * rho
        rhs = phi - delta * z
        zbar = rhs / gambar
        xnorm = np.sqrt(xxnorm + zbar ** 2)
        gamma = np.sqrt(gambar ** 2 + theta ** 2)
        cs2 = gambar / gamma
        sn2 = theta / gamma
        z = rhs / gamma
        xxnorm = xxnorm + z ** 2

        acond = anorm * np.sqrt(ddnorm)
        res1 = phibar ** 2
        res2 = res2 + psi ** 2
        rnorm = np.sqrt(res1 + res2)
        arnorm = alfa * abs(tau)

        test1 = rnorm / bnorm
        test2 = arnorm / (anorm * rnorm + _EPS)
        rtol = btol + atol * anorm * xnorm / bnorm
        if test1 <= rtol:
            converged, reason = True, "||Ax-b|| small enough"
            break
        if test2 <= atol:
            converged, reason = True, "least-squares optimality reached"
            break
        if 1.0 + test2 <= 1.0 or 1.0 + test1 / (1 + anorm * xnorm / bnorm) <= 1.0:
            converged, reason = True, "machine-precision limit"
            break
    return x, SolveReport(itn, float(rnorm), converged,
                          condition_estimate=float(acond), reason=reason)


def condition_estimate(A: LinearMap, y, rng=None, max_iter: int = None) -> float:
    """LSQR's accumulated condition-number estimate.

    Iterations are capped at the domain dimension (the exact-arithmetic
    Krylov bound): in float arithmetic, iterating past it re-accumulates
    directions already seen and inflates the Frobenius-based estimate.
    """
    if max_iter is None:
        max_iter = int(np.prod(A.domain_shape))
    _, report = lsqr_solve(A, y, tol=1e-14, max_iter=max_iter)
    return report.condition_estimate


def pinv_apply(A: LinearMap, y, tol: float = 1e-6, max_iter: int = 1000):
    """Apply the Moore-Penrose pseudoinverse A+ to y.

    Orthogonal projections and unitary maps use the closed form A+ = A^H;
    anything else runs undamped LSQR.
    """
    if A.is_projection or A.is_unitary:
        return A.apply_adjoint(np.asarray(y))
    x, _ = lsqr_solve(A, y, tol=tol, max_iter=max_iter, damping=0.0)
    return x


def tikhonov_solve(A: LinearMap, y, z, rho: float, tol: float = 1e-6,
                   max_iter: int = 1000):
    """argmin_x 0.5||Ax - y||^2 + (rho/2)||x - z||^2.

    Solves (A^H A + rho I) x = A^H y + rho z: in closed form for unitary or
    Fourier-diagonal operators, by CG otherwise.
    """
    if rho <= 0:
        raise ValidationError("tikhonov_solve needs rho > 0")
    y = np.asarray(y)
    z = np.asarray(z)
    rhs = A.apply_adjoint(y) + rho * z
    real_out = not np.issubdtype(A.domain_dtype, np.complexfloating)
    if A.is_unitary:
        x = rhs / (1.0 + rho)
        return x.real if real_out and np.iscomplexobj(x) else x
    if A.spectral_diagonal is not None and len(A.domain_shape) == 2:
        q = np.abs(A.spectral_diagonal) ** 2
        x = ifft2c(fft2c(rhs.astype(np.complex128)) / (q + rho))
        return x.real if real_out else x
    normal = FunctionMap(
        lambda v: A.apply_adjoint(A.apply(v)) + rho * v,
        lambda v: A.apply_adjoint(A.apply(v)) + rho * v,
        A.domain_shape, A.domain_shape, A.domain_dtype, A.domain_dtype)
    x, _ = cg_solve(normal, rhs, tol=tol, max_iter=max_iter)
    return x
