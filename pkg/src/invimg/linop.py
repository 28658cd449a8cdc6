"""Matrix-free linear operators: algebra, adjoint verification, spectral estimates.

A :class:`LinearMap` only knows how to apply itself and its adjoint; shapes
and dtypes are metadata used for validation and for drawing test vectors.
Maps combine through :func:`compose`, :func:`add_scaled` and :func:`stack`,
and every map produced anywhere in the library is expected to pass
:func:`adjoint_test` at 1e-10.

``spectral_diagonal``, when set, is a centered-frequency diagonal ``d`` such
that ``A^H A = ifft2c . diag(|d|^2) . fft2c``; solvers use it for closed-form
regularized inversion.  Maps that are themselves Fourier-diagonal
(``A = ifft2c . diag(d) . fft2c``) additionally set ``_fourier_diagonal`` so
the diagonal can propagate through compositions.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import RngState, dot
from .errors import ShapeError

_EPS = np.finfo(np.float64).eps


@dataclass
class SolveReport:
    """Outcome of an iterative solve."""

    iterations: int
    final_residual_norm: float
    converged: bool
    condition_estimate: Optional[float] = None
    reason: str = ""


class LinearMap:
    """Base class; subclasses implement ``_apply`` and ``_apply_adjoint``."""

    is_unitary = False
    is_projection = False
    spectral_diagonal = None
    _fourier_diagonal = False

    def __init__(self, domain_shape, range_shape,
                 domain_dtype=np.float64, range_dtype=np.float64):
        self.domain_shape = tuple(int(s) for s in domain_shape)
        self.range_shape = tuple(int(s) for s in range_shape)
        self.domain_dtype = np.dtype(domain_dtype)
        self.range_dtype = np.dtype(range_dtype)

    def apply(self, x):
        x = np.asarray(x)
        if x.shape != self.domain_shape:
            raise ShapeError(
                f"{type(self).__name__}.apply: input shape {x.shape} != domain {self.domain_shape}")
        return self._apply(x)

    def apply_adjoint(self, u):
        u = np.asarray(u)
        if u.shape != self.range_shape:
            raise ShapeError(
                f"{type(self).__name__}.apply_adjoint: input shape {u.shape} != range {self.range_shape}")
        return self._apply_adjoint(u)

    def _apply(self, x):
        raise NotImplementedError

    def _apply_adjoint(self, u):
        raise NotImplementedError

    def __call__(self, x):
        return self.apply(x)

    @property
    def H(self):
        """The adjoint as a LinearMap."""
        return AdjointMap(self)

    def __repr__(self):
        return (f"<{type(self).__name__} {self.domain_shape}->{self.range_shape} "
                f"dtype={self.domain_dtype}>")


class IdentityMap(LinearMap):
    is_unitary = True
    is_projection = True

    def __init__(self, shape, dtype=np.float64):
        super().__init__(shape, shape, dtype, dtype)
        if len(self.domain_shape) == 2:
            self.spectral_diagonal = np.ones(self.domain_shape)
            self._fourier_diagonal = True

    def _apply(self, x):
        return x.copy()

    _apply_adjoint = _apply


class DiagonalMap(LinearMap):
    """Pointwise multiplication by a fixed array (spatial diagonal)."""

    def __init__(self, diag, dtype=None):
        diag = np.asarray(diag)
        if dtype is None:
            dtype = np.complex128 if np.iscomplexobj(diag) else np.float64
        super().__init__(diag.shape, diag.shape, dtype, dtype)
        self.diag = diag.astype(dtype)
        self.is_projection = bool(np.isrealobj(diag) and set(np.unique(diag)) <= {0.0, 1.0})

    def _apply(self, x):
        return self.diag * x

    def _apply_adjoint(self, u):
        return np.conj(self.diag) * u


class MatrixMap(LinearMap):
    """Dense matrix acting on flat vectors."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix)
        dtype = np.complex128 if np.iscomplexobj(matrix) else np.float64
        super().__init__((matrix.shape[1],), (matrix.shape[0],), dtype, dtype)
        self.matrix = matrix.astype(dtype)

    def _apply(self, x):
        return self.matrix @ x

    def _apply_adjoint(self, u):
        return self.matrix.conj().T @ u


class FunctionMap(LinearMap):
    """Map defined by a pair of closures; used for derived operators."""

    def __init__(self, apply_fn, adjoint_fn, domain_shape, range_shape,
                 domain_dtype=np.float64, range_dtype=np.float64):
        super().__init__(domain_shape, range_shape, domain_dtype, range_dtype)
        self._fn = apply_fn
        self._fn_adj = adjoint_fn

    def _apply(self, x):
        return self._fn(x)

    def _apply_adjoint(self, u):
        return self._fn_adj(u)


class AdjointMap(LinearMap):
    def __init__(self, A):
        super().__init__(A.range_shape, A.domain_shape, A.range_dtype, A.domain_dtype)
        self.inner = A
        self.is_unitary = A.is_unitary
        if A._fourier_diagonal:
            self.spectral_diagonal = np.conj(A.spectral_diagonal)
            self._fourier_diagonal = True

    def _apply(self, x):
        return self.inner.apply_adjoint(x)

    def _apply_adjoint(self, u):
        return self.inner.apply(u)


class ComposedMap(LinearMap):
    """x -> A(B(x)); adjoint u -> B^H(A^H(u))."""

    def __init__(self, A, B):
        if B.range_shape != A.domain_shape:
            raise ShapeError(
                f"compose: inner range {B.range_shape} does not feed outer domain {A.domain_shape}")
        super().__init__(B.domain_shape, A.range_shape, B.domain_dtype, A.range_dtype)
        self.outer = A
        self.inner = B
        self.is_unitary = A.is_unitary and B.is_unitary
        # normal-operator diagonal survives composition when the inner map is
        # genuinely Fourier-diagonal: (AB)^H(AB) = B^H (A^H A) B
        if B._fourier_diagonal and A.spectral_diagonal is not None:
            self.spectral_diagonal = A.spectral_diagonal * B.spectral_diagonal
            self._fourier_diagonal = A._fourier_diagonal

    def _apply(self, x):
        return self.outer.apply(self.inner.apply(x))

    def _apply_adjoint(self, u):
        return self.inner.apply_adjoint(self.outer.apply_adjoint(u))


class ScaledSumMap(LinearMap):
    """x -> alpha*A(x) + beta*B(x) on matching shapes."""

    def __init__(self, alpha, A, beta, B):
        if A.domain_shape != B.domain_shape or A.range_shape != B.range_shape:
            raise ShapeError(
                f"add_scaled: shapes ({A.domain_shape}->{A.range_shape}) and "
                f"({B.domain_shape}->{B.range_shape}) differ")
        dt = np.result_type(A.domain_dtype, B.domain_dtype)
        rt = np.result_type(A.range_dtype, B.range_dtype)
        super().__init__(A.domain_shape, A.range_shape, dt, rt)
        self.alpha, self.A, self.beta, self.B = alpha, A, beta, B
        if A._fourier_diagonal and B._fourier_diagonal:
            self.spectral_diagonal = alpha * A.spectral_diagonal + beta * B.spectral_diagonal
            self._fourier_diagonal = True

    def _apply(self, x):
        return self.alpha * self.A.apply(x) + self.beta * self.B.apply(x)

    def _apply_adjoint(self, u):
        return (np.conj(self.alpha) * self.A.apply_adjoint(u)
                + np.conj(self.beta) * self.B.apply_adjoint(u))


class StackedMap(LinearMap):
    """x -> (A(x), B(x)) flattened into one vector; adjoint sums the blocks."""

    def __init__(self, A, B):
        if A.domain_shape != B.domain_shape:
            raise ShapeError(
                f"stack: domains {A.domain_shape} and {B.domain_shape} differ")
        nA = int(np.prod(A.range_shape))
        nB = int(np.prod(B.range_shape))
        rt = np.result_type(A.range_dtype, B.range_dtype)
        super().__init__(A.domain_shape, (nA + nB,),
                         np.result_type(A.domain_dtype, B.domain_dtype), rt)
        self.A, self.B = A, B
        self.block_ranges = (A.range_shape, B.range_shape)
        self._nA = nA

    def _apply(self, x):
        return np.concatenate([self.A.apply(x).ravel(), self.B.apply(x).ravel()])

    def _apply_adjoint(self, u):
        uA = u[: self._nA].reshape(self.A.range_shape)
        uB = u[self._nA :].reshape(self.B.range_shape)
        return self.A.apply_adjoint(uA) + self.B.apply_adjoint(uB)


def compose(A: LinearMap, B: LinearMap) -> LinearMap:
    """The composition x -> A(B(x))."""
    return ComposedMap(A, B)


def add_scaled(alpha, A: LinearMap, beta, B: LinearMap) -> LinearMap:
    """The combination x -> alpha*A(x) + beta*B(x)."""
    return ScaledSumMap(alpha, A, beta, B)


def stack(A: LinearMap, B: LinearMap) -> LinearMap:
    """Vertical stacking: range is the disjoint concatenation of both ranges."""
    return StackedMap(A, B)


def adjoint_test(A: LinearMap, rng: RngState, trials: int = 20) -> float:
    """Max relative dot-test error |<Ax,u> - <x,A^H u>| over random unit draws."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    worst = 0.0
    for _ in range(trials):
        x = rng.standard(A.domain_shape, A.domain_dtype)
        u = rng.standard(A.range_shape, A.range_dtype)
        x = x / max(np.linalg.norm(x), _EPS)
        u = u / max(np.linalg.norm(u), _EPS)
        ax = A.apply(x)
        atu = A.apply_adjoint(u)
        lhs = dot(ax, u)
        rhs = dot(x, atu)
        denom = np.linalg.norm(ax) * np.linalg.norm(u) + _EPS
        worst = max(worst, abs(lhs - rhs) / denom)
    return worst


def operator_norm(A: LinearMap, rng: RngState, tol: float = 1e-6,
                  max_iter: int = 1000):
    """Largest singular value via power iteration on A^H A.

    Returns (sigma_max estimate, SolveReport).  A zero operator reports 0 with
    converged=True.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = rng.standard(A.domain_shape, A.domain_dtype)
    nv = np.linalg.norm(v)
    if nv == 0.0:  # adversarially unlucky start: retry once
        v = rng.standard(A.domain_shape, A.domain_dtype)
        nv = np.linalg.norm(v)
    v = v / nv
    lam_prev = 0.0
    for it in range(1, max_iter + 1):
        w = A.apply_adjoint(A.apply(v))
        lam = float(np.real(dot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, SolveReport(it, 0.0, True, reason="zero operator")
        v = w / nw
        if it > 1 and abs(lam - lam_prev) <= tol * max(abs(lam), _EPS):
            return float(np.sqrt(max(lam, 0.0))), SolveReport(it, abs(lam - lam_prev), True)
        lam_prev = lam
    return float(np.sqrt(max(lam_prev, 0.0))), SolveReport(
        max_iter, abs(lam - lam_prev), False, reason="max_iter reached")
