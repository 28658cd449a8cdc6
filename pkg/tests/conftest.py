import numpy as np
import pytest

from invimg.core import RngState
from invimg.linop import LinearMap


def dense_matrix(A: LinearMap) -> np.ndarray:
    """Materialize a LinearMap by applying it to basis vectors."""
    n = int(np.prod(A.domain_shape))
    m = int(np.prod(A.range_shape))
    out = np.zeros((m, n), dtype=np.result_type(A.domain_dtype, A.range_dtype))
    for j in range(n):
        e = np.zeros(n, dtype=A.domain_dtype)
        e[j] = 1.0
        out[:, j] = A.apply(e.reshape(A.domain_shape)).ravel()
    return out


def svd_instance(m, n, singular_values, rng) -> np.ndarray:
    """Dense matrix with prescribed singular values and random bases."""
    U, _ = np.linalg.qr(rng.normal(size=(m, m)))
    V, _ = np.linalg.qr(rng.normal(size=(n, n)))
    k = min(m, n)
    S = np.zeros((m, n))
    S[:k, :k] = np.diag(singular_values)
    return U @ S @ V.T


def extreme_spectrum(k, cond):
    """Singular values {cond, sqrt(cond)..., 1}: extremes dominate both the
    Frobenius norm and its inverse, keeping LSQR's estimate near cond."""
    s = np.full(k, np.sqrt(cond))
    s[0], s[-1] = cond, 1.0
    return s


def spd_instance(n, cond, rng) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(np.linspace(1.0, cond, n)) @ Q.T


@pytest.fixture
def rng():
    return RngState(0xC0FFEE)
