"""Numeric core: explicit RNG streams, centered orthonormal FFTs, inner products.

Everything stochastic in this library takes an :class:`RngState` explicitly;
no function reads or writes any global random generator.  The default numeric
types are float64 / complex128 throughout.
"""

import numpy as np

from .errors import ShapeError

Tensor = np.ndarray

_MASK64 = (1 << 64) - 1

# 64-bit golden-ratio increment used by the child-seed mix.  The constant is
# fixed so that derived streams are reproducible across machines and versions.
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class RngState:
    """A deterministic, single-owner random stream.

    Two states built from the same seed produce identical draw sequences.
    Child streams come from :func:`derive_child` and are independent by
    construction.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.gen = np.random.Generator(np.random.PCG64(self.seed))

    def child(self, index: int) -> "RngState":
        return derive_child(self.seed, index)

    def normal(self, shape=(), scale=1.0):
        return self.gen.normal(0.0, scale, size=shape)

    def uniform(self, low=0.0, high=1.0, shape=()):
        return self.gen.uniform(low, high, size=shape)

    def integers(self, low, high, shape=()):
        return self.gen.integers(low, high, size=shape)

    def standard(self, shape, dtype=np.float64):
        """Standard normal draw of the given shape; complex dtypes get
        independent N(0,1) real and imaginary parts."""
        if np.issubdtype(np.dtype(dtype), np.complexfloating):
            return self.gen.normal(size=shape) + 1j * self.gen.normal(size=shape)
        return self.gen.normal(size=shape)

    def __repr__(self):
        return f"RngState(seed={self.seed:#018x})"


def child_seed(seed: int, index: int) -> int:
    """64-bit child seed: splitmix64 mix of seed XOR GOLDEN_GAMMA*(index+1)."""
    if index < 0:
        raise ValueError("child index must be nonnegative")
    z = (int(seed) ^ ((GOLDEN_GAMMA * (index + 1)) & _MASK64)) & _MASK64
    return _mix64(z)


def derive_child(seed: int, index: int) -> RngState:
    """Deterministic child stream number ``index`` of the given master seed."""
    return RngState(child_seed(seed, index))


def dot(a: Tensor, b: Tensor):
    """Inner product sum(conj(a_i) * b_i); plain inner product for real input.

    Raises ShapeError on shape mismatch.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"dot: shapes {a.shape} and {b.shape} differ")
    return np.vdot(a, b)


_FFT_AXES = (-2, -1)


def fft2c(t: Tensor) -> Tensor:
    """Centered, orthonormal 2D DFT: fftshift . DFT . ifftshift, 1/sqrt(HW) scale.

    Zero frequency sits at index (H//2, W//2).  The transform is unitary, so
    ``ifft2c(fft2c(t)) == t`` and norms are preserved.
    """
    t = np.asarray(t)
    if t.ndim < 2:
        raise ShapeError(f"fft2c: need at least 2 trailing dims, got shape {t.shape}")
    return np.fft.fftshift(
        np.fft.fft2(np.fft.ifftshift(t, axes=_FFT_AXES), axes=_FFT_AXES, norm="ortho"),
        axes=_FFT_AXES,
    )


def ifft2c(t: Tensor) -> Tensor:
    """Inverse of :func:`fft2c`."""
    t = np.asarray(t)
    if t.ndim < 2:
        raise ShapeError(f"ifft2c: need at least 2 trailing dims, got shape {t.shape}")
    return np.fft.fftshift(
        np.fft.ifft2(np.fft.ifftshift(t, axes=_FFT_AXES), axes=_FFT_AXES, norm="ortho"),
        axes=_FFT_AXES,
    )
