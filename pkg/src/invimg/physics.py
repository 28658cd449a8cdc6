"""Concrete forward operators with parameter generators.

Each constructor returns a :class:`Physics` bundling a linear map, its
parameter set, and a noise model; ``forward(x, rng)`` is exactly
``noise.apply(map.apply(x), rng)``.  Descriptor + params serialize to JSON
and rebuild an identical map, which is what makes datasets reproducible.
"""

import numpy as np

from .core import RngState, Tensor, fft2c, ifft2c
from .errors import DtypeError, ShapeError, ValidationError
from .fidelity import NoiseModel
from .linop import (DiagonalMap, IdentityMap, LinearMap, MatrixMap, compose)


class Physics:
    """A forward model y = N(A(x)): linear map + params + noise."""

    def __init__(self, map: LinearMap, params: dict, noise: NoiseModel,
                 descriptor: str):
        self.map = map
        self.params = params
        self.noise = noise
        self.descriptor = descriptor

    def forward(self, x, rng: RngState):
        return self.noise.apply(self.map.apply(x), rng)

    def with_noise(self, noise: NoiseModel):
        return Physics(self.map, self.params, noise, self.descriptor)

    def to_config(self):
        return {
            "descriptor": self.descriptor,
            "params": _params_to_json(self.descriptor, self.params),
            "noise": self.noise.to_config(),
        }

    def __repr__(self):
        return f"<Physics {self.descriptor} {self.map.domain_shape}->{self.map.range_shape}>"


# -- constructors ---------------------------------------------------------------

def make_denoising(shape, noise: NoiseModel = NoiseModel()) -> Physics:
    """Identity operator: measurements live in the image domain."""
    return Physics(IdentityMap(shape), {"shape": tuple(shape)}, noise, "denoising")


def make_inpainting(mask, noise: NoiseModel = NoiseModel()) -> Physics:
    """Pixelwise masking by a binary mask; self-adjoint projection."""
    mask = np.asarray(mask, dtype=np.float64)
    if not set(np.unique(mask)) <= {0.0, 1.0}:
        raise ValidationError("inpainting mask must be exactly binary")
    return Physics(DiagonalMap(mask), {"mask": mask}, noise, "inpainting")


class CircularConvolutionMap(LinearMap):
    """Circular convolution with a centered odd-sided kernel, via the FFT."""

    def __init__(self, kernel, image_shape):
        kernel = np.asarray(kernel, dtype=np.float64)
        if kernel.ndim != 2 or kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
            raise ValidationError(f"kernel sides must be odd, got {kernel.shape}")
        h, w = image_shape
        if kernel.shape[0] > h or kernel.shape[1] > w:
            raise ValidationError(f"kernel {kernel.shape} does not fit image {image_shape}")
        super().__init__(image_shape, image_shape)
        self.kernel = kernel
        embedded = np.zeros(image_shape)
        kh, kw = kernel.shape
        embedded[:kh, :kw] = kernel
        # kernel center goes to index (0, 0) so the diagonal has zero phase at DC
        embedded = np.roll(embedded, (-(kh // 2), -(kw // 2)), axis=(0, 1))
        self._freq = np.fft.fft2(embedded)
        self.spectral_diagonal = np.fft.fftshift(self._freq)
        self._fourier_diagonal = True

    def _apply(self, x):
        out = np.fft.ifft2(np.fft.fft2(x) * self._freq)
        return out if np.iscomplexobj(x) else out.real

    def _apply_adjoint(self, u):
        out = np.fft.ifft2(np.fft.fft2(u) * np.conj(self._freq))
        return out if np.iscomplexobj(u) else out.real


def make_blur(kernel, image_shape, noise: NoiseModel = NoiseModel()) -> Physics:
    """Circular convolution blur; Fourier-diagonal, so Tikhonov solves are exact."""
    m = CircularConvolutionMap(kernel, image_shape)
    return Physics(m, {"kernel": m.kernel, "shape": tuple(image_shape)}, noise, "blur")


class SubsampleMap(LinearMap):
    """Keep every s-th pixel starting at index 0; adjoint inserts zeros."""

    def __init__(self, image_shape, factor):
        h, w = image_shape
        if h % factor or w % factor:
            raise ValidationError(
                f"downsampling factor {factor} does not divide image {image_shape}")
        super().__init__(image_shape, (h // factor, w // factor))
        self.factor = factor

    def _apply(self, x):
        s = self.factor
        return x[::s, ::s].copy()

    def _apply_adjoint(self, u):
        s = self.factor
        out = np.zeros(self.domain_shape, dtype=u.dtype)
        out[::s, ::s] = u
        return out


def make_downsampling(factor: int, sigma_aa: float, image_shape,
                      noise: NoiseModel = NoiseModel()) -> Physics:
    """Gaussian anti-alias blur followed by s-fold decimation."""
    if sigma_aa < 0:
        raise ValidationError("anti-alias sigma must be >= 0")
    sub = SubsampleMap(image_shape, factor)
    if sigma_aa > 0:
        side = 4 * int(np.ceil(sigma_aa)) + 1
        kernel = gen_gaussian_kernel(sigma_aa, side)
    else:
        kernel = np.ones((1, 1))
    m = compose(sub, CircularConvolutionMap(kernel, image_shape))
    params = {"factor": int(factor), "sigma_aa": float(sigma_aa),
              "kernel": kernel, "shape": tuple(image_shape)}
    return Physics(m, params, noise, "downsampling")


class MaskedFourierMap(LinearMap):
    """Single-coil Cartesian MRI: x -> mask * fft2c(x) on complex images."""

    def __init__(self, mask):
        mask = np.asarray(mask, dtype=np.float64)
        if not set(np.unique(mask)) <= {0.0, 1.0}:
            raise ValidationError("k-space mask must be exactly binary")
        super().__init__(mask.shape, mask.shape, np.complex128, np.complex128)
        self.mask = mask
        self.is_unitary = bool(np.all(mask == 1.0))
        # A^H A = ifft2c . diag(mask) . fft2c, so the mask is the normal diagonal
        self.spectral_diagonal = mask

    def apply(self, x):
        x = np.asarray(x)
        if not np.iscomplexobj(x):
            raise DtypeError(
                "MRI needs a complex image; promote with x.astype(numpy.complex128)")
        return super().apply(x)

    def _apply(self, x):
        return self.mask * fft2c(x)

    def _apply_adjoint(self, u):
        return ifft2c(self.mask * u)


def make_mri(mask, noise: NoiseModel = NoiseModel()) -> Physics:
    m = MaskedFourierMap(mask)
    return Physics(m, {"mask": m.mask}, noise, "mri")


class RadonMap(LinearMap):
    """Pixel-driven discrete Radon transform with a matched transpose adjoint.

    Every pixel center is projected onto each rotated detector axis and split
    bilinearly between the two nearest bins, so weights sum to one per pixel
    per angle and the adjoint is the exact transpose.
    """

    def __init__(self, angles_deg, image_shape):
        h, w = image_shape
        if h != w:
            raise ValidationError(f"tomography needs a square image, got {image_shape}")
        angles_deg = [float(a) for a in np.atleast_1d(angles_deg)]
        if len(angles_deg) < 1:
            raise ValidationError("tomography needs at least one angle")
        detectors = int(np.ceil(h * np.sqrt(2.0)))
        if detectors % 2 == 0:
            detectors += 1
        super().__init__(image_shape, (len(angles_deg), detectors))
        self.angles_deg = angles_deg
        self.detectors = detectors
        c = (h - 1) / 2.0
        ys, xs = np.meshgrid(np.arange(h) - c, np.arange(w) - c, indexing="ij")
        xs = xs.ravel()
        ys = ys.ravel()
        half = (detectors - 1) / 2.0
        self._idx = np.empty((len(angles_deg), h * w), dtype=np.int64)
        self._frac = np.empty((len(angles_deg), h * w))
        for a, deg in enumerate(angles_deg):
            th = np.deg2rad(deg)
            t = xs * np.cos(th) + ys * np.sin(th) + half
            lo = np.floor(t).astype(np.int64)
            self._idx[a] = np.clip(lo, 0, detectors - 2)
            self._frac[a] = t - self._idx[a]

    def _apply(self, x):
        flat = x.ravel()
        sino = np.empty(self.range_shape, dtype=x.dtype)
        nbins = self.detectors
        for a in range(len(self.angles_deg)):
            idx, frac = self._idx[a], self._frac[a]
            sino[a] = (np.bincount(idx, weights=flat * (1.0 - frac), minlength=nbins)
                       + np.bincount(idx + 1, weights=flat * frac, minlength=nbins))
        return sino

    def _apply_adjoint(self, u):
        out = np.zeros(self.domain_shape[0] * self.domain_shape[1], dtype=u.dtype)
        for a in range(len(self.angles_deg)):
            idx, frac = self._idx[a], self._frac[a]
            row = u[a]
            out += row[idx] * (1.0 - frac) + row[idx + 1] * frac
        return out.reshape(self.domain_shape)


def make_tomography(angles_deg, image_shape,
                    noise: NoiseModel = NoiseModel()) -> Physics:
    """2D parallel-beam tomography over the given projection angles (degrees)."""
    m = RadonMap(angles_deg, image_shape)
    params = {"angles": list(m.angles_deg), "shape": tuple(image_shape)}
    return Physics(m, params, noise, "tomography")


def fbp(physics: Physics, sinogram) -> Tensor:
    """Filtered backprojection: Ram-Lak filter per angle, then the adjoint,
    scaled by pi / (2 * num_angles)."""
    if physics.descriptor != "tomography":
        raise ValidationError("fbp needs tomography physics")
    m = physics.map
    sinogram = np.asarray(sinogram)
    if sinogram.shape != m.range_shape:
        raise ShapeError(
            f"sinogram shape {sinogram.shape} != expected {m.range_shape}")
    ramp = 2.0 * np.abs(np.fft.fftfreq(m.detectors))
    filtered = np.fft.ifft(np.fft.fft(sinogram, axis=1) * ramp[None, :], axis=1).real
    return m.apply_adjoint(filtered) * (np.pi / (2.0 * len(m.angles_deg)))


def make_compressed_sensing(m: int, n: int, rng: RngState,
                            noise: NoiseModel = NoiseModel()) -> Physics:
    """Dense i.i.d. Gaussian measurement ensemble with entries N(0, 1/m)."""
    if m < 1 or n < 1:
        raise ValidationError("compressed sensing needs m, n >= 1")
    seed = rng.seed
    matrix = RngState(seed).normal((m, n), scale=1.0 / np.sqrt(m))
    params = {"m": int(m), "n": int(n), "seed": int(seed), "matrix": matrix}
    return Physics(MatrixMap(matrix), params, noise, "compressed_sensing")


# -- parameter generators -------------------------------------------------------

def gen_gaussian_kernel(sigma: float, side: int) -> Tensor:
    """Sampled Gaussian density on an odd-sided grid, normalized to sum 1."""
    if sigma <= 0:
        raise ValidationError("gen_gaussian_kernel needs sigma > 0")
    if side < 1 or side % 2 == 0:
        raise ValidationError(f"kernel side must be odd and positive, got {side}")
    r = side // 2
    d = np.arange(-r, r + 1)
    k = np.exp(-(d[:, None] ** 2 + d[None, :] ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


def gen_motion_kernel(length: int, rng: RngState) -> Tensor:
    """Unit-step random-walk motion blur, normalized, cropped to odd sides."""
    if length < 1:
        raise ValidationError("motion kernel length must be >= 1")
    size = 2 * length + 1
    grid = np.zeros((size, size))
    pos = np.array([length, length])
    grid[tuple(pos)] += 1.0
    steps = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])
    for _ in range(length):
        pos = pos + steps[rng.integers(0, 4)]
        grid[tuple(pos)] += 1.0
    rows = np.flatnonzero(grid.any(axis=1))
    cols = np.flatnonzero(grid.any(axis=0))
    r0, r1 = rows[0], rows[-1]
    c0, c1 = cols[0], cols[-1]
    # pad bounding box to odd side lengths
    if (r1 - r0) % 2 == 1:
        r1 = r1 + 1 if r1 + 1 < size else r1
        r0 = r0 if (r1 - r0) % 2 == 0 else r0 - 1
    if (c1 - c0) % 2 == 1:
        c1 = c1 + 1 if c1 + 1 < size else c1
        c0 = c0 if (c1 - c0) % 2 == 0 else c0 - 1
    k = grid[r0 : r1 + 1, c0 : c1 + 1]
    return k / k.sum()


def gen_bernoulli_mask(shape, density: float, rng: RngState) -> Tensor:
    """i.i.d. binary mask with P(1) = density."""
    if not 0 < density <= 1:
        raise ValidationError("mask density must be in (0, 1]")
    return (rng.uniform(shape=shape) < density).astype(np.float64)


def gen_cartesian_mri_mask(shape, acceleration: float, center_fraction: float,
                           rng: RngState) -> Tensor:
    """Column mask for Cartesian MRI: always-on center plus random columns.

    ceil(c*W) center columns are always sampled; the rest switch on with
    probability (W/R - c*W) / (W - c*W), clamped to [0, 1].
    """
    h, w = shape
    if acceleration < 1:
        raise ValidationError("acceleration must be >= 1")
    if not 0 <= center_fraction < 1:
        raise ValidationError("center_fraction must be in [0, 1)")
    if center_fraction * w > w / acceleration:
        raise ValidationError(
            f"infeasible mask: {center_fraction}*W center columns exceed W/R = {w / acceleration}")
    n_center = int(np.ceil(center_fraction * w))
    p = (w / acceleration - center_fraction * w) / (w - center_fraction * w)
    p = min(max(p, 0.0), 1.0)
    cols = rng.uniform(shape=(w,)) < p
    start = (w - n_center) // 2
    cols[start : start + n_center] = True
    return np.repeat(cols[None, :].astype(np.float64), h, axis=0)


# -- serialization ----------------------------------------------------------------

def _params_to_json(descriptor, params):
    out = {}
    for key, val in params.items():
        if descriptor == "compressed_sensing" and key == "matrix":
            continue  # regenerated from the stored seed
        if isinstance(val, np.ndarray):
            out[key] = val.tolist()
        elif isinstance(val, tuple):
            out[key] = list(val)
        else:
            out[key] = val
    return out


def physics_from_config(cfg: dict) -> Physics:
    """Rebuild a Physics from the dict produced by ``Physics.to_config``."""
    descriptor = cfg["descriptor"]
    params = cfg.get("params", {})
    noise = NoiseModel.from_config(cfg.get("noise", {"variant": "none"}))
    if descriptor == "denoising":
        return make_denoising(tuple(params["shape"]), noise)
    if descriptor == "inpainting":
        return make_inpainting(np.asarray(params["mask"], dtype=np.float64), noise)
    if descriptor == "blur":
        return make_blur(np.asarray(params["kernel"], dtype=np.float64),
                         tuple(params["shape"]), noise)
    if descriptor == "downsampling":
        return make_downsampling(int(params["factor"]), float(params["sigma_aa"]),
                                 tuple(params["shape"]), noise)
    if descriptor == "mri":
        return make_mri(np.asarray(params["mask"], dtype=np.float64), noise)
    if descriptor == "tomography":
        return make_tomography(params["angles"], tuple(params["shape"]), noise)
    if descriptor == "compressed_sensing":
        return make_compressed_sensing(int(params["m"]), int(params["n"]),
                                       RngState(int(params["seed"])), noise)
    raise ValidationError(f"unknown physics descriptor {descriptor!r}")
