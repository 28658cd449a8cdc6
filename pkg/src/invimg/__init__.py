"""invimg: matrix-free toolkit for imaging inverse problems.

Forward operators with exact adjoints, matrix-free solvers, variational and
plug-and-play reconstruction, unadjusted Langevin sampling, self-supervised
losses, distortion metrics, and a reproducible benchmark CLI.
"""

__version__ = "0.1.0"

from .core import RngState, Tensor, derive_child, dot, fft2c, ifft2c
from .fidelity import DataFidelity, NoiseModel
from .linop import (LinearMap, SolveReport, add_scaled, adjoint_test, compose,
                    operator_norm, stack)
from .metrics import MetricConfig, mae, mse, psnr, ssim
from .optim import AlgoConfig, artifact_removal, solve
from .physics import (Physics, fbp, make_blur, make_compressed_sensing,
                      make_denoising, make_downsampling, make_inpainting,
                      make_mri, make_tomography)
from .priors import Denoiser, Prior, haar_dwt, haar_idwt, soft_threshold
from .sampling import ChainConfig, ChainStats, chain_statistics, ula_sample
from .solvers import (bicgstab_solve, cg_solve, condition_estimate, lsqr_solve,
                      pinv_apply, tikhonov_solve)

__all__ = [
    "RngState", "Tensor", "derive_child", "dot", "fft2c", "ifft2c",
    "DataFidelity", "NoiseModel",
    "LinearMap", "SolveReport", "add_scaled", "adjoint_test", "compose",
    "operator_norm", "stack",
    "MetricConfig", "mae", "mse", "psnr", "ssim",
    "AlgoConfig", "artifact_removal", "solve",
    "Physics", "fbp", "make_blur", "make_compressed_sensing", "make_denoising",
    "make_downsampling", "make_inpainting", "make_mri", "make_tomography",
    "Denoiser", "Prior", "haar_dwt", "haar_idwt", "soft_threshold",
    "ChainConfig", "ChainStats", "chain_statistics", "ula_sample",
    "bicgstab_solve", "cg_solve", "condition_estimate", "lsqr_solve",
    "pinv_apply", "tikhonov_solve",
    "__version__",
]
