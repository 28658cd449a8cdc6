import numpy as np
import pytest

from conftest import extreme_spectrum, svd_instance
from invimg.core import RngState
from invimg.errors import ShapeError
from invimg.linop import (DiagonalMap, IdentityMap, MatrixMap, add_scaled,
                          adjoint_test, compose, operator_norm, stack)
from invimg.physics import gen_bernoulli_mask, gen_gaussian_kernel, make_blur, make_inpainting
from invimg.solvers import condition_estimate


def _blur_and_mask(shape=(8, 8)):
    blur = make_blur(gen_gaussian_kernel(1.0, 3), shape).map
    mask = make_inpainting(gen_bernoulli_mask(shape, 0.6, RngState(5))).map
    return blur, mask


class TestCompose:
    def test_identity_law(self, rng):
        blur, _ = _blur_and_mask()
        c = compose(IdentityMap((8, 8)), blur)
        x = rng.normal(shape=(8, 8))
        assert np.allclose(c.apply(x), blur.apply(x), atol=1e-14)

    def test_inverse_pair_of_diagonal(self, rng):
        d = rng.uniform(0.5, 2.0, (6, 6))
        c = compose(DiagonalMap(d), DiagonalMap(1.0 / d))
        x = rng.normal(shape=(6, 6))
        assert np.max(np.abs(c.apply(x) - x)) < 1e-12

    def test_dot_test_blur_inpainting(self, rng):
        blur, mask = _blur_and_mask()
        assert adjoint_test(compose(mask, blur), rng, 20) <= 1e-10

    def test_shape_mismatch_names_shapes(self):
        with pytest.raises(ShapeError, match=r"\(8, 8\)"):
            compose(IdentityMap((8, 8)), IdentityMap((4, 4)))


class TestAddScaled:
    def test_cancellation(self, rng):
        blur, _ = _blur_and_mask()
        z = add_scaled(1.0, blur, -1.0, blur)
        assert np.max(np.abs(z.apply(rng.normal(shape=(8, 8))))) < 1e-14

    def test_doubling(self, rng):
        blur, _ = _blur_and_mask()
        two_i = add_scaled(2.0, IdentityMap((8, 8)), 0.0, blur)
        x = rng.normal(shape=(8, 8))
        assert np.allclose(two_i.apply(x), 2 * x, atol=1e-14)

    def test_dot_test_random_weights(self, rng):
        blur, mask = _blur_and_mask()
        for _ in range(5):
            a, b = rng.normal(), rng.normal()
            assert adjoint_test(add_scaled(a, blur, b, mask), rng, 10) <= 1e-10


class TestStack:
    def test_adjoint_sums_blocks(self, rng):
        s = stack(IdentityMap((4, 4)), IdentityMap((4, 4)))
        u = rng.normal(shape=(16,))
        v = rng.normal(shape=(16,))
        got = s.apply_adjoint(np.concatenate([u, v]))
        assert np.allclose(got, (u + v).reshape(4, 4), atol=1e-14)

    def test_reports_both_block_shapes(self):
        blur, mask = _blur_and_mask()
        s = stack(blur, mask)
        assert s.block_ranges == ((8, 8), (8, 8))
        assert s.range_shape == (128,)

    def test_dot_test(self, rng):
        blur, mask = _blur_and_mask()
        assert adjoint_test(stack(blur, mask), rng, 20) <= 1e-10

    def test_domain_mismatch(self):
        with pytest.raises(ShapeError):
            stack(IdentityMap((4, 4)), IdentityMap((8, 8)))


class TestAdjointTest:
    def test_identity_tiny_error(self, rng):
        assert adjoint_test(IdentityMap((8, 8)), rng, 5) <= 1e-14

    def test_detects_wrong_adjoint(self, rng):
        m = np.arange(16, dtype=float).reshape(4, 4) + np.eye(4)

        class Wrong(MatrixMap):
            def _apply_adjoint(self, u):
                return self.matrix @ u  # deliberately not the transpose

        assert adjoint_test(Wrong(m), rng, 20) > 1e-3


class TestOperatorNorm:
    def test_known_diagonal(self, rng):
        est, rep = operator_norm(MatrixMap(np.diag([1.0, 2.0, 3.0])), rng, tol=1e-10)
        assert rep.converged and abs(est - 3.0) < 1e-3

    def test_projection_norm_one(self, rng):
        mask = gen_bernoulli_mask((16, 16), 0.3, RngState(2))
        est, _ = operator_norm(make_inpainting(mask).map, rng, tol=1e-10)
        assert abs(est - 1.0) < 1e-6

    def test_blur_matches_kernel_dft(self, rng):
        blur = make_blur(gen_gaussian_kernel(1.3, 5), (16, 16)).map
        est, _ = operator_norm(blur, rng, tol=1e-12, max_iter=5000)
        oracle = np.max(np.abs(blur.spectral_diagonal))
        assert abs(est - oracle) / oracle < 1e-6

    def test_zero_operator(self, rng):
        est, rep = operator_norm(MatrixMap(np.zeros((3, 3))), rng)
        assert est == 0.0 and rep.converged

    def test_scaling_homogeneity(self, rng):
        blur, _ = _blur_and_mask()
        base, _ = operator_norm(blur, RngState(1), tol=1e-10, max_iter=5000)
        scaled, _ = operator_norm(add_scaled(-2.5, blur, 0.0, blur),
                                  RngState(1), tol=1e-10, max_iter=5000)
        assert abs(scaled - 2.5 * base) / (2.5 * base) < 1e-6


class TestConditionEstimate:
    def test_diag_1_4_in_bracket(self):
        est = condition_estimate(MatrixMap(np.diag([1.0, 4.0])), np.array([1.0, 2.0]))
        assert 3.0 <= est <= 5.0

    def test_identity_near_one(self):
        est = condition_estimate(MatrixMap(np.eye(6)), np.arange(6.0) + 1)
        assert abs(est - 1.0) <= 0.1

    def test_factor_two_on_dense_instances(self):
        # extreme-dominated spectra keep the Frobenius-based estimate tight
        for seed in range(3):
            nr = np.random.default_rng(seed)
            A = svd_instance(20, 10, extreme_spectrum(10, 40.0), nr)
            est = condition_estimate(MatrixMap(A), nr.normal(size=20))
            true = np.linalg.cond(A)
            assert true / 2 <= est <= true * 2


def test_every_algebra_map_passes_dot_test(rng):
    blur, mask = _blur_and_mask()
    maps = [blur, mask, compose(blur, mask), add_scaled(1.3, blur, -0.4, mask),
            stack(blur, mask), blur.H, compose(mask, blur).H]
    for m in maps:
        assert adjoint_test(m, rng, 20) <= 1e-10
