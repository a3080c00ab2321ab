"""
Tests for the spectral core: grid, transforms, multipliers, dealiasing.
"""

import numpy as np
import pytest

from euleralpha.spectral import (
    TorusGrid,
    apply_multiplier,
    ddx,
    ddy,
    dealias,
    forward_transform,
    helmholtz,
    hermitian_defect,
    integral,
    inverse_helmholtz,
    inverse_transform,
    l2_norm,
    laplacian,
    project_zero_mean,
    stream_from_omega,
)

from conftest import random_band_hat


class TestTorusGrid:
    def test_rejects_odd_and_small_sizes(self):
        for bad in (7, 6, 15, 0, -8):
            with pytest.raises(ValueError):
                TorusGrid(bad)

    def test_wavenumber_layout(self, grid32):
        assert grid32.kx[0] == 0.0
        assert grid32.kx[1] == 1.0
        assert grid32.kx[16] == -16.0  # Nyquist wraps negative
        assert grid32.kx[-1] == -1.0
        assert grid32.h == pytest.approx(2 * np.pi / 32)

    def test_dealias_mask_two_thirds_rule(self, grid32):
        # n=32: keep |k| <= 10 (strictly below 32/3)
        assert grid32.kmax_dealias == 10
        assert grid32.dealias_mask[10, 0]
        assert not grid32.dealias_mask[11, 0]
        assert not grid32.dealias_mask[0, 16]  # Nyquist always masked

    def test_mask_symmetric_under_k_negation(self, grid32):
        n = grid32.n
        idx = (-np.arange(n)) % n
        assert np.array_equal(grid32.dealias_mask, grid32.dealias_mask[np.ix_(idx, idx)])

    def test_nyquist_always_masked(self):
        for n in (8, 12, 24, 64):
            g = TorusGrid(n)
            assert not g.dealias_mask[n // 2, :].any()
            assert not g.dealias_mask[:, n // 2].any()

    def test_multiplier_helper(self, grid16):
        m = grid16.multiplier(lambda kx, ky: kx**2 + ky**2)
        assert np.array_equal(m, grid16.K2)


class TestTransforms:
    def test_zero_field(self, grid16):
        assert not forward_transform(np.zeros((16, 16))).any()

    def test_single_harmonic_two_modes(self, grid16):
        F = forward_transform(np.cos(grid16.X))
        nonzero = np.argwhere(np.abs(F) > 1e-9)
        assert {tuple(ij) for ij in nonzero} == {(1, 0), (15, 0)}
        assert np.abs(F[1, 0]) == pytest.approx(np.abs(F[15, 0]))
        assert np.abs(F[1, 0]) == pytest.approx(16**2 / 2)

    def test_roundtrip_random_field(self, grid32):
        f = np.fft.ifft2(random_band_hat(grid32, 9, seed=3)).real
        back = inverse_transform(forward_transform(f))
        assert np.abs(back - f).max() <= 1e-12 * np.abs(f).max()

    def test_parseval(self, grid32):
        f = np.fft.ifft2(random_band_hat(grid32, 9, seed=4)).real
        F = forward_transform(f)
        grid_sum = np.sum(f**2)
        coeff_sum = np.sum(np.abs(F) ** 2) / grid32.n**2
        assert abs(grid_sum - coeff_sum) <= 1e-12 * grid_sum

    def test_single_mode_pair_reconstructs_cosine(self, grid16):
        F = np.zeros((16, 16), dtype=complex)
        F[2, 0] = 16**2 / 2
        F[14, 0] = 16**2 / 2
        f = inverse_transform(F)
        assert np.abs(f - np.cos(2 * grid16.X)).max() <= 1e-13

    def test_inverse_rejects_non_hermitian(self, grid16):
        F = np.zeros((16, 16), dtype=complex)
        F[3, 1] = 1.0  # no conjugate partner
        with pytest.raises(ValueError, match="Hermitian"):
            inverse_transform(F)


class TestMultipliers:
    def test_laplacian_eigenfunction(self, grid16):
        F = forward_transform(np.cos(2 * grid16.X))
        lap = inverse_transform(laplacian(grid16, F))
        assert np.abs(lap - (-4.0) * np.cos(2 * grid16.X)).max() <= 1e-12

    def test_helmholtz_filter_closed_form(self, grid16):
        # 1/(1 + 0.25 * 4) = 1/2 on the k=(2,0) shell
        F = forward_transform(np.cos(2 * grid16.X))
        filtered = inverse_transform(inverse_helmholtz(grid16, F, alpha=0.5))
        assert np.abs(filtered - 0.5 * np.cos(2 * grid16.X)).max() <= 1e-13

    def test_identity_multiplier(self, grid16):
        F = random_band_hat(grid16, 4, seed=5)
        assert np.array_equal(apply_multiplier(F, np.ones((16, 16))), F)

    def test_callable_multiplier(self, grid16):
        F = random_band_hat(grid16, 4, seed=6)
        out = apply_multiplier(F, lambda kx, ky: -(kx**2 + ky**2))
        assert np.allclose(out, laplacian(grid16, F))

    def test_multipliers_commute(self, grid32):
        F = random_band_hat(grid32, 9, seed=7)
        a = inverse_helmholtz(grid32, laplacian(grid32, F), 0.7)
        b = laplacian(grid32, inverse_helmholtz(grid32, F, 0.7))
        assert np.abs(a - b).max() <= 1e-13 * np.abs(a).max()

    def test_hermitian_preserved_through_chain(self, grid32):
        F = random_band_hat(grid32, 8, seed=8)
        out = ddy(grid32, ddx(grid32, helmholtz(grid32, dealias(grid32, F), 0.3)))
        assert hermitian_defect(out) <= 1e-9 * (1 + np.abs(out).max())


class TestHelmholtzPair:
    def test_alpha_zero_is_identity(self, grid16):
        F = random_band_hat(grid16, 5, seed=9)
        assert np.array_equal(helmholtz(grid16, F, 0.0), F)
        assert np.array_equal(inverse_helmholtz(grid16, F, 0.0), F)

    def test_diagonal_mode_closed_form(self, grid16):
        # (1 + 1*2) = 3 on the k=(1,1) shell
        f = np.cos(grid16.X + grid16.Y)
        out = inverse_transform(helmholtz(grid16, forward_transform(f), alpha=1.0))
        assert np.abs(out - 3.0 * f).max() <= 1e-12

    @pytest.mark.parametrize("alpha", [0.0, 0.1, 1.0, 10.0])
    def test_inverse_pair(self, grid32, alpha):
        F = random_band_hat(grid32, 10, seed=10)
        back = inverse_helmholtz(grid32, helmholtz(grid32, F, alpha), alpha)
        assert np.abs(back - F).max() <= 1e-13 * np.abs(F).max()


class TestStreamFromOmega:
    def test_closed_form(self, grid16):
        omega_hat = forward_transform(np.cos(2 * grid16.X))
        psi = inverse_transform(stream_from_omega(grid16, omega_hat))
        assert np.abs(psi - np.cos(2 * grid16.X) / 4.0).max() <= 1e-13

    def test_zero_maps_to_zero(self, grid16):
        out = stream_from_omega(grid16, np.zeros((16, 16), dtype=complex))
        assert not out.any()

    def test_inverse_pair_with_laplacian(self, grid32):
        omega_hat = random_band_hat(grid32, 9, seed=11)
        psi_hat = stream_from_omega(grid32, omega_hat)
        back = -laplacian(grid32, psi_hat)
        assert np.abs(back - omega_hat).max() <= 1e-12 * np.abs(omega_hat).max()

    def test_rejects_nonzero_mean(self, grid16):
        omega_hat = forward_transform(np.cos(grid16.X) + 0.5)
        with pytest.raises(ValueError, match="mean"):
            stream_from_omega(grid16, omega_hat)


class TestDealias:
    def test_low_band_unchanged(self, grid32):
        F = random_band_hat(grid32, 8, seed=12)  # inside |k| <= n/4
        F[(np.abs(grid32.KX) > 8) | (np.abs(grid32.KY) > 8)] = 0.0
        assert np.array_equal(dealias(grid32, F), F)

    def test_nyquist_mode_zeroed(self, grid32):
        F = np.zeros((32, 32), dtype=complex)
        F[16, 0] = 1.0
        assert not dealias(grid32, F).any()

    def test_idempotent(self, grid32):
        F = random_band_hat(grid32, 15, seed=13)
        once = dealias(grid32, F)
        assert np.array_equal(dealias(grid32, once), once)


class TestIntegrals:
    def test_integral_of_constant(self, grid16):
        F = forward_transform(np.full((16, 16), 2.5))
        assert integral(grid16, F) == pytest.approx(2.5 * (2 * np.pi) ** 2)

    def test_l2_norm_closed_form(self, grid16):
        # int cos^2(2x) dx dy = (2pi)^2 / 2
        F = forward_transform(np.cos(2 * grid16.X))
        assert l2_norm(grid16, F) == pytest.approx(np.sqrt(2.0 * np.pi**2), rel=1e-13)

    def test_project_zero_mean(self, grid16):
        F = forward_transform(np.cos(grid16.X) + 3.0)
        out = project_zero_mean(F)
        assert out[0, 0] == 0.0
        assert F[0, 0] != 0.0  # original untouched
