import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viscowave.propagators import gauss_field
from viscowave.spectral import (
    BANDS,
    Field,
    Spectrum,
    band_filter,
    band_multiplier,
    chi_high,
    chi_low,
    chi_mid,
    fractional_derivative,
    hermitianize,
    inverse_transform,
    l1_norm,
    l2_norm,
    make_grid,
    mass,
    norms,
    transform,
    transition_bump,
)
from conftest import random_field


class TestMakeGrid:
    def test_unit_frequency_spacing(self):
        g = make_grid(1, 8, np.pi)
        assert sorted(g.xi1d) == [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]

    def test_mesh_width(self):
        g = make_grid(2, 256, 100.0)
        assert g.dx == 0.78125

    @pytest.mark.parametrize("n,N,L", [(1, 7, 1.0), (1, 6, 1.0), (3, 8, 1.0), (1, 8, 0.0), (1, 8, -2.0), (1, 4, 1.0)])
    def test_rejects_bad_parameters(self, n, N, L):
        with pytest.raises(ValueError):
            make_grid(n, N, L)

    def test_frequency_lattice_symmetric(self, grid1d):
        xs = set(grid1d.xi1d.tolist())
        nyquist = min(xs)
        for xi in xs:
            if xi != nyquist:
                assert -xi in xs

    def test_mesh_identity(self, grid1d):
        assert grid1d.dx * grid1d.points_per_axis == 2 * grid1d.half_width


class TestTransform:
    def test_zero_field(self, grid1d):
        s = transform(Field(grid1d, np.zeros(grid1d.shape)))
        assert np.all(s.coef == 0)

    def test_gaussian_matches_closed_form(self, grid1d):
        # oracle: transform of the unit-mass heat kernel at t=1 is c_n e^(-|xi|^2)
        g = grid1d
        s = transform(gauss_field(g, 1.0))
        exact = g.cn * np.exp(-g.s)
        low = g.abs_xi <= 3.0
        rel = np.abs(s.coef[low] - exact[low]) / np.abs(exact[low])
        assert np.max(rel) <= 1e-8
        # away from the resolved range the residual is pure float noise
        assert np.max(np.abs(s.coef - exact)) / np.max(exact) <= 1e-12

    def test_gaussian_2d(self, grid2d):
        s = transform(gauss_field(grid2d, 1.0))
        exact = grid2d.cn * np.exp(-grid2d.s)
        low = grid2d.abs_xi <= 2.0
        assert np.max(np.abs(s.coef[low] - exact[low]) / exact[low]) <= 1e-8

    def test_round_trip(self, grid1d):
        f = random_field(grid1d, seed=3)
        f2 = inverse_transform(transform(f))
        assert np.max(np.abs(f2.values - f.values)) <= 1e-12 * max(1.0, np.max(np.abs(f.values)))

    def test_rejects_non_finite(self, grid1d):
        vals = np.zeros(grid1d.shape)
        vals[3] = np.inf
        with pytest.raises(ValueError):
            transform(Field(grid1d, vals))
        coef = np.zeros(grid1d.shape, complex)
        coef[1] = np.nan
        with pytest.raises(ValueError):
            inverse_transform(Spectrum(grid1d, coef))

    @given(seed=st.integers(0, 2**31))
    @settings(max_examples=25, deadline=None)
    def test_parseval_on_random_fields(self, seed):
        g = make_grid(1, 64, 5.0)
        f = random_field(g, seed=seed, smooth=False)
        physical = np.sqrt(np.sum(f.values**2) * g.cell_volume)
        spectral = l2_norm(transform(f))
        assert abs(physical - spectral) <= 1e-12 * max(physical, 1e-30)

    @given(seed=st.integers(0, 2**31))
    @settings(max_examples=25, deadline=None)
    def test_zero_mode_is_scaled_mass(self, seed):
        g = make_grid(1, 64, 5.0)
        f = random_field(g, seed=seed, smooth=False)
        s = transform(f)
        expected = g.cn * mass(f)
        assert abs(s.coef[0] - expected) <= 1e-12 * max(1.0, abs(expected))

    def test_hermitian_projection_fixes_real_fields(self, grid2d):
        s = transform(random_field(grid2d, seed=9))
        sym = hermitianize(s.coef)
        assert np.max(np.abs(sym - s.coef)) <= 1e-13 * np.max(np.abs(s.coef))


class TestFractionalDerivative:
    def test_identity_at_zero(self, grid1d):
        s = transform(random_field(grid1d, seed=1))
        out = fractional_derivative(s, 0.0)
        assert np.array_equal(out.coef, s.coef)

    def test_negative_rejected(self, grid1d):
        s = transform(random_field(grid1d, seed=1))
        with pytest.raises(ValueError):
            fractional_derivative(s, -0.5)

    def test_gaussian_laplacian(self, grid1d):
        # oracle: spectrum of -Lap G_1 is |xi|^2 c_n e^(-|xi|^2)
        g = grid1d
        out = fractional_derivative(transform(gauss_field(g, 1.0)), 2.0)
        exact = g.s * g.cn * np.exp(-g.s)
        scale = np.max(exact)
        low = (g.abs_xi <= 3.0) & (g.abs_xi > 0)
        assert np.max(np.abs(out.coef[low] - exact[low]) / exact[low]) <= 1e-8
        assert np.max(np.abs(out.coef - exact)) / scale <= 1e-12

    def test_multiplicative_in_order(self, grid1d):
        s = transform(random_field(grid1d, seed=2))
        twice = fractional_derivative(fractional_derivative(s, 1.0), 1.0)
        once = fractional_derivative(s, 2.0)
        assert np.max(np.abs(twice.coef - once.coef)) <= 1e-12 * np.max(np.abs(once.coef))

    @given(
        a=st.floats(0.0, 3.0, allow_nan=False),
        b=st.floats(0.0, 3.0, allow_nan=False),
    )
    @settings(max_examples=30, deadline=None)
    def test_multiplier_composes(self, a, b):
        g = make_grid(1, 32, 4.0)
        prod = g.abs_xi**a * g.abs_xi**b
        combined = g.abs_xi ** (a + b)
        nz = g.abs_xi > 0
        assert np.allclose(prod[nz], combined[nz], rtol=1e-12)


class TestBands:
    def test_partition_of_unity(self, grid1d):
        total = sum(band_multiplier(grid1d, b) for b in BANDS)
        assert np.max(np.abs(total - 1.0)) <= 1e-15

    def test_band_values_in_unit_interval(self):
        r = np.linspace(0, 10, 5001)
        for chi in (chi_low, chi_mid, chi_high):
            v = chi(r)
            assert np.all(v >= -1e-15) and np.all(v <= 1 + 1e-15)

    def test_plateaus_and_supports(self):
        assert chi_low(0.0) == 1.0 and chi_low(0.5) == 1.0 and chi_low(0.75) == 0.0
        assert chi_high(2.0) == 0.0 and chi_high(3.0) == 1.0 and chi_high(50.0) == 1.0
        assert chi_mid(0.0) == 0.0 and chi_mid(1.5) == 1.0

    def test_low_then_high_is_zero(self, grid1d):
        s = transform(random_field(grid1d, seed=5))
        out = band_filter(band_filter(s, "low"), "high")
        assert np.all(out.coef == 0)

    def test_bands_sum_to_identity(self, grid1d):
        s = transform(random_field(grid1d, seed=6))
        total = sum(band_filter(s, b).coef for b in BANDS)
        assert np.max(np.abs(total - s.coef)) <= 1e-12 * np.max(np.abs(s.coef))

    def test_low_keeps_zero_mode(self, grid1d):
        s = transform(random_field(grid1d, seed=7))
        out = band_filter(s, "low")
        assert out.coef[0] == s.coef[0]

    def test_unknown_band_rejected(self, grid1d):
        s = transform(random_field(grid1d, seed=7))
        with pytest.raises(ValueError):
            band_filter(s, "ultraviolet")

    def test_bump_endpoints(self):
        assert transition_bump(0.0) == 1.0
        assert transition_bump(1.0) == 0.0
        assert transition_bump(-3.0) == 1.0
        assert transition_bump(4.0) == 0.0


class TestNorms:
    def test_gaussian_unit_mass(self, grid1d):
        _, l1, _ = norms(gauss_field(grid1d, 1.0))
        assert abs(l1 - 1.0) <= 1e-8

    def test_gaussian_l2_scaling(self, grid1d):
        # oracle: ||G_s||_2 is proportional to s^(-n/4)
        l2_1 = norms(gauss_field(grid1d, 1.0))[0]
        l2_4 = norms(gauss_field(grid1d, 4.0))[0]
        assert abs(l2_4 / l2_1 - 4.0 ** (-0.25)) <= 1e-6

    def test_gaussian_l2_scaling_2d(self, grid2d):
        l2_1 = norms(gauss_field(grid2d, 0.5))[0]
        l2_4 = norms(gauss_field(grid2d, 2.0))[0]
        assert abs(l2_4 / l2_1 - 4.0 ** (-0.5)) <= 1e-6

    def test_zero_field(self, grid1d):
        assert norms(Field(grid1d, np.zeros(grid1d.shape))) == (0.0, 0.0, 0.0)

    def test_sup_norm_is_max_abs(self, grid1d):
        f = random_field(grid1d, seed=8)
        assert norms(f)[2] == np.max(np.abs(f.values))

    def test_l1_matches_quadrature(self, grid1d):
        f = random_field(grid1d, seed=8)
        assert l1_norm(f) == pytest.approx(np.sum(np.abs(f.values)) * grid1d.dx, rel=1e-14)
