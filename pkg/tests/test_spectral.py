"""Tests for grids, transforms, multipliers, norms and snapshots."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacetime_resonance import spectral as sp


@pytest.fixture
def grid3():
    return sp.make_grid(3, 16, 2 * math.pi)


class TestGrid:
    def test_frequencies_and_spacing(self):
        g = sp.make_grid(3, 64, 16 * math.pi)
        assert g.dk == pytest.approx(1 / 8)
        assert g.shape == (64, 64, 64)
        assert g.horizon == pytest.approx(4 * math.pi)

    @pytest.mark.parametrize("d,N,L", [(4, 16, 1.0), (3, 12, 1.0), (3, 4, 1.0), (3, 16, 0.0)])
    def test_invalid_grids_rejected(self, d, N, L):
        with pytest.raises(ValueError):
            sp.make_grid(d, N, L)

    def test_json_round_trip(self, grid3):
        assert sp.make_grid(**grid3.to_json()) == grid3


class TestTransforms:
    def test_plane_wave_has_one_unit_coefficient(self, grid3):
        n = (1, -2, 3)
        f = sp.plane_wave(grid3, n)
        x = grid3.x
        k = grid3.dk * np.asarray(n)
        expected = np.exp(1j * sum(k[i] * (x[i] + grid3.L / 2) for i in range(3)))
        np.testing.assert_allclose(f.to_physical().values, expected, atol=1e-12)

    def test_round_trip(self, grid3):
        rng = np.random.default_rng(1)
        f = sp.random_bandlimited(grid3, rng, band=7)
        np.testing.assert_allclose(f.to_physical().to_frequency().values, f.values, atol=1e-14)

    def test_plancherel(self, grid3):
        rng = np.random.default_rng(2)
        f = sp.random_bandlimited(grid3, rng)
        assert sp.lebesgue_norm(f, 2) == pytest.approx(sp.l2_norm_frequency(f), rel=1e-12)

    def test_conj_matches_physical_conjugate(self, grid3):
        f = sp.random_bandlimited(grid3, np.random.default_rng(3))
        np.testing.assert_allclose(f.conj().to_physical().values, np.conj(f.to_physical().values), atol=1e-13)

    def test_threads_setting_does_not_change_results(self, grid3):
        f = sp.random_bandlimited(grid3, np.random.default_rng(4))
        a = f.to_physical().values
        sp.set_workers(2)
        try:
            b = f.to_physical().values
        finally:
            sp.set_workers(None)
        np.testing.assert_array_equal(a, b)


class TestMultipliers:
    def test_riesz_on_plane_wave(self, grid3):
        n = np.array([2, 1, 0])
        f = sp.plane_wave(grid3, n)
        k = grid3.dk * n
        r = sp.riesz_transform(f, 0)
        assert r.values[2, 1, 0] == pytest.approx(1j * k[0] / np.linalg.norm(k))

    def test_riesz_sum_of_squares_is_minus_identity(self, grid3):
        f = sp.random_bandlimited(grid3, np.random.default_rng(5))
        total = sum(sp.riesz_transform(sp.riesz_transform(f, j), j).values for j in range(3))
        nz = grid3.kabs > 0
        np.testing.assert_allclose(total[nz], -f.values[nz], atol=1e-13)
        assert total[0, 0, 0] == 0

    def test_radial_multiplier_matches_lambda_power(self, grid3):
        f = sp.random_bandlimited(grid3, np.random.default_rng(6))
        a = sp.apply_radial_multiplier(f, lambda r: r**2)
        np.testing.assert_allclose(a.values, f.values * grid3.kabs**2, atol=1e-12)

    def test_propagation_is_unitary_and_group_property(self, grid3):
        f = sp.random_bandlimited(grid3, np.random.default_rng(7))
        a = sp.propagate(sp.propagate(f, 1.3), 0.4)
        b = sp.propagate(f, 1.7)
        np.testing.assert_allclose(a.values, b.values, atol=1e-13)
        assert sp.l2_norm_frequency(b) == pytest.approx(sp.l2_norm_frequency(f), rel=1e-13)

    def test_propagate_requires_frequency(self, grid3):
        f = sp.random_bandlimited(grid3, np.random.default_rng(8)).to_physical()
        with pytest.raises(ValueError):
            sp.propagate(f, 1.0)


class TestNorms:
    def test_sobolev_of_plane_wave(self, grid3):
        n = (1, 1, 0)
        f = sp.plane_wave(grid3, n)
        k2 = grid3.dk**2 * 2
        vol = grid3.L**3
        assert sp.sobolev_norm(f, 2) == pytest.approx((1 + k2) * math.sqrt(vol), rel=1e-12)
        assert sp.sobolev_norm(f, 1, homogeneous=True) == pytest.approx(math.sqrt(k2 * vol), rel=1e-12)

    def test_linf_of_plane_wave(self, grid3):
        assert sp.lebesgue_norm(sp.plane_wave(grid3, (1, 0, 0), 2.5), np.inf) == pytest.approx(2.5)

    def test_lp_needs_p_at_least_one(self, grid3):
        with pytest.raises(ValueError):
            sp.lebesgue_norm(sp.plane_wave(grid3, (0, 0, 0)), 0.5)

    def test_first_moment_routes_agree_on_gaussian(self):
        g = sp.make_grid(3, 64, 40.0)
        f = sp.gaussian(g, 1.5, role="profile")
        a = sp.weight_moment(f, 1)
        b = sp.first_moment_frequency_route(f)
        # analytic ||x f||_2 for exp(-r^2/(2w^2)): sqrt(3 w^2/2 * (pi w^2)^(3/2))
        w = 1.5
        exact = math.sqrt(1.5 * w**2 * (math.pi * w**2) ** 1.5)
        assert a == pytest.approx(exact, rel=1e-8)
        # the centred-difference route is O(dk^2): refine dk by growing the box
        assert b == pytest.approx(exact, rel=2e-2)
        g2 = sp.make_grid(3, 128, 80.0)
        b2 = sp.first_moment_frequency_route(sp.gaussian(g2, 1.5, role="profile"))
        assert abs(b2 - exact) < abs(b - exact) / 3

    def test_weight_moment_requires_profile(self, grid3):
        with pytest.raises(ValueError):
            sp.weight_moment(sp.gaussian(grid3), 1)


class TestProducts:
    def test_dealiased_product_matches_exact_convolution(self, grid3):
        rng = np.random.default_rng(9)
        a = sp.random_bandlimited(grid3, rng)
        b = sp.random_bandlimited(grid3, rng)
        prod = sp.dealiased_product(a.values, b.values, grid3)
        exact = sp.SpectralField.from_physical(grid3, a.to_physical().values * b.to_physical().values).to_frequency()
        np.testing.assert_allclose(prod, exact.values, atol=1e-13)


class TestSnapshots:
    def test_round_trip(self, tmp_path, grid3):
        f = sp.random_bandlimited(grid3, np.random.default_rng(10), role="profile")
        raw, meta = sp.save_snapshot(tmp_path / "snap", f, time=2.0)
        assert raw.stat().st_size == 16 * grid3.N**3
        g, header = sp.load_snapshot(tmp_path / "snap")
        np.testing.assert_array_equal(g.values, f.values)
        assert header["time"] == 2.0 and g.role == "profile"


@settings(max_examples=25, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3), st.floats(0.0, 10.0))
def test_propagation_preserves_plane_wave_modulus(n1, n2, n3, t):
    g = sp.make_grid(3, 8, 2 * math.pi)
    f = sp.plane_wave(g, (n1, n2, n3))
    assert sp.lebesgue_norm(sp.propagate(f, t), np.inf) == pytest.approx(1.0, rel=1e-12)
