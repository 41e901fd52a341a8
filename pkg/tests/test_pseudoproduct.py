"""Tests for linear multipliers, pseudo-products, compression and probes."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacetime_resonance import phase as ph
from spacetime_resonance import pseudoproduct as pp
from spacetime_resonance import spectral as sp
from spacetime_resonance.multipliers import LinearMultiplier, SeparableForm, Term, lp_bump, lp_cutoff, lp_range


@pytest.fixture(scope="module")
def grid8():
    return sp.make_grid(3, 8, 2 * math.pi)


@pytest.fixture(scope="module")
def fields8(grid8):
    rng = np.random.default_rng(0)
    return sp.random_bandlimited(grid8, rng), sp.random_bandlimited(grid8, rng)


def _pointwise(f, g):
    return sp.SpectralField.from_physical(f.grid, f.to_physical().values * g.to_physical().values).to_frequency()


def _rel(a, b):
    return np.linalg.norm(a.values - b.values) / np.linalg.norm(b.values)


class TestMultipliers:
    def test_lp_cutoff_plateaus(self):
        assert lp_cutoff(0.5) == 1 and lp_cutoff(2.0) == 0
        assert 0 < lp_cutoff(1.5) < 1

    def test_lp_bump_support(self):
        r = np.linspace(0, 20, 2001)
        b = lp_bump(r, 2)
        assert np.all(b[(r < 2) | (r > 8)] == 0)
        assert np.all(b >= 0)

    def test_json_round_trip(self, grid8):
        m = LinearMultiplier.product(LinearMultiplier.riesz(1), LinearMultiplier("lambda", {"s": -1}))
        back = LinearMultiplier.from_json(json.loads(json.dumps(m.to_json())))
        np.testing.assert_allclose(back.on_grid(grid8), m.on_grid(grid8))
        tab = LinearMultiplier.tabulated(np.arange(512, dtype=float).reshape(grid8.shape))
        back = LinearMultiplier.from_json(json.loads(json.dumps(tab.to_json())))
        np.testing.assert_array_equal(back.on_grid(grid8), tab.on_grid(grid8))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            LinearMultiplier("wavelet")

    def test_form_json_round_trip(self, grid8):
        form = ph.null_form_symbol("Q0i", -1, 1, 2).separable
        back = SeparableForm.from_json(json.loads(json.dumps(form.to_json())))
        xi, eta = np.array([0.3, 1.0, -2.0]), np.array([1.0, -1.0, 0.5])
        assert back.symbol(xi, eta) == pytest.approx(form.symbol(xi, eta))

    def test_empty_form_rejected(self):
        with pytest.raises(ValueError):
            SeparableForm(())


class TestDirect:
    def test_constant_symbol_is_pointwise_product(self, fields8):
        f, g = fields8
        assert _rel(pp.apply_direct(ph.constant_symbol(), f, g), _pointwise(f, g)) <= 1e-12

    def test_eta_only_symbol_factors(self, fields8, grid8):
        f, g = fields8
        m = ph.expression_symbol("abs_eta**2")
        mf = f.with_values(f.values * grid8.kabs**2)
        assert _rel(pp.apply_direct(m, f, g), _pointwise(mf, g)) <= 1e-12

    def test_grid_mismatch(self, fields8):
        f, _ = fields8
        other = sp.random_bandlimited(sp.make_grid(3, 8, 4.0), np.random.default_rng(1))
        with pytest.raises(ValueError):
            pp.apply_direct(ph.constant_symbol(), f, other)

    def test_budget(self):
        g = sp.make_grid(3, 32, 2 * math.pi)
        f = sp.SpectralField.zeros(g).to_frequency()
        with pytest.raises(pp.BudgetExceededError):
            pp.apply_direct(ph.constant_symbol(), f, f)

    def test_bilinearity(self, fields8, grid8):
        f, g = fields8
        h = sp.random_bandlimited(grid8, np.random.default_rng(2))
        m = ph.null_form_symbol("Qij", 1, -1, 1, 2)
        a = 0.7 - 0.2j
        lhs = pp.apply_direct(m, f * a + h, g)
        rhs = pp.apply_direct(m, f, g) * a + pp.apply_direct(m, h, g)
        np.testing.assert_allclose(lhs.values, rhs.values, atol=1e-13)

    def test_swap_symmetry(self, fields8):
        f, g = fields8
        m = ph.expression_symbol("abs_eta + 2*abs_xi_eta**2 + xi1")
        np.testing.assert_allclose(pp.apply_direct(m.swapped(), f, g).values, pp.apply_direct(m, g, f).values, atol=1e-12)


class TestSeparable:
    def test_identity_form(self, fields8):
        f, g = fields8
        assert _rel(pp.apply_separable(ph.constant_symbol().separable, f, g), _pointwise(f, g)) <= 1e-12

    def test_q0_plane_waves(self):
        g = sp.make_grid(3, 16, 2 * math.pi)
        n1, n2 = np.array([1, 2, 0]), np.array([-2, 1, 1])
        f, h = sp.plane_wave(g, n1), sp.plane_wave(g, n2)
        for e1, e2 in ((1, 1), (-1, 1)):
            q = ph.null_form_symbol("Q0", e1, e2)
            out = pp.apply_separable(q.separable, f, h)
            k1, k2 = g.dk * n1, g.dk * n2
            expected = q(k1 + k2, k1)
            cos = k1 @ k2 / (np.linalg.norm(k1) * np.linalg.norm(k2))
            assert expected == pytest.approx(2 * (1 - e1 * e2 * cos))
            assert out.values[tuple((n1 + n2) % 16)] == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("N", [8, 16])
    def test_direct_and_separable_agree_for_null_forms(self, N):
        g = sp.make_grid(3, N, 2 * math.pi)
        rng = np.random.default_rng(N)
        f, h = sp.random_bandlimited(g, rng), sp.random_bandlimited(g, rng)
        for e1 in (1, -1):
            for e2 in (1, -1):
                for kind, kw in (("Q0", {}), ("Q0i", {"i": 2}), ("Qij", {"i": 1, "j": 3})):
                    q = ph.null_form_symbol(kind, e1, e2, **kw)
                    assert _rel(pp.apply_separable(q.separable, f, h), pp.apply_direct(q, f, h)) <= 1e-10, q.name


class TestCompression:
    def test_exact_form_returned(self, grid8):
        q = ph.null_form_symbol("Q0", 1, 1)
        form = pp.separable_approximation(q, 4, grid8)
        assert form.rank == 4 and form.error == 0.0

    def test_constant_rank_one(self, grid8):
        form = pp.separable_approximation(ph.constant_symbol(), 1, grid8)
        assert form.rank == 1 and form.error == 0.0

    def test_generic_compression_matches_direct(self, grid8, fields8):
        f, g = fields8
        m = ph.expression_symbol("exp(-abs_xi_eta**2) * (1 + abs_eta)")
        form = pp.separable_approximation(m, 8, grid8)
        assert form.regime == "compressed"
        direct = pp.apply_direct(m, f.with_values(sp.dealias(f.values, grid8)), g.with_values(sp.dealias(g.values, grid8)))
        sep = pp.apply_separable(form, f, g)
        scale = np.sum(np.abs(f.values)) * np.sum(np.abs(g.values))
        assert np.max(np.abs(sp.dealias(direct.values, grid8) - sep.values)) <= form.error * scale + 1e-10

    def test_smooth_symbol_error_monotone(self):
        g = sp.make_grid(3, 8, 16 * math.pi)
        m = ph.coifman_meyer_test_symbol()
        errs = [pp.separable_approximation(m, k, g).error for k in (1, 2, 4, 8, 16)]
        assert all(b <= a for a, b in zip(errs, errs[1:]))
        assert errs[-1] <= 1e-3

    def test_rank_exceeding_band(self, grid8):
        with pytest.raises(ValueError):
            pp.separable_approximation(ph.coifman_meyer_test_symbol(), 10_000, grid8)

    def test_paraproduct_split_sums_to_symbol(self, grid8):
        m = ph.coifman_meyer_test_symbol()
        parts = pp.paraproduct_split(m, grid8, 8)
        assert set(parts) == {"low-high", "high-low", "high-high"}
        form = pp.separable_approximation(m, 8, grid8, paraproduct=True)
        xi, eta = np.array([0.0, 1.0, 1.0]), np.array([1.0, 0.0, 1.0])
        assert abs(form.symbol(xi, eta, grid8) - m(xi, eta)) <= form.error + 1e-12


class TestLittlewoodPaley:
    def test_partition_of_unity(self):
        g = sp.make_grid(3, 16, 2 * math.pi)
        f = sp.random_bandlimited(g, np.random.default_rng(3), band=7)
        lo, hi = lp_range(g)
        total = sum(pp.littlewood_paley_projection(f, j).values for j in range(lo, hi + 1))
        expected = f.values.copy()
        expected[0, 0, 0] = 0
        np.testing.assert_allclose(total, expected, atol=1e-12)

    def test_plane_wave_shells(self):
        g = sp.make_grid(3, 32, 2 * math.pi)
        f = sp.plane_wave(g, (4, 0, 0))
        assert pp.littlewood_paley_projection(f, 2).values[4, 0, 0] == pytest.approx(1)
        assert np.all(pp.littlewood_paley_projection(f, 5).values == 0)
        # j - 3 = -1 lies below the lattice's dyadic range
        with pytest.raises(ValueError):
            pp.littlewood_paley_projection(f, -1)
        f8 = sp.plane_wave(g, (8, 0, 0))
        assert np.all(pp.littlewood_paley_projection(f8, 0).values == 0)

    def test_contraction_and_range(self):
        g = sp.make_grid(3, 16, 2 * math.pi)
        f = sp.random_bandlimited(g, np.random.default_rng(4), band=7)
        lo, hi = lp_range(g)
        for j in range(lo, hi + 1):
            assert sp.l2_norm_frequency(pp.littlewood_paley_projection(f, j)) <= sp.l2_norm_frequency(f)
        with pytest.raises(ValueError):
            pp.littlewood_paley_projection(f, hi + 1)


class TestProbe:
    def test_constant_symbol_obeys_hoelder(self):
        stats = pp.bilinear_bound_probe(ph.constant_symbol(), 4, 4, 2, trials=10, N_list=(8, 16))
        assert stats.max_ratio <= 1 + 1e-9
        assert stats.to_csv().splitlines()[0] == "N,trial,ratio"
        assert len(stats.rows) == 20

    def test_exponent_relation_enforced(self):
        with pytest.raises(ValueError):
            pp.bilinear_bound_probe(ph.constant_symbol(), 4, 4, 3, trials=1)

    def test_fractional_integration_bounded(self):
        # 1/r = 1/2 + 1/4 - 1/3
        stats = pp.bilinear_bound_probe(ph.inverse_norm_symbol("eta"), 2, 4, 12 / 5, trials=5, N_list=(8, 16), smoothing=1.0)
        assert np.isfinite(stats.max_ratio) and stats.slope <= 0.5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_direct_separable_agreement_random_fields(seed):
    g = sp.make_grid(3, 8, 2 * math.pi)
    rng = np.random.default_rng(seed)
    f, h = sp.random_bandlimited(g, rng), sp.random_bandlimited(g, rng)
    q = ph.null_form_symbol("Q0", -1, 1)
    assert _rel(pp.apply_separable(q.separable, f, h), pp.apply_direct(q, f, h)) <= 1e-10
