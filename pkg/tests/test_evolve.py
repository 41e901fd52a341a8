"""Tests for the profile integrator and its diagnostics."""

import math

import numpy as np
import pytest

from spacetime_resonance import evolve as ev
from spacetime_resonance import phase as ph
from spacetime_resonance import spectral as sp
from spacetime_resonance.evolve import Component, Interaction, SystemSpec
from spacetime_resonance.phase import Phase


@pytest.fixture(scope="module")
def grid16():
    return sp.make_grid(3, 16, 20.0)


def _system(symbol=None, sources=((0, True), (0, False)), sign=1):
    inter = () if symbol is None else (Interaction(0, sources, symbol),)
    return SystemSpec((Component(sign, 1.0),), inter)


def _data(grid, eps=1e-2, seed=0):
    return ev.gaussian_data(grid, eps, width=1.5, seed=seed)


class TestSystem:
    def test_missing_component_rejected(self):
        with pytest.raises(ValueError):
            SystemSpec((Component(1, 1.0),), (Interaction(1, ((0, False), (0, False)), ph.constant_symbol()),))

    def test_bad_route(self):
        with pytest.raises(ValueError):
            Interaction(0, ((0, False), (0, False)), ph.constant_symbol(), route="fast")

    @pytest.mark.parametrize(
        "sources,signs", [(((0, True), (0, False)), "-+"), (((0, False), (0, False)), "++"), (((0, True), (0, True)), "--")]
    )
    def test_interaction_phase(self, sources, signs):
        s = _system(ph.constant_symbol(), sources)
        assert s.interaction_phase(s.interactions[0]).signs == signs

    def test_from_json(self):
        s = SystemSpec.from_json(
            {"components": [{"sign": 1, "speed": 1}], "interactions": [{"target": 0, "sources": [[0, True], [0, False]], "symbol": {"kind": "Q0", "signs": [-1, 1]}}], "initial": {"kind": "gaussian", "eps": 0.01}}
        )
        assert s.interactions[0].symbol.name == "Q0-+"

    def test_state_must_start_at_t0(self, grid16):
        f = _data(grid16).as_role("profile")
        with pytest.raises(ValueError):
            ev.SimulationState(0.5, (f,), (Component(1, 1.0),))

    def test_state_requires_profiles(self, grid16):
        with pytest.raises(ValueError):
            ev.SimulationState(1.0, (_data(grid16),), (Component(1, 1.0),))


class TestNonlinearity:
    def test_zero_profiles(self, grid16):
        s = _system(ph.constant_symbol())
        sim = ev.Simulation(s, grid16)
        st = ev.initial_state(s, [sp.SpectralField.zeros(grid16).to_frequency()])
        assert all(np.all(v == 0) for v in sim.nonlinearity(st))

    @pytest.mark.parametrize("sources", [((0, False), (0, False)), ((0, True), (0, False))])
    def test_single_mode_oscillation_factor(self, grid16, sources):
        n1 = np.array([1, 0, 0])
        n2 = np.array([0, 2, 0])
        u = sp.plane_wave(grid16, n1, 0.3) + sp.plane_wave(grid16, n2, 0.5j)
        s = _system(ph.constant_symbol(), sources)
        sim = ev.Simulation(s, grid16)
        st = ev.initial_state(s, [u])
        t = 2.7
        out = sim.nonlinearity(st, t)[0]
        phi = s.interaction_phase(s.interactions[0])
        f = st.profiles[0].values
        modes = [n1, n2]

        def leg(conj):
            # (lattice index, coefficient) pairs of the profile leg f or conj(f(-.))
            return [((-n if conj else n), (np.conj(f[tuple(n % 16)]) if conj else f[tuple(n % 16)])) for n in modes]

        target = n1 - n2 if sources[0][1] else n1 + n2
        idx = tuple(target % 16)
        expected = 0
        for a, ca in leg(sources[0][1]):
            for b, cb in leg(sources[1][1]):
                if np.array_equal(a + b, target):
                    xi, eta = grid16.dk * (a + b), grid16.dk * a
                    expected += np.exp(1j * t * phi.value(xi, eta)) * ca * cb
        assert out[idx] == pytest.approx(expected, abs=1e-13)


class TestStep:
    def test_linear_profiles_constant(self, grid16):
        s = _system()
        sim = ev.Simulation(s, grid16)
        st0 = ev.initial_state(s, [_data(grid16)])
        st, reports, _ = sim.run(st0, 4.0, 0.25, report_times=[1.0, 2.0, 4.0])
        assert np.max(np.abs(st.profiles[0].values - st0.profiles[0].values)) == 0.0
        assert abs(reports[0].hN - reports[-1].hN) <= 1e-10 * reports[0].hN

    def test_time_reversal(self, grid16):
        s = _system(ph.null_form_symbol("Q0", -1, 1))
        sim = ev.Simulation(s, grid16)
        st0 = ev.initial_state(s, [_data(grid16, 1e-1)])
        back = sim.step(sim.step(st0, 0.1), -0.1)
        assert np.max(np.abs(back.profiles[0].values - st0.profiles[0].values)) <= 1e-10

    def test_nan_aborts_with_last_good_state(self, grid16):
        s = _system(ph.constant_symbol())
        sim = ev.Simulation(s, grid16)
        st = ev.initial_state(s, [_data(grid16, 1.0) * 1e200])
        with pytest.raises(ev.NumericalFailure) as exc:
            sim.run(st, 2.0, 0.5)
        assert exc.value.last_good.t >= 1.0

    def test_manufactured_order(self):
        g = sp.make_grid(3, 16, 2 * math.pi)
        s = SystemSpec(
            (Component(1, 1.0),),
            (
                Interaction(0, ((0, True), (0, False)), ph.null_form_symbol("Q0", -1, 1)),
                Interaction(0, ((0, False), (0, False)), ph.constant_symbol()),
            ),
        )
        f0 = sp.random_bandlimited(g, np.random.default_rng(0), band=2, role="profile")
        f0 = f0 * (0.5 / np.abs(f0.to_physical().values).max())
        errs, orders = ev.manufactured_convergence(s, g, [f0])
        assert all(abs(o - 4) <= 0.2 for o in orders)

    def test_quadratic_scaling(self, grid16):
        s = _system(ph.constant_symbol())
        sim = ev.Simulation(s, grid16)
        dev = []
        for eps in (1e-3, 5e-4):
            st0 = ev.initial_state(s, [_data(grid16, eps)])
            st, _, _ = sim.run(st0, 3.0, 0.1)
            dev.append(sp.l2_norm_frequency(st.profiles[0] - st0.profiles[0]))
        assert dev[1] / dev[0] == pytest.approx(0.25, rel=0.2)

    def test_conjugation_consistency(self):
        g = sp.make_grid(3, 8, 10.0)
        q = ph.expression_symbol("1 + 0.5*xi1 - 0.25*eta2")
        u0 = sp.random_bandlimited(g, np.random.default_rng(1), band=2)
        u0 = u0 * (0.1 / np.abs(u0.to_physical().values).max())
        a = SystemSpec((Component(1, 1.0),), (Interaction(0, ((0, True), (0, True)), q, route="direct"),))
        # v = conj(u) solves v' = -i Lambda v + T_{q*}(conj v, conj v), q*(xi, eta) = conj q(-xi, -eta)
        b = SystemSpec((Component(-1, 1.0),), (Interaction(0, ((0, True), (0, True)), q.mirrored(), route="direct"),))
        sa, _, _ = ev.Simulation(a, g).run(ev.initial_state(a, [u0]), 2.0, 0.25)
        sb, _, _ = ev.Simulation(b, g).run(ev.initial_state(b, [u0.conj()]), 2.0, 0.25)
        ua, ub = sa.solution(0), sb.solution(0)
        np.testing.assert_allclose(ua.values, ub.conj().values, atol=1e-14)


class TestReports:
    def test_zero_field(self, grid16):
        s = _system()
        st = ev.initial_state(s, [sp.SpectralField.zeros(grid16).to_frequency()])
        r = ev.xnorm_report(st)
        assert all(v == 0 for k, v in r.to_json().items() if k not in ("t", "horizon"))

    def test_first_moment_matches_weight_moment(self, grid16):
        s = _system()
        st = ev.initial_state(s, [_data(grid16)])
        r = ev.xnorm_report(st)
        assert r.xf == pytest.approx(sp.weight_moment(st.profiles[0], 1), rel=1e-12)

    def test_sobolev_index_capped(self):
        g = sp.make_grid(3, 8, 10.0)
        st = ev.initial_state(_system(), [_data(g)])
        with pytest.raises(ValueError):
            ev.xnorm_report(st, ph.XNormParams(N=7))

    def test_json_line_round_trip(self, grid16):
        r = ev.xnorm_report(ev.initial_state(_system(), [_data(grid16)]))
        import json

        assert ev.NormReport.from_json(json.loads(r.to_json_line())) == r

    def test_translation_changes_only_weighted_norms(self):
        g = sp.make_grid(3, 32, 40.0)
        u0 = sp.gaussian(g, 1.5)
        shift = np.array([3, 0, 0])
        a = shift * g.dx
        moved = sp.SpectralField.from_physical(g, np.roll(u0.to_physical().values, shift[0], axis=0)).to_frequency()
        r0 = ev.xnorm_report(ev.initial_state(_system(), [u0]))
        r1 = ev.xnorm_report(ev.initial_state(_system(), [moved]))
        for k in ("hN", "h2", "linf", "riesz_inf"):
            assert getattr(r1, k) == pytest.approx(getattr(r0, k), rel=1e-10)
        f_l2 = sp.l2_norm_frequency(u0)
        # agreement up to the discretisation of |x|^2 on the periodic box
        assert r1.xf == pytest.approx(math.sqrt(r0.xf**2 + a @ a * f_l2**2), rel=1e-4)


class TestNormalForm:
    def test_zero_profile(self, grid16):
        st = ev.initial_state(_system(), [sp.SpectralField.zeros(grid16).to_frequency()])
        g = ev.normal_form_boundary(st, Phase(1, 1))
        assert np.all(g.values == 0) and g.role == "profile"

    def test_single_mode(self, grid16):
        n = np.array([1, 1, 0])
        st = ev.initial_state(_system(), [sp.plane_wave(grid16, n, 0.4)])
        st = ev.SimulationState(3.0, st.profiles, st.components)
        c = st.profiles[0].values[tuple(n)]
        k = grid16.dk * n
        phi = Phase(1, 1)
        g = ev.normal_form_boundary(st, phi)
        expected = np.exp(3j * phi.value(2 * k, k)) / np.linalg.norm(k) * c**2
        assert g.values[tuple(2 * n)] == pytest.approx(expected, abs=1e-14)
        assert np.count_nonzero(np.abs(g.values) > 1e-15) == 1

    def test_quadratic_in_amplitude(self):
        g = sp.make_grid(3, 8, 10.0)
        vals = []
        for eps in (1e-3, 1e-2):
            st = ev.initial_state(_system(), [ev.gaussian_data(g, eps, sobolev_index=3)])
            vals.append(sp.sobolev_norm(ev.normal_form_boundary(st, Phase(-1, 1)), 2) / eps**2)
        assert vals[1] == pytest.approx(vals[0], rel=0.1)


class TestFits:
    def test_inverse_t(self):
        ts = np.linspace(2, 18, 17)
        slope, err = ev.decay_fit([(t, 3 / t) for t in ts], window=(2, 18))
        assert slope == pytest.approx(-1.0, abs=1e-12)

    def test_constant(self):
        slope, _ = ev.decay_fit([(t, 2.0) for t in np.linspace(2, 18, 17)], window=(2, 18))
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_horizon_violation(self):
        with pytest.raises(ValueError, match="horizon"):
            ev.decay_fit([(t, 1 / t) for t in np.linspace(2, 30, 20)], window=(2, 30), horizon=25)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            ev.decay_fit([(2, 1), (3, 1)], window=(2, 3))


class TestScattering:
    def test_linear_run_zero(self, grid16):
        s = _system()
        _, _, kept = ev.Simulation(s, grid16).run(ev.initial_state(s, [_data(grid16)]), 4.0, 0.5, keep_times=[1, 2, 4])
        assert ev.scattering_diagnostic([kept[t] for t in sorted(kept)]) == [0.0, 0.0]

    def test_mismatched_grids(self, grid16):
        other = sp.make_grid(3, 8, 20.0)
        a = ev.initial_state(_system(), [_data(grid16)])
        b = ev.initial_state(_system(), [_data(other)])
        with pytest.raises(ValueError):
            ev.scattering_diagnostic([a, b])


class TestData:
    def test_data_size_normalised(self, grid16):
        u = ev.gaussian_data(grid16, 0.02)
        assert ev.data_size(u) == pytest.approx(0.02, rel=1e-12)

    def test_deterministic(self, grid16):
        np.testing.assert_array_equal(ev.gaussian_data(grid16, 0.01, seed=3).values, ev.gaussian_data(grid16, 0.01, seed=3).values)

    def test_linear_decay_series_preserves_l2(self, grid16):
        series = ev.linear_decay_series(sp.gaussian(grid16, 1.0), [1, 2, 3])
        l2 = [x[2] for x in series]
        assert max(l2) - min(l2) <= 1e-10 * l2[0]
