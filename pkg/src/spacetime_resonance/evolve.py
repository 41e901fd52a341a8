"""Pseudo-spectral time integration of quadratic first-order wave systems.

Component ``l`` has sign ``e_l`` and speed ``c_l``::

    d/dt u_l = i e_l c_l Lambda u_l + sum T_q(v_1, v_2)

where each source ``v`` is a component or its complex conjugate.  The solver
works with profiles ``f_l = exp(-i e_l c_l t Lambda) u_l``, for which the
linear part is exact and the equation reads::

    d/dt f_l = exp(-i e_l c_l t Lambda) sum T_q(v_1, v_2)

A ``(conj(u), u)`` interaction of a ``+`` component therefore oscillates with
the ``-+`` phase ``-|xi| - |eta| + |xi - eta|``.  Profiles are advanced with
the classical fourth-order Runge-Kutta method (integrating-factor RK4).
Time starts at ``t0 = 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import spectral
from .phase import BilinearSymbol, Phase, XNormParams, symbol_from_json
from .pseudoproduct import DIRECT_BUDGET, BudgetExceededError, apply_direct, apply_separable, separable_approximation
from .spectral import Grid, SpectralField

T0 = 1.0


class NumericalFailure(RuntimeError):
    """Non-finite profiles; ``last_good`` holds the state before the failing step."""

    def __init__(self, message: str, last_good: "SimulationState"):
        super().__init__(message)
        self.last_good = last_good


@dataclass(frozen=True)
class Component:
    sign: int = 1
    speed: float = 1.0

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("component sign must be +1 or -1")
        if not self.speed > 0:
            raise ValueError("component speed must be positive")


@dataclass(frozen=True, eq=False)
class Interaction:
    """``T_q(v_1, v_2)`` added to component ``target``; ``sources = ((j, conj), (k, conj))``."""

    target: int
    sources: tuple[tuple[int, bool], tuple[int, bool]]
    symbol: BilinearSymbol
    route: str = "auto"
    coef: complex = 1.0

    def __post_init__(self):
        if self.route not in ("auto", "direct", "separable"):
            raise ValueError(f"unknown evaluation route {self.route!r}")


@dataclass(frozen=True, eq=False)
class SystemSpec:
    components: tuple[Component, ...]
    interactions: tuple[Interaction, ...] = ()
    initial: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.components)
        if n == 0:
            raise ValueError("system needs at least one component")
        for it in self.interactions:
            refs = [it.target] + [s[0] for s in it.sources]
            if any(not 0 <= r < n for r in refs):
                raise ValueError(f"interaction references a missing component: {refs}")

    def interaction_phase(self, it: Interaction) -> Phase:
        """Oscillation phase of an interaction, written as ``-c0|xi| + e1 c1|eta| + e2 c2|xi-eta|``.

        For a ``-`` target the overall sign of the phase is flipped, which
        leaves the resonant sets unchanged.
        """
        out = self.components[it.target]
        legs = []
        for j, conj in it.sources:
            c = self.components[j]
            legs.append((-c.sign if conj else c.sign, c.speed))
        e1, e2 = (s * out.sign for s, _ in legs)
        return Phase(e1, e2, out.speed, legs[0][1], legs[1][1])

    @classmethod
    def from_json(cls, spec: dict, d: int = 3) -> "SystemSpec":
        comps = tuple(Component(int(c.get("sign", 1)), float(c.get("speed", 1.0))) for c in spec["components"])
        inters = []
        for it in spec.get("interactions", []):
            src = tuple((int(s[0]), bool(s[1])) for s in it["sources"])
            coef = it.get("coef", 1.0)
            coef = complex(*coef) if isinstance(coef, (list, tuple)) else complex(coef)
            inters.append(Interaction(int(it.get("target", 0)), src, symbol_from_json(it["symbol"], d), it.get("route", "auto"), coef))
        return cls(comps, tuple(inters), dict(spec.get("initial", {})))


@dataclass(frozen=True, eq=False)
class SimulationState:
    t: float
    profiles: tuple[SpectralField, ...]
    components: tuple[Component, ...]
    steps: int = 0

    def __post_init__(self):
        if self.t < T0 - 1e-12 and self.steps == 0:
            raise ValueError(f"simulations start at t0 = {T0}")
        for f in self.profiles:
            if f.role != "profile" or f.representation != "frequency":
                raise ValueError("state profiles must be profile-role fields in frequency representation")
            if not np.all(np.isfinite(f.values)):
                raise ValueError("state profiles must be finite")

    @property
    def grid(self) -> Grid:
        return self.profiles[0].grid

    def solution(self, l: int = 0) -> SpectralField:
        """``u_l = exp(i e_l c_l t Lambda) f_l``."""
        c = self.components[l]
        return spectral.propagate(self.profiles[l], c.sign * self.t, c.speed).as_role("solution")


def initial_state(system: SystemSpec, data: Sequence[SpectralField], t0: float = T0) -> SimulationState:
    """State at ``t0`` with solutions ``u_l(t0) = data[l]``."""
    if len(data) != len(system.components):
        raise ValueError("one initial field per component required")
    profiles = []
    for c, u in zip(system.components, data):
        fh = u.to_frequency()
        profiles.append(spectral.propagate(fh, -c.sign * t0, c.speed).as_role("profile"))
    return SimulationState(t0, tuple(profiles), system.components, 0)


# ---------------------------------------------------------------------------
# Initial data


def data_size(u0: SpectralField, sobolev_index: int = 5) -> float:
    """``||x u0||_{H^2} + || |x|^2 Lambda u0 ||_{H^1} + ||u0||_{H^N}``."""
    fh = u0.to_frequency()
    g = fh.grid
    return (
        spectral._moment(fh.values, g, 1, 0, 0, 2)
        + spectral._moment(fh.values, g, 2, 1, 0, 1)
        + spectral.sobolev_norm(fh, sobolev_index)
    )


def gaussian_data(
    grid: Grid,
    eps: float,
    width: float = 1.5,
    phase_amplitude: float = 1.0,
    phase_band: int = 2,
    seed: int = 0,
    sobolev_index: int = 5,
) -> SpectralField:
    """Gaussian with a random band-limited phase, scaled to data size ``eps``.

    ``u0 = A exp(-|x|^2 / (2 width^2)) exp(i theta(x))`` where ``theta`` is a
    real random field with modes ``|n_i| <= phase_band`` and sup norm
    ``phase_amplitude``; ``A`` makes :func:`data_size` equal ``eps``.
    """
    rng = np.random.default_rng(seed)
    x = grid.x
    r2 = np.sum(x**2, axis=0)
    theta = np.zeros(grid.shape)
    if phase_amplitude > 0:
        th = spectral.random_bandlimited(grid, rng, phase_band, real=True).to_physical().values.real
        theta = phase_amplitude * th / np.abs(th).max()
    u = SpectralField.from_physical(grid, np.exp(-r2 / (2 * width**2)) * np.exp(1j * theta)).to_frequency()
    return u * (eps / data_size(u, sobolev_index))


def make_initial_data(grid: Grid, spec: dict, seed: int) -> SpectralField:
    kind = spec.get("kind", "gaussian")
    if kind != "gaussian":
        raise ValueError(f"unknown initial data kind {kind!r}")
    return gaussian_data(
        grid,
        float(spec.get("eps", 1e-2)),
        float(spec.get("width", 1.5)),
        float(spec.get("phase_amplitude", 1.0)),
        int(spec.get("phase_band", 2)),
        seed,
        int(spec.get("sobolev_index", 5)),
    )


# ---------------------------------------------------------------------------
# Time stepping


class Simulation:
    """A system on a grid with the evaluation route of every interaction resolved.

    ``forcing(t)``, if given, returns extra profile tendencies (used for
    manufactured-solution tests).
    """

    def __init__(self, system: SystemSpec, grid: Grid, rank: int = 16, forcing: Callable | None = None):
        self.system = system
        self.grid = grid
        self.forcing = forcing
        self.routes: list[tuple[str, object]] = []
        for it in system.interactions:
            self.routes.append(self._resolve(it, rank))

    def _resolve(self, it: Interaction, rank: int):
        q = it.symbol
        fits_direct = self.grid.N ** (2 * self.grid.d) <= DIRECT_BUDGET
        if it.route == "direct":
            if not fits_direct:
                raise BudgetExceededError(f"direct route for {q.name} exceeds the budget on N={self.grid.N}")
            return "direct", q
        if it.route == "separable" or q.separable is not None or not fits_direct:
            return "separable", separable_approximation(q, rank, self.grid)
        return "direct", q

    def nonlinearity(self, state: SimulationState, t: float | None = None) -> list[np.ndarray]:
        """Profile tendencies ``exp(-i e c t Lambda) sum T_q(v_1, v_2)`` per component."""
        return self._tendency([p.values for p in state.profiles], state.t if t is None else t)

    def _tendency(self, profiles: list[np.ndarray], t: float) -> list[np.ndarray]:
        comps = self.system.components
        grid = self.grid
        sols: dict[tuple[int, bool], SpectralField] = {}

        def source(j: int, conj: bool) -> SpectralField:
            key = (j, conj)
            if key not in sols:
                c = comps[j]
                u = SpectralField(grid, profiles[j] * np.exp(1j * c.sign * c.speed * t * grid.kabs))
                sols[key] = u.conj() if conj else u
            return sols[key]

        out = [np.zeros(grid.shape, complex) for _ in comps]
        for it, (route, op) in zip(self.system.interactions, self.routes):
            a, b = source(*it.sources[0]), source(*it.sources[1])
            if route == "direct":
                # same 2/3-rule truncation as the separable route
                a, b = (v.with_values(spectral.dealias(v.values, grid)) for v in (a, b))
                tq = spectral.dealias(apply_direct(op, a, b).values, grid)
            else:
                tq = apply_separable(op, a, b).values
            out[it.target] += it.coef * tq
        for l, c in enumerate(comps):
            if np.any(out[l]):
                out[l] = out[l] * np.exp(-1j * c.sign * c.speed * t * grid.kabs)
        if self.forcing is not None:
            for l, extra in enumerate(self.forcing(t)):
                out[l] = out[l] + extra
        return out

    def step(self, state: SimulationState, dt: float) -> SimulationState:
        """One classical RK4 step on the profiles."""
        f0 = [p.values for p in state.profiles]
        t = state.t

        def shifted(k, h):
            return [a + h * b for a, b in zip(f0, k)]

        if not self.system.interactions and self.forcing is None:
            new = f0
        else:
            k1 = self._tendency(f0, t)
            k2 = self._tendency(shifted(k1, dt / 2), t + dt / 2)
            k3 = self._tendency(shifted(k2, dt / 2), t + dt / 2)
            k4 = self._tendency(shifted(k3, dt), t + dt)
            new = [a + dt / 6 * (p + 2 * q + 2 * r + s) for a, p, q, r, s in zip(f0, k1, k2, k3, k4)]
        if not all(np.all(np.isfinite(v)) for v in new):
            raise NumericalFailure(f"non-finite profiles after the step from t={t:.6g}", state)
        return SimulationState(t + dt, tuple(p.with_values(v) for p, v in zip(state.profiles, new)), state.components, state.steps + 1)

    def run(
        self,
        state: SimulationState,
        t_end: float,
        dt: float,
        report_times: Sequence[float] = (),
        params: XNormParams | None = None,
        keep_times: Sequence[float] = (),
        callback: Callable | None = None,
    ) -> tuple[SimulationState, list["NormReport"], dict[float, SimulationState]]:
        """Advance to ``t_end``; steps are shortened to land exactly on report and keep times."""
        params = params or XNormParams()
        marks = sorted({float(x) for x in list(report_times) + list(keep_times) + [t_end] if x >= state.t - 1e-12})
        reports: list[NormReport] = []
        kept: dict[float, SimulationState] = {}
        keep = {float(x) for x in keep_times}
        rep = {float(x) for x in report_times}
        for mark in marks:
            while state.t < mark - 1e-12:
                h = min(dt, mark - state.t)
                state = self.step(state, h)
            state = SimulationState(mark, state.profiles, state.components, state.steps)
            if mark in rep:
                reports.append(xnorm_report(state, params))
                if callback is not None:
                    callback(reports[-1])
            if mark in keep:
                kept[mark] = state
        return state, reports, kept


def nonlinearity(sim: Simulation, state: SimulationState, t: float | None = None) -> list[np.ndarray]:
    return sim.nonlinearity(state, t)


def step(sim: Simulation, state: SimulationState, dt: float) -> SimulationState:
    return sim.step(state, dt)


# ---------------------------------------------------------------------------
# Diagnostics

_REPORT_KEYS = ("hN", "h2", "linf", "riesz_inf", "xf", "lam_xf_h1", "x2_lam_f_h1")


@dataclass(frozen=True)
class NormReport:
    """All constituents of the X-norm at one time, for one component."""

    t: float
    hN: float
    h2: float
    linf: float
    riesz_inf: float
    xf: float
    lam_xf_h1: float
    x2_lam_f_h1: float
    xnorm: float
    horizon: float

    def __post_init__(self):
        for k in _REPORT_KEYS + ("xnorm",):
            v = getattr(self, k)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"norm {k} = {v} must be finite and nonnegative")

    @property
    def t_linf(self) -> float:
        return self.t * self.linf

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("t",) + _REPORT_KEYS + ("xnorm", "horizon")}

    def to_json_line(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False, allow_nan=False)

    @classmethod
    def from_json(cls, spec: dict) -> "NormReport":
        return cls(**{k: float(spec[k]) for k in ("t",) + _REPORT_KEYS + ("xnorm", "horizon")})


def max_sobolev_index(grid: Grid) -> float:
    """Largest Sobolev index tracked on ``grid``: ``2 log2 N``."""
    return 2 * np.log2(grid.N)


def xnorm_report(state: SimulationState, params: XNormParams | None = None, component: int = 0) -> NormReport:
    """X-norm constituents of ``u = exp(i e c t Lambda) f`` at ``state.t``."""
    params = params or XNormParams()
    grid = state.grid
    if params.N > max_sobolev_index(grid):
        raise ValueError(f"Sobolev index {params.N} exceeds the resolvable {max_sobolev_index(grid):.3g} on N={grid.N}")
    f = state.profiles[component]
    u = state.solution(component)
    t = state.t
    hN = spectral.sobolev_norm(u, params.N)
    h2 = spectral.sobolev_norm(u, 2)
    linf = spectral.lebesgue_norm(u, np.inf)
    riesz = max(spectral.lebesgue_norm(spectral.riesz_transform(u, j), np.inf) for j in range(grid.d))
    xf = spectral._moment(f.values, grid, 1, 0, 0, 0)
    lam_xf = spectral._moment(f.values, grid, 1, 0, 1, 1)
    x2_lam_f = spectral._moment(f.values, grid, 2, 1, 0, 1)
    x = t ** (-params.eps) * hN + h2 + t * (linf + riesz) + t ** (-params.gamma) * xf + lam_xf + x2_lam_f / t
    return NormReport(t, hN, h2, linf, riesz, xf, lam_xf, x2_lam_f, x, grid.horizon)


def normal_form_boundary(state: SimulationState, phase: Phase, a_symbol: BilinearSymbol | None = None, component: int = 0, force: bool = False) -> SpectralField:
    """Boundary term ``g_hat(t, xi) = sum_eta exp(i t phi) a f_1(eta) f_2(xi - eta)`` by direct quadrature.

    ``f_1``, ``f_2`` are the profile or its conjugate according to the
    phase signs (``f_- = conj(f)``); ``a`` defaults to ``1/|eta|``.
    """
    from .phase import inverse_norm_symbol

    a = a_symbol or inverse_norm_symbol("eta")
    t = state.t
    sym = BilinearSymbol(
        f"exp(it phi){a.name}", lambda xi, eta: np.exp(1j * t * phase.value(xi, eta)) * a.evaluator(xi, eta), None, a.axes, None, a.axis_value
    )
    f = state.profiles[component]
    legs = [f if e > 0 else f.conj() for e in (phase.eps1, phase.eps2)]
    g = apply_direct(sym, legs[0], legs[1], force=force)
    return g.as_role("profile")


def decay_fit(series, key: str = "linf", window: tuple[float, float] = (2.0, 20.0), horizon: float | None = None) -> tuple[float, float]:
    """Least-squares slope of ``log value`` against ``log t`` inside ``window``.

    ``series`` is a list of :class:`NormReport` or ``(t, value)`` pairs.
    Requires at least 8 samples and ``window[1]`` before the wrap-around
    horizon.  Returns ``(slope, stderr)``.
    """
    t1, t2 = window
    if series and isinstance(series[0], NormReport):
        if horizon is None:
            horizon = series[0].horizon
        if not hasattr(series[0], key):
            raise KeyError(f"unknown report key {key!r}")
        pts = [(r.t, getattr(r, key)) for r in series]
    else:
        pts = [(float(a), float(b)) for a, b in series]
    if horizon is not None and t2 >= horizon:
        raise ValueError(f"fit window ends at t={t2}, beyond the wrap-around horizon {horizon}")
    pts = [(t, v) for t, v in pts if t1 - 1e-12 <= t <= t2 + 1e-12]
    if len(pts) < 8:
        raise ValueError(f"decay fit needs at least 8 samples in the window, got {len(pts)}")
    ts, vs = np.array(pts).T
    if np.any(vs <= 0):
        raise ValueError("decay fit needs positive values")
    res = stats.linregress(np.log(ts), np.log(vs))
    return float(res.slope), float(res.stderr)


def scattering_diagnostic(states: Sequence[SimulationState], component: int = 0, s: float = 2) -> list[float]:
    """``||f(t_{i+1}) - f(t_i)||_{H^s}`` for consecutive states."""
    out = []
    for a, b in zip(states, states[1:]):
        fa, fb = a.profiles[component], b.profiles[component]
        if fa.grid != fb.grid:
            raise ValueError("states live on different grids")
        out.append(spectral.sobolev_norm(fb - fa, s))
    return out


def linear_decay_series(u0: SpectralField, times: Sequence[float], speed: float = 1.0) -> list[tuple[float, float, float]]:
    """``(t, ||e^{itL} u0||_inf, ||e^{itL} u0||_2)`` for the free half-wave flow."""
    fh = u0.to_frequency()
    out = []
    for t in times:
        u = spectral.propagate(fh, t, speed)
        out.append((float(t), spectral.lebesgue_norm(u, np.inf), spectral.l2_norm_frequency(u)))
    return out


def manufactured_convergence(
    system: SystemSpec,
    grid: Grid,
    f0: Sequence[SpectralField],
    dts: Sequence[float] = (0.2, 0.1, 0.05, 0.025),
    t_end: float = 3.0,
) -> tuple[list[float], list[float]]:
    """Convergence study against the exact profiles ``f(t) = f0 (1 + sin t / 2)``.

    The forcing ``f'(t) - N(t, f(t))`` makes these profiles an exact
    solution of the forced system.  Returns the errors at ``t_end`` for each
    step size and the observed orders ``log2(e_i / e_{i+1})`` (for halved
    steps).
    """
    base = [f.values for f in f0]
    probe = Simulation(system, grid)

    def exact(t):
        return [b * (1 + 0.5 * np.sin(t)) for b in base]

    def forcing(t):
        nl = probe._tendency(exact(t), t)
        return [0.5 * np.cos(t) * b - n for b, n in zip(base, nl)]

    sim = Simulation(system, grid, forcing=forcing)
    sim.routes = probe.routes
    errors = []
    for dt in dts:
        start = SimulationState(T0, tuple(SpectralField(grid, v, "frequency", "profile") for v in exact(T0)), system.components)
        end, _, _ = sim.run(start, t_end, dt)
        ref = exact(t_end)
        err = np.sqrt(sum(np.sum(np.abs(e.values - r) ** 2) for e, r in zip(end.profiles, ref)) / sum(np.sum(np.abs(r) ** 2) for r in ref))
        errors.append(float(err))
    orders = [float(np.log(a / b) / np.log(da / db)) for a, b, da, db in zip(errors, errors[1:], dts, dts[1:])]
    return errors, orders
