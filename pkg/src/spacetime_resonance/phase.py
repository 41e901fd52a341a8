"""Three-wave phases, their derivatives and the identities they satisfy.

A quadratic interaction ``T_q(u_1, u_2)`` between waves of speeds ``c_1``,
``c_2`` (signs ``eps_1``, ``eps_2``: ``+`` for ``u``, ``-`` for ``conj(u)``)
feeding an output of speed ``c_0`` oscillates in time with the phase::

    phi(xi, eta) = -c0 |xi| + eps1 c1 |eta| + eps2 c2 |xi - eta|

``eta`` is the frequency of the first argument and ``xi - eta`` that of the
second.  With unit speeds the ``-+`` phase is ``-|xi| - |eta| + |xi - eta|``,
the interaction of ``conj(u)`` with ``u``.

All evaluators accept arrays of shape ``(..., d)``.

The module also holds the bilinear symbols ``m(xi, eta)`` used as quadratic
interactions, including the classical null forms with their exact Riesz
factorisations.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .multipliers import LinearMultiplier, SeparableForm, Term


class SingularAxisError(ValueError):
    """Evaluation on one of the axes ``xi = 0``, ``eta = 0``, ``xi = eta``."""

    def __init__(self, axis: str):
        super().__init__(f"evaluation on the singular axis {axis}")
        self.axis = axis


class UnsupportedIdentityError(ValueError):
    pass


class OutsideSupportError(ValueError):
    pass


def _norm(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(v, float) ** 2, axis=-1))


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def safe_unit(v: np.ndarray) -> np.ndarray:
    """``v / |v|`` with the zero vector mapped to zero (Riesz convention)."""
    v = np.asarray(v, float)
    n = _norm(v)[..., None]
    return np.divide(v, n, out=np.zeros_like(v), where=n > 0)


def _guard(name: str, v: np.ndarray) -> None:
    if np.any(_norm(v) == 0):
        raise SingularAxisError(name)


@dataclass(frozen=True)
class Phase:
    """``phi = -c0|xi| + eps1 c1|eta| + eps2 c2|xi - eta|``."""

    eps1: int = -1
    eps2: int = 1
    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if self.eps1 not in (-1, 1) or self.eps2 not in (-1, 1):
            raise ValueError("signs must be +1 or -1")
        if min(self.c0, self.c1, self.c2) <= 0:
            raise ValueError("speeds must be positive")

    @classmethod
    def from_signs(cls, signs: str, speeds=(1.0, 1.0, 1.0)) -> "Phase":
        """``Phase.from_signs("-+")``; ``speeds`` is ``(c0, c1, c2)``."""
        s = signs.replace(" ", "")
        if len(s) != 2 or any(ch not in "+-" for ch in s):
            raise ValueError(f"sign pair must look like '-+', got {signs!r}")
        e1, e2 = (1 if ch == "+" else -1 for ch in s)
        return cls(e1, e2, *map(float, speeds))

    @property
    def signs(self) -> str:
        return "".join("+" if e > 0 else "-" for e in (self.eps1, self.eps2))

    @property
    def equal_speeds(self) -> bool:
        return self.c0 == self.c1 == self.c2

    def value(self, xi, eta) -> np.ndarray:
        xi, eta = np.asarray(xi, float), np.asarray(eta, float)
        return -self.c0 * _norm(xi) + self.eps1 * self.c1 * _norm(eta) + self.eps2 * self.c2 * _norm(xi - eta)

    def grad_eta(self, xi, eta) -> np.ndarray:
        xi, eta = np.asarray(xi, float), np.asarray(eta, float)
        return self.eps1 * self.c1 * safe_unit(eta) + self.eps2 * self.c2 * safe_unit(eta - xi)

    def grad_xi(self, xi, eta) -> np.ndarray:
        xi, eta = np.asarray(xi, float), np.asarray(eta, float)
        return -self.c0 * safe_unit(xi) + self.eps2 * self.c2 * safe_unit(xi - eta)

    def hess_eta(self, xi, eta) -> np.ndarray:
        """Hessian in ``eta``; shape ``(..., d, d)``."""
        xi, eta = np.asarray(xi, float), np.asarray(eta, float)
        d = eta.shape[-1]
        eye = np.eye(d)
        out = np.zeros(eta.shape + (d,))
        for coef, v in ((self.eps1 * self.c1, eta), (self.eps2 * self.c2, eta - xi)):
            r = _norm(v)[..., None, None]
            u = safe_unit(v)
            proj = eye - u[..., :, None] * u[..., None, :]
            out += coef * np.divide(proj, r, out=np.zeros_like(proj), where=r > 0)
        return out

    def to_json(self) -> dict:
        return {"signs": [self.eps1, self.eps2], "speeds": [self.c0, self.c1, self.c2]}

    @classmethod
    def from_json(cls, spec: dict) -> "Phase":
        signs = spec.get("signs", [-1, 1])
        speeds = spec.get("speeds", [1, 1, 1])
        return cls(int(signs[0]), int(signs[1]), *map(float, speeds))


def phase_value(phi: Phase, xi, eta) -> np.ndarray:
    return phi.value(xi, eta)


def phase_grad_eta(phi: Phase, xi, eta) -> np.ndarray:
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    _guard("eta = 0", eta)
    _guard("xi - eta = 0", xi - eta)
    return phi.grad_eta(xi, eta)


def phase_grad_xi(phi: Phase, xi, eta) -> np.ndarray:
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    _guard("xi = 0", xi)
    _guard("xi - eta = 0", xi - eta)
    return phi.grad_xi(xi, eta)


# ---------------------------------------------------------------------------
# Identities


def scaling_identity_residual(phi: Phase, xi, eta) -> np.ndarray:
    """``| |xi| grad_xi phi - (eta-xi)/|eta-xi| phi - sigma |eta| grad_eta phi |``.

    ``sigma = -eps1``: ``+1`` for the ``-+`` phase, ``-1`` for ``++``.  The
    identity expresses that ``grad_xi phi`` vanishes on the space-time
    resonant set; it only holds for equal speeds and ``eps2 = +1``.
    """
    if not phi.equal_speeds:
        raise UnsupportedIdentityError("scaling identity requires equal speeds")
    if phi.eps2 != 1:
        raise UnsupportedIdentityError(f"no scaling identity for the {phi.signs} phase")
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    for name, v in (("xi = 0", xi), ("eta = 0", eta), ("xi - eta = 0", xi - eta)):
        _guard(name, v)
    sigma = -phi.eps1
    c = phi.c0
    lhs = _norm(xi)[..., None] * phi.grad_xi(xi, eta)
    rhs = safe_unit(eta - xi) * phi.value(xi, eta)[..., None] + sigma * _norm(eta)[..., None] * phi.grad_eta(xi, eta)
    return _norm(lhs - rhs) / c


def reciprocal_phase_residual(xi, eta) -> np.ndarray:
    """``|1/phi + (|xi|+|eta|+|xi-eta|) / (2 (xi.eta + |xi||eta|))|`` for the unit ``-+`` phase.

    Valid where ``xi.eta + |xi||eta| >= 3/4 |xi||eta|`` (support of ``chi_+``).
    """
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    _guard("xi = 0", xi)
    _guard("eta = 0", eta)
    a, b = _norm(xi), _norm(eta)
    den = _dot(xi, eta) + a * b
    if np.any(den < 0.75 * a * b * (1 - 1e-12)):
        raise OutsideSupportError("xi.eta + |xi||eta| below 3/4 |xi||eta|: outside the chi_+ support")
    phi = Phase(-1, 1).value(xi, eta)
    return np.abs(1.0 / phi + 0.5 * (a + b + _norm(xi - eta)) / den)


def space_resonance_identity_residual(xi, eta, constant: float = -0.5) -> np.ndarray:
    """Residual of ``phi = constant * B * |grad_eta phi|^2`` for the unit ``-+`` phase.

    ``B = (|xi|+|eta|+|xi-eta|) |eta||xi-eta| / (xi.(xi-eta) + |xi||xi-eta|)``.
    The identity is exact with ``constant = -1/2``; other values are accepted
    so that alternative normalisations can be compared.  Valid where
    ``cos(xi, xi - eta) >= -1/4`` (support of ``chi_-``).
    """
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    for name, v in (("xi = 0", xi), ("eta = 0", eta), ("xi - eta = 0", xi - eta)):
        _guard(name, v)
    zeta = xi - eta
    a, b, c = _norm(xi), _norm(eta), _norm(zeta)
    den = _dot(xi, zeta) + a * c
    if np.any(den < 0.75 * a * c * (1 - 1e-12)):
        raise OutsideSupportError("cos(xi, xi - eta) below -1/4: outside the chi_- support")
    phi = Phase(-1, 1)
    bracket = (a + b + c) * b * c / den
    g2 = np.sum(phi.grad_eta(xi, eta) ** 2, axis=-1)
    return np.abs(phi.value(xi, eta) - constant * bracket * g2)


# ---------------------------------------------------------------------------
# Angular cutoff


def smooth_ramp(x) -> np.ndarray:
    """Quintic smoothstep: 0 for ``x <= -1/4``, 1 for ``x >= 1/4``, C^2, odd about 1/2."""
    s = np.clip((np.asarray(x, float) + 0.25) / 0.5, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s**2)


def angular_cutoff(xi, eta) -> np.ndarray:
    """``chi_+(xi, eta) = ramp(xi/|xi| . (eta - xi)/|eta - xi|)``."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    _guard("xi = 0", xi)
    _guard("xi - eta = 0", xi - eta)
    return smooth_ramp(_dot(safe_unit(xi), safe_unit(eta - xi)))


def angular_cutoff_minus(xi, eta) -> np.ndarray:
    return 1.0 - angular_cutoff(xi, eta)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class XNormParams:
    """Weights of the a-priori norm: Sobolev index ``N`` and small exponents.

    Construction enforces ``0 < gamma < b < a/3`` and ``a < 1/8``.
    """

    N: int = 5
    eps: float = 0.01
    gamma: float = 0.005
    a: float = 0.1
    b: float = 0.01

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("Sobolev index N must be at least 2")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not (0 < self.gamma < self.b < self.a / 3 and self.a < 1 / 8):
            raise ValueError(
                f"need 0 < gamma < b < a/3 and a < 1/8; got gamma={self.gamma}, b={self.b}, a={self.a}"
            )


# ---------------------------------------------------------------------------
# Bilinear symbols

AXES = ("xi", "eta", "xi-eta")


@dataclass(frozen=True, eq=False)
class BilinearSymbol:
    """A frequency-pair symbol ``m(xi, eta)``.

    ``evaluator`` maps arrays ``(..., d), (..., d)`` to complex ``(...)``.
    ``degree`` is the homogeneity degree, ``None`` for non-homogeneous
    symbols.  Where the evaluator is not finite (on a declared singular axis)
    calls return ``axis_value``.
    """

    name: str
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    degree: float | None = 0.0
    axes: frozenset = frozenset()
    separable: SeparableForm | None = None
    axis_value: complex = 0.0
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.axes) - set(AXES)
        if unknown:
            raise ValueError(f"unknown singular axes {sorted(unknown)}")

    def __call__(self, xi, eta) -> np.ndarray:
        xi, eta = np.asarray(xi, float), np.asarray(eta, float)
        with np.errstate(all="ignore"):
            v = np.asarray(self.evaluator(xi, eta), complex)
        v = np.broadcast_to(v, np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1])).copy()
        bad = ~np.isfinite(v)
        if bad.any():
            v[bad] = self.axis_value
        return v

    def axis_distance(self, xi, eta) -> np.ndarray:
        """Distance to the nearest declared singular axis (``inf`` if none)."""
        xi, eta = np.asarray(xi, float), np.asarray(eta, float)
        dist = np.full(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]), np.inf)
        for ax, v in (("xi", xi), ("eta", eta), ("xi-eta", xi - eta)):
            if ax in self.axes:
                dist = np.minimum(dist, _norm(v))
        return dist

    def check_homogeneity(self, rng: np.random.Generator, n: int = 1000, d: int = 3, tol: float = 1e-10) -> float:
        """Largest relative violation of ``m(l xi, l eta) = l^s m(xi, eta)``, ``l in {1/2, 2}``."""
        if self.degree is None:
            raise ValueError(f"symbol {self.name} is not homogeneous")
        xi, eta = _random_pairs(rng, n, d)
        base = self(xi, eta)
        worst = 0.0
        for lam in (0.5, 2.0):
            scaled = self(lam * xi, lam * eta)
            err = np.abs(scaled - lam**self.degree * base) / np.maximum(1.0, np.abs(lam**self.degree * base))
            worst = max(worst, float(err.max()))
        return worst

    def check_separable(self, rng: np.random.Generator, n: int = 1000, d: int = 3) -> float:
        """Largest pointwise difference between the evaluator and the separable form."""
        if self.separable is None:
            raise ValueError(f"symbol {self.name} has no separable form")
        xi, eta = _random_pairs(rng, n, d)
        return float(np.abs(self(xi, eta) - self.separable.symbol(xi, eta)).max())

    def with_separable(self, form: SeparableForm) -> "BilinearSymbol":
        return BilinearSymbol(self.name, self.evaluator, self.degree, self.axes, form, self.axis_value, self.spec)

    def mirrored(self) -> "BilinearSymbol":
        """``m*(xi, eta) = conj(m(-xi, -eta))``, the symbol seen by conjugated fields."""
        ev = self.evaluator
        return BilinearSymbol(
            f"{self.name}*", lambda xi, eta: np.conj(ev(-xi, -eta)), self.degree, self.axes, None, np.conj(self.axis_value)
        )

    def swapped(self) -> "BilinearSymbol":
        """``m(xi, xi - eta)``: the symbol of ``T_m`` with its arguments exchanged."""
        ev = self.evaluator
        swap = {"eta": "xi-eta", "xi-eta": "eta", "xi": "xi"}
        return BilinearSymbol(
            f"{self.name}~", lambda xi, eta: ev(xi, xi - eta), self.degree, frozenset(swap[a] for a in self.axes), None, self.axis_value
        )


def _random_pairs(rng: np.random.Generator, n: int, d: int, clearance: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian frequency pairs kept at least ``clearance`` away from all axes."""
    xi = rng.standard_normal((n, d))
    eta = rng.standard_normal((n, d))
    ok = (_norm(xi) > clearance) & (_norm(eta) > clearance) & (_norm(xi - eta) > clearance)
    return xi[ok], eta[ok]


_I = LinearMultiplier.identity()


def _riesz(j: int) -> LinearMultiplier:
    return LinearMultiplier.riesz(j)


def null_form_symbol(kind: str, eps1: int = 1, eps2: int = 1, i: int | None = None, j: int | None = None, d: int = 3) -> BilinearSymbol:
    """Classical null-form symbols with their exact Riesz factorisations.

    ``kind``: ``"Q0"``, ``"Q0i"`` (index ``i``) or ``"Qij"`` (``i < j``).
    Indices are 1-based, as in the names ``Q_01``, ``Q_12``.  With
    ``R_a = i k_a/|k|`` and unit vectors taken as 0 at the origin:

    * ``m_0 = 2(1 - e1 e2 eta^.zeta^) = |grad_eta phi|^2``,
      ``T = 2 fg + 2 e1 e2 sum_a R_a f R_a g``;
    * ``m_0i = d phi/d eta_i = e1 eta^_i - e2 zeta^_i``,
      ``T = -i e1 (R_i f) g + i e2 f (R_i g)``;
    * ``m_ij = 2(eta_i xi_j - eta_j xi_i)/(|eta||xi - eta|)``,
      ``T = -2 (R_i f R_j g - R_j f R_i g)``;

    where ``zeta = xi - eta`` is the frequency of ``g``.
    """
    if eps1 not in (-1, 1) or eps2 not in (-1, 1):
        raise ValueError("signs must be +1 or -1")
    key = kind.replace("_", "").upper()
    axes = frozenset({"eta", "xi-eta"})
    spec = {"kind": kind, "signs": [eps1, eps2], "d": d}
    if key == "Q0":
        e = eps1 * eps2

        def ev(xi, eta):
            return 2.0 * (1.0 - e * _dot(safe_unit(eta), safe_unit(xi - eta)))

        terms = [Term(2.0, _I, _I, _I)] + [Term(2.0 * e, _I, _riesz(a), _riesz(a)) for a in range(d)]
        name = f"Q0{_sign_label(eps1, eps2)}"
    elif key == "Q0I":
        if i is None or not 1 <= i <= d:
            raise ValueError(f"Q0i needs 1 <= i <= {d}, got i={i}")
        a = i - 1

        def ev(xi, eta):
            return eps1 * safe_unit(eta)[..., a] - eps2 * safe_unit(xi - eta)[..., a]

        terms = [Term(-1j * eps1, _I, _riesz(a), _I), Term(1j * eps2, _I, _I, _riesz(a))]
        name = f"Q0{i}{_sign_label(eps1, eps2)}"
        spec["i"] = i
    elif key == "QIJ":
        if i is None or j is None or not 1 <= i < j <= d:
            raise ValueError(f"Qij needs 1 <= i < j <= {d}, got i={i}, j={j}")
        a, b = i - 1, j - 1

        def ev(xi, eta):
            u, w = safe_unit(eta), safe_unit(xi - eta)
            return 2.0 * (u[..., a] * w[..., b] - u[..., b] * w[..., a])

        terms = [Term(-2.0, _I, _riesz(a), _riesz(b)), Term(2.0, _I, _riesz(b), _riesz(a))]
        name = f"Q{i}{j}{_sign_label(eps1, eps2)}"
        spec.update(i=i, j=j)
    else:
        raise ValueError(f"unknown null form {kind!r}; expected Q0, Q0i or Qij")
    return BilinearSymbol(name, ev, 0.0, axes, SeparableForm(tuple(terms)), 0.0, spec)


def _sign_label(e1: int, e2: int) -> str:
    return "".join("+" if e > 0 else "-" for e in (e1, e2))


def constant_symbol(c: complex = 1.0, d: int = 3) -> BilinearSymbol:
    """``m = c``, the plain product ``c f g``."""
    c = complex(c)
    return BilinearSymbol(
        "one" if c == 1 else f"const({c})",
        lambda xi, eta: np.full(np.broadcast_shapes(xi.shape[:-1], eta.shape[:-1]), c),
        0.0,
        frozenset(),
        SeparableForm((Term(c, _I, _I, _I),)),
        c,
        {"kind": "const", "value": [c.real, c.imag], "d": d},
    )


def phase_over_eta(phi: Phase) -> BilinearSymbol:
    """``q = phi / |eta|``: non-resonant with ``a = 1/|eta|``, ``b = 0``."""
    return BilinearSymbol(
        f"phi{phi.signs}/|eta|",
        lambda xi, eta: phi.value(xi, eta) / _norm(eta),
        0.0,
        frozenset({"eta"}),
        spec={"kind": "phase_over_eta", **phi.to_json()},
    )


def inverse_norm_symbol(axis: str) -> BilinearSymbol:
    """``1/|xi|``, ``1/|eta|`` or ``1/|xi - eta|`` (degree -1)."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    pick = {"xi": lambda xi, eta: xi, "eta": lambda xi, eta: eta, "xi-eta": lambda xi, eta: xi - eta}[axis]
    inv = LinearMultiplier("lambda", {"s": -1.0})
    slots = {"xi": (inv, _I, _I), "eta": (_I, inv, _I), "xi-eta": (_I, _I, inv)}[axis]
    return BilinearSymbol(
        f"1/|{axis}|",
        lambda xi, eta: 1.0 / _norm(pick(xi, eta)),
        -1.0,
        frozenset({axis}),
        SeparableForm((Term(1.0, *slots),)),
        spec={"kind": "inverse", "axis": axis},
    )


def coifman_meyer_test_symbol() -> BilinearSymbol:
    """Smooth test symbol ``exp(-|xi - eta|^2 / (1 + |xi|^2 + |eta|^2))``.

    Bounded with all derivatives and smooth everywhere; it is not
    homogeneous, which is why its degree is ``None``.
    """

    def ev(xi, eta):
        return np.exp(-np.sum((xi - eta) ** 2, axis=-1) / (1.0 + np.sum(xi**2, axis=-1) + np.sum(eta**2, axis=-1)))

    return BilinearSymbol("smooth", ev, None, frozenset(), None, 1.0, {"kind": "smooth"})


# ---------------------------------------------------------------------------
# Expression mini-language

_FUNCS = {"sqrt": np.sqrt, "exp": np.exp, "log": np.log, "abs": np.abs, "sin": np.sin, "cos": np.cos, "tanh": np.tanh}
_ALLOWED = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load, ast.Call,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd,
)


def _expression_names(d: int) -> set[str]:
    names = {"abs_xi", "abs_eta", "abs_xi_eta", "xi_dot_eta", "pi"}
    names |= {f"xi{a}" for a in range(1, d + 1)} | {f"eta{a}" for a in range(1, d + 1)}
    return names


def parse_expression(expr: str, d: int = 3):
    """Compile ``expr`` into ``f(xi, eta)``.

    Variables: ``abs_xi``, ``abs_eta``, ``abs_xi_eta`` (``|xi - eta|``),
    ``xi_dot_eta``, components ``xi1..xid``, ``eta1..etad``, and ``pi``;
    functions: sqrt, exp, log, abs, sin, cos, tanh; operators ``+ - * / **``;
    complex literals such as ``1j``.
    """
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {expr!r}: {exc.msg}") from None
    names = _expression_names(d)
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ValueError(f"expression {expr!r}: {type(node).__name__} not allowed")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ValueError(f"expression {expr!r}: unknown function")
        if isinstance(node, ast.Name) and node.id not in names and node.id not in _FUNCS:
            raise ValueError(f"expression {expr!r}: unknown variable {node.id!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float, complex)):
            raise ValueError(f"expression {expr!r}: only numeric literals allowed")
    code = compile(tree, "<symbol>", "eval")

    def ev(xi, eta):
        env = dict(_FUNCS)
        env.update(
            abs_xi=_norm(xi), abs_eta=_norm(eta), abs_xi_eta=_norm(xi - eta), xi_dot_eta=_dot(xi, eta), pi=np.pi
        )
        for a in range(d):
            env[f"xi{a + 1}"] = xi[..., a]
            env[f"eta{a + 1}"] = eta[..., a]
        return eval(code, {"__builtins__": {}}, env)

    return ev


def expression_symbol(expr: str, degree: float | None = None, d: int = 3, axes=None) -> BilinearSymbol:
    """Symbol from an arithmetic expression; see :func:`parse_expression`.

    Without an explicit ``degree`` the homogeneity degree is estimated from
    ``m(2 xi, 2 eta) / m(xi, eta)`` at random points and kept only if it is
    consistent to 1e-9.
    """
    ev = parse_expression(expr, d)
    if axes is None:
        axes = frozenset(AXES)
    sym = BilinearSymbol(expr, ev, None, frozenset(axes), spec={"kind": "expr", "expr": expr, "d": d})
    if degree is None:
        xi, eta = _random_pairs(np.random.default_rng(0), 64, d)
        with np.errstate(all="ignore"):
            ratio = np.abs(sym(2 * xi, 2 * eta)) / np.abs(sym(xi, eta))
            est = np.log2(ratio[np.isfinite(ratio) & (ratio > 0)])
        if est.size and np.ptp(est) < 1e-9:
            degree = float(np.round(np.median(est), 9))
    if degree is not None:
        sym = BilinearSymbol(sym.name, ev, float(degree), sym.axes, spec={**sym.spec, "degree": float(degree)})
    return sym


def symbol_from_json(spec: dict, d: int = 3) -> BilinearSymbol:
    """Build a symbol from ``{kind: "Q0"|"Q0i"|"Qij"|"expr"|"const"|"smooth"|"phase_over_eta"|"inverse", ...}``."""
    kind = spec.get("kind")
    signs = spec.get("signs", [1, 1])
    d = int(spec.get("d", d))
    if kind in ("Q0", "Q0i", "Qij"):
        return null_form_symbol(kind, int(signs[0]), int(signs[1]), spec.get("i"), spec.get("j"), d)
    if kind == "expr":
        return expression_symbol(spec["expr"], spec.get("degree"), d)
    if kind == "const":
        v = spec.get("value", 1.0)
        return constant_symbol(complex(*v) if isinstance(v, (list, tuple)) else complex(v), d)
    if kind == "smooth":
        return coifman_meyer_test_symbol()
    if kind == "phase_over_eta":
        return phase_over_eta(Phase.from_json(spec))
    if kind == "inverse":
        return inverse_norm_symbol(spec["axis"])
    raise ValueError(f"unknown symbol kind {kind!r}")
