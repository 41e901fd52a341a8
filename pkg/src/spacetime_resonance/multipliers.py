"""Linear Fourier multipliers and separable forms of bilinear operators.

A :class:`SeparableForm` represents a bilinear operator as a finite sum::

    T(f, g) = sum_k c_k M_out_k( M_f_k f * M_g_k g )

so that its symbol is ``m(xi, eta) = sum_k c_k M_out_k(xi) M_f_k(eta)
M_g_k(xi - eta)``.  Multipliers are described by small JSON-serialisable
descriptors and evaluated either on a grid or at arbitrary frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .spectral import Grid

Regime = Literal["exact", "low-high", "high-low", "high-high", "compressed"]

_KINDS = ("identity", "riesz", "lambda", "lp", "lp_low", "tabulated", "product")


def lp_cutoff(r) -> np.ndarray:
    """``theta(r)``: 1 for ``r <= 1``, 0 for ``r >= 2``, quintic smoothstep in between."""
    s = np.clip(np.asarray(r, float) - 1.0, 0.0, 1.0)
    return 1.0 - s**3 * (10 - 15 * s + 6 * s**2)


def lp_bump(r, j: int) -> np.ndarray:
    """``psi_j(r) = theta(r / 2^j) - theta(r / 2^(j-1))``, supported in ``[2^(j-1), 2^(j+1)]``."""
    r = np.asarray(r, float)
    return lp_cutoff(r / 2.0**j) - lp_cutoff(r / 2.0 ** (j - 1))


def lp_range(grid: Grid) -> tuple[int, int]:
    """Dyadic indices ``(j_min, j_max)`` whose bumps meet the lattice.

    The bumps with ``j_min <= j <= j_max`` sum to one at every nonzero
    lattice frequency.
    """
    rmax = float(np.sqrt(grid.d) * (grid.N // 2) * grid.dk)
    return int(np.floor(np.log2(grid.dk))), int(np.ceil(np.log2(rmax)))


@dataclass(frozen=True, eq=False)
class LinearMultiplier:
    """Descriptor of a Fourier multiplier ``sigma(k)``.

    kinds: ``identity``; ``riesz`` (``axis``, 0-based: ``i k_a/|k|``);
    ``lambda`` (``s``: ``|k|^s``); ``lp`` (``j``: dyadic bump ``psi_j``);
    ``lp_low`` (``j``: ``theta(|k|/2^j)``); ``tabulated`` (``values`` on a
    lattice); ``product`` (``factors``).  Homogeneous kinds vanish at
    ``k = 0`` except ``identity`` and ``lambda`` with ``s = 0``.
    """

    kind: str = "identity"
    params: dict = field(default_factory=dict)
    values: np.ndarray | None = None
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        if self.kind == "tabulated" and self.values is None:
            raise ValueError("tabulated multiplier needs values")

    # -- construction helpers ------------------------------------------------
    @classmethod
    def identity(cls) -> "LinearMultiplier":
        return cls("identity")

    @classmethod
    def riesz(cls, axis: int) -> "LinearMultiplier":
        return cls("riesz", {"axis": int(axis)})

    @classmethod
    def tabulated(cls, values: np.ndarray) -> "LinearMultiplier":
        return cls("tabulated", {}, np.asarray(values, complex))

    @classmethod
    def product(cls, *factors: "LinearMultiplier") -> "LinearMultiplier":
        factors = tuple(f for f in factors if f.kind != "identity")
        if not factors:
            return cls.identity()
        if len(factors) == 1:
            return factors[0]
        return cls("product", {"factors": factors})

    # -- evaluation ----------------------------------------------------------
    def at(self, k: np.ndarray, grid: Grid | None = None) -> np.ndarray:
        """Value at wave vectors ``k`` of shape ``(..., d)``.

        Tabulated multipliers need the grid and ``k`` on its lattice.
        """
        k = np.asarray(k, float)
        r = np.sqrt(np.sum(k**2, axis=-1))
        kind, p = self.kind, self.params
        if kind == "identity":
            return np.ones(r.shape, complex)
        if kind == "riesz":
            return 1j * np.divide(k[..., p["axis"]], r, out=np.zeros_like(r), where=r > 0)
        if kind == "lambda":
            s = p["s"]
            if s == 0:
                return np.ones(r.shape, complex)
            if s > 0:
                return (r**s).astype(complex)
            return np.divide(1.0, r ** (-s), out=np.zeros_like(r), where=r > 0).astype(complex)
        if kind == "lp":
            return lp_bump(r, p["j"]).astype(complex)
        if kind == "lp_low":
            return lp_cutoff(r / 2.0 ** p["j"]).astype(complex)
        if kind == "product":
            out = np.ones(r.shape, complex)
            for fct in p["factors"]:
                out = out * fct.at(k, grid)
            return out
        # tabulated
        if grid is None:
            raise ValueError("tabulated multiplier needs the grid for pointwise evaluation")
        n = np.rint(k / grid.dk).astype(int) % grid.N
        return self.values[tuple(np.moveaxis(n, -1, 0))]

    def on_grid(self, grid: Grid) -> np.ndarray:
        if self.kind == "tabulated":
            if self.values.shape != grid.shape:
                raise ValueError(f"tabulated multiplier has shape {self.values.shape}, grid needs {grid.shape}")
            return self.values
        if self.kind == "identity":
            return np.ones(grid.shape, complex)
        if grid not in self._tables:
            self._tables.clear()
            self._tables[grid] = self.at(np.moveaxis(grid.k, 0, -1), grid)
        return self._tables[grid]

    # -- serialisation -------------------------------------------------------
    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "product":
            out["factors"] = [f.to_json() for f in self.params["factors"]]
        elif self.kind == "tabulated":
            out["shape"] = list(self.values.shape)
            out["re"] = self.values.real.ravel().tolist()
            out["im"] = self.values.imag.ravel().tolist()
        else:
            out.update(self.params)
        return out

    @classmethod
    def from_json(cls, spec: dict) -> "LinearMultiplier":
        kind = spec["kind"]
        if kind == "product":
            return cls("product", {"factors": tuple(cls.from_json(f) for f in spec["factors"])})
        if kind == "tabulated":
            vals = (np.asarray(spec["re"]) + 1j * np.asarray(spec["im"])).reshape(spec["shape"])
            return cls.tabulated(vals)
        return cls(kind, {k: v for k, v in spec.items() if k != "kind"})


@dataclass(frozen=True, eq=False)
class Term:
    coef: complex
    out: LinearMultiplier
    f: LinearMultiplier
    g: LinearMultiplier


@dataclass(frozen=True, eq=False)
class SeparableForm:
    """``T(f, g) = sum_k c_k M_out(M_f f * M_g g)``.

    ``error`` is the sampled sup-norm distance to the symbol the form was
    built from (0 for exact factorisations).
    """

    terms: tuple[Term, ...]
    regime: Regime = "exact"
    error: float = 0.0

    def __post_init__(self):
        if not self.terms:
            raise ValueError("separable form has no terms")

    @property
    def rank(self) -> int:
        return len(self.terms)

    def symbol(self, xi, eta, grid: Grid | None = None) -> np.ndarray:
        """Pointwise symbol ``sum_k c_k M_out(xi) M_f(eta) M_g(xi - eta)``."""
        xi, eta = np.asarray(xi, float), np.asarray(eta, float)
        out = 0
        for t in self.terms:
            out = out + t.coef * t.out.at(xi, grid) * t.f.at(eta, grid) * t.g.at(xi - eta, grid)
        return np.asarray(out, complex)

    def to_json(self) -> dict:
        return {
            "regime": self.regime,
            "error": self.error,
            "terms": [
                {"coef": [complex(t.coef).real, complex(t.coef).imag], "out": t.out.to_json(), "f": t.f.to_json(), "g": t.g.to_json()}
                for t in self.terms
            ],
        }

    @classmethod
    def from_json(cls, spec: dict) -> "SeparableForm":
        terms = tuple(
            Term(
                complex(*t["coef"]),
                LinearMultiplier.from_json(t["out"]),
                LinearMultiplier.from_json(t["f"]),
                LinearMultiplier.from_json(t["g"]),
            )
            for t in spec["terms"]
        )
        return cls(terms, spec.get("regime", "exact"), float(spec.get("error", 0.0)))
