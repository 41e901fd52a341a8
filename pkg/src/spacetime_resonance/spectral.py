"""Periodic grids, Fourier transforms and linear multipliers.

Free space is modelled by a large periodic box ``[-L/2, L/2)^d``.  Fields
live on an ``N^d`` lattice and are stored either as physical samples or as
discrete Fourier coefficients.

Conventions
-----------
* Forward transform carries the ``1/N^d`` factor::

      f_hat[k] = N^-d * sum_j f(x_j) exp(-i k . (x_j + L/2))

  so the inverse transform is a plain sum of modes and a plane wave
  ``exp(i k.x)`` has a single coefficient of modulus one.
* Frequencies are ``(2 pi / L) * n`` with ``n`` in ``{-N/2, ..., N/2-1}``,
  stored in FFT order (``numpy.fft.fftfreq``).
* Physical coordinates are box centred, ``x_j = (j - N/2) * L / N``.
* Quadrature: ``||f||_2^2 = sum |f(x_j)|^2 dx^d = L^d sum |f_hat|^2``.

Decay measurements on the box are only meaningful before the wrap-around
horizon ``t < L/4``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Literal

import numpy as np
import scipy.fft as sfft

Representation = Literal["physical", "frequency"]
Role = Literal["solution", "profile"]

_WORKERS: int | None = None


def set_workers(n: int | None) -> None:
    """Cap the number of threads used by the FFT backend (``None`` = default)."""
    global _WORKERS
    _WORKERS = n


def fftn(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, workers=_WORKERS) / a.size


def ifftn(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, workers=_WORKERS) * a.size


@dataclass(frozen=True)
class Grid:
    """Periodic lattice of ``N^d`` points on a torus of period ``L``."""

    d: int
    N: int
    L: float

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if self.N < 8 or self.N & (self.N - 1):
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"box length must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def dk(self) -> float:
        return 2 * np.pi / self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def horizon(self) -> float:
        """Latest time at which free-space decay can be measured on this box."""
        return self.L / 4

    @cached_property
    def mode_indices(self) -> np.ndarray:
        """Integer lattice indices ``n``, shape ``(d, N, ..., N)``, FFT order."""
        n = np.fft.fftfreq(self.N, 1.0 / self.N).astype(int)
        return np.stack(np.meshgrid(*([n] * self.d), indexing="ij"))

    @cached_property
    def k(self) -> np.ndarray:
        """Wave vectors, shape ``(d, N, ..., N)``."""
        return self.mode_indices * self.dk

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(np.sum(self.k**2, axis=0))

    @property
    def axis_frequencies(self) -> np.ndarray:
        """Sorted one-dimensional frequency lattice."""
        return np.arange(-self.N // 2, self.N // 2) * self.dk

    @property
    def kmax(self) -> float:
        return float(self.kabs.max())

    @cached_property
    def x(self) -> np.ndarray:
        """Box-centred physical coordinates, shape ``(d, N, ..., N)``."""
        x1 = (np.arange(self.N) - self.N // 2) * self.dx
        return np.stack(np.meshgrid(*([x1] * self.d), indexing="ij"))

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Modes kept by the 2/3 rule: ``|n_i| <= N // 3`` on every axis."""
        return np.all(np.abs(self.mode_indices) <= self.N // 3, axis=0)

    def to_json(self) -> dict:
        return {"d": self.d, "N": self.N, "L": self.L}


def make_grid(d: int, N: int, L: float) -> Grid:
    return Grid(int(d), int(N), float(L))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex lattice data tagged with representation and role.

    ``role`` distinguishes a solution ``u`` from its profile
    ``f = exp(-i t Lambda) u``; operations that only make sense for
    profiles check it.
    """

    grid: Grid
    values: np.ndarray
    representation: Representation = "frequency"
    role: Role = "solution"

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if self.representation not in ("physical", "frequency"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.role not in ("solution", "profile"):
            raise ValueError(f"unknown role {self.role!r}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @classmethod
    def from_physical(cls, grid: Grid, values, role: Role = "solution") -> "SpectralField":
        return cls(grid, np.asarray(values, dtype=complex), "physical", role)

    @classmethod
    def zeros(cls, grid: Grid, role: Role = "solution") -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, complex), "frequency", role)

    def with_values(self, values: np.ndarray, **changes) -> "SpectralField":
        return replace(self, values=values, **changes)

    def to_frequency(self) -> "SpectralField":
        if self.representation == "frequency":
            return self
        return replace(self, values=fftn(self.values), representation="frequency")

    def to_physical(self) -> "SpectralField":
        if self.representation == "physical":
            return self
        return replace(self, values=ifftn(self.values), representation="physical")

    def as_role(self, role: Role) -> "SpectralField":
        return replace(self, role=role)

    def conj(self) -> "SpectralField":
        """Complex conjugate of the physical field, in the same representation."""
        if self.representation == "physical":
            return replace(self, values=np.conj(self.values))
        # conj(u)^(k) = conj(u^(-k))
        flipped = np.conj(self.values)
        for ax in range(self.grid.d):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        return replace(self, values=flipped)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_compatible(self, other)
        return replace(self, values=self.values + other.values)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_compatible(self, other)
        return replace(self, values=self.values - other.values)

    def __mul__(self, c: complex) -> "SpectralField":
        return replace(self, values=self.values * c)

    __rmul__ = __mul__


def _check_compatible(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")
    if a.representation != b.representation:
        raise ValueError("representation mismatch")


def _require_frequency(f: SpectralField, op: str) -> None:
    if f.representation != "frequency":
        raise ValueError(f"{op} needs a field in frequency representation")


# ---------------------------------------------------------------------------
# Linear multipliers


def _probe_zero(sigma: Callable) -> complex:
    with np.errstate(all="ignore"):
        try:
            v = complex(np.asarray(sigma(np.zeros(1)))[0])
        except (ZeroDivisionError, ValueError, FloatingPointError):
            return 0.0
    return v if np.isfinite(v) else 0.0


def radial_symbol(grid: Grid, sigma: Callable, zero_mode: complex | None = None) -> np.ndarray:
    """Tabulate ``sigma(|k|)`` on the lattice, with ``zero_mode`` at ``k = 0``."""
    kabs = grid.kabs
    nz = kabs > 0
    with np.errstate(all="ignore"):
        vals = np.asarray(sigma(kabs[nz]), dtype=complex)
    bad = ~np.isfinite(vals)
    if bad.any():
        r = float(kabs[nz][bad].min())
        raise ValueError(f"multiplier is not finite at lattice radius {r:.6g}")
    out = np.empty(grid.shape, complex)
    out[nz] = vals
    out[~nz] = _probe_zero(sigma) if zero_mode is None else zero_mode
    return out


def apply_radial_multiplier(
    f: SpectralField, sigma: Callable, zero_mode: complex | None = None
) -> SpectralField:
    """Multiply each coefficient by ``sigma(|k|)``.

    ``zero_mode`` replaces the value at ``k = 0``; by default it is ``sigma(0)``
    when that is finite and 0 otherwise (homogeneous multipliers such as
    ``1/|k|``).
    """
    _require_frequency(f, "apply_radial_multiplier")
    return f.with_values(f.values * radial_symbol(f.grid, sigma, zero_mode))


def riesz_symbol(grid: Grid, j: int) -> np.ndarray:
    """``i k_j / |k|`` with the mean mode set to zero."""
    if not 0 <= j < grid.d:
        raise ValueError(f"Riesz axis {j} outside 0..{grid.d - 1}")
    kabs = grid.kabs
    out = np.zeros(grid.shape, complex)
    nz = kabs > 0
    out[nz] = 1j * grid.k[j][nz] / kabs[nz]
    return out


def riesz_transform(f: SpectralField, j: int) -> SpectralField:
    """Riesz transform along axis ``j`` (0-based)."""
    _require_frequency(f, "riesz_transform")
    return f.with_values(f.values * riesz_symbol(f.grid, j))


def propagate(f: SpectralField, t: float, speed: float = 1.0) -> SpectralField:
    """Free half-wave evolution ``exp(i t c Lambda)``."""
    _require_frequency(f, "propagate")
    return f.with_values(f.values * np.exp(1j * t * speed * f.grid.kabs))


def japanese(grid: Grid, s: float) -> np.ndarray:
    return (1.0 + grid.kabs**2) ** (s / 2)


def lambda_power(grid: Grid, s: float) -> np.ndarray:
    """``|k|^s`` with the mean mode set to zero for ``s <= 0``."""
    kabs = grid.kabs
    if s > 0:
        return kabs**s
    out = np.zeros(grid.shape)
    nz = kabs > 0
    out[nz] = kabs[nz] ** s
    if s == 0:
        out[~nz] = 1.0
    return out


# ---------------------------------------------------------------------------
# Norms


def _lp(values: np.ndarray, grid: Grid, p: float) -> float:
    if p == np.inf:
        return float(np.max(np.abs(values))) if values.size else 0.0
    return float((np.sum(np.abs(values) ** p) * grid.cell_volume) ** (1.0 / p))


def lebesgue_norm(f: SpectralField, p: float = 2) -> float:
    """Quadrature ``L^p`` norm over the box."""
    if not p >= 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    return _lp(f.to_physical().values, f.grid, p)


def l2_norm_frequency(f: SpectralField) -> float:
    """``L^2`` norm computed from the coefficients (Plancherel)."""
    c = f.to_frequency().values
    return float(np.sqrt(np.sum(np.abs(c) ** 2) * f.grid.L**f.grid.d))


def sobolev_norm(f: SpectralField, s: float, p: float = 2, homogeneous: bool = False) -> float:
    """``||<D>^s f||_p`` or, with ``homogeneous=True``, ``||Lambda^s f||_p``."""
    if not p >= 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    fh = f.to_frequency()
    mult = lambda_power(f.grid, s) if homogeneous else japanese(f.grid, s)
    if p == 2:
        return float(np.sqrt(np.sum(np.abs(fh.values * mult) ** 2) * f.grid.L**f.grid.d))
    return _lp(ifftn(fh.values * mult), f.grid, p)


def _moment(fhat: np.ndarray, grid: Grid, k: int, m_before: float, m_after: float, s: float) -> float:
    """``|| Lambda^m_after (|x|^k Lambda^m_before f) ||_{H^s}``.

    ``k = 1`` uses the vector weight ``x`` (components added in quadrature),
    ``k = 2`` the scalar weight ``|x|^2``.
    """
    g = ifftn(fhat * lambda_power(grid, m_before)) if m_before else ifftn(fhat)
    if k == 0:
        weighted = [g]
    elif k == 1:
        weighted = [grid.x[i] * g for i in range(grid.d)]
    elif k == 2:
        weighted = [np.sum(grid.x**2, axis=0) * g]
    else:
        raise ValueError(f"weight power k={k} not supported (k <= 2)")
    mult = japanese(grid, s)
    if m_after:
        mult = mult * lambda_power(grid, m_after)
    total = sum(np.sum(np.abs(fftn(w) * mult) ** 2) for w in weighted)
    return float(np.sqrt(total * grid.L**grid.d))


def weight_moment(f_profile: SpectralField, k: int, m: int = 0, s: int = 0) -> float:
    """``|| |x|^k Lambda^m f ||_{H^s}`` for a profile, via physical weights."""
    if f_profile.role != "profile":
        raise ValueError("weight_moment expects a profile-role field")
    _require_frequency(f_profile, "weight_moment")
    if k not in (1, 2):
        raise ValueError(f"weight power must be 1 or 2, got {k}")
    if m < 0 or s < 0:
        raise ValueError("m and s must be non-negative")
    return _moment(f_profile.values, f_profile.grid, k, m, 0, s)


def first_moment_frequency_route(f: SpectralField) -> float:
    """``||x f||_2`` from centred differences of the coefficients in ``k``.

    Cross-check for :func:`weight_moment`; accurate to ``O(dk^2)`` for
    fields whose transform is smooth and decays inside the lattice.
    """
    grid = f.grid
    fh = f.to_frequency().values
    # undo the box-corner phase so that coefficients match the transform about x = 0
    centred = fh * np.exp(1j * np.sum(grid.k, axis=0) * grid.L / 2)
    total = 0.0
    for ax in range(grid.d):
        deriv = (np.roll(centred, -1, axis=ax) - np.roll(centred, 1, axis=ax)) / (2 * grid.dk)
        total += np.sum(np.abs(deriv) ** 2)
    # x f <-> i grad_k f_hat
    return float(np.sqrt(total * grid.L**grid.d))


# ---------------------------------------------------------------------------
# Products


def dealias(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.where(grid.dealias_mask, values, 0)


def dealiased_product(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    """Coefficients of the product of two fields, 2/3-rule dealiased.

    Inputs and output are frequency coefficients; modes with
    ``|n_i| > N // 3`` are removed before and after the pointwise product,
    which leaves the retained output modes free of aliasing.
    """
    pa = ifftn(dealias(a, grid))
    pb = ifftn(dealias(b, grid))
    return dealias(fftn(pa * pb), grid)


# ---------------------------------------------------------------------------
# Sample fields


def plane_wave(grid: Grid, n, amplitude: complex = 1.0, role: Role = "solution") -> SpectralField:
    """Single mode ``amplitude * exp(i k.(x + L/2))``, ``k = dk * n``.

    The constant phase ``exp(i k.L/2) = (-1)^(n_1+...+n_d)`` comes from the
    box-corner origin of the transform.
    """
    n = np.asarray(n, dtype=int)
    idx = tuple(int(v) % grid.N for v in n)
    vals = np.zeros(grid.shape, complex)
    vals[idx] = amplitude
    return SpectralField(grid, vals, "frequency", role)


def gaussian(grid: Grid, width: float = 1.0, center=None, wavevector=None, role: Role = "solution") -> SpectralField:
    """``exp(-|x - c|^2 / (2 width^2)) * exp(i k.x)`` sampled on the lattice."""
    x = grid.x
    c = np.zeros(grid.d) if center is None else np.asarray(center, float)
    r2 = sum((x[i] - c[i]) ** 2 for i in range(grid.d))
    vals = np.exp(-r2 / (2 * width**2)).astype(complex)
    if wavevector is not None:
        kv = np.asarray(wavevector, float)
        vals = vals * np.exp(1j * sum(kv[i] * x[i] for i in range(grid.d)))
    return SpectralField.from_physical(grid, vals, role).to_frequency()


def random_bandlimited(
    grid: Grid, rng: np.random.Generator, band: int | None = None, role: Role = "solution", real: bool = False
) -> SpectralField:
    """Random complex Gaussian coefficients on ``|n_i| <= band``.

    The default band ``N // 6`` keeps products of two such fields inside the
    2/3-rule band, so direct and dealiased evaluations coincide.
    """
    band = grid.N // 6 if band is None else band
    mask = np.all(np.abs(grid.mode_indices) <= band, axis=0)
    vals = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * mask
    f = SpectralField(grid, vals, "frequency", role)
    if real:
        p = f.to_physical()
        f = p.with_values(p.values.real.astype(complex)).to_frequency()
    return f


# ---------------------------------------------------------------------------
# Snapshots


def save_snapshot(path, f: SpectralField, time: float | None = None, dtype=np.complex128) -> tuple[Path, Path]:
    """Write ``<path>.bin`` (little-endian raw complex, row-major) and ``<path>.json``."""
    path = Path(path)
    dt = np.dtype(dtype).newbyteorder("<")
    raw = path.with_suffix(".bin")
    meta = path.with_suffix(".json")
    np.ascontiguousarray(f.values, dtype=dt).tofile(raw)
    header = {
        **f.grid.to_json(),
        "representation": f.representation,
        "role": f.role,
        "time": time,
        "dtype": np.dtype(dtype).name,
        "order": "fft" if f.representation == "frequency" else "box-centred",
    }
    meta.write_text(json.dumps(header, indent=1))
    return raw, meta


def load_snapshot(path) -> tuple[SpectralField, dict]:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    grid = make_grid(header["d"], header["N"], header["L"])
    dt = np.dtype(header.get("dtype", "complex128")).newbyteorder("<")
    vals = np.fromfile(path.with_suffix(".bin"), dtype=dt).reshape(grid.shape).astype(complex)
    return SpectralField(grid, vals, header["representation"], header["role"]), header
