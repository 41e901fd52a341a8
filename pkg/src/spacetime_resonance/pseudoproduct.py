"""Bilinear pseudo-product operators ``T_m(f, g)``.

On the lattice::

    T_hat(xi) = sum_eta m(xi, eta) f_hat(eta) g_hat(xi - eta)

with ``xi - eta`` wrapped on the torus.  With the transform normalisation of
:mod:`spectral` (forward transform carries ``N^-d``) this sum is exactly the
coefficient sequence of the pointwise product when ``m = 1``; the quadrature
weight of the continuous convolution is absorbed by the normalisation.

Two routes are provided: :func:`apply_direct`, an ``O(N^2d)`` reference
quadrature, and :func:`apply_separable`, which evaluates a
:class:`SeparableForm` with one dealiased pointwise product per term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import spectral
from .multipliers import LinearMultiplier, SeparableForm, Term, lp_bump, lp_cutoff, lp_range
from .phase import BilinearSymbol
from .spectral import Grid, SpectralField

__all__ = [
    "LinearMultiplier",
    "SeparableForm",
    "Term",
    "apply_direct",
    "apply_separable",
    "separable_approximation",
    "paraproduct_split",
    "littlewood_paley_projection",
    "low_frequency_projection",
    "bilinear_bound_probe",
    "ProbeStats",
    "BudgetExceededError",
]

DIRECT_BUDGET = 24**6


class BudgetExceededError(RuntimeError):
    pass


def _check_pair(f: SpectralField, g: SpectralField) -> None:
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
    for h in (f, g):
        if h.representation != "frequency":
            raise ValueError("pseudo-products take fields in frequency representation")


def symbol_on_lattice(m: BilinearSymbol, grid: Grid, n_eta) -> np.ndarray:
    """``m(xi, eta)`` for every lattice ``xi`` at the lattice point ``eta = dk * n_eta``."""
    xi = np.moveaxis(grid.k, 0, -1)
    eta = np.asarray(n_eta, float) * grid.dk
    return m(xi, np.broadcast_to(eta, xi.shape))


def apply_direct(m: BilinearSymbol, f: SpectralField, g: SpectralField, force: bool = False) -> SpectralField:
    """Reference quadrature of ``T_m(f, g)``; cost ``O(N^2d)``.

    Raises :class:`BudgetExceededError` above ``N^2d = 24^6`` unless
    ``force``.  Points on the symbol's singular axes take its ``axis_value``.
    """
    _check_pair(f, g)
    grid = f.grid
    if grid.N ** (2 * grid.d) > DIRECT_BUDGET and not force:
        raise BudgetExceededError(f"direct evaluation on N={grid.N}, d={grid.d} exceeds the budget; pass force=True")
    fh, gh = f.values, g.values
    out = np.zeros(grid.shape, complex)
    n_all = grid.mode_indices
    axes = tuple(range(grid.d))
    for idx in zip(*np.nonzero(fh)):
        n_eta = n_all[(slice(None),) + idx]
        shifted = np.roll(gh, shift=tuple(int(v) for v in n_eta), axis=axes)
        out += symbol_on_lattice(m, grid, n_eta) * fh[idx] * shifted
    return SpectralField(grid, out, "frequency", f.role)


def apply_separable(form: SeparableForm, f: SpectralField, g: SpectralField) -> SpectralField:
    """``sum_k c_k M_out(M_f f * M_g g)`` with 2/3-rule dealiasing on every product."""
    if not form.terms:
        raise ValueError("empty separable form")
    _check_pair(f, g)
    grid = f.grid
    mask = grid.dealias_mask
    cache: dict[int, np.ndarray] = {}

    def physical(mult: LinearMultiplier, vals: np.ndarray, key) -> np.ndarray:
        ck = (id(mult), key)
        if ck not in cache:
            cache[ck] = spectral.ifftn(np.where(mask, mult.on_grid(grid) * vals, 0))
        return cache[ck]

    out = np.zeros(grid.shape, complex)
    by_out: dict[int, tuple[LinearMultiplier, np.ndarray]] = {}
    for t in form.terms:
        prod = t.coef * physical(t.f, f.values, "f") * physical(t.g, g.values, "g")
        slot = by_out.setdefault(id(t.out), (t.out, np.zeros(grid.shape, complex)))
        slot[1][...] += prod
    for mult, acc in by_out.values():
        out += mult.on_grid(grid) * spectral.fftn(acc)
    return SpectralField(grid, np.where(mask, out, 0), "frequency", f.role)


# ---------------------------------------------------------------------------
# Littlewood-Paley


def littlewood_paley_projection(f: SpectralField, j: int) -> SpectralField:
    """``P_j f``: radial bump supported in ``2^(j-1) <= |k| <= 2^(j+1)``.

    The bumps for ``j`` in :func:`multipliers.lp_range` sum to one off the
    mean mode.
    """
    if f.representation != "frequency":
        raise ValueError("littlewood_paley_projection needs a frequency-representation field")
    lo, hi = lp_range(f.grid)
    if not lo <= j <= hi:
        raise ValueError(f"dyadic shell j={j} outside the lattice range [{lo}, {hi}]")
    return f.with_values(f.values * lp_bump(f.grid.kabs, j))


def low_frequency_projection(f: SpectralField, j: int) -> SpectralField:
    """``P_{<j} f``: multiplier ``theta(|k| / 2^j)``."""
    if f.representation != "frequency":
        raise ValueError("low_frequency_projection needs a frequency-representation field")
    return f.with_values(f.values * lp_cutoff(f.grid.kabs / 2.0**j))


# ---------------------------------------------------------------------------
# Low-rank separable approximation


def _band(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices and integer modes of the dealiasing band ``|n_i| <= N // 3``."""
    mask = grid.dealias_mask
    flat = np.flatnonzero(mask.ravel())
    modes = np.stack([grid.mode_indices[a].ravel()[flat] for a in range(grid.d)], axis=-1)
    return flat, modes


class _BandMatrix:
    """Lazy matrix ``A[a, b] = w(eta_a, zeta_b) m(eta_a + zeta_b, eta_a)`` over band modes."""

    def __init__(self, m: BilinearSymbol, grid: Grid, weight=None):
        self.m, self.grid, self.weight = m, grid, weight
        self.flat, modes = _band(grid)
        self.k = modes * grid.dk
        self.n = len(self.flat)

    def block(self, rows, cols) -> np.ndarray:
        eta = self.k[rows][:, None, :]
        zeta = self.k[cols][None, :, :]
        eta, zeta = np.broadcast_arrays(eta, zeta)
        vals = self.m(eta + zeta, eta)
        if self.weight is not None:
            vals = vals * self.weight(eta, zeta)
        return vals

    def row(self, a: int) -> np.ndarray:
        return self.block([a], slice(None))[0]

    def col(self, b: int) -> np.ndarray:
        return self.block(slice(None), [b])[:, 0]

    def full(self) -> np.ndarray:
        return self.block(slice(None), slice(None))


def _aca(A: _BandMatrix, rank: int, tol: float = 1e-13) -> tuple[np.ndarray, np.ndarray]:
    """Adaptive cross approximation with partial pivoting: ``A ~ U @ V``."""
    n = A.n
    us, vs = [], []
    used_rows = {0}
    i = 0
    norm2 = 0.0
    for _ in range(min(rank, n)):
        r = A.row(i)
        for u, v in zip(us, vs):
            r = r - u[i] * v
        j = int(np.argmax(np.abs(r)))
        piv = r[j]
        if abs(piv) == 0:
            break
        v = r / piv
        c = A.col(j)
        for u, w in zip(us, vs):
            c = c - w[j] * u
        us.append(c)
        vs.append(v)
        step = np.linalg.norm(c) * np.linalg.norm(v)
        norm2 += step**2
        if step <= tol * math.sqrt(norm2):
            break
        cand = np.abs(c)
        cand[list(used_rows)] = -1
        i = int(np.argmax(cand))
        used_rows.add(i)
    if not us:
        return np.zeros((n, 0), complex), np.zeros((0, n), complex)
    return np.stack(us, axis=1), np.stack(vs, axis=0)


def _recompress(U: np.ndarray, V: np.ndarray, rank: int) -> tuple[np.ndarray, np.ndarray]:
    qu, ru = np.linalg.qr(U)
    qv, rv = np.linalg.qr(V.T)
    w, s, zh = np.linalg.svd(ru @ rv.T)
    k = min(rank, len(s))
    return (qu @ w[:, :k]) * s[:k], (qv @ zh.conj().T[:, :k]).T


def _low_rank(A: _BandMatrix, rank: int, svd_limit: int):
    """Rank-``rank`` factors ``U, V`` of ``A`` and the dense matrix when it was formed."""
    if A.n <= svd_limit:
        dense = A.full()
        w, s, vh = scipy.linalg.svd(dense, full_matrices=False)
        k = min(rank, len(s))
        return w[:, :k] * s[:k], vh[:k], dense
    U, V = _aca(A, 2 * rank + 8)
    return (*_recompress(U, V, rank), None)


def _sup_error(A: _BandMatrix, U: np.ndarray, V: np.ndarray, rng: np.random.Generator, samples: int, dense=None) -> float:
    """Sup of ``|A - U V|`` over the band: exact when ``dense`` is given, else over random entries."""
    if dense is not None:
        return float(np.abs(dense - U @ V).max())
    rows = rng.integers(0, A.n, samples)
    cols = rng.integers(0, A.n, samples)
    eta, zeta = A.k[rows], A.k[cols]
    exact = A.m(eta + zeta, eta)
    if A.weight is not None:
        exact = exact * A.weight(eta, zeta)
    approx = np.einsum("ik,ki->i", U[rows], V[:, cols])
    return float(np.abs(exact - approx).max())


def _form_from_factors(grid: Grid, flat: np.ndarray, U: np.ndarray, V: np.ndarray, regime: str, error: float) -> SeparableForm:
    terms = []
    size = int(np.prod(grid.shape))
    for k in range(U.shape[1]):
        a = np.zeros(size, complex)
        b = np.zeros(size, complex)
        a[flat] = U[:, k]
        b[flat] = V[k]
        terms.append(
            Term(1.0, LinearMultiplier.identity(), LinearMultiplier.tabulated(a.reshape(grid.shape)), LinearMultiplier.tabulated(b.reshape(grid.shape)))
        )
    return SeparableForm(tuple(terms), regime, error)


def _regime_weights(grid: Grid, offset: int = 3):
    """Littlewood-Paley weights ``w(eta, zeta)`` of the low-high, high-low and high-high regimes.

    Low-high: ``sum_j theta(|eta| / 2^(j - offset)) psi_j(|zeta|)``; high-low
    swaps the roles; high-high is the remainder.
    """
    lo, hi = lp_range(grid)
    js = range(lo, hi + 1)

    def low_high(eta, zeta):
        re = np.sqrt(np.sum(eta**2, axis=-1))
        rz = np.sqrt(np.sum(zeta**2, axis=-1))
        return sum(lp_cutoff(re / 2.0 ** (j - offset)) * lp_bump(rz, j) for j in js)

    def high_low(eta, zeta):
        return low_high(zeta, eta)

    def high_high(eta, zeta):
        return 1.0 - low_high(eta, zeta) - high_low(eta, zeta)

    return {"low-high": low_high, "high-low": high_low, "high-high": high_high}


def paraproduct_split(
    m: BilinearSymbol, grid: Grid, rank: int, offset: int = 3, seed: int = 0, samples: int = 20000, svd_limit: int = 2000
) -> dict[str, SeparableForm]:
    """Rank-``rank`` compressions of ``m`` restricted to each paraproduct regime."""
    rng = np.random.default_rng(seed)
    forms = {}
    for regime, w in _regime_weights(grid, offset).items():
        A = _BandMatrix(m, grid, w)
        if rank > A.n:
            raise ValueError(f"rank {rank} exceeds the {A.n} sampled band modes")
        U, V, dense = _low_rank(A, rank, svd_limit)
        forms[regime] = _form_from_factors(grid, A.flat, U, V, regime, _sup_error(A, U, V, rng, samples, dense))
    return forms


def separable_approximation(
    m: BilinearSymbol,
    rank: int,
    grid: Grid,
    paraproduct: bool = False,
    seed: int = 0,
    samples: int = 20000,
    svd_limit: int = 2000,
) -> SeparableForm:
    """Rank-``rank`` separable form of ``m`` on ``grid``.

    Exact factorisations attached to ``m`` are returned unchanged when they
    have at most ``rank`` terms.  Otherwise the matrix
    ``A[eta, zeta] = m(eta + zeta, eta)`` over the dealiasing band is
    compressed (truncated SVD for small bands, cross approximation for
    large ones) into tabulated multipliers.  With ``paraproduct`` each
    Littlewood-Paley regime is compressed separately with ``rank`` terms.
    The form's ``error`` is the sup-norm error over the band: exact when the
    band matrix is formed densely, sampled at random entries otherwise.
    """
    if rank < 1:
        raise ValueError("rank must be positive")
    if m.separable is not None and m.separable.rank <= rank:
        return m.separable
    if paraproduct:
        parts = paraproduct_split(m, grid, rank, seed=seed, samples=samples, svd_limit=svd_limit)
        terms = tuple(t for p in parts.values() for t in p.terms)
        return SeparableForm(terms, "compressed", float(sum(p.error for p in parts.values())))
    A = _BandMatrix(m, grid)
    if rank > A.n:
        raise ValueError(f"rank {rank} exceeds the {A.n} sampled band modes")
    U, V, dense = _low_rank(A, rank, svd_limit)
    err = _sup_error(A, U, V, np.random.default_rng(seed), samples, dense)
    return _form_from_factors(grid, A.flat, U, V, "compressed", err)


# ---------------------------------------------------------------------------
# Bilinear bound probe

P_INFINITY = 64.0


@dataclass
class ProbeStats:
    """Ratios ``||T_m(f,g)||_r / (||f||_p ||g||_q)`` per trial and grid size."""

    symbol: str
    p: float
    q: float
    r: float
    rows: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def max_by_N(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for n, _, ratio in self.rows:
            out[n] = max(out.get(n, 0.0), ratio)
        return out

    @property
    def max_ratio(self) -> float:
        return max(r for _, _, r in self.rows)

    @property
    def slope(self) -> float:
        """Least-squares slope of ``log max ratio`` against ``log N``."""
        mx = self.max_by_N
        ns = sorted(mx)
        if len(ns) < 2:
            return 0.0
        return float(np.polyfit(np.log(ns), np.log([mx[n] for n in ns]), 1)[0])

    def to_csv(self) -> str:
        lines = ["N,trial,ratio"] + [f"{n},{t},{r:.17g}" for n, t, r in self.rows]
        return "\n".join(lines) + "\n"


def _finite(p: float) -> float:
    return P_INFINITY if math.isinf(p) else float(p)


def bilinear_bound_probe(
    m: BilinearSymbol,
    p: float = 4,
    q: float = 4,
    r: float = 2,
    trials: int = 100,
    N_list=(8, 16, 32),
    d: int = 3,
    L: float = 16 * math.pi,
    seed: int = 0,
    rank: int = 16,
    smoothing: float = 0.0,
) -> ProbeStats:
    """Empirical operator-norm ratios of ``T_m`` on random band-limited fields.

    ``1/r = 1/p + 1/q - smoothing/d`` must hold (``smoothing`` is the order
    of fractional integration, e.g. 1 for a degree -1 symbol).  Infinite
    exponents are replaced by 64.  Symbols without an exact separable form
    are compressed per grid with :func:`separable_approximation`.
    """
    p, q, r = _finite(p), _finite(q), _finite(r)
    if min(p, q, r) < 1:
        raise ValueError("Lebesgue exponents must be at least 1")
    if abs(1 / r - (1 / p + 1 / q - smoothing / d)) > 1e-12:
        raise ValueError(f"exponents (p, q, r) = ({p}, {q}, {r}) violate 1/r = 1/p + 1/q - {smoothing}/{d}")
    stats = ProbeStats(m.name, p, q, r)
    rng = np.random.default_rng(seed)
    for N in N_list:
        grid = spectral.make_grid(d, N, L)
        form = separable_approximation(m, rank, grid)
        band = max(1, N // 4)
        for trial in range(trials):
            f = spectral.random_bandlimited(grid, rng, band)
            g = spectral.random_bandlimited(grid, rng, band)
            t = apply_separable(form, f, g)
            ratio = spectral.lebesgue_norm(t, r) / (spectral.lebesgue_norm(f, p) * spectral.lebesgue_norm(g, q))
            stats.rows.append((N, trial, float(ratio)))
    return stats
