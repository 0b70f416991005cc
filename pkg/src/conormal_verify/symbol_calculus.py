"""Parameter-dependent symbols, their semi-norms, and their quantization.

Only two kinds of symbol are quantized: x-independent multiplier tables, and
finite sums ``sum_theta c_theta exp(i theta.x) Q_theta(xi)`` whose x-dependence
is band-limited.  For both, the conormal quantization is an exact finite
combination of FFT multipliers in sharp space.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .half_space_core import BoundaryField, FullSpaceField, HalfSpaceField, HalfSpaceGrid

DEFAULT_SWEEP = (1, 2, 4, 8, 16, 32, 64)


def weight(xi_sq, s: float, gamma: float):
    return (gamma * gamma + xi_sq) ** (s / 2)


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """x-independent symbol sampled on a frequency grid.

    ``domain`` is "full" (half-space/full-space frequencies) or "boundary".
    ``evaluator`` maps a tuple of frequency arrays to symbol values and is
    used for off-grid evaluation (finite differences in semi-norm estimates).
    """

    order: float
    gamma: float
    table: np.ndarray
    domain: str = "full"
    evaluator: Callable | None = None
    tags: tuple = ()

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        self.table.setflags(write=False)

    def __call__(self, *xi):
        if self.evaluator is None:
            raise ValueError("symbol has no off-grid evaluator")
        return self.evaluator(*xi)

    def __mul__(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        if self.domain != other.domain or self.gamma != other.gamma:
            raise ValueError("symbols live on different grids")
        ev = None
        if self.evaluator is not None and other.evaluator is not None:
            a, b = self.evaluator, other.evaluator
            ev = lambda *xi: a(*xi) * b(*xi)  # noqa: E731
        return MultiplierSymbol(self.order + other.order, self.gamma, self.table * other.table, self.domain, ev)

    def __sub__(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        ev = None
        if self.evaluator is not None and other.evaluator is not None:
            a, b = self.evaluator, other.evaluator
            ev = lambda *xi: a(*xi) - b(*xi)  # noqa: E731
        return MultiplierSymbol(max(self.order, other.order), self.gamma, self.table - other.table, self.domain, ev)


@dataclass(frozen=True, eq=False)
class SeparatedSymbol:
    """a(x, xi) = sum_theta c_theta exp(i theta.x) Q_theta(xi).

    ``modes`` holds (theta, coefficient, table) triples; coefficients are
    (rows x cols) matrices, tables live on the full frequency grid.  The
    spatial variable x is the sharp/log coordinate.
    """

    order: float
    gamma: float
    modes: tuple
    shape: tuple = (1, 1)
    evaluators: tuple = ()

    def x_factor(self, grid: HalfSpaceGrid, theta) -> np.ndarray:
        if not np.any(theta):
            return np.ones((1,) * grid.n)
        mesh = grid.mesh()
        return np.exp(1j * sum(th * x for th, x in zip(theta, mesh)))


def weight_symbol(s: float, gamma: float, grid: HalfSpaceGrid, domain: str = "full") -> MultiplierSymbol:
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    xi_sq = grid.xi_squared() if domain == "full" else grid.boundary_xi_squared()
    table = np.asarray(weight(xi_sq, s, gamma), dtype=float)
    ev = lambda *xi: weight(sum(k**2 for k in xi), s, gamma)  # noqa: E731
    return MultiplierSymbol(s, gamma, table, domain, ev, ("scalar", "even", "radial"))


def _axes(ndim_field: int):
    return tuple(range(1, ndim_field + 1))


def _apply_table(data: np.ndarray, table: np.ndarray, nd: int) -> np.ndarray:
    ax = _axes(nd)
    return sfft.ifftn(table * sfft.fftn(data, axes=ax), axes=ax)


def apply_fourier_multiplier(v, a: MultiplierSymbol):
    if isinstance(v, BoundaryField):
        if a.domain != "boundary" or a.table.shape != tuple(v.grid.sizes[1:]):
            raise ValueError("boundary field needs a boundary symbol table of matching shape")
        return BoundaryField(v.grid, _apply_table(v.data, a.table, v.grid.n - 1))
    if isinstance(v, FullSpaceField):
        if a.domain != "full" or a.table.shape != tuple(v.grid.sizes):
            raise ValueError("full-space field needs a full symbol table of matching shape")
        return FullSpaceField(v.grid, _apply_table(v.data, a.table, v.grid.n))
    raise TypeError("apply_fourier_multiplier acts on full-space or boundary fields")


def _matvec(coef: np.ndarray, data: np.ndarray) -> np.ndarray:
    """Pointwise (rows x cols) coefficient applied to a (cols, ...) array.

    ``coef`` is either a constant matrix or an array of shape
    (rows, cols, *grid).
    """
    if coef.ndim == 2:
        return np.tensordot(coef, data, axes=([1], [0]))
    return np.einsum("ij...,j...->i...", coef, data)


@functools.lru_cache(maxsize=16)
def _phase(grid: HalfSpaceGrid, theta: tuple) -> np.ndarray:
    mesh = grid.mesh()
    out = np.exp(1j * sum(th * x for th, x in zip(theta, mesh)))
    out.setflags(write=False)
    return out


def _lattice_shift(grid: HalfSpaceGrid, theta: tuple):
    """Integer spectral shift equivalent to multiplying by exp(i theta.x), or None."""
    shift = []
    for th, period in zip(theta, grid.periods):
        k = th * period / (2 * np.pi)
        if abs(k - round(k)) > 1e-9:
            return None
        shift.append(int(round(k)))
    return tuple(shift)


def separated_spectrum_parts(grid: HalfSpaceGrid, a: "SeparatedSymbol", spec: np.ndarray):
    """Split a separated symbol applied to ``spec`` into (lattice spectrum, off-lattice field).

    Lattice frequencies become cyclic shifts of the spectrum, so their sum still
    needs one inverse transform.  Off-lattice modes are returned in physical
    space (or None when there are none).  Table products are shared between
    modes that use the same table object.
    """
    rows, cols = a.shape
    if spec.shape[0] != cols:
        raise ValueError(f"symbol expects {cols} components, field has {spec.shape[0]}")
    products: dict = {}
    groups: dict = {}
    for theta, coef, table in a.modes:
        key = tuple(float(t) for t in theta)
        ts = products.get(id(table))
        if ts is None:
            ts = products[id(table)] = table * spec
        acc = _matvec(np.asarray(coef), ts)
        if key in groups:
            groups[key] += acc
        else:
            groups[key] = acc
    ax = _axes(grid.n)
    origin = [grid.axis(j)[0] for j in range(grid.n)]
    shifted = np.zeros((rows,) + tuple(grid.sizes), complex)
    off = None
    for key, acc in groups.items():
        shift = _lattice_shift(grid, key)
        if shift is None:
            term = sfft.ifftn(acc, axes=ax) * _phase(grid, key)
            off = term if off is None else off + term
        elif any(shift):
            # exp(i theta.x) = exp(i theta.x0) exp(2 pi i k.(x - x0)/P)
            shifted += np.exp(1j * np.dot(key, origin)) * np.roll(acc, shift, axis=ax)
        else:
            shifted += acc
    return shifted, off


def apply_separated_spectrum(grid: HalfSpaceGrid, a: "SeparatedSymbol", spec: np.ndarray) -> np.ndarray:
    """Separated symbol applied to data given by its spectrum (cols, *grid)."""
    shifted, off = separated_spectrum_parts(grid, a, spec)
    out = sfft.ifftn(shifted, axes=_axes(grid.n))
    return out if off is None else out + off


def op_conormal(u: HalfSpaceField, a) -> HalfSpaceField:
    """Conormal quantization in sharp space.

    Multiplier tables act componentwise.  For a separated symbol each mode
    contributes ``exp(i theta.x) c_theta (Q_theta(D) v)``; the normal-derivative
    data is not propagated (it is not defined for general symbols).
    """
    grid = u.grid
    if isinstance(a, MultiplierSymbol):
        if a.table.shape != tuple(grid.sizes):
            raise ValueError("symbol table does not match the grid")
        return HalfSpaceField(grid, _apply_table(u.sharp_data, a.table, grid.n))
    if isinstance(a, SeparatedSymbol):
        spec = sfft.fftn(u.sharp_data, axes=_axes(grid.n))
        return HalfSpaceField(grid, apply_separated_spectrum(grid, a, spec))
    raise TypeError("unsupported symbol type")


def multiplication_symbol(coef_modes: Sequence, grid: HalfSpaceGrid, gamma: float = 1.0, shape=None) -> SeparatedSymbol:
    """Separated symbol of the multiplication by sum_theta c_theta exp(i theta.x)."""
    one = np.ones(tuple(grid.sizes))
    modes = tuple((tuple(th), np.asarray(c), one) for th, c in coef_modes)
    shp = shape or np.asarray(coef_modes[0][1]).shape
    return SeparatedSymbol(0.0, gamma, modes, shp)


# ----------------------------------------------------------------------------
# semi-norms

MAX_SEMINORM_ORDER = 4


@dataclass
class SemiNormReport:
    order: float
    k: int
    entries: dict = field(default_factory=dict)  # (alpha, beta) -> {gamma: sup}

    def per_gamma(self, key) -> dict:
        return self.entries[key]

    def seminorm(self, k: int | None = None) -> dict:
        """|a|_{m,k} per gamma: max over entries with |alpha|+|beta| <= k."""
        k = self.k if k is None else k
        out: dict = {}
        for (al, be), row in self.entries.items():
            if sum(al) + sum(be) <= k:
                for g, v in row.items():
                    out[g] = max(out.get(g, 0.0), v)
        return out

    def drift(self, key) -> float:
        vals = np.array(list(self.entries[key].values()))
        lo, hi = vals.min(), vals.max()
        return float((hi - lo) / hi) if hi > 0 else 0.0

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "k": self.k,
            "entries": [
                {"alpha": list(al), "beta": list(be), "sup": {str(g): v for g, v in row.items()}}
                for (al, be), row in sorted(self.entries.items())
            ],
        }


_STENCIL = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))


def _fd(fun, x, xi, axis: int, on_x: bool, step: float, count: int):
    """count-fold 4th-order central difference of fun(x, xi) along one axis."""
    if count == 0:
        return fun(x, xi)
    acc = 0.0
    for off, w in _STENCIL:
        if on_x:
            xs = x.copy()
            xs[:, axis] += off * step
            acc = acc + w * _fd(fun, xs, xi, axis, on_x, step, count - 1)
        else:
            xs = xi.copy()
            xs[:, axis] += off * step
            acc = acc + w * _fd(fun, x, xs, axis, on_x, step, count - 1)
    return acc / step


def _mixed(fun, x, xi, alpha, beta, xi_step, x_step):
    f = fun
    for j, c in enumerate(alpha):
        if c:
            f = (lambda g, j=j, c=c: lambda xx, kk: _fd(g, xx, kk, j, False, xi_step[j], c))(f)
    for j, c in enumerate(beta):
        if c:
            f = (lambda g, j=j, c=c: lambda xx, kk: _fd(g, xx, kk, j, True, x_step[j], c))(f)
    return f(x, xi)


def frequency_shells(gamma: float, xi_max: Sequence[float], dim: int, directions: int = 6):
    """Stratified frequency samples on the shells |xi| in {0, gamma, 4 gamma, max}.

    Points are clipped into the box ``|xi_j| <= xi_max[j]`` where the symbol is
    resolved.
    """
    rng = np.random.default_rng(1000)  # same directions for every gamma
    lim = np.asarray(xi_max, float)
    pts = [np.zeros(dim)]
    for r in (gamma, 4 * gamma, float(np.min(lim))):
        dirs = rng.normal(size=(directions, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts.extend(np.clip(r * dirs, -lim, lim))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = min(r, lim[j])
            pts.append(e)
    return np.unique(np.round(np.array(pts), 12), axis=0)


def estimate_seminorm(
    a,
    m: float,
    k: int,
    sweep: Sequence[float] = DEFAULT_SWEEP,
    xi_max: Sequence[float] | None = None,
    xi_step: Sequence[float] | None = None,
    x_samples: np.ndarray | None = None,
    x_step: Sequence[float] | None = None,
    dim: int = 2,
) -> SemiNormReport:
    """Finite-difference estimate of sup lambda^{-m+|alpha|} |d_xi^alpha d_x^beta a|.

    ``a(gamma)`` returns a vectorised evaluator ``f(x, xi)`` taking (P, dim)
    arrays and returning P values (or P matrices).  A :class:`MultiplierSymbol`
    with an evaluator is accepted for a single gamma.  When ``x_samples`` is
    None the symbol is treated as x-independent and only beta = 0 is probed.
    """
    if k > MAX_SEMINORM_ORDER:
        raise ValueError(f"semi-norm order {k} exceeds the finite-difference budget ({MAX_SEMINORM_ORDER})")
    if k < 0:
        raise ValueError("semi-norm order must be nonnegative")
    if isinstance(a, MultiplierSymbol):
        sym = a
        if sym.evaluator is None:
            raise ValueError("symbol has no off-grid evaluator")
        a = lambda g: (lambda x, xi: sym.evaluator(*xi.T))  # noqa: E731
        sweep = [sym.gamma]
    xi_max = list(xi_max or [500.0] * dim)
    xi_step = list(xi_step or [0.05] * dim)
    x_step = list(x_step or [1e-2] * dim)
    x_dependent = x_samples is not None
    xs = np.zeros((1, dim)) if x_samples is None else np.atleast_2d(np.asarray(x_samples, float))
    report = SemiNormReport(m, k)
    multis = [al for al in itertools.product(range(k + 1), repeat=dim) if sum(al) <= k]
    for g in sweep:
        f = a(g)
        xis = frequency_shells(g, xi_max, dim)
        X = np.repeat(xs, len(xis), axis=0)
        XI = np.tile(xis, (len(xs), 1))
        lam = weight(np.sum(XI**2, axis=1), 1.0, g)
        for al in multis:
            for be in multis if x_dependent else [(0,) * dim]:
                if sum(al) + sum(be) > k:
                    continue
                vals = np.asarray(_mixed(f, X, XI, al, be, xi_step, x_step))
                mag = np.abs(vals).reshape(len(X), -1).max(axis=1)
                sup = float(np.max(mag * lam ** (-m + sum(al))))
                report.entries.setdefault((al, be), {})[g] = sup
    return report


def sobolev_continuity_constant(op, order: float, fields, sweep=DEFAULT_SWEEP, s: float = 0.0):
    """max over fields of ||op u||_{s,tan} / ||u||_{s+order,tan} per gamma."""
    from .half_space_core import NormSpec, norm

    out = {}
    for g in sweep:
        best = 0.0
        for u in fields:
            den = norm(u, NormSpec("conormal_spectral", s + order, g))
            if den == 0:
                continue
            best = max(best, norm(op(u, g), NormSpec("conormal_spectral", s, g)) / den)
        out[g] = best
    return out
