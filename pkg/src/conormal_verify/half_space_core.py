"""Grids, sampled fields, the sharp/natural transforms and gamma-weighted norms.

Half-space fields live on a periodic box in logarithmic normal coordinates:
the first axis samples ``t = log x1`` on ``[-L1, l1)`` and the remaining axes
sample ``x'`` on ``[-L', L')``.  A :class:`HalfSpaceField` keeps its
sharp-image ``v(t, x') = exp(t/2) u(exp t, x')`` as the primary data.  Going
back to ``u`` divides by ``exp(t/2)``, which is harmless for output but would
amplify round-off by ``exp(L1/2)`` if used inside a computation, so every
operator in the package works on sharp-images.
"""

from __future__ import annotations

import itertools
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.fft as sfft
from scipy.special import expit

TRUNCATION_TOL = 1e-10


def smooth_step(s, steepness: float = 1.0):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1.

    Built from exp(-c/s); the logistic form avoids overflow near the ends.
    """
    s = np.asarray(s, dtype=float)
    inside = (s > 0) & (s < 1)
    safe = np.where(inside, s, 0.5)
    core = expit(-(steepness / safe - steepness / (1.0 - safe)))
    return np.where(s <= 0, 0.0, np.where(s >= 1, 1.0, core))


def smooth_step_derivative(s, steepness: float = 1.0):
    s = np.asarray(s, dtype=float)
    inside = (s > 0) & (s < 1)
    safe = np.where(inside, s, 0.5)
    val = smooth_step(safe, steepness)
    dexp = steepness / safe**2 + steepness / (1.0 - safe) ** 2
    return np.where(inside, val * (1.0 - val) * dexp, 0.0)


def plateau_profile(x, inner: float, outer: float, steepness: float = 1.0):
    """Even profile equal to 1 on |x| <= inner and 0 on |x| >= outer."""
    return 1.0 - smooth_step((np.abs(x) - inner) / (outer - inner), steepness)


# ----------------------------------------------------------------------------
# grids


def _is_pow2(k: int) -> bool:
    return k > 0 and (k & (k - 1)) == 0


@dataclass(frozen=True)
class HalfSpaceGrid:
    n: int = 2
    log_left: float = 60.0  # L1
    log_right: float = 2.0  # l1
    tangential_half_width: float = 1.25  # L'
    sizes: tuple = (2048, 512)
    delta0: float = 0.5
    tolerance: float = 1e-12

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if len(self.sizes) != self.n:
            raise ValueError("one size per axis is required")
        if not all(_is_pow2(int(k)) for k in self.sizes):
            raise ValueError(f"grid sizes must be powers of two, got {self.sizes}")
        if self.log_right < 0:
            raise ValueError("exp(l1) must be >= 1 so the grid covers the unit half-cylinder")
        if not 0 < self.delta0 < 1:
            raise ValueError("delta0 must lie in (0, 1)")
        if np.exp(-self.log_left / 2) > self.tolerance:
            raise ValueError(
                f"truncation bound exp(-L1/2)={np.exp(-self.log_left / 2):.2e} "
                f"exceeds tolerance {self.tolerance:.1e}; enlarge L1"
            )

    # geometry -----------------------------------------------------------
    @property
    def periods(self) -> tuple:
        return (self.log_left + self.log_right,) + (2 * self.tangential_half_width,) * (self.n - 1)

    @property
    def spacings(self) -> tuple:
        return tuple(p / k for p, k in zip(self.periods, self.sizes))

    @property
    def cell(self) -> float:
        return float(np.prod(self.spacings))

    @property
    def boundary_cell(self) -> float:
        return float(np.prod(self.spacings[1:]))

    def axis(self, j: int) -> np.ndarray:
        start = -self.log_left if j == 0 else -self.tangential_half_width
        return start + np.arange(self.sizes[j]) * self.spacings[j]

    def wavenumbers(self, j: int) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.sizes[j], self.spacings[j])

    def mesh(self, sparse: bool = True):
        return np.meshgrid(*[self.axis(j) for j in range(self.n)], indexing="ij", sparse=sparse)

    def frequency_mesh(self, sparse: bool = True):
        return np.meshgrid(*[self.wavenumbers(j) for j in range(self.n)], indexing="ij", sparse=sparse)

    def boundary_mesh(self, sparse: bool = True):
        return np.meshgrid(*[self.axis(j) for j in range(1, self.n)], indexing="ij", sparse=sparse)

    def boundary_frequency_mesh(self, sparse: bool = True):
        return np.meshgrid(*[self.wavenumbers(j) for j in range(1, self.n)], indexing="ij", sparse=sparse)

    def xi_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.frequency_mesh())

    def boundary_xi_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.boundary_frequency_mesh())

    def tangential_radius(self) -> np.ndarray:
        xs = self.mesh()[1:]
        return np.sqrt(sum(np.broadcast_to(x, self.sizes) ** 2 for x in xs))

    def metadata(self) -> dict:
        return {
            "n": self.n,
            "log_left": self.log_left,
            "log_right": self.log_right,
            "tangential_half_width": self.tangential_half_width,
            "sizes": list(self.sizes),
            "delta0": self.delta0,
            "tolerance": self.tolerance,
        }


def smoke_grid_3d(**kw) -> HalfSpaceGrid:
    return HalfSpaceGrid(n=3, sizes=(128, 128, 128), **kw)


# ----------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class FullSpaceField:
    """Periodic samples over the log box (components on axis 0)."""

    grid: HalfSpaceGrid
    data: np.ndarray
    _spectrum: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.data.shape[1:] != tuple(self.grid.sizes):
            raise ValueError("field samples do not match the grid")
        self.data.setflags(write=False)

    @property
    def components(self) -> int:
        return self.data.shape[0]

    def spectrum(self) -> np.ndarray:
        if not self._spectrum:
            spec = sfft.fftn(self.data, axes=tuple(range(1, self.grid.n + 1)))
            spec.setflags(write=False)
            self._spectrum.append(spec)
        return self._spectrum[0]

    @classmethod
    def from_spectrum(cls, grid, spec):
        data = sfft.ifftn(spec, axes=tuple(range(1, grid.n + 1)))
        return cls(grid, data)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2) * self.grid.cell))

    def parseval_defect(self) -> float:
        total = np.prod(self.grid.sizes)
        spec_norm = np.sqrt(np.sum(np.abs(self.spectrum()) ** 2) / total * self.grid.cell)
        phys = self.l2()
        return 0.0 if phys == 0 else abs(spec_norm - phys) / phys


@dataclass(frozen=True, eq=False)
class BoundaryField:
    grid: HalfSpaceGrid
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape[1:] != tuple(self.grid.sizes[1:]):
            raise ValueError("boundary samples do not match the grid")
        self.data.setflags(write=False)

    @property
    def components(self) -> int:
        return self.data.shape[0]

    def spectrum(self) -> np.ndarray:
        return sfft.fftn(self.data, axes=tuple(range(1, self.grid.n)))

    @classmethod
    def from_spectrum(cls, grid, spec):
        return cls(grid, sfft.ifftn(spec, axes=tuple(range(1, grid.n))))

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2) * self.grid.boundary_cell))

    def component(self, idx) -> "BoundaryField":
        return BoundaryField(self.grid, self.data[np.atleast_1d(idx)])

    def __add__(self, other):
        return BoundaryField(self.grid, self.data + other.data)

    def __sub__(self, other):
        return BoundaryField(self.grid, self.data - other.data)

    def scale(self, c):
        return BoundaryField(self.grid, c * self.data)


@dataclass(frozen=True)
class ClosedForm:
    """Closed-form evaluator of a half-space field and of its derivatives.

    Every callable takes ``(x1, t, xp)`` with ``x1 = exp(t)`` and ``xp`` the
    list of tangential coordinate arrays, and returns an array of shape
    ``(components, ...)``.  ``trace`` takes ``xp`` only.
    """

    value: Callable
    conormal: Callable  # Z1 u = x1 d/dx1 u
    normal: Callable  # d/dx1 u
    trace: Callable
    tangential: Callable | None = None  # (j, x1, t, xp) -> d/dx_j u


@dataclass(frozen=True, eq=False)
class HalfSpaceField:
    """Half-space field stored through its sharp-image.

    ``normal_sharp`` optionally carries the sharp-image of the normal
    derivative, which cannot be recovered stably from ``sharp_data`` near
    the far end of the log box.
    """

    grid: HalfSpaceGrid
    sharp_data: np.ndarray
    normal_sharp: np.ndarray | None = None
    generator: ClosedForm | None = None

    def __post_init__(self):
        if self.sharp_data.shape[1:] != tuple(self.grid.sizes):
            raise ValueError("field samples do not match the grid")
        self.sharp_data.setflags(write=False)
        if self.normal_sharp is not None:
            self.normal_sharp.setflags(write=False)

    @classmethod
    def from_values(cls, grid, values, normal=None, generator=None):
        t = grid.mesh()[0]
        w = np.exp(t / 2)
        vals = np.asarray(values, dtype=complex)
        if vals.ndim == grid.n:
            vals = vals[None]
        nrm = None
        if normal is not None:
            nrm = np.asarray(normal, dtype=complex)
            if nrm.ndim == grid.n:
                nrm = nrm[None]
            nrm = nrm * w
        return cls(grid, vals * w, nrm, generator)

    @property
    def components(self) -> int:
        return self.sharp_data.shape[0]

    @property
    def values(self) -> np.ndarray:
        t = self.grid.mesh()[0]
        return self.sharp_data * np.exp(-t / 2)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.sharp_data) ** 2) * self.grid.cell))

    def component(self, idx) -> "HalfSpaceField":
        idx = np.atleast_1d(idx)
        nrm = None if self.normal_sharp is None else self.normal_sharp[idx]
        return HalfSpaceField(self.grid, self.sharp_data[idx], nrm)

    def with_sharp(self, data, normal=None) -> "HalfSpaceField":
        return HalfSpaceField(self.grid, np.asarray(data, dtype=complex), normal)

    def _combine(self, other, op):
        nrm = None
        if self.normal_sharp is not None and other.normal_sharp is not None:
            nrm = op(self.normal_sharp, other.normal_sharp)
        return HalfSpaceField(self.grid, op(self.sharp_data, other.sharp_data), nrm)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def scale(self, c) -> "HalfSpaceField":
        nrm = None if self.normal_sharp is None else c * self.normal_sharp
        return HalfSpaceField(self.grid, c * self.sharp_data, nrm)

    def boundary_trace(self) -> BoundaryField:
        if self.generator is None:
            raise ValueError("boundary trace requires a closed-form generator")
        xp = self.grid.boundary_mesh()
        return BoundaryField(self.grid, np.asarray(self.generator.trace(xp), dtype=complex))


def stack_fields(fields) -> HalfSpaceField:
    grid = fields[0].grid
    data = np.concatenate([f.sharp_data for f in fields])
    nrm = None
    if all(f.normal_sharp is not None for f in fields):
        nrm = np.concatenate([f.normal_sharp for f in fields])
    return HalfSpaceField(grid, data, nrm)


def stack_boundary(fields) -> BoundaryField:
    return BoundaryField(fields[0].grid, np.concatenate([f.data for f in fields]))


def zeros_like(u: HalfSpaceField, components: int | None = None) -> HalfSpaceField:
    k = u.components if components is None else components
    shape = (k,) + tuple(u.grid.sizes)
    return HalfSpaceField(u.grid, np.zeros(shape, complex), np.zeros(shape, complex))


# ----------------------------------------------------------------------------
# support bookkeeping


def outside_mass(grid: HalfSpaceGrid, data: np.ndarray, radius: float) -> float:
    """Relative L2 mass of sharp-space samples outside {x1 < radius, |x'| < radius}."""
    t = grid.mesh()[0]
    outside = (np.broadcast_to(t, grid.sizes) >= np.log(radius)) | (grid.tangential_radius() >= radius)
    tot = np.sum(np.abs(data) ** 2)
    if tot == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(data[:, outside]) ** 2) / tot))


def boundary_outside_mass(grid: HalfSpaceGrid, data: np.ndarray, radius: float) -> float:
    xs = grid.boundary_mesh()
    r = np.sqrt(sum(np.broadcast_to(x, grid.sizes[1:]) ** 2 for x in xs))
    tot = np.sum(np.abs(data) ** 2)
    if tot == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(data[:, r >= radius]) ** 2) / tot))


def far_end_ratio(grid: HalfSpaceGrid, data: np.ndarray) -> float:
    peak = np.abs(data).max()
    if peak == 0:
        return 0.0
    return float(np.abs(data[:, 0]).max() / peak)


# ----------------------------------------------------------------------------
# transforms


def sharp(u: HalfSpaceField, tol: float = TRUNCATION_TOL) -> FullSpaceField:
    leak = outside_mass(u.grid, u.sharp_data, u.grid.delta0)
    if leak > tol:
        raise ValueError(f"field is not supported in B+_delta0 (outside mass {leak:.2e})")
    return FullSpaceField(u.grid, u.sharp_data.copy())


def natural(grid: HalfSpaceGrid, a: Callable | np.ndarray) -> np.ndarray:
    """a(exp t, x') sampled on the log grid; accepts a callable a(x1, xp) or half-space samples."""
    if callable(a):
        t, *xp = grid.mesh()
        return np.asarray(a(np.exp(t), xp))
    # samples already taken at (exp t, x'): the natural map is a relabelling
    return np.asarray(a)


def sharp_inv(v: FullSpaceField, tol: float = TRUNCATION_TOL, strict: bool = False) -> HalfSpaceField:
    ratio = far_end_ratio(v.grid, v.data)
    if ratio > max(tol, v.grid.tolerance):
        msg = f"sharp-image does not decay at the far end of the log box (ratio {ratio:.2e})"
        if strict:
            raise ValueError(msg)
        import warnings

        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return HalfSpaceField(v.grid, v.data.copy())


# ----------------------------------------------------------------------------
# conormal derivatives


def _spectral(grid, data, mult):
    axes = tuple(range(1, grid.n + 1))
    return sfft.ifftn(mult * sfft.fftn(data, axes=axes), axes=axes)


def conormal_multiplier(grid: HalfSpaceGrid, j: int):
    """Fourier multiplier of Z_j in sharp space (j is 1-based)."""
    k = grid.frequency_mesh()[j - 1]
    return 1j * k - 0.5 if j == 1 else 1j * k


def conormal_derivative(u: HalfSpaceField, j: int, normal_flag: bool = False) -> HalfSpaceField:
    grid = u.grid
    if not 1 <= j <= grid.n:
        raise ValueError(f"axis {j} out of range")
    if normal_flag:
        if j != 1:
            raise ValueError("normal derivative is only defined for j = 1")
        if u.normal_sharp is not None:
            return HalfSpaceField(grid, u.normal_sharp.copy())
        if u.generator is not None:
            t, *xp = grid.mesh()
            vals = u.generator.normal(np.exp(t), t, xp)
            return HalfSpaceField(grid, np.asarray(vals, complex) * np.exp(t / 2))
        # unstable route: exp(-t) amplifies round-off at the far end
        z1 = _spectral(grid, u.sharp_data, conormal_multiplier(grid, 1))
        return HalfSpaceField(grid, z1 * np.exp(-grid.mesh()[0]))
    return HalfSpaceField(grid, _spectral(grid, u.sharp_data, conormal_multiplier(grid, j)))


# ----------------------------------------------------------------------------
# norms

ANISOTROPIC_MAX_ORDER = 3
NORM_KINDS = ("full_sobolev", "boundary_sobolev", "conormal_spectral", "conormal_derivative", "anisotropic")


@dataclass(frozen=True)
class NormSpec:
    kind: str
    order: float
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.kind in ("conormal_derivative", "anisotropic"):
            if float(self.order) != int(self.order) or self.order < 0:
                raise ValueError(f"{self.kind} norm needs a nonnegative integer order")
        if self.kind == "anisotropic" and self.order > ANISOTROPIC_MAX_ORDER:
            # higher orders need second normal derivatives, which fields do not carry
            raise ValueError(f"anisotropic norms are available up to order {ANISOTROPIC_MAX_ORDER}")


def _weighted(spec_sq, weight_sq, total, cell):
    return float(np.sqrt(np.sum(spec_sq * weight_sq) / total * cell))


def _multi_indices(n: int, order: int):
    for a in itertools.product(range(order + 1), repeat=n):
        if sum(a) <= order:
            yield a


def _derivative_weight(mults, n: int, order: int, gamma: float):
    w = 0.0
    for a in _multi_indices(n, order):
        term = gamma ** (2 * (order - sum(a)))
        for j, aj in enumerate(a):
            if aj:
                term = term * mults[j] ** aj
        w = w + term
    return w


def conormal_weight(grid: HalfSpaceGrid, spec: NormSpec) -> np.ndarray:
    """Squared Fourier weight of a tangential norm in sharp space.

    Both tangential norms are multipliers there, so the norm of any field is
    sqrt(sum |v^|^2 weight) up to the cell factor.
    """
    if spec.kind == "conormal_spectral":
        return (spec.gamma**2 + grid.xi_squared()) ** spec.order
    if spec.kind in ("conormal_derivative", "anisotropic"):
        mults = [np.abs(conormal_multiplier(grid, j)) ** 2 for j in range(1, grid.n + 1)]
        return _derivative_weight(mults, grid.n, int(spec.order), spec.gamma)
    raise ValueError(f"{spec.kind} is not a tangential norm")


def norm(f, spec: NormSpec) -> float:
    g = spec.gamma
    if spec.kind == "boundary_sobolev":
        if not isinstance(f, BoundaryField):
            raise TypeError("boundary_sobolev norm needs a BoundaryField")
        grid = f.grid
        w = (g * g + grid.boundary_xi_squared()) ** spec.order
        total = np.prod(grid.sizes[1:])
        return _weighted(np.abs(f.spectrum()) ** 2, w, total, grid.boundary_cell)

    if spec.kind == "full_sobolev":
        if isinstance(f, HalfSpaceField):
            raise TypeError("full_sobolev norm needs a full-space field")
        if isinstance(f, BoundaryField):
            raise TypeError("use boundary_sobolev for boundary fields")
        grid = f.grid
        w = (g * g + grid.xi_squared()) ** spec.order
        return _weighted(np.abs(f.spectrum()) ** 2, w, np.prod(grid.sizes), grid.cell)

    if not isinstance(f, HalfSpaceField):
        raise TypeError(f"{spec.kind} norm needs a HalfSpaceField")
    grid = f.grid
    total = np.prod(grid.sizes)
    axes = tuple(range(1, grid.n + 1))
    vh2 = np.abs(sfft.fftn(f.sharp_data, axes=axes)) ** 2
    w = conormal_weight(grid, spec)
    if spec.kind == "conormal_spectral":
        return _weighted(vh2, w, total, grid.cell)

    m = int(spec.order)
    mults = [np.abs(conormal_multiplier(grid, j)) ** 2 for j in range(1, grid.n + 1)]
    sq = np.sum(vh2 * w) / total * grid.cell
    if spec.kind == "anisotropic" and m >= 2:
        d1 = conormal_derivative(f, 1, normal_flag=True)
        d1h2 = np.abs(sfft.fftn(d1.sharp_data, axes=axes)) ** 2
        for k in range(1, m // 2 + 1):
            sq += np.sum(d1h2 * _derivative_weight(mults, grid.n, m - 2 * k, g)) / total * grid.cell
    return float(np.sqrt(sq))


# ----------------------------------------------------------------------------
# test families

FAMILIES = ("bump", "boundary", "osc", "wave", "zero")
PROFILE_STEEPNESS = 2.0
NORMAL_RAMP = 4.0


def _rng(family: str, seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(family.encode())]))


class _Profiles:
    """Support profiles: p(t) in the log-normal variable and B(x') tangentially."""

    def __init__(self, grid: HalfSpaceGrid):
        self.radius = 0.9 * grid.delta0
        self.t_a = np.log(self.radius) - NORMAL_RAMP

    def p(self, t):
        return 1.0 - smooth_step((t - self.t_a) / NORMAL_RAMP, PROFILE_STEEPNESS)

    def dp(self, t):
        return -smooth_step_derivative((t - self.t_a) / NORMAL_RAMP, PROFILE_STEEPNESS) / NORMAL_RAMP

    def dp_over_x1(self, t):
        d = self.dp(t)
        return np.where(d != 0, d * np.exp(-np.minimum(t, 50.0)), 0.0)

    def b(self, xp):
        r = np.sqrt(sum(x**2 for x in xp))
        return 1.0 - smooth_step(r / self.radius, PROFILE_STEEPNESS)

    def db(self, j, xp):
        r = np.sqrt(sum(x**2 for x in xp))
        safe = np.where(r > 0, r, 1.0)
        ds = smooth_step_derivative(r / self.radius, PROFILE_STEEPNESS) / self.radius
        return np.where(r > 0, -ds * xp[j] / safe, 0.0)


def _col(a, nd):
    return np.asarray(a).reshape((-1,) + (1,) * nd)


def _family_factor(family, rng, n_tan, comps):
    """q(x1, xp), dq/dx1 and dq/dx_j for one family, vectorised over components."""
    if family in ("bump", "boundary"):
        c = rng.uniform(-1, 1, size=(comps, 2 + n_tan))
        c[:, 0] = 1.0 + 0.5 * np.abs(c[:, 0])
        # bump: x1 * P(x1, x'); boundary: P(x1, x') with P(0, 0) != 0
        lift = 1 if family == "bump" else 0

        def poly(x1, xp):
            nd = x1.ndim
            return _col(c[:, 0], nd) + _col(c[:, 1], nd) * x1 + sum(_col(c[:, 2 + j], nd) * xp[j] for j in range(n_tan))

        def q(x1, xp):
            return x1**lift * poly(x1, xp)

        def qx1(x1, xp):
            if lift:
                return poly(x1, xp) + x1 * _col(c[:, 1], x1.ndim)
            return _col(c[:, 1], x1.ndim) * np.ones_like(x1)

        def qj(j, x1, xp):
            return x1**lift * _col(c[:, 2 + j], x1.ndim) * np.ones_like(x1)

        return q, qx1, qj

    if family == "osc":
        k1 = rng.uniform(0, 40, size=comps)
        kt = rng.uniform(-60, 60, size=(comps, n_tan))
        ph = rng.uniform(0, 2 * np.pi, size=comps)
        off = rng.uniform(0, 1, size=comps)

        def arg(x1, xp):
            nd = x1.ndim
            return _col(k1, nd) * x1 + sum(_col(kt[:, j], nd) * xp[j] for j in range(n_tan)) + _col(ph, nd)

        def q(x1, xp):
            return (_col(off, x1.ndim) + x1) * np.cos(arg(x1, xp))

        def qx1(x1, xp):
            a = arg(x1, xp)
            return np.cos(a) - (_col(off, x1.ndim) + x1) * _col(k1, x1.ndim) * np.sin(a)

        def qj(j, x1, xp):
            return -(_col(off, x1.ndim) + x1) * _col(kt[:, j], x1.ndim) * np.sin(arg(x1, xp))

        return q, qx1, qj

    raise ValueError(f"unknown test family {family!r}")


def _wave_generator(grid: HalfSpaceGrid, frequency, components: int) -> ClosedForm:
    """Packet whose sharp-image is exp(i xi.x) w(t) B(x'); supported away from x1 = 0."""
    prof = _Profiles(grid)
    k = np.asarray(frequency, float)
    centre = prof.t_a - 1.0
    half = 3.0

    def w(t):
        return plateau_profile(t - centre, 0.0, half, PROFILE_STEEPNESS)

    def dw(t):
        s = np.abs(t - centre) / half
        return -np.sign(t - centre) * smooth_step_derivative(s, PROFILE_STEEPNESS) / half

    def phase(t, xp):
        return np.exp(1j * k[0] * t) * np.exp(1j * sum(k[1 + j] * xp[j] for j in range(grid.n - 1)))

    def rep(a):
        return np.broadcast_to(a, (components,) + a.shape)

    def full(t, xp):
        shape = np.broadcast_shapes(np.shape(t), *(np.shape(x) for x in xp))
        return lambda a: np.broadcast_to(a, shape)

    def value(x1, t, xp):
        f = full(t, xp)
        return rep(f(np.exp(-t / 2) * w(t) * prof.b(xp) * phase(t, xp)))

    def conormal(x1, t, xp):
        f = full(t, xp)
        dv = (dw(t) + (1j * k[0] - 0.5) * w(t)) * np.exp(-t / 2)
        return rep(f(dv * prof.b(xp) * phase(t, xp)))

    def normal(x1, t, xp):
        f = full(t, xp)
        dv = (dw(t) + (1j * k[0] - 0.5) * w(t)) * np.exp(-1.5 * np.maximum(t, centre - half))
        return rep(f(np.where(w(t) + np.abs(dw(t)) > 0, dv, 0.0) * prof.b(xp) * phase(t, xp)))

    def trace(xp):
        xp = np.broadcast_arrays(*xp)
        return np.zeros((components,) + xp[0].shape, complex)

    def tangential(j, x1, t, xp):
        f = full(t, xp)
        d = prof.db(j, xp) + 1j * k[1 + j] * prof.b(xp)
        return rep(f(np.exp(-t / 2) * w(t) * d * phase(t, xp)))

    return ClosedForm(value, conormal, normal, trace, tangential)


def wave_packet(grid: HalfSpaceGrid, frequency, components: int = 1) -> HalfSpaceField:
    """Admissible packet with sharp-frequency centred at ``frequency``."""
    return field_from_generator(grid, _wave_generator(grid, frequency, components))


def make_generator(grid: HalfSpaceGrid, family: str, seed: int, components: int = 1) -> ClosedForm:
    if family not in FAMILIES:
        raise ValueError(f"unknown test family {family!r}")
    prof = _Profiles(grid)
    n_tan = grid.n - 1
    if family == "wave":
        rng = _rng(family, seed)
        freq = rng.uniform(-1, 1, size=grid.n) * np.array([40.0] + [120.0] * n_tan)
        return _wave_generator(grid, freq, components)
    if family == "zero":

        def zero(x1, t, xp):
            return np.zeros((components,) + np.broadcast(x1, *xp).shape)

        return ClosedForm(
            zero,
            zero,
            zero,
            lambda xp: np.zeros((components,) + np.broadcast(*xp).shape),
            lambda j, x1, t, xp: zero(x1, t, xp),
        )
    rng = _rng(family, seed)
    q, qx1, qj = _family_factor(family, rng, n_tan, components)

    def bc(x1, t, xp):
        x1b, *xpb = np.broadcast_arrays(x1, *xp)
        return x1b, xpb

    def value(x1, t, xp):
        x1b, xpb = bc(x1, t, xp)
        return q(x1b, xpb) * prof.p(t) * prof.b(xp)

    def conormal(x1, t, xp):
        x1b, xpb = bc(x1, t, xp)
        return (x1b * qx1(x1b, xpb) * prof.p(t) + q(x1b, xpb) * prof.dp(t)) * prof.b(xp)

    def normal(x1, t, xp):
        x1b, xpb = bc(x1, t, xp)
        return (qx1(x1b, xpb) * prof.p(t) + q(x1b, xpb) * prof.dp_over_x1(t)) * prof.b(xp)

    def trace(xp):
        xpb = np.broadcast_arrays(*xp)
        zero = np.zeros_like(xpb[0])
        return q(zero, xpb) * prof.b(xpb)

    def tangential(j, x1, t, xp):
        x1b, xpb = bc(x1, t, xp)
        return (qj(j, x1b, xpb) * prof.b(xp) + q(x1b, xpb) * prof.db(j, xp)) * prof.p(t)

    return ClosedForm(value, conormal, normal, trace, tangential)


def field_from_generator(grid: HalfSpaceGrid, gen: ClosedForm) -> HalfSpaceField:
    t, *xp = grid.mesh()
    x1 = np.exp(t)
    w = np.exp(t / 2)
    vals = np.asarray(gen.value(x1, t, xp), complex) * w
    nrm = np.asarray(gen.normal(x1, t, xp), complex) * w
    return HalfSpaceField(grid, vals, nrm, gen)


def _boundary_datum(grid: HalfSpaceGrid, family: str, seed: int, components: int) -> BoundaryField:
    xpb = np.broadcast_arrays(*grid.boundary_mesh())
    nd = grid.n - 1
    if family == "zero":
        return BoundaryField(grid, np.zeros((components,) + tuple(grid.sizes[1:]), complex))
    rng = _rng(family + "/psi", seed)
    prof = _Profiles(grid)
    c = rng.uniform(-1, 1, size=(components, grid.n))
    vals = _col(1.0 + 0.5 * np.abs(c[:, 0]), nd) + sum(_col(c[:, 1 + j], nd) * xpb[j] for j in range(nd))
    if family in ("osc", "wave"):
        kt = rng.uniform(-60, 60, size=(components, nd))
        ph = rng.uniform(0, 2 * np.pi, size=components)
        vals = vals * np.cos(_col(ph, nd) + sum(_col(kt[:, j], nd) * xpb[j] for j in range(nd)))
    return BoundaryField(grid, np.asarray(vals * prof.b(xpb), complex))


def sample_test_function(family_id: str, seed: int, grid: HalfSpaceGrid, components: int = 1, psi_components: int = 1):
    """Closed-form admissible pair (u, psi) for one family and seed."""
    gen = make_generator(grid, family_id, seed, components)
    u = field_from_generator(grid, gen)
    psi = _boundary_datum(grid, family_id, seed, psi_components)
    return u, psi


# ----------------------------------------------------------------------------
# flat binary container with a JSON sidecar

_DTYPE = "<c16"


def grid_from_metadata(meta: dict) -> HalfSpaceGrid:
    kw = dict(meta)
    kw["sizes"] = tuple(kw["sizes"])
    return HalfSpaceGrid(**kw)


def save_field(f, stem) -> tuple:
    """Write ``stem.bin`` (raw little-endian complex128) and ``stem.json``.

    Half-space fields store their sharp-image, followed by the sharp-image of
    the normal derivative when present.  Generators are not serialized.
    """
    stem = Path(stem)
    if isinstance(f, HalfSpaceField):
        kind, blocks = "half_space", [f.sharp_data] + ([] if f.normal_sharp is None else [f.normal_sharp])
    elif isinstance(f, FullSpaceField):
        kind, blocks = "full_space", [f.data]
    elif isinstance(f, BoundaryField):
        kind, blocks = "boundary", [f.data]
    else:
        raise TypeError("unsupported field type")
    payload = np.concatenate([np.asarray(b, dtype=_DTYPE).ravel() for b in blocks])
    sidecar = {
        "kind": kind,
        "components": int(blocks[0].shape[0]),
        "shape": list(blocks[0].shape),
        "blocks": len(blocks),
        "dtype": _DTYPE,
        "grid": f.grid.metadata(),
    }
    bin_path, json_path = stem.with_suffix(".bin"), stem.with_suffix(".json")
    payload.tofile(bin_path)
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return bin_path, json_path


def load_field(stem):
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    grid = grid_from_metadata(meta["grid"])
    shape = tuple(meta["shape"])
    raw = np.fromfile(stem.with_suffix(".bin"), dtype=meta["dtype"])
    if raw.size != meta["blocks"] * int(np.prod(shape)):
        raise ValueError("binary payload does not match its sidecar")
    blocks = raw.reshape((meta["blocks"],) + shape).astype(complex)
    if meta["kind"] == "half_space":
        return HalfSpaceField(grid, blocks[0], blocks[1] if meta["blocks"] > 1 else None)
    if meta["kind"] == "full_space":
        return FullSpaceField(grid, blocks[0])
    return BoundaryField(grid, blocks[0])
