"""Normal-commutator symbol and compositional commutators.

The coefficient ``A`` multiplying the normal derivative is band limited in
log coordinates, ``A(x) = c0 + sum_theta c_theta exp(i theta.x)``.  For each
mode the commutator kernel factors as ``(exp(-i theta.y) - exp(-y1)) chi(y)``
and is split into Taylor factors ``h_{theta,k}`` with ``sum_k y_k h_{theta,k}``
equal to the kernel.  Since ``y_k eta(y) = i F^{-1}(d_k lambda)(y)``, the
symbol table of mode theta is ``i sum_k DFT(h_{theta,k} kappa_k)`` where
``kappa_k`` is the kernel of ``d_k lambda``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .half_space_core import HalfSpaceField, HalfSpaceGrid, plateau_profile
from .mollified_calculus import (
    CutoffSpec,
    kernel_window,
    lamchi_apply,
    mollified_weight,
    drift,
)
from .symbol_calculus import DEFAULT_SWEEP, SeparatedSymbol, _matvec, op_conormal, weight

ROLES = ("invertible", "vanishing")
GAUSS_NODES = 16
RECONSTRUCTION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BandLimitedCoefficient:
    c0: np.ndarray
    modes: tuple = ()  # ((theta, c_theta), ...)
    role: str = "invertible"
    margin: float = 0.1

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")
        c0 = np.asarray(self.c0, float)
        if c0.ndim != 2 or c0.shape[0] != c0.shape[1]:
            raise ValueError("c0 must be a square matrix")
        object.__setattr__(self, "c0", c0)
        norm_modes = tuple((tuple(float(v) for v in th), np.asarray(c, complex)) for th, c in self.modes)
        object.__setattr__(self, "modes", norm_modes)
        for th, c in norm_modes:
            if c.shape != c0.shape:
                raise ValueError("mode coefficients must match c0")
            partner = [cc for tt, cc in norm_modes if np.allclose(tt, [-v for v in th])]
            if not partner or not np.allclose(partner[0], np.conj(c)):
                raise ValueError(f"mode {th} lacks its conjugate partner; coefficient would not be real")

    @property
    def size(self) -> int:
        return self.c0.shape[0]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.c0) and all(not np.any(c) for _, c in self.modes)

    def all_modes(self):
        """(theta, coefficient) pairs including the constant part."""
        zero = (0.0,) * (len(self.modes[0][0]) if self.modes else 2)
        return ((zero, self.c0.astype(complex)),) + self.modes

    def natural(self, grid: HalfSpaceGrid) -> np.ndarray:
        """Values on the log grid, shape (size, size, *grid)."""
        mesh = grid.mesh()
        out = np.broadcast_to(self.c0[(...,) + (None,) * grid.n], self.c0.shape + tuple(grid.sizes)).astype(complex)
        for th, c in self.modes:
            phase = np.exp(1j * sum(t * x for t, x in zip(th, mesh)))
            out = out + c[(...,) + (None,) * grid.n] * phase
        return out.real

    def check_lattice(self, grid: HalfSpaceGrid) -> None:
        for th, _ in self.modes:
            for v, P in zip(th, grid.periods):
                k = v * P / (2 * np.pi)
                if abs(k - round(k)) > 1e-9:
                    raise ValueError(f"mode {th} is not periodic on the grid box")

    def min_singular_value(self, grid: HalfSpaceGrid) -> float:
        vals = np.moveaxis(self.natural(grid).reshape(self.size, self.size, -1), -1, 0)
        return float(np.linalg.svd(vals, compute_uv=False).min())

    def validate(self, grid: HalfSpaceGrid) -> float:
        self.check_lattice(grid)
        if self.role == "invertible":
            sv = self.min_singular_value(grid)
            if sv < self.margin:
                raise ValueError(f"coefficient is not invertible with margin {self.margin}: min singular value {sv:.3g}")
            return sv
        return 0.0

    def apply(self, grid: HalfSpaceGrid, data: np.ndarray) -> np.ndarray:
        return _matvec(self.natural(grid), data)


def constant_coefficient(c0) -> BandLimitedCoefficient:
    return BandLimitedCoefficient(np.asarray(c0, float))


def default_coefficient(grid: HalfSpaceGrid, amplitude: float = 0.08) -> BandLimitedCoefficient:
    """Symmetric diagonally dominant 2x2 coefficient with three conjugate mode pairs."""
    c0 = np.array([[2.0, 0.3], [0.3, 1.5]])
    d1 = 2 * np.pi / grid.periods[0]
    d2 = 2 * np.pi / grid.periods[1]
    lattice = [(3, 0), (0, 2), (2, -1)]
    mats = [
        np.array([[1.0, 0.5j], [0.5j, -0.5]]),
        np.array([[0.5 - 0.5j, 0.2], [0.2, 1.0j]]),
        np.array([[-0.3j, 0.4], [0.4, 0.6]]),
    ]
    modes = []
    for (j, k), c in zip(lattice, mats):
        th = (j * d1, k * d2)
        modes.append((th, amplitude * c))
        modes.append(((-th[0], -th[1]), amplitude * np.conj(c)))
    return BandLimitedCoefficient(c0, tuple(modes))


# ----------------------------------------------------------------------------
# kernel and Taylor factors


@dataclass(frozen=True, eq=False)
class KernelEvaluator:
    coef: BandLimitedCoefficient
    cut: CutoffSpec

    def mode_factor(self, theta, y):
        """g_theta(y) = (exp(-i theta.y) - exp(-y1)) chi(y)."""
        return (np.exp(-1j * sum(t * v for t, v in zip(theta, y))) - np.exp(-y[0])) * self.cut.chi(*y)

    def __call__(self, x, y) -> np.ndarray:
        """K(x, y) at matching arrays of points; x, y are tuples of coordinate arrays."""
        out = 0
        for th, c in self.coef.all_modes():
            phase = np.exp(1j * sum(t * v for t, v in zip(th, x)))
            out = out + c[(...,) + (None,) * np.ndim(phase)] * (phase * self.mode_factor(th, y))
        return out


def kernel_K(coef: BandLimitedCoefficient, cut: CutoffSpec) -> KernelEvaluator:
    if coef.role != "invertible":
        raise ValueError("the normal-commutator kernel is defined for the invertible block")
    return KernelEvaluator(coef, cut)


def phi_taylor(y, cut: CutoffSpec):
    """Radial cutoff equal to one on |y| <= 2 eps0 and vanishing beyond 3 eps0."""
    r = np.sqrt(sum(v**2 for v in y))
    return plateau_profile(r, 2 * cut.eps0, 3 * cut.eps0)


_GL = leggauss(GAUSS_NODES)


def _taylor_integrals(theta, y):
    """int_0^1 d_k e_theta(t y) dt for e_theta(y) = exp(-i theta.y) - exp(-y1)."""
    tg, tw = _GL
    tg = (tg + 1) / 2
    tw = tw / 2
    phase = sum(t * v for t, v in zip(theta, y))
    osc = sum(w * np.exp(-1j * tau * phase) for tau, w in zip(tg, tw))
    decay = sum(w * np.exp(-tau * y[0]) for tau, w in zip(tg, tw))
    out = [-1j * th * osc for th in theta]
    out[0] = out[0] + decay
    return out


@dataclass(frozen=True, eq=False)
class TaylorFactors:
    kernel: KernelEvaluator

    def mode_factors(self, theta, y):
        """h_{theta,k}(y) for k = 1..n, with chi kept outside the t-integral."""
        weight_y = self.kernel.cut.chi(*y) * phi_taylor(y, self.kernel.cut)
        return [weight_y * h for h in _taylor_integrals(theta, y)]

    def __call__(self, x, y):
        """b_k(x, y) stacked along a leading axis of length n."""
        out = []
        for k in range(len(y)):
            acc = 0
            for th, c in self.kernel.coef.all_modes():
                phase = np.exp(1j * sum(t * v for t, v in zip(th, x)))
                acc = acc + c[(...,) + (None,) * np.ndim(phase)] * (phase * self.mode_factors(th, y)[k])
            out.append(acc)
        return out

    def reconstruction_residual(self, x, y) -> float:
        bk = self(x, y)
        lhs = sum(b * v for b, v in zip(bk, y))
        ref = self.kernel(x, y)
        return float(np.abs(lhs - ref).max())


def taylor_factors(kern: KernelEvaluator, check_points: int = 200, seed: int = 0) -> TaylorFactors:
    tf = TaylorFactors(kern)
    rng = np.random.default_rng(seed)
    r = 2 * kern.cut.eps0
    y = tuple(rng.uniform(-r, r, check_points) for _ in range(kern.cut.n))
    x = tuple(rng.uniform(-2, 2, check_points) for _ in range(kern.cut.n))
    res = tf.reconstruction_residual(x, y)
    if res > RECONSTRUCTION_TOL:
        raise ValueError(f"Taylor reconstruction residual {res:.2e} exceeds {RECONSTRUCTION_TOL:.0e}")
    return tf


# ----------------------------------------------------------------------------
# normal-commutator symbol


@functools.lru_cache(maxsize=8)
def _gradient_window(grid, cut, m, gamma):
    return kernel_window(grid, cut, m, gamma, gradients=True)


@dataclass(frozen=True, eq=False)
class NormalCommutatorSymbol:
    order: float
    gamma: float
    coef: BandLimitedCoefficient
    separated: SeparatedSymbol  # q_m as (theta, c_theta, Q_theta table) modes
    evaluators: dict = field(repr=False)  # theta -> off-grid Q_theta(points)

    def mode_table(self, theta):
        for th, _, tab in self.separated.modes:
            if np.allclose(th, theta):
                return tab
        raise KeyError(theta)


@functools.lru_cache(maxsize=4)
def normal_commutator_symbol(m: float, gamma: float, coef: BandLimitedCoefficient, cut: CutoffSpec, grid: HalfSpaceGrid) -> NormalCommutatorSymbol:
    r = coef.size
    if coef.is_zero:
        zero = np.zeros(tuple(grid.sizes), complex)
        sep = SeparatedSymbol(m - 1, gamma, (((0.0,) * grid.n, np.zeros((r, r)), zero),), (r, r))
        return NormalCommutatorSymbol(m, gamma, coef, sep, {(0.0,) * grid.n: lambda p: np.zeros(len(p), complex)})
    tf = taylor_factors(kernel_K(coef, cut))
    win = _gradient_window(grid, cut, float(m), float(gamma))
    ymesh = win.mesh()
    freqs = [grid.wavenumbers(j) for j in range(grid.n)]
    modes, evals = [], {}
    for th, c in coef.all_modes():
        hk = tf.mode_factors(th, ymesh)
        ker = sum(1j * h * win.values[f"grad{k}"] for k, h in enumerate(hk))
        modes.append((tuple(th), c, win.dft(ker, freqs)))
        evals[tuple(th)] = functools.partial(win.dft_points, ker)
    sep = SeparatedSymbol(m - 1, gamma, tuple(modes), (r, r))
    return NormalCommutatorSymbol(m, gamma, coef, sep, evals)


# ----------------------------------------------------------------------------
# reports


@dataclass
class CommutatorReport:
    label: str
    residuals: dict = field(default_factory=dict)  # gamma -> residual
    bounds: dict = field(default_factory=dict)  # gamma -> measured constant
    drift: float | None = None
    passed: bool = True
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(v < 0 for v in self.residuals.values()):
            raise ValueError("residuals must be nonnegative")

    def to_json(self):
        return {
            "label": self.label,
            "residuals": {str(k): v for k, v in self.residuals.items()},
            "bounds": {str(k): v for k, v in self.bounds.items()},
            "drift": self.drift,
            "passed": self.passed,
            "details": self.details,
        }


COMMUTATOR_TOL = 1e-5


def normal_commutator_sides(w: HalfSpaceField, m: float, gamma: float, coef: BandLimitedCoefficient, cut: CutoffSpec):
    """Both sides of the normal-commutator identity as sharp-image arrays."""
    if w.normal_sharp is None:
        raise ValueError("field carries no normal derivative")
    grid = w.grid
    dw = w.normal_sharp
    mw = mollified_weight(float(m), float(gamma), cut, grid)
    applied = lamchi_apply(HalfSpaceField(grid, coef.apply(grid, dw)), mw)
    inner = lamchi_apply(w, mw)
    lhs = applied.sharp_data - coef.apply(grid, inner.normal_sharp)
    q = normal_commutator_symbol(m, gamma, coef, cut, grid)
    rhs = op_conormal(HalfSpaceField(grid, dw), q.separated).sharp_data
    return lhs, rhs


def verify_normal_commutator(w: HalfSpaceField, m: float, gamma: float, coef: BandLimitedCoefficient, cut: CutoffSpec) -> CommutatorReport:
    lhs, rhs = normal_commutator_sides(w, m, gamma, coef, cut)
    den = np.linalg.norm(lhs)
    res = float(np.linalg.norm(lhs - rhs) / den) if den > 0 else float(np.linalg.norm(rhs))
    return CommutatorReport(f"normal-commutator m={m}", {gamma: res}, passed=res <= COMMUTATOR_TOL)


FIXED_RADII = tuple(2.0**k for k in range(-1, 10))


def _shell_points(gamma: float, dim: int, directions: int = 12, relative=(0.5, 1.0, 2.0, 4.0)):
    """Frequency shells at gamma-relative radii plus a fixed radius ladder.

    The symbol bound is a sup over all frequencies, so the fixed ladder
    (independent of gamma) keeps the large-|xi| regime in view at small gamma.
    """
    ang = np.linspace(0, np.pi, directions, endpoint=False)
    radii = sorted(set(r * gamma for r in relative) | set(FIXED_RADII))
    pts = [np.zeros(dim)]
    for rr in radii:
        for a in ang:
            d = np.zeros(dim)
            d[0], d[1] = np.cos(a), np.sin(a)
            pts.append(rr * d)
    return np.array(pts)


def symbol_order_profile(m: float, coef: BandLimitedCoefficient, cut: CutoffSpec, grid: HalfSpaceGrid, sweep=DEFAULT_SWEEP, step_fraction: float = 0.05) -> CommutatorReport:
    """sup |d_xi^alpha Q_theta| / lambda^{m-1-|alpha|} on frequency shells, |alpha| <= 2.

    Derivatives are central differences with step ``step_fraction * gamma``
    applied to the off-grid evaluator of each mode table; the reported
    constant per gamma is the largest normalized value over modes and alpha.
    """
    report = CommutatorReport(f"commutator-order m={m}")
    per_alpha = {0: {}, 1: {}, 2: {}}
    for g in sweep:
        q = normal_commutator_symbol(m, float(g), coef, cut, grid)
        pts = _shell_points(float(g), grid.n)
        h = step_fraction * g
        sups = {0: 0.0, 1: 0.0, 2: 0.0}
        for th, c, _ in q.separated.modes:
            ev = q.evaluators[tuple(th)]
            scale = float(np.abs(c).max())
            xi_sq = np.sum(pts**2, axis=1)
            sups[0] = max(sups[0], scale * float(np.max(np.abs(ev(pts)) / weight(xi_sq, m - 1, g))))
            for k in range(grid.n):
                e = np.zeros(grid.n)
                e[k] = h
                d1 = (ev(pts + e) - ev(pts - e)) / (2 * h)
                d2 = (ev(pts + e) - 2 * ev(pts) + ev(pts - e)) / h**2
                sups[1] = max(sups[1], scale * float(np.max(np.abs(d1) / weight(xi_sq, m - 2, g))))
                sups[2] = max(sups[2], scale * float(np.max(np.abs(d2) / weight(xi_sq, m - 3, g))))
        for a in sups:
            per_alpha[a][g] = sups[a]
        report.bounds[g] = sups[0]
    drifts = {a: drift(v.values()) for a, v in per_alpha.items()}
    report.drift = max(drifts.values())
    report.details = {
        "per_alpha": {str(a): {str(g): v for g, v in d.items()} for a, d in per_alpha.items()},
        "drift_per_alpha": {str(a): v for a, v in drifts.items()},
    }
    report.passed = all(np.isfinite(list(report.bounds.values()))) and report.drift <= 0.10
    return report


# ----------------------------------------------------------------------------
# compositional commutators and boundedness probes


def compositional_commutator(op_a: Callable, op_b: Callable) -> Callable:
    """u -> A(B u) - B(A u)."""

    def commutator(u):
        ab = op_a(op_b(u))
        ba = op_b(op_a(u))
        try:
            return ab - ba
        except (TypeError, ValueError) as exc:
            raise ValueError("operators act on different field types") from exc

    return commutator


@dataclass
class ConstantReport:
    order: float
    constants: dict  # gamma -> measured sup ratio
    drift: float
    passed: bool
    tolerance: float = 0.25

    def to_json(self):
        return {
            "order": self.order,
            "constants": {str(k): v for k, v in self.constants.items()},
            "drift": self.drift,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def boundedness_probe(make_op: Callable, order: float, sweep, samples, norm_out: Callable, norm_in: Callable, tolerance: float = 0.25) -> ConstantReport:
    """sup over samples of norm_out(op v, gamma) / norm_in(v, gamma), per gamma.

    ``make_op(gamma)`` returns the operator at that gamma; ``norm_in`` should
    measure the input at the shifted order ``s + order``.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("empty sample set")
    consts = {}
    for g in sweep:
        op = make_op(g)
        best = 0.0
        for v in samples:
            den = norm_in(v, g)
            if den > 0:
                best = max(best, norm_out(op(v), g) / den)
        consts[g] = best
    d = drift(consts.values())
    return ConstantReport(order, consts, d, d <= tolerance, tolerance)
