import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conormal_verify.half_space_core import BoundaryField, FullSpaceField, HalfSpaceField
from conormal_verify.symbol_calculus import (
    MultiplierSymbol,
    SemiNormReport,
    SeparatedSymbol,
    apply_fourier_multiplier,
    estimate_seminorm,
    multiplication_symbol,
    op_conormal,
    sobolev_continuity_constant,
    weight,
    weight_symbol,
)


def random_field(grid, seed, comps=1):
    rng = np.random.default_rng(seed)
    shape = (comps,) + tuple(grid.sizes)
    return HalfSpaceField(grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_weight_values():
    assert weight(0.0, 2, 3.0) == pytest.approx(9.0)
    assert weight(16.0, 1, 3.0) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        weight_symbol(1, 0.5, None)


@pytest.mark.parametrize("s", [-2.0, -0.5, 1.0, 3.0])
@pytest.mark.parametrize("gamma", [1.0, 16.0])
def test_weight_two_sided_inverse(small_grid, s, gamma):
    u = random_field(small_grid, 1)
    f = FullSpaceField(small_grid, u.sharp_data)
    fwd, back = weight_symbol(s, gamma, small_grid), weight_symbol(-s, gamma, small_grid)
    # white noise: round-off scales with the condition number of the pair
    tol = 1e-15 * (fwd.table.max() / fwd.table.min())
    assert rel(apply_fourier_multiplier(apply_fourier_multiplier(f, fwd), back).data, f.data) < tol
    assert rel(op_conormal(op_conormal(u, back), fwd).sharp_data, u.sharp_data) < tol


def test_boundary_multiplier(small_grid):
    rng = np.random.default_rng(3)
    psi = BoundaryField(small_grid, rng.normal(size=(1, small_grid.sizes[1])).astype(complex))
    sym = weight_symbol(1.0, 2.0, small_grid, domain="boundary")
    out = apply_fourier_multiplier(psi, sym)
    assert out.data.shape == psi.data.shape
    with pytest.raises(ValueError):
        apply_fourier_multiplier(psi, weight_symbol(1.0, 2.0, small_grid))
    with pytest.raises(TypeError):
        apply_fourier_multiplier(random_field(small_grid, 0), sym)


def test_symbol_product_matches_composition(small_grid):
    u = random_field(small_grid, 2)
    a, b = weight_symbol(1.5, 4.0, small_grid), weight_symbol(-0.5, 4.0, small_grid)
    ab = a * b
    assert ab.order == pytest.approx(1.0)
    assert rel(op_conormal(u, ab).sharp_data, op_conormal(op_conormal(u, b), a).sharp_data) < 1e-13
    assert ab(np.array([3.0]), np.array([4.0]))[0] == pytest.approx(41**0.5)
    with pytest.raises(ValueError):
        a * weight_symbol(1.0, 2.0, small_grid)


def test_table_is_read_only(small_grid):
    sym = weight_symbol(1.0, 1.0, small_grid)
    with pytest.raises(ValueError):
        sym.table[0, 0] = 2.0


def test_multiplication_symbol_lattice_and_offlattice(small_grid):
    g = small_grid
    P = g.periods
    lat = (2 * np.pi * 2 / P[0], 2 * np.pi * 3 / P[1])
    off = (0.37, -1.3)
    c0 = np.array([[1.0, 0.2], [0.1, 0.7]])
    c1 = np.array([[0.1, 0.05j], [0.0, -0.2]])
    modes = [((0.0, 0.0), c0), (lat, c1), (off, c1.T)]
    sym = multiplication_symbol(modes, g)
    mesh = g.mesh()
    vals = sum(np.exp(1j * (t[0] * mesh[0] + t[1] * mesh[1]))[None, None] * c[:, :, None, None] for t, c in modes)
    u = random_field(g, 4, comps=2)
    direct = np.einsum("ij...,j...->i...", vals, u.sharp_data)
    assert rel(op_conormal(u, sym).sharp_data, direct) < 1e-12


def test_separated_component_mismatch(small_grid):
    sym = multiplication_symbol([((0.0, 0.0), np.eye(2))], small_grid)
    with pytest.raises(ValueError, match="components"):
        op_conormal(random_field(small_grid, 0, comps=3), sym)


def test_op_conormal_rejects_wrong_table(small_grid, grid):
    with pytest.raises(ValueError):
        op_conormal(random_field(small_grid, 0), weight_symbol(1.0, 1.0, grid))
    with pytest.raises(TypeError):
        op_conormal(random_field(small_grid, 0), "not a symbol")


def test_seminorm_of_weight_is_gamma_uniform():
    rep = estimate_seminorm(lambda g: (lambda x, xi: weight(np.sum(xi**2, 1), 2.0, g)), 2.0, 2, sweep=(1, 4, 16, 64))
    zero = ((0, 0), (0, 0))
    assert all(v == pytest.approx(1.0) for v in rep.per_gamma(zero).values())
    assert max(rep.drift(k) for k in rep.entries) < 0.10
    assert set(rep.seminorm()) == {1, 4, 16, 64}
    assert rep.to_json()["k"] == 2


def test_seminorm_order_limits():
    f = lambda g: (lambda x, xi: np.ones(len(xi)))  # noqa: E731
    with pytest.raises(ValueError):
        estimate_seminorm(f, 0.0, 5)
    with pytest.raises(ValueError):
        estimate_seminorm(f, 0.0, -1)


def test_seminorm_drift_definition():
    rep = SemiNormReport(0.0, 0, {((0,), (0,)): {1: 2.0, 2: 1.0}})
    assert rep.drift(((0,), (0,))) == pytest.approx(0.5)


def test_continuity_constant_of_weight(small_grid):
    fields = [random_field(small_grid, s) for s in range(3)]
    op = lambda u, g: op_conormal(u, weight_symbol(1.0, g, small_grid))  # noqa: E731
    consts = sobolev_continuity_constant(op, 1.0, fields, sweep=(1, 8))
    assert all(v == pytest.approx(1.0, rel=1e-12) for v in consts.values())


@settings(max_examples=200, deadline=None)
@given(
    xi=arrays(float, 2, elements=st.floats(-1e3, 1e3)),
    eta=arrays(float, 2, elements=st.floats(-1e3, 1e3)),
    s=st.floats(-6, 6),
    gamma=st.floats(1, 100),
)
def test_peetre_inequality(xi, eta, s, gamma):
    lhs = weight(np.sum(xi**2), s, gamma)
    rhs = 2 ** abs(s) * weight(np.sum((xi - eta) ** 2), s, gamma) * weight(np.sum(eta**2), abs(s), 1.0)
    assert lhs <= rhs * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), b=st.floats(-10, 10), seed=st.integers(0, 99))
def test_op_conormal_linearity(small_grid, a, b, seed):
    u, v = random_field(small_grid, seed), random_field(small_grid, seed + 1000)
    sym = weight_symbol(-1.0, 2.0, small_grid)
    lhs = op_conormal(HalfSpaceField(small_grid, a * u.sharp_data + b * v.sharp_data), sym).sharp_data
    rhs = a * op_conormal(u, sym).sharp_data + b * op_conormal(v, sym).sharp_data
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * (1 + np.linalg.norm(rhs))


@settings(max_examples=20, deadline=None)
@given(c=st.floats(-5, 5), s=st.floats(-3, 3), seed=st.integers(0, 99))
def test_scalar_multiplier_commutes(small_grid, c, s, seed):
    # constant multiplication has a single zero-frequency mode
    u = random_field(small_grid, seed, comps=2)
    mult = multiplication_symbol([((0.0, 0.0), c * np.eye(2))], small_grid)
    w = weight_symbol(s, 3.0, small_grid)
    lhs = op_conormal(op_conormal(u, mult), w).sharp_data
    rhs = op_conormal(op_conormal(u, w), mult).sharp_data
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * (1 + np.linalg.norm(rhs))


@settings(max_examples=20, deadline=None)
@given(s=st.floats(-3, 3), t=st.floats(-3, 3), gamma=st.floats(1, 64), seed=st.integers(0, 99))
def test_weight_composition_product(small_grid, s, t, gamma, seed):
    u = random_field(small_grid, seed)
    both = op_conormal(u, weight_symbol(s + t, gamma, small_grid)).sharp_data
    chained = op_conormal(op_conormal(u, weight_symbol(t, gamma, small_grid)), weight_symbol(s, gamma, small_grid)).sharp_data
    assert np.linalg.norm(both - chained) <= 1e-11 * np.linalg.norm(both)
