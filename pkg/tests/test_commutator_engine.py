import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conormal_verify.commutator_engine import (
    BandLimitedCoefficient,
    boundedness_probe,
    compositional_commutator,
    constant_coefficient,
    default_coefficient,
    kernel_K,
    normal_commutator_symbol,
    phi_taylor,
    taylor_factors,
    verify_normal_commutator,
)
from conormal_verify.half_space_core import HalfSpaceField, NormSpec, norm, sample_test_function
from conormal_verify.symbol_calculus import op_conormal, weight_symbol


class TestCoefficient:
    def test_validation(self):
        with pytest.raises(ValueError, match="square"):
            BandLimitedCoefficient(np.ones((2, 3)))
        with pytest.raises(ValueError, match="role"):
            BandLimitedCoefficient(np.eye(2), role="other")
        with pytest.raises(ValueError, match="conjugate"):
            BandLimitedCoefficient(np.eye(2), (((1.0, 0.0), np.eye(2)),))
        with pytest.raises(ValueError, match="match"):
            BandLimitedCoefficient(np.eye(2), (((1.0, 0.0), np.eye(3)), ((-1.0, 0.0), np.eye(3))))

    def test_default_is_real_and_invertible(self, grid):
        c = default_coefficient(grid)
        assert c.validate(grid) > 0.1
        assert np.isrealobj(c.natural(grid))
        assert len(c.all_modes()) == 7

    def test_off_lattice_rejected(self, grid):
        c = BandLimitedCoefficient(np.eye(1), (((0.3, 0.0), np.eye(1)), ((-0.3, 0.0), np.eye(1))))
        with pytest.raises(ValueError, match="periodic"):
            c.check_lattice(grid)

    def test_margin(self, grid):
        c = constant_coefficient([[0.05]])
        with pytest.raises(ValueError, match="margin"):
            c.validate(grid)
        assert BandLimitedCoefficient(np.zeros((1, 1)), role="vanishing").validate(grid) == 0.0


class TestKernel:
    def test_vanishing_block_has_no_kernel(self, cut):
        with pytest.raises(ValueError):
            kernel_K(BandLimitedCoefficient(np.eye(1), role="vanishing"), cut)

    def test_kernel_vanishes_on_diagonal(self, grid, cut):
        kern = kernel_K(default_coefficient(grid), cut)
        x = (np.array([0.1, -0.4]), np.array([0.2, 0.0]))
        y = (np.zeros(2), np.zeros(2))
        assert np.abs(kern(x, y)).max() < 1e-15

    def test_phi_taylor(self, cut):
        e = cut.eps0
        assert phi_taylor((np.array([1.9 * e]), np.array([0.0])), cut)[0] == 1.0
        assert phi_taylor((np.array([2.2 * e]), np.array([2.2 * e])), cut)[0] == 0.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_taylor_reconstruction(grid, cut, seed):
    tf = taylor_factors(kernel_K(default_coefficient(grid), cut), check_points=50, seed=seed)
    rng = np.random.default_rng(seed)
    r = 2 * cut.eps0 / np.sqrt(2)
    y = tuple(rng.uniform(-r, r, 20) for _ in range(2))
    x = tuple(rng.uniform(-5, 5, 20) for _ in range(2))
    assert tf.reconstruction_residual(x, y) <= 1e-9


def test_zero_coefficient_gives_zero_symbol(grid, cut):
    q = normal_commutator_symbol(-1.0, 2.0, constant_coefficient(np.zeros((1, 1))), cut, grid)
    assert not np.any(q.mode_table((0.0, 0.0)))
    with pytest.raises(KeyError):
        q.mode_table((1.0, 1.0))


def test_normal_commutator_identity_constant_coefficient(grid, cut):
    u, _ = sample_test_function("bump", 0, grid, components=2)
    rep = verify_normal_commutator(u, -1.0, 8.0, constant_coefficient([[2.0, 0.3], [0.3, 1.5]]), cut)
    assert rep.passed, rep.residuals


def test_normal_commutator_needs_derivative(grid, cut):
    w = HalfSpaceField(grid, np.zeros((1,) + grid.sizes, complex))
    with pytest.raises(ValueError):
        verify_normal_commutator(w, -1.0, 1.0, constant_coefficient([[1.0]]), cut)


def test_compositional_commutator_of_multipliers_vanishes(small_grid):
    rng = np.random.default_rng(0)
    u = HalfSpaceField(small_grid, rng.normal(size=(1,) + small_grid.sizes).astype(complex))
    a = lambda v: op_conormal(v, weight_symbol(1.0, 2.0, small_grid))  # noqa: E731
    b = lambda v: op_conormal(v, weight_symbol(-2.0, 5.0, small_grid))  # noqa: E731
    c = compositional_commutator(a, b)(u)
    assert c.l2() < 1e-13 * u.l2()


def test_boundedness_probe(small_grid):
    rng = np.random.default_rng(1)
    samples = [HalfSpaceField(small_grid, rng.normal(size=(1,) + small_grid.sizes).astype(complex)) for _ in range(2)]
    rep = boundedness_probe(
        lambda g: (lambda v: op_conormal(v, weight_symbol(1.0, g, small_grid))),
        1.0,
        (1, 4),
        samples,
        lambda v, g: norm(v, NormSpec("conormal_spectral", 0, g)),
        lambda v, g: norm(v, NormSpec("conormal_spectral", 1, g)),
    )
    assert rep.passed and rep.drift < 1e-12
    with pytest.raises(ValueError):
        boundedness_probe(lambda g: None, 0, (1,), [], None, None)
