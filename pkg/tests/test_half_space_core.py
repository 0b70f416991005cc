import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conormal_verify.half_space_core import (
    FAMILIES,
    BoundaryField,
    FullSpaceField,
    HalfSpaceField,
    HalfSpaceGrid,
    NormSpec,
    conormal_derivative,
    conormal_weight,
    load_field,
    natural,
    norm,
    outside_mass,
    sample_test_function,
    save_field,
    sharp,
    sharp_inv,
    smoke_grid_3d,
    wave_packet,
)


class TestGrid:
    def test_sizes_must_be_powers_of_two(self):
        with pytest.raises(ValueError, match="powers of two"):
            HalfSpaceGrid(sizes=(1000, 512))

    def test_box_must_cover_unit_cylinder(self):
        with pytest.raises(ValueError, match="exp"):
            HalfSpaceGrid(log_right=-0.1)

    def test_truncation_bound_enforced(self):
        with pytest.raises(ValueError, match="truncation"):
            HalfSpaceGrid(log_left=20.0)

    def test_dimension_limits(self):
        with pytest.raises(ValueError):
            HalfSpaceGrid(n=4, sizes=(8, 8, 8, 8))
        assert smoke_grid_3d().n == 3

    def test_periods_and_spacing(self, grid):
        assert grid.periods[0] == pytest.approx(62.0)
        assert grid.spacings[1] == pytest.approx(2.5 / 512)


class TestTransforms:
    def test_sharp_of_x1_times_bump(self, small_grid):
        g = small_grid
        t, xp = g.mesh()
        x1 = np.exp(t)
        bump = np.exp(-((x1 / 0.2) ** 2) - (xp / 0.2) ** 2) * (x1 < 0.45) * (np.abs(xp) < 0.45)
        u = HalfSpaceField.from_values(g, x1 * bump)
        expected = np.exp(1.5 * t) * bump
        assert np.allclose(sharp(u).data[0], expected, rtol=1e-14, atol=0)

    def test_sharp_rejects_unsupported_field(self, small_grid):
        u = HalfSpaceField.from_values(small_grid, np.ones(small_grid.sizes))
        with pytest.raises(ValueError, match="not supported"):
            sharp(u)

    def test_natural_examples(self, small_grid):
        t = small_grid.mesh()[0]
        assert np.allclose(natural(small_grid, lambda x1, xp: x1), np.exp(t))
        ones = natural(small_grid, lambda x1, xp: np.ones_like(x1 * xp[0]))
        assert np.all(ones == 1.0)

    def test_sharp_inv_substitution(self, small_grid):
        g = small_grid
        t, xp = g.mesh()
        f = np.cos(3 * xp) * np.exp(-(xp**2))
        v = np.exp(t / 2) * f
        u = sharp_inv(FullSpaceField(g, v[None].astype(complex)))
        assert np.allclose(u.values[0], np.broadcast_to(f, g.sizes))

    def test_sharp_inv_flags_missing_decay(self, small_grid):
        v = FullSpaceField(small_grid, np.ones((1,) + small_grid.sizes, complex))
        with pytest.warns(RuntimeWarning):
            sharp_inv(v)
        with pytest.raises(ValueError):
            sharp_inv(v, strict=True)

    def test_round_trip(self, grid):
        u, _ = sample_test_function("osc", 3, grid)
        back = sharp_inv(sharp(u), strict=True)
        assert np.array_equal(back.sharp_data, u.sharp_data)

    def test_parseval(self, grid):
        u, _ = sample_test_function("boundary", 1, grid)
        assert sharp(u).parseval_defect() <= 1e-12


class TestConormalDerivative:
    def test_normal_flag_requires_first_axis(self, small_grid):
        u = HalfSpaceField(small_grid, np.zeros((1,) + small_grid.sizes, complex))
        with pytest.raises(ValueError):
            conormal_derivative(u, 2, normal_flag=True)

    def test_z1_of_x1_factor_is_identity_on_plateau(self, grid):
        # u = x1 * w(x') with w smooth: Z1 u = u wherever the normal profile is flat
        u, _ = sample_test_function("bump", 0, grid)
        gen = u.generator
        t, *xp = grid.mesh()
        z = conormal_derivative(u, 1).sharp_data
        ref = np.asarray(gen.conormal(np.exp(t), t, xp)) * np.exp(t / 2)
        assert np.linalg.norm(z - ref) / np.linalg.norm(ref) < 1e-9

    def test_tangential_mode(self, grid):
        k = 2 * np.pi * 7 / grid.periods[1]
        u = wave_packet(grid, (0.0, k))
        z2 = conormal_derivative(u, 2).sharp_data
        t, *xp = grid.mesh()
        ref = np.asarray(u.generator.tangential(0, np.exp(t), t, xp)) * np.exp(t / 2)
        assert np.linalg.norm(z2 - ref) / np.linalg.norm(ref) < 1e-9


class TestNorms:
    def test_order_zero_spectral_is_l2(self, grid):
        u, _ = sample_test_function("bump", 2, grid)
        for g in (1.0, 7.0):
            assert norm(u, NormSpec("conormal_spectral", 0, g)) == pytest.approx(u.l2(), rel=1e-12)

    def test_single_mode(self, small_grid):
        g = small_grid
        t, xp = g.mesh()
        xi = (2 * np.pi * 3 / g.periods[0], 2 * np.pi * 5 / g.periods[1])
        v = np.exp(1j * (xi[0] * t + xi[1] * xp))
        f = HalfSpaceField(g, np.broadcast_to(v, g.sizes)[None].astype(complex))
        lam = (4.0 + xi[0] ** 2 + xi[1] ** 2) ** 0.5
        assert norm(f, NormSpec("conormal_spectral", 1, 2.0)) == pytest.approx(lam * f.l2(), rel=1e-12)

    def test_kind_validation(self):
        with pytest.raises(ValueError):
            NormSpec("conormal_derivative", 1.5)
        with pytest.raises(ValueError):
            NormSpec("anisotropic", 4)
        with pytest.raises(ValueError):
            NormSpec("bogus", 1)
        with pytest.raises(ValueError):
            NormSpec("full_sobolev", 1, gamma=0.5)

    def test_domain_mismatch(self, small_grid):
        b = BoundaryField(small_grid, np.zeros((1, 64), complex))
        with pytest.raises(TypeError):
            norm(b, NormSpec("conormal_spectral", 1))

    def test_h1_star_equals_h1_tan(self, grid):
        u, _ = sample_test_function("osc", 1, grid)
        a = norm(u, NormSpec("anisotropic", 1, 4.0))
        b = norm(u, NormSpec("conormal_derivative", 1, 4.0))
        assert a == pytest.approx(b, rel=1e-14)

    def test_anisotropic_adds_normal_derivative(self, grid):
        u, _ = sample_test_function("bump", 1, grid)
        assert norm(u, NormSpec("anisotropic", 2, 2.0)) > norm(u, NormSpec("conormal_derivative", 2, 2.0))


class TestConormalWeight:
    def test_zero_frequency_carries_the_half_shift(self, small_grid):
        for g in (1.0, 8.0):
            spec = conormal_weight(small_grid, NormSpec("conormal_spectral", 1, g))
            der = conormal_weight(small_grid, NormSpec("conormal_derivative", 1, g))
            assert spec[0, 0] == pytest.approx(g * g)
            assert der[0, 0] == pytest.approx(g * g + 0.25)

    def test_weight_reproduces_norm(self, small_grid):
        rng = np.random.default_rng(5)
        u = HalfSpaceField(small_grid, rng.normal(size=(1,) + small_grid.sizes).astype(complex))
        spec = NormSpec("conormal_derivative", 2, 3.0)
        vh = np.fft.fftn(u.sharp_data[0])
        direct = np.sqrt(np.sum(np.abs(vh) ** 2 * conormal_weight(small_grid, spec)) / vh.size * small_grid.cell)
        assert norm(u, spec) == pytest.approx(direct, rel=1e-12)

    def test_rejects_other_kinds(self, small_grid):
        with pytest.raises(ValueError):
            conormal_weight(small_grid, NormSpec("full_sobolev", 1))


class TestFamilies:
    def test_unknown_family(self, small_grid):
        with pytest.raises(ValueError, match="unknown"):
            sample_test_function("nope", 0, small_grid)

    def test_zero_family(self, small_grid):
        u, psi = sample_test_function("zero", 0, small_grid)
        assert not np.any(u.sharp_data) and not np.any(psi.data)

    def test_deterministic(self, grid):
        a, pa = sample_test_function("osc", 5, grid)
        b, pb = sample_test_function("osc", 5, grid)
        assert a.sharp_data.tobytes() == b.sharp_data.tobytes()
        assert pa.data.tobytes() == pb.data.tobytes()

    @pytest.mark.parametrize("family", [f for f in FAMILIES if f != "zero"])
    def test_support(self, grid, family):
        u, psi = sample_test_function(family, 0, grid)
        assert outside_mass(grid, u.sharp_data, grid.delta0) == 0.0
        r = np.abs(grid.axis(1))
        assert not np.any(psi.data[:, r >= grid.delta0])


def test_field_container_round_trip(tmp_path, small_grid):
    rng = np.random.default_rng(0)
    data = rng.normal(size=(2,) + small_grid.sizes) + 1j * rng.normal(size=(2,) + small_grid.sizes)
    u = HalfSpaceField(small_grid, data, data[::-1].copy())
    save_field(u, tmp_path / "u")
    v = load_field(tmp_path / "u")
    assert np.array_equal(v.sharp_data, u.sharp_data) and np.array_equal(v.normal_sharp, u.normal_sharp)
    assert v.grid == small_grid
    b = BoundaryField(small_grid, data[:, 0])
    save_field(b, tmp_path / "b")
    assert np.array_equal(load_field(tmp_path / "b").data, b.data)


@settings(max_examples=25, deadline=None)
@given(s=st.sampled_from([-1, 0, 1, 2]), r=st.sampled_from([-1, 0, 1, 2]), gamma=st.floats(1, 64), seed=st.integers(0, 50))
def test_imbedding_property(small_grid, s, r, gamma, seed):
    if s > r:
        s, r = r, s
    rng = np.random.default_rng(seed)
    u = HalfSpaceField(small_grid, rng.normal(size=(1,) + small_grid.sizes).astype(complex))
    lhs = norm(u, NormSpec("conormal_spectral", s, gamma))
    rhs = gamma ** (s - r) * norm(u, NormSpec("conormal_spectral", r, gamma))
    assert lhs <= rhs * (1 + 1e-13)


@settings(max_examples=25, deadline=None)
@given(a=st.one_of(st.just(0.0), st.floats(1e-3, 3), st.floats(-3, -1e-3)), seed=st.integers(0, 100))
def test_norm_homogeneity(small_grid, a, seed):
    rng = np.random.default_rng(seed)
    u = HalfSpaceField(small_grid, rng.normal(size=(1,) + small_grid.sizes).astype(complex))
    spec = NormSpec("conormal_derivative", 2, 3.0)
    assert norm(u.scale(a), spec) == pytest.approx(abs(a) * norm(u, spec), rel=1e-12, abs=1e-300)
