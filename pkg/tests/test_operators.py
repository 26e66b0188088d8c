import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsverify import (
    FluidParams,
    Grid,
    ScalarField,
    SolutionFamily,
    TimeProfile,
    VectorField,
    advection,
    curl,
    divergence,
    gradient,
    laplacian,
    leray_project,
    poisson_solve,
    pressure_from_fields,
    sample,
    umbilical_force,
)
from nsverify import fields as F
from nsverify.operators import SpectralWorkspace

PI = math.pi
FLUID = FluidParams(0.02, 1.0)
seeds = st.integers(0, 2**32 - 1)


def _band_limited(grid, rng, comps=None, kmax=3):
    """Random real trigonometric polynomial with integer modes |m| <= kmax per axis."""
    ws = SpectralWorkspace.for_grid(grid)
    shape = grid.shape if comps is None else (comps, *grid.shape)
    hat = ws.forward(rng.standard_normal(shape))
    m = np.abs(np.fft.fftfreq(grid.resolution[0], 1.0 / grid.resolution[0]))
    keep = np.ones(grid.shape, dtype=bool)
    for j in range(grid.dim):
        s = [1] * grid.dim
        s[j] = grid.resolution[0]
        keep = keep & (m <= kmax).reshape(s)
    return ws.inverse(hat * keep)


def test_wavenumber_convention():
    ws = SpectralWorkspace.for_grid(Grid.cube(1 + 1, 8))
    k = ws.k[0].ravel()
    assert k[0] == 0.0
    assert k[1] == pytest.approx(PI)
    assert k[4] == pytest.approx(4 * PI)  # Nyquist stored positive
    assert ws.ik[0].ravel()[4] == 0.0  # and dropped from first derivatives


def test_spectral_gradient_of_band_limited_sine_is_exact():
    grid = Grid.cube(2, 16)
    x = grid.mesh()
    g = gradient(ScalarField(grid, np.sin(3 * PI * x[0]) * np.cos(PI * x[1])))
    np.testing.assert_allclose(g.data[0], 3 * PI * np.cos(3 * PI * x[0]) * np.cos(PI * x[1]), atol=1e-12)
    np.testing.assert_allclose(g.data[1], -PI * np.sin(3 * PI * x[0]) * np.sin(PI * x[1]), atol=1e-12)


def test_fd_error_ratio_is_four():
    errs = []
    for n in (32, 64):
        grid = Grid.cube(2, n)
        x = grid.mesh()
        s = ScalarField(grid, np.cos(2 * PI * x[0]))
        lap = laplacian(s, "fd").samples
        errs.append(np.max(np.abs(lap + 4 * PI**2 * s.samples)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_backend_alias():
    grid = Grid.cube(2, 8)
    s = ScalarField(grid, np.sin(PI * grid.mesh()[0]))
    np.testing.assert_array_equal(gradient(s, "fd").data, gradient(s, "finite_difference_2nd_order").data)
    with pytest.raises(ValueError):
        gradient(s, "chebyshev")


def test_abc_is_laplacian_eigenfunction():
    v, _, _ = sample(SolutionFamily.abc_flow(1.0, 0.5, 0.25), FLUID, Grid.cube(3, 16), 0.0)
    np.testing.assert_allclose(laplacian(v).data, -(PI**2) * v.data, atol=1e-12)


def test_abc_curl_is_minus_pi_times_field():
    # with v1 = a sin(pi x3) - c cos(pi x2) etc., curl v = -pi v
    v, _, _ = sample(SolutionFamily.abc_flow(1, 1, 1), FLUID, Grid.cube(3, 16), 0.0)
    np.testing.assert_allclose(curl(v).data, -PI * v.data, atol=1e-11)


def test_taylor_vorticity_sign():
    grid = Grid.cube(2, 16)
    v, _, _ = sample(SolutionFamily.taylor_vortex(), FLUID, grid, 0.0)
    x = grid.mesh()
    np.testing.assert_allclose(curl(v).samples, 2 * PI * np.sin(PI * x[0]) * np.sin(PI * x[1]), atol=1e-12)


@pytest.mark.parametrize("fam", [SolutionFamily.taylor_vortex(), SolutionFamily.abc_flow(1.0, 0.5, 0.25)])
def test_advection_matches_closed_form(fam):
    grid = Grid.cube(fam.dim, 16)
    v, _, _ = sample(fam, FLUID, grid, 0.3)
    np.testing.assert_allclose(advection(v).data, F.inertial_closed_form(fam, FLUID, grid.mesh(), 0.3), atol=1e-10)


def test_dealiasing_leaves_low_modes_alone():
    grid = Grid.cube(2, 32)
    v, _, _ = sample(SolutionFamily.taylor_vortex(), FLUID, grid, 0.0)
    np.testing.assert_allclose(advection(v, dealias=True).data, advection(v).data, atol=1e-12)
    with pytest.raises(ValueError):
        advection(v, "fd", dealias=True)


def test_poisson_records_source_mean():
    grid = Grid.cube(2, 16)
    x = grid.mesh()
    s = poisson_solve(ScalarField(grid, 3.0 + np.cos(PI * x[0])))
    assert s.meta["source_mean"] == pytest.approx(3.0)
    np.testing.assert_allclose(s.samples, -np.cos(PI * x[0]) / PI**2, atol=1e-14)


@pytest.mark.parametrize("fam", [SolutionFamily.taylor_vortex(), SolutionFamily.abc_flow(1.0, 0.5, 0.25)])
def test_pressure_from_fields_matches_closed_form(fam):
    grid = Grid.cube(fam.dim, 16)
    v, p, f = sample(fam, FLUID, grid, 0.5)
    np.testing.assert_allclose(pressure_from_fields(v, f, FLUID).samples, p.samples - p.mean(), atol=1e-10)


def test_leray_fixes_solenoidal_and_kills_gradients():
    grid = Grid.cube(3, 16)
    v, _, _ = sample(SolutionFamily.abc_flow(1.0, 0.5, 0.25), FLUID, grid, 0.0)
    np.testing.assert_allclose(leray_project(v).data, v.data, atol=1e-12)
    x = grid.mesh()
    g = gradient(ScalarField(grid, np.sin(PI * x[0]) * np.cos(2 * PI * x[2])))
    assert leray_project(g).sup_norm() < 1e-12


def test_leray_keeps_constant_mode():
    grid = Grid.cube(2, 8)
    w = VectorField(grid, np.ones((2, 8, 8)))
    np.testing.assert_allclose(leray_project(w).data, 1.0)


def test_umbilical_force_vanishes_for_forced_abc():
    fam = SolutionFamily.forced_abc_flow(1.0, 0.5, 0.25, TimeProfile.constant(1.0))
    v, _, _ = sample(fam, FLUID, Grid.cube(3, 16), 0.8)
    assert umbilical_force(v).sup_norm() < 1e-10
    with pytest.raises(ValueError):
        umbilical_force(v, "fd")


# -- properties on random fields -------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 3]))
def test_leray_idempotent_and_solenoidal(seed, dim):
    grid = Grid.cube(dim, 8 if dim == 3 else 16)
    w = VectorField(grid, np.random.default_rng(seed).standard_normal((dim, *grid.shape)))
    pw = leray_project(w)
    assert (leray_project(pw) - pw).sup_norm() < 1e-12
    assert divergence(pw).sup_norm() < 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=seeds, alpha=st.floats(-3, 3), beta=st.floats(-3, 3))
def test_leray_linear(seed, alpha, beta):
    grid = Grid.cube(2, 16)
    rng = np.random.default_rng(seed)
    u = VectorField(grid, rng.standard_normal((2, *grid.shape)))
    w = VectorField(grid, rng.standard_normal((2, *grid.shape)))
    lhs = leray_project(u * alpha + w * beta)
    rhs = leray_project(u) * alpha + leray_project(w) * beta
    assert (lhs - rhs).sup_norm() < 1e-11


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_helmholtz_reconstruction_band_limited(seed):
    grid = Grid.cube(3, 8)
    w = VectorField(grid, _band_limited(grid, np.random.default_rng(seed), comps=3))
    phi = poisson_solve(divergence(w))
    assert (leray_project(w) + gradient(phi) - w).sup_norm() < 1e-11


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_poisson_inverts_laplacian(seed):
    grid = Grid.cube(2, 16)
    s = ScalarField(grid, np.random.default_rng(seed).standard_normal(grid.shape))
    back = poisson_solve(laplacian(s))
    np.testing.assert_allclose(back.samples, s.samples - s.mean(), atol=1e-11)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_curl_of_gradient_vanishes(seed):
    grid = Grid.cube(3, 8)
    s = ScalarField(grid, _band_limited(grid, np.random.default_rng(seed)))
    assert curl(gradient(s)).sup_norm() < 1e-11
    assert divergence(curl(VectorField(grid, _band_limited(grid, np.random.default_rng(seed + 1), 3)))).sup_norm() < 1e-11
