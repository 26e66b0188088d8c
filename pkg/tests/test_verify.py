import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsverify import (
    FluidParams,
    Grid,
    SolutionFamily,
    TimeProfile,
    Tolerances,
    cell_energy,
    convergence_study,
    divergence_residual,
    exit_code,
    initial_condition_check,
    momentum_residual,
    ppe_consistency,
    run_family,
    umbilical_audit,
)
from nsverify import verify as V

PI = math.pi
FLUID = FluidParams(0.02, 1.0)
ABC = (1.0, 0.5, 0.25)


def test_taylor_energy_constant_and_decay():
    grid = Grid.cube(2, 16)
    tv = SolutionFamily.taylor_vortex()
    assert cell_energy(tv, FLUID, grid, 0.0) == pytest.approx(2.0, abs=1e-13)
    assert cell_energy(tv, FLUID, grid, 1.0) == pytest.approx(2.0 * math.exp(-4 * PI**2 * 0.02), rel=1e-12)


def test_abc_energy_constant():
    # each component averages (a^2 + c^2)/2 over a cell of volume 8
    a, b, c = ABC
    e0 = cell_energy(SolutionFamily.abc_flow(*ABC), FLUID, Grid.cube(3, 16), 0.0)
    assert e0 == pytest.approx(8 * (a * a + b * b + c * c), rel=1e-13)


def test_initial_condition_is_exact():
    fam = SolutionFamily.forced_abc_flow(*ABC, TimeProfile.constant(2.0))
    assert initial_condition_check(fam, Grid.cube(3, 8)) == 0.0


def test_residual_helpers_small():
    fam = SolutionFamily.abc_flow(*ABC)
    grid = Grid.cube(3, 16)
    assert momentum_residual(fam, FLUID, grid, 0.5).sup_norm() < 1e-9
    assert divergence_residual(fam, FLUID, grid, 0.5).sup_norm() < 1e-10
    assert ppe_consistency(fam, FLUID, grid, 0.5) < 1e-9
    assert all(u < 1e-10 for _, u in umbilical_audit(fam, FLUID, grid, (0.0, 0.1, 1.0)))
    with pytest.raises(ValueError):
        momentum_residual(fam, FLUID, grid, -0.1)


def test_stream_prediction_formula():
    fam = SolutionFamily.abc_exp_forced(1, 1, 1, 1, 1)
    t = 0.5
    h = 1 - math.exp(-t)
    assert V.stream_residual_prediction(fam, FLUID, t) == pytest.approx(PI * h * math.exp(-PI**2 * 0.02 * t))
    assert V.stream_residual_prediction(SolutionFamily.abc_flow(*ABC), FLUID, t) == 0.0


def test_stream_family_measured_value_at_half():
    fam = SolutionFamily.abc_exp_forced(1, 1, 1, 1, 1)
    r = momentum_residual(fam, FLUID, Grid.cube(3, 16), 0.5)
    assert r.sup_norm() == pytest.approx(V.stream_residual_prediction(fam, FLUID, 0.5), abs=1e-8)


def test_run_family_report_shape():
    fam = SolutionFamily.taylor_vortex()
    rep = run_family(fam, FLUID, Grid.cube(2, 16), (0.0, 0.5))
    assert rep.exit_code == V.EXIT_OK
    d = rep.to_dict()
    assert d["family"] == "TaylorVortex2D"
    row = d["norms"][1]
    for key in ("momentum_sup", "momentum_l2", "divergence_sup", "umbilical_sup", "ppe_pressure_sup_err",
                "inertial_closed_form_sup_err"):
        assert key in row
    assert d["verdicts"]["energy_decay"]["verdict"] == V.PASS
    assert any("opposite sign" in n for n in d["notes"])


def test_run_family_contradiction_and_tolerance_codes():
    grid = Grid.cube(3, 8)
    rep = run_family(SolutionFamily.abc_exp_forced(1, 1, 1, 1, 1), FLUID, grid, (0.0, 0.5))
    assert rep.verdicts["umbilical_zero"]["verdict"] == V.CONTRADICTS
    assert rep.verdicts["divergence_free"]["verdict"] == V.PASS
    assert rep.exit_code == V.EXIT_CONTRADICTION
    bad = run_family(SolutionFamily.abc_flow(*ABC), FLUID, grid, (0.5,), velocity_scale=1.01)
    assert bad.exit_code == V.EXIT_TOLERANCE
    # a tolerance failure wins over a contradiction
    assert exit_code([rep, bad]) == V.EXIT_TOLERANCE


def test_tight_tolerances_flip_verdicts():
    rep = run_family(SolutionFamily.taylor_vortex(), FLUID, Grid.cube(2, 16), (0.5,), tol=Tolerances(momentum=1e-30))
    assert rep.verdicts["satisfies_momentum"]["verdict"] == V.FAIL


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("NS_VERIFY_THREADS", "3")
    assert V.worker_count() == 3
    monkeypatch.setenv("NS_VERIFY_THREADS", "0")
    with pytest.raises(ValueError):
        V.worker_count()


def test_threads_do_not_change_results():
    fam = SolutionFamily.abc_flow(*ABC)
    grid = Grid.cube(3, 8)
    a = run_family(fam, FLUID, grid, (0.0, 0.3, 0.9), workers=1).to_dict()
    b = run_family(fam, FLUID, grid, (0.0, 0.3, 0.9), workers=3).to_dict()
    assert a == b


@pytest.mark.parametrize("kind", ["gradient", "laplacian"])
def test_fd_convergence_order(kind):
    res = convergence_study(kind, [16, 32, 64])
    assert 1.9 <= res.order <= 2.1


def test_spectral_convergence_is_at_rounding():
    res = convergence_study("laplacian", [8, 16, 32], backend="spectral")
    assert max(e for _, e in res.rows) < 1e-11


def test_duhamel_panel_order_is_four():
    res = convergence_study("duhamel", [4, 8, 16])
    assert res.order == pytest.approx(4.0, abs=0.1)
    with pytest.raises(ValueError):
        convergence_study("duhamel", [4, 8])
    with pytest.raises(ValueError):
        convergence_study("spline", [4, 8, 16])


@settings(max_examples=10, deadline=None)
@given(scale=st.floats(0.9, 0.995) | st.floats(1.005, 1.1), t=st.floats(0.0, 1.0))
def test_any_velocity_corruption_is_detected(scale, t):
    fam = SolutionFamily.taylor_vortex()
    assert momentum_residual(fam, FLUID, Grid.cube(2, 16), t, velocity_scale=scale).sup_norm() > 1e-3


@settings(max_examples=10, deadline=None)
@given(a=st.floats(-2, 2), b=st.floats(-2, 2), c=st.floats(-2, 2), t=st.floats(0, 2))
def test_abc_certifies_for_any_coefficients(a, b, c, t):
    fam = SolutionFamily.abc_flow(a, b, c)
    scale = 1 + a * a + b * b + c * c
    assert momentum_residual(fam, FLUID, Grid.cube(3, 8), t).sup_norm() < 1e-12 * scale * 100
