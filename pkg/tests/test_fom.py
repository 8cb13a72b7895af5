import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from romstep.cases import shear_layer_grid, shear_layer_ic, taylor_green_ic
from romstep.fom import (AlgEigBoundCache, BlowUp, FomState, FomStepper, SnapshotArchive,
                         alpha_family_bounds, divergence_residual, fom_eigenbounds,
                         kinetic_energy, rk4_projection_step, run_fom, trapezoid_weights)
from romstep.grid import assemble_operators, build_grid, convection_matrix
from romstep.stability import RK4, max_timestep

from conftest import channel_bc, periodic_ops, random_solenoidal


def _dense_rho(ops, mat):
    return float(np.max(np.abs(np.linalg.eigvals(mat.toarray() / ops.omega[:, None]))))


def test_zero_flow_bounds(ops8):
    cache = AlgEigBoundCache.build(ops8)
    b = fom_eigenbounds(ops8, cache, np.zeros(ops8.grid.N_V))
    assert b.im_bound == 0.0
    assert b.re_bound >= _dense_rho(ops8, ops8.D) * (1 - 1e-12)


def test_uniform_grid_diffusion_bound():
    ops = periodic_ops(4, Re=3.0)
    h = ops.grid.hx
    b = fom_eigenbounds(ops, AlgEigBoundCache.build(ops), np.zeros(ops.grid.N_V))
    assert b.re_bound == pytest.approx(4 / 3.0 * (2 / h ** 2), rel=1e-12)


def test_bounds_dominate_dense_spectra(ops8, rng):
    cache = AlgEigBoundCache.build(ops8)
    rho_d = _dense_rho(ops8, ops8.D)
    for _ in range(5):
        u = random_solenoidal(ops8, rng)
        b = fom_eigenbounds(ops8, cache, u)
        assert b.re_bound >= rho_d * (1 - 1e-12)
        assert b.im_bound >= _dense_rho(ops8, convection_matrix(ops8, u)) * (1 - 1e-12)


def test_bounds_dominate_with_boundaries(rng):
    ops = assemble_operators(build_grid(6, 5, (0, 1.2, 0, 1), channel_bc()), 20.0)
    cache = AlgEigBoundCache.build(ops)
    y = ops.grid.boundary_vector(0.4)
    u = random_solenoidal(ops, rng, y)
    b = fom_eigenbounds(ops, cache, u, y)
    C = convection_matrix(ops, u, y).toarray() / ops.omega[:, None]
    skew = 0.5 * (C - C.T * (ops.omega[None, :] / ops.omega[:, None]))
    assert b.im_bound >= float(np.max(np.abs(np.linalg.eigvals(skew).imag))) * (1 - 1e-12)
    assert b.re_bound >= _dense_rho(ops, ops.D) * (1 - 1e-12)


def test_alpha_family_symmetric_on_uniform_grid():
    ops = periodic_ops(6, 1.0)
    cache = AlgEigBoundCache.build(ops)
    rows = alpha_family_bounds(ops, cache, np.zeros(ops.grid.N_V), [0.0, 1.0])
    assert rows[0, 1] == pytest.approx(rows[1, 1], abs=1e-12)


def test_alpha_zero_not_worse_than_one_for_shear_layer():
    grid = shear_layer_grid(20, 20)
    ops = assemble_operators(grid, 100.0)
    rows = alpha_family_bounds(ops, AlgEigBoundCache.build(ops), shear_layer_ic(grid),
                               [0.0, 1.0])
    assert rows[0, 2] <= rows[1, 2]


def test_alpha_family_dominates_dense_on_6x6(rng):
    ops = periodic_ops(6, 1.0)
    cache = AlgEigBoundCache.build(ops)
    u = random_solenoidal(ops, rng)
    rho_d = _dense_rho(ops, ops.D)
    rho_c = _dense_rho(ops, convection_matrix(ops, u))
    for a, d, c in alpha_family_bounds(ops, cache, u, np.linspace(-1, 2, 13)):
        assert d >= rho_d * (1 - 1e-12)
        assert c >= rho_c * (1 - 1e-12)


def test_alpha_out_of_range(ops8):
    with pytest.raises(ValueError):
        alpha_family_bounds(ops8, AlgEigBoundCache.build(ops8), np.zeros(ops8.grid.N_V), [2.5])


def test_zero_state_stays_zero(ops8):
    st_ = rk4_projection_step(ops8, FomState(np.zeros(ops8.grid.N_V), None, 0.0), 0.01)
    assert not np.any(st_.u)


def test_taylor_green_decay_rate():
    grid = build_grid(32, 32, (0, 2 * math.pi, 0, 2 * math.pi))
    ops = assemble_operators(grid, 100.0)
    u0 = FomStepper(ops).project(taylor_green_ic(grid), 0.0)
    dt = 1e-3
    s1 = rk4_projection_step(ops, FomState(u0, None, 0.0), dt)
    rate = math.log(kinetic_energy(ops, s1.u) / kinetic_energy(ops, u0)) / dt
    assert rate == pytest.approx(-4.0 / 100.0, rel=0.01)


def test_shear_layer_single_step():
    grid = shear_layer_grid(32, 32)
    ops = assemble_operators(grid, 1000.0)
    u = shear_layer_ic(grid)
    dt = max_timestep(RK4, fom_eigenbounds(ops, AlgEigBoundCache.build(ops), u))
    s1 = rk4_projection_step(ops, FomState(u, None, 0.0), dt)
    assert np.all(np.isfinite(s1.u))
    assert divergence_residual(ops, s1.u) < 1e-8


def test_zero_horizon_archive(ops8, rng):
    u = random_solenoidal(ops8, rng)
    arch, trace = run_fom(ops8, u, 0.0)
    assert arch.K == 1
    assert arch.dts.tolist() == [1.0]
    assert len(trace.rows) == 1 and math.isnan(trace.rows[0][1])


def test_run_energy_and_divergence(shear_small):
    tr = shear_small["trace"].as_array()
    e = tr[:, 5]
    assert np.all(np.diff(e) <= 1e-10 * e[:-1])
    assert tr[:, 6].max() < 1e-8
    assert tr[-1, 0] == 1.0


def test_archive_round_trip(tmp_path, shear_small):
    arch = shear_small["arch"]
    arch.save(tmp_path / "snap")
    back = SnapshotArchive.load(tmp_path / "snap")
    assert np.array_equal(back.X, arch.X)
    assert np.array_equal(back.times, arch.times)
    assert back.dts.sum() == pytest.approx(arch.T)


def test_stride_keeps_endpoints(ops8, rng):
    u = random_solenoidal(ops8, rng)
    arch, trace = run_fom(ops8, u, 0.05, stride=3, dt_max=0.004)
    assert arch.times[0] == 0.0 and arch.times[-1] == 0.05
    assert arch.K == len(range(0, len(trace.rows) - 1, 3)) + (1 if (len(trace.rows) - 1) % 3 else 0)


def test_inlet_honoured_at_stage_times(actuator_small):
    arch, grid = actuator_small["arch"], actuator_small["grid"]
    for j in range(arch.K):
        t = arch.times[j]
        ang = math.pi / 6 * math.sin(t / 2)
        assert np.allclose(arch.ybc[: grid.ny, j], math.cos(ang))
    ops = actuator_small["ops"]
    for j in range(arch.K):
        assert divergence_residual(ops, arch.X[:, j], arch.ybc[:, j]) < 1e-8


def test_blowup_detected():
    ops = periodic_ops(6, 1.0)
    u = random_solenoidal(ops, np.random.default_rng(0)) * 1e7
    with pytest.raises(BlowUp):
        run_fom(ops, u, 1.0, dt_max=1.0, safety=1.0)


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=20))
def test_trapezoid_weights_sum_to_span(steps):
    times = np.concatenate([[0.0], np.cumsum(steps)])
    w = trapezoid_weights(times)
    assert np.all(w > 0)
    assert w.sum() == pytest.approx(times[-1], rel=1e-12)
