import math

import numpy as np
import pytest

from romstep.cases import (SHEAR_EPS, actuator_case, inlet_angle, shear_layer_grid,
                           shear_layer_ic, taylor_green_ic)
from romstep.fom import divergence_residual
from romstep.grid import assemble_operators, build_grid


def test_shear_profile_centre_and_perturbation():
    grid = shear_layer_grid(40, 40)
    u0 = shear_layer_ic(grid, project=False)
    xu, yu = grid.u_points()
    xv, yv = grid.v_points()
    u, v = u0[: grid.n_u], u0[grid.n_u:]
    # rows straddle y = pi/2 symmetrically: their mean is tanh(0) + 1
    j = np.argmin(np.abs(grid.y.centers - math.pi / 2))
    near = np.isclose(yu, grid.y.centers[j])
    d = (grid.y.centers[j] - math.pi / 2) / (math.pi / 15)
    assert np.allclose(u[near], 1 + math.tanh(d))
    at = np.isclose(xv, math.pi / 2, atol=grid.hx / 2 + 1e-12)
    assert np.allclose(v[at], SHEAR_EPS * np.sin(xv[at]))
    assert np.allclose(SHEAR_EPS * math.sin(math.pi / 2), 0.05)


def test_shear_ic_projected():
    grid = shear_layer_grid(32, 32)
    ops = assemble_operators(grid, 1000.0)
    assert divergence_residual(ops, shear_layer_ic(grid)) < 1e-8


def test_shear_needs_periodic_domain():
    with pytest.raises(ValueError):
        shear_layer_ic(build_grid(8, 8, (0, 1, 0, 1)))
    act = actuator_case(build_grid(20, 8, (0, 10, -2, 2))).grid
    with pytest.raises(ValueError):
        shear_layer_ic(act)
    with pytest.raises(ValueError):
        taylor_green_ic(act)


def test_inlet_angles():
    assert inlet_angle(0.0) == 0.0
    assert inlet_angle(math.pi) == pytest.approx(math.pi / 6)
    g = actuator_case(build_grid(20, 8, (0, 10, -2, 2))).grid
    y = g.boundary_vector(math.pi)
    assert np.allclose(y[: g.ny], math.cos(math.pi / 6))
    assert np.allclose(y[g.ny:], math.sin(math.pi / 6))


def test_actuator_setup():
    case = actuator_case(build_grid(200, 80, (0, 10, -2, 2)))
    g = case.grid
    assert g.bc.left == "dirichlet"
    assert (g.bc.right, g.bc.bottom, g.bc.top) == ("outflow",) * 3
    assert np.all(case.u0[: g.n_u] == 1.0) and not np.any(case.u0[g.n_u:])
    ops = assemble_operators(g, 100.0)
    total = float(case.force @ ops.omega)
    assert total == pytest.approx(-0.25, rel=0.02)
    assert not np.any(case.force[g.n_u:])


def test_actuator_wrong_domain():
    with pytest.raises(ValueError):
        actuator_case(build_grid(20, 8, (0, 1, 0, 1)))
