"""Test-case definitions: shear-layer roll-up, actuator disk, Taylor-Green vortex."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import (DIRICHLET, OUTFLOW, PERIODIC, BoundarySpec, PressureSolver,
                   StaggeredGrid, assemble_operators, build_grid)

SHEAR_DOMAIN = (0.0, 2 * math.pi, 0.0, 2 * math.pi)
ACTUATOR_DOMAIN = (0.0, 10.0, -2.0, 2.0)
SHEAR_DELTA = math.pi / 15
SHEAR_EPS = 1.0 / 20
DISK_FORCE = 0.25
DISK_X = 2.0
DISK_DIAMETER = 1.0


def _is_periodic(grid: StaggeredGrid) -> bool:
    return all(grid.bc.kind(s) == PERIODIC for s in ("left", "right", "bottom", "top"))


def _project(grid: StaggeredGrid, u: np.ndarray, Re: float = 1.0) -> np.ndarray:
    ops = assemble_operators(grid, Re)
    yb = grid.boundary_vector(0.0)
    y_M = ops.Bmaps["M"] @ yb if len(yb) else None
    return PressureSolver(ops).project(u, y_M)[0]


def shear_layer_ic(grid: StaggeredGrid, project: bool = True) -> np.ndarray:
    """Double shear layer with a small sinusoidal v perturbation."""
    if not _is_periodic(grid):
        raise ValueError("the shear layer needs a fully periodic grid")
    if not np.allclose(grid.domain, SHEAR_DOMAIN):
        raise ValueError(f"the shear layer lives on [0, 2pi]^2, got {grid.domain}")
    _, yu = grid.u_points()
    xv, _ = grid.v_points()
    d = SHEAR_DELTA
    u = 1.0 + np.where(yu <= math.pi, np.tanh((yu - math.pi / 2) / d),
                       np.tanh((3 * math.pi / 2 - yu) / d))
    v = SHEAR_EPS * np.sin(xv)
    u0 = np.concatenate([u, v])
    return _project(grid, u0) if project else u0


def shear_layer_grid(nx: int = 100, ny: int = 100) -> StaggeredGrid:
    return build_grid(nx, ny, SHEAR_DOMAIN)


def taylor_green_ic(grid: StaggeredGrid) -> np.ndarray:
    """u = -cos x sin y, v = sin x cos y on a periodic [0, 2pi]^2 grid."""
    if not _is_periodic(grid):
        raise ValueError("the Taylor-Green vortex needs a fully periodic grid")
    xu, yu = grid.u_points()
    xv, yv = grid.v_points()
    return np.concatenate([-np.cos(xu) * np.sin(yu), np.sin(xv) * np.cos(yv)])


def inlet_angle(t: float) -> float:
    return math.pi / 6 * math.sin(t / 2)


def _inlet(t, x, y):
    a = inlet_angle(t)
    return math.cos(a), math.sin(a)


def disk_force(hx: float):
    """Momentum sink spread over one cell width at the disk location."""
    def force(x, y):
        on = (np.abs(x - DISK_X) < 0.5 * hx) & (np.abs(y) <= 0.5 * DISK_DIAMETER)
        return np.where(on, -DISK_FORCE / hx, 0.0), np.zeros_like(x)
    return force


@dataclass
class ActuatorCase:
    grid: StaggeredGrid
    u0: np.ndarray
    bc: BoundarySpec
    force: np.ndarray


def actuator_case(grid: StaggeredGrid) -> ActuatorCase:
    """Inflow on the left, outflow elsewhere, disk sink at (2, 0).

    ``grid`` only fixes resolution and domain; the returned case carries a grid
    rebuilt with the actuator boundary conditions.
    """
    if not np.allclose(grid.domain, ACTUATOR_DOMAIN):
        raise ValueError(f"the actuator case lives on [0,10]x[-2,2], got {grid.domain}")
    hx = (ACTUATOR_DOMAIN[1] - ACTUATOR_DOMAIN[0]) / grid.nx
    bc = BoundarySpec(left=DIRICHLET, right=OUTFLOW, bottom=OUTFLOW, top=OUTFLOW,
                      values={"left": _inlet}, force=disk_force(hx))
    g = build_grid(grid.nx, grid.ny, ACTUATOR_DOMAIN, bc)
    u0 = np.concatenate([np.ones(g.n_u), np.zeros(g.n_v)])
    return ActuatorCase(g, u0, bc, g.body_force())


def actuator_grid(nx: int = 200, ny: int = 80) -> StaggeredGrid:
    return actuator_case(build_grid(nx, ny, ACTUATOR_DOMAIN)).grid
