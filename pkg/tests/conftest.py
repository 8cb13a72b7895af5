import math

import hypothesis
import numpy as np
import pytest

from romstep.cases import ACTUATOR_DOMAIN, actuator_case, shear_layer_grid, shear_layer_ic
from romstep.fom import run_fom
from romstep.grid import (DIRICHLET, OUTFLOW, BoundarySpec, PressureSolver,
                          assemble_operators, build_grid)
from romstep.pod import build_basis
from romstep.romops import assemble_rom

hypothesis.settings.register_profile("ci", deadline=None, max_examples=50)
hypothesis.settings.load_profile("ci")


def periodic_ops(n=8, Re=1.0, domain=(0.0, 2 * math.pi, 0.0, 2 * math.pi)):
    return assemble_operators(build_grid(n, n, domain), Re)


def random_solenoidal(ops, rng, y_bc=None):
    u = rng.standard_normal(ops.grid.N_V)
    y_M = ops.Bmaps["M"] @ y_bc if y_bc is not None and len(y_bc) else None
    return PressureSolver(ops).project(u, y_M)[0]


def channel_bc():
    """Parabolic-ish inflow on the left, outflow on the right, walls at rest."""
    inflow = lambda t, x, y: (1.0 + 0.2 * np.sin(t) + 0 * y, 0.0 * y)
    wall = lambda t, x, y: (0.0 * x, 0.0 * x)
    return BoundarySpec(left=DIRICHLET, right=OUTFLOW, bottom=DIRICHLET, top=DIRICHLET,
                        values={"left": inflow, "bottom": wall, "top": wall})


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def ops8():
    return periodic_ops(8, 1.0)


@pytest.fixture(scope="session")
def shear_small():
    """16x16 shear layer, Re 200, T = 1: archive, operators, basis and ROM."""
    grid = shear_layer_grid(16, 16)
    ops = assemble_operators(grid, 200.0)
    arch, trace = run_fom(ops, shear_layer_ic(grid), 1.0)
    basis = build_basis(arch, ops, 12)
    return dict(grid=grid, ops=ops, arch=arch, trace=trace, basis=basis,
                romops=assemble_rom(ops, basis))


@pytest.fixture(scope="session")
def actuator_small():
    """Coarse actuator disk (20x8) to t = 2 with a two-mode boundary basis."""
    case = actuator_case(build_grid(20, 8, ACTUATOR_DOMAIN))
    ops = assemble_operators(case.grid, 100.0)
    arch, trace = run_fom(ops, case.u0, 2.0)
    basis = build_basis(arch, ops, 10, 2)
    return dict(grid=case.grid, ops=ops, arch=arch, trace=trace, basis=basis,
                romops=assemble_rom(ops, basis))


# acceptance criteria: number -> list of (ok, detail); printed after the run
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        ACCEPTANCE.setdefault(number, []).append((bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        rows = ACCEPTANCE[number]
        ok = all(r[0] for r in rows)
        detail = "; ".join(d for _, d in rows)
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
