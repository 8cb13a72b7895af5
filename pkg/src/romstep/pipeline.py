"""Stage orchestration: FOM -> POD -> ROM setup -> ROM runs -> comparison.

Stages talk to each other only through files in the output directory.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .cases import (actuator_case, shear_layer_grid, shear_layer_ic, taylor_green_ic)
from .config import CaseConfig, ConfigError
from .fom import AlgEigBoundCache, SnapshotArchive, alpha_family_bounds, run_fom
from .grid import assemble_operators, build_grid
from .pod import PodBasis, build_basis
from .rom import ADAPTIVE, CONSTANT, RomTrace, run_rom
from .romops import RomOperators, assemble_rom
from .stability import ErkScheme, EigenboundEstimate, ray_zmax
from .verification import (ComparisonReport, dt_ratio_series, eigenbound_accuracy,
                           rom_error_series, theorem2_check)

log = logging.getLogger(__name__)

CASE_CODES = {"A": 1, "B": 2, "C": 3, "D": 4}


@dataclass
class CaseSetup:
    grid: object
    ops: object
    u0: np.ndarray


def build_case(cfg: CaseConfig) -> CaseSetup:
    if cfg.case == "shear_layer":
        grid = shear_layer_grid(cfg.nx, cfg.ny)
        u0 = shear_layer_ic(grid)
    elif cfg.case == "actuator":
        case = actuator_case(build_grid(cfg.nx, cfg.ny, cfg.domain))
        grid, u0 = case.grid, case.u0
    else:
        grid = build_grid(cfg.nx, cfg.ny, cfg.domain)
        u0 = taylor_green_ic(grid)
    return CaseSetup(grid, assemble_operators(grid, cfg.Re), u0)


class Paths:
    def __init__(self, cfg: CaseConfig):
        self.root = Path(cfg.output)
        self.archive = self.root / "fom_snapshots"
        self.fom_trace = self.root / "fom_trace.csv"
        self.basis = self.root / "pod_basis"
        self.romops = self.root / "rom_operators"
        self.report = self.root / "report.txt"
        self.plots = self.root / "plot_data"

    def rom_trace(self, label: str, M: int) -> Path:
        return self.root / f"rom_{label}_M{M}.csv"

    def rom_coeffs(self, label: str, M: int) -> Path:
        return self.root / f"rom_{label}_M{M}_coeffs"


def _scheme(cfg):
    return ErkScheme.classic(cfg.stages)


def stage_fom(cfg: CaseConfig, setup: CaseSetup | None = None):
    setup = setup or build_case(cfg)
    p = Paths(cfg)
    arch, trace = run_fom(setup.ops, setup.u0, cfg.T, _scheme(cfg), cfg.safety,
                          cfg.fom_dt_max, cfg.stride, cfg.tol, meta={"case": cfg.case})
    arch.save(p.archive)
    trace.save(p.fom_trace)
    log.info("FOM: %d steps, %d snapshots", len(trace.rows) - 1, arch.K)
    return arch, trace


def stage_pod(cfg: CaseConfig, setup: CaseSetup | None = None) -> PodBasis:
    setup = setup or build_case(cfg)
    p = Paths(cfg)
    arch = SnapshotArchive.load(p.archive)
    if cfg.M_max > arch.K:
        raise ConfigError(f"rom.modes asks for {cfg.M_max} modes but only {arch.K} "
                          "snapshots exist")
    basis = build_basis(arch, setup.ops, cfg.M_max, cfg.M_bc)
    if basis.M < cfg.M_max:
        raise ConfigError(f"rom.modes asks for {cfg.M_max} modes but the snapshots only "
                          f"span {basis.M}")
    basis.save(p.basis, {"case": cfg.case})
    return basis


def stage_rom_setup(cfg: CaseConfig, setup: CaseSetup | None = None) -> RomOperators:
    setup = setup or build_case(cfg)
    p = Paths(cfg)
    basis = PodBasis.load(p.basis)
    romops = assemble_rom(setup.ops, basis)
    romops.save(p.romops, {"case": cfg.case})
    return romops


def boundary_coefficients(grid, basis: PodBasis):
    if basis.M_bc == 0:
        return lambda t: np.zeros(0)
    return lambda t: basis.a_bc(grid.boundary_vector(t))


def stage_rom_run(cfg: CaseConfig, setup: CaseSetup | None = None, modes=None):
    setup = setup or build_case(cfg)
    p = Paths(cfg)
    basis_all = PodBasis.load(p.basis)
    ops_all = RomOperators.load(p.romops)
    arch = SnapshotArchive.load(p.archive)
    abc_fn = boundary_coefficients(setup.grid, basis_all)
    out = {}
    for M in modes or cfg.modes:
        basis = basis_all.truncated(M)
        romops = ops_all.truncated(M)
        a0 = basis.project(setup.ops.omega, arch.X[:, 0], arch.ybc[:, 0])
        for label, mode in (("B", ADAPTIVE), ("C", CONSTANT)):
            tr = run_rom(romops, a0, cfg.T, _scheme(cfg), mode, cfg.dt_constant, abc_fn,
                         cfg.safety, cfg.rom_dt_max, cfg.tol)
            tr.save(p.rom_trace(label, M))
            tr.save_coefficients(p.rom_coeffs(label, M), {"M": M, "mode": mode})
            out[(label, M)] = tr
    return out


def load_rom_trace(cfg, label, M) -> RomTrace:
    p = Paths(cfg)
    return RomTrace.load(p.rom_trace(label, M), p.rom_coeffs(label, M))


@dataclass
class Analysis:
    report: ComparisonReport
    tables: dict  # file name -> (header, rows)


def analyse(cfg: CaseConfig, setup: CaseSetup | None = None) -> Analysis:
    """Everything the compare and plot-data stages report."""
    setup = setup or build_case(cfg)
    p = Paths(cfg)
    arch = SnapshotArchive.load(p.archive)
    _, fom_rows = io.read_csv(p.fom_trace)
    basis_all = PodBasis.load(p.basis)
    ops_all = RomOperators.load(p.romops)
    omega = setup.ops.omega
    rep = ComparisonReport()
    ratio_rows, imag_rows, best_rows, err_rows = [], [], [], []
    imag_rows += [(0, t, im) for t, im in fom_rows[:, [0, 3]]]
    for M in cfg.modes:
        basis = basis_all.truncated(M)
        romops = ops_all.truncated(M)
        trB = load_rom_trace(cfg, "B", M)
        trC = load_rom_trace(cfg, "C", M)
        rowsB = trB.as_array()
        t, r = dt_ratio_series(fom_rows, rowsB)
        rep.dt_ratio[f"M{M}"] = (t, r)
        ratio_rows += [(M, ti, ri) for ti, ri in zip(t, r)]
        imag_rows += [(M, ti, im) for ti, im in rowsB[:, [0, 3]]]
        th = theorem2_check(arch, setup.ops, romops, basis, _scheme(cfg), cfg.safety, cfg.tol)
        rep.theorem2[f"M{M}"] = th
        best_rows += [(M, ti, a, b, a / b) for ti, a, b in zip(th.times, th.dt_rom, th.dt_fom)]
        for label, tr in (("B", trB), ("C", trC), ("D", None)):
            te, e = rom_error_series(arch, basis, omega, tr)
            rep.errors[f"{label}_M{M}"] = (te, e)
            err_rows += [(M, CASE_CODES[label], ti, ei) for ti, ei in zip(te, e)]
    eig_rows = []
    Me = cfg.eig_M
    trE = load_rom_trace(cfg, "B", Me)
    a_end = trE.coeffs[-1][1]
    abc_fn = boundary_coefficients(setup.grid, basis_all)
    ea = eigenbound_accuracy(ops_all.truncated(Me), a_end, abc_fn(trE.coeffs[-1][0]))
    rep.eigen[f"M{Me}"] = ea
    eig_rows += [(0, z.real, z.imag, 0.0) for z in ea.eigenvalues]
    eig_rows += [(1, ea.lam_redeig.real, ea.lam_redeig.imag, 0.0),
                 (2, ea.lam_gersh.real, ea.lam_gersh.imag, 0.0),
                 (3, ea.lam_exact.real, ea.lam_exact.imag, 0.0)]
    eig_rows += [(4, c, ci, rad) for c, ci, rad in ea.discs]
    sig = basis_all.sigma
    tables = {
        "fig3_singular_values.csv": (["index", "sigma", "sigma_rel"],
                                     [(i + 1, s, s / sig[0]) for i, s in enumerate(sig)]),
        "fig4_ratio.csv": (["M", "t", "ratio"], ratio_rows),
        "fig4_imag_bound.csv": (["M", "t", "im_bound"], imag_rows),
        "fig5_bestapprox.csv": (["M", "t", "dt_rom", "dt_fom", "ratio"], best_rows),
        "fig6_errors.csv": (["M", "case", "t", "error"], err_rows),
        "fig9_eigs.csv": (["kind", "re", "im", "radius"], eig_rows),
    }
    return Analysis(rep, tables)


def stage_compare(cfg: CaseConfig, setup: CaseSetup | None = None) -> Analysis:
    an = analyse(cfg, setup)
    p = Paths(cfg)
    p.report.write_text(an.report.to_text())
    return an


def alpha_sweep_table(cfg: CaseConfig):
    rows = []
    for n in cfg.alpha_meshes:
        grid = shear_layer_grid(n, n)
        ops = assemble_operators(grid, cfg.alpha_Re)
        u = shear_layer_ic(grid)
        cache = AlgEigBoundCache.build(ops)
        for a, d, c in alpha_family_bounds(ops, cache, u, cfg.alphas):
            rows.append((n, a, d, c))
    return ["mesh", "alpha", "diffusive_bound", "convective_bound"], rows


def stability_boundary_table(cfg: CaseConfig, n_angles: int = 181):
    """Stability-region boundary in the upper-left half plane (RK order s)."""
    scheme = _scheme(cfg)
    rows = []
    for th in np.linspace(0.0, math.pi / 2, n_angles):
        d = EigenboundEstimate(math.cos(th), math.sin(th))
        if d.re_bound < 1e-12 and scheme.s <= 2:
            continue
        r = ray_zmax(scheme, d, cfg.tol)
        rows.append((th, -r * d.re_bound, r * d.im_bound))
    return ["angle", "re", "im"], rows


def stage_plot_data(cfg: CaseConfig, setup: CaseSetup | None = None) -> Path:
    an = analyse(cfg, setup)
    p = Paths(cfg)
    an.tables["fig2_stability_region.csv"] = stability_boundary_table(cfg)
    an.tables["fig10_alpha.csv"] = alpha_sweep_table(cfg)
    for name in sorted(an.tables):
        header, rows = an.tables[name]
        io.write_csv(p.plots / name, header, np.array(rows, dtype=float).reshape(-1, len(header)))
    (p.plots / "summary.txt").write_text(an.report.to_text())
    p.report.write_text(an.report.to_text())
    return p.plots


def run_pipeline(cfg: CaseConfig) -> None:
    setup = build_case(cfg)
    if cfg.run_fom:
        stage_fom(cfg, setup)
    if cfg.run_pod:
        stage_pod(cfg, setup)
    if cfg.run_rom:
        stage_rom_setup(cfg, setup)
        stage_rom_run(cfg, setup)
    if cfg.compare:
        stage_plot_data(cfg, setup)  # also writes the comparison report
