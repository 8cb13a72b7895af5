import numpy as np
import pytest

from romstep.fom import SnapshotArchive, trapezoid_weights
from romstep.grid import convection_matrix
from romstep.pod import build_basis
from romstep.rom import CONSTANT, RomTrace, run_rom
from romstep.romops import RomOperators, assemble_rom, convective_matrix
from romstep.verification import (ComparisonReport, dt_ratio_series, eigenbound_accuracy,
                                  gershgorin_discs, interpolate_coefficients, rom_error_series,
                                  theorem2_check)

from conftest import random_solenoidal


def _traces(sm):
    basis, ops, arch, r = sm["basis"], sm["ops"], sm["arch"], sm["romops"]
    a0 = basis.project(ops.omega, arch.X[:, 0])
    return (run_rom(r, a0, arch.T), run_rom(r, a0, arch.T, mode=CONSTANT, dt=0.01))


def test_identical_traces_ratio_one(shear_small):
    rows = shear_small["trace"].as_array()
    t, r = dt_ratio_series(rows, rows)
    assert r.size and np.all(r == 1.0)


def test_ratio_uses_previous_value():
    fom = np.array([[0.0, 0.1], [0.1, 0.2], [0.3, 0.2], [0.5, 0.2], [0.7, np.nan]])
    rom = np.array([[0.0, 0.25], [0.25, 0.25], [0.5, 0.25], [0.75, np.nan]])
    t, r = dt_ratio_series(np.pad(fom, ((0, 0), (0, 5))), np.pad(rom, ((0, 0), (0, 4))))
    # closing rows and each run's last full step are dropped
    assert t.tolist() == [0.0, 0.25]
    assert r == pytest.approx([2.5, 1.25])


def test_best_approx_full_rank_exact(shear_small):
    ops, arch = shear_small["ops"], shear_small["arch"]
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        b = build_basis(arch, ops, arch.K)
    _, e = rom_error_series(arch, b, ops.omega)
    assert e.max() < 1e-8


def test_reference_against_itself_is_zero(shear_small):
    ops, arch, basis = shear_small["ops"], shear_small["arch"], shear_small["basis"]
    A = basis.project(ops.omega, arch.X)
    tr = RomTrace(coeffs=[(t, A[:, j]) for j, t in enumerate(arch.times)])
    _, e_tr = rom_error_series(arch, basis, ops.omega, tr)
    _, e_best = rom_error_series(arch, basis, ops.omega)
    assert np.allclose(e_tr, e_best, atol=1e-14)


def test_best_approx_below_rom_errors(shear_small):
    sm = shear_small
    trB, trC = _traces(sm)
    _, eb = rom_error_series(sm["arch"], sm["basis"], sm["ops"].omega)
    for tr in (trB, trC):
        t, e = rom_error_series(sm["arch"], sm["basis"], sm["ops"].omega, tr)
        assert np.all(eb[: len(e)] <= e + 1e-12)


def test_interpolation_outside_range(shear_small):
    trB, _ = _traces(shear_small)
    with pytest.raises(ValueError):
        interpolate_coefficients(trB, [trB.coefficient_times()[-1] + 1.0])


def test_theorem2_flags_small_shear(shear_small):
    sm = shear_small
    th = theorem2_check(sm["arch"], sm["ops"], sm["romops"], sm["basis"])
    assert th.times.shape == th.dt_rom.shape == th.dt_fom.shape
    assert th.fraction == 1.0
    assert np.all(th.ratio >= 1.0 - 1e-12)


def test_theorem2_dense_toy(ops8, rng):
    X = np.column_stack([random_solenoidal(ops8, rng) for _ in range(3)])
    times = np.array([0.0, 0.5, 1.0])
    arch = SnapshotArchive(X, trapezoid_weights(times), times, np.zeros((0, 3)), {})
    basis = build_basis(arch, ops8, 3)
    r = assemble_rom(ops8, basis)
    u = X[:, 1]
    a = basis.project(ops8.omega, u)
    rho_rom = np.max(np.abs(np.linalg.eigvals(convective_matrix(r, a))))
    rho_fom = np.max(np.abs(np.linalg.eigvals(
        convection_matrix(ops8, u).toarray() / ops8.omega[:, None])))
    assert rho_rom <= rho_fom * (1 + 1e-12)
    w = 1 / np.sqrt(ops8.omega)
    rho_d = np.max(np.abs(np.linalg.eigvalsh(w[:, None] * ops8.D.toarray() * w[None, :])))
    assert r.rho_Dr <= rho_d * (1 + 1e-12)


def test_single_block_accuracy_exact(shear_small):
    r = shear_small["romops"].truncated(1)
    ea = eigenbound_accuracy(r, np.array([0.7]))
    assert ea.eps_redeig == pytest.approx(0.0, abs=1e-12)


def test_accuracy_two_blocks_hand_example():
    M = 2
    Cr = np.zeros((M, M, M))
    Cr[0] = [[0.0, 1.0], [-1.0, 0.0]]
    Cr[1] = [[0.0, 2.0], [-2.0, 0.0]]
    r = RomOperators(np.zeros((M, M)), Cr, np.zeros((0, M, M)), np.zeros((M, 0)),
                     np.zeros((M, 0)), np.zeros(M))
    ea = eigenbound_accuracy(r, np.array([1.0, -1.0]))
    # J = [[0,-1],[1,0]] has eigenvalues +-i; bound 1 + 2 = 3; Gershgorin row sum 1
    assert ea.lam_exact == pytest.approx(1j)
    assert ea.lam_redeig == pytest.approx(3j)
    assert ea.lam_gersh == pytest.approx(1j)
    assert ea.eps_redeig == pytest.approx(2.0)
    assert ea.eps_gersh == pytest.approx(0.0)


def test_gershgorin_discs_cover_spectrum(shear_small, rng):
    r = shear_small["romops"]
    J = convective_matrix(r, rng.standard_normal(r.M))
    discs = gershgorin_discs(J)
    for lam in np.linalg.eigvals(J):
        assert np.any(np.abs(lam - (discs[:, 0] + 1j * discs[:, 1])) <= discs[:, 2] + 1e-12)


def test_report_lines(shear_small):
    sm = shear_small
    rep = ComparisonReport()
    rows = sm["trace"].as_array()
    rep.dt_ratio["M12"] = dt_ratio_series(rows, rows)
    rep.errors["D_M12"] = rom_error_series(sm["arch"], sm["basis"], sm["ops"].omega)
    rep.eigen["M12"] = eigenbound_accuracy(sm["romops"], np.ones(sm["romops"].M))
    text = rep.to_text()
    assert "dt_ratio M12: min=1 max=1" in text
    assert text.count("\n") == 3
