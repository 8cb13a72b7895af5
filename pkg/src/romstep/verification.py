"""Comparative analytics: timestep ratios, ROM errors, best-approximation
timestep check and eigenbound accuracy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fom import AlgEigBoundCache, SnapshotArchive, fom_eigenbounds
from .grid import DiscreteOperators
from .pod import PodBasis
from .rom import RomTrace, redeig_bounds
from .romops import RomOperators, boundary_matrix, convective_matrix
from .stability import RK4, ErkScheme, max_timestep


def _omega_norm(omega, u):
    return np.sqrt(np.einsum("i,i...->...", omega, u * u))


def interpolate_coefficients(trace: RomTrace, times) -> np.ndarray:
    """Linear interpolation in time of the stored ROM coefficients."""
    ct = trace.coefficient_times()
    A = trace.coefficient_matrix()
    times = np.asarray(times, dtype=float)
    if ct.size == 0 or times.min() < ct[0] - 1e-12 or times.max() > ct[-1] + 1e-12:
        raise ValueError("requested times fall outside the ROM trajectory")
    return np.array([np.interp(times, ct, row) for row in A])


def rom_error_series(arch: SnapshotArchive, basis: PodBasis, omega,
                     trace: RomTrace | None = None):
    """Relative Omega-norm error against the snapshots.

    With ``trace=None`` the best approximation Phi^T Omega (u - F a_bc) is used.
    Returns ``(times, errors)``.
    """
    times = arch.times
    if trace is not None:
        ct = trace.coefficient_times()
        keep = (times >= ct[0] - 1e-12) & (times <= ct[-1] + 1e-12)
        if not np.any(keep):
            raise ValueError("ROM trajectory and archive do not overlap in time")
        times = times[keep]
        X = arch.X[:, keep]
        ybc = arch.ybc[:, keep]
        A = interpolate_coefficients(trace, times)
    else:
        X, ybc = arch.X, arch.ybc
        A = basis.project(omega, X, ybc)
    U = basis.Phi @ A
    if basis.M_bc:
        U = U + basis.F_inhom @ basis.a_bc(ybc)
    ref = _omega_norm(omega, X)
    err = _omega_norm(omega, U - X) / np.where(ref > 0, ref, 1.0)
    return times, err


@dataclass
class Theorem2Result:
    times: np.ndarray
    dt_rom: np.ndarray
    dt_fom: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return self.dt_rom / self.dt_fom

    @property
    def flags(self) -> np.ndarray:
        return self.dt_rom >= self.dt_fom * (1 - 1e-12)

    @property
    def fraction(self) -> float:
        return float(np.mean(self.flags))


def theorem2_check(arch: SnapshotArchive, ops: DiscreteOperators, romops: RomOperators,
                   basis: PodBasis, scheme: ErkScheme = RK4, safety: float = 1.0,
                   tol: float = 1e-6) -> Theorem2Result:
    """Best-approximation ROM timestep versus the FOM timestep per snapshot."""
    cache = AlgEigBoundCache.build(ops)
    A = basis.project(ops.omega, arch.X, arch.ybc)
    dr, df = [], []
    for j in range(arch.K):
        yb = arch.ybc[:, j]
        a_bc = basis.a_bc(yb) if basis.M_bc else None
        dr.append(max_timestep(scheme, redeig_bounds(romops, A[:, j], a_bc), safety, tol=tol))
        df.append(max_timestep(scheme, fom_eigenbounds(ops, cache, arch.X[:, j], yb),
                               safety, tol=tol))
    return Theorem2Result(arch.times.copy(), np.array(dr), np.array(df))


@dataclass
class EigenAccuracy:
    eps_redeig: float
    eps_gersh: float
    lam_exact: complex
    lam_redeig: complex
    lam_gersh: complex
    eigenvalues: np.ndarray
    discs: np.ndarray  # (centre_re, centre_im, radius) per row


def gershgorin_discs(J: np.ndarray) -> np.ndarray:
    d = np.diag(J)
    r = np.sum(np.abs(J), axis=1) - np.abs(d)
    return np.column_stack([d.real, np.zeros_like(r), r])


def eigenbound_accuracy(romops: RomOperators, a, a_bc=None) -> EigenAccuracy:
    """Extremal eigenvalue of the reduced convective Jacobian against the
    reduced-eigenbound corner and the Gershgorin corner."""
    J = convective_matrix(romops, a)
    conv_re = float(np.abs(a) @ romops.rho_Cr_sym)
    if romops.M_bc and a_bc is not None:
        J = J + boundary_matrix(romops, a_bc)
        conv_re += float(np.abs(a_bc) @ romops.rho_Cl_sym)
    conv_im = redeig_bounds(romops, a, a_bc).im_bound
    ev = np.linalg.eigvals(J)
    ev_up = np.where(ev.imag < 0, np.conj(ev), ev)
    lam = complex(ev_up[np.argmax(np.abs(ev_up))])
    sign = -1.0 if lam.real < 0 else 1.0
    est = complex(sign * conv_re, conv_im)
    Js, Jk = 0.5 * (J + J.T), 0.5 * (J - J.T)
    # |centre| + radius is the absolute row sum for both parts
    g_re = float(np.max(np.sum(np.abs(Js), 1)))
    g_im = float(np.max(np.sum(np.abs(Jk), 1)))
    gers = complex(sign * g_re, g_im)
    mod = abs(lam)
    if mod == 0:
        eps_r = 0.0 if abs(est) == 0 else math.inf
        eps_g = 0.0 if abs(gers) == 0 else math.inf
    else:
        eps_r, eps_g = abs(lam - est) / mod, abs(lam - gers) / mod
    return EigenAccuracy(eps_r, eps_g, lam, est, gers, ev, gershgorin_discs(J))


def dt_ratio_series(fom_rows: np.ndarray, rom_rows: np.ndarray):
    """ROM/FOM timestep ratio at the ROM step times.

    The FOM timestep is sampled with previous-value interpolation.  Closing
    rows (dt = nan) and the last step of each run, whose length is set by the
    end time rather than by stability, are dropped.
    """
    f = _full_steps(fom_rows)
    r = _full_steps(rom_rows)
    if f.size == 0 or r.size == 0:
        return np.zeros(0), np.zeros(0)
    idx = np.searchsorted(f[:, 0], r[:, 0], side="right") - 1
    keep = idx >= 0
    return r[keep, 0], r[keep, 1] / f[idx[keep], 1]


def _full_steps(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    rows = rows[np.isfinite(rows[:, 1])]
    return rows[:-1] if len(rows) > 1 else rows


@dataclass
class ComparisonReport:
    dt_ratio: dict = field(default_factory=dict)  # label -> (t, ratio)
    errors: dict = field(default_factory=dict)  # label -> (t, err)
    eigen: dict = field(default_factory=dict)  # label -> EigenAccuracy
    theorem2: dict = field(default_factory=dict)  # label -> Theorem2Result

    def lines(self) -> list:
        out = []
        for k, (_, r) in self.dt_ratio.items():
            if r.size:
                out.append(f"dt_ratio {k}: min={r.min():.6g} max={r.max():.6g} "
                           f"median={np.median(r):.6g}")
        for k, (_, e) in self.errors.items():
            out.append(f"error {k}: max={e.max():.6g} final={e[-1]:.6g}")
        for k, th in self.theorem2.items():
            out.append(f"best_approx {k}: fraction_ok={th.fraction:.6g} "
                       f"min_ratio={th.ratio.min():.6g}")
        for k, ea in self.eigen.items():
            out.append(f"eigen {k}: eps_redeig={ea.eps_redeig:.6g} eps_gersh={ea.eps_gersh:.6g}")
        return out

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"
