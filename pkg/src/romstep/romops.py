"""Offline assembly of the reduced operators and their cached spectral radii."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import io
from .grid import DiscreteOperators
from .pod import PodBasis

# symmetric residues of the convective blocks below this fraction of the block
# magnitude are treated as round-off
RESIDUE_TOL = 1e-10


class SymmetryViolation(ValueError):
    pass


def spectral_radius_sym(Amat) -> float:
    Amat = np.atleast_2d(np.asarray(Amat, dtype=float))
    if Amat.size == 0:
        return 0.0
    if np.max(np.abs(Amat - Amat.T)) >= 1e-8:
        raise SymmetryViolation("matrix is not symmetric")
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (Amat + Amat.T)))))


def spectral_radius_skew(Amat) -> float:
    Amat = np.atleast_2d(np.asarray(Amat, dtype=float))
    if Amat.size == 0:
        return 0.0
    if np.max(np.abs(Amat + Amat.T)) >= 1e-8:
        raise SymmetryViolation("matrix is not skew-symmetric")
    return float(np.linalg.norm(Amat, 2))


def _sym(A):
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def _skew(A):
    return 0.5 * (A - np.swapaxes(A, -1, -2))


@dataclass
class RomOperators:
    """Reduced system  da/dt = -sum_i a_i Cr[i] a - sum_k abc_k Cl[k] a
    - Cbc (abc x abc) + Dr a + Dbc abc + Fr0."""

    Dr: np.ndarray  # M x M
    Cr: np.ndarray  # M x M x M, Cr[i] = Phi^T C(Phi_i) Phi
    Cl: np.ndarray  # M_bc x M x M
    Cbc: np.ndarray  # M x M_bc^2
    Dbc: np.ndarray  # M x M_bc
    Fr0: np.ndarray  # M
    rho_Dr: float = field(init=False)
    rho_Cr: np.ndarray = field(init=False)
    rho_Cr_sym: np.ndarray = field(init=False)
    rho_Cl_sym: np.ndarray = field(init=False)
    rho_Cl_skew: np.ndarray = field(init=False)
    skew_defect: np.ndarray = field(init=False)

    def __post_init__(self):
        self.Dr = _sym(self.Dr)
        self.rho_Dr = spectral_radius_sym(self.Dr)
        mag = np.max(np.abs(self.Cr), axis=(1, 2)) if self.M else np.zeros(0)
        sym = _sym(self.Cr)
        self.skew_defect = np.max(np.abs(2 * sym), axis=(1, 2)) if self.M else np.zeros(0)
        self.rho_Cr = np.array([spectral_radius_skew(c) for c in _skew(self.Cr)])
        self.rho_Cr_sym = np.array([
            spectral_radius_sym(s) if d > RESIDUE_TOL * max(m, 1e-300) else 0.0
            for s, d, m in zip(sym, self.skew_defect, mag)])
        self.rho_Cl_sym = np.array([spectral_radius_sym(c) for c in self.Cl_sym])
        self.rho_Cl_skew = np.array([spectral_radius_skew(c) for c in self.Cl_skew])

    @property
    def M(self) -> int:
        return self.Dr.shape[0]

    @property
    def M_bc(self) -> int:
        return self.Cl.shape[0]

    @property
    def Cl_sym(self) -> np.ndarray:
        return _sym(self.Cl)

    @property
    def Cl_skew(self) -> np.ndarray:
        return _skew(self.Cl)

    def truncated(self, M: int) -> "RomOperators":
        if not 1 <= M <= self.M:
            raise ValueError(f"M must lie in [1, {self.M}]")
        return RomOperators(self.Dr[:M, :M], self.Cr[:M, :M, :M],
                            self.Cl[:, :M, :M], self.Cbc[:M], self.Dbc[:M],
                            self.Fr0[:M])

    def save(self, stem, meta=None) -> None:
        M, Mb = self.M, self.M_bc
        meta = dict(meta or {})
        meta.update(M=M, M_bc=Mb)
        io.write_container(stem, meta, [
            ("Dr", self.Dr), ("Cr", self.Cr.reshape(M, M * M)),
            ("Cl", self.Cl.reshape(Mb, M * M)), ("Cbc", self.Cbc),
            ("Dbc", self.Dbc), ("Fr0", self.Fr0)])

    @classmethod
    def load(cls, stem) -> "RomOperators":
        meta, a = io.read_container(stem)
        M, Mb = int(meta["M"]), int(meta["M_bc"])
        return cls(a["Dr"], a["Cr"].reshape(M, M, M), a["Cl"].reshape(Mb, M, M),
                   a["Cbc"].reshape(M, Mb * Mb), a["Dbc"].reshape(M, Mb),
                   a["Fr0"].ravel())


def assemble_rom(ops: DiscreteOperators, basis: PodBasis,
                 check_pressure: bool = True) -> RomOperators:
    """Galerkin projection of the staggered operators onto the basis.

    All tendencies are Omega^-1 scaled, so with Phi^T Omega Phi = I the
    projection reduces to a plain Phi^T.
    """
    Phi = basis.Phi
    if Phi.shape[0] != ops.grid.N_V:
        raise ValueError(f"basis has {Phi.shape[0]} rows, grid has N_V={ops.grid.N_V}")
    if basis.Phi_bc.shape[0] != ops.grid.N_bc:
        raise ValueError("boundary basis does not match the grid")
    M, Mb = basis.M, basis.M_bc
    B = ops.Bmaps

    Dr = Phi.T @ (ops.D @ Phi)
    KtPhi = np.asarray(ops.K.T @ Phi)  # N_F x M
    PiPhi = np.asarray(ops.Pi @ Phi)
    APhi = np.asarray(ops.A @ Phi)
    Cr = np.empty((M, M, M))
    for i in range(M):
        Cr[i] = (KtPhi * PiPhi[:, i:i + 1]).T @ APhi

    Cl = np.empty((Mb, M, M))
    Cbc = np.empty((M, Mb * Mb))
    if Mb:
        F = basis.F_inhom
        P_L = ops.Pi @ F + B["Pi"] @ basis.Phi_bc  # N_F x M_bc
        A_L = ops.A @ F + B["A"] @ basis.Phi_bc
        for k in range(Mb):
            Cl[k] = (KtPhi * A_L[:, k:k + 1]).T @ PiPhi + (KtPhi * P_L[:, k:k + 1]).T @ APhi
        for k in range(Mb):
            for m in range(Mb):
                Cbc[:, k * Mb + m] = KtPhi.T @ (P_L[:, k] * A_L[:, m])
        Dbc = Phi.T @ (ops.D @ F + B["D"] @ basis.Phi_bc)
    else:
        Dbc = np.zeros((M, 0))
    Fr0 = Phi.T @ (ops.omega * ops.force)

    if check_pressure:
        rng = np.random.default_rng(0)
        p = rng.standard_normal(ops.grid.N_p)
        leak = np.linalg.norm(Phi.T @ (ops.omega * (ops.G @ p)))
        if leak > 1e-8 * max(1.0, np.linalg.norm(p)):
            raise ValueError(f"basis is not divergence free: pressure leak {leak:.3e}")
    return RomOperators(Dr, Cr, Cl, Cbc, Dbc, Fr0)


def convective_matrix(romops: RomOperators, a) -> np.ndarray:
    """sum_i a_i Cr[i]."""
    return np.tensordot(a, romops.Cr, axes=(0, 0))


def boundary_matrix(romops: RomOperators, a_bc) -> np.ndarray:
    """sum_k abc_k Cl[k]."""
    if romops.M_bc == 0:
        return np.zeros((romops.M, romops.M))
    return np.tensordot(a_bc, romops.Cl, axes=(0, 0))


def reduced_rhs(romops: RomOperators, a, a_bc=None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = -(convective_matrix(romops, a) @ a) + romops.Dr @ a + romops.Fr0
    if romops.M_bc and a_bc is not None:
        a_bc = np.asarray(a_bc, dtype=float)
        out -= boundary_matrix(romops, a_bc) @ a
        out -= romops.Cbc @ np.kron(a_bc, a_bc)
        out += romops.Dbc @ a_bc
    return out
