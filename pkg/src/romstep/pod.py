"""Omega-orthonormal POD with non-uniform time weights, boundary POD and lifting."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import io
from .fom import SnapshotArchive
from .grid import DiscreteOperators, PressureSolver


class RankDeficient(ValueError):
    pass


class RankDeficientWarning(UserWarning):
    pass


def _fix_signs(U: np.ndarray) -> np.ndarray:
    if U.size == 0:
        return U
    idx = np.argmax(np.abs(U), axis=0)
    s = np.sign(U[idx, np.arange(U.shape[1])])
    s[s == 0] = 1.0
    return U * s


def _weights(dts) -> np.ndarray:
    dts = np.asarray(dts, dtype=float)
    if np.any(dts <= 0):
        raise ValueError("snapshot weights must be positive")
    return dts / dts.sum()


def _truncate(sigma: np.ndarray, M: int) -> int:
    if sigma.size == 0 or sigma[0] == 0:
        raise RankDeficient("snapshot matrix is zero")
    if sigma[M - 1] / sigma[0] < 1e-14:
        eff = int(np.sum(sigma / sigma[0] >= 1e-14))
        warnings.warn(f"requested {M} modes but effective rank is {eff}",
                      RankDeficientWarning, stacklevel=3)
        return eff
    return M


@dataclass
class PodBasis:
    Phi: np.ndarray  # N_V x M, Phi^T Omega Phi = I
    sigma: np.ndarray
    Phi_bc: np.ndarray  # N_bc x M_bc
    F_inhom: np.ndarray  # N_V x M_bc
    sigma_bc: np.ndarray

    @property
    def M(self) -> int:
        return self.Phi.shape[1]

    @property
    def M_bc(self) -> int:
        return self.Phi_bc.shape[1]

    def truncated(self, M: int) -> "PodBasis":
        if M > self.M:
            raise ValueError(f"basis has only {self.M} modes")
        return PodBasis(self.Phi[:, :M], self.sigma, self.Phi_bc, self.F_inhom,
                        self.sigma_bc)

    def a_bc(self, y_bc) -> np.ndarray:
        return self.Phi_bc.T @ y_bc

    def project(self, omega, u, y_bc=None) -> np.ndarray:
        """Best-approximation coefficients Phi^T Omega (u - F a_bc)."""
        if self.M_bc and y_bc is not None:
            u = u - self.F_inhom @ self.a_bc(y_bc)
        return self.Phi.T @ (omega[:, None] * u if u.ndim == 2 else omega * u)

    def reconstruct(self, a, a_bc=None) -> np.ndarray:
        u = self.Phi @ a
        if self.M_bc and a_bc is not None:
            u = u + self.F_inhom @ a_bc
        return u

    def save(self, stem, meta=None) -> None:
        meta = dict(meta or {})
        meta.update(M=self.M, M_bc=self.M_bc, N_V=self.Phi.shape[0])
        io.write_container(stem, meta, [("sigma", self.sigma), ("Phi", self.Phi),
                                        ("Phi_bc", self.Phi_bc),
                                        ("F_inhom", self.F_inhom),
                                        ("sigma_bc", self.sigma_bc)])

    @classmethod
    def load(cls, stem) -> "PodBasis":
        _, a = io.read_container(stem)
        return cls(a["Phi"], a["sigma"].ravel(), a["Phi_bc"], a["F_inhom"],
                   a["sigma_bc"].ravel())


def weighted_pod(X: np.ndarray, dts, omega: np.ndarray, M: int):
    """Return (Phi, sigma) from the SVD of Omega^1/2 X Delta^1/2."""
    X = np.asarray(X, dtype=float)
    if M < 1 or M > min(X.shape):
        raise ValueError(f"M={M} must lie in [1, {min(X.shape)}]")
    sw = np.sqrt(omega)
    Xh = (sw[:, None] * X) * np.sqrt(_weights(dts))[None, :]
    U, sigma, _ = np.linalg.svd(Xh, full_matrices=False)
    M = _truncate(sigma, M)
    Phi = _fix_signs(U[:, :M]) / sw[:, None]
    return Phi, sigma


def boundary_pod(ybc: np.ndarray, dts, M_bc: int):
    """Euclidean-orthonormal basis of the boundary samples; returns (Phi_bc, sigma_bc)."""
    ybc = np.asarray(ybc, dtype=float)
    if ybc.shape[0] == 0 or not np.any(ybc):
        raise RankDeficient("boundary samples are identically zero")
    Yh = ybc * np.sqrt(_weights(dts))[None, :]
    U, sigma, _ = np.linalg.svd(Yh, full_matrices=False)
    if M_bc < 1 or M_bc > sigma.size:
        raise ValueError(f"M_bc={M_bc} must lie in [1, {sigma.size}]")
    M_bc = _truncate(sigma, M_bc)
    return _fix_signs(U[:, :M_bc]), sigma


def build_lifting(ops: DiscreteOperators, Phi_bc: np.ndarray,
                  solver: PressureSolver | None = None) -> np.ndarray:
    """Minimal Omega-norm fields with M F e_j + B_M Phi_bc e_j = 0."""
    solver = solver or PressureSolver(ops)
    rhs = ops.Bmaps["M"] @ Phi_bc
    F = np.zeros((ops.grid.N_V, Phi_bc.shape[1]))
    for j in range(Phi_bc.shape[1]):
        q = solver.solve(rhs[:, j])
        F[:, j] = -(ops.M.T @ q) / ops.omega
    return F


def build_basis(arch: SnapshotArchive, ops: DiscreteOperators, M: int,
                M_bc: int = 0) -> PodBasis:
    """Boundary POD and lifting (if inhomogeneous), then velocity POD of the
    lifted-out snapshots."""
    X = arch.X
    if M_bc > 0:
        Phi_bc, sigma_bc = boundary_pod(arch.ybc, arch.dts, M_bc)
        F = build_lifting(ops, Phi_bc)
        X = X - F @ (Phi_bc.T @ arch.ybc)
    else:
        Phi_bc = np.zeros((arch.ybc.shape[0], 0))
        F = np.zeros((X.shape[0], 0))
        sigma_bc = np.zeros(0)
    M = min(M, min(X.shape))
    Phi, sigma = weighted_pod(X, arch.dts, ops.omega, M)
    return PodBasis(Phi, sigma, Phi_bc, F, sigma_bc)
