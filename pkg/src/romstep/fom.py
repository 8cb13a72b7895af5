"""Full-order integration: explicit RK with stage-wise pressure projection and
the algebraic (staggered) eigenbound timestep controller."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import io
from .grid import DiscreteOperators, PressureSolver, momentum_rhs
from .stability import RK4, EigenboundEstimate, ErkScheme, erk_step, max_timestep, ray_zmax

log = logging.getLogger(__name__)

BLOWUP_LIMIT = 1e6


class BlowUp(FloatingPointError):
    pass


@dataclass
class FomState:
    u: np.ndarray
    p: np.ndarray
    t: float
    dt_last: float = 0.0


@dataclass
class AlgEigBoundCache:
    """|K^T Omega^-1 S^T| and |K|^T Omega^-1 |A|^T, built once per grid."""

    diff: sp.csr_matrix
    conv: sp.csr_matrix
    alpha: float = 0.0

    @classmethod
    def build(cls, ops: DiscreteOperators, alpha: float = 0.0) -> "AlgEigBoundCache":
        oinv = sp.diags(1.0 / ops.omega)
        diff = abs(ops.K.T @ oinv @ ops.S.T).tocsr()
        conv = (abs(ops.K).T @ oinv @ abs(ops.A).T).tocsr()
        return cls(diff, conv, alpha)


def face_fluxes(ops: DiscreteOperators, u, y_bc=None) -> np.ndarray:
    flux = ops.Pi @ u
    if y_bc is not None and len(y_bc):
        flux = flux + ops.Bmaps["Pi"] @ y_bc
    return flux


def fom_eigenbounds(ops: DiscreteOperators, cache: AlgEigBoundCache, u,
                    y_bc=None) -> EigenboundEstimate:
    """Bounds on rho(Omega^-1 D) and rho(Omega^-1 C(u)) with alpha = 0."""
    re = float(np.max(cache.diff @ ops.lam))
    im = 0.5 * float(np.max(cache.conv @ np.abs(face_fluxes(ops, u, y_bc))))
    return EigenboundEstimate(re, im)


def _alpha_bound(X: sp.csr_matrix, w: np.ndarray, alpha: float) -> float:
    # Gershgorin on diag(w^a) X diag(w^(1-a)); zero-weight faces only add zero
    # eigenvalues, so restrict to the support
    keep = np.flatnonzero(w > 0)
    if keep.size == 0:
        return 0.0
    ws = w[keep]
    Xs = X[keep][:, keep]
    return float(np.max(ws ** alpha * (Xs @ ws ** (1.0 - alpha))))


def alpha_family_bounds(ops: DiscreteOperators, cache: AlgEigBoundCache, u,
                        alphas, y_bc=None) -> np.ndarray:
    """Rows of (alpha, diffusive bound, convective bound)."""
    flux = np.abs(face_fluxes(ops, u, y_bc))
    rows = []
    for a in alphas:
        if not -1.0 <= a <= 2.0:
            raise ValueError("alpha must lie in [-1, 2]")
        rows.append((a, _alpha_bound(cache.diff, ops.lam, a),
                     0.5 * _alpha_bound(cache.conv, flux, a)))
    return np.array(rows)


def kinetic_energy(ops: DiscreteOperators, u) -> float:
    return 0.5 * float(u @ (ops.omega * u))


def divergence_residual(ops: DiscreteOperators, u, y_bc=None) -> float:
    r = ops.M @ u
    if y_bc is not None and len(y_bc):
        r = r + ops.Bmaps["M"] @ y_bc
    return float(np.max(np.abs(r))) if r.size else 0.0


class FomStepper:
    """Bundles the operators, the pressure factorisation and the boundary data."""

    def __init__(self, ops: DiscreteOperators, scheme: ErkScheme = RK4,
                 solver: PressureSolver | None = None):
        self.ops = ops
        self.scheme = scheme
        self.solver = solver or PressureSolver(ops)
        self.grid = ops.grid
        self._last_phi = None

    def ybc(self, t: float) -> np.ndarray:
        return self.grid.boundary_vector(t)

    def rhs(self, u, t):
        return momentum_rhs(self.ops, u, self.ybc(t))

    def project(self, u, t):
        yb = self.ybc(t)
        y_M = self.ops.Bmaps["M"] @ yb if len(yb) else None
        u, self._last_phi = self.solver.project(u, y_M)
        return u

    def step(self, state: FomState, dt: float) -> FomState:
        if dt <= 0:
            raise ValueError("dt must be positive")
        u = erk_step(self.scheme, self.rhs, state.u, state.t, dt, self.project)
        return FomState(u, self._last_phi / dt, state.t + dt, dt)


def rk4_projection_step(ops: DiscreteOperators, state: FomState, dt: float,
                        stepper: FomStepper | None = None) -> FomState:
    stepper = stepper or FomStepper(ops)
    return stepper.step(state, dt)


@dataclass
class SnapshotArchive:
    X: np.ndarray  # N_V x K
    dts: np.ndarray  # quadrature weights, sum = T
    times: np.ndarray
    ybc: np.ndarray  # N_bc x K
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.X.shape[1]

    @property
    def T(self) -> float:
        return float(self.times[-1] - self.times[0])

    def save(self, stem) -> None:
        meta = dict(self.meta)
        meta.update(K=self.K, N_V=self.X.shape[0], N_bc=self.ybc.shape[0])
        io.write_container(stem, meta, [("dts", self.dts), ("times", self.times),
                                        ("X", self.X), ("ybc", self.ybc)])

    @classmethod
    def load(cls, stem) -> "SnapshotArchive":
        meta, arr = io.read_container(stem)
        return cls(arr["X"], arr["dts"].ravel(), arr["times"].ravel(),
                   arr["ybc"], meta)


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.size == 1:
        return np.ones(1)
    dt = np.diff(times)
    w = np.zeros_like(times)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


@dataclass
class FomTrace:
    rows: list = field(default_factory=list)
    header = ["t", "dt", "re_bound", "im_bound", "z_max", "energy", "div_residual"]

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(self.header))

    def save(self, path) -> None:
        io.write_csv(path, self.header, self.as_array())


def run_fom(ops: DiscreteOperators, u0, T: float, scheme: ErkScheme = RK4,
            safety: float = 1.0, dt_max: float = math.inf, stride: int = 1,
            tol: float = 1e-6, meta: dict | None = None, project_ic: bool = True):
    """Integrate 0 -> T with the adaptive controller.

    Returns ``(archive, trace)``.  The archive samples every ``stride`` steps
    (always including t = 0 and t = T) with trapezoidal weights.
    """
    stepper = FomStepper(ops, scheme)
    cache = AlgEigBoundCache.build(ops)
    u = stepper.project(np.array(u0, dtype=float), 0.0) if project_ic else np.array(u0, float)
    state = FomState(u, np.zeros(ops.grid.N_p), 0.0)
    trace = FomTrace()
    snaps, times, ybcs = [state.u.copy()], [0.0], [stepper.ybc(0.0)]
    nstep = 0
    while state.t < T:
        yb = stepper.ybc(state.t)
        bound = fom_eigenbounds(ops, cache, state.u, yb)
        zmax = ray_zmax(scheme, bound, tol) if bound.modulus > 0 else math.nan
        dt = max_timestep(scheme, bound, safety, dt_max=dt_max, tol=tol)
        dt = min(dt, T - state.t)
        if T - (state.t + dt) < 1e-12 * max(T, 1.0):
            dt = T - state.t
        trace.rows.append((state.t, dt, bound.re_bound, bound.im_bound, zmax,
                           kinetic_energy(ops, state.u), divergence_residual(ops, state.u, yb)))
        state = stepper.step(state, dt)
        if state.t >= T - 1e-12 * max(T, 1.0):
            state.t = T
        nstep += 1
        if not np.all(np.isfinite(state.u)) or np.max(np.abs(state.u)) > BLOWUP_LIMIT:
            raise BlowUp(f"FOM blew up at t={state.t:.6g} (step {nstep})")
        if nstep % stride == 0 or state.t == T:
            snaps.append(state.u.copy())
            times.append(state.t)
            ybcs.append(stepper.ybc(state.t))
        if nstep % 100 == 0:
            log.info("FOM step %d t=%.4f dt=%.3e", nstep, state.t, dt)
    yb = stepper.ybc(state.t)
    bound = fom_eigenbounds(ops, cache, state.u, yb)
    trace.rows.append((state.t, math.nan, bound.re_bound, bound.im_bound, math.nan,
                       kinetic_energy(ops, state.u), divergence_residual(ops, state.u, yb)))
    times = np.array(times)
    ybc = np.array(ybcs).T if ops.grid.N_bc else np.zeros((0, len(times)))
    meta = dict(meta or {})
    g = ops.grid
    meta.update(nx=g.nx, ny=g.ny, domain=list(g.domain), Re=ops.Re, T=float(T),
                stride=stride, steps=nstep)
    arch = SnapshotArchive(np.array(snaps).T, trapezoid_weights(times), times, ybc, meta)
    return arch, trace
