"""Online ROM integration with the reduced eigenbound timestep controller."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import io
from .fom import BLOWUP_LIMIT, BlowUp
from .romops import RomOperators, convective_matrix, reduced_rhs
from .stability import RK4, EigenboundEstimate, ErkScheme, erk_step, max_timestep, ray_zmax

ADAPTIVE = "adaptive"
CONSTANT = "constant"


@dataclass
class RomState:
    a: np.ndarray
    t: float
    dt_last: float = 0.0
    a_bc: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not np.all(np.isfinite(self.a)):
            raise BlowUp("non-finite ROM coefficients")


def redeig_bounds(romops: RomOperators, a, a_bc=None) -> EigenboundEstimate:
    """Bendixson corner from cached radii combined by subadditivity."""
    abs_a = np.abs(a)
    re = romops.rho_Dr + float(abs_a @ romops.rho_Cr_sym)
    im = float(abs_a @ romops.rho_Cr)
    if romops.M_bc and a_bc is not None:
        abs_b = np.abs(a_bc)
        if abs_b.shape != (romops.M_bc,):
            raise ValueError(f"a_bc needs {romops.M_bc} entries, got {abs_b.shape}")
        re += float(abs_b @ romops.rho_Cl_sym)
        im += float(abs_b @ romops.rho_Cl_skew)
    return EigenboundEstimate(re, im)


def jacobian_convective(romops: RomOperators, a_c) -> np.ndarray:
    """Derivative of b -> sum_i a_c,i Cr[i] b, i.e. sum_i a_c,i Cr[i]."""
    return convective_matrix(romops, np.asarray(a_c, dtype=float))


def _no_bc(t):
    return np.zeros(0)


def rom_step_adaptive(romops: RomOperators, scheme: ErkScheme, state: RomState,
                      abc_fn=_no_bc, safety: float = 1.0, dt_max: float = math.inf,
                      tol: float = 1e-6, t_end: float = math.inf):
    """One RedEigCD step; returns (new state, bound, z_max, dt)."""
    a_bc0 = abc_fn(state.t)
    bound = redeig_bounds(romops, state.a, a_bc0)
    zmax = ray_zmax(scheme, bound, tol) if bound.modulus > 0 else math.nan
    dt = max_timestep(scheme, bound, safety, dt_max=dt_max, tol=tol)
    dt = _truncate(dt, state.t, t_end)
    return _advance(romops, scheme, state, abc_fn, dt), bound, zmax, dt


def _truncate(dt, t, t_end):
    dt = min(dt, t_end - t)
    if t_end - (t + dt) < 1e-12 * max(t_end, 1.0):
        dt = t_end - t
    return dt


def _advance(romops, scheme, state, abc_fn, dt):
    rhs = lambda a, t: reduced_rhs(romops, a, abc_fn(t))
    a = erk_step(scheme, rhs, state.a, state.t, dt)
    if not np.all(np.isfinite(a)) or np.max(np.abs(a), initial=0.0) > BLOWUP_LIMIT:
        raise BlowUp(f"ROM blew up at t={state.t + dt:.6g}")
    t = state.t + dt
    return RomState(a, t, dt, abc_fn(t))


@dataclass
class RomTrace:
    rows: list = field(default_factory=list)
    coeffs: list = field(default_factory=list)  # (t, a) at the configured stride
    header = ["t", "dt", "re_bound", "im_bound", "z_max", "energy"]

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(self.header))

    @property
    def times(self) -> np.ndarray:
        return self.as_array()[:, 0]

    @property
    def dts(self) -> np.ndarray:
        return self.as_array()[:, 1]

    def coefficient_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.coeffs])

    def coefficient_matrix(self) -> np.ndarray:
        return np.array([a for _, a in self.coeffs]).T

    def save(self, path) -> None:
        io.write_csv(path, self.header, self.as_array())

    def save_coefficients(self, stem, meta=None) -> None:
        io.write_container(stem, dict(meta or {}),
                           [("times", self.coefficient_times()),
                            ("a", self.coefficient_matrix())])

    @classmethod
    def load(cls, path, coeff_stem=None) -> "RomTrace":
        _, data = io.read_csv(path)
        tr = cls(rows=[tuple(r) for r in data])
        if coeff_stem is not None:
            _, arr = io.read_container(coeff_stem)
            A = arr["a"]
            tr.coeffs = [(float(t), A[:, j].copy()) for j, t in enumerate(arr["times"].ravel())]
        return tr


def run_rom(romops: RomOperators, a0, T: float, scheme: ErkScheme = RK4,
            mode: str = ADAPTIVE, dt: float | None = None, abc_fn=_no_bc,
            safety: float = 1.0, dt_max: float = math.inf, tol: float = 1e-6,
            stride: int = 1) -> RomTrace:
    """Integrate 0 -> T.  ``mode`` is ``adaptive`` or ``constant`` (needs ``dt``).

    Every step is logged; coefficients are kept every ``stride`` steps plus the
    endpoints.  The last row carries dt = nan.
    """
    if mode not in (ADAPTIVE, CONSTANT):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == CONSTANT and not (dt and dt > 0):
        raise ValueError("constant mode needs a positive dt")
    if T < 0:
        raise ValueError("T must be non-negative")
    state = RomState(np.array(a0, dtype=float), 0.0, 0.0, abc_fn(0.0))
    trace = RomTrace()
    trace.coeffs.append((0.0, state.a.copy()))
    nstep = 0
    while state.t < T:
        bound = redeig_bounds(romops, state.a, abc_fn(state.t))
        zmax = ray_zmax(scheme, bound, tol) if bound.modulus > 0 else math.nan
        if mode == ADAPTIVE:
            h = max_timestep(scheme, bound, safety, dt_max=dt_max, tol=tol)
        else:
            h = dt
        h = _truncate(h, state.t, T)
        trace.rows.append((state.t, h, bound.re_bound, bound.im_bound, zmax,
                           0.5 * float(state.a @ state.a)))
        state = _advance(romops, scheme, state, abc_fn, h)
        if state.t >= T - 1e-12 * max(T, 1.0):
            state.t = T
        nstep += 1
        if nstep % stride == 0 or state.t == T:
            trace.coeffs.append((state.t, state.a.copy()))
    bound = redeig_bounds(romops, state.a, abc_fn(state.t))
    trace.rows.append((state.t, math.nan, bound.re_bound, bound.im_bound, math.nan,
                       0.5 * float(state.a @ state.a)))
    return trace
