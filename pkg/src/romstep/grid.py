"""Staggered Cartesian grid and the symmetry-preserving finite-volume operators.

Velocity unknowns are ordered u-faces first, then v-faces; within each block the
x index runs fastest.  Every 2D operator is a Kronecker product of 1D pieces,
``kron(op_y, op_x)``.

The semi-discrete momentum equation reads

    Omega du/dt = -K((Pi u + y_Pi) * (A u + y_A)) + D u + y_D + Omega f - Omega G p
    M u + y_M = 0

with ``D = K Lambda S``, ``S = -K^T`` and ``Omega G = -M^T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

PERIODIC = "periodic"
DIRICHLET = "dirichlet"
OUTFLOW = "outflow"
_KINDS = (PERIODIC, DIRICHLET, OUTFLOW)
SIDES = ("left", "right", "bottom", "top")

# (t, x, y) -> (u, v) evaluated at wall points
WallFunction = Callable[[float, np.ndarray, np.ndarray], tuple]
# (x, y) -> (fx, fy) body force per unit volume
ForceFunction = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class BoundarySpec:
    left: str = PERIODIC
    right: str = PERIODIC
    bottom: str = PERIODIC
    top: str = PERIODIC
    values: dict = field(default_factory=dict)  # side -> WallFunction
    force: Optional[ForceFunction] = None

    def __post_init__(self):
        for side in SIDES:
            kind = getattr(self, side)
            if kind not in _KINDS:
                raise ValueError(f"unknown boundary kind {kind!r} on {side}")
        for a, b in (("left", "right"), ("bottom", "top")):
            if (getattr(self, a) == PERIODIC) != (getattr(self, b) == PERIODIC):
                raise ValueError(f"periodic sides must be paired: {a}/{b}")
        for side in SIDES:
            if getattr(self, side) == DIRICHLET and side not in self.values:
                raise ValueError(f"dirichlet side {side} needs a value function")

    def kind(self, side: str) -> str:
        return getattr(self, side)

    @property
    def dirichlet_sides(self) -> list[str]:
        return [s for s in SIDES if self.kind(s) == DIRICHLET]

    @property
    def has_outflow(self) -> bool:
        return any(self.kind(s) == OUTFLOW for s in SIDES)


class Axis:
    """1D building blocks along one coordinate direction.

    *Normal* points are the face positions of the velocity component normal to
    this axis; *tangential* points are the cell centres, where the other
    component lives.
    """

    def __init__(self, n: int, lo: float, hi: float, kind_lo: str, kind_hi: str):
        self.n = n
        self.lo, self.hi = lo, hi
        self.h = (hi - lo) / n
        self.kind_lo, self.kind_hi = kind_lo, kind_hi
        self.periodic = kind_lo == PERIODIC
        self.centers = lo + (np.arange(n) + 0.5) * self.h
        h = self.h

        # normal unknowns -------------------------------------------------
        if self.periodic:
            faces = list(range(n))
        else:
            faces = [k for k in range(n + 1)
                     if 0 < k < n or (k == 0 and kind_lo == OUTFLOW)
                     or (k == n and kind_hi == OUTFLOW)]
        self.normal_faces = np.array(faces)
        self.nn = len(faces)
        self.normal_coords = lo + self.normal_faces * h
        pos = {k: i for i, k in enumerate(faces)}
        width = np.full(self.nn, h)
        if not self.periodic:
            if kind_lo == OUTFLOW:
                width[pos[0]] = h / 2
            if kind_hi == OUTFLOW:
                width[pos[n]] = h / 2
        self.normal_width = width

        def ref(k):
            # unknown index, or "lo"/"hi" for a prescribed wall value
            if self.periodic:
                return pos[k % n]
            if k in pos:
                return pos[k]
            return "lo" if k == 0 else "hi"

        # staggered faces of the normal component (at cell centres) -------
        nb = []
        if not self.periodic and kind_lo == OUTFLOW:
            nb.append((None, ref(0)))
        for c in range(n):
            nb.append((ref(c), ref(c + 1)))
        if not self.periodic and kind_hi == OUTFLOW:
            nb.append((ref(n), None))
        self.nsf_n = len(nb)
        (self.K_n, self.A_n, self.A_n_bc, self.S_n_bc,
         self.lam_n) = self._face_ops(nb, self.nn, dist=h)

        div = sp.lil_matrix((n, self.nn))
        self.div_bc = {"lo": np.zeros(n), "hi": np.zeros(n)}
        for c in range(n):
            for k, sgn in ((c + 1, 1.0), (c, -1.0)):
                r = ref(k)
                if isinstance(r, str):
                    self.div_bc[r][c] += sgn
                else:
                    div[c, r] += sgn
        self.div = div.tocsr()

        # staggered faces of the tangential component (at face points) ----
        cref = (lambda c: c % n) if self.periodic else (lambda c: c)
        nb = []
        sel_pts = []
        if self.periodic:
            for k in range(n):
                nb.append((cref(k - 1), cref(k)))
                sel_pts.append(k)
        else:
            nb.append(("wall_lo", 0))
            sel_pts.append(0)
            for k in range(1, n):
                nb.append((k - 1, k))
                sel_pts.append(k)
            nb.append((n - 1, "wall_hi"))
            sel_pts.append(n)
        self.nsf_t = len(nb)
        (self.K_t, self.A_t, self.A_t_bc, self.S_t_bc,
         self.lam_t) = self._face_ops(nb, n, dist=h, tangential=True)
        self.tangential_face_coords = lo + np.array(sel_pts) * h

        # convecting normal velocity sampled at tangential faces
        sel = sp.lil_matrix((self.nsf_t, self.nn))
        self.sel_bc = {"lo": np.zeros(self.nsf_t), "hi": np.zeros(self.nsf_t)}
        for f, k in enumerate(sel_pts):
            r = ref(k)
            if isinstance(r, str):
                self.sel_bc[r][f] = 1.0
            else:
                sel[f, r] = 1.0
        self.sel = sel.tocsr()

        # interpolation centres -> normal points
        icn = sp.lil_matrix((self.nn, n))
        for i, k in enumerate(faces):
            if self.periodic:
                icn[i, (k - 1) % n] += 0.5
                icn[i, k % n] += 0.5
            elif k == 0:
                icn[i, 0] = 1.0
            elif k == n:
                icn[i, n - 1] = 1.0
            else:
                icn[i, k - 1] = 0.5
                icn[i, k] = 0.5
        self.interp_cn = icn.tocsr()

    def _face_ops(self, nb, nunk, dist, tangential=False):
        nf = len(nb)
        K = sp.lil_matrix((nunk, nf))
        A = sp.lil_matrix((nf, nunk))
        A_bc = {"lo": np.zeros(nf), "hi": np.zeros(nf)}
        S_bc = {"lo": np.zeros(nf), "hi": np.zeros(nf)}
        lam = np.zeros(nf)
        for f, (w, e) in enumerate(nb):
            if w is None or e is None:
                # outflow face of the normal component: one-sided, no diffusion
                if w is None:
                    A[f, e] = 1.0
                    K[e, f] = -1.0
                else:
                    A[f, w] = 1.0
                    K[w, f] = 1.0
                continue
            if tangential and (w == "wall_lo" or e == "wall_hi"):
                side = "lo" if w == "wall_lo" else "hi"
                kind = self.kind_lo if side == "lo" else self.kind_hi
                cell = e if side == "lo" else w
                if side == "lo":
                    K[cell, f] = -1.0
                else:
                    K[cell, f] = 1.0
                if kind == DIRICHLET:
                    A_bc[side][f] = 1.0
                    S_bc[side][f] = -1.0 if side == "lo" else 1.0
                    lam[f] = 2.0 / dist
                else:
                    A[f, cell] = 1.0
                continue
            lam[f] = 1.0 / dist
            for r, sgn, s_sgn in ((w, 1.0, -1.0), (e, -1.0, 1.0)):
                if isinstance(r, str):
                    A_bc[r][f] += 0.5
                    S_bc[r][f] += s_sgn
                else:
                    A[f, r] += 0.5
                    K[r, f] += sgn
        return K.tocsr(), A.tocsr(), A_bc, S_bc, lam


@dataclass(frozen=True)
class StaggeredGrid:
    nx: int
    ny: int
    domain: tuple
    bc: BoundarySpec
    x: Axis
    y: Axis

    @property
    def hx(self) -> float:
        return self.x.h

    @property
    def hy(self) -> float:
        return self.y.h

    @property
    def n_u(self) -> int:
        return self.x.nn * self.ny

    @property
    def n_v(self) -> int:
        return self.nx * self.y.nn

    @property
    def N_V(self) -> int:
        return self.n_u + self.n_v

    @property
    def N_p(self) -> int:
        return self.nx * self.ny

    @property
    def N_F(self) -> int:
        x, y = self.x, self.y
        return (x.nsf_n * self.ny + y.nsf_t * x.nn
                + x.nsf_t * y.nn + y.nsf_n * self.nx)

    def u_points(self):
        """Coordinates (x, y) of the u unknowns, flattened x-fastest."""
        X, Y = np.meshgrid(self.x.normal_coords, self.y.centers)
        return X.ravel(), Y.ravel()

    def v_points(self):
        X, Y = np.meshgrid(self.x.centers, self.y.normal_coords)
        return X.ravel(), Y.ravel()

    def split(self, vel: np.ndarray):
        """Return (u, v) reshaped to (ny_pts, nx_pts) arrays."""
        u = vel[: self.n_u].reshape(self.ny, self.x.nn)
        v = vel[self.n_u:].reshape(self.y.nn, self.nx)
        return u, v

    def wall_points(self, side: str):
        """Wall sample points for the normal and tangential profiles."""
        if side in ("left", "right"):
            xw = self.domain[0] if side == "left" else self.domain[1]
            yn = self.y.centers
            yt = self.y.normal_coords
            return (np.full_like(yn, xw), yn), (np.full_like(yt, xw), yt)
        yw = self.domain[2] if side == "bottom" else self.domain[3]
        xn = self.x.centers
        xt = self.x.normal_coords
        return (xn, np.full_like(xn, yw)), (xt, np.full_like(xt, yw))

    @property
    def bc_layout(self) -> list:
        """(side, n_normal, n_tangential) for each dirichlet side, in order."""
        out = []
        for side in self.bc.dirichlet_sides:
            (xn, _), (xt, _) = self.wall_points(side)
            out.append((side, len(xn), len(xt)))
        return out

    @property
    def N_bc(self) -> int:
        return sum(a + b for _, a, b in self.bc_layout)

    def boundary_vector(self, t: float) -> np.ndarray:
        """Stack the prescribed wall values at time ``t`` into y_bc."""
        parts = []
        for side in self.bc.dirichlet_sides:
            fn = self.bc.values[side]
            (xn, yn), (xt, yt) = self.wall_points(side)
            un, vn = fn(t, xn, yn)
            ut, vt = fn(t, xt, yt)
            if side in ("left", "right"):
                parts += [np.broadcast_to(un, xn.shape), np.broadcast_to(vt, xt.shape)]
            else:
                parts += [np.broadcast_to(vn, xn.shape), np.broadcast_to(ut, xt.shape)]
        if not parts:
            return np.zeros(0)
        return np.concatenate(parts).astype(float)

    def body_force(self) -> np.ndarray:
        if self.bc.force is None:
            return np.zeros(self.N_V)
        fu, _ = self.bc.force(*self.u_points())
        _, fv = self.bc.force(*self.v_points())
        return np.concatenate([np.broadcast_to(fu, (self.n_u,)),
                               np.broadcast_to(fv, (self.n_v,))]).astype(float)


def build_grid(nx: int, ny: int, domain, bc: BoundarySpec | None = None) -> StaggeredGrid:
    if nx < 2 or ny < 2:
        raise ValueError("need at least 2 cells per direction")
    x0, x1, y0, y1 = map(float, domain)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate domain {domain}")
    bc = bc or BoundarySpec()
    ax = Axis(nx, x0, x1, bc.left, bc.right)
    ay = Axis(ny, y0, y1, bc.bottom, bc.top)
    return StaggeredGrid(nx, ny, (x0, x1, y0, y1), bc, ax, ay)


@dataclass(frozen=True)
class DiscreteOperators:
    grid: StaggeredGrid
    Re: float
    M: sp.csr_matrix
    G: sp.csr_matrix
    omega: np.ndarray
    K: sp.csr_matrix
    S: sp.csr_matrix
    lam: np.ndarray
    D: sp.csr_matrix
    Pi: sp.csr_matrix
    A: sp.csr_matrix
    Bmaps: dict  # name -> sparse (n_target x N_bc)
    force: np.ndarray

    @property
    def Omega(self) -> sp.dia_matrix:
        return sp.diags(self.omega)

    @property
    def Lambda(self) -> sp.dia_matrix:
        return sp.diags(self.lam)


def _kron(a, b):
    return sp.kron(sp.csr_matrix(a), sp.csr_matrix(b), format="csr")


def _col(vec):
    return sp.csr_matrix(np.asarray(vec, dtype=float).reshape(-1, 1))


def assemble_operators(grid: StaggeredGrid, Re: float) -> DiscreteOperators:
    if Re <= 0:
        raise ValueError("Re must be positive")
    X, Y = grid.x, grid.y
    nx, ny = grid.nx, grid.ny
    hx, hy = X.h, Y.h
    Ix, Iy = sp.identity(nx), sp.identity(ny)
    Ixn, Iyn = sp.identity(X.nn), sp.identity(Y.nn)
    Wx = sp.diags(X.normal_width)
    Wy = sp.diags(Y.normal_width)

    omega = np.concatenate([np.kron(np.full(ny, hy), X.normal_width),
                            np.kron(Y.normal_width, np.full(nx, hx))])

    # u-momentum: x faces at cell centres, y faces at corners
    K_ux = _kron(Iy, X.K_n)
    K_uy = _kron(Y.K_t, Ixn)
    A_ux = _kron(Iy, X.A_n)
    A_uy = _kron(Y.A_t, Ixn)
    lam_ux = np.kron(np.full(ny, hy), X.lam_n)
    lam_uy = np.kron(Y.lam_t, X.normal_width)
    Pi_ux = hy * A_ux
    Pi_uy = _kron(Y.sel, Wx @ X.interp_cn)  # acts on v
    # v-momentum
    K_vx = _kron(Iyn, X.K_t)
    K_vy = _kron(Y.K_n, Ix)
    A_vx = _kron(Iyn, X.A_t)
    A_vy = _kron(Y.A_n, Ix)
    lam_vx = np.kron(Y.normal_width, X.lam_t)
    lam_vy = np.kron(Y.lam_n, np.full(nx, hx))
    Pi_vx = _kron(Wy @ Y.interp_cn, X.sel)  # acts on u
    Pi_vy = hx * A_vy

    n_ux, n_uy, n_vx, n_vy = (K_ux.shape[1], K_uy.shape[1],
                              K_vx.shape[1], K_vy.shape[1])
    K = sp.bmat([[K_ux, K_uy, None, None],
                 [None, None, K_vx, K_vy]], format="csr")
    A = sp.bmat([[A_ux, None], [A_uy, None], [None, A_vx], [None, A_vy]],
                format="csr")
    Pi = sp.bmat([[Pi_ux, None], [None, Pi_uy], [Pi_vx, None], [None, Pi_vy]],
                 format="csr")
    lam = np.concatenate([lam_ux, lam_uy, lam_vx, lam_vy]) / Re
    S = (-K.T).tocsr()
    D = (K @ sp.diags(lam) @ S).tocsr()
    M = sp.hstack([_kron(hy * Iy, X.div), _kron(Y.div, hx * Ix)], format="csr")
    G = (-sp.diags(1.0 / omega) @ M.T).tocsr()

    # boundary maps --------------------------------------------------------
    N_F = K.shape[1]
    offs = np.cumsum([0, n_ux, n_uy, n_vx, n_vy])
    blocks = {"M": [], "A": [], "Pi": [], "S": []}
    N_p = nx * ny

    def face_block(mat, which):
        # embed a (n_block x n) map into the full face space
        pad_top = offs[which]
        pad_bot = N_F - offs[which] - mat.shape[0]
        parts = []
        if pad_top:
            parts.append([sp.csr_matrix((pad_top, mat.shape[1]))])
        parts.append([mat])
        if pad_bot:
            parts.append([sp.csr_matrix((pad_bot, mat.shape[1]))])
        return sp.bmat(parts, format="csr")

    for side in grid.bc.dirichlet_sides:
        end = "lo" if side in ("left", "bottom") else "hi"
        if side in ("left", "right"):
            # normal profile: u at y centres (ny); tangential: v at Y normal points
            bm_n = _kron(hy * Iy, _col(X.div_bc[end]))
            ba_n = face_block(_kron(Iy, _col(X.A_n_bc[end])), 0)
            bp_n = hy * ba_n + face_block(_kron(Wy @ Y.interp_cn, _col(X.sel_bc[end])), 2)
            bs_n = face_block(_kron(Iy, _col(X.S_n_bc[end])), 0)
            ba_t = face_block(_kron(Iyn, _col(X.A_t_bc[end])), 2)
            bs_t = face_block(_kron(Iyn, _col(X.S_t_bc[end])), 2)
            nt = Y.nn
        else:
            bm_n = _kron(_col(Y.div_bc[end]), hx * Ix)
            ba_n = face_block(_kron(_col(Y.A_n_bc[end]), Ix), 3)
            bp_n = hx * ba_n + face_block(_kron(_col(Y.sel_bc[end]), Wx @ X.interp_cn), 1)
            bs_n = face_block(_kron(_col(Y.S_n_bc[end]), Ix), 3)
            ba_t = face_block(_kron(_col(Y.A_t_bc[end]), Ixn), 1)
            bs_t = face_block(_kron(_col(Y.S_t_bc[end]), Ixn), 1)
            nt = X.nn
        blocks["M"] += [bm_n, sp.csr_matrix((N_p, nt))]
        blocks["A"] += [ba_n, ba_t]
        blocks["Pi"] += [bp_n, sp.csr_matrix((N_F, nt))]
        blocks["S"] += [bs_n, bs_t]

    N_bc = grid.N_bc
    if N_bc:
        B = {k: sp.hstack(v, format="csr") for k, v in blocks.items()}
    else:
        B = {"M": sp.csr_matrix((N_p, 0)), "A": sp.csr_matrix((N_F, 0)),
             "Pi": sp.csr_matrix((N_F, 0)), "S": sp.csr_matrix((N_F, 0))}
    B["D"] = (K @ sp.diags(lam) @ B["S"]).tocsr()
    B["G"] = sp.csr_matrix((grid.N_V, N_bc))  # pressure outlets at p = 0

    return DiscreteOperators(grid=grid, Re=float(Re), M=M, G=G, omega=omega,
                             K=K, S=S, lam=lam, D=D, Pi=Pi, A=A, Bmaps=B,
                             force=grid.body_force())


def boundary_vectors(ops: DiscreteOperators, y_bc: np.ndarray) -> dict:
    y_bc = np.asarray(y_bc, dtype=float)
    if y_bc.shape != (ops.grid.N_bc,):
        raise ValueError(f"y_bc has shape {y_bc.shape}, expected ({ops.grid.N_bc},)")
    return {k: B @ y_bc for k, B in ops.Bmaps.items()}


def convective_apply(ops: DiscreteOperators, u_conv, u_adv, y_bc=None) -> np.ndarray:
    """K((Pi u_conv + y_Pi) * (A u_adv + y_A)); integrated (not volume scaled)."""
    u_conv = np.asarray(u_conv)
    u_adv = np.asarray(u_adv)
    n = ops.grid.N_V
    if u_conv.shape[0] != n or u_adv.shape[0] != n:
        raise ValueError("velocity vectors must have length N_V")
    flux = ops.Pi @ u_conv
    val = ops.A @ u_adv
    if y_bc is not None and len(y_bc):
        flux = flux + ops.Bmaps["Pi"] @ y_bc
        val = val + ops.Bmaps["A"] @ y_bc
    return ops.K @ (flux * val)


def convection_matrix(ops: DiscreteOperators, u_conv, y_bc=None) -> sp.csr_matrix:
    """C(u) = K diag(Pi u + y_Pi) A."""
    flux = ops.Pi @ u_conv
    if y_bc is not None and len(y_bc):
        flux = flux + ops.Bmaps["Pi"] @ y_bc
    return (ops.K @ sp.diags(flux) @ ops.A).tocsr()


def momentum_rhs(ops: DiscreteOperators, u, y_bc=None) -> np.ndarray:
    """Volume-scaled tendency Omega^-1(-C(u)u + Du + y_D) + f, pressure excluded."""
    rhs = -convective_apply(ops, u, u, y_bc) + ops.D @ u
    if y_bc is not None and len(y_bc):
        rhs = rhs + ops.Bmaps["D"] @ y_bc
    return rhs / ops.omega + ops.force


class PressureSolver:
    """Factorised L = M Omega^-1 M^T; pins one unknown when L is singular."""

    def __init__(self, ops: DiscreteOperators):
        self.ops = ops
        L = (ops.M @ sp.diags(1.0 / ops.omega) @ ops.M.T).tocsc()
        self.pinned = not ops.grid.bc.has_outflow
        if self.pinned:
            L = L.tolil()
            L[0, :] = 0.0
            L[:, 0] = 0.0
            L[0, 0] = 1.0
            L = L.tocsc()
        try:
            self._lu = spla.splu(L)
        except RuntimeError as exc:  # pragma: no cover - singular without gauge
            raise PoissonSolveFailure(str(exc)) from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.array(rhs, dtype=float)
        if self.pinned:
            rhs[0] = 0.0
        q = self._lu.solve(rhs)
        if not np.all(np.isfinite(q)):
            raise PoissonSolveFailure("non-finite pressure solution")
        return q

    def project(self, u: np.ndarray, y_M=None):
        """Omega-orthogonal projection onto {M u + y_M = 0}; returns (u, phi)."""
        r = self.ops.M @ u
        if y_M is not None:
            r = r + y_M
        phi = self.solve(r)
        return u - (self.ops.M.T @ phi) / self.ops.omega, phi


class PoissonSolveFailure(RuntimeError):
    pass
