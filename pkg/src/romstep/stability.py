"""Explicit Runge-Kutta stability polynomials and the eigenbound -> timestep map."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

_TABLEAUS = {
    1: ([[]], [1.0], [0.0]),
    2: ([[], [1.0]], [0.5, 0.5], [0.0, 1.0]),  # Heun
    3: ([[], [0.5], [-1.0, 2.0]], [1 / 6, 2 / 3, 1 / 6], [0.0, 0.5, 1.0]),  # Kutta
    4: ([[], [0.5], [0.0, 0.5], [0.0, 0.0, 1.0]],
        [1 / 6, 1 / 3, 1 / 3, 1 / 6], [0.0, 0.5, 0.5, 1.0]),
}


class PurelyImaginaryDegenerate(UserWarning):
    """The scheme cannot be stable for purely imaginary eigenvalues."""


@dataclass(frozen=True)
class ErkScheme:
    s: int
    a: tuple
    b: tuple
    c: tuple

    @classmethod
    def classic(cls, s: int = 4) -> "ErkScheme":
        if s not in _TABLEAUS:
            raise ValueError(f"only s = p <= 4 is supported, got s={s}")
        a, b, c = _TABLEAUS[s]
        return cls(s, tuple(tuple(r) for r in a), tuple(b), tuple(c))

    @property
    def order(self) -> int:
        return self.s

    @property
    def poly(self) -> np.ndarray:
        """Taylor coefficients 1/j!, j = 0..s."""
        return np.array([1.0 / math.factorial(j) for j in range(self.s + 1)])

    def R(self, z):
        return np.polynomial.polynomial.polyval(z, self.poly)


RK4 = ErkScheme.classic(4)


@dataclass(frozen=True)
class EigenboundEstimate:
    """lambda_F = -re_bound + i im_bound (corner of the Bendixson rectangle)."""

    re_bound: float
    im_bound: float

    def __post_init__(self):
        for v in (self.re_bound, self.im_bound):
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"eigenbounds must be finite and >= 0, got {v}")

    @property
    def modulus(self) -> float:
        return math.hypot(self.re_bound, self.im_bound)

    @property
    def corner(self) -> complex:
        return complex(-self.re_bound, self.im_bound)

    def scaled(self, c: float) -> "EigenboundEstimate":
        return EigenboundEstimate(c * self.re_bound, c * self.im_bound)


def stability_value(scheme: ErkScheme, z) -> float:
    return float(abs(scheme.R(complex(z))))


def ray_zmax(scheme: ErkScheme, direction: EigenboundEstimate,
             tol: float = 1e-6, step: float = 0.5) -> float:
    """Distance from the origin to the stability boundary along ``direction``.

    Scans outward in increments of ``step`` until |R| > 1, then bisects the
    last bracket.  The stable end of the final bracket is returned.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    mod = direction.modulus
    if mod == 0:
        raise ValueError("direction must be nonzero")
    if direction.re_bound == 0 and scheme.s <= 2:
        warnings.warn("stability region touches the imaginary axis only at 0",
                      PurelyImaginaryDegenerate, stacklevel=2)
        return 0.0
    d = direction.corner / mod
    f = lambda r: abs(scheme.R(r * d)) - 1.0
    lo, hi = 0.0, step
    while f(hi) <= 0.0:
        lo, hi = hi, hi + step
        if hi > 100.0:  # pragma: no cover - regions of s <= 4 are bounded
            raise RuntimeError("stability region appears unbounded")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def max_timestep(scheme: ErkScheme, bound: EigenboundEstimate, safety: float = 1.0,
                 dt_min: float = 1e-10, dt_max: float = math.inf,
                 tol: float = 1e-6) -> float:
    """dt = safety * z_max / |lambda_F|, clamped to [dt_min, dt_max]."""
    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1]")
    mod = bound.modulus
    if mod < 1e-14:
        return dt_max
    dt = safety * ray_zmax(scheme, bound, tol) / mod
    return min(max(dt, dt_min), dt_max)


def erk_step(scheme: ErkScheme, rhs, y, t: float, dt: float, project=None):
    """One explicit RK step of dy/dt = rhs(y, t).

    ``project(y, t)`` is applied to every stage value and to the result.
    """
    ks = []
    for i in range(scheme.s):
        yi = y
        for aij, kj in zip(scheme.a[i], ks):
            if aij:
                yi = yi + (dt * aij) * kj
        ti = t + scheme.c[i] * dt
        if project is not None and i > 0:
            yi = project(yi, ti)
        ks.append(rhs(yi, ti))
    out = y
    for bj, kj in zip(scheme.b, ks):
        out = out + (dt * bj) * kj
    if project is not None:
        out = project(out, t + dt)
    return out
