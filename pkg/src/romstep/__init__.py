"""Adaptive explicit timestepping for a staggered incompressible Navier-Stokes
solver and its POD-Galerkin reduced-order model."""
from .stability import ErkScheme, EigenboundEstimate, RK4, max_timestep, ray_zmax

__version__ = "0.1.0"

__all__ = ["ErkScheme", "EigenboundEstimate", "RK4", "max_timestep", "ray_zmax"]
