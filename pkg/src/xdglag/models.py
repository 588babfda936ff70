"""Concrete problem definitions: analytic profiles, boundary data, damping.

Collects the Gaussian initial data, the exact advection-diffusion solution
used by the efficiency tests, the sigmoidal absorbing-layer coefficient,
the sinusoidal wave-train boundary datum and the manufactured solution of
the standalone convergence study (its source term is derived analytically
and frozen here; a finite-difference test keeps it honest).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .flux import FluxModel
from .mesh import BoundarySpec

__all__ = [
    "GaussianSpec",
    "ProblemSpec",
    "gaussian_profile",
    "exact_gaussian_advdiff",
    "sigmoid_gamma",
    "wavetrain_bc",
    "manufactured_solution",
]


@dataclass(frozen=True)
class GaussianSpec:
    """Anisotropic Gaussian bump A exp(-((x-x0)/sx)^2 - ((z-z0)/sz)^2)."""

    A: float = 1.0
    x0: float = 0.0
    z0: float = 0.0
    sigma_x: float = 1.0
    sigma_z: float = 1.0

    def __post_init__(self):
        if self.sigma_x <= 0 or self.sigma_z <= 0:
            raise ValueError("Gaussian widths must be positive")


def gaussian_profile(spec: GaussianSpec, x, z):
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    return spec.A * np.exp(-((x - spec.x0) / spec.sigma_x) ** 2
                           - ((z - spec.z0) / spec.sigma_z) ** 2)


def exact_gaussian_advdiff(spec: GaussianSpec, mu_x, mu_z, u_x, u_z, x, z, t):
    """Spreading, translating Gaussian solving the constant-coefficient
    advection-diffusion equation on the whole plane."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    sx2 = spec.sigma_x**2 + 4.0 * mu_x * t
    sz2 = spec.sigma_z**2 + 4.0 * mu_z * t
    amp = spec.A / (np.sqrt(1.0 + 4.0 * mu_x * t / spec.sigma_x**2)
                    * np.sqrt(1.0 + 4.0 * mu_z * t / spec.sigma_z**2))
    return amp * np.exp(-((x - spec.x0 - u_x * t) ** 2) / sx2
                        - ((z - spec.z0 - u_z * t) ** 2) / sz2)


def sigmoid_gamma(dgamma, alpha, L0, sigma_D, L_z, z):
    """Sigmoid damping coefficient, midpoint at z = L_z + alpha*L0."""
    if sigma_D <= 0:
        raise ValueError("sigmoid steepness must be positive")
    z = np.asarray(z, dtype=float)
    return dgamma / (1.0 + np.exp((alpha * L0 - z + L_z) / sigma_D))


def wavetrain_bc(A, kappa, T, x0, sigma0, x, t):
    """Sinusoidal-in-time Gaussian-in-x boundary datum (wave maker)."""
    if T <= 0:
        raise ValueError("period parameter T must be positive")
    x = np.asarray(x, dtype=float)
    return A * np.sin(2.0 * kappa * np.pi * t / T) * np.exp(-((x - x0) / sigma0) ** 2)


def manufactured_solution(x, z, t, L_x=1.0, mu_x=0.05, mu_z=0.01,
                          u_x=1.0, u_z=2.0):
    """Imposed exact solution and matching source of the convergence study.

    q = exp(-((x-x0)/s0)^2) * z e^{-z} sin^2(z-t) with x0 = L_x/2 and
    s0 = L_x/10; f collects dq/dt + u.grad q - mu.lap q for gamma = 0.
    Returns (q, f).
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    x0, s0 = 0.5 * L_x, 0.1 * L_x
    g = np.exp(-((x - x0) / s0) ** 2)
    gp = g * (-2.0 * (x - x0) / s0**2)
    gpp = g * (4.0 * (x - x0) ** 2 / s0**4 - 2.0 / s0**2)
    ez = np.exp(-z)
    s2 = np.sin(z - t) ** 2
    sin2 = np.sin(2.0 * (z - t))
    cos2 = np.cos(2.0 * (z - t))
    w = z * ez * s2
    w_t = -z * ez * sin2
    w_z = ez * ((1.0 - z) * s2 + z * sin2)
    w_zz = ez * ((z - 2.0) * s2 + (2.0 - 2.0 * z) * sin2 + 2.0 * z * cos2)
    q = g * w
    f = g * w_t + u_x * gp * w + u_z * g * w_z - mu_x * gpp * w - mu_z * g * w_zz
    return q, f


@dataclass
class ProblemSpec:
    """Everything a transient run needs besides the mesh and degrees."""

    model: FluxModel
    bc: BoundarySpec
    mu_x: float = 0.0
    mu_z: float = 0.0
    gamma: object = None                 # None, scalar, or gamma(x, z)
    source: Optional[Callable] = None    # f(x, z, t), scalar problems
    initial: Optional[Callable] = None   # q0(x, z), deviation from background
    q_D: Optional[Callable] = None       # Dirichlet datum (x, z, t)
    q_N: Optional[Callable] = None       # Neumann datum (x, z, t)
    eps: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.mu_x < 0 or self.mu_z < 0:
            raise ValueError("diffusivities must be nonnegative")
