"""Semi-discrete wave map system: state, forces, constraint and energies.

A ``Field3`` is an array of shape ``(3, N, N)`` holding (u, v, w).
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import kernels
from .grid import PARITY_X, PARITY_Y, Grid, apply_gradient_x, apply_gradient_y, FIELD_PARITIES

DEFAULT_LOCAL_RADIUS = 0.25


@dataclass
class SimState:
    q: np.ndarray
    p: np.ndarray
    t: float = 0.0
    step: int = 0

    def __post_init__(self):
        self.q = np.ascontiguousarray(self.q, dtype=np.float64)
        self.p = np.ascontiguousarray(self.p, dtype=np.float64)
        if self.q.shape != self.p.shape or self.q.ndim != 3 or self.q.shape[0] != 3:
            raise ValueError(f"q and p must both have shape (3, N, N); got {self.q.shape}, {self.p.shape}")

    @property
    def grid(self):
        return Grid.for_field(self.q)

    def copy(self):
        return replace(self, q=self.q.copy(), p=self.p.copy())


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    potential: float
    local_kinetic: float
    local_potential: float
    radius: float

    @property
    def total(self):
        return self.kinetic + self.potential

    @property
    def local_total(self):
        return self.local_kinetic + self.local_potential


def constraint_residual(q):
    q = np.asarray(q, dtype=np.float64)
    return q[0] * q[0] + q[1] * q[1] + q[2] * q[2] - 1.0


def tangency_residual(q, p):
    return q[0] * p[0] + q[1] * p[1] + q[2] * p[2]


def force(q):
    """Unconstrained force: the variational Laplacian of each component."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    inv12h = (q.shape[-1] - 1) / 12.0
    return kernels.laplacian3(q, PARITY_X, PARITY_Y, inv12h)


def tangential_part(vec, q):
    """Pointwise projection of ``vec`` onto the tangent plane of the sphere at ``q``."""
    qq = q[0] * q[0] + q[1] * q[1] + q[2] * q[2]
    return vec - (tangency_residual(q, vec) / qq) * q


def constrained_acceleration(q, p=None):
    """Acceleration of the constrained system at ``(q, p)``.

    Projects the force tangentially and adds the centripetal term
    ``-|p|^2 q`` that keeps the trajectory on the sphere.
    """
    a = tangential_part(force(q), q)
    if p is not None:
        a = a - (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) * q
    return a


def static_solution(x, y, pole="south"):
    """Inverse stereographic projection; ``pole="south"`` gives w(0,0) = +1."""
    if pole not in ("south", "north"):
        raise ValueError("pole must be 'south' or 'north'")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r2 = x * x + y * y
    den = 1.0 + r2
    sign = 1.0 if pole == "south" else -1.0
    return 2.0 * x / den, 2.0 * y / den, sign * (1.0 - r2) / den


def static_field(grid, scale=1.0, pole="south"):
    """The static solution ``U_S(x/scale, y/scale)`` sampled on ``grid``."""
    x, y = grid.mesh
    return np.array(static_solution(x / scale, y / scale, pole))


def constant_field(grid, value=(0.0, 0.0, 1.0)):
    out = np.empty((3,) + grid.shape)
    for c in range(3):
        out[c] = value[c]
    return out


def potential_density(q):
    """Pointwise ``|D_x q|^2 + |D_y q|^2`` (before the 1/2 and weights)."""
    dens = np.zeros(q.shape[1:])
    for c, par in enumerate(FIELD_PARITIES):
        gx = apply_gradient_x(q[c], par)
        gy = apply_gradient_y(q[c], par)
        dens += gx * gx + gy * gy
    return dens


def potential_energy(q):
    grid = Grid.for_field(q)
    return 2.0 * float(np.sum(grid.weights * potential_density(q)))


def energy(state, radius: Optional[float] = DEFAULT_LOCAL_RADIUS):
    """Discrete energy of ``state`` on the full square [-1,1]^2.

    ``E = 1/2 sum w_ij (|p|^2 + |D_x q|^2 + |D_y q|^2)`` with trapezoidal
    weights, times 4 for the symmetric extension. The local parts restrict the
    sum to ``r <= radius``.
    """
    grid = state.grid
    if radius is None:
        radius = DEFAULT_LOCAL_RADIUS
    if not 0.0 < radius <= 1.0:
        raise ValueError(f"local radius must lie in (0, 1], got {radius}")
    p = state.p
    kin = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) * grid.weights
    pot = potential_density(state.q) * grid.weights
    ball = grid.radius <= radius
    return EnergyReport(
        kinetic=2.0 * float(np.sum(kin)),
        potential=2.0 * float(np.sum(pot)),
        local_kinetic=2.0 * float(np.sum(kin[ball])),
        local_potential=2.0 * float(np.sum(pot[ball])),
        radius=float(radius),
    )
