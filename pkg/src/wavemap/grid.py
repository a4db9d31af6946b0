"""Uniform grid on the unit square and reflective fourth-order stencils.

The computational domain is the quarter [0,1]^2 of the symmetric square
[-1,1]^2. Ghost values across x=0 and y=0 come from the per-component
reflection parity, across x=1 and y=1 from even reflection (homogeneous
Neumann). Arrays are indexed ``f[i, j]`` with ``x = i*h`` and ``y = j*h``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels

MIN_POINTS = 9

EVEN = 1
ODD = -1


@dataclass(frozen=True)
class Parity:
    """Reflection behaviour of a field across the symmetry lines x=0, y=0."""

    across_x0: int = EVEN
    across_y0: int = EVEN

    def __post_init__(self):
        if self.across_x0 not in (EVEN, ODD) or self.across_y0 not in (EVEN, ODD):
            raise ValueError("parity values must be EVEN (+1) or ODD (-1)")

    def d_dx(self):
        return Parity(-self.across_x0, self.across_y0)

    def d_dy(self):
        return Parity(self.across_x0, -self.across_y0)


# Component parities of the map (u, v, w), fixed by the reflection symmetry
# of the static solution and the initial data.
U_PARITY = Parity(ODD, EVEN)
V_PARITY = Parity(EVEN, ODD)
W_PARITY = Parity(EVEN, EVEN)
FIELD_PARITIES = (U_PARITY, V_PARITY, W_PARITY)
PARITY_X = tuple(float(p.across_x0) for p in FIELD_PARITIES)
PARITY_Y = tuple(float(p.across_y0) for p in FIELD_PARITIES)


def _check_points(n):
    if n < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} points per axis, got {n}")


@dataclass(frozen=True)
class Grid:
    """N x N points on [0,1]^2 with spacing h = 1/(N-1)."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)):
            raise TypeError("n must be an integer")
        _check_points(int(self.n))

    @property
    def h(self):
        return 1.0 / (self.n - 1)

    @property
    def shape(self):
        return (self.n, self.n)

    @cached_property
    def coords(self):
        return np.arange(self.n) * self.h

    @cached_property
    def mesh(self):
        """Coordinate arrays ``(X, Y)`` with ``X[i, j] = i*h``."""
        return np.meshgrid(self.coords, self.coords, indexing="ij")

    @cached_property
    def radius(self):
        x, y = self.mesh
        return np.hypot(x, y)

    @cached_property
    def angle(self):
        x, y = self.mesh
        return np.arctan2(y, x)

    @cached_property
    def weights(self):
        """Trapezoidal cell weights on the quarter domain (boundary halving)."""
        w1 = np.full(self.n, self.h)
        w1[0] *= 0.5
        w1[-1] *= 0.5
        return np.outer(w1, w1)

    def inner(self, f, g):
        """Weighted inner product over the full symmetric square."""
        return 4.0 * float(np.sum(self.weights * f * g))

    @classmethod
    def for_field(cls, f):
        f = np.asarray(f)
        if f.ndim < 2 or f.shape[-1] != f.shape[-2]:
            raise ValueError(f"expected square lattice field, got shape {f.shape}")
        return cls(int(f.shape[-1]))


def _inv12h(f):
    n = np.shape(f)[-1]
    _check_points(n)
    return (n - 1) / 12.0


def apply_gradient_x(f, parity=W_PARITY):
    """Fourth-order centred d/dx with parity ghosts at x=0, even at x=1."""
    return kernels.gradient(f, 0, float(parity.across_x0), 1.0, _inv12h(f))


def apply_gradient_y(f, parity=W_PARITY):
    """Fourth-order centred d/dy with parity ghosts at y=0, even at y=1."""
    return kernels.gradient(f, 1, float(parity.across_y0), 1.0, _inv12h(f))


def apply_laplacian(f, parity=W_PARITY):
    """Variational Laplacian -(D_x^T D_x + D_y^T D_y) of a scalar field.

    Equal to applying the reflected first-derivative stencil twice along each
    axis; the derivative field flips parity at every edge. The result is
    self-adjoint under :meth:`Grid.inner`.
    """
    return kernels.laplacian(f, float(parity.across_x0), float(parity.across_y0), _inv12h(f))
