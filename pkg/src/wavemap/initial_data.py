"""Ring-shaped, non-equivariant initial data with an ingoing velocity."""
import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import SimState

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class InitialDataParams:
    """Amplitude ``A``, equivariance breaking ``B`` (B=1 is equivariant),
    ring radii ``r1 < r2`` and angular transition width ``sigma0``."""

    A: float
    B: float = 0.8
    r1: float = 0.07
    r2: float = 0.57
    sigma0: float = math.pi / 8
    k: int = 1

    def __post_init__(self):
        if not 0.0 < self.B <= 1.0:
            raise ValueError(f"B must lie in (0, 1], got {self.B}")
        if not 0.0 < self.r1 < self.r2 <= 1.0:
            raise ValueError(f"need 0 < r1 < r2 <= 1, got r1={self.r1}, r2={self.r2}")
        if not 0.0 < self.sigma0 <= math.pi / 4:
            raise ValueError(f"sigma0 must lie in (0, pi/4], got {self.sigma0}")
        if self.k != 1:
            raise ValueError("only homotopy index k = 1 is supported")

    def with_amplitude(self, A):
        return replace(self, A=A)


def smoothstep9(x):
    """Degree-9 smoothstep: 0 -> 1 on [0, 1] with four vanishing derivatives at both ends."""
    x = np.clip(x, 0.0, 1.0)
    x5 = x ** 5
    return x5 * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + 70.0 * x))))


def radial_profile(r, r1, r2):
    """``g(r) = [4 (r - r1)(r2 - r) / (r2 - r1)^2]^4`` on [r1, r2], zero outside."""
    r = np.asarray(r, dtype=np.float64)
    t = (r - r1) / (r2 - r1)
    inside = (t >= 0.0) & (t <= 1.0)
    base = np.where(inside, 4.0 * t * (1.0 - t), 0.0)
    return base ** 4


def radial_profile_derivative(r, r1, r2):
    r = np.asarray(r, dtype=np.float64)
    width = r2 - r1
    t = (r - r1) / width
    inside = (t >= 0.0) & (t <= 1.0)
    base = np.where(inside, 4.0 * t * (1.0 - t), 0.0)
    return np.where(inside, 4.0 * base ** 3 * 4.0 * (1.0 - 2.0 * t) / width, 0.0)


def angular_profile(sigma, B, sigma0):
    """Angular modulation h(sigma) on [0, pi/2], symmetric about pi/4."""
    sigma = np.asarray(sigma, dtype=np.float64)
    dist = np.minimum(sigma, HALF_PI - sigma)
    return B + (1.0 - B) * smoothstep9(dist / sigma0)


def theta0(r, sigma, params: InitialDataParams):
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any((sigma < 0.0) | (sigma > HALF_PI)):
        raise ValueError("sigma must lie in [0, pi/2]")
    return params.A * radial_profile(r, params.r1, params.r2) * angular_profile(sigma, params.B, params.sigma0)


def theta0_dr(r, sigma, params: InitialDataParams):
    """Radial derivative of theta0 at fixed sigma."""
    return (params.A * radial_profile_derivative(r, params.r1, params.r2)
            * angular_profile(sigma, params.B, params.sigma0))


def build_initial_state(params: InitialDataParams, grid):
    """Sample positions and ingoing velocities on ``grid``.

    Positions ``(sin th cos s, sin th sin s, cos th)`` lie on the sphere by
    construction; the velocity ``d/dr`` of the positions is tangent to it.
    """
    if params.r1 <= 2.0 * grid.h:
        raise ValueError(f"r1={params.r1} must exceed two grid spacings ({2 * grid.h:.4g})")
    if params.r2 > 1.0:
        raise ValueError("r2 must not exceed 1")
    r = grid.radius
    sigma = grid.angle
    th = theta0(r, sigma, params)
    dth = theta0_dr(r, sigma, params)
    cs, sn = np.cos(sigma), np.sin(sigma)
    # u vanishes identically on x = 0 and v on y = 0 (odd reflections)
    cs[0, :] = 0.0
    sn[:, 0] = 0.0
    sin_th, cos_th = np.sin(th), np.cos(th)
    q = np.array([sin_th * cs, sin_th * sn, cos_th])
    p = np.array([cos_th * dth * cs, cos_th * dth * sn, -sin_th * dth])
    return SimState(q, p, t=0.0, step=0)


def initial_slice_minima(params: InitialDataParams, grid):
    """Minimum of w at t = 0 along the x-axis and the diagonal grid points."""
    i = np.arange(grid.n)
    r_x = i * grid.h
    w_x = np.cos(theta0(r_x, np.zeros_like(r_x), params))
    r_d = math.sqrt(2.0) * r_x
    w_d = np.cos(theta0(r_d, np.full_like(r_d, math.pi / 4), params))
    return float(w_x.min()), float(w_d.min())


def calibrate_ring(params: InitialDataParams, grid, target_x, target_diag, r1_values, r2_values):
    """Sweep ``(r1, r2)`` for the best match of the t = 0 slice minima.

    Returns a list of ``(mismatch, r1, r2, w_x, w_diag)`` sorted by mismatch,
    where mismatch is the larger absolute deviation of the two minima.
    """
    rows = []
    for r1 in r1_values:
        for r2 in r2_values:
            if not r1 < r2 <= 1.0 or r1 <= 2.0 * grid.h:
                continue
            trial = replace(params, r1=float(r1), r2=float(r2))
            wx, wd = initial_slice_minima(trial, grid)
            rows.append((max(abs(wx - target_x), abs(wd - target_diag)), float(r1), float(r2), wx, wd))
    rows.sort()
    return rows
