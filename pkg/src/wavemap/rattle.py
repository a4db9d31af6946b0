"""RATTLE time stepping with one sphere constraint per grid point.

Every constraint involves a single grid point, so both projection stages
decouple: the position stage is a scalar quadratic for ``c = dt**2 * lambda``
per point, the velocity stage a scalar linear equation.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .dynamics import SimState, constraint_residual, force as lattice_force, tangency_residual


@dataclass(frozen=True)
class RattleConfig:
    dt: float
    projection_tol: float = 1e-12
    max_projection_iters: int = 50

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.projection_tol > 0:
            raise ValueError("projection_tol must be positive")
        if self.max_projection_iters < 1:
            raise ValueError("max_projection_iters must be >= 1")


@dataclass(frozen=True)
class StepReport:
    lambda_max: float
    mu_max: float
    projection_iters_max: int
    constraint_residual_max: float
    tangency_residual_max: float
    failed_points: int = 0


class ProjectionFailure(RuntimeError):
    """The position-stage projection found no admissible root at some points."""

    def __init__(self, message, report, points):
        super().__init__(message)
        self.report = report
        self.points = points


def _newton_fallback(a, q, c, bad, tol, max_iters):
    """Newton on ``|a + c q|^2 - 1 = 0`` from ``c = 0`` at the flagged points.

    Updates ``c`` in place; returns (still-failing mask, iterations used).
    """
    idx = np.nonzero(bad)
    av = a[(slice(None),) + idx]
    qv = q[(slice(None),) + idx]
    cv = np.zeros(av.shape[1])
    ok = np.zeros(av.shape[1], dtype=bool)
    iters = 0
    for iters in range(1, max_iters + 1):
        r = av + cv * qv
        f = np.sum(r * r, axis=0) - 1.0
        ok = np.abs(f) <= tol
        if ok.all():
            break
        df = 2.0 * np.sum(r * qv, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(ok, 0.0, f / df)
        cv = cv - np.nan_to_num(step, nan=0.0, posinf=0.0, neginf=0.0)
    c[idx] = cv
    still = np.zeros_like(bad)
    still[idx] = ~ok
    return still, iters


def _polish(a, q, c, tol, max_iters):
    """Newton refinement of the closed-form root where round-off exceeds ``tol``."""
    iters = 0
    for iters in range(max_iters):
        r = a + c * q
        f = r[0] * r[0] + r[1] * r[1] + r[2] * r[2] - 1.0
        bad = np.abs(f) > tol
        if not bad.any():
            return iters
        df = 2.0 * (r[0] * q[0] + r[1] * q[1] + r[2] * q[2])
        c[bad] -= f[bad] / df[bad]
    return iters


def rattle_step(state: SimState, cfg: RattleConfig,
                force: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                force_q: Optional[np.ndarray] = None):
    """Advance ``state`` by one RATTLE step.

    ``force`` defaults to the lattice Laplacian; any pointwise-callable with
    the same signature may be supplied (the free-rotor check uses zero).
    ``force_q`` may carry the force at ``state.q`` from the previous step.
    Returns ``(new_state, report, force_at_new_q)``.

    Raises :class:`ProjectionFailure` when the position stage has no real
    root at some point and Newton from ``lambda = 0`` does not converge.
    """
    force = lattice_force if force is None else force
    dt = cfg.dt
    q, p = state.q, state.p
    f0 = force(q) if force_q is None else force_q

    q_new, p_half, c, disc = kernels.rattle_position(q, p, f0, dt)
    iters = 1
    bad = ~(disc >= 0.0)
    if bad.any():
        a = q + dt * p + (0.5 * dt * dt) * f0
        still, it = _newton_fallback(a, q, c, bad, cfg.projection_tol, cfg.max_projection_iters)
        iters = max(iters, it)
        if still.any():
            pts = np.argwhere(still)
            report = StepReport(
                lambda_max=float(np.nanmax(np.abs(c))) / (dt * dt) if np.isfinite(c).any() else float("nan"),
                mu_max=float("nan"),
                projection_iters_max=iters,
                constraint_residual_max=float("inf"),
                tangency_residual_max=float("nan"),
                failed_points=int(still.sum()),
            )
            raise ProjectionFailure(
                f"no admissible projection root at {len(pts)} point(s) near t={state.t + dt:.6g}",
                report, pts)
        q_new = a + c * q
        p_half = p + (0.5 * dt) * f0 + (c / dt) * q

    res = np.abs(constraint_residual(q_new))
    if res.max() > cfg.projection_tol:
        a = q + dt * p + (0.5 * dt * dt) * f0
        iters += _polish(a, q, c, cfg.projection_tol, cfg.max_projection_iters)
        q_new = a + c * q
        p_half = p + (0.5 * dt) * f0 + (c / dt) * q
        res = np.abs(constraint_residual(q_new))
        if res.max() > cfg.projection_tol:
            report = StepReport(float(np.max(np.abs(c))) / (dt * dt), float("nan"), iters,
                                float(res.max()), float("nan"), int((res > cfg.projection_tol).sum()))
            raise ProjectionFailure(
                f"projection residual {res.max():.3e} above tolerance near t={state.t + dt:.6g}",
                report, np.argwhere(res > cfg.projection_tol))

    f1 = force(q_new)
    p_new, d = kernels.rattle_velocity(q_new, p_half, f1, dt)

    new_state = SimState(q_new, p_new, t=state.t + dt, step=state.step + 1)
    report = StepReport(
        lambda_max=float(np.max(np.abs(c))) / (dt * dt),
        mu_max=float(np.max(np.abs(d))) / dt,
        projection_iters_max=iters,
        constraint_residual_max=float(res.max()),
        tangency_residual_max=float(np.max(np.abs(tangency_residual(q_new, p_new)))),
    )
    return new_state, report, f1


def project_to_constraint(q, p):
    """Normalise ``q`` pointwise and remove the normal component of ``p``."""
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    norm = np.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2])
    if np.any(norm < 0.5):
        raise ValueError("cannot project points with |q| < 0.5 onto the sphere")
    q_new = q / norm
    qp = tangency_residual(q_new, p)
    p_new = p - qp * q_new
    return q_new, p_new
