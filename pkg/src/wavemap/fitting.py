"""Least-squares fit of a measured scaling series to the collapse law

    s(t) = (1.04 / e) (T - t) exp(-sqrt(-ln(T - t) + b)).

Only the blow-up time ``T`` and the data-dependent ``b`` are fitted; the
prefactor is fixed. ``T`` is kept beyond the fit window through the
substitution ``T = t_hi + exp(tau)``.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

PREFACTOR = 1.04 / math.e
MIN_SAMPLES = 8
BRANCH_TOL = 1e-12


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class FitResult:
    T: float
    b: float
    residual: float
    window: Tuple[float, float]
    iterations: int = 0
    n_samples: int = 0

    def as_dict(self):
        return {"T": self.T, "b": self.b, "residual": self.residual,
                "t_lo": self.window[0], "t_hi": self.window[1],
                "iterations": self.iterations, "n_samples": self.n_samples}


def model_s(t, T, b):
    """Collapse law; raises ``ValueError`` outside its domain."""
    t = np.asarray(t, dtype=np.float64)
    d = T - t
    if np.any(d <= 0.0):
        raise ValueError("model_s requires t < T")
    arg = -np.log(d) + b
    # round-off at the branch point may leave a tiny negative argument
    if np.any(arg < -BRANCH_TOL * (1.0 + abs(b))):
        raise ValueError("model_s requires -ln(T - t) + b >= 0")
    out = PREFACTOR * d * np.exp(-np.sqrt(np.maximum(arg, 0.0)))
    return float(out) if out.ndim == 0 else out


def _model_and_jacobian(t, T, b, dT_dtau):
    """Model values and the Jacobian w.r.t. (tau, b); ``None`` off-domain."""
    d = T - t
    if np.any(d <= 0.0):
        return None
    u = -np.log(d) + b
    if np.any(u <= 0.0):
        return None
    root = np.sqrt(u)
    s = PREFACTOR * d * np.exp(-root)
    ds_dT = (s / d) * (1.0 + 0.5 / root)
    ds_db = -0.5 * s / root
    jac = np.column_stack([ds_dT * dT_dtau, ds_db])
    return s, jac


def _levenberg_marquardt(t, s, t_hi, tau, b, max_iter, tau0=1e-3):
    x = np.array([tau, b], dtype=np.float64)

    def evaluate(x):
        T = t_hi + math.exp(x[0])
        out = _model_and_jacobian(t, T, x[1], T - t_hi)
        if out is None:
            return None
        m, jac = out
        r = s - m
        return r, -jac, float(r @ r)

    cur = evaluate(x)
    if cur is None:
        raise NonConvergence("initial guess lies outside the model domain")
    r, J, cost = cur
    A = J.T @ J
    mu = tau0 * float(np.max(np.diag(A)))
    nu = 2.0
    for it in range(1, max_iter + 1):
        g = J.T @ r
        if cost == 0.0 or float(np.max(np.abs(g))) <= 1e-30:
            return x, cost, it
        step = np.linalg.solve(A + mu * np.diag(np.diag(A)), -g)
        x_new = x + step
        trial = evaluate(x_new)
        if trial is not None:
            r_new, J_new, cost_new = trial
            predicted = -(step @ (2.0 * g + A @ step))  # decrease of the linear model
            rho = (cost - cost_new) / predicted if predicted > 0 else -1.0
        else:
            rho = -1.0
        if rho > 0:
            converged = (np.all(np.abs(step) <= 1e-15 * (np.abs(x) + 1e-12))
                         or cost - cost_new <= 1e-15 * cost)
            x, r, J, cost = x_new, r_new, J_new, cost_new
            A = J.T @ J
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            if converged:
                return x, cost, it
        else:
            if mu > 1e300 / nu:
                return x, cost, it  # no descent direction left at working precision
            mu *= nu
            nu *= 2.0
    raise NonConvergence(f"no convergence after {max_iter} iterations (cost {cost:.3e})")


def window_samples(series, window):
    t, s = (np.asarray(a, dtype=np.float64) for a in series.arrays())
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ValueError("fit window must satisfy t_lo < t_hi")
    if t.size == 0 or t_lo < t.min() - 1e-12 or t_hi > t.max() + 1e-12:
        raise ValueError(f"fit window [{t_lo}, {t_hi}] not covered by the series")
    mask = (t >= t_lo - 1e-12) & (t <= t_hi + 1e-12)
    if mask.sum() < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples in the window, got {int(mask.sum())}")
    return t[mask], s[mask]


def initial_guess(t, s, t_hi):
    """``T0 = t_hi + 2 s(t_hi)``, ``b0 = 0``."""
    return t_hi + 2.0 * float(s[np.argmax(t)]), 0.0


def fit_scaling(series, window, init: Optional[Tuple[float, float]] = None,
                max_iter=200, residual_ceiling: Optional[float] = None) -> FitResult:
    """Fit (T, b) over ``window`` by Levenberg-Marquardt.

    Raises :class:`NonConvergence` on iteration exhaustion or if the final
    sum of squares exceeds ``residual_ceiling``.
    """
    t, s = window_samples(series, window)
    t_hi = float(window[1])
    T0, b0 = initial_guess(t, s, t_hi) if init is None else init
    if not T0 > t_hi:
        raise ValueError("initial T must exceed the end of the fit window")
    x, cost, iters = _levenberg_marquardt(t, s, t_hi, math.log(T0 - t_hi), b0, max_iter)
    if residual_ceiling is not None and cost > residual_ceiling:
        raise NonConvergence(f"fit residual {cost:.3e} exceeds ceiling {residual_ceiling:.3e}")
    T = t_hi + math.exp(x[0])
    return FitResult(T=T, b=float(x[1]), residual=float(cost), window=(float(window[0]), t_hi),
                     iterations=iters, n_samples=int(t.size))


def default_window(series, fraction=0.2):
    """Last ``fraction`` of the final decreasing branch of s(t)."""
    t, s = (np.asarray(a, dtype=np.float64) for a in series.arrays())
    if t.size < 3:
        raise ValueError("series too short")
    k = int(np.argmin(s))
    j = k
    while j > 0 and s[j - 1] >= s[j]:
        j -= 1
    t_start, t_end = t[j], t[k]
    if t_end <= t_start:
        raise ValueError("series has no decreasing branch")
    return (t_end - fraction * (t_end - t_start), t_end)
