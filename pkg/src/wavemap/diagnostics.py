"""Blow-up diagnostics read off the w component.

Scaling function from the Hessian at the origin, the pole-switch ("flip")
detector, slices along the x-axis and the diagonal, and rescaled profiles.
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np


GAUSS = "gauss_curvature"
MEAN = "mean_curvature"
METHODS = (GAUSS, MEAN)

X_AXIS = "x_axis"
DIAGONAL = "diagonal"
DIRECTIONS = (X_AXIS, DIAGONAL)
_DIRECTION_ALIASES = {"x": X_AXIS, "x_axis": X_AXIS, "diag": DIAGONAL, "diagonal": DIAGONAL}

_FIRST_DERIV = np.array([1.0, -8.0, 0.0, 8.0, -1.0])

FLIP_THRESHOLD = 0.0
FLIP_GUARD = 0.5


def direction_name(direction):
    try:
        return _DIRECTION_ALIASES[direction]
    except KeyError:
        raise ValueError(f"unknown direction {direction!r}; use one of {sorted(_DIRECTION_ALIASES)}") from None


@dataclass
class ScalingSeries:
    times: List[float] = field(default_factory=list)
    s_values: List[float] = field(default_factory=list)
    method: str = GAUSS

    def append(self, t, s):
        if s is None or not s > 0:
            return
        self.times.append(float(t))
        self.s_values.append(float(s))

    def __len__(self):
        return len(self.times)

    def arrays(self):
        return np.asarray(self.times), np.asarray(self.s_values)


@dataclass(frozen=True)
class FlipEvent:
    step_index: int
    time: float
    w_origin_before: float
    w_origin_after: float


@dataclass
class SliceProfile:
    direction: str
    radii: np.ndarray
    w_values: np.ndarray
    time: float = 0.0


def hessian_at_origin(w):
    """2x2 Hessian of an even/even field at (0, 0), fourth-order accurate.

    Diagonal entries use the five-point second-derivative stencil with even
    ghosts; the mixed entry is the composition D_y D_x.
    """
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[-1]
    h = 1.0 / (n - 1)
    c = 1.0 / (12.0 * h * h)
    wxx = (-2.0 * w[2, 0] + 32.0 * w[1, 0] - 30.0 * w[0, 0]) * c
    wyy = (-2.0 * w[0, 2] + 32.0 * w[0, 1] - 30.0 * w[0, 0]) * c
    # D_y D_x on the 5x5 ghosted patch; even ghosts mirror |offset|
    idx = np.abs(np.arange(-2, 3))
    patch = w[np.ix_(idx, idx)]
    wxy = float(_FIRST_DERIV @ patch @ _FIRST_DERIV) / (144.0 * h * h)
    return np.array([[wxx, wxy], [wxy, wyy]])


def scaling_from_hessian(H, method=GAUSS) -> Optional[float]:
    """Scaling s from det H = 16/s^4 (Gauss) or tr H = -8/s^2 (mean).

    Returns ``None`` when the sign conditions fail, i.e. the field is not
    bump-like at the origin.
    """
    H = np.asarray(H, dtype=np.float64)
    tr = H[0, 0] + H[1, 1]
    if method == GAUSS:
        det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
        if det > 0.0 and tr < 0.0:
            return (16.0 / det) ** 0.25
        return None
    if method == MEAN:
        if tr < 0.0:
            return math.sqrt(-8.0 / tr)
        return None
    raise ValueError(f"unknown method {method!r}")


def detect_flip(w_origin_history: Sequence) -> Optional[FlipEvent]:
    """First sample where w(0,0) drops below 0 after having exceeded +0.5.

    ``w_origin_history`` holds ``(t, w)`` pairs, one per step.
    """
    armed = False
    prev = None
    for k, (t, w) in enumerate(w_origin_history):
        if armed and w < FLIP_THRESHOLD:
            return FlipEvent(k, float(t), float(prev), float(w))
        if w > FLIP_GUARD:
            armed = True
        prev = w
    return None


class FlipDetector:
    """Incremental form of :func:`detect_flip` for use inside a time loop."""

    def __init__(self):
        self.armed = False
        self.prev = None
        self.count = 0
        self.event = None

    def update(self, t, w):
        if self.event is None:
            if self.armed and w < FLIP_THRESHOLD:
                self.event = FlipEvent(self.count, float(t), float(self.prev), float(w))
            elif w > FLIP_GUARD:
                self.armed = True
        self.prev = w
        self.count += 1
        return self.event


def slice_values(w, direction):
    direction = direction_name(direction)
    w = np.asarray(w)
    if direction == X_AXIS:
        return np.array(w[:, 0])
    return np.array(np.diagonal(w))


def slice_radii(n, direction):
    h = 1.0 / (n - 1)
    r = np.arange(n) * h
    return r if direction_name(direction) == X_AXIS else math.sqrt(2.0) * r


def extract_slice(w, direction, time=0.0):
    direction = direction_name(direction)
    w = np.asarray(w)
    return SliceProfile(direction, slice_radii(w.shape[-1], direction), slice_values(w, direction), float(time))


def interpolate_even(values, spacing, radii):
    """Cubic (four-point) Lagrange interpolation of an even 1-D profile.

    ``values[k]`` is the profile at ``k * spacing``. Evenness about r=0
    supplies the left ghost; near the far end the stencil is shifted inward.
    """
    values = np.asarray(values, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    n = values.size
    rmax = (n - 1) * spacing
    if np.any(radii < 0) or np.any(radii > rmax * (1 + 1e-12)):
        raise ValueError("interpolation radius outside the sampled range")
    ext = np.concatenate([values[1:2], values])  # ext[k+1] = values[k], ext[0] = values[1]
    x = radii / spacing
    k = np.clip(np.floor(x).astype(int), 0, n - 2)
    start = np.minimum(k - 1, n - 4)  # leftmost node index (may be -1)
    tloc = x - start
    out = np.zeros_like(x)
    nodes = (0.0, 1.0, 2.0, 3.0)
    for m in range(4):
        basis = np.ones_like(x)
        for l in range(4):
            if l != m:
                basis *= (tloc - nodes[l]) / (nodes[m] - nodes[l])
        out += basis * ext[start + m + 1]
    return out


def sample_along(w, direction, radii):
    """Values of ``w`` at distances ``radii`` from the origin along ``direction``."""
    w = np.asarray(w)
    direction = direction_name(direction)
    n = w.shape[-1]
    spacing = slice_radii(n, direction)[1]
    return interpolate_even(slice_values(w, direction), spacing, radii)


def rescaled_profile(w, s, direction, radii=None, time=0.0):
    """``w(s * r_k)`` along ``direction``, to compare with ``w_S(r_k)``.

    Default sample radii are the grid radii of the direction reachable after
    rescaling (``s * r_k`` inside the sampled range).
    """
    if not s > 0:
        raise ValueError(f"scaling must be positive, got {s}")
    direction = direction_name(direction)
    n = np.shape(w)[-1]
    rmax = slice_radii(n, direction)[-1]
    if radii is None:
        h = 1.0 / (n - 1)
        radii = np.arange(0.0, rmax / s + 0.5 * h, h)
        radii = radii[s * radii <= rmax]
    radii = np.asarray(radii, dtype=np.float64)
    return SliceProfile(direction, radii, sample_along(w, direction, s * radii), float(time))


def direction_mismatch(w, rmax=1.0):
    """Max |w_diag - w_x| at the diagonal grid radii up to ``rmax``.

    Diagonal samples are exact grid values; the x-axis is interpolated.
    """
    w = np.asarray(w)
    n = w.shape[-1]
    r_d = slice_radii(n, DIAGONAL)
    keep = r_d <= min(rmax, 1.0)
    wx = sample_along(w, X_AXIS, r_d[keep])
    return float(np.max(np.abs(slice_values(w, DIAGONAL)[keep] - wx)))


def track_minimum(history: Sequence[SliceProfile]):
    """Time and value of the smallest slice value over a profile history."""
    if len(history) < 3:
        raise ValueError("need at least 3 time samples")
    best_t, best_w = None, math.inf
    for prof in history:
        m = float(np.min(prof.w_values))
        if m < best_w:
            best_t, best_w = prof.time, m
    return best_t, best_w


class MinimumTracker:
    """Running minimum of a slice over time (first occurrence wins)."""

    def __init__(self, direction):
        self.direction = direction_name(direction)
        self.t_min = None
        self.w_min = math.inf
        self.w_initial = None

    def update(self, t, w):
        m = float(np.min(slice_values(w, self.direction)))
        if self.w_initial is None:
            self.w_initial = m
        if m < self.w_min:
            self.t_min, self.w_min = float(t), m


def relative_deviation(value, reference):
    """``|value - reference| / |reference|`` (reference: the diagonal value)."""
    return abs(value - reference) / abs(reference)


def hover_duration(times, s_values, band=0.05):
    """Total time during which s stays within ``band`` (relative) of its minimum."""
    times = np.asarray(times, dtype=np.float64)
    s = np.asarray(s_values, dtype=np.float64)
    if s.size < 2:
        return 0.0
    inside = s <= s.min() * (1.0 + band)
    dt = np.diff(times)
    return float(np.sum(dt[inside[:-1] & inside[1:]]))


def decrease_then_increase(s_values, tol=0.0):
    """True if the series decreases to an interior minimum and increases after.

    ``tol`` is the relative slack for wiggles: before the minimum no sample
    may exceed the running minimum by more than ``tol``, after it none may
    fall below the running maximum by more than ``tol``, and the last value
    must exceed the minimum by more than ``tol``.
    """
    s = np.asarray(s_values, dtype=np.float64)
    if s.size < 3:
        return False
    k = int(np.argmin(s))
    if k == 0 or k == s.size - 1:
        return False
    left, right = s[: k + 1], s[k:]
    ok_left = np.all(left <= (1.0 + tol) * np.minimum.accumulate(left))
    ok_right = np.all(right >= (1.0 - tol) * np.maximum.accumulate(right))
    return bool(ok_left and ok_right and s[-1] > (1.0 + tol) * s[k])


@dataclass(frozen=True)
class ShapeReport:
    ok: bool
    t_descent_start: float
    plateau: tuple
    t_min: float
    s_min: float
    s_final: float


def hover_shape(times, s_values, band=0.05, tol=1e-3):
    """Decrease-hover-increase check on the final collapse of s(t).

    The plateau is the contiguous stretch around the minimum within ``band``
    of it; the descent starts at the last local maximum before the plateau,
    so earlier focusing and bounce episodes are ignored. The descent up to
    the plateau and everything after the minimum must be monotone within
    ``tol``; wiggles inside the band count as hovering.
    """
    t = np.asarray(times, dtype=np.float64)
    s = np.asarray(s_values, dtype=np.float64)
    if s.size < 3:
        raise ValueError("need at least 3 samples")
    k = int(np.argmin(s))
    limit = (1.0 + band) * s[k]
    a = k
    while a > 0 and s[a - 1] <= limit:
        a -= 1
    b = k
    while b < s.size - 1 and s[b + 1] <= limit:
        b += 1
    j = a
    while j > 0 and s[j - 1] >= s[j]:
        j -= 1
    descent = s[j:a + 1]
    rise = s[k:]
    ok = (a > j and b > a and k < s.size - 1
          and bool(np.all(descent <= (1.0 + tol) * np.minimum.accumulate(descent)))
          and bool(np.all(rise >= (1.0 - tol) * np.maximum.accumulate(rise)))
          and s[-1] > (1.0 + tol) * s[k])
    return ShapeReport(bool(ok), float(t[j]), (float(t[a]), float(t[b])), float(t[k]), float(s[k]), float(s[-1]))
