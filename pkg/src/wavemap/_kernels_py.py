"""NumPy implementations of the hot kernels.

This is the fallback used when the compiled extension is not available.
The arithmetic is ordered exactly like the Cython kernels so both
backends agree bit for bit on the same platform.
"""
import numpy as np

NAME = "python"


def gradient(f, axis, inner, outer, inv12h):
    """Fourth-order centred first derivative of a 2-D array along ``axis``.

    Ghost values at index -1, -2 are ``inner * f[1], inner * f[2]`` and at
    N, N+1 they are ``outer * f[N-2], outer * f[N-3]`` (point reflection).
    """
    fm = np.moveaxis(np.asarray(f, dtype=np.float64), axis, 0)
    n = fm.shape[0]
    pad = np.empty((n + 4,) + fm.shape[1:], dtype=np.float64)
    pad[2:n + 2] = fm
    pad[1] = inner * fm[1]
    pad[0] = inner * fm[2]
    pad[n + 2] = outer * fm[n - 2]
    pad[n + 3] = outer * fm[n - 3]
    d = ((pad[0:n] - 8.0 * pad[1:n + 1]) + 8.0 * pad[3:n + 3]) - pad[4:n + 4]
    d *= inv12h
    return np.ascontiguousarray(np.moveaxis(d, 0, axis))


def laplacian(f, px, py, inv12h):
    """Variational Laplacian D_x(D_x f) + D_y(D_y f).

    ``px``/``py`` are the reflection signs of ``f`` across x=0 / y=0. The
    outer edges reflect evenly for ``f`` and hence oddly for its derivative.
    """
    gx = gradient(f, 0, px, 1.0, inv12h)
    lxx = gradient(gx, 0, -px, -1.0, inv12h)
    gy = gradient(f, 1, py, 1.0, inv12h)
    lyy = gradient(gy, 1, -py, -1.0, inv12h)
    return lxx + lyy


def laplacian3(q, parities_x, parities_y, inv12h):
    out = np.empty_like(q, dtype=np.float64)
    for c in range(q.shape[0]):
        out[c] = laplacian(q[c], parities_x[c], parities_y[c], inv12h)
    return out


def _dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def rattle_position(q, p, force, dt):
    """Position stage of RATTLE, solved pointwise in closed form.

    Returns ``(q_new, p_half, c, disc)`` where ``c = dt**2 * lambda`` and
    ``disc`` is the discriminant of the per-point quadratic. Points with a
    negative discriminant are left with ``c = nan``.
    """
    a = q + dt * p + (0.5 * dt * dt) * force
    qq = _dot3(q, q)
    aq = _dot3(a, q)
    aa = _dot3(a, a)
    disc = aq * aq - qq * (aa - 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = np.sqrt(disc)
        den = aq + np.copysign(sq, aq)
        c = (1.0 - aa) / den
    q_new = a + c * q
    p_half = p + (0.5 * dt) * force + (c / dt) * q
    return q_new, p_half, c, disc


def rattle_velocity(q_new, p_half, force_new, dt):
    """Velocity stage of RATTLE; returns ``(p_new, d)`` with ``d = dt * mu``."""
    b = p_half + (0.5 * dt) * force_new
    d = -_dot3(b, q_new) / _dot3(q_new, q_new)
    return b + d * q_new, d
