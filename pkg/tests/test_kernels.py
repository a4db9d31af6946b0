import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavemap import _kernels_py, kernels
from wavemap.grid import PARITY_X, PARITY_Y

needs_cython = pytest.mark.skipif("cython" not in kernels.available_backends(),
                                  reason="compiled kernels not built")


def test_python_backend_always_available():
    assert "python" in kernels.available_backends()
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_environment_forces_fallback():
    env = dict(os.environ, WAVEMAP_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "from wavemap import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def _state(n, seed):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((3, n, n))
    q /= np.sqrt((q * q).sum(axis=0))
    p = rng.standard_normal((3, n, n))
    p -= (q * p).sum(axis=0) * q
    return q, p


@needs_cython
@given(st.integers(9, 24), st.integers(0, 2**31 - 1))
def test_backends_bitwise_equal(n, seed):
    from wavemap import _ckernels
    q, p = _state(n, seed)
    inv12h = (n - 1) / 12.0
    for mod_a, mod_b in [(_kernels_py, _ckernels)]:
        for axis in (0, 1):
            np.testing.assert_array_equal(mod_a.gradient(q[0], axis, -1.0, 1.0, inv12h),
                                          mod_b.gradient(q[0], axis, -1.0, 1.0, inv12h))
        np.testing.assert_array_equal(mod_a.laplacian(q[2], 1.0, 1.0, inv12h),
                                      mod_b.laplacian(q[2], 1.0, 1.0, inv12h))
        fa = mod_a.laplacian3(q, PARITY_X, PARITY_Y, inv12h)
        fb = mod_b.laplacian3(q, PARITY_X, PARITY_Y, inv12h)
        np.testing.assert_array_equal(fa, fb)
        dt = 1e-3
        ra = mod_a.rattle_position(q, p, fa, dt)
        rb = mod_b.rattle_position(q, p, fb, dt)
        for a, b in zip(ra, rb):
            np.testing.assert_array_equal(a, b)
        va = mod_a.rattle_velocity(ra[0], ra[1], fa, dt)
        vb = mod_b.rattle_velocity(rb[0], rb[1], fb, dt)
        for a, b in zip(va, vb):
            np.testing.assert_array_equal(a, b)


def test_rattle_position_lands_on_sphere(backend):
    q, p = _state(12, 3)
    f = kernels.laplacian3(q, PARITY_X, PARITY_Y, 11 / 12)
    q_new, p_half, c, disc = kernels.rattle_position(q, p, f, 1e-3)
    assert np.all(disc >= 0)
    assert np.max(np.abs((q_new * q_new).sum(axis=0) - 1)) < 1e-14
    # c is the small root: O(dt^2)
    assert np.max(np.abs(c)) < 1e-3
