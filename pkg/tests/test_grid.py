import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from wavemap.grid import (EVEN, ODD, MIN_POINTS, Parity, Grid, U_PARITY, V_PARITY, W_PARITY,
                          apply_gradient_x, apply_gradient_y, apply_laplacian)

PI = math.pi


def test_grid_rejects_small_and_non_integer():
    with pytest.raises(ValueError):
        Grid(MIN_POINTS - 1)
    with pytest.raises(TypeError):
        Grid(9.0)


def test_grid_geometry():
    g = Grid(17)
    assert g.h == pytest.approx(1 / 16)
    x, y = g.mesh
    assert x[3, 5] == pytest.approx(3 / 16) and y[3, 5] == pytest.approx(5 / 16)
    assert g.radius[3, 4] == pytest.approx(5 / 16)
    # trapezoid weights integrate constants exactly: area of the quarter
    assert g.weights.sum() == pytest.approx(1.0)
    assert g.inner(np.ones(g.shape), np.ones(g.shape)) == pytest.approx(4.0)


def test_parity_of_derivatives():
    assert W_PARITY.d_dx() == Parity(ODD, EVEN)
    assert U_PARITY.d_dx() == Parity(EVEN, EVEN)
    assert V_PARITY.d_dy() == Parity(EVEN, EVEN)
    with pytest.raises(ValueError):
        Parity(0, 1)


def test_stencil_exact_on_quartics_in_interior():
    g = Grid(21)
    x, y = g.mesh
    f = 3 * x**4 - 2 * x**3 + x**2 * y - 5 * x + 1
    dfdx = 12 * x**3 - 6 * x**2 + 2 * x * y - 5
    got = apply_gradient_x(f)
    np.testing.assert_allclose(got[2:-2], dfdx[2:-2], rtol=0, atol=1e-11)


def _order(errors, ns):
    return [math.log(errors[k] / errors[k + 1]) / math.log((ns[k + 1] - 1) / (ns[k] - 1))
            for k in range(len(ns) - 1)]


@pytest.mark.parametrize("kind", ["even", "odd"])
def test_gradient_fourth_order_including_boundaries(kind):
    # fields compatible with the reflections: even at x=1, parity at x=0
    ns = [33, 65, 129]
    errs = []
    for n in ns:
        g = Grid(n)
        x, y = g.mesh
        if kind == "even":
            f, exact, par = np.cos(PI * x) * np.cos(PI * y), -PI * np.sin(PI * x) * np.cos(PI * y), W_PARITY
        else:
            f, exact, par = np.sin(PI * x / 2) * np.cos(PI * y), PI / 2 * np.cos(PI * x / 2) * np.cos(PI * y), U_PARITY
        errs.append(np.max(np.abs(apply_gradient_x(f, par) - exact)))
    for p in _order(errs, ns):
        assert 3.7 < p < 4.3


def test_laplacian_fourth_order():
    ns = [33, 65, 129]
    errs = []
    for n in ns:
        x, y = Grid(n).mesh
        f = np.cos(PI * x) * np.cos(2 * PI * y)
        errs.append(np.max(np.abs(apply_laplacian(f) + 5 * PI**2 * f)))
    for p in _order(errs, ns):
        assert 3.7 < p < 4.3


def test_laplacian_annihilates_checkerboard_interior():
    # the composed first-derivative stencil has a zero-energy grid mode
    n = 33
    i = np.arange(n)
    f = np.outer((-1.0) ** i, np.ones(n))
    lap = apply_laplacian(f)
    assert np.max(np.abs(lap[4:-4, :])) < 1e-9


def test_gradient_y_matches_transposed_x():
    g = Grid(17)
    f = np.random.default_rng(0).standard_normal(g.shape)
    np.testing.assert_array_equal(apply_gradient_y(f), apply_gradient_x(f.T).T)


parities = st.sampled_from([U_PARITY, V_PARITY, W_PARITY])


def _fields(n):
    return arrays(np.float64, (n, n), elements=st.floats(-1, 1, allow_nan=False, width=64))


@given(st.integers(9, 16).flatmap(lambda n: st.tuples(_fields(n), _fields(n))), parities)
def test_laplacian_self_adjoint_and_nonpositive(fg, par):
    f, g_ = fg
    n = f.shape[0]
    # odd parity fields vanish on their symmetry line
    if par.across_x0 == ODD:
        f[0, :] = 0
        g_[0, :] = 0
    if par.across_y0 == ODD:
        f[:, 0] = 0
        g_[:, 0] = 0
    grid = Grid(n)
    lf, lg = apply_laplacian(f, par), apply_laplacian(g_, par)
    scale = 1.0 + np.max(np.abs(lf)) * np.max(np.abs(g_)) + np.max(np.abs(lg)) * np.max(np.abs(f))
    assert abs(grid.inner(f, lg) - grid.inner(lf, g_)) <= 1e-12 * scale
    assert grid.inner(f, lf) <= 1e-12 * scale
