import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad

from wavemap.dynamics import (EnergyReport, SimState, constant_field, constrained_acceleration,
                              constraint_residual, energy, force, potential_energy, static_field,
                              static_solution, tangential_part, tangency_residual)
from wavemap.grid import Grid


def static_energy_density(x, y, s, eps=1e-6):
    """1/2 |grad U_S(./s)|^2 by central differences of the closed form."""
    def U(a, b):
        return np.array(static_solution(a / s, b / s))
    dx = (U(x + eps, y) - U(x - eps, y)) / (2 * eps)
    dy = (U(x, y + eps) - U(x, y - eps)) / (2 * eps)
    return 0.5 * float(dx @ dx + dy @ dy)


def local_static_energy(rho):
    """Energy of U_S in the ball r <= rho (unit scale), closed form."""
    return 4 * math.pi * rho**2 / (1 + rho**2)


@pytest.mark.parametrize("rho", [0.25, 1.0, 3.0])
def test_local_static_energy_closed_form_against_quadrature(rho):
    quarter, _ = dblquad(lambda y, x: static_energy_density(x, y, 1.0), 0, rho,
                         0, lambda x: math.sqrt(max(rho * rho - x * x, 0.0)), epsabs=1e-10, epsrel=1e-10)
    assert 4 * quarter == pytest.approx(local_static_energy(rho), rel=1e-6)


def test_total_static_energy_tends_to_four_pi():
    assert local_static_energy(1e6) == pytest.approx(4 * math.pi, rel=1e-11)


def test_static_solution_on_sphere_and_poles():
    x, y = np.meshgrid(np.linspace(-3, 3, 13), np.linspace(-3, 3, 13))
    u, v, w = static_solution(x, y)
    np.testing.assert_allclose(u * u + v * v + w * w, 1.0, atol=1e-15)
    assert static_solution(0.0, 0.0)[2] == 1.0
    assert static_solution(0.0, 0.0, pole="north")[2] == -1.0
    with pytest.raises(ValueError):
        static_solution(0.0, 0.0, pole="east")


@pytest.mark.parametrize("scale", [0.5, 0.25])
def test_discrete_local_energy_of_static_field(scale):
    # the local ball excludes the outer boundary, so only the ragged ball
    # edge limits agreement
    g = Grid(257)
    st_ = SimState(static_field(g, scale), np.zeros((3,) + g.shape))
    e = energy(st_, 0.25)
    exact = local_static_energy(0.25 / scale)
    assert e.local_potential == pytest.approx(exact, rel=1e-2)
    assert e.local_kinetic == 0.0


def test_energy_of_vacuum_is_zero():
    g = Grid(33)
    e = energy(SimState(constant_field(g), np.zeros((3,) + g.shape)))
    assert e.total == 0.0 and e.local_total == 0.0


def test_energy_radius_validation():
    g = Grid(17)
    st_ = SimState(constant_field(g), np.zeros((3,) + g.shape))
    for bad in (0.0, -1.0, 1.5):
        with pytest.raises(ValueError):
            energy(st_, bad)


def test_energy_report_totals():
    r = EnergyReport(1.0, 2.0, 0.25, 0.5, 0.25)
    assert r.total == 3.0 and r.local_total == 0.75


def test_kinetic_energy_quadrature():
    g = Grid(65)
    p = np.zeros((3,) + g.shape)
    p[2] = 1.0
    e = energy(SimState(constant_field(g, (1.0, 0.0, 0.0)), p), 1.0)
    # 1/2 |p|^2 over the full square of area 4
    assert e.kinetic == pytest.approx(2.0, rel=1e-14)


def test_simstate_validation_and_copy():
    g = Grid(17)
    q = constant_field(g)
    with pytest.raises(ValueError):
        SimState(q, np.zeros((3, 17, 16)))
    s = SimState(q, np.zeros_like(q), t=1.0, step=3)
    c = s.copy()
    c.q[0, 0, 0] = 5.0
    assert s.q[0, 0, 0] == 0.0 and c.t == 1.0 and c.step == 3
    assert s.grid.n == 17


@given(st.integers(0, 2**31 - 1))
def test_tangential_projection(seed):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((3, 9, 9))
    q /= np.sqrt((q * q).sum(axis=0))
    v = rng.standard_normal((3, 9, 9))
    assert np.max(np.abs(tangency_residual(q, tangential_part(v, q)))) < 1e-13


def test_force_of_constant_map_vanishes():
    g = Grid(17)
    assert np.max(np.abs(force(constant_field(g)))) == 0.0


def test_static_field_constrained_acceleration_converges():
    res = []
    for n in (65, 129):
        g = Grid(n)
        a = constrained_acceleration(static_field(g, 0.25))
        res.append(np.max(np.abs(a[:, g.radius <= 0.5])))
    assert res[1] < res[0] / 10


@given(st.integers(0, 2**31 - 1))
def test_potential_energy_nonnegative(seed):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((3, 11, 11))
    q[0, 0, :] = 0.0
    q[1, :, 0] = 0.0
    assert potential_energy(q) >= 0.0
    assert np.all(np.isfinite(constraint_residual(q)))
