import math

import numpy as np
import pytest

from steklov.annulus import FlatAnnulus, coth, critical_modulus, sigma1_length
from steklov.catenoid import (
    catenoid_mesh,
    critical_catenoid,
    max_sigma1L_over_a,
    solve_family,
)
from steklov.mesh import MeshError, measures, topology


def test_symmetric_member(t_star):
    m = solve_family(0.0)
    assert m.t1 == m.t2
    assert m.alpha == 1.0
    assert m.t1 == pytest.approx(t_star, abs=1e-12)
    assert m.T == pytest.approx(2 * t_star, abs=1e-12)
    # frozen oracle value
    assert m.t1 == pytest.approx(1.199678640257734, abs=1e-12)


def test_residuals_random_offsets():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        a = rng.uniform(-10.0, 10.0)
        m = solve_family(a, tol=1e-10)
        assert abs(m.t1 - coth(m.t1 + a)) <= 1e-10
        assert abs(m.t2 - coth(m.t2 - a)) <= 1e-10
        assert m.t1 > 1.0 and m.t2 > 1.0


def test_sphere_radius_identities():
    # cosh(t1 + a) / R1 = 1/t1 and likewise on the other side
    for a in (-4.0, -0.7, 0.0, 1.3, 5.0):
        m = solve_family(a)
        assert math.cosh(m.t1 + a) / m.R1 == pytest.approx(1.0 / m.t1, rel=1e-12)
        assert math.cosh(m.t2 - a) / m.R2 == pytest.approx(1.0 / m.t2, rel=1e-12)


def test_offset_reflection_swaps_roots():
    for a in (0.25, 1.0, 3.5):
        m = solve_family(a)
        r = solve_family(-a)
        assert r.t1 == m.t2 and r.t2 == m.t1
        assert r.sigma1L_max == m.sigma1L_max


def test_monotone_and_range():
    grid = np.linspace(-5.0, 5.0, 81)
    alphas = [solve_family(float(a)).alpha for a in grid]
    assert all(x > y for x, y in zip(alphas, alphas[1:]))
    assert alphas[0] > 5.0 and alphas[-1] < 0.2
    # alpha grows like |a|, so matching [0.02, 50] needs offsets past +-50
    assert solve_family(-51.0).alpha > 50.0
    assert solve_family(51.0).alpha < 0.02
    m = solve_family(0.5)
    assert m.t1 < solve_family(0.0).t1 < m.t2
    assert m.alpha < 1.0


def test_modulus_matches_ratio_root():
    for a in np.linspace(-3.0, 3.0, 20):
        m = solve_family(float(a))
        assert m.T == pytest.approx(critical_modulus(m.alpha), abs=1e-8)


def test_family_value_matches_flat_annulus():
    for a in (-2.0, -0.5, 0.0, 1.0, 2.5):
        m = solve_family(a)
        flat = FlatAnnulus(f0=m.alpha, fT=1.0, T=critical_modulus(m.alpha))
        assert m.sigma1L_max == pytest.approx(sigma1_length(flat), abs=1e-8)


def test_critical_catenoid_constants(t_star):
    cc = critical_catenoid()
    assert cc.t1 * math.tanh(cc.t1) == pytest.approx(1.0, abs=1e-12)
    assert cc.T1 == pytest.approx(critical_modulus(1.0, 1e-12), abs=1e-11)
    assert cc.sigma1L_star == pytest.approx(4 * math.pi / t_star, rel=1e-12)
    # frozen oracle value
    assert cc.sigma1L_star == pytest.approx(10.474780655975891, abs=1e-9)
    assert cc.sigma1L_star == 8 * math.pi / cc.T1
    assert math.cosh(cc.t1) * cc.scale == pytest.approx(1.0 / cc.t1, rel=1e-12)


def test_derivative_closed_form():
    def objective(a):
        m = solve_family(a)
        return 1.0 / m.t1 + 1.0 / m.t2

    def q(x):
        return x * (1.0 - x)

    for a in (-1.5, -0.3, 0.4, 2.0):
        m = solve_family(a)
        closed = q(m.t1**-2) - q(m.t2**-2)
        h = 1e-5
        fd = (objective(a + h) - objective(a - h)) / (2 * h)
        assert fd == pytest.approx(closed, abs=1e-6)


def test_even_objective():
    for a in (0.3, 1.7, 4.0):
        assert solve_family(a).sigma1L_max == solve_family(-a).sigma1L_max


def test_maximum_over_offsets():
    a_star, value = max_sigma1L_over_a()
    assert abs(a_star) <= 1e-6
    assert value == pytest.approx(critical_catenoid().sigma1L_star, abs=1e-9)


def test_mesh_boundary_on_sphere(catenoid_default):
    coords = catenoid_default.geometry.coords
    for lp in catenoid_default.boundary_loops:
        radii = np.linalg.norm(coords[np.asarray(lp)], axis=1)
        assert np.abs(radii - 1.0).max() <= 1e-12
    assert topology(catenoid_default) == (0, 2)


def test_mesh_measures_converge(t_star, catenoid_coarse, catenoid_default, catenoid_fine):
    target_length = 4 * math.pi / t_star
    defects = []
    length_errors = []
    for m in (catenoid_coarse, catenoid_default, catenoid_fine):
        mm = measures(m)
        defects.append(abs(2 * mm.area - mm.total_boundary_length))
        length_errors.append(abs(mm.total_boundary_length - target_length))
    assert defects[0] > defects[1] > defects[2]
    assert length_errors[0] > length_errors[1] > length_errors[2]
    # both sequences shrink at second order
    assert defects[0] / defects[1] == pytest.approx(4.0, rel=0.3)
    assert length_errors[0] / length_errors[1] == pytest.approx(4.0, rel=0.3)


def test_offset_mesh_radii():
    a = 0.8
    member = solve_family(a)
    m = catenoid_mesh(a, 12, 48)
    coords = m.geometry.coords
    bottom, top = m.boundary_loops
    r_bottom = np.linalg.norm(coords[np.asarray(bottom)], axis=1)
    r_top = np.linalg.norm(coords[np.asarray(top)], axis=1)
    assert np.abs(r_bottom - member.R1).max() <= 1e-12 * member.R1
    assert np.abs(r_top - member.R2).max() <= 1e-12 * member.R2
    assert member.R1 != pytest.approx(member.R2, rel=1e-3)


def test_mesh_rejects_degenerate_resolution():
    with pytest.raises(MeshError):
        catenoid_mesh(0.0, 1, 48)
    with pytest.raises(MeshError):
        catenoid_mesh(0.0, 12, 4)
