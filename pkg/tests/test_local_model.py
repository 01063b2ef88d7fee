import math

import numpy as np
import pytest

from errors import InvalidParameter, NoSolution, OnSigma, ZeroSection
from local_model import (CotangentPoint, QuadricPoint, TwistProfile, antipodal, evaluation, exactness_defect,
                         fibre_twist_intersection, from_sphere_bundle, geodesic_flow, inverse_twist, is_delta_wobbly,
                         model_twist, parametrized_evaluation, phi_closed_form, pullback_defect, quadric_maps,
                         quadric_q, random_point, random_unit_vector, section_moduli, sigma_distance,
                         sphere_distance, symplectic_defect, tangent_basis, tangent_slopes, tilde_R, twist_moment)

P = TwistProfile(r=0.05, lam=1.0)


# ---------------------- profile ----------------------

@pytest.mark.parametrize("r", [0.01, 0.05, 0.2, 0.49])
def test_profile_value_at_zero(r):
    assert abs(float(TwistProfile(r, 1.0).R(0.0)) + r / 4) < 1e-12


def test_profile_vanishes_past_cutoff():
    t = np.linspace(0.75, 3.0, 50)
    assert np.all(np.asarray(P.R(t)) == 0)
    assert np.all(np.asarray(P.R1(t)) == 0)


def test_decay_bounds_on_grid():
    s_grid = np.linspace(1e-3, 1.0, 200)
    t_grid = np.linspace(0.1, 10.0, 200)
    for s in s_grid:
        value, deriv = tilde_R(s, t_grid)
        bound = s * s / 16
        assert np.all(value < 0)
        assert np.all(-value <= bound / t_grid * (1 + 1e-12))
        assert np.all(deriv > 0)
        assert np.all(deriv <= bound / t_grid ** 2 * (1 + 1e-12))


def test_tilde_r_reflection_and_limit():
    t = np.linspace(-3, 3, 61)
    value, _ = tilde_R(0.3, t)
    reflected, _ = tilde_R(0.3, -t)
    assert np.allclose(reflected, value - t, atol=1e-12)
    zero, _ = tilde_R(0.0, np.linspace(0.01, 2, 20))
    assert np.allclose(zero, 0.0, atol=1e-15)


@pytest.mark.parametrize("t", [-0.5, -0.01, -1e-4, 0.0, 1e-4, 0.01, 0.5])
def test_tilde_r_derivative_matches_difference_quotient(t):
    h = 1e-6
    _, deriv = tilde_R(0.05, t)
    plus, _ = tilde_R(0.05, t + h)
    minus, _ = tilde_R(0.05, t - h)
    assert abs(deriv - (plus - minus) / (2 * h)) < 1e-6


def test_angle_at_zero_is_half_turn():
    assert abs(P.angle(0.0) - math.pi) < 1e-12
    assert abs(float(P.R1(0.0)) - 0.5) < 1e-12


def test_invalid_profile():
    with pytest.raises(InvalidParameter):
        TwistProfile(r=0.6)
    with pytest.raises(InvalidParameter):
        TwistProfile(lam=0.0)
    with pytest.raises(InvalidParameter):
        is_delta_wobbly(P, 0.5)


def test_default_profile_is_wobbly():
    assert is_delta_wobbly(P, 0.05)


@pytest.mark.parametrize("r, lam", [(0.05, 0.01), (0.45, 0.05)])
def test_sharp_cutoff_is_not_wobbly(r, lam):
    assert not is_delta_wobbly(TwistProfile(r, lam), 0.05)


# ---------------------- twist ----------------------

def test_zero_section_moment():
    zero = CotangentPoint(np.zeros(3), np.array([0.0, 0.0, 1.0]))
    assert abs(twist_moment(P, zero) + 2 * math.pi * float(P.R(0.0))) < 1e-9


def test_half_turn_is_antipodal(rng):
    for _ in range(200):
        y = random_point(rng, 2)
        assert geodesic_flow(y, math.pi).distance(antipodal(y)) < 1e-9


def test_geodesic_flow_rejects_zero_section():
    with pytest.raises(ZeroSection):
        geodesic_flow(CotangentPoint(np.zeros(3), np.array([1.0, 0.0, 0.0])), 0.3)


def test_twist_is_antipodal_on_zero_section():
    y = CotangentPoint(np.zeros(3), np.array([0.6, 0.8, 0.0]))
    ty = model_twist(P, y)
    assert np.allclose(ty.v, -y.v) and np.allclose(ty.u, 0)


def test_twist_identities(rng):
    for _ in range(1000):
        y = random_point(rng, 2)
        ty = model_twist(P, y)
        assert symplectic_defect(P, y) < 1e-6
        assert abs(twist_moment(P, ty) - twist_moment(P, y)) < 1e-9
        assert inverse_twist(P, ty).distance(y) < 1e-7


@pytest.mark.parametrize("mu", [1.0, 1.5, 4.0])
def test_twist_fixes_points_past_cutoff(rng, mu):
    y = random_point(rng, 2, mu_range=(mu, mu))
    ty = model_twist(P, y)
    assert np.array_equal(ty.u, y.u) and np.array_equal(ty.v, y.v)
    assert twist_moment(P, y) == 0.0


def test_exactness_and_integral_form(rng):
    for _ in range(200):
        y = random_point(rng, 2)
        basis = tangent_basis(y)
        X = sum(c * E for c, E in zip(rng.standard_normal(len(basis)), basis))
        assert exactness_defect(P, y, X) < 1e-6
        assert abs(P.kk_integral(y.mu) - twist_moment(P, y)) < 1e-5


def test_moment_bounds_where_wobbly():
    t = np.linspace(0, P.threshold(0.05), 200)
    kk = np.asarray(P.kk(t))
    assert np.all(kk >= -1e-12)
    assert np.all(kk <= -2 * math.pi * float(P.R(0.0)) + 1e-12)


# ---------------------- fibre intersections ----------------------

def test_fibre_intersection_random_pairs(rng):
    delta = 0.05
    solved = 0
    while solved < 100:
        y0, y1 = random_unit_vector(rng, 2), random_unit_vector(rng, 2)
        if sphere_distance(y0, y1) < 2 * math.pi * delta:
            continue
        hit = fibre_twist_intersection(P, y0, y1, delta)
        assert hit.residual < 1e-9
        assert hit.fibre_error < 1e-7
        assert hit.transverse
        assert np.allclose(hit.point.v, y1)
        solved += 1


def test_fibre_intersection_antipodal_case():
    y1 = np.array([0.0, 0.0, 1.0])
    hit = fibre_twist_intersection(P, -y1, y1, 0.05)
    assert hit.antipodal
    assert np.array_equal(hit.point.v, y1)
    assert np.array_equal(hit.point.u, np.zeros(3))


def test_fibre_intersection_too_close():
    y0 = np.array([1.0, 0.0, 0.0])
    y1 = np.array([math.cos(0.1), math.sin(0.1), 0.0])
    with pytest.raises(NoSolution):
        fibre_twist_intersection(P, y0, y1, 0.05)
    with pytest.raises(InvalidParameter):
        fibre_twist_intersection(P, y0, 2 * y1, 0.05)


def test_antipodal_tangent_slopes():
    slopes = tangent_slopes(P, np.array([1.0, 0.0, 0.0]))
    expected = complex(1.0, 2 * math.pi * float(P.R2(0.0)))
    assert abs(slopes.twisted_fibre - expected) < 1e-4
    assert slopes.spread < 1e-6
    assert slopes.zero_section == 1j and slopes.fibre == 1


# ---------------------- quadric and sections ----------------------

def _valid_section_parameter(rng, n=2):
    v = random_unit_vector(rng, n)
    u = rng.standard_normal(n + 1)
    u -= (u @ v) * v
    u /= np.linalg.norm(u)
    return u, v


def test_sections_lie_on_fibres(rng):
    for _ in range(100):
        u, v = _valid_section_parameter(rng)
        a = from_sphere_bundle(u, v)
        s = rng.uniform(0.1, 2.0)
        sec = section_moduli(s, a)
        back = evaluation(a)
        assert np.allclose(back.u, u, atol=1e-12) and np.allclose(back.v, v, atol=1e-12)
        for phase in np.linspace(0, 2 * math.pi, 100, endpoint=False):
            z = s * complex(math.cos(phase), math.sin(phase))
            w = sec(z)
            assert abs(quadric_q(w) - z) < 1e-12
            assert sigma_distance(w, z) < 1e-9


def test_section_rejects_bad_parameter():
    with pytest.raises(InvalidParameter):
        section_moduli(1.0, np.array([1.0, 0.0, 0.0]))
    assert not section_moduli(1.0, np.array([1.0, 0.0, 0.0]), check=False).valid
    with pytest.raises(InvalidParameter):
        section_moduli(0.0, np.array([0.5, 0.5j, 0.0]))


def test_parametrized_evaluation_endpoints():
    u, v = np.array([0.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0])
    _, base, fibre = parametrized_evaluation(1.0, u, v)
    assert np.allclose(fibre, base)
    _, base, fibre = parametrized_evaluation(0.0, u, v)
    assert np.allclose(fibre, -base)


def test_quadric_maps_agree_with_closed_form(rng):
    for _ in range(100):
        x = QuadricPoint(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        image = quadric_maps(x)
        if image.h < 1e-2 or abs(image.q) < 1e-2:
            continue  # well-conditioned samples only
        q, closed = phi_closed_form(x)
        assert q == image.q
        assert closed.distance(image.phi[1]) < 1e-9
        assert abs(image.phi[1].mu - 0.5 * math.sqrt(image.h)) < 1e-9
        X = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        assert pullback_defect(x, X) < 1e-6


def test_quadric_maps_on_sigma():
    x = QuadricPoint(np.array([1.0, 0.0, 0.0], dtype=complex))
    with pytest.raises(OnSigma):
        quadric_maps(x)
    assert quadric_maps(x, with_phi=False).phi is None
