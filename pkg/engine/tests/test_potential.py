import math

import numpy as np
import pytest

from errors import CollisionError, DomainError
from models import SphereConfig
from services.geometry import make_params, phi_of_r, unit_vector
from services.numerics import gauss_jacobi_rule
from services.potential import (
    covariant_gradient,
    du_dphi,
    du_dtheta,
    f_theta,
    gradient,
    gradient_norm,
    hessian,
    sphere_partials,
    tangential_gradient,
    theta_kernel,
    u_ambient,
    u_direct,
    u_integral,
)


def test_square_value(p2):
    # four bodies on a square at the equator
    s = SphereConfig(theta=math.pi / 4, phi=0.0)
    assert u_direct(p2, s) == pytest.approx((1.0 + 2.0 * math.sqrt(2.0)) / 2.0, rel=1e-14)


@pytest.mark.parametrize("l, alpha", [(2, 0.5), (3, 1.0), (5, 1.7)])
def test_direct_matches_ambient(l, alpha):
    p = make_params(l, alpha)
    rng = np.random.default_rng(7)
    for _ in range(20):
        theta = rng.uniform(0.05, math.pi / l - 0.05)
        phi = rng.uniform(-1.3, 1.3)
        s = SphereConfig(theta, phi)
        assert u_direct(p, s) == pytest.approx(u_ambient(p, unit_vector(theta, phi)), rel=1e-12)


def test_ambient_is_homogeneous(p3):
    q = unit_vector(0.3, 0.4)
    assert u_ambient(p3, 2.5 * q) == pytest.approx(2.5 ** -p3.alpha * u_ambient(p3, q), rel=1e-13)


def test_tangential_gradient_matches_chart(p3):
    theta, phi = 0.37, 0.52
    s = unit_vector(theta, phi)
    grad = tangential_gradient(p3, s)
    e_theta = np.array([-math.cos(phi) * math.sin(theta), math.cos(phi) * math.cos(theta), 0.0])
    e_phi = np.array([-math.sin(phi) * math.cos(theta), -math.sin(phi) * math.sin(theta), math.cos(phi)])
    u_t, u_p = gradient(p3, SphereConfig(theta, phi))

    assert abs(grad @ s) < 1e-12 * np.linalg.norm(grad)
    assert grad @ e_theta == pytest.approx(u_t, rel=1e-11)
    assert grad @ e_phi == pytest.approx(u_p, rel=1e-11)
    assert np.linalg.norm(grad) == pytest.approx(gradient_norm(p3, SphereConfig(theta, phi)), rel=1e-11)


def test_covariant_gradient(p3):
    s = SphereConfig(0.2, 0.6)
    u_t, u_p = gradient(p3, s)
    cov = covariant_gradient(p3, s)
    assert cov[0] == pytest.approx(u_t / math.cos(0.6) ** 2, rel=1e-15)
    assert cov[1] == u_p


def test_partials_match_finite_differences(p3):
    theta, phi, h = 0.31, 0.44, 1e-5
    part = sphere_partials(p3, theta, phi)

    def u(t, f):
        return float(sphere_partials(p3, t, f).u)

    assert float(part.u_t) == pytest.approx((u(theta + h, phi) - u(theta - h, phi)) / (2 * h), rel=1e-8)
    assert float(part.u_p) == pytest.approx((u(theta, phi + h) - u(theta, phi - h)) / (2 * h), rel=1e-8)

    h = 1e-4
    mixed = (u(theta + h, phi + h) - u(theta + h, phi - h) - u(theta - h, phi + h) + u(theta - h, phi - h)) / (4 * h * h)
    assert float(part.u_tp) == pytest.approx(mixed, rel=1e-5)


def test_hessian_is_symmetric(p3):
    hess = hessian(p3, SphereConfig(0.25, -0.35))
    assert hess[0, 1] == hess[1, 0]


def test_sphere_partials_broadcast(p3):
    thetas = np.linspace(0.1, 0.9, 4)
    phis = np.linspace(-0.5, 0.5, 3)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    part = sphere_partials(p3, tt, pp)
    assert part.u.shape == (4, 3)
    assert part.u[2, 1] == pytest.approx(u_direct(p3, SphereConfig(thetas[2], phis[1])), rel=1e-15)


def test_collisions_raise(p3):
    with pytest.raises(CollisionError) as binary:
        u_direct(p3, SphereConfig(0.0, 0.0))
    assert binary.value.kind == "binary"
    with pytest.raises(CollisionError):
        u_direct(p3, SphereConfig(0.3, math.pi / 2))


def test_phi_derivative_factorization(p3):
    s = SphereConfig(0.4, 0.3)
    d = du_dphi(p3, s)
    assert d.value == pytest.approx(d.prefactor * d.f_theta, rel=1e-12)
    assert d.prefactor > 0.0


def test_f_theta_rejects_singular_points(p3):
    with pytest.raises(DomainError):
        f_theta(p3, 0.0, 0.0)
    for theta in (math.pi / 3, 2 * math.pi / 3, 1e-12):
        with pytest.raises(DomainError):
            f_theta(p3, theta, 0.0)
    assert math.isfinite(f_theta(p3, 0.3, 0.0))
    with pytest.raises(DomainError):
        f_theta(p3, 0.3, math.pi / 2)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("theta_frac", [0.1, 0.35, 0.5, 0.8])
def test_integral_matches_direct(p3, rule3, r, theta_frac):
    theta = theta_frac * math.pi / p3.l
    expected = u_direct(p3, SphereConfig(theta, phi_of_r(r)))
    assert u_integral(p3, theta, r, rule3) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("l", [2, 5])
@pytest.mark.parametrize("alpha", [0.5, 1.5])
@pytest.mark.parametrize("r", [0.2, 0.9, 1.0])
def test_integral_across_rings_and_exponents(l, alpha, r):
    p = make_params(l, alpha)
    rule = gauss_jacobi_rule(64, p.beta)
    theta = 0.3 * math.pi / l
    expected = u_direct(p, SphereConfig(theta, phi_of_r(r)))
    assert u_integral(p, theta, r, rule) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("alpha", [0.4, 1.0, 1.6])
def test_integral_on_equator(alpha):
    p = make_params(4, alpha)
    rule = gauss_jacobi_rule(64, p.beta)
    theta = 0.3 * math.pi / p.l
    expected = u_direct(p, SphereConfig(theta, 0.0))
    assert u_integral(p, theta, 1.0, rule) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("r", [0.3, 0.7])
def test_theta_derivative_from_integral(p3, rule3, r):
    theta = 0.27
    u_t, _ = gradient(p3, SphereConfig(theta, phi_of_r(r)))
    assert du_dtheta(p3, theta, r, rule3) == pytest.approx(u_t, rel=1e-9)
    assert theta_kernel(p3, theta, r, rule3) > 0.0


def test_theta_derivative_four_bodies(p2):
    rule = gauss_jacobi_rule(64, p2.beta)
    u_t, _ = gradient(p2, SphereConfig(0.3, phi_of_r(0.6)))
    assert du_dtheta(p2, 0.3, 0.6, rule) == pytest.approx(u_t, rel=1e-9)


def test_integral_arguments(p3, rule3, p2):
    with pytest.raises(DomainError):
        u_integral(p3, 0.3, 0.0, rule3)
    with pytest.raises(DomainError):
        u_integral(p3, 0.3, 1.2, rule3)
    with pytest.raises(DomainError):
        u_integral(p2, 0.3, 0.5, gauss_jacobi_rule(64, 0.25))
    with pytest.raises(CollisionError):
        u_integral(p3, math.pi / 3, 1.0, rule3)
