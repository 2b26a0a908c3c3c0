"""
The reduced potential U on the shape sphere.

Two independent evaluation paths are kept: the direct trigonometric sum
in (theta, phi) and the singular-integral form in (theta, r). The direct
sum also carries analytic first and second partials.
"""
import math
import logging
from typing import NamedTuple, Tuple

import numpy as np

from errors import CollisionError, DomainError
from models import ProblemParams, SphereConfig
from services.geometry import collision_kind, group_matrices, theta_offset
from services.numerics import QuadratureRule, jacobi_rule, self_check

logger = logging.getLogger(__name__)

# Guard radius around binary and l-adic collisions
COLLISION_GUARD = 1e-9


class Partials(NamedTuple):
    """U and its partial derivatives in the (theta, phi) chart."""
    u: np.ndarray
    u_t: np.ndarray
    u_p: np.ndarray
    u_tt: np.ndarray
    u_tp: np.ndarray
    u_pp: np.ndarray


class PhiDerivative(NamedTuple):
    """dU/dphi = prefactor * f_theta(phi)"""
    value: float
    prefactor: float
    f_theta: float


def sphere_partials(p: ProblemParams, theta, phi) -> Partials:
    """
    Analytic U and partials up to second order; theta and phi broadcast.

    No collision checks: points on the singular set produce inf/nan.
    """
    theta = np.asarray(theta, dtype=float)[..., None]
    phi = np.asarray(phi, dtype=float)[..., None]
    a, b = p.alpha, p.beta

    u = np.arange(1, p.l + 1) * math.pi / p.l - theta
    tan_phi = np.tan(phi)
    sec2 = 1.0 / np.cos(phi) ** 2
    t2 = tan_phi ** 2
    dt = 2.0 * tan_phi * sec2
    ddt = 2.0 * sec2 * (sec2 + 2.0 * t2)

    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sin(u) ** 2 + t2
        s_t = -np.sin(2.0 * u)
        s_tt = 2.0 * np.cos(2.0 * u)
        g = s ** -b
        g1 = -b * s ** (-b - 1.0)            # dg/dS
        g2 = b * (b + 1.0) * s ** (-b - 2.0)  # d2g/dS2

        big_a = (2.0 * np.cos(phi[..., 0])) ** -a
        da = a * big_a * tan_phi[..., 0]
        dda = a * big_a * (a * t2[..., 0] + sec2[..., 0])

        sum_b = p.c_sphere + g.sum(-1)
        b_t = (g1 * s_t).sum(-1)
        b_p = (g1 * dt).sum(-1)
        b_tt = (g2 * s_t ** 2 + g1 * s_tt).sum(-1)
        b_pp = (g2 * dt ** 2 + g1 * ddt).sum(-1)
        b_tp = (g2 * s_t * dt).sum(-1)

    return Partials(
        u=big_a * sum_b,
        u_t=big_a * b_t,
        u_p=da * sum_b + big_a * b_p,
        u_tt=big_a * b_tt,
        u_tp=da * b_t + big_a * b_tp,
        u_pp=dda * sum_b + 2.0 * da * b_p + big_a * b_pp,
    )


def _require_regular(p: ProblemParams, s: SphereConfig):
    kind = collision_kind(s, p.l, COLLISION_GUARD)
    if kind is not None:
        raise CollisionError(f"{kind} collision at theta={s.theta!r}, phi={s.phi!r}", kind=kind)


def partials_at(p: ProblemParams, s: SphereConfig) -> Partials:
    _require_regular(p, s)
    return Partials(*(float(x) for x in sphere_partials(p, s.theta, s.phi)))


def u_direct(p: ProblemParams, s: SphereConfig) -> float:
    """Potential from the trigonometric sum over the orbit"""
    return partials_at(p, s).u


def du_dphi(p: ProblemParams, s: SphereConfig) -> PhiDerivative:
    """dU/dphi = 2 beta tan(phi) (2 cos phi)^-alpha f_theta(phi)"""
    part = partials_at(p, s)
    prefactor = 2.0 * p.beta * math.tan(s.phi) * (2.0 * math.cos(s.phi)) ** -p.alpha
    return PhiDerivative(value=part.u_p, prefactor=prefactor, f_theta=f_theta(p, s.theta, s.phi))


def f_theta(p: ProblemParams, theta: float, phi: float) -> float:
    """
    Bracket term of dU/dphi: c_sphere - sum_j cos^2(u_j) / (sin^2(u_j) + tan^2 phi)^(beta+1).

    Has the sign of dU/dphi for phi > 0.
    """
    if not abs(phi) < math.pi / 2:
        raise DomainError(f"f_theta needs |phi| < pi/2, got {phi!r}")
    if phi == 0.0 and theta_offset(theta, p.l) <= COLLISION_GUARD:
        raise DomainError(f"f_theta diverges at phi=0 for theta={theta!r} = 0 mod pi/l")
    u = np.arange(1, p.l + 1) * math.pi / p.l - theta
    s = np.sin(u) ** 2 + math.tan(phi) ** 2
    return float(p.c_sphere - np.sum(np.cos(u) ** 2 * s ** (-p.beta - 1.0)))


def hessian(p: ProblemParams, s: SphereConfig) -> np.ndarray:
    """Second partials [[U_tt, U_tp], [U_tp, U_pp]] in the (theta, phi) chart"""
    part = partials_at(p, s)
    return np.array([[part.u_tt, part.u_tp], [part.u_tp, part.u_pp]])


def gradient(p: ProblemParams, s: SphereConfig) -> Tuple[float, float]:
    """(dU/dtheta, dU/dphi) from the direct sum"""
    part = partials_at(p, s)
    return part.u_t, part.u_p


def covariant_gradient(p: ProblemParams, s: SphereConfig) -> Tuple[float, float]:
    """Chart components (U_theta / cos^2 phi, U_phi) of the tangential gradient"""
    u_t, u_p = gradient(p, s)
    return u_t / math.cos(s.phi) ** 2, u_p


def gradient_norm(p: ProblemParams, s: SphereConfig) -> float:
    """Euclidean length of the tangential gradient on the sphere"""
    u_t, u_p = gradient(p, s)
    return math.hypot(u_t / math.cos(s.phi), u_p)


# ---------------------------------------------------------------------------
# Integral representation in (theta, r)
# ---------------------------------------------------------------------------

def _check_integral_args(p: ProblemParams, theta: float, r: float, rule: QuadratureRule):
    if not 0.0 < r <= 1.0:
        raise DomainError(f"r must lie in (0, 1], got {r!r}")
    if rule.beta is None or abs(rule.beta - p.beta) > 1e-15:
        raise DomainError(f"Quadrature rule built for beta={rule.beta}, problem has beta={p.beta}")
    if math.hypot(theta_offset(theta, p.l), 1.0 - r) <= COLLISION_GUARD:
        raise CollisionError(f"binary collision at theta={theta!r}, r={r!r}", kind="binary")


def _kernel_integral(p: ProblemParams, theta: float, r: float, rule: QuadratureRule, power: int) -> float:
    """
    Integral of the weight times (1 - t r^2)^-beta (1 - x^2) x^(power-1) / D^power.

    x = (t r)^l and D = 1 + x^2 - 2 x cos(2 l theta). power=1 gives the
    potential kernel, power=2 the theta-derivative kernel.

    At r = 1 the factor (1 - t)^-beta joins the endpoint weight, so a rule
    for t^(beta-1) (1-t)^(1-2 beta) is used on the remaining smooth factor.
    """
    l, beta = p.l, p.beta
    c = math.cos(2 * l * theta)

    if r == 1.0:
        def integrand(t):
            x = t ** l
            d = 1.0 + x * x - 2.0 * x * c
            # (1 - x^2) / (1 - t) as a polynomial
            ratio = np.polyval(np.ones(2 * l), t)
            return ratio * x ** (power - 1) / d ** power

        merged = jacobi_rule(rule.order, beta - 1.0, 1.0 - 2.0 * beta)
        value = merged.integrate(integrand)
        refined = merged.refined().integrate(integrand)
    else:
        def integrand(t):
            x = (t * r) ** l
            d = 1.0 + x * x - 2.0 * x * c
            return (1.0 - t * r * r) ** -beta * (1.0 - x * x) * x ** (power - 1) / d ** power

        value = rule.integrate(integrand)
        refined = rule.refined().integrate(integrand)

    self_check(value, refined, f"kernel(power={power}, l={l}, theta={theta:.6g}, r={r:.6g})")
    return value


def u_integral(p: ProblemParams, theta: float, r: float, rule: QuadratureRule) -> float:
    """
    Potential through the singular-integral representation.

    U = ((1+r)^2/(4r))^beta [c_group + l r^beta (sin(beta pi)/pi) I(r, theta)]
    """
    _check_integral_args(p, theta, r, rule)
    beta = p.beta
    integral = _kernel_integral(p, theta, r, rule, power=1)
    bracket = p.c_group + p.l * r ** beta * math.sin(beta * math.pi) / math.pi * integral
    return ((1.0 + r) ** 2 / (4.0 * r)) ** beta * bracket


def theta_kernel(p: ProblemParams, theta: float, r: float, rule: QuadratureRule) -> float:
    """Positive integral multiplying -sin(2 l theta) in dU/dtheta"""
    _check_integral_args(p, theta, r, rule)
    return _kernel_integral(p, theta, r, rule, power=2)


def du_dtheta(p: ProblemParams, theta: float, r: float, rule: QuadratureRule) -> float:
    """
    dU/dtheta at fixed r from the integral form:
    -4 l^2 sin(2 l theta) (1+r)^(2 beta) sin(beta pi) / (pi 2^alpha) * J(r, theta)
    """
    j = theta_kernel(p, theta, r, rule)
    l, beta = p.l, p.beta
    coeff = -4.0 * l * l * math.sin(2 * l * theta) * (1.0 + r) ** (2.0 * beta)
    return coeff * math.sin(beta * math.pi) / (math.pi * 2.0 ** p.alpha) * j


# ---------------------------------------------------------------------------
# Ambient form on R^3
# ---------------------------------------------------------------------------

def u_ambient(p: ProblemParams, q) -> float:
    """sum over g != 1 of |q - g q|^-alpha; homogeneous of degree -alpha"""
    q = np.asarray(q, dtype=float)
    diffs = q - np.einsum("gij,j->gi", group_matrices(p.l)[1:], q)
    dist = np.linalg.norm(diffs, axis=1)
    if np.any(dist == 0.0):
        raise CollisionError("Collision in ambient configuration")
    return float(np.sum(dist ** -p.alpha))


def grad_ambient(p: ProblemParams, q) -> np.ndarray:
    """Euclidean gradient of u_ambient"""
    q = np.asarray(q, dtype=float)
    mats = group_matrices(p.l)[1:]
    eye = np.eye(3)
    grad = np.zeros(3)
    for g in mats:
        d = q - g @ q
        norm2 = float(d @ d)
        if norm2 == 0.0:
            raise CollisionError("Collision in ambient configuration")
        grad += -p.alpha * norm2 ** (-p.alpha / 2.0 - 1.0) * ((eye - g).T @ d)
    return grad


def tangential_gradient(p: ProblemParams, s) -> np.ndarray:
    """Projection of grad U onto the tangent plane at the unit vector s"""
    s = np.asarray(s, dtype=float)
    return grad_ambient(p, s) + p.alpha * u_ambient(p, s) * s
