"""
Projected McGehee flow on the shape sphere, homothetic motions and lifting
to physical coordinates
"""
import math
import logging
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from errors import CollisionError, DomainError, StepFailure
from models import (
    AmbientState,
    CentralConfiguration,
    ManifoldClass,
    McGeheeState,
    ProblemParams,
    SphereConfig,
    Trajectory,
)
from services.geometry import cartesian_to_sphere, group_matrices, unit_vector
from services.numerics import (
    IntegratorConfig,
    hermite_partial_integrals,
    hermite_segment_integrals,
    rk_integrate,
)
from services.potential import partials_at, tangential_gradient, u_ambient

logger = logging.getLogger(__name__)

ENERGY_DEADBAND = 1e-12
POLE_GUARD = 1e-6
# |v| beyond this multiple of v_bar counts as escape in homothetic runs
ESCAPE_FACTOR = 1e6

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def motion_kind(v_sign: int) -> str:
    """Equilibria with v_bar > 0 carry ejection orbits, v_bar < 0 collision orbits."""
    return "ejection" if v_sign > 0 else "collision"


def _default_config() -> IntegratorConfig:
    from config import default_integrator_config

    return default_integrator_config()


# ---------------------------------------------------------------------------
# Vector fields
# ---------------------------------------------------------------------------

def _chart_field(p: ProblemParams, y: np.ndarray) -> np.ndarray:
    v, theta, phi, w1, w2 = y
    if abs(phi) > math.pi / 2 - POLE_GUARD:
        raise CollisionError(f"Chart pole reached at phi={phi!r}", kind="l-adic")
    part = partials_at(p, SphereConfig(theta, phi))
    b = p.beta
    cos_phi = math.cos(phi)
    return np.array([
        w1 * w1 * cos_phi * cos_phi + w2 * w2 + b * v * v - p.alpha * part.u,
        w1,
        w2,
        (b - 1.0) * v * w1 + 2.0 * math.tan(phi) * w1 * w2 + part.u_t / (cos_phi * cos_phi),
        (b - 1.0) * v * w2 - 0.5 * w1 * w1 * math.sin(2.0 * phi) + part.u_p,
    ])


def vector_field(p: ProblemParams, x: McGeheeState) -> McGeheeState:
    """Right-hand side of the projected flow in (v, theta, phi, w1, w2)"""
    return McGeheeState.from_array(_chart_field(p, x.as_array()))


def vector_field_ambient(p: ProblemParams, x: AmbientState) -> AmbientState:
    """
    Right-hand side in R^3 coordinates:
    v' = |w|^2 + beta v^2 - alpha U, s' = w, w' = -|w|^2 s + (beta-1) v w + grad_s U
    """
    s, v, w = x.s, x.v, x.w
    w2 = float(w @ w)
    u = u_ambient(p, s)
    dv = w2 + p.beta * v * v - p.alpha * u
    dw = -w2 * s + (p.beta - 1.0) * v * w + tangential_gradient(p, s)
    return AmbientState(s=w.copy(), v=dv, w=dw)


def _frame(theta: float, phi: float):
    """s and its first and second chart derivatives."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    s = np.array([cp * ct, cp * st, sp])
    s_t = np.array([-cp * st, cp * ct, 0.0])
    s_p = np.array([-sp * ct, -sp * st, cp])
    s_tt = np.array([-cp * ct, -cp * st, 0.0])
    s_tp = np.array([sp * st, -sp * ct, 0.0])
    return s, s_t, s_p, s_tt, s_tp, -s


def to_ambient(p: ProblemParams, x: McGeheeState) -> AmbientState:
    """w = w1 ds/dtheta + w2 ds/dphi"""
    s, s_t, s_p, *_ = _frame(x.theta, x.phi)
    return AmbientState(s=s, v=x.v, w=x.w1 * s_t + x.w2 * s_p)


def from_ambient(p: ProblemParams, a: AmbientState) -> McGeheeState:
    sphere = cartesian_to_sphere(a.s)
    _, s_t, s_p, *_ = _frame(sphere.theta, sphere.phi)
    w1 = float(a.w @ s_t) / math.cos(sphere.phi) ** 2
    w2 = float(a.w @ s_p)
    return McGeheeState(v=a.v, theta=sphere.theta, phi=sphere.phi, w1=w1, w2=w2)


def push_derivative(p: ProblemParams, x: McGeheeState, dx: McGeheeState) -> AmbientState:
    """Ambient time derivative of to_ambient(x) along the chart derivative dx."""
    _, s_t, s_p, s_tt, s_tp, s_pp = _frame(x.theta, x.phi)
    ds = dx.theta * s_t + dx.phi * s_p
    dw = (dx.w1 * s_t + dx.w2 * s_p
          + x.w1 * (dx.theta * s_tt + dx.phi * s_tp)
          + x.w2 * (dx.theta * s_tp + dx.phi * s_pp))
    return AmbientState(s=ds, v=dx.v, w=dw)


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------

def _classify_energy(e: float) -> ManifoldClass:
    if abs(e) < ENERGY_DEADBAND:
        return ManifoldClass.PARABOLIC
    return ManifoldClass.ELLIPTIC if e < 0 else ManifoldClass.HYPERBOLIC


def _energy_value(p: ProblemParams, x: McGeheeState) -> float:
    u = partials_at(p, x.sphere).u
    return 0.5 * (x.v * x.v + x.w_norm2) - u


def energy(p: ProblemParams, x: McGeheeState) -> Tuple[float, ManifoldClass]:
    """E = (v^2 + |w|^2)/2 - U(s) and the manifold it selects"""
    e = _energy_value(p, x)
    return e, _classify_energy(e)


def physical_energy(p: ProblemParams, rho: float, x: McGeheeState) -> float:
    """Energy of the unscaled motion, rho^-alpha E"""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    return rho ** -p.alpha * _energy_value(p, x)


def project_to_parabolic(p: ProblemParams, x: McGeheeState) -> McGeheeState:
    """Rescale (v, w) so that v^2 + |w|^2 = 2U"""
    kinetic = x.v * x.v + x.w_norm2
    if kinetic == 0.0:
        raise DomainError("Cannot project a state with v = w = 0 onto the parabolic manifold")
    u = partials_at(p, x.sphere).u
    k = math.sqrt(2.0 * u / kinetic)
    return replace(x, v=k * x.v, w1=k * x.w1, w2=k * x.w2)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

def _to_states(samples):
    return (McGeheeState.from_array(y) for _, y in samples)


def _build_trajectory(p: ProblemParams, samples, manifold: ManifoldClass,
                      escape_tau: Optional[float] = None, stop_reason: Optional[str] = None) -> Trajectory:
    taus = np.array([tau for tau, _ in samples])
    states = np.array([y for _, y in samples])
    energies = np.array([_energy_value(p, x) for x in _to_states(samples)])
    return Trajectory(taus=taus, states=states, energies=energies, manifold=manifold,
                      escape_tau=escape_tau, stop_reason=stop_reason)


def _parabolic_projection(p: ProblemParams):
    def project(y: np.ndarray) -> np.ndarray:
        v, theta, phi, w1, w2 = y
        kinetic = v * v + (w1 * math.cos(phi)) ** 2 + w2 * w2
        k = math.sqrt(2.0 * partials_at(p, SphereConfig(theta, phi)).u / kinetic)
        return np.array([k * v, theta, phi, k * w1, k * w2])

    return project


def integrate(p: ProblemParams, x0: McGeheeState, tau_span: Tuple[float, float],
              cfg: Optional[IntegratorConfig] = None, u_cap: Optional[float] = None,
              project: Optional[bool] = None) -> Trajectory:
    """
    Flow x0 over tau_span.

    E obeys E' = alpha v E, so the parabolic manifold repels numerical
    drift wherever v > 0. With `project` (default: on for parabolic starts)
    each accepted step is rescaled back onto v^2 + |w|^2 = 2U.

    With u_cap set the run ends once U(s) exceeds it, and the trajectory
    carries stop_reason="collision-approach". Parabolic flows climb U and
    reach binary collisions in finite tau, so this is the usual way to
    bound them.

    Raises:
        CollisionError: x0 itself is singular
        StepFailure: the trajectory runs into the singular set; samples on
            the exception are McGeheeState values
    """
    cfg = cfg or _default_config()
    _, manifold = energy(p, x0)
    if project is None:
        project = manifold is ManifoldClass.PARABOLIC
    if project and manifold is not ManifoldClass.PARABOLIC:
        raise DomainError(f"Projection needs a parabolic start, got {manifold.value}")

    stop = None
    if u_cap is not None:
        def stop(tau, y):
            return partials_at(p, SphereConfig(y[1], y[2])).u > u_cap

    try:
        samples = rk_integrate(
            lambda tau, y: _chart_field(p, y), x0.as_array(), tau_span, cfg,
            stop=stop, project=_parabolic_projection(p) if project else None,
        )
    except StepFailure as e:
        partial = [(tau, McGeheeState.from_array(y)) for tau, y in e.samples]
        logger.warning(f"Integration stopped at tau={e.tau!r} after {len(partial)} samples: {e}")
        raise StepFailure(str(e), e.tau, partial) from e

    stopped = samples[-1][0] != tau_span[1]
    traj = _build_trajectory(p, samples, manifold, stop_reason="collision-approach" if stopped else None)
    if stopped:
        logger.info(f"U passed {u_cap:.6g} at tau={samples[-1][0]:.6g}; run ended early")
    if manifold is not ManifoldClass.PARABOLIC:
        flipped = np.sign(traj.energies) != np.sign(traj.energies[0])
        if np.any(flipped & (np.abs(traj.energies) > ENERGY_DEADBAND)):
            logger.warning("Energy changed sign along the trajectory; tolerances too loose")
    logger.info(f"Integrated {len(traj)} samples over tau in [{tau_span[0]}, {traj.taus[-1]}], "
                f"max |dE| = {np.max(np.abs(traj.energies - traj.energies[0])):.3e}")
    return traj


# ---------------------------------------------------------------------------
# Lifting
# ---------------------------------------------------------------------------

def lift(p: ProblemParams, traj: Trajectory, rho0: float, t0: float = 0.0) -> Trajectory:
    """
    Recover rho(tau) = rho0 exp(int v) and t(tau) = t0 + int rho^(1+beta).

    log rho uses the cubic Hermite interpolant of v (v' taken from the
    field); t applies 8-point Gauss-Legendre per interval to the resulting
    quartic log rho.
    """
    if len(traj) == 0:
        raise DomainError("Cannot lift an empty trajectory")
    if rho0 <= 0:
        raise DomainError(f"rho0 must be positive, got {rho0!r}")

    taus = traj.taus
    v = traj.states[:, 0]
    dv = np.array([_chart_field(p, y)[0] for y in traj.states])
    log_rho = math.log(rho0) + hermite_segment_integrals(taus, v, dv)

    h = np.diff(taus)[:, None]
    s = 0.5 * (_GL_NODES + 1.0)[None, :]
    inner = log_rho[:-1, None] + hermite_partial_integrals(
        h, v[:-1, None], v[1:, None], dv[:-1, None], dv[1:, None], s)
    pieces = h[:, 0] * (np.exp((1.0 + p.beta) * inner) @ (0.5 * _GL_WEIGHTS))
    t = t0 + np.concatenate(([0.0], np.cumsum(pieces)))
    return replace(traj, rho=np.exp(log_rho), t=t)


def lift_algebraic(p: ProblemParams, traj: Trajectory, h: float) -> np.ndarray:
    """rho from the energy relation rho^alpha = E / h, for physical energy h != 0"""
    if h == 0.0:
        raise DomainError("Algebraic lift needs a nonzero energy")
    ratio = traj.energies / h
    if np.any(ratio <= 0):
        raise DomainError(f"Energy along the trajectory does not have the sign of h={h!r}")
    return ratio ** (1.0 / p.alpha)


def lifted_positions(p: ProblemParams, traj: Trajectory) -> np.ndarray:
    """Body positions rho g s for every lifted sample, shape (n, 2l, 3)"""
    if not traj.lifted:
        raise DomainError("Trajectory has not been lifted")
    mats = group_matrices(p.l)
    units = np.array([unit_vector(y[1], y[2]) for y in traj.states])
    return traj.rho[:, None, None] * np.einsum("gij,nj->ngi", mats, units)


# ---------------------------------------------------------------------------
# Homothetic motions
# ---------------------------------------------------------------------------

def homothetic_escape_tau(p: ProblemParams, cc: CentralConfiguration, v0: float) -> Optional[float]:
    """Finite tau where v blows up, or None when |v0| <= v_bar"""
    v_bar = cc.v_bar
    if abs(v0) <= v_bar:
        return None
    return math.atanh(v_bar / v0) / (p.beta * v_bar)


def homothetic_v(p: ProblemParams, cc: CentralConfiguration, v0: float, tau: float) -> float:
    """Closed-form solution of v' = beta (v^2 - v_bar^2), v(0) = v0"""
    v_bar = cc.v_bar
    k = p.beta * v_bar
    if abs(v0) == v_bar:
        return v0
    if abs(v0) < v_bar:
        return -v_bar * math.tanh(k * tau - math.atanh(v0 / v_bar))
    escape = homothetic_escape_tau(p, cc, v0)
    if (escape > 0 and tau >= escape) or (escape < 0 and tau <= escape):
        raise DomainError(f"tau={tau!r} lies beyond the escape time {escape!r}")
    return -v_bar / math.tanh(k * tau - math.atanh(v_bar / v0))


def homothetic(p: ProblemParams, cc: CentralConfiguration, v0: float, tau_span: Tuple[float, float],
               cfg: Optional[IntegratorConfig] = None) -> Trajectory:
    """
    Motion with frozen shape cc.s and w = 0; only v evolves.

    A finite-tau escape ends the trajectory early and sets escape_tau.
    """
    cfg = cfg or _default_config()
    b = p.beta
    u = cc.u_value
    theta, phi = cc.s.theta, cc.s.phi

    def field(tau, y):
        return np.array([b * y[0] * y[0] - p.alpha * u])

    escape_tau = None
    stop_reason = None
    try:
        scalar = rk_integrate(field, [v0], tau_span, cfg)
    except StepFailure as e:
        v_last = float(e.samples[-1][1][0])
        if abs(v_last) < ESCAPE_FACTOR * cc.v_bar:
            raise
        scalar = e.samples
        escape_tau = e.tau + 1.0 / (b * v_last)
        stop_reason = "escape"
        logger.warning(f"Homothetic escape detected near tau={escape_tau:.6g} (v={v_last:.3e})")

    samples = [(tau, np.array([y[0], theta, phi, 0.0, 0.0])) for tau, y in scalar]
    _, manifold = energy(p, McGeheeState(v0, theta, phi))
    return _build_trajectory(p, samples, manifold, escape_tau, stop_reason)


def parabolic_homothetic_rho(p: ProblemParams, cc: CentralConfiguration, t: float, sign: int) -> float:
    """rho(t) = (sign (1+beta) v_bar t)^(1/(1+beta)), total collision at t = 0"""
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign!r}")
    if sign * t <= 0:
        raise DomainError(f"Closed form needs sign * t > 0, got sign={sign}, t={t!r}")
    return (sign * (1.0 + p.beta) * cc.v_bar * t) ** (1.0 / (1.0 + p.beta))
