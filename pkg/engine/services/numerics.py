"""
Numerical kernels: singular-weight Gauss-Jacobi quadrature, Brent root
finding, adaptive Dormand-Prince integration and small dense eigenproblems.
"""
import math
import logging
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.special import roots_jacobi

from errors import (
    BracketError,
    ConvergenceError,
    DihedralError,
    DomainError,
    QuadratureWarning,
    StepFailure,
)

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps

# Relative change allowed between a rule and its doubled-order refinement
SELF_CHECK_TOL = 1e-10


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Gauss rule on [0, 1] for the weight t^a (1-t)^b.

    The weight is folded into `weights`; callers pass only the smooth factor.
    `beta` is set for rules built by gauss_jacobi_rule (a = beta-1, b = -beta).
    """
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    a: float
    b: float
    beta: Optional[float] = None

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """
        Apply the rule to f evaluated at every node.

        f may return shape (order,) or (..., order); the last axis is summed.
        """
        values = np.asarray(f(self.nodes))
        result = values @ self.weights
        return float(result) if np.ndim(result) == 0 else result

    def refined(self) -> "QuadratureRule":
        """Same weight, doubled order (used by the convergence self-check)."""
        rule = jacobi_rule(2 * self.order, self.a, self.b)
        if self.beta is None:
            return rule
        return QuadratureRule(rule.nodes, rule.weights, rule.order, rule.a, rule.b, self.beta)


@lru_cache(maxsize=64)
def jacobi_rule(order: int, a: float, b: float) -> QuadratureRule:
    """
    Gauss rule for the weight t^a (1-t)^b on [0, 1].

    Nodes come from scipy's Golub-Welsch solver on [-1, 1], which uses the
    weight (1-x)^alpha (1+x)^beta, so the exponents swap under t = (1+x)/2.
    """
    if order < 2:
        raise DomainError(f"Quadrature order must be >= 2, got {order}")
    if a <= -1 or b <= -1:
        raise DomainError(f"Jacobi exponents must exceed -1, got a={a}, b={b}")

    # scipy divides 0/0 setting up the recurrence when a + b = -1
    with np.errstate(invalid="ignore", divide="ignore"):
        x, w = roots_jacobi(order, b, a)
    nodes = 0.5 * (1.0 + x)
    weights = w / 2.0 ** (a + b + 1.0)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, order=order, a=float(a), b=float(b))


@lru_cache(maxsize=64)
def gauss_jacobi_rule(order: int, beta: float) -> QuadratureRule:
    """Rule for the weight t^(beta-1) (1-t)^(-beta) on [0, 1]"""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    rule = jacobi_rule(order, beta - 1.0, -beta)
    return QuadratureRule(rule.nodes, rule.weights, rule.order, rule.a, rule.b, float(beta))


def self_check(value: float, refined: float, what: str, threshold: float = SELF_CHECK_TOL) -> float:
    """
    Compare a quadrature result with its refined counterpart.

    Emits QuadratureWarning when the relative change exceeds `threshold`.
    Returns the relative change.
    """
    scale = max(abs(refined), np.finfo(float).tiny)
    change = abs(value - refined) / scale
    if change > threshold:
        message = f"{what}: quadrature self-check changed by {change:.3e} (threshold {threshold:.0e})"
        logger.warning(message)
        warnings.warn(message, QuadratureWarning, stacklevel=3)
    else:
        logger.debug(f"{what}: self-check {change:.3e}")
    return change


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def brent_root(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """
    Find a root of f in [a, b] using Brent's method.

    Combines bisection, secant and inverse quadratic interpolation, keeping
    the root bracketed at every step.

    Args:
        f: Continuous function with a sign change on [a, b].
        a: Lower bracket bound.
        b: Upper bracket bound.
        tol: Absolute tolerance on the bracket width.
        maxiter: Iteration cap.

    Returns:
        The root estimate.

    Raises:
        BracketError: If f(a) and f(b) have the same sign.
        ConvergenceError: If the cap is reached first.
    """
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise BracketError(f"f(a) and f(b) must have opposite signs, got f({a})={fa}, f({b})={fb}")

    c, fc = b, fb
    d = e = b - a

    for iteration in range(maxiter):
        # Keep the root between b and c
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        # b is the best estimate so far
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb

        tol1 = 2.0 * EPS * abs(b) + 0.5 * tol
        m = 0.5 * (c - b)
        if abs(m) <= tol1 or fb == 0.0:
            logger.debug(f"brent_root converged in {iteration} iterations: x={b!r}")
            return b

        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * m * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = e = m
        else:
            d = e = m

        a, fa = b, fb
        b = b + d if abs(d) > tol1 else b + math.copysign(tol1, m)
        fb = f(b)

    raise ConvergenceError(f"brent_root did not converge in {maxiter} iterations (last x={b!r})")


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegratorConfig:
    """Step-size control for rk_integrate."""
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.05
    max_steps: int = 200000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError(f"Tolerances must be positive, got rel_tol={self.rel_tol}, abs_tol={self.abs_tol}")
        if self.max_step <= 0:
            raise DomainError(f"max_step must be positive, got {self.max_step}")
        if self.max_steps < 1:
            raise DomainError(f"max_steps must be >= 1, got {self.max_steps}")


_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order weights equal the last row of _A (FSAL)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_HAT = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_HAT

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_REJECT_FACTOR = 0.25


def _error_norm(err: np.ndarray, y: np.ndarray, y_new: np.ndarray, cfg: IntegratorConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(y0: np.ndarray, f0: np.ndarray, span: float, cfg: IntegratorConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h, cfg.max_step, abs(span))


def rk_integrate(
    field: Callable[[float, np.ndarray], np.ndarray],
    y0,
    tau_span: Tuple[float, float],
    cfg: IntegratorConfig,
    stop: Optional[Callable[[float, np.ndarray], bool]] = None,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> List[Tuple[float, np.ndarray]]:
    """
    Integrate y' = field(tau, y) with the Dormand-Prince 5(4) pair.

    tau_span may run backwards. Returns every accepted step as (tau, y),
    starting with (tau0, y0) and ending exactly at tau_span[1].

    A DihedralError raised inside `field` at a trial stage rejects the step
    and retries with a quarter of the step size. When `stop(tau, y)` returns
    True after an accepted step, integration ends at that sample.
    `project(y)`, when given, maps every accepted state back onto an
    invariant manifold; the FSAL stage is then re-evaluated.

    Raises:
        StepFailure: step size underflow or step budget exhausted; the
            exception carries the samples accepted so far.
    """
    tau0, tau1 = float(tau_span[0]), float(tau_span[1])
    y = np.array(y0, dtype=float)
    samples: List[Tuple[float, np.ndarray]] = [(tau0, y.copy())]
    span = tau1 - tau0
    if span == 0.0:
        return samples

    direction = 1.0 if span > 0 else -1.0
    tau = tau0
    k1 = np.asarray(field(tau, y), dtype=float)
    h = _initial_step(y, k1, span, cfg)
    rejected = 0

    for _ in range(cfg.max_steps):
        remaining = tau1 - tau
        if direction * remaining <= 0:
            break
        h = min(h, cfg.max_step)
        last = h >= abs(remaining)
        if last:
            h = abs(remaining)
        min_h = 16.0 * EPS * max(1.0, abs(tau))
        if h < min_h:
            raise StepFailure(f"Step size underflow at tau={tau!r} (h={h:.3e})", tau, samples)

        step = direction * h
        try:
            k = [k1]
            for i in range(1, 7):
                yi = y + step * sum(a * kj for a, kj in zip(_A[i], k))
                k.append(np.asarray(field(tau + _C[i] * step, yi), dtype=float))
        except DihedralError as e:
            logger.debug(f"Stage failed at tau={tau!r}, h={h:.3e}: {e}")
            h *= _REJECT_FACTOR
            rejected += 1
            continue

        y_new = yi  # stage 7 argument is the 5th-order solution
        err = step * np.dot(_E, np.array(k))
        norm = _error_norm(err, y, y_new, cfg)
        if not np.isfinite(norm):
            h *= _REJECT_FACTOR
            rejected += 1
            continue

        if norm <= 1.0:
            tau = tau1 if last else tau + step
            if project is None:
                y = y_new
                k1 = k[6]
            else:
                y = np.asarray(project(y_new), dtype=float)
                try:
                    k1 = np.asarray(field(tau, y), dtype=float)
                except DihedralError as e:
                    raise StepFailure(f"Field undefined after projection at tau={tau!r}: {e}", tau, samples) from e
            samples.append((tau, y.copy()))
            if stop is not None and stop(tau, y):
                logger.debug(f"rk_integrate: stop condition met at tau={tau!r}")
                break
            factor = _MAX_FACTOR if norm == 0.0 else min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * norm ** -0.2))
            h *= factor
            if last:
                break
        else:
            h *= max(_MIN_FACTOR, _SAFETY * norm ** -0.2)
            rejected += 1
    else:
        raise StepFailure(f"Step budget of {cfg.max_steps} exhausted at tau={tau!r}", tau, samples)

    logger.debug(f"rk_integrate: {len(samples) - 1} accepted, {rejected} rejected steps")
    return samples


# ---------------------------------------------------------------------------
# Linear algebra and sampled integrals
# ---------------------------------------------------------------------------

def eig_dense(m) -> List[complex]:
    """Eigenvalues of a small dense matrix, sorted by (real, imag)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"Expected a square matrix, got shape {m.shape}")
    if m.shape[0] > 5:
        raise DomainError(f"eig_dense handles at most 5x5 matrices, got {m.shape}")
    try:
        values = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"Eigenvalue computation failed: {e}") from e
    return sorted((complex(z) for z in values), key=lambda z: (z.real, z.imag))


def hermite_partial_integrals(h, y0, y1, dy0, dy1, s) -> np.ndarray:
    """
    Integral from 0 to s*h of the cubic Hermite interpolant on one interval.

    Arguments broadcast; s is the fraction of the interval (0 <= s <= 1).
    """
    s = np.asarray(s, dtype=float)
    s2, s3, s4 = s * s, s ** 3, s ** 4
    i00 = s4 / 2 - s3 + s
    i10 = s4 / 4 - 2 * s3 / 3 + s2 / 2
    i01 = -s4 / 2 + s3
    i11 = s4 / 4 - s3 / 3
    return h * (y0 * i00 + h * dy0 * i10 + y1 * i01 + h * dy1 * i11)


def hermite_segment_integrals(tau, y, dy) -> np.ndarray:
    """
    Cumulative integral of sampled y with known derivative dy.

    Exact for cubics; the first entry is 0.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    dy = np.asarray(dy, dtype=float)
    if len(tau) == 0:
        raise DomainError("No samples to integrate")
    h = np.diff(tau)
    pieces = h * (y[:-1] + y[1:]) / 2 + h * h * (dy[:-1] - dy[1:]) / 12
    return np.concatenate(([0.0], np.cumsum(pieces)))
