"""
l-adic averaging (Perron-Frobenius) operator and the b_n series behind the
integral form of the potential
"""
import cmath
import math
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.special import binom

from errors import DomainError
from models import ProblemParams, SeriesCoefficients
from services.numerics import QuadratureRule, self_check

logger = logging.getLogger(__name__)

# Tail bound used to truncate the b-series
SERIES_TAIL = 1e-12
# Gauss rule exact for t^n up to n = 31
BINOMIAL_ORDER = 16


def _check_rule(p: ProblemParams, rule: QuadratureRule):
    if rule.beta is None or abs(rule.beta - p.beta) > 1e-15:
        raise DomainError(f"Quadrature rule built for beta={rule.beta}, problem has beta={p.beta}")


def _check_unit(xi: complex):
    if abs(abs(xi) - 1.0) > 1e-12:
        raise DomainError(f"xi must lie on the unit circle, got |xi|={abs(xi)!r}")


def perron_b(p: ProblemParams, n: int, r: float, rule: QuadratureRule) -> float:
    """
    b_n = (sin(beta pi)/pi) r^n * int w(t) t^n (1 - t r^2)^-beta dt, with b_-n = b_n.

    r = 0 is allowed (b_0 = 1, b_n = 0 otherwise).
    """
    _check_rule(p, rule)
    if not 0.0 <= r < 1.0:
        raise DomainError(f"perron_b needs 0 <= r < 1, got {r!r}")
    n = abs(int(n))
    beta = p.beta
    integral = rule.integrate(lambda t: t ** n * (1.0 - t * r * r) ** -beta)
    return math.sin(beta * math.pi) / math.pi * r ** n * integral


def perron_coefficients(p: ProblemParams, r: float, n_max: int, rule: QuadratureRule) -> SeriesCoefficients:
    """All of b_0..b_n_max in one pass over the nodes"""
    _check_rule(p, rule)
    if not 0.0 <= r < 1.0:
        raise DomainError(f"perron_coefficients needs 0 <= r < 1, got {r!r}")
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    beta = p.beta
    powers = np.arange(n_max + 1)[:, None]
    integrals = rule.integrate(lambda t: t[None, :] ** powers * (1.0 - t * r * r)[None, :] ** -beta)
    b = math.sin(beta * math.pi) / math.pi * r ** powers[:, 0] * integrals
    return SeriesCoefficients(r=float(r), n_max=int(n_max), b=tuple(float(x) for x in b))


def series_terms(l: int, r: float, tail: float = SERIES_TAIL) -> int:
    """Smallest N with r^(l N) < tail"""
    if r <= 0.0:
        return 1
    return max(1, math.ceil(math.log(tail) / (l * math.log(r))))


def perron_apply(p: ProblemParams, r: float, xi: complex, rule: QuadratureRule) -> float:
    """
    Closed form of the averaging operator applied to |1 - r y|^-alpha:

    (sin(beta pi)/pi) int w(t) (1 - t r^2)^-beta (1 - x^2) / |1 - x xi|^2 dt, x = (t r)^l
    """
    _check_rule(p, rule)
    _check_unit(xi)
    if not 0.0 < r < 1.0:
        raise DomainError(f"perron_apply needs 0 < r < 1, got {r!r}")
    l, beta = p.l, p.beta
    re_xi = xi.real

    def integrand(t):
        x = (t * r) ** l
        return (1.0 - t * r * r) ** -beta * (1.0 - x * x) / (1.0 + x * x - 2.0 * x * re_xi)

    value = rule.integrate(integrand)
    self_check(value, rule.refined().integrate(integrand), f"perron_apply(l={l}, r={r:.6g})")
    return math.sin(beta * math.pi) / math.pi * value


def perron_average(p: ProblemParams, r: float, xi: complex) -> float:
    """Defining average (1/l) sum over y^l = xi of |1 - r y|^-alpha"""
    _check_unit(xi)
    root = cmath.exp(1j * cmath.phase(xi) / p.l)
    ys = root * np.exp(2j * math.pi * np.arange(p.l) / p.l)
    return float(np.mean(np.abs(1.0 - r * ys) ** -p.alpha))


def perron_monomial(l: int, k: int, xi: complex) -> complex:
    """Average of y^k over the l-th roots y of xi: xi^(k/l) when l divides k, else 0"""
    root = cmath.exp(1j * cmath.phase(xi) / l)
    ys = root * np.exp(2j * math.pi * np.arange(l) / l)
    return complex(np.mean(ys ** k))


def perron_series(p: ProblemParams, r: float, xi: complex, rule: QuadratureRule,
                  n_terms: Optional[int] = None) -> float:
    """Truncated series sum_k b_(l|k|) xi^k = b_0 + 2 sum_(k>=1) b_(lk) Re(xi^k)"""
    _check_unit(xi)
    n_terms = n_terms or series_terms(p.l, r)
    coeffs = perron_coefficients(p, r, p.l * n_terms, rule)
    total = coeffs[0]
    for k in range(1, n_terms + 1):
        total += 2.0 * coeffs[p.l * k] * (xi ** k).real
    return total


def u_perron(p: ProblemParams, theta: float, r: float, rule: QuadratureRule) -> float:
    """Potential through the averaging operator at xi^l = exp(-2 i l theta)"""
    if not 0.0 < r < 1.0:
        raise DomainError(f"u_perron needs 0 < r < 1, got {r!r}")
    beta = p.beta
    xi_l = cmath.exp(-2j * p.l * theta)
    bracket = p.c_group + p.l * r ** beta * perron_apply(p, r, xi_l, rule)
    return ((1.0 + r) ** 2 / (4.0 * r)) ** beta * bracket


def binomial_identity(beta: float, n: int, rule: QuadratureRule) -> float:
    """Quadrature side of (sin(beta pi)/pi) int t^(beta-1) (1-t)^-beta t^n dt"""
    if rule.beta is None or abs(rule.beta - beta) > 1e-15:
        raise DomainError(f"Quadrature rule built for beta={rule.beta}, expected {beta}")
    return math.sin(beta * math.pi) / math.pi * rule.integrate(lambda t: t ** n)


def binomial_abs(beta: float, n: int) -> float:
    """|binom(-beta, n)| = beta (beta+1) ... (beta+n-1) / n!"""
    return abs(float(binom(-beta, n)))


def perron_report(p: ProblemParams, r: float, xis: Sequence[complex], rule: QuadratureRule,
                  n_max: int = 10) -> List[Dict]:
    """
    Residual table comparing the closed form, the defining average and the
    truncated series at each xi, followed by b_0..b_n_max.
    """
    rows = []
    for xi in xis:
        closed = perron_apply(p, r, xi, rule)
        average = perron_average(p, r, xi)
        series = perron_series(p, r, xi, rule)
        rows.append({
            "kind": "operator",
            "xi_re": xi.real,
            "xi_im": xi.imag,
            "closed_form": closed,
            "average": average,
            "series": series,
            "residual": max(abs(closed - average), abs(closed - series)) / abs(average),
        })
    coeffs = perron_coefficients(p, r, n_max, rule)
    for n, b in enumerate(coeffs.b):
        rows.append({"kind": "coefficient", "n": n, "b": b})
    logger.info(f"Perron checks l={p.l}, alpha={p.alpha}, r={r}: "
                f"max residual {max((row['residual'] for row in rows if 'residual' in row), default=0.0):.3e}")
    return rows
