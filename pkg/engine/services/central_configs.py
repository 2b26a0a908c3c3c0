"""
Central configurations of the dihedral problem and their stability
"""
import cmath
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import CollisionError, ConvergenceError, DomainError, HyperbolicityError
from models import (
    AntiprismCriterion,
    CentralConfiguration,
    Family,
    ProblemParams,
    ScanReport,
    SphereConfig,
    StabilityReport,
)
from services.dynamics import motion_kind
from services.geometry import canonicalize, make_params, multiplicity
from services.numerics import brent_root, eig_dense
from services.potential import f_theta, gradient, gradient_norm, hessian, sphere_partials, u_direct

logger = logging.getLogger(__name__)

BRACKET_EPS = 1e-6
ROOT_TOL = 1e-12
HYPERBOLIC_TOL = 1e-10
DUAL_PATH_TOL = 1e-9
SCAN_RADIUS = 1e-2
SCAN_PHI_MARGIN = 1e-2


def _make_cc(p: ProblemParams, family: Family, s: SphereConfig) -> CentralConfiguration:
    u = u_direct(p, s)
    eigs = np.linalg.eigvalsh(hessian(p, s))
    return CentralConfiguration(
        family=family,
        s=s,
        u_value=u,
        v_bar=math.sqrt(2.0 * u),
        hessian_eigs=(float(eigs[1]), float(eigs[0])),
        multiplicity=multiplicity(family, p.l),
        residual=gradient_norm(p, s),
    )


def find_ngon(p: ProblemParams) -> CentralConfiguration:
    """Regular 2l-gon on the equator"""
    return _make_cc(p, Family.NGON, SphereConfig(theta=math.pi / (2 * p.l), phi=0.0))


def _latitude_root(p: ProblemParams, theta: float, tol: float) -> float:
    """Unique zero of f_theta in (0, pi/2) along a symmetry meridian."""
    return brent_root(lambda phi: f_theta(p, theta, phi), BRACKET_EPS, math.pi / 2 - BRACKET_EPS, tol)


def find_prism(p: ProblemParams, tol: float = ROOT_TOL) -> CentralConfiguration:
    """Prism: theta = 0 and the root of f_0"""
    phi = _latitude_root(p, 0.0, tol)
    logger.debug(f"prism root l={p.l}, alpha={p.alpha}: phi={phi!r}")
    return _make_cc(p, Family.PRISM, SphereConfig(theta=0.0, phi=phi))


def find_antiprism(p: ProblemParams, tol: float = ROOT_TOL) -> CentralConfiguration:
    """Antiprism: theta = pi/(2l) and the root of f_(pi/2l)"""
    theta = math.pi / (2 * p.l)
    phi = _latitude_root(p, theta, tol)
    logger.debug(f"antiprism root l={p.l}, alpha={p.alpha}: phi={phi!r}")
    return _make_cc(p, Family.ANTIPRISM, SphereConfig(theta=theta, phi=phi))


def antiprism_criterion(p: ProblemParams) -> AntiprismCriterion:
    """
    C_j = sin^-(2b+2)(x_j) - sin^-2b(x_j) - sin^-2b(j pi/l), x_j = j pi/l - pi/(2l),
    for j = 1..floor(l/2), compared as 2 sum C_j > d_l.

    For l = 2 the comparison fails when beta < log2(3/2); existence there
    rests on the closed-form reduction, which direct_margin reflects.
    """
    l, b = p.l, p.beta
    j = np.arange(1, l // 2 + 1)
    x = j * math.pi / l - math.pi / (2 * l)
    c_terms = np.sin(x) ** (-2 * b - 2) - np.sin(x) ** (-2 * b) - np.sin(j * math.pi / l) ** (-2 * b)
    sum_cj = float(np.sum(c_terms))
    inequality = 2.0 * sum_cj > p.d_l

    margin = -f_theta(p, math.pi / (2 * l), 0.0)
    holds = inequality if l >= 3 else margin > 0.0
    return AntiprismCriterion(
        l=l,
        alpha=p.alpha,
        c_terms=tuple(float(c) for c in c_terms),
        sum_cj=sum_cj,
        threshold=p.d_l,
        inequality_holds=bool(inequality),
        direct_margin=margin,
        holds=bool(holds),
    )


def find_all(p: ProblemParams, tol: float = ROOT_TOL, scan_grid: Optional[int] = None) -> List[CentralConfiguration]:
    """
    One representative per family, in Family order.

    With scan_grid set, the wedge is also scanned and a ConvergenceError is
    raised if a gradient zero shows up away from the three representatives.
    """
    configs = [find_ngon(p), find_prism(p, tol), find_antiprism(p, tol)]
    logger.info(
        f"Central configurations l={p.l}, alpha={p.alpha}: "
        + ", ".join(f"{cc.family.value}=({cc.s.theta:.6f}, {cc.s.phi:.6f})" for cc in configs)
    )
    if scan_grid:
        report = completeness_scan(p, configs, scan_grid)
        if not report.passed:
            raise ConvergenceError(f"Completeness scan found stray zeros: {report.stray_zeros}")
    return configs


# ---------------------------------------------------------------------------
# Linearization
# ---------------------------------------------------------------------------

def linearization(p: ProblemParams, cc: CentralConfiguration, v_sign: int) -> np.ndarray:
    """
    Jacobian of the chart flow at the equilibrium (v_sign * v_bar, s, 0).

    Variables ordered (v, theta, phi, w1, w2).
    """
    v = v_sign * cc.v_bar
    b = p.beta
    h = hessian(p, cc.s)
    cos2 = math.cos(cc.s.phi) ** 2
    m = np.zeros((5, 5))
    m[0, 0] = 2.0 * b * v
    m[1, 3] = 1.0
    m[2, 4] = 1.0
    m[3, 1] = h[0, 0] / cos2
    m[3, 2] = h[0, 1] / cos2
    m[3, 3] = (b - 1.0) * v
    m[4, 1] = h[1, 0]
    m[4, 2] = h[1, 1]
    m[4, 4] = (b - 1.0) * v
    return m


def tangent_gammas(p: ProblemParams, cc: CentralConfiguration) -> Tuple[float, float]:
    """Eigenvalues of G^-1 D^2U, G = diag(cos^2 phi, 1), via the symmetric form."""
    h = hessian(p, cc.s)
    c = math.cos(cc.s.phi)
    scaled = np.array([[h[0, 0] / c ** 2, h[0, 1] / c], [h[0, 1] / c, h[1, 1]]])
    eigs = np.linalg.eigvalsh(scaled)
    return float(eigs[1]), float(eigs[0])


def quadratic_roots(p: ProblemParams, v_bar: float, gamma: float) -> Tuple[complex, complex]:
    """Roots of lambda^2 + (1 - beta) v_bar lambda = gamma"""
    k = (1.0 - p.beta) * v_bar
    disc = cmath.sqrt(k * k + 4.0 * gamma)
    return (-k - disc) / 2.0, (-k + disc) / 2.0


def eigen_gap(reference: Sequence[complex], candidates: Sequence[complex]) -> float:
    """Largest distance from each reference value to its nearest unused candidate."""
    unused = list(candidates)
    worst = 0.0
    for z in reference:
        k = min(range(len(unused)), key=lambda i: abs(unused[i] - z))
        worst = max(worst, abs(unused.pop(k) - z))
    return worst


def classify(p: ProblemParams, cc: CentralConfiguration, v_sign: int) -> StabilityReport:
    """
    Spectrum of the linearization and the stable/unstable dimensions.

    Eigenvalues are computed twice (dense solver and the quadratic per
    tangent eigenvalue); the two sets must agree.
    """
    if v_sign not in (1, -1):
        raise DomainError(f"v_sign must be +1 or -1, got {v_sign!r}")
    v = v_sign * cc.v_bar
    dense = eig_dense(linearization(p, cc, v_sign))

    gammas = tangent_gammas(p, cc)
    in_p = [z for g in gammas for z in quadratic_roots(p, v, g)]
    quadratic = sorted(in_p + [complex(2.0 * p.beta * v)], key=lambda z: (z.real, z.imag))

    scale = max(1.0, max(abs(z) for z in dense))
    gap = eigen_gap(quadratic, dense)
    if gap > DUAL_PATH_TOL * scale:
        raise ConvergenceError(f"Dense and quadratic eigenvalues disagree by {gap:.3e} at {cc.family.value}")

    if min(abs(z.real) for z in quadratic) < HYPERBOLIC_TOL:
        raise HyperbolicityError(f"Eigenvalue on the imaginary axis at {cc.family.value}, v_sign={v_sign}")

    return StabilityReport(
        family=cc.family,
        v_sign=v_sign,
        eigenvalues=tuple(dense),
        quadratic_eigenvalues=tuple(quadratic),
        gammas=gammas,
        dim_stable=sum(1 for z in quadratic if z.real < 0),
        dim_unstable=sum(1 for z in quadratic if z.real > 0),
        dim_stable_in_P=sum(1 for z in in_p if z.real < 0),
        dim_unstable_in_P=sum(1 for z in in_p if z.real > 0),
        motion=motion_kind(v_sign),
    )


# ---------------------------------------------------------------------------
# Completeness scan
# ---------------------------------------------------------------------------

def _newton_zero(p: ProblemParams, s: SphereConfig, max_iter: int = 40) -> Optional[SphereConfig]:
    """Newton iteration on (U_theta, U_phi) from s; None when it does not settle on a zero."""
    for _ in range(max_iter):
        try:
            g = np.array(gradient(p, s))
            h = hessian(p, s)
            step = np.linalg.solve(h, -g)
        except (CollisionError, np.linalg.LinAlgError):
            return None
        s = canonicalize(SphereConfig(s.theta + step[0], s.phi + step[1]), p.l)
        if not abs(s.phi) < math.pi / 2 - SCAN_PHI_MARGIN / 2:
            return None
        if float(np.hypot(*step)) < 1e-13:
            break
    try:
        return s if gradient_norm(p, s) < 1e-9 else None
    except CollisionError:
        return None


def completeness_scan(p: ProblemParams, configs: Sequence[CentralConfiguration],
                      grid: int = 200, radius: float = SCAN_RADIUS) -> ScanReport:
    """
    Scan the gradient norm over the wedge theta in [0, pi/(2l)], phi in [0, pi/2 - 0.01].

    Grid local minima outside the radius-balls around `configs` are refined
    by Newton; any that converge to a zero away from the known points are
    reported as stray.
    """
    thetas = np.linspace(0.0, math.pi / (2 * p.l), grid)
    phis = np.linspace(0.0, math.pi / 2 - SCAN_PHI_MARGIN, grid)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    part = sphere_partials(p, tt, pp)
    with np.errstate(invalid="ignore"):
        norm = np.hypot(part.u_t / np.cos(pp), part.u_p)
    norm[~np.isfinite(norm)] = np.inf

    def near_known(theta, phi) -> bool:
        return any(math.hypot(theta - cc.s.theta, phi - cc.s.phi) < radius for cc in configs)

    outside = np.ones_like(norm, dtype=bool)
    for cc in configs:
        outside &= np.hypot(tt - cc.s.theta, pp - cc.s.phi) >= radius
    min_outside = float(norm[outside].min()) if outside.any() else math.inf

    padded = np.pad(norm, 1, constant_values=np.inf)
    neighbours = np.stack([
        padded[1 + di:1 + di + grid, 1 + dj:1 + dj + grid]
        for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)
    ])
    is_min = np.isfinite(norm) & np.all(norm <= neighbours, axis=0) & outside

    minima, stray = [], []
    for i, j in zip(*np.nonzero(is_min)):
        s = SphereConfig(float(tt[i, j]), float(pp[i, j]))
        minima.append(s)
        zero = _newton_zero(p, s)
        if zero is not None and not near_known(zero.theta, zero.phi):
            logger.warning(f"Stray gradient zero at theta={zero.theta:.6f}, phi={zero.phi:.6f}")
            stray.append(zero)

    logger.info(f"Completeness scan l={p.l}, alpha={p.alpha}, grid={grid}: "
                f"min norm outside balls {min_outside:.3e}, {len(minima)} local minima, {len(stray)} stray zeros")
    return ScanReport(grid=grid, radius=radius, min_norm_outside=min_outside,
                      local_minima=tuple(minima), stray_zeros=tuple(stray))


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepEntry:
    """Configurations and both-sign stability reports for one (l, alpha)."""
    params: ProblemParams
    configs: Tuple[CentralConfiguration, ...]
    reports: Tuple[StabilityReport, ...]  # family order, then v_sign +1, -1

    def records(self) -> List[Dict]:
        by_family = {cc.family: cc for cc in self.configs}
        rows = []
        for report in self.reports:
            cc = by_family[report.family]
            row = {"l": self.params.l, "alpha": self.params.alpha}
            row.update(cc.to_dict())
            row.update(report.to_dict())
            rows.append(row)
        return rows


def analyze(p: ProblemParams, tol: float = ROOT_TOL) -> SweepEntry:
    configs = find_all(p, tol)
    reports = [classify(p, cc, sign) for cc in configs for sign in (1, -1)]
    return SweepEntry(params=p, configs=tuple(configs), reports=tuple(reports))


def sweep(ls: Sequence[int], alphas: Sequence[float], workers: int = 4,
          tol: float = ROOT_TOL) -> List[SweepEntry]:
    """Analyze every (l, alpha) pair on a thread pool; output follows input order."""
    params = [make_params(l, alpha) for l in ls for alpha in alphas]
    if workers <= 1 or len(params) == 1:
        return [analyze(p, tol) for p in params]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda p: analyze(p, tol), params))
    logger.info(f"Sweep finished: {len(results)} parameter pairs on {workers} workers")
    return results
