"""
Acceptance suite: oracle and property checks over the whole solver.

Each criterion returns (passed, value, threshold, detail); run_checks
times them, traps solver errors and quadrature warnings, and collects
CheckResult records for the `check` command.
"""
import cmath
import math
import time
import logging
import warnings
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import DihedralError, DomainError, QuadratureWarning, StepFailure
from models import MANIFOLD_DIMS, CheckResult, McGeheeState, SphereConfig
from services.central_configs import (
    antiprism_criterion,
    completeness_scan,
    eigen_gap,
    find_all,
    find_antiprism,
    find_ngon,
    find_prism,
    sweep,
)
from services.dynamics import energy, homothetic, integrate, lift, parabolic_homothetic_rho, project_to_parabolic
from services.geometry import dihedral_orbit, make_params, phi_of_r
from services.numerics import IntegratorConfig, gauss_jacobi_rule
from services.perron import BINOMIAL_ORDER, binomial_abs, binomial_identity, perron_coefficients, u_perron
from services.potential import partials_at, u_direct, u_integral

logger = logging.getLogger(__name__)

SEED = 20240917

SWEEP_LS = (2, 3, 4, 5, 6)
SWEEP_ALPHAS = (0.5, 1.0, 1.5)
QUICK_LS = (2, 3)
QUICK_ALPHAS = (1.0,)

TETRAHEDRON_PHI = math.asin(1.0 / math.sqrt(3.0))

# U beyond this multiple of its starting value ends a random flow run
COLLISION_CAP = 1e1
# Step budgets for one random flow run (quick, full)
FLOW_MAX_STEPS = (2000, 20000)

Outcome = Tuple[bool, float, float, str]

CHECKS: Dict[str, Callable[..., Outcome]] = {}


def check(name: str):
    """Register an acceptance criterion under `name` (suite order = registration order)."""
    def register(fn):
        CHECKS[name] = fn
        return fn
    return register


def _grid(quick: bool):
    return (QUICK_LS, QUICK_ALPHAS) if quick else (SWEEP_LS, SWEEP_ALPHAS)


@lru_cache(maxsize=4)
def _sweep_entries(quick: bool, workers: int):
    ls, alphas = _grid(quick)
    return tuple(sweep(ls, alphas, workers=workers))


@check("manifold_dims")
def check_manifold_dims(quick: bool = False, workers: int = 1) -> Outcome:
    """Stable/unstable dimensions against the expected table, both signs of v_bar."""
    mismatches = []
    entries = _sweep_entries(quick, workers)
    for entry in entries:
        for report in entry.reports:
            expected = MANIFOLD_DIMS[(report.family, report.v_sign)]
            if report.dims != expected:
                mismatches.append(f"l={entry.params.l} alpha={entry.params.alpha} "
                                  f"{report.family.value}/{report.v_sign:+d}: {report.dims} != {expected}")
    detail = "; ".join(mismatches) or f"{sum(len(e.reports) for e in entries)} reports match"
    return not mismatches, float(len(mismatches)), 0.0, detail


@check("l2_degenerations")
def check_l2_degenerations(quick: bool = False, workers: int = 1) -> Outcome:
    """l = 2: square prism at pi/4, antiprism is the regular tetrahedron."""
    worst_angle = 0.0
    worst_spread = 0.0
    for alpha in (1.0,) if quick else SWEEP_ALPHAS:
        p = make_params(2, alpha)
        prism = find_prism(p, tol=1e-15)
        anti = find_antiprism(p, tol=1e-15)
        worst_angle = max(worst_angle, abs(prism.s.phi - math.pi / 4), abs(anti.s.phi - TETRAHEDRON_PHI))
        distances = dihedral_orbit(anti.s, 1.0, 2).pairwise_distances()
        worst_spread = max(worst_spread, float(np.ptp(distances) / np.mean(distances)))
    passed = worst_angle < 1e-10 and worst_spread < 1e-12
    return passed, worst_angle, 1e-10, f"tetrahedron distance spread {worst_spread:.3e} (limit 1e-12)"


@check("representation")
def check_representation(quick: bool = False, workers: int = 1) -> Outcome:
    """Direct sum against the singular-integral and averaging-operator forms."""
    ls = (2, 3) if quick else (2, 3, 5)
    alphas = (1.0,) if quick else SWEEP_ALPHAS
    radii = (0.2, 0.5, 0.9) if quick else tuple(np.round(np.arange(0.2, 0.95, 0.1), 10))
    worst = 0.0
    count = 0
    for l in ls:
        for alpha in alphas:
            p = make_params(l, alpha)
            rule = gauss_jacobi_rule(64, p.beta)
            for r in radii:
                phi = phi_of_r(float(r))
                for theta in (math.pi / (4 * l), math.pi / (2 * l)):
                    direct = u_direct(p, SphereConfig(theta, phi))
                    worst = max(worst,
                                abs(u_integral(p, theta, float(r), rule) / direct - 1.0),
                                abs(u_perron(p, theta, float(r), rule) / direct - 1.0))
                    count += 1
    return worst < 1e-8, worst, 1e-8, f"{count} grid points"


@check("eigen_dual_path")
def check_eigen_dual_path(quick: bool = False, workers: int = 1) -> Outcome:
    """Quadratic-formula eigenvalues against the dense 5x5 spectrum."""
    worst = 0.0
    for entry in _sweep_entries(quick, workers):
        for report in entry.reports:
            worst = max(worst, eigen_gap(report.quadratic_eigenvalues, report.eigenvalues))
    return worst < 1e-9, worst, 1e-9, ""


@check("hyperbolicity")
def check_hyperbolicity(quick: bool = False, workers: int = 1) -> Outcome:
    """Smallest |Re lambda| relative to v_bar over the sweep."""
    worst = math.inf
    where = ""
    for entry in _sweep_entries(quick, workers):
        v_bars = {cc.family: cc.v_bar for cc in entry.configs}
        for report in entry.reports:
            ratio = min(abs(z.real) for z in report.eigenvalues) / v_bars[report.family]
            if ratio < worst:
                worst = ratio
                where = f"l={entry.params.l} alpha={entry.params.alpha} {report.family.value}/{report.v_sign:+d}"
    return worst > 1e-6, worst, 1e-6, f"attained at {where}"


def _fd_partials(p, theta: float, phi: float, h: float):
    def u(t, f):
        return u_direct(p, SphereConfig(t, f))

    u0 = u(theta, phi)
    tp, tm = u(theta + h, phi), u(theta - h, phi)
    pp, pm = u(theta, phi + h), u(theta, phi - h)
    mixed = (u(theta + h, phi + h) - u(theta + h, phi - h)
             - u(theta - h, phi + h) + u(theta - h, phi - h)) / (4.0 * h * h)
    grad = np.array([(tp - tm) / (2.0 * h), (pp - pm) / (2.0 * h)])
    hess = np.array([
        [(tp - 2.0 * u0 + tm) / (h * h), mixed],
        [mixed, (pp - 2.0 * u0 + pm) / (h * h)],
    ])
    return grad, hess


def richardson_partials(p, theta: float, phi: float, h: float = 1e-3):
    """Central differences at h and h/2 combined to fourth order."""
    g1, h1 = _fd_partials(p, theta, phi, h)
    g2, h2 = _fd_partials(p, theta, phi, h / 2.0)
    return (4.0 * g2 - g1) / 3.0, (4.0 * h2 - h1) / 3.0


@check("derivative_oracles")
def check_derivative_oracles(quick: bool = False, workers: int = 1) -> Outcome:
    """Analytic gradient and Hessian against Richardson finite differences."""
    rng = np.random.default_rng(SEED)
    n_points = 20 if quick else 100
    worst_grad = worst_hess = 0.0
    for _ in range(n_points):
        l = int(rng.choice((2, 3, 4)))
        p = make_params(l, float(rng.uniform(0.25, 1.75)))
        theta = float(rng.uniform(0.1, 0.9)) * math.pi / l
        phi = float(rng.uniform(-1.2, 1.2))
        part = partials_at(p, SphereConfig(theta, phi))
        fd_grad, fd_hess = richardson_partials(p, theta, phi)
        grad = np.array([part.u_t, part.u_p])
        hess = np.array([[part.u_tt, part.u_tp], [part.u_tp, part.u_pp]])
        floor = 1e-2 * part.u
        worst_grad = max(worst_grad, np.max(np.abs(grad - fd_grad)) / max(np.max(np.abs(fd_grad)), floor))
        worst_hess = max(worst_hess, np.max(np.abs(hess - fd_hess)) / max(np.max(np.abs(fd_hess)), floor))
    passed = worst_grad < 1e-6 and worst_hess < 1e-5
    return passed, float(worst_grad), 1e-6, f"{n_points} points, hessian {worst_hess:.3e} (limit 1e-5)"


def random_parabolic_start(p, rng: np.random.Generator) -> McGeheeState:
    """Random non-collision state rescaled onto the parabolic manifold."""
    x = McGeheeState(
        v=float(rng.uniform(-1.0, 1.0)),
        theta=float(rng.uniform(0.1, 0.9)) * math.pi / p.l,
        phi=float(rng.uniform(-1.0, 1.0)),
        w1=float(rng.uniform(-1.0, 1.0)),
        w2=float(rng.uniform(-1.0, 1.0)),
    )
    return project_to_parabolic(p, x)


@check("flow_invariants")
def check_flow_invariants(quick: bool = False, workers: int = 1) -> Outcome:
    """Parabolic runs keep E = 0 and v nondecreasing."""
    p = make_params(3, 1.0)
    rng = np.random.default_rng(SEED + 1)
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, max_steps=FLOW_MAX_STEPS[0 if quick else 1])
    n_runs = 5 if quick else 20
    worst_e = 0.0
    worst_drop = 0.0
    early = 0
    reached = []
    for _ in range(n_runs):
        x0 = random_parabolic_start(p, rng)
        u_cap = COLLISION_CAP * partials_at(p, x0.sphere).u
        try:
            traj = integrate(p, x0, (0.0, 20.0), cfg, u_cap=u_cap)
            v = traj.states[:, 0]
            energies = traj.energies
            early += traj.stop_reason is not None
            reached.append(float(traj.taus[-1]))
        except StepFailure as e:
            states = [x for _, x in e.samples]
            v = np.array([x.v for x in states])
            energies = np.array([energy(p, x)[0] for x in states])
            early += 1
            reached.append(float(e.tau))
        worst_e = max(worst_e, float(np.max(np.abs(energies))))
        if len(v) > 1:
            worst_drop = max(worst_drop, float(-np.min(np.diff(v))))
    passed = worst_e < 1e-6 and worst_drop <= 1e-9
    taus = ", ".join(f"{tau:.3g}" for tau in reached)
    return passed, worst_e, 1e-6, (f"{n_runs} runs, {early} ended before tau=20 (tau reached: {taus}), "
                                   f"largest v decrease {max(worst_drop, 0.0):.3e} (slack 1e-9)")


@check("homothetic_lift")
def check_homothetic_lift(quick: bool = False, workers: int = 1) -> Outcome:
    """Lifted parabolic homothetic orbit against the closed-form rho(t) on t in [0.1, 10]."""
    worst = 0.0
    for l in (3,) if quick else (2, 3, 4):
        p = make_params(l, 1.0)
        cc = find_ngon(p)
        growth = (1.0 + p.beta) * cc.v_bar
        t0 = 0.1
        rho0 = (t0 * growth) ** (1.0 / (1.0 + p.beta))
        tau_end = math.log(100.0) / growth
        traj = lift(p, homothetic(p, cc, cc.v_bar, (0.0, tau_end)), rho0, t0)
        closed = np.array([parabolic_homothetic_rho(p, cc, float(t), 1) for t in traj.t])
        worst = max(worst, float(np.max(np.abs(traj.rho / closed - 1.0))))
    return worst < 1e-8, worst, 1e-8, ""


@check("series_identities")
def check_series_identities(quick: bool = False, workers: int = 1) -> Outcome:
    """Binomial identity, b-series reconstruction, C_1 at l = 2 and the antiprism criterion."""
    binom_err = 0.0
    for beta in (0.25, 0.5, 0.75):
        rule = gauss_jacobi_rule(BINOMIAL_ORDER, beta)
        for n in range(11):
            exact = binomial_abs(beta, n)
            binom_err = max(binom_err, abs(binomial_identity(beta, n, rule) / exact - 1.0))

    rng = np.random.default_rng(SEED + 2)
    series_err = 0.0
    r = 0.5
    n_max = math.ceil(math.log(1e-14) / math.log(r))
    for alpha in SWEEP_ALPHAS:
        p = make_params(2, alpha)
        coeffs = perron_coefficients(p, r, n_max, gauss_jacobi_rule(64, p.beta))
        for angle in rng.uniform(0.0, 2.0 * math.pi, 20):
            xi = cmath.exp(1j * angle)
            series = coeffs[0] + 2.0 * sum(coeffs[n] * (xi ** n).real for n in range(1, n_max + 1))
            exact = abs(1.0 - r * xi) ** -alpha
            series_err = max(series_err, abs(series / exact - 1.0))

    c1_err = 0.0
    for alpha in SWEEP_ALPHAS:
        p = make_params(2, alpha)
        c1_err = max(c1_err, abs(antiprism_criterion(p).c_terms[0] - (2.0 ** p.beta - 1.0)))

    failures = []
    alphas = (0.5, 1.0, 1.5) if quick else tuple(np.round(np.arange(0.25, 1.76, 0.25), 10))
    for l in range(2, 7 if quick else 13):
        for alpha in alphas:
            p = make_params(l, float(alpha))
            if not antiprism_criterion(p).holds:
                failures.append(f"l={l} alpha={alpha}")
            elif l == 2 and abs(find_antiprism(p).s.phi - TETRAHEDRON_PHI) > 1e-10:
                failures.append(f"l=2 alpha={alpha}: root off the tetrahedron")

    passed = binom_err < 1e-12 and series_err < 1e-6 and c1_err < 1e-12 and not failures
    detail = (f"binomial {binom_err:.3e} (1e-12), series {series_err:.3e} (1e-6), "
              f"C_1 {c1_err:.3e} (1e-12), criterion failures: {', '.join(failures) or 'none'}")
    return passed, max(binom_err, c1_err), 1e-12, detail


@check("completeness")
def check_completeness(quick: bool = False, workers: int = 1, grid: int = 200) -> Outcome:
    """No gradient zero on the wedge grid away from the three representatives."""
    ls, alphas = _grid(quick)
    grid = 60 if quick else grid
    stray = 0
    smallest = math.inf
    for l in ls:
        for alpha in alphas:
            p = make_params(l, alpha)
            report = completeness_scan(p, find_all(p), grid)
            stray += len(report.stray_zeros)
            smallest = min(smallest, report.min_norm_outside)
    return stray == 0 and smallest > 0.0, float(stray), 0.0, f"grid {grid}, min norm outside balls {smallest:.3e}"


def run_checks(quick: bool = False, only: Optional[Sequence[str]] = None,
               workers: int = 1) -> List[CheckResult]:
    """
    Run the registered criteria in order.

    Args:
        quick: Reduced grids for a fast smoke run
        only: Names to run; None runs everything
        workers: Thread pool size for the parameter sweep

    Returns:
        One CheckResult per criterion
    """
    names = list(CHECKS) if not only else list(only)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise DomainError(f"Unknown check(s): {', '.join(unknown)}; available: {', '.join(CHECKS)}")

    results = []
    for name in names:
        start = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", QuadratureWarning)
            try:
                passed, value, threshold, detail = CHECKS[name](quick=quick, workers=workers)
            except DihedralError as e:
                logger.error(f"Check {name} raised {type(e).__name__}: {e}")
                passed, value, threshold, detail = False, math.nan, math.nan, f"{type(e).__name__}: {e}"
        quad = [w for w in caught if issubclass(w.category, QuadratureWarning)]
        if quad:
            detail = f"{detail}; {len(quad)} quadrature warnings".lstrip("; ")
        seconds = time.perf_counter() - start
        result = CheckResult(name=name, passed=bool(passed), value=float(value),
                             threshold=float(threshold), seconds=seconds, detail=detail)
        log = logger.info if result.passed else logger.warning
        log(f"{name}: {'PASS' if result.passed else 'FAIL'} value={result.value:.3e} "
            f"threshold={result.threshold:.1e} ({seconds:.2f}s) {detail}")
        results.append(result)

    logger.info(f"Acceptance: {sum(r.passed for r in results)}/{len(results)} passed")
    return results
