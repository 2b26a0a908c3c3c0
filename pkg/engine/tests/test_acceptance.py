import math
import warnings

import numpy as np
import pytest

from errors import ConvergenceError, DomainError, QuadratureWarning
from models import SphereConfig
from services.acceptance import CHECKS, random_parabolic_start, richardson_partials, run_checks
from services.dynamics import energy
from services.potential import partials_at


def test_registry_order():
    assert list(CHECKS) == [
        "manifold_dims", "l2_degenerations", "representation", "eigen_dual_path", "hyperbolicity",
        "derivative_oracles", "flow_invariants", "homothetic_lift", "series_identities", "completeness",
    ]


def test_richardson_partials(p3):
    part = partials_at(p3, SphereConfig(0.3, 0.5))
    grad, hess = richardson_partials(p3, 0.3, 0.5)
    assert grad == pytest.approx([part.u_t, part.u_p], rel=1e-8)
    exact = np.array([[part.u_tt, part.u_tp], [part.u_tp, part.u_pp]])
    assert hess == pytest.approx(exact, rel=1e-6, abs=1e-7 * np.abs(exact).max())


def test_random_parabolic_start(p3):
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = random_parabolic_start(p3, rng)
        assert abs(energy(p3, x)[0]) < 1e-12
        assert 0.0 < x.theta < math.pi / p3.l


def test_quick_checks_pass():
    names = ["l2_degenerations", "representation", "series_identities", "homothetic_lift"]
    results = run_checks(quick=True, only=names)
    assert [r.name for r in results] == names
    failed = [(r.name, r.detail) for r in results if not r.passed]
    assert not failed
    assert all(r.seconds >= 0.0 for r in results)


def test_quick_sweep_checks_pass():
    results = run_checks(quick=True, only=["manifold_dims", "eigen_dual_path", "hyperbolicity"], workers=2)
    assert all(r.passed for r in results), [r.detail for r in results]


def test_quick_flow_invariants_stay_short():
    [result] = run_checks(quick=True, only=["flow_invariants"])
    assert result.passed, result.detail
    assert result.detail.startswith("5 runs")
    assert len(result.detail.split("tau reached: ")[1].split(")")[0].split(", ")) == 5
    assert result.seconds < 60.0


def test_unknown_check():
    with pytest.raises(DomainError):
        run_checks(only=["nope"])


def test_solver_errors_become_failures(monkeypatch):
    def broken(quick=False, workers=1):
        raise ConvergenceError("iteration cap")

    monkeypatch.setitem(CHECKS, "manifold_dims", broken)
    [result] = run_checks(only=["manifold_dims"])
    assert not result.passed
    assert math.isnan(result.value)
    assert "ConvergenceError" in result.detail


def test_quadrature_warnings_are_counted(monkeypatch):
    def noisy(quick=False, workers=1):
        warnings.warn("slow convergence", QuadratureWarning)
        return True, 0.0, 1.0, "ok"

    monkeypatch.setitem(CHECKS, "series_identities", noisy)
    [result] = run_checks(only=["series_identities"])
    assert result.passed
    assert result.detail == "ok; 1 quadrature warnings"


@pytest.mark.slow
def test_full_quick_suite():
    results = run_checks(quick=True)
    assert all(r.passed for r in results), [(r.name, r.detail) for r in results if not r.passed]


@pytest.mark.slow
def test_flow_invariants_full():
    [result] = run_checks(only=["flow_invariants"])
    assert result.passed, result.detail
