import math
import warnings

import numpy as np
import pytest

from errors import BracketError, DomainError, QuadratureWarning, StepFailure
from services.numerics import (
    IntegratorConfig,
    brent_root,
    eig_dense,
    gauss_jacobi_rule,
    hermite_partial_integrals,
    hermite_segment_integrals,
    jacobi_rule,
    rk_integrate,
    self_check,
)


def test_jacobi_rule_polynomial_exactness():
    rule = jacobi_rule(20, 0.0, 0.0)
    assert rule.integrate(lambda t: t ** 5) == pytest.approx(1.0 / 6.0, rel=1e-14)
    assert rule.integrate(lambda t: np.ones_like(t)) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.75])
def test_gauss_jacobi_total_weight(beta):
    rule = gauss_jacobi_rule(64, beta)
    # int t^(beta-1) (1-t)^(-beta) dt = Gamma(beta) Gamma(1-beta) = pi / sin(beta pi)
    assert rule.integrate(lambda t: np.ones_like(t)) == pytest.approx(math.pi / math.sin(beta * math.pi), rel=1e-13)
    assert np.all((rule.nodes > 0) & (rule.nodes < 1))


def test_singular_weight_rule_raises_no_runtime_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        rule = jacobi_rule(12, -0.3, -0.7)
    assert np.all(np.isfinite(rule.nodes))
    assert rule.integrate(lambda t: np.ones_like(t)) == pytest.approx(math.pi / math.sin(0.7 * math.pi), rel=1e-13)


def test_rule_vectorized_over_leading_axis():
    rule = jacobi_rule(16, 0.0, 0.0)
    powers = np.arange(4)[:, None]
    values = rule.integrate(lambda t: t[None, :] ** powers)
    np.testing.assert_allclose(values, 1.0 / (np.arange(4) + 1.0), rtol=1e-14)


def test_refined_keeps_beta():
    rule = gauss_jacobi_rule(32, 0.5)
    refined = rule.refined()
    assert refined.order == 64
    assert refined.beta == 0.5


def test_rule_rejects_bad_arguments():
    with pytest.raises(DomainError):
        jacobi_rule(1, 0.0, 0.0)
    with pytest.raises(DomainError):
        jacobi_rule(8, -1.0, 0.0)
    with pytest.raises(DomainError):
        gauss_jacobi_rule(8, 1.0)


def test_self_check_warns_above_threshold():
    with pytest.warns(QuadratureWarning):
        change = self_check(1.0, 1.1, "test")
    assert change == pytest.approx(0.1 / 1.1)
    assert self_check(1.0, 1.0 + 1e-14, "test") < 1e-10


def test_brent_root():
    assert brent_root(math.cos, 1.0, 2.0) == pytest.approx(math.pi / 2, abs=1e-12)
    assert brent_root(lambda x: x ** 3 - 2.0, 0.0, 2.0, tol=1e-14) == pytest.approx(2.0 ** (1 / 3), abs=1e-13)
    assert brent_root(lambda x: x, 0.0, 1.0) == 0.0


def test_brent_requires_sign_change():
    with pytest.raises(BracketError):
        brent_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_integrator_config_validation():
    with pytest.raises(DomainError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        IntegratorConfig(max_step=-1.0)
    with pytest.raises(DomainError):
        IntegratorConfig(max_steps=0)


def test_rk_exponential_decay(tight):
    samples = rk_integrate(lambda tau, y: -y, [1.0], (0.0, 1.0), tight)
    assert samples[0][0] == 0.0
    assert samples[-1][0] == 1.0
    assert samples[-1][1][0] == pytest.approx(math.exp(-1.0), rel=1e-9)


def test_rk_backwards(tight):
    samples = rk_integrate(lambda tau, y: -y, [1.0], (0.0, -1.0), tight)
    assert samples[-1][0] == -1.0
    assert samples[-1][1][0] == pytest.approx(math.e, rel=1e-9)
    assert all(b[0] < a[0] for a, b in zip(samples, samples[1:]))


def test_rk_harmonic_oscillator(tight):
    samples = rk_integrate(lambda tau, y: np.array([y[1], -y[0]]), [1.0, 0.0], (0.0, 2 * math.pi), tight)
    np.testing.assert_allclose(samples[-1][1], [1.0, 0.0], atol=1e-8)


def test_rk_zero_span(tight):
    samples = rk_integrate(lambda tau, y: y, [2.0], (3.0, 3.0), tight)
    assert len(samples) == 1


def test_rk_stop_condition(tight):
    samples = rk_integrate(lambda tau, y: np.ones(1), [0.0], (0.0, 10.0), tight, stop=lambda tau, y: y[0] > 1.0)
    assert 1.0 < samples[-1][1][0] <= 1.0 + tight.max_step + 1e-12
    assert samples[-1][0] < 10.0


def test_rk_projection_applied(tight):
    def unit(y):
        return y / np.linalg.norm(y)

    samples = rk_integrate(lambda tau, y: np.array([y[1], -y[0]]), [1.0, 0.0], (0.0, 5.0), tight, project=unit)
    norms = [np.linalg.norm(y) for _, y in samples]
    np.testing.assert_allclose(norms, 1.0, atol=1e-15)


def test_rk_blow_up_raises_with_samples():
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, max_step=0.05, max_steps=100000)
    # y' = y^2 from y(0) = 1 escapes at tau = 1
    with pytest.raises(StepFailure) as info:
        rk_integrate(lambda tau, y: y * y, [1.0], (0.0, 2.0), cfg)
    assert info.value.samples
    assert info.value.tau == pytest.approx(1.0, abs=1e-3)


def test_rk_step_budget():
    cfg = IntegratorConfig(max_step=0.01, max_steps=5)
    with pytest.raises(StepFailure):
        rk_integrate(lambda tau, y: -y, [1.0], (0.0, 1.0), cfg)


def test_eig_dense_sorted():
    values = eig_dense([[2.0, 0.0], [0.0, -1.0]])
    assert values == [-1.0 + 0j, 2.0 + 0j]
    rotation = eig_dense([[0.0, -1.0], [1.0, 0.0]])
    assert sorted(z.imag for z in rotation) == pytest.approx([-1.0, 1.0])
    with pytest.raises(DomainError):
        eig_dense(np.eye(6))


def test_hermite_integrals_exact_for_cubics():
    tau = np.array([0.0, 0.3, 0.7, 1.5])
    y = tau ** 3 - tau
    dy = 3 * tau ** 2 - 1
    np.testing.assert_allclose(hermite_segment_integrals(tau, y, dy), tau ** 4 / 4 - tau ** 2 / 2, atol=1e-15)

    h, a = 0.8, 0.7
    partial = hermite_partial_integrals(h, a ** 3 - a, (a + h) ** 3 - (a + h),
                                        3 * a ** 2 - 1, 3 * (a + h) ** 2 - 1, 0.5)
    b = a + 0.5 * h
    assert partial == pytest.approx((b ** 4 / 4 - b ** 2 / 2) - (a ** 4 / 4 - a ** 2 / 2), abs=1e-15)
    with pytest.raises(DomainError):
        hermite_segment_integrals([], [], [])
