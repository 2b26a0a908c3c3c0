"""
Shared pytest fixtures. Puts this directory on sys.path so tests import
modules the way the CLI does (from models import ..., from services.x import ...).
"""
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from models import ProblemParams  # noqa: E402
from services.geometry import make_params  # noqa: E402
from services.numerics import IntegratorConfig, QuadratureRule, gauss_jacobi_rule  # noqa: E402


@pytest.fixture
def p2() -> ProblemParams:
    return make_params(2, 1.0)


@pytest.fixture
def p3() -> ProblemParams:
    return make_params(3, 1.0)


@pytest.fixture
def rule3(p3) -> QuadratureRule:
    return gauss_jacobi_rule(64, p3.beta)


@pytest.fixture
def tight() -> IntegratorConfig:
    return IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, max_step=0.05)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for name in list(os.environ):
        if name.startswith("DIHEDRAL_"):
            monkeypatch.delenv(name, raising=False)
