"""
perron: residuals of the l-adic averaging operator against its closed form
and truncated series, plus the b_n coefficients
"""
import cmath
import math
import logging
from typing import Dict, List

import click
from pydantic import Field

from commands.common import EXIT_OK, SingleProblemConfig, build, guarded, output_options, problem_options
from export import write_records
from models import ProblemParams
from services.geometry import make_params
from services.perron import perron_monomial, perron_report

logger = logging.getLogger(__name__)


class PerronConfig(SingleProblemConfig):
    r: float = Field(default=0.5, gt=0.0, lt=1.0)
    n_max: int = Field(default=10, ge=0)
    n_xi: int = Field(default=8, ge=1)


def unit_samples(n: int) -> List[complex]:
    """n points on the unit circle, offset from 1 so no sample is real"""
    return [cmath.exp(2j * math.pi * (k + 0.25) / n) for k in range(n)]


def monomial_rows(p: ProblemParams, xis: List[complex]) -> List[Dict]:
    """Averages of y^k, k = 0..2l, against xi^(k/l) when l | k and 0 otherwise."""
    rows = []
    for xi in xis:
        for k in range(2 * p.l + 1):
            value = perron_monomial(p.l, k, xi)
            expected = xi ** (k // p.l) if k % p.l == 0 else 0.0
            rows.append({
                "kind": "monomial",
                "xi_re": xi.real,
                "xi_im": xi.imag,
                "k": k,
                "residual": abs(value - expected),
            })
    return rows


def cmd_perron(cfg: PerronConfig) -> int:
    p = make_params(cfg.l, cfg.alpha)
    xis = unit_samples(cfg.n_xi)
    rows = perron_report(p, cfg.r, xis, cfg.rule(p.beta), n_max=cfg.n_max)
    rows.extend(monomial_rows(p, xis))
    write_records(rows, cfg.fmt, cfg.output)
    return EXIT_OK


@click.command("perron")
@problem_options
@output_options
@click.option("--r", type=float, default=None, help="Modulus r in (0, 1) [default: 0.5]")
@click.option("--order", "quad_order", type=int, default=None, help="Gauss-Jacobi order")
@click.option("--n-max", type=int, default=None, help="Highest b_n reported [default: 10]")
@click.option("--n-xi", type=int, default=None, help="Points on the unit circle [default: 8]")
@guarded
def perron(**options):
    """Averaging-operator checks: closed form, defining average, series."""
    return cmd_perron(build(PerronConfig, command="perron", **options))
