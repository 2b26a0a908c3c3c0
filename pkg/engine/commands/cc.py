"""
cc: central configurations and their stability, one record per family and
sign of v_bar
"""
import logging
from typing import Dict, List

import click

from commands.common import EXIT_NUMERICAL, EXIT_OK, RunConfig, build, guarded, output_options, problem_options
from export import write_records
from services.central_configs import SweepEntry, completeness_scan, sweep

logger = logging.getLogger(__name__)


def cc_records(entries: List[SweepEntry]) -> List[Dict]:
    """Flatten sweep results in (l, alpha, family, v_bar sign) order."""
    rows = []
    for entry in entries:
        by_family = {cc.family: cc for cc in entry.configs}
        for report in entry.reports:
            cc = by_family[report.family]
            rows.append({
                "l": entry.params.l,
                "alpha": entry.params.alpha,
                "family": cc.family.value,
                "theta": cc.s.theta,
                "phi": cc.s.phi,
                "u": cc.u_value,
                "v_bar_sign": report.v_sign,
                "gamma1": report.gammas[0],
                "gamma2": report.gammas[1],
                "hessian1": cc.hessian_eigs[0],
                "hessian2": cc.hessian_eigs[1],
                "eigenvalues": [[z.real, z.imag] for z in report.eigenvalues],
                "dim_stable": report.dim_stable,
                "dim_unstable": report.dim_unstable,
                "dim_stable_in_P": report.dim_stable_in_P,
                "dim_unstable_in_P": report.dim_unstable_in_P,
                "v_bar": cc.v_bar,
                "multiplicity": cc.multiplicity,
                "residual": cc.residual,
                "motion": report.motion,
            })
    return rows


class CcConfig(RunConfig):
    scan: bool = False


def cmd_cc(cfg: CcConfig) -> int:
    entries = sweep(cfg.ls, cfg.alphas, workers=cfg.workers, tol=cfg.root_tol)
    write_records(cc_records(entries), cfg.fmt, cfg.output)
    if cfg.scan:
        failed = [e for e in entries if not completeness_scan(e.params, e.configs, cfg.grid).passed]
        if failed:
            click.echo(f"Completeness scan found stray zeros for "
                       f"{[(e.params.l, e.params.alpha) for e in failed]}", err=True)
            return EXIT_NUMERICAL
    return EXIT_OK


@click.command("cc")
@problem_options
@output_options
@click.option("--tol", "root_tol", type=float, default=None, help="Root tolerance on the latitude")
@click.option("--workers", type=int, default=None, help="Threads for (l, alpha) sweeps")
@click.option("--scan", is_flag=True, default=False, help="Also run the completeness scan")
@click.option("--grid", type=int, default=None, help="Completeness-scan resolution")
@guarded
def cc(**options):
    """Central configurations, eigenvalues and manifold dimensions."""
    return cmd_cc(build(CcConfig, command="cc", **options))
