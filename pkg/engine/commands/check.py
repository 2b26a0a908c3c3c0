"""
check: run the acceptance suite
"""
import json
import logging
from typing import Tuple

import click
import pandas as pd

from commands.common import EXIT_NUMERICAL, EXIT_OK, RunConfig, build, guarded
from services.acceptance import CHECKS, run_checks

logger = logging.getLogger(__name__)


class CheckConfig(RunConfig):
    quick: bool = False
    json_output: bool = False
    only: Tuple[str, ...] = ()


def cmd_check(cfg: CheckConfig) -> int:
    results = run_checks(quick=cfg.quick, only=list(cfg.only) or None, workers=cfg.workers)
    records = [r.to_dict() for r in results]
    if cfg.json_output:
        click.echo(json.dumps(records, indent=2))
    else:
        table = pd.DataFrame(records, columns=["name", "passed", "value", "threshold", "seconds", "detail"])
        click.echo(table.to_string(index=False))
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


@click.command("check")
@click.option("--quick", is_flag=True, default=False, help="Reduced grids")
@click.option("--json", "json_output", is_flag=True, default=False, help="One JSON record per criterion")
@click.option("--only", multiple=True, type=click.Choice(list(CHECKS)), help="Run only this criterion (repeatable)")
@click.option("--workers", type=int, default=None)
@guarded
def check(**options):
    """Run the acceptance criteria; exit 0 iff all pass."""
    return cmd_check(build(CheckConfig, command="check", **options))
