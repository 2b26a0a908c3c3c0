"""
Command-line interface for the dihedral 2l-body solver.

Usage:
    python cli.py cc --l 2,3 --alpha 0.5,1.0 --format csv -o cc.csv
    python cli.py potential --l 3 --alpha 1 -o grid.csv
    python cli.py flow --l 3 --alpha 1 --theta 0.5 --phi 0.2 --w1 0.3 --parabolic
    python cli.py perron --l 2 --alpha 1 --r 0.5
    python cli.py check --quick
"""
import sys
import logging

import click

from commands.cc import cc
from commands.check import check
from commands.flow import flow
from commands.perron import perron
from commands.potential import potential
from commands.common import EXIT_USAGE
from config import get_settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(verbose: bool = False):
    """Log to stderr at the configured level (DEBUG with --verbose)."""
    level = logging.DEBUG if verbose else getattr(logging, get_settings().log_level, logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


class CliGroup(click.Group):
    """Group whose option-parsing errors exit with the usage code."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            return super().main(*args, **kwargs)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)


@click.group(cls=CliGroup)
@click.version_option(version="1.0.0", prog_name="dihedral")
@click.option("--verbose", "-v", is_flag=True, default=False, help="Debug logging")
def cli(verbose: bool):
    """
    Dihedral 2l-body problem: potentials, central configurations and the
    McGehee-regularized flow.
    """
    configure_logging(verbose)


cli.add_command(cc)
cli.add_command(potential)
cli.add_command(flow)
cli.add_command(perron)
cli.add_command(check)


def main():
    cli()


if __name__ == "__main__":
    main()
