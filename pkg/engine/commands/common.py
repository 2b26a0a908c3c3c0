"""
Shared pieces of the CLI commands: the validated run configuration and the
exit-code policy
"""
import sys
import logging
from functools import wraps
from typing import Annotated, List, Literal, Optional

import click
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import get_settings
from errors import DihedralError, DomainError, StepFailure
from services.numerics import IntegratorConfig, gauss_jacobi_rule

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

HalfBodies = Annotated[int, Field(ge=2)]
Alpha = Annotated[float, Field(gt=0.0, lt=2.0)]


def _settings_default(name: str):
    return lambda: getattr(get_settings(), name)


class RunConfig(BaseModel):
    """Options of one CLI invocation, validated before any computation."""
    model_config = ConfigDict(frozen=True)

    command: Literal["cc", "potential", "flow", "perron", "check"]
    ls: List[HalfBodies] = Field(default_factory=lambda: [2], min_length=1)
    alphas: List[Alpha] = Field(default_factory=lambda: [1.0], min_length=1)
    fmt: Literal["json", "csv"] = "csv"
    output: Optional[str] = None

    quad_order: int = Field(default_factory=_settings_default("quad_order"), ge=4, le=4096)
    rel_tol: float = Field(default_factory=_settings_default("rel_tol"), gt=0.0, lt=1.0)
    abs_tol: float = Field(default_factory=_settings_default("abs_tol"), gt=0.0, lt=1.0)
    max_step: float = Field(default_factory=_settings_default("max_step"), gt=0.0)
    max_steps: int = Field(default_factory=_settings_default("max_steps"), ge=1)
    grid: int = Field(default_factory=_settings_default("grid"), ge=2)
    workers: int = Field(default_factory=_settings_default("workers"), ge=1)
    root_tol: float = Field(default=1e-12, gt=0.0)

    @field_validator("ls", "alphas", mode="before")
    @classmethod
    def split_lists(cls, value):
        """Accept '2,3,4' as well as a list."""
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        if isinstance(value, (int, float)):
            return [value]
        return value

    @property
    def l(self) -> int:
        return self.ls[0]

    @property
    def alpha(self) -> float:
        return self.alphas[0]

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                max_step=self.max_step, max_steps=self.max_steps)

    def rule(self, beta: float):
        return gauss_jacobi_rule(self.quad_order, beta)


class SingleProblemConfig(RunConfig):
    """Commands that work on one (l, alpha) pair."""

    @model_validator(mode="after")
    def single_pair(self):
        if len(self.ls) != 1 or len(self.alphas) != 1:
            raise ValueError(f"{self.command} takes a single --l and --alpha, got {self.ls} and {self.alphas}")
        return self


def _first_line(e: Exception) -> str:
    if isinstance(e, ValidationError):
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "config"
        return f"invalid {where}: {first['msg']}"
    return str(e).splitlines()[0] if str(e) else type(e).__name__


def guarded(fn):
    """
    Map solver errors to exit codes: 1 for bad options or parameters,
    2 for numerical failures. A one-line message goes to stderr.
    """
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except (DomainError, ValidationError) as e:
            click.echo(f"Error: {_first_line(e)}", err=True)
            sys.exit(EXIT_USAGE)
        except StepFailure as e:
            last = e.samples[-1] if e.samples else None
            note = f"; last good sample at tau={last[0]!r}: {last[1]}" if last else ""
            click.echo(f"Error: {_first_line(e)}{note}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except DihedralError as e:
            click.echo(f"Error: {type(e).__name__}: {_first_line(e)}", err=True)
            sys.exit(EXIT_NUMERICAL)
        sys.exit(code or EXIT_OK)
    return wrapper


# Options shared by every command
def problem_options(fn):
    fn = click.option("--alpha", "alphas", default="1.0", show_default=True,
                      help="Homogeneity degree in (0, 2); comma list allowed for cc")(fn)
    fn = click.option("--l", "ls", default="2", show_default=True,
                      help="Half the number of bodies (>= 2); comma list allowed for cc")(fn)
    return fn


def output_options(fn):
    fn = click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
                      help="Write to this file instead of stdout")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                      show_default=True, help="Output format")(fn)
    return fn


def build(config_cls, **options):
    """Instantiate a config, dropping options left unset so defaults apply."""
    return config_cls(**{k: v for k, v in options.items() if v is not None})
