"""
potential: U and its first partials on a (theta, phi) grid
"""
import math
import logging
from typing import Dict, List, Optional

import click
import numpy as np
from pydantic import Field, model_validator

from commands.common import EXIT_OK, SingleProblemConfig, build, guarded, output_options, problem_options
from errors import CollisionError
from export import write_records
from models import ProblemParams
from services.geometry import make_params
from services.potential import COLLISION_GUARD, sphere_partials

logger = logging.getLogger(__name__)

POTENTIAL_COLUMNS = ["theta", "phi", "U", "dU_dtheta", "dU_dphi"]
# Distance kept from the poles by the default phi range
POLE_MARGIN = 1e-2


class PotentialConfig(SingleProblemConfig):
    n_theta: int = Field(default=50, ge=2)
    n_phi: int = Field(default=50, ge=2)
    theta_min: Optional[float] = None
    theta_max: Optional[float] = None
    phi_min: Optional[float] = Field(default=None, gt=-math.pi / 2, lt=math.pi / 2)
    phi_max: Optional[float] = Field(default=None, gt=-math.pi / 2, lt=math.pi / 2)
    allow_clip: bool = False

    @model_validator(mode="after")
    def ordered_ranges(self):
        for lo, hi in (("theta_min", "theta_max"), ("phi_min", "phi_max")):
            a, b = getattr(self, lo), getattr(self, hi)
            if a is not None and b is not None and a >= b:
                raise ValueError(f"{lo} must be below {hi}, got {a} >= {b}")
        return self


def grid_axes(cfg: PotentialConfig, l: int):
    """
    Theta and phi samples.

    Without explicit bounds theta takes the cell midpoints of [0, pi/l], so
    the binary-collision meridians are never hit and every theta pairs with
    pi/l - theta; phi runs over [0, pi/2 - POLE_MARGIN].
    """
    sector = math.pi / l
    if cfg.theta_min is None and cfg.theta_max is None:
        h = sector / cfg.n_theta
        thetas = (np.arange(cfg.n_theta) + 0.5) * h
    else:
        lo = 0.0 if cfg.theta_min is None else cfg.theta_min
        hi = sector if cfg.theta_max is None else cfg.theta_max
        thetas = np.linspace(lo, hi, cfg.n_theta)
    phi_lo = 0.0 if cfg.phi_min is None else cfg.phi_min
    phi_hi = math.pi / 2 - POLE_MARGIN if cfg.phi_max is None else cfg.phi_max
    return thetas, np.linspace(phi_lo, phi_hi, cfg.n_phi)


def collision_mask(l: int, tt: np.ndarray, pp: np.ndarray) -> np.ndarray:
    """Grid points within the collision guard of a binary collision"""
    offset = np.mod(tt, math.pi / l)
    offset = np.minimum(offset, math.pi / l - offset)
    sin_phi = np.sin(np.abs(pp))
    r = (1.0 - sin_phi) / (1.0 + sin_phi)
    return np.hypot(offset, 1.0 - r) <= COLLISION_GUARD


def potential_records(p: ProblemParams, cfg: PotentialConfig) -> List[Dict]:
    thetas, phis = grid_axes(cfg, p.l)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    bad = collision_mask(p.l, tt, pp)
    if bad.any():
        if not cfg.allow_clip:
            i, j = np.argwhere(bad)[0]
            raise CollisionError(
                f"Grid touches a binary collision at theta={tt[i, j]!r}, phi={pp[i, j]!r} "
                f"({int(bad.sum())} points); pass --allow-clip to drop them", kind="binary")
        logger.warning(f"Dropping {int(bad.sum())} grid points on the collision set")

    part = sphere_partials(p, tt, pp)
    rows = []
    for i, j in zip(*np.nonzero(~bad)):
        rows.append({
            "theta": float(tt[i, j]),
            "phi": float(pp[i, j]),
            "U": float(part.u[i, j]),
            "dU_dtheta": float(part.u_t[i, j]),
            "dU_dphi": float(part.u_p[i, j]),
        })
    logger.info(f"Potential grid l={p.l}, alpha={p.alpha}: {len(rows)} points")
    return rows


def cmd_potential(cfg: PotentialConfig) -> int:
    p = make_params(cfg.l, cfg.alpha)
    write_records(potential_records(p, cfg), cfg.fmt, cfg.output, columns=POTENTIAL_COLUMNS)
    return EXIT_OK


@click.command("potential")
@problem_options
@output_options
@click.option("--n-theta", type=int, default=None, help="Samples in theta [default: 50]")
@click.option("--n-phi", type=int, default=None, help="Samples in phi [default: 50]")
@click.option("--theta-min", type=float, default=None)
@click.option("--theta-max", type=float, default=None)
@click.option("--phi-min", type=float, default=None)
@click.option("--phi-max", type=float, default=None)
@click.option("--allow-clip", is_flag=True, default=False, help="Drop grid points on the collision set")
@guarded
def potential(**options):
    """Grid of U, dU/dtheta and dU/dphi from the direct sum."""
    return cmd_potential(build(PotentialConfig, command="potential", **options))
