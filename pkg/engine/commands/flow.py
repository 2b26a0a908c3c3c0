"""
flow: integrate the projected McGehee flow from one initial state
"""
import json
import math
import logging
from pathlib import Path
from typing import Optional

import click
from pydantic import Field, model_validator

from commands.common import EXIT_OK, SingleProblemConfig, build, guarded, output_options, problem_options
from export import write_records
from models import Family, McGeheeState, Trajectory
from services.central_configs import find_antiprism, find_ngon, find_prism
from services.dynamics import homothetic, integrate, lift, lifted_positions, project_to_parabolic
from services.geometry import make_params

logger = logging.getLogger(__name__)

FLOW_COLUMNS = ["tau", "v", "theta", "phi", "w1", "w2", "E"]
LIFT_COLUMNS = FLOW_COLUMNS + ["rho", "t"]

_FINDERS = {
    Family.NGON: find_ngon,
    Family.PRISM: find_prism,
    Family.ANTIPRISM: find_antiprism,
}


class FlowConfig(SingleProblemConfig):
    v: float = 0.0
    theta: Optional[float] = None
    phi: Optional[float] = Field(default=None, gt=-math.pi / 2, lt=math.pi / 2)
    w1: float = 0.0
    w2: float = 0.0
    tau0: float = 0.0
    tau1: float = 10.0
    parabolic: bool = False
    homothetic: Optional[Family] = None
    lift: bool = False
    rho0: float = Field(default=1.0, gt=0.0)
    t0: float = 0.0
    u_cap: Optional[float] = Field(default=None, gt=0.0)
    bodies: Optional[str] = None

    @model_validator(mode="after")
    def consistent(self):
        if self.homothetic is None and (self.theta is None or self.phi is None):
            raise ValueError("flow needs --theta and --phi unless --homothetic is given")
        if self.bodies and not self.lift:
            raise ValueError("--bodies needs --lift")
        return self


def run_flow(cfg: FlowConfig) -> Trajectory:
    p = make_params(cfg.l, cfg.alpha)
    span = (cfg.tau0, cfg.tau1)
    if cfg.homothetic is not None:
        cc = _FINDERS[cfg.homothetic](p)
        v0 = math.copysign(cc.v_bar, cfg.v) if cfg.parabolic else cfg.v
        logger.info(f"Homothetic run from {cc.family.value} with v0={v0!r}")
        traj = homothetic(p, cc, v0, span, cfg.integrator())
    else:
        x0 = McGeheeState(cfg.v, cfg.theta, cfg.phi, cfg.w1, cfg.w2)
        if cfg.parabolic:
            x0 = project_to_parabolic(p, x0)
        traj = integrate(p, x0, span, cfg.integrator(), u_cap=cfg.u_cap)
    if traj.stop_reason:
        click.echo(f"Run ended at tau={traj.taus[-1]!r} ({traj.stop_reason})", err=True)
    if cfg.lift:
        traj = lift(p, traj, cfg.rho0, cfg.t0)
    return traj


def cmd_flow(cfg: FlowConfig) -> int:
    traj = run_flow(cfg)
    columns = LIFT_COLUMNS if traj.lifted else FLOW_COLUMNS
    write_records(traj.to_records(), cfg.fmt, cfg.output, columns=columns)
    if cfg.bodies:
        p = make_params(cfg.l, cfg.alpha)
        positions = lifted_positions(p, traj)
        payload = [
            {"tau": float(tau), "t": float(t), "positions": frame.tolist()}
            for tau, t, frame in zip(traj.taus, traj.t, positions)
        ]
        Path(cfg.bodies).write_text(json.dumps(payload, indent=2) + "\n")
        logger.info(f"Wrote body positions for {len(payload)} samples to {cfg.bodies}")
    return EXIT_OK


@click.command("flow")
@problem_options
@output_options
@click.option("--v", type=float, default=None, help="Radial velocity v")
@click.option("--theta", type=float, default=None)
@click.option("--phi", type=float, default=None)
@click.option("--w1", type=float, default=None)
@click.option("--w2", type=float, default=None)
@click.option("--tau0", type=float, default=None, help="Start of the tau span [default: 0]")
@click.option("--tau1", type=float, default=None, help="End of the tau span [default: 10]")
@click.option("--parabolic", is_flag=True, default=False, help="Rescale (v, w) onto the parabolic manifold")
@click.option("--homothetic", type=click.Choice([f.value for f in Family]), default=None,
              help="Frozen-shape run from this family's configuration")
@click.option("--lift", is_flag=True, default=False, help="Add rho and physical time t")
@click.option("--rho0", type=float, default=None, help="rho at tau0 for --lift [default: 1]")
@click.option("--t0", type=float, default=None, help="t at tau0 for --lift [default: 0]")
@click.option("--u-cap", type=float, default=None, help="Stop once U exceeds this value")
@click.option("--bodies", type=click.Path(dir_okay=False), default=None,
              help="Write lifted body positions as JSON")
@click.option("--rel-tol", type=float, default=None)
@click.option("--abs-tol", type=float, default=None)
@click.option("--max-step", type=float, default=None)
@guarded
def flow(**options):
    """Integrate the projected flow and write the samples."""
    return cmd_flow(build(FlowConfig, command="flow", **options))
