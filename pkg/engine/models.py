"""
Domain models for the dihedral 2l-body problem
"""
import math
from dataclasses import dataclass, asdict, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np


class Family(str, Enum):
    """Central configuration families (one per symmetry reflection)."""
    NGON = "2l-gon"
    PRISM = "prism"
    ANTIPRISM = "antiprism"


class ManifoldClass(str, Enum):
    """Projected energy level of a McGehee state."""
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


# Family ordering used for every serialized table
FAMILY_ORDER = (Family.NGON, Family.PRISM, Family.ANTIPRISM)


@dataclass(frozen=True)
class ProblemParams:
    """
    A fixed problem instance: 2l bodies, potential homogeneous of degree -alpha.

    Build through services.geometry.make_params so the derived constants
    are consistent.
    """
    l: int
    alpha: float
    beta: float
    c_group: float   # sum_j (2 sin(j pi/l))^-alpha
    c_sphere: float  # sum_j (sin(j pi/l))^-alpha
    d_l: int         # 1 for even l, 0 for odd l

    @property
    def n_bodies(self) -> int:
        return 2 * self.l

    @property
    def sector(self) -> float:
        """Angular period pi/l of the potential in theta."""
        return math.pi / self.l

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class SphereConfig:
    """Point on the shape sphere: longitude theta, latitude phi."""
    theta: float
    phi: float

    def to_dict(self) -> Dict:
        return {"theta": self.theta, "phi": self.phi}


@dataclass(frozen=True, eq=False)
class BodyOrbit:
    """Positions of the 2l bodies (one D_l orbit) at size rho."""
    positions: np.ndarray  # shape (2l, 3)
    rho: float

    @property
    def center_of_mass(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    def pairwise_distances(self) -> np.ndarray:
        """Condensed vector of the n(n-1)/2 mutual distances."""
        n = len(self.positions)
        i, j = np.triu_indices(n, k=1)
        return np.linalg.norm(self.positions[i] - self.positions[j], axis=1)

    def to_dict(self) -> Dict:
        return {"rho": self.rho, "positions": self.positions.tolist()}


@dataclass(frozen=True)
class McGeheeState:
    """
    Projected phase point (v, theta, phi, w1, w2).

    w1, w2 are the chart components of the tangent velocity:
    w = w1 ds/dtheta + w2 ds/dphi, so |w|^2 = w1^2 cos^2(phi) + w2^2.
    """
    v: float
    theta: float
    phi: float
    w1: float = 0.0
    w2: float = 0.0

    @property
    def sphere(self) -> SphereConfig:
        return SphereConfig(self.theta, self.phi)

    @property
    def w_norm2(self) -> float:
        return self.w1 ** 2 * math.cos(self.phi) ** 2 + self.w2 ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.v, self.theta, self.phi, self.w1, self.w2], dtype=float)

    @classmethod
    def from_array(cls, y) -> "McGeheeState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]), float(y[4]))

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class AmbientState:
    """McGehee state in R^3 coordinates: unit s, scalar v, tangent w."""
    s: np.ndarray
    v: float
    w: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.v], self.s, self.w))

    @classmethod
    def from_array(cls, y) -> "AmbientState":
        y = np.asarray(y, dtype=float)
        return cls(s=y[1:4].copy(), v=float(y[0]), w=y[4:7].copy())


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Samples of the projected flow over rescaled time tau.

    rho and t are filled by services.dynamics.lift; escape_tau is set when
    a homothetic branch leaves every bounded set in finite tau. stop_reason
    is set when the run ended before the requested tau.
    """
    taus: np.ndarray
    states: np.ndarray       # shape (n, 5): v, theta, phi, w1, w2
    energies: np.ndarray
    manifold: ManifoldClass
    rho: Optional[np.ndarray] = None
    t: Optional[np.ndarray] = None
    escape_tau: Optional[float] = None
    stop_reason: Optional[str] = None

    def __len__(self) -> int:
        return len(self.taus)

    @property
    def samples(self) -> List[Tuple[float, McGeheeState]]:
        return [(float(tau), McGeheeState.from_array(y)) for tau, y in zip(self.taus, self.states)]

    @property
    def lifted(self) -> bool:
        return self.rho is not None

    @property
    def final_state(self) -> McGeheeState:
        return McGeheeState.from_array(self.states[-1])

    def to_records(self) -> List[Dict]:
        """One flat record per sample, in output column order."""
        records = []
        for i, tau in enumerate(self.taus):
            v, theta, phi, w1, w2 = self.states[i]
            record = {
                "tau": float(tau), "v": float(v), "theta": float(theta), "phi": float(phi),
                "w1": float(w1), "w2": float(w2), "E": float(self.energies[i]),
            }
            if self.lifted:
                record["rho"] = float(self.rho[i])
                record["t"] = float(self.t[i])
            records.append(record)
        return records


@dataclass(frozen=True)
class SeriesCoefficients:
    """Coefficients b_0..b_n_max of |1 - r xi|^-alpha = sum_n b_|n| xi^n"""
    r: float
    n_max: int
    b: Tuple[float, ...]

    def __getitem__(self, n: int) -> float:
        return self.b[abs(n)]

    def to_dict(self) -> Dict:
        return {"r": self.r, "n_max": self.n_max, "b": list(self.b)}


@dataclass(frozen=True)
class CentralConfiguration:
    """One representative central configuration in the fundamental wedge."""
    family: Family
    s: SphereConfig
    u_value: float
    v_bar: float                        # sqrt(2 U), always positive here
    hessian_eigs: Tuple[float, float]   # eigenvalues of D^2 U, descending
    multiplicity: int = 0
    residual: float = 0.0               # covariant gradient norm at s

    def to_dict(self) -> Dict:
        return {
            "family": self.family.value,
            "theta": self.s.theta,
            "phi": self.s.phi,
            "u": self.u_value,
            "v_bar": self.v_bar,
            "hessian1": self.hessian_eigs[0],
            "hessian2": self.hessian_eigs[1],
            "multiplicity": self.multiplicity,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class StabilityReport:
    """Spectrum of the linearization at (v_sign * v_bar, s, 0)."""
    family: Family
    v_sign: int
    eigenvalues: Tuple[complex, ...]          # eig_dense(L), sorted
    quadratic_eigenvalues: Tuple[complex, ...]
    gammas: Tuple[float, float]               # eigenvalues of the tangent block
    dim_stable: int
    dim_unstable: int
    dim_stable_in_P: int
    dim_unstable_in_P: int
    motion: str = field(default="")           # ejection / collision

    @property
    def dims(self) -> Tuple[int, int, int, int]:
        return (self.dim_stable, self.dim_unstable, self.dim_stable_in_P, self.dim_unstable_in_P)

    def to_dict(self) -> Dict:
        return {
            "family": self.family.value,
            "v_bar_sign": self.v_sign,
            "gamma1": self.gammas[0],
            "gamma2": self.gammas[1],
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "dim_stable": self.dim_stable,
            "dim_unstable": self.dim_unstable,
            "dim_stable_in_P": self.dim_stable_in_P,
            "dim_unstable_in_P": self.dim_unstable_in_P,
            "motion": self.motion,
        }


@dataclass(frozen=True)
class AntiprismCriterion:
    """
    Existence check for the antiprism root.

    inequality_holds compares 2 * sum C_j with d_l; direct_margin is
    -f(pi/(2l), 0), whose positivity is what the root needs.
    """
    l: int
    alpha: float
    c_terms: Tuple[float, ...]
    sum_cj: float
    threshold: int
    inequality_holds: bool
    direct_margin: float
    holds: bool

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class ScanReport:
    """Grid scan of the gradient norm over the fundamental wedge."""
    grid: int
    radius: float
    min_norm_outside: float
    local_minima: Tuple[SphereConfig, ...]
    stray_zeros: Tuple[SphereConfig, ...]

    @property
    def passed(self) -> bool:
        return not self.stray_zeros and self.min_norm_outside > 0.0

    def to_dict(self) -> Dict:
        return {
            "grid": self.grid,
            "radius": self.radius,
            "min_norm_outside": self.min_norm_outside,
            "local_minima": [s.to_dict() for s in self.local_minima],
            "stray_zeros": [s.to_dict() for s in self.stray_zeros],
            "passed": self.passed,
        }


# Dimensions of stable/unstable manifolds: (W^s, W^u, W^s in P, W^u in P)
MANIFOLD_DIMS = {
    (Family.NGON, 1): (3, 2, 3, 1),
    (Family.NGON, -1): (2, 3, 1, 3),
    (Family.PRISM, 1): (3, 2, 3, 1),
    (Family.PRISM, -1): (2, 3, 1, 3),
    (Family.ANTIPRISM, 1): (2, 3, 2, 2),
    (Family.ANTIPRISM, -1): (3, 2, 2, 2),
}


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one acceptance criterion."""
    name: str
    passed: bool
    value: float
    threshold: float
    seconds: float = 0.0
    detail: str = ""

    def to_dict(self) -> Dict:
        return asdict(self)
