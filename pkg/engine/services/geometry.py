"""
Problem parameters, shape-sphere charts and the dihedral group action
"""
import math
import logging
from typing import Dict, Optional, Tuple

import numpy as np

from errors import DomainError
from models import BodyOrbit, Family, ProblemParams, SphereConfig

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2


def make_params(l: int, alpha: float) -> ProblemParams:
    """
    Build a problem instance with its derived constants.

    Args:
        l: Half the number of bodies (l >= 2)
        alpha: Homogeneity degree of the potential, 0 < alpha < 2

    Returns:
        ProblemParams with c_group, c_sphere and d_l filled in
    """
    if isinstance(l, bool) or int(l) != l or l < 2:
        raise DomainError(f"l must be an integer >= 2, got {l!r}")
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha!r}")

    l = int(l)
    alpha = float(alpha)
    sines = np.sin(np.arange(1, l) * math.pi / l)
    c_group = float(np.sum((2.0 * sines) ** -alpha))
    c_sphere = float(np.sum(sines ** -alpha))
    return ProblemParams(
        l=l,
        alpha=alpha,
        beta=alpha / 2.0,
        c_group=c_group,
        c_sphere=c_sphere,
        d_l=1 if l % 2 == 0 else 0,
    )


def sphere_to_cartesian(s: SphereConfig) -> Tuple[float, float, float]:
    """(Re z, Im z, y) of a sphere point"""
    c = math.cos(s.phi)
    return (c * math.cos(s.theta), c * math.sin(s.theta), math.sin(s.phi))


def unit_vector(theta: float, phi: float) -> np.ndarray:
    return np.array(sphere_to_cartesian(SphereConfig(theta, phi)))


def cartesian_to_sphere(q) -> SphereConfig:
    """Sphere chart of the direction of a nonzero vector."""
    q = np.asarray(q, dtype=float)
    norm = float(np.linalg.norm(q))
    if norm == 0.0:
        raise DomainError("Cannot project the zero vector onto the sphere")
    x, y, z = q / norm
    theta = math.atan2(y, x) % (2 * math.pi)
    return SphereConfig(theta=theta, phi=math.asin(max(-1.0, min(1.0, z))))


def r_of_phi(phi: float) -> float:
    """Modulus r = (1 - sin phi) / (1 + sin phi) of the (r, xi) chart, for 0 <= phi < pi/2"""
    if not 0.0 <= phi < HALF_PI:
        raise DomainError(f"r_of_phi needs 0 <= phi < pi/2, got {phi!r} (reflect negative phi first)")
    sin_phi = math.sin(phi)
    return (1.0 - sin_phi) / (1.0 + sin_phi)


def phi_of_r(r: float) -> float:
    """Inverse of r_of_phi: sin phi = (1 - r) / (1 + r)"""
    if not 0.0 < r <= 1.0:
        raise DomainError(f"phi_of_r needs 0 < r <= 1, got {r!r}")
    return math.asin((1.0 - r) / (1.0 + r))


def group_matrices(l: int) -> np.ndarray:
    """
    The 2l elements of D_l as 3x3 orthogonal matrices.

    Ordered as the rotations zeta^j (j = 0..l-1) followed by zeta^j kappa,
    where kappa is the half-turn about the first axis.
    """
    mats = []
    kappa = np.diag([1.0, -1.0, -1.0])
    rotations = []
    for j in range(l):
        angle = 2.0 * math.pi * j / l
        c, s = math.cos(angle), math.sin(angle)
        rotations.append(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))
    mats.extend(rotations)
    mats.extend(rot @ kappa for rot in rotations)
    return np.array(mats)


def dihedral_orbit(s: SphereConfig, rho: float, l: int) -> BodyOrbit:
    """Positions rho * g s of the 2l bodies, g running over group_matrices(l)."""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    q = unit_vector(s.theta, s.phi)
    positions = rho * np.einsum("gij,j->gi", group_matrices(l), q)
    return BodyOrbit(positions=positions, rho=float(rho))


def theta_offset(theta: float, l: int) -> float:
    """Distance from theta to the nearest multiple of pi/l."""
    sector = math.pi / l
    t = theta % sector
    return min(t, sector - t)


def canonicalize(s: SphereConfig, l: int) -> SphereConfig:
    """Representative of s in the wedge 0 <= theta <= pi/(2l), phi >= 0."""
    sector = math.pi / l
    theta = s.theta % sector
    if theta > sector / 2:
        theta = sector - theta
    return SphereConfig(theta=theta, phi=abs(s.phi))


def symmetry_images(s: SphereConfig, l: int) -> Dict[str, SphereConfig]:
    """Images of s under the reflections h_phi, h_theta, h'_theta and the rotation zeta_l."""
    return {
        "h_phi": SphereConfig(s.theta, -s.phi),
        "h_theta": SphereConfig(-s.theta, s.phi),
        "h_theta_prime": SphereConfig(math.pi / l - s.theta, s.phi),
        "zeta": SphereConfig(s.theta + 2.0 * math.pi / l, s.phi),
    }


def collision_kind(s: SphereConfig, l: int, guard: float = 0.0) -> Optional[str]:
    """
    Classify s against the singular set.

    Returns "l-adic" at (or within `guard` of) a pole, "binary" when the
    point is within `guard` of phi = 0, theta = 0 mod pi/l (measured in
    (theta mod pi/l, 1 - r)), otherwise None.
    """
    if HALF_PI - abs(s.phi) <= guard:
        return "l-adic"
    r = r_of_phi(abs(s.phi))
    if math.hypot(theta_offset(s.theta, l), 1.0 - r) <= guard:
        return "binary"
    return None


def orbit_potential(orbit: BodyOrbit, alpha: float) -> float:
    """
    Physical potential sum_{i<j} m_i m_j |q_i - q_j|^-alpha with m_i^2 = 1/l.

    Equals rho^-alpha * U(s) for a dihedral orbit.
    """
    l = len(orbit.positions) // 2
    distances = orbit.pairwise_distances()
    if np.any(distances == 0.0):
        raise DomainError("Orbit has coincident bodies")
    return float(np.sum(distances ** -alpha)) / l


def multiplicity(family: Family, l: int) -> int:
    """Number of central configurations of a family on the whole sphere."""
    counts = {Family.NGON: 2 * l, Family.PRISM: 4 * l, Family.ANTIPRISM: 2 * l}
    return counts[Family(family)]
