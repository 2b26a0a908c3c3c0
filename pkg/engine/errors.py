"""
Exceptions and warnings raised by the dihedral solver
"""
from typing import List, Optional, Tuple


class DihedralError(Exception):
    """Base class for all solver errors"""
    pass


class DomainError(DihedralError, ValueError):
    """Argument outside the domain of an operation"""
    pass


class CollisionError(DomainError):
    """Configuration is at (or within the guard radius of) a collision"""

    def __init__(self, message: str, kind: Optional[str] = None):
        super().__init__(message)
        self.kind = kind


class BracketError(DihedralError):
    """Root finder called on an interval without a sign change"""
    pass


class ConvergenceError(DihedralError):
    """Iterative method hit its iteration cap"""
    pass


class StepFailure(DihedralError):
    """
    Integrator could not advance.

    Carries the last accepted time and every sample accepted before the
    failure, so callers can still report the partial trajectory.
    """

    def __init__(self, message: str, tau: float,
                 samples: Optional[List[Tuple[float, object]]] = None):
        super().__init__(message)
        self.tau = tau
        self.samples = samples or []


class HyperbolicityError(DihedralError):
    """Linearization has an eigenvalue on the imaginary axis"""
    pass


class QuadratureWarning(UserWarning):
    """Quadrature convergence self-check exceeded its threshold"""
    pass
