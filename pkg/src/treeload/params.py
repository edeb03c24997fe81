"""Model parameters and shared domain types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .specialfn import DEFAULT_POLICY, DomainError, PrecisionPolicy

__all__ = ["INFINITE", "ModelParams", "EdgeState", "validate_tau"]

# First-class marker for the unbounded-network limit of a time argument.
INFINITE = math.inf


@dataclass(frozen=True)
class ModelParams:
    """Attachment-kernel parameter and numeric policy.

    ``alpha`` in [0, 1] parameterizes the attachment weight a + q through
    alpha = 1/(1+a).  alpha = 0 is the uniform-attachment limit, alpha = 1
    the star limit.
    """

    alpha: float
    policy: PrecisionPolicy = field(default=DEFAULT_POLICY)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def attractiveness(self) -> float:
        """Initial attractiveness a = 1/alpha - 1 (alpha > 0 only)."""
        if self.alpha == 0.0:
            raise DomainError("attractiveness is infinite at alpha = 0")
        return 1.0 / self.alpha - 1.0

    @property
    def is_uniform(self) -> bool:
        return self.alpha == 0.0

    @property
    def is_star(self) -> bool:
        return self.alpha == 1.0


@dataclass(frozen=True)
class EdgeState:
    """Markov state of an edge: n = cluster size - 1, q = in-degree."""

    n: int
    q: int

    def __post_init__(self):
        if not 0 <= self.q <= self.n:
            raise DomainError(f"edge state requires 0 <= q <= n, got {self}")


def validate_tau(tau) -> None:
    """Accept a finite integer time >= 1 or INFINITE."""
    if tau is INFINITE or tau == math.inf:
        return
    if isinstance(tau, float) and not tau.is_integer():
        raise DomainError(f"tau must be an integer or INFINITE, got {tau}")
    if int(tau) < 1:
        raise DomainError(f"tau must be >= 1, got {tau}")
