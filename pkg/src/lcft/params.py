"""Coupling parameters of the Liouville theory.

Everything downstream is parametrized by the coupling gamma in (0, 2) and the
cosmological constant mu > 0.  The background charge Q = gamma/2 + 2/gamma and
the central charge c_L = 1 + 6 Q^2 are derived quantities; for gamma in (0, 2)
one always has Q > 2 and c_L > 25.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError


@dataclass(frozen=True)
class CftParams:
    """Liouville coupling data (gamma, mu) with derived Q and c_L."""

    gamma: float
    mu: float = 1.0
    Q: float = field(init=False)
    c_L: float = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 2.0:
            raise ValidationError(f"gamma must lie in (0, 2), got {self.gamma}")
        if not self.mu > 0.0:
            raise ValidationError(f"mu must be positive, got {self.mu}")
        object.__setattr__(self, "Q", self.gamma / 2.0 + 2.0 / self.gamma)
        object.__setattr__(self, "c_L", 1.0 + 6.0 * self.Q**2)
