from __future__ import annotations

import dataclasses
from dataclasses import dataclass


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Masses, coupling, GUP parameter and elapsed time (hbar = 1).

    ``b`` and ``a`` are properties so they can never go stale.
    """

    m1: float = 1.0
    m2: float = 1.0
    m3: float = 1.0
    kappa: float = 1.0
    beta: float = 0.0
    T: float = 1.0

    def __post_init__(self):
        for name in ("m1", "m2", "m3"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.T > 0:
            raise ParameterError(f"T must be positive, got {self.T}")
        if not self.beta >= 0:
            raise ParameterError(f"beta must be non-negative, got {self.beta}")

    @property
    def b(self) -> float:
        return self.m2 * self.m3 * self.kappa**2 - 1.0

    def a(self, t: float | None = None) -> float:
        t = self.T if t is None else t
        return 12.0 * self.m3 + self.m1 * self.kappa**2 * t**2

    @property
    def masses(self) -> tuple[float, float, float]:
        return (self.m1, self.m2, self.m3)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)
