"""Physical constants and the dimensionless scaling used throughout.

All arithmetic is plain double precision; the default system is natural
units (m = c = hbar = 1), in which the inverse Compton length ``mu`` is 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, speed of light and action quantum, plus ``mu = m c / hbar``."""

    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0
    mu: float = field(init=False)

    def __post_init__(self):
        for name in ("m", "c", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")
        object.__setattr__(self, "mu", self.m * self.c / self.hbar)

    def to_dict(self) -> dict:
        return {"mass": self.m, "speed_of_light": self.c, "hbar": self.hbar}


NATURAL = PhysicalParams()


def make_params(m: float = 1.0, c: float = 1.0, hbar: float = 1.0) -> PhysicalParams:
    return PhysicalParams(float(m), float(c), float(hbar))


def natural_units() -> PhysicalParams:
    return NATURAL


@dataclass(frozen=True)
class ScalingParams:
    """Characteristic length ``L``, time ``t0`` and relativity parameter ``epsilon``.

    ``t0`` is tied to ``L`` by ``(hbar / 2m) * t0 / L**2 == 1`` so that the
    free equation reads ``psi' - i lap(psi) = -i epsilon psi''`` in the scaled
    variables, with ``epsilon = (2 mu L)**-2``.
    """

    params: PhysicalParams
    L: float
    t0: float
    epsilon: float

    def constraint(self) -> float:
        p = self.params
        return (p.hbar / (2.0 * p.m)) * self.t0 / self.L**2


def make_scaling(params: PhysicalParams, L: float) -> ScalingParams:
    L = float(L)
    if not (math.isfinite(L) and L > 0):
        raise DomainError(f"characteristic length must be finite and > 0, got {L!r}")
    t0 = 2.0 * params.m * L * L / params.hbar
    epsilon = 1.0 / (2.0 * params.mu * L) ** 2
    return ScalingParams(params=params, L=L, t0=t0, epsilon=epsilon)
