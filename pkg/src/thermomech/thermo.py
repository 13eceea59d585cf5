"""Ideal gas and constant-heat-capacity body.

All reference constants default to 1 (entropies to 0) and the whole
library is unit-free: scenarios pick a consistent dimensionless system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import ContactChart, FundamentalEquation, LegendrePatch


@dataclass(frozen=True)
class IdealGasParams:
    """Ideal gas with fixed mole number.

    ``n0r`` is the product N0*R; ``s0``, ``t0``, ``v0`` are the total
    reference entropy, temperature and volume. ``r`` (the gas constant)
    only matters when the mole number is varied through
    :func:`gas_fundamental`.
    """

    n0r: float = 1.0
    alpha: float = 1.5
    s0: float = 0.0
    t0: float = 1.0
    v0: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        for name in ("n0r", "alpha", "t0", "v0", "r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"IdealGasParams.{name} must be positive")

    @property
    def gamma(self) -> float:
        return (self.alpha + 1.0) / self.alpha

    @property
    def moles(self) -> float:
        return self.n0r / self.r


@dataclass(frozen=True)
class BodyParams:
    nu: float
    t0: float = 1.0
    s0: float = 0.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("BodyParams.nu must be positive")
        if not self.t0 > 0:
            raise ValueError("BodyParams.t0 must be positive")


def gas_state(p: IdealGasParams, T: float, V: float) -> tuple[float, float, float]:
    """Pressure, internal energy and entropy at temperature ``T`` and volume ``V``."""
    if not (T > 0 and V > 0):
        raise DomainError(f"gas state needs T > 0 and V > 0, got T={T!r}, V={V!r}")
    P = p.n0r * T / V
    U = p.alpha * p.n0r * T
    S = p.s0 + p.n0r * math.log((T / p.t0) ** p.alpha * V / p.v0)
    return P, U, S


def gas_temperature_volume(p: IdealGasParams, U: float, S: float) -> tuple[float, float]:
    """Invert the state equations: ``(T, V)`` from internal energy and entropy."""
    if not U > 0:
        raise DomainError(f"gas internal energy must be positive, got {U!r}")
    T = U / (p.alpha * p.n0r)
    V = p.v0 * math.exp((S - p.s0) / p.n0r) * (p.t0 / T) ** p.alpha
    return T, V


def gas_adiabat_constant(p: IdealGasParams, P: float, V: float) -> float:
    """``P * V**gamma``; constant along isoentropic processes."""
    if not (P > 0 and V > 0):
        raise DomainError(f"adiabat constant needs P > 0 and V > 0, got P={P!r}, V={V!r}")
    return P * V ** p.gamma


def body_state(p: BodyParams, T: float) -> tuple[float, float]:
    if not T > 0:
        raise DomainError(f"body temperature must be positive, got {T!r}")
    return p.nu * T, p.s0 + p.nu * math.log(T / p.t0)


def gas_fundamental(p: IdealGasParams, N: float, S: float, V: float) -> float:
    """Internal energy ``U(N, S, V)`` of the ideal gas with variable mole number.

    Per-mole constants are derived from the totals in ``p`` at
    ``N0 = n0r / r``; ``u0 = r * alpha * t0``.
    """
    if not (N > 0 and V > 0):
        raise DomainError(f"gas fundamental equation needs N > 0 and V > 0, got N={N!r}, V={V!r}")
    R = p.r
    n0 = p.moles
    s0m, v0m = p.s0 / n0, p.v0 / n0
    u0 = R * p.alpha * p.t0
    return N * u0 * (N * v0m * math.exp((S - N * s0m) / (N * R)) / V) ** (1.0 / p.alpha)


def gas_chemical_potential(p: IdealGasParams, N: float, S: float, V: float) -> float:
    U = gas_fundamental(p, N, S, V)
    return U / N * (1.0 + (1.0 - S / (N * p.r)) / p.alpha)


# -- charts and Legendre patches ------------------------------------------------

def gas_chart() -> ContactChart:
    """``(P, T, V, S, U)`` with contact form ``dU - T dS + P dV``."""
    return ContactChart.simple([("P", "V")])


def body_chart() -> ContactChart:
    """``(T, S, U)`` with contact form ``dU - T dS``."""
    return ContactChart.simple([])


def gas_fundamental_equation(p: IdealGasParams) -> FundamentalEquation:
    """``U(V, S)`` at the fixed mole number of ``p``."""
    n0 = p.moles

    def phi(y, S):
        return gas_fundamental(p, n0, S, y[0])

    def gradient(y, S):
        U = phi(y, S)
        return np.array([-U / (p.alpha * y[0])]), U / (p.alpha * p.n0r)

    return FundamentalEquation(phi, 1, gradient, domain=lambda y, S: y[0] > 0)


def body_fundamental_equation(p: BodyParams) -> FundamentalEquation:
    def phi(y, S):
        return p.nu * p.t0 * math.exp((S - p.s0) / p.nu)

    def gradient(y, S):
        return np.zeros(0), phi(y, S) / p.nu

    return FundamentalEquation(phi, 0, gradient)


def gas_patch(p: IdealGasParams, analytic: bool = True) -> LegendrePatch:
    return LegendrePatch.from_fundamental(gas_chart(), gas_fundamental_equation(p), analytic)


def body_patch(p: BodyParams, analytic: bool = True) -> LegendrePatch:
    return LegendrePatch.from_fundamental(body_chart(), body_fundamental_equation(p), analytic)
