"""Closed-form and quadrature reference solutions.

These are written from the equations of motion alone and share no code
with the integrators or the SOCS checker they are used to test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, ResonanceError, TurningPointError
from .scenarios import DissipativePiston, DissipativePistonBath, PistonAdiabatic, adiabat_constant

RESONANCE_GAP = 1e-9
TURNING_POINT_V2 = 1e-8


@dataclass(frozen=True)
class OracleCurve:
    eval: Callable[[float], np.ndarray]
    window: tuple[float, float]
    provenance: str

    def __call__(self, t: float) -> np.ndarray:
        lo, hi = self.window
        if not lo <= t <= hi:
            raise DomainError(f"t={t!r} outside the oracle window {self.window}")
        return self.eval(t)


# -- wagon ------------------------------------------------------------------------

def wagon_position(m, mu, x0, v0, t):
    """Position under linear friction ``m x'' = -mu x'``."""
    return x0 + v0 * m / mu * (1.0 - np.exp(-mu * t / m))


def wagon_velocity(m, mu, v0, t):
    return v0 * np.exp(-mu * t / m)


def wagon_temperature_adiabatic(m, mu, nu, v0, T_init, t):
    """Temperature of the isolated wagon: all kinetic energy ends up as heat."""
    return T_init + m * v0 ** 2 / (2.0 * nu) * (1.0 - np.exp(-2.0 * mu * t / m))


def wagon_temperature_bath(m, mu, nu, kappa, Tb, v0, T_init, t):
    """Temperature of the wagon exchanging heat ``kappa (Tb - T)`` with a bath.

    ``T = Tb + C1 exp(-kappa t / nu) + C2 exp(-2 mu t / m)`` with
    ``C2 = mu v0**2 / (nu (kappa/nu - 2 mu/m))`` and ``C1`` from ``T(0)``.
    Raises :class:`ResonanceError` when the two rates coincide.
    """
    gap = kappa / nu - 2.0 * mu / m
    if abs(gap) <= RESONANCE_GAP:
        raise ResonanceError("kappa/nu equals 2 mu/m: the closed form degenerates, "
                             "integrate the ODE instead")
    c2 = mu * v0 ** 2 / (nu * gap)
    c1 = T_init - Tb - c2
    return Tb + c1 * np.exp(-kappa * t / nu) + c2 * np.exp(-2.0 * mu * t / m)


def wagon_temperature_bath_uncorrected(m, mu, nu, kappa, Tb, v0, T_init, t):
    """The two-exponential form carrying the insulated wagon's coefficient ``m v0**2 / (2 nu)``.

    Solves the bath ODE only at ``kappa = 0``; kept as a negative control.
    """
    c = m * v0 ** 2 / (2.0 * nu)
    return -(Tb - T_init - c) * np.exp(-kappa * t / nu) - c * np.exp(-2.0 * mu * t / m) + Tb


def wagon_bath_residual(temperature, m, mu, nu, kappa, Tb, v0, T_init, t, h=1e-3):
    """``nu T' - mu x'**2 + kappa (T - Tb)`` for a temperature law ``temperature(..., t)``.

    ``T'`` by a six-point Richardson-extrapolated central difference.
    """
    f = lambda s: temperature(m, mu, nu, kappa, Tb, v0, T_init, s)
    T_dot = (-f(t + 3 * h) + 9 * f(t + 2 * h) - 45 * f(t + h)
             + 45 * f(t - h) - 9 * f(t - 2 * h) + f(t - 3 * h)) / (-60 * h)
    v = wagon_velocity(m, mu, v0, t)
    return nu * T_dot - mu * v ** 2 + kappa * (f(t) - Tb)


def wagon_curve(m, mu, nu, x0, v0, T_init, t_end) -> OracleCurve:
    def ev(t):
        return np.array([wagon_position(m, mu, x0, v0, t), wagon_velocity(m, mu, v0, t),
                         wagon_temperature_adiabatic(m, mu, nu, v0, T_init, t)])

    return OracleCurve(ev, (0.0, t_end), "linear friction; energy balance nu T' = mu x'^2")


# -- adiabatic piston ---------------------------------------------------------------

def piston_hamiltonian(cfg: PistonAdiabatic, q: float, p: float) -> float:
    """``p**2/2m + m g q + alpha k A**(1-gamma) q**(1-gamma)``."""
    if not q > 0:
        raise DomainError(f"piston height must be positive, got {q!r}")
    gas = cfg.gas
    k = adiabat_constant(cfg)
    return (p * p / (2.0 * cfg.m) + cfg.m * cfg.g * q
            + gas.alpha * k * cfg.A ** (1.0 - gas.gamma) * q ** (1.0 - gas.gamma))


def piston_force(cfg: PistonAdiabatic, q: float) -> float:
    """Net force ``-dH/dq`` at rest."""
    gamma = cfg.gas.gamma
    k = adiabat_constant(cfg)
    return -cfg.m * cfg.g + k * cfg.A ** (1.0 - gamma) * q ** (-gamma)


def piston_equilibrium(cfg: PistonAdiabatic) -> float:
    """Height where gravity balances the pressure force."""
    gamma = cfg.gas.gamma
    k = adiabat_constant(cfg)
    return (k * cfg.A ** (1.0 - gamma) / (cfg.m * cfg.g)) ** (1.0 / gamma)


def piston_small_oscillation_period(cfg: PistonAdiabatic) -> float:
    gamma = cfg.gas.gamma
    k = adiabat_constant(cfg)
    xs = piston_equilibrium(cfg)
    stiffness = gamma * k * cfg.A ** (1.0 - gamma) * xs ** (-gamma - 1.0) / cfg.m
    return 2.0 * math.pi / math.sqrt(stiffness)


def _adaptive_simpson(f, a, b, tol, max_depth=60):
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2, depth + 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2, depth + 1))

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


def piston_quadrature_time(cfg: PistonAdiabatic, x_target: float, sigma: int | None = None,
                           tol: float = 1e-10) -> float:
    """Time for the adiabatic piston to travel from ``x0`` to ``x_target``.

    Integrates ``ds / |v(s)|`` with ``v(s)**2 = 2 (H - V(s)) / m`` along the
    branch of direction ``sigma`` (sign of ``v0``, or of the net force when
    starting at rest). The substitution ``s = x0 + sigma u**2`` removes the
    inverse square root singularity of a start at a turning point. Raises
    :class:`TurningPointError` when the speed vanishes before ``x_target``.
    """
    m, x0, v0 = cfg.m, cfg.x0, cfg.v0
    if sigma is None:
        if v0 != 0:
            sigma = 1 if v0 > 0 else -1
        else:
            sigma = 1 if piston_force(cfg, x0) > 0 else -1
    if x_target == x0:
        return 0.0
    if (x_target - x0) * sigma < 0:
        raise TurningPointError(f"x_target={x_target!r} is not ahead of x0 along sigma={sigma}")
    if not x_target > 0:
        raise DomainError("x_target must be positive")

    gamma = cfg.gas.gamma
    c = cfg.gas.alpha * adiabat_constant(cfg) * cfg.A ** (1.0 - gamma)

    def speed2(d):
        # v**2 at s = x0 + d; V(x0) - V(s) written without cancellation for small d
        drop = -m * cfg.g * d - c * x0 ** (1.0 - gamma) * math.expm1(
            (1.0 - gamma) * math.log1p(d / x0))
        return v0 * v0 + 2.0 * drop / m

    u_end = math.sqrt(abs(x_target - x0))
    # reject if the speed vanishes anywhere on the path
    probe = sigma * np.linspace(0.0, u_end, 257)[1:] ** 2
    if speed2(x_target - x0) < TURNING_POINT_V2 or min(speed2(d) for d in probe) <= 0:
        raise TurningPointError(f"turning point between x0={x0!r} and x_target={x_target!r}")

    def integrand(u):
        if u == 0.0:
            if v0 != 0:
                return 0.0
            # v**2 ~ 2 |a0| u**2 near a start from rest
            return 2.0 / math.sqrt(2.0 * abs(piston_force(cfg, x0)) / m)
        return 2.0 * u / math.sqrt(speed2(sigma * u * u))

    return _adaptive_simpson(integrand, 0.0, u_end, tol)


# -- dissipative piston -------------------------------------------------------------

def dissipative_total_energy(cfg: DissipativePiston) -> float:
    gas = cfg.gas
    return (0.5 * cfg.m * cfg.v0 ** 2 + cfg.m * cfg.g * cfg.x0
            + gas.alpha * gas.n0r * cfg.T_init + cfg.body.nu * cfg.Tc_init)


def dissipative_steady_state(cfg: DissipativePiston) -> tuple[float, float]:
    """``(x_inf, T_inf)`` of the isolated dissipative piston.

    At rest with equal temperatures: ``m g x = n0r T`` and energy
    ``m g x + alpha n0r T + nu T = E(0)``.
    """
    if isinstance(cfg, DissipativePistonBath):
        raise TypeError("steady state is defined for the isolated piston only")
    gas = cfg.gas
    T_inf = dissipative_total_energy(cfg) / (gas.n0r * (1.0 + gas.alpha) + cfg.body.nu)
    return gas.n0r * T_inf / (cfg.m * cfg.g), T_inf
