"""Builders for the six thermo-mechanical scenarios.

Each builder returns a :class:`Scenario`: the SOCS on the full
configuration space, an explicit reduced ODE for integration, the map from
a reduced state to the full coordinate vector ``q`` and the initial
reduced state.

Coordinate orders (mechanical coordinate first, then chart order):

* wagons: ``(x, T, S, U)``
* pistons: ``(x, P, T, V, S, U)``
* dissipative pistons: ``(x, P, T, V, S, U, T_c, S_c, U_c)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ode import ReducedODE
from .socs import (KinematicConstraints, SecondLawPolicy, SOCSystem, VariationalConstraints,
                   holonomic_embed)
from .thermo import BodyParams, IdealGasParams, body_state, gas_state

__all__ = [
    "AreaModel", "WagonAdiabatic", "WagonBath", "PistonAdiabatic", "PistonIsothermal",
    "DissipativePiston", "DissipativePistonBath", "Scenario", "ReducedODE", "SCENARIO_NAMES",
    "build", "build_wagon_adiabatic", "build_wagon_bath", "build_piston_adiabatic",
    "build_piston_adiabatic_holonomic", "build_piston_isothermal", "build_dissipative_piston",
    "build_dissipative_piston_bath", "adiabat_constant",
]

WAGON_COORDS = ("x", "T", "S", "U")
PISTON_COORDS = ("x", "P", "T", "V", "S", "U")
DISSIPATIVE_COORDS = PISTON_COORDS + ("T_c", "S_c", "U_c")


def _positive(cfg, *names):
    for name in names:
        value = getattr(cfg, name)
        if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
            raise ValueError(f"{type(cfg).__name__}.{name} must be positive, got {value!r}")


def _non_negative(cfg, *names):
    for name in names:
        value = getattr(cfg, name)
        if not (isinstance(value, (int, float)) and value >= 0 and math.isfinite(value)):
            raise ValueError(f"{type(cfg).__name__}.{name} must be non-negative, got {value!r}")


@dataclass(frozen=True)
class AreaModel:
    """Heat-exchange area ``a0 + a1 * x``."""

    a0: float = 1.0
    a1: float = 0.0

    def __call__(self, x: float) -> float:
        return self.a0 + self.a1 * x


# -- configurations ---------------------------------------------------------------

@dataclass(frozen=True, kw_only=True)
class WagonAdiabatic:
    m: float
    mu: float
    body: BodyParams
    x0: float = 0.0
    v0: float = 0.0
    T_init: float

    def __post_init__(self):
        _positive(self, "m", "T_init")
        _non_negative(self, "mu")


@dataclass(frozen=True, kw_only=True)
class WagonBath(WagonAdiabatic):
    kappa: float
    Tb: float

    def __post_init__(self):
        super().__post_init__()
        _non_negative(self, "kappa")
        _positive(self, "Tb")


@dataclass(frozen=True, kw_only=True)
class PistonAdiabatic:
    m: float
    g: float
    A: float
    gas: IdealGasParams = field(default_factory=IdealGasParams)
    x0: float
    v0: float = 0.0
    T_init: float

    def __post_init__(self):
        _positive(self, "m", "g", "A", "x0", "T_init")


@dataclass(frozen=True, kw_only=True)
class PistonIsothermal(PistonAdiabatic):
    """Piston in contact with a reservoir held at ``T_init``.

    ``potential`` selects the Lagrangian: ``"internal-energy"`` uses
    ``L_mec - U``; ``"helmholtz"`` uses ``L_mec - U + T S``.
    """

    potential: str = "internal-energy"

    def __post_init__(self):
        super().__post_init__()
        if self.potential not in ("internal-energy", "helmholtz"):
            raise ValueError(f"unknown potential {self.potential!r}")


@dataclass(frozen=True, kw_only=True)
class DissipativePiston:
    """Piston with friction ``mu`` whose container (heat capacity ``body.nu``)
    exchanges heat with the gas through ``kappa * area(x)``."""

    m: float
    g: float
    A: float = 1.0
    gas: IdealGasParams = field(default_factory=IdealGasParams)
    body: BodyParams
    mu: float
    kappa: float
    area: AreaModel = field(default_factory=AreaModel)
    x0: float
    v0: float = 0.0
    T_init: float
    Tc_init: float

    def __post_init__(self):
        _positive(self, "m", "g", "A", "x0", "T_init", "Tc_init")
        _non_negative(self, "mu", "kappa")


@dataclass(frozen=True, kw_only=True)
class DissipativePistonBath(DissipativePiston):
    """Dissipative piston whose container also exchanges heat with a bath.

    ``kappa`` and ``area`` describe the gas-container contact;
    ``kappa_e`` and ``area_e`` the container-bath contact.
    """

    kappa_e: float
    area_e: float = 1.0
    Tb: float

    def __post_init__(self):
        super().__post_init__()
        _non_negative(self, "kappa_e")
        _positive(self, "area_e", "Tb")


@dataclass(frozen=True)
class Scenario:
    name: str
    config: object
    system: SOCSystem
    ode: ReducedODE
    reconstruction: Callable[[np.ndarray], np.ndarray]
    initial: np.ndarray

    @property
    def coordinate_names(self) -> tuple[str, ...]:
        return self.system.coordinate_names


# -- wagon ------------------------------------------------------------------------

def _wagon_system(cfg: WagonAdiabatic, kappa: float = 0.0, Tb: float = 1.0) -> SOCSystem:
    m, mu, body = cfg.m, cfg.mu, cfg.body

    def w(jet):
        x, T, S, U = jet.q
        return np.array([
            U - body.nu * T,
            S - body.s0 - body.nu * math.log(T / body.t0),
            m * jet.qddot[0] * jet.qdot[0] + jet.qdot[3] - kappa * (Tb - T),
        ])

    def vmat(q, qdot):
        T = q[1]
        return np.array([
            [0.0, -body.nu, 0.0, 1.0],
            [0.0, -body.nu / T, 1.0, 0.0],
            [mu * qdot[0], 0.0, 0.0, -1.0],
        ])

    return SOCSystem.thermo_mechanical(
        n=4, mech_dim=1,
        l_mec=lambda qm, vm: 0.5 * m * vm[0] ** 2,
        mech_energy=lambda qm, vm: 0.5 * m * vm[0] ** 2,
        internal_energy=lambda qt: qt[2],
        ck=KinematicConstraints(w, ("state_U", "state_S", "energy")),
        cv=VariationalConstraints(vmat),
        heat_form=(lambda q, qdot: kappa * (Tb - q[1])) if kappa else (lambda q, qdot: 0.0),
        second_law=SecondLawPolicy((2,), 1),
        coordinate_names=WAGON_COORDS,
        force_map=lambda q, qdot: np.array([-mu * qdot[0], 0.0, 0.0, 1.0]),
    )


def _wagon_reconstruction(body: BodyParams):
    def recon(state):
        x, _, T = state
        U, S = body_state(body, T)
        return np.array([x, T, S, U])

    return recon


def _wagon_ode(cfg: WagonAdiabatic, kappa: float = 0.0, Tb: float = 1.0) -> ReducedODE:
    m, mu, nu = cfg.m, cfg.mu, cfg.body.nu

    def rhs(t, s):
        _, v, T = s
        return np.array([v, -mu * v / m, (mu * v * v - kappa * (T - Tb)) / nu])

    return ReducedODE(3, rhs, ("x", "v", "T"), (("T>0", lambda s: s[2] > 0),), (1,))


def build_wagon_adiabatic(cfg: WagonAdiabatic) -> Scenario:
    initial = np.array([cfg.x0, cfg.v0, cfg.T_init], dtype=float)
    return Scenario("wagon-adiabatic", cfg, _wagon_system(cfg), _wagon_ode(cfg),
                    _wagon_reconstruction(cfg.body), initial)


def build_wagon_bath(cfg: WagonBath) -> Scenario:
    initial = np.array([cfg.x0, cfg.v0, cfg.T_init], dtype=float)
    return Scenario("wagon-bath", cfg, _wagon_system(cfg, cfg.kappa, cfg.Tb),
                    _wagon_ode(cfg, cfg.kappa, cfg.Tb), _wagon_reconstruction(cfg.body), initial)


# -- pistons ----------------------------------------------------------------------

def adiabat_constant(cfg: PistonAdiabatic) -> float:
    """``k = P V**gamma`` of the initial gas state."""
    V0 = cfg.A * cfg.x0
    P0 = cfg.gas.n0r * cfg.T_init / V0
    return P0 * V0 ** cfg.gas.gamma


def _piston_l_mec(m, g):
    return lambda qm, vm: 0.5 * m * vm[0] ** 2 - m * g * qm[0]


def _piston_e_mec(m, g):
    return lambda qm, vm: 0.5 * m * vm[0] ** 2 + m * g * qm[0]


def _gas_rows(gas: IdealGasParams, A: float, q, n: int) -> list[np.ndarray]:
    """Linearized gas law, energy law and ``A dx = dV`` as rows over ``n`` coordinates."""
    _, P, T, V = q[:4]
    r1 = np.zeros(n)
    r1[[1, 2, 3]] = V, -gas.n0r, P
    r2 = np.zeros(n)
    r2[[2, 5]] = -gas.alpha * gas.n0r, 1.0
    r3 = np.zeros(n)
    r3[[0, 3]] = A, -1.0
    return [r1, r2, r3]


def _gas_entropy_row(gas: IdealGasParams, q, n: int) -> np.ndarray:
    # dS = n0r (dV/V + alpha dT/T)
    T, V = q[2], q[3]
    row = np.zeros(n)
    row[[2, 3, 4]] = -gas.n0r * gas.alpha / T, -gas.n0r / V, 1.0
    return row


def _gas_state_residuals(gas: IdealGasParams, A: float, q) -> list[float]:
    x, P, T, V, _, U = q[:6]
    return [P * V - gas.n0r * T, U - gas.alpha * gas.n0r * T, A * x - V]


def _gas_entropy(gas: IdealGasParams, T, V) -> float:
    return gas.s0 + gas.n0r * math.log((T / gas.t0) ** gas.alpha * V / gas.v0)


def _piston_guard():
    return (("x>0", lambda s: s[0] > 0),)


def _piston_adiabatic_equations(cfg: PistonAdiabatic):
    gas, A = cfg.gas, cfg.A
    k = adiabat_constant(cfg)
    S0 = gas_state(gas, cfg.T_init, A * cfg.x0)[2]

    def phi(q):
        P, V, S = q[1], q[3], q[4]
        return np.array(_gas_state_residuals(gas, A, q) + [S - S0, P * V ** gas.gamma - k])

    return phi, k, S0


def build_piston_adiabatic(cfg: PistonAdiabatic) -> Scenario:
    m, g, A, gas = cfg.m, cfg.g, cfg.A, cfg.gas
    phi, k, S0 = _piston_adiabatic_equations(cfg)
    gamma = gas.gamma

    def vmat(q, qdot):
        P, V = q[1], q[3]
        r4 = np.zeros(6)
        r4[4] = 1.0
        r5 = np.zeros(6)
        r5[[1, 3]] = V ** gamma, gamma * P * V ** (gamma - 1.0)
        return np.array(_gas_rows(gas, A, q, 6) + [r4, r5])

    system = SOCSystem.thermo_mechanical(
        n=6, mech_dim=1, l_mec=_piston_l_mec(m, g), mech_energy=_piston_e_mec(m, g),
        internal_energy=lambda qt: qt[4],
        ck=KinematicConstraints(lambda jet: phi(jet.q),
                                ("gas_law", "energy_law", "volume", "entropy", "adiabat")),
        cv=VariationalConstraints(vmat),
        second_law=SecondLawPolicy((4,), 2),
        coordinate_names=PISTON_COORDS,
        force_map=lambda q, qdot: np.array([q[1] * A, 0.0, 0.0, 0.0, 0.0, 1.0]),
    )
    c = k * A ** (1.0 - gamma) / m

    def rhs(t, s):
        x, v = s
        return np.array([v, -g + c * x ** (-gamma)])

    def recon(state):
        x = state[0]
        V = A * x
        P = k * V ** (-gamma)
        T = P * V / gas.n0r
        return np.array([x, P, T, V, S0, gas.alpha * gas.n0r * T])

    ode = ReducedODE(2, rhs, ("x", "v"), _piston_guard(), (1,))
    return Scenario("piston-adiabatic", cfg, system, ode, recon,
                    np.array([cfg.x0, cfg.v0], dtype=float))


def build_piston_adiabatic_holonomic(cfg: PistonAdiabatic) -> SOCSystem:
    """The adiabatic piston as a holonomic system on the constraint submanifold."""
    m, g = cfg.m, cfg.g
    phi, _, _ = _piston_adiabatic_equations(cfg)

    def L(q, qdot):
        return 0.5 * m * qdot[0] ** 2 - m * g * q[0] - q[5]

    return holonomic_embed(L, phi, 6, PISTON_COORDS)


def build_piston_isothermal(cfg: PistonIsothermal) -> Scenario:
    m, g, A, gas = cfg.m, cfg.g, cfg.A, cfg.gas
    T_iso = cfg.T_init
    helmholtz = cfg.potential == "helmholtz"

    def state_residuals(q):
        T, V, S = q[2], q[3], q[4]
        return _gas_state_residuals(gas, A, q) + [S - _gas_entropy(gas, T, V), T - T_iso]

    def w(jet):
        res = state_residuals(jet.q)
        if not helmholtz:
            x_dot, x_ddot = jet.qdot[0], jet.qddot[0]
            T = jet.q[2]
            res.append(m * x_ddot * x_dot + m * g * x_dot + jet.qdot[5] - T * jet.qdot[4])
        return np.array(res)

    def vmat(q, qdot):
        rows = _gas_rows(gas, A, q, 6) + [_gas_entropy_row(gas, q, 6)]
        dT = np.zeros(6)
        dT[2] = 1.0
        rows.append(dT)
        if not helmholtz:
            # -P A dx = dU
            work = np.zeros(6)
            work[[0, 5]] = q[1] * A, 1.0
            rows.append(work)
        return np.array(rows)

    l_mec = _piston_l_mec(m, g)
    e_mec = _piston_e_mec(m, g)
    common = dict(
        ck=KinematicConstraints(w),
        cv=VariationalConstraints(vmat),
        heat_form=lambda q, qdot: q[2] * qdot[4],
        second_law=SecondLawPolicy((4,), 2),
        coordinate_names=PISTON_COORDS,
    )
    if helmholtz:
        system = SOCSystem(
            n=6, mech_dim=1,
            lagrangian=lambda q, qdot: l_mec(q[:1], qdot[:1]) - q[5] + q[2] * q[4],
            energy=lambda q, qdot: e_mec(q[:1], qdot[:1]) + q[5],
            l_mec=l_mec, internal_energy=lambda qt: qt[4], **common)
    else:
        system = SOCSystem.thermo_mechanical(
            n=6, mech_dim=1, l_mec=l_mec, mech_energy=e_mec,
            internal_energy=lambda qt: qt[4], **common)

    c = gas.n0r * T_iso / m

    def rhs(t, s):
        x, v = s
        return np.array([v, -g + c / x])

    def recon(state):
        x = state[0]
        P, U, S = gas_state(gas, T_iso, A * x)
        return np.array([x, P, T_iso, A * x, S, U])

    ode = ReducedODE(2, rhs, ("x", "v"), _piston_guard(), (1,))
    return Scenario("piston-isothermal", cfg, system, ode, recon,
                    np.array([cfg.x0, cfg.v0], dtype=float))


# -- dissipative pistons ----------------------------------------------------------

def _dissipative_parts(cfg: DissipativePiston, bath: bool):
    m, g, A, gas, body, mu = cfg.m, cfg.g, cfg.A, cfg.gas, cfg.body, cfg.mu
    kappa, area = cfg.kappa, cfg.area
    if bath:
        kappa_e, area_e, Tb = cfg.kappa_e, cfg.area_e, cfg.Tb
    else:
        kappa_e, area_e, Tb = 0.0, 1.0, 1.0
    n = 9

    def heat(q, qdot):
        return kappa_e * area_e * (Tb - q[6])

    def w(jet):
        q, qd, qdd = jet.q, jet.qdot, jet.qddot
        x, T, V, S, Tc, Sc, Uc = q[0], q[2], q[3], q[4], q[6], q[7], q[8]
        e_mec_dot = (m * qdd[0] + m * g) * qd[0]
        # Fourier law between gas and container
        fourier = qd[5] + kappa * area(x) * (T - Tc)
        ecp = e_mec_dot + qd[5] + qd[8] - heat(q, qd)
        return np.array(_gas_state_residuals(gas, A, q) + [
            S - _gas_entropy(gas, T, V),
            Uc - body.nu * Tc,
            Sc - body.s0 - body.nu * math.log(Tc / body.t0),
            fourier,
            ecp,
        ])

    def vmat(q, qdot):
        P, Tc = q[1], q[6]
        rows = _gas_rows(gas, A, q, n) + [_gas_entropy_row(gas, q, n)]
        r = np.zeros(n)
        r[[6, 8]] = -body.nu, 1.0
        rows.append(r)
        r = np.zeros(n)
        r[[6, 7]] = -body.nu / Tc, 1.0
        rows.append(r)
        r = np.zeros(n)
        r[[3, 5]] = P, 1.0
        rows.append(r)
        r = np.zeros(n)
        r[[0, 8]] = -mu * qdot[0], 1.0
        rows.append(r)
        return np.array(rows)

    system = SOCSystem.thermo_mechanical(
        n=n, mech_dim=1, l_mec=_piston_l_mec(m, g), mech_energy=_piston_e_mec(m, g),
        internal_energy=lambda qt: qt[4] + qt[7],
        ck=KinematicConstraints(w, ("gas_law", "energy_law", "volume", "entropy",
                                    "container_U", "container_S", "fourier", "ecp")),
        cv=VariationalConstraints(vmat),
        heat_form=heat if bath else (lambda q, qdot: 0.0),
        second_law=SecondLawPolicy((4, 7), 6),
        coordinate_names=DISSIPATIVE_COORDS,
        force_map=lambda q, qdot: np.array([-mu * qdot[0] + q[1] * A, 0, 0, 0, 0, 1.0, 0, 0, 1.0]),
    )

    an = gas.alpha * gas.n0r

    def rhs(t, s):
        x, v, T, Tc = s
        acc = -g + gas.n0r * T / (m * x) - mu * v / m
        T_dot = kappa * area(x) * (Tc - T) / an
        q_in = kappa_e * area_e * (Tb - Tc)
        Tc_dot = (q_in - (m * acc + m * g) * v - an * T_dot) / body.nu
        return np.array([v, acc, T_dot, Tc_dot])

    def recon(state):
        x, _, T, Tc = state
        P, U, S = gas_state(gas, T, A * x)
        Uc, Sc = body_state(body, Tc)
        return np.array([x, P, T, A * x, S, U, Tc, Sc, Uc])

    guards = (("x>0", lambda s: s[0] > 0), ("T>0", lambda s: s[2] > 0),
              ("T_c>0", lambda s: s[3] > 0))
    ode = ReducedODE(4, rhs, ("x", "v", "T", "T_c"), guards, (1,))
    initial = np.array([cfg.x0, cfg.v0, cfg.T_init, cfg.Tc_init], dtype=float)
    return system, ode, recon, initial


def build_dissipative_piston(cfg: DissipativePiston) -> Scenario:
    return Scenario("piston-dissipative", cfg, *_dissipative_parts(cfg, bath=False))


def build_dissipative_piston_bath(cfg: DissipativePistonBath) -> Scenario:
    return Scenario("piston-dissipative-bath", cfg, *_dissipative_parts(cfg, bath=True))


BUILDERS = {
    "wagon-adiabatic": (WagonAdiabatic, build_wagon_adiabatic),
    "wagon-bath": (WagonBath, build_wagon_bath),
    "piston-adiabatic": (PistonAdiabatic, build_piston_adiabatic),
    "piston-isothermal": (PistonIsothermal, build_piston_isothermal),
    "piston-dissipative": (DissipativePiston, build_dissipative_piston),
    "piston-dissipative-bath": (DissipativePistonBath, build_dissipative_piston_bath),
}
SCENARIO_NAMES = tuple(BUILDERS)


def build(cfg) -> Scenario:
    """Dispatch on the exact configuration type (bath configs subclass plain ones)."""
    for cls, builder in BUILDERS.values():
        if type(cfg) is cls:
            return builder(cfg)
    raise TypeError(f"no scenario builder for {type(cfg).__name__}")
