"""Integration of reduced ODEs and the audits run on the resulting trajectories.

Audits never look at the integrator: velocities and accelerations of the
full coordinate vector are recovered from the sample grid by five-point
finite differences, and samples whose stencil is one-sided (two at each
end) are left out of every maximum and minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ._numdiff import grid_derivatives
from .errors import GuardViolation, IntegrationError, StepLimitExceeded
from .ode import ReducedODE
from .socs import Jet2, SOCSystem, dalembert_violation, kinematic_residual

STENCIL_WIDTH = 5
EDGE = STENCIL_WIDTH // 2
DEFAULT_AUDIT_TOL = 1e-6
# fine enough that five-point jets of the stiffest piston runs stay below 1e-7
DEFAULT_RK45_SAMPLE_DT = 2e-3


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    ``rk4`` takes fixed steps ``dt`` and records every ``sample_dt`` (every
    step by default). ``rk45`` is an embedded Dormand-Prince 5(4) pair whose
    steps are shortened to land exactly on the uniform ``sample_dt`` grid
    (``DEFAULT_RK45_SAMPLE_DT`` by default).
    """

    method: str = "rk4"
    t_end: float = 1.0
    dt: float = 1e-3
    rtol: float = 1e-9
    atol: float = 1e-12
    sample_dt: float | None = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.sample_dt is not None and not self.sample_dt > 0:
            raise ValueError("sample_dt must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    state_names: tuple[str, ...] = ()
    full_states: np.ndarray | None = None
    coordinate_names: tuple[str, ...] = ()
    qdot: np.ndarray | None = None
    qddot: np.ndarray | None = None

    def __post_init__(self):
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ValueError("times and states must have matching lengths")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @classmethod
    def from_samples(cls, times, full_states, coordinate_names: Sequence[str] = ()) -> "Trajectory":
        """Trajectory given directly by sampled coordinates (no reduced states)."""
        times = np.asarray(times, dtype=float)
        full = np.asarray(full_states, dtype=float)
        qdot, qddot = grid_derivatives(times, full, STENCIL_WIDTH)
        return cls(times, full, tuple(coordinate_names), full, tuple(coordinate_names), qdot, qddot)

    def __len__(self) -> int:
        return len(self.times)

    def jet(self, i: int) -> Jet2:
        if self.full_states is None:
            raise ValueError("trajectory has not been reconstructed")
        return Jet2(self.full_states[i], self.qdot[i], self.qddot[i])

    @property
    def jets(self) -> list[Jet2]:
        return [self.jet(i) for i in range(len(self))]

    def interior(self) -> slice:
        return slice(EDGE, len(self) - EDGE)

    def column(self, name: str) -> np.ndarray:
        if name in self.coordinate_names:
            return self.full_states[:, self.coordinate_names.index(name)]
        return self.states[:, self.state_names.index(name)]


@dataclass(frozen=True)
class SimulationReport:
    energy_drift: float
    entropy_margin_min: float
    constraint_residual_max: float
    dalembert_violation_max: float
    second_law_verdict: str
    reversibility_error: float | None = None
    tolerance: float = DEFAULT_AUDIT_TOL

    def rows(self) -> list[tuple[str, float | str]]:
        out = [
            ("energy_drift", self.energy_drift),
            ("entropy_margin_min", self.entropy_margin_min),
            ("constraint_residual_max", self.constraint_residual_max),
            ("dalembert_violation_max", self.dalembert_violation_max),
            ("second_law_verdict", self.second_law_verdict),
        ]
        if self.reversibility_error is not None:
            out.append(("reversibility_error", self.reversibility_error))
        return out


# -- integration ------------------------------------------------------------------

def _check(ode: ReducedODE, t: float, y: np.ndarray) -> None:
    failed = ode.failed_guard(y)
    if failed is not None:
        raise GuardViolation(failed, t, y)


def integrate(ode: ReducedODE, initial, cfg: IntegratorConfig) -> Trajectory:
    y0 = np.asarray(initial, dtype=float)
    if y0.shape != (ode.dimension,):
        raise ValueError(f"initial state must have {ode.dimension} components")
    _check(ode, 0.0, y0)
    if cfg.method == "rk4":
        times, states = _rk4(ode, y0, cfg)
    else:
        times, states = _rk45(ode, y0, cfg)
    return Trajectory(times, states, ode.state_names)


def _rk4(ode, y0, cfg):
    n_steps = max(1, int(round(cfg.t_end / cfg.dt)))
    if n_steps > cfg.max_steps:
        raise StepLimitExceeded(f"{n_steps} steps needed, max_steps={cfg.max_steps}")
    h = cfg.t_end / n_steps
    every = 1 if cfg.sample_dt is None else max(1, int(round(cfg.sample_dt / h)))
    times = [0.0]
    states = [y0]
    y = y0
    for i in range(n_steps):
        t = i * h
        k1 = ode(t, y)
        k2 = ode(t + h / 2, y + h / 2 * k1)
        k3 = ode(t + h / 2, y + h / 2 * k2)
        k4 = ode(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t_next = (i + 1) * h
        _check(ode, t_next, y)
        if (i + 1) % every == 0 or i + 1 == n_steps:
            times.append(t_next)
            states.append(y)
    return np.array(times), np.array(states)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(ode, t, y, f0, h):
    k = [f0]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(ode(t + _C[i] * h, yi))
    y_new = y + h * sum(b * kj for b, kj in zip(_B5, k) if b)
    err = h * sum(e * kj for e, kj in zip(_E, k))
    # FSAL: the last stage is f(t + h, y_new)
    return y_new, err, k[6]


def _rk45(ode, y0, cfg):
    sample_dt = cfg.sample_dt if cfg.sample_dt is not None else DEFAULT_RK45_SAMPLE_DT
    n_samples = max(1, int(round(cfg.t_end / sample_dt)))
    grid = cfg.t_end * np.arange(n_samples + 1) / n_samples
    times = [0.0]
    states = [y0]
    y = y0
    t = 0.0
    f = ode(t, y)
    scale = cfg.atol + cfg.rtol * np.abs(y)
    d0 = float(np.max(np.abs(y) / scale))
    d1 = float(np.max(np.abs(f) / scale))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, grid[1])
    steps = 0
    target_i = 1
    while target_i <= n_samples:
        target = grid[target_i]
        remaining = target - t
        # stretch to the grid point rather than leave a sliver step
        landing = h * 1.01 >= remaining
        h_try = remaining if landing else h
        steps += 1
        if steps > cfg.max_steps:
            raise StepLimitExceeded(f"max_steps={cfg.max_steps} exceeded at t={t:.17g}")
        y_new, err, f_new = _dp_step(ode, t, y, f, h_try)
        if not np.all(np.isfinite(y_new)):
            err_norm = math.inf
        else:
            tol = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.max(np.abs(err) / tol))
        if err_norm <= 1.0:
            t = target if landing else t + h_try
            y, f = y_new, f_new
            _check(ode, t, y)
            if landing:
                times.append(t)
                states.append(y)
                target_i += 1
            factor = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm ** -0.2)
            # a step shortened to hit the grid says nothing about the natural size
            h = max(h, h_try * factor) if landing else h_try * factor
        else:
            h = h_try * max(0.2, 0.9 * err_norm ** -0.2)
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.17g}")
    return np.array(times), np.array(states)


def reconstruct(traj: Trajectory, reconstruction: Callable[[np.ndarray], np.ndarray],
                coordinate_names: Sequence[str] = ()) -> Trajectory:
    """Fill the full coordinate vectors and their grid-differenced jets."""
    full = np.array([reconstruction(s) for s in traj.states], dtype=float)
    qdot, qddot = grid_derivatives(traj.times, full, STENCIL_WIDTH)
    return replace(traj, full_states=full, coordinate_names=tuple(coordinate_names),
                   qdot=qdot, qddot=qddot)


# -- audits -----------------------------------------------------------------------

def _need_full(traj: Trajectory) -> None:
    if traj.full_states is None:
        raise ValueError("trajectory has not been reconstructed")


def heat_rate(traj: Trajectory, sys: SOCSystem) -> np.ndarray:
    _need_full(traj)
    return np.array([sys.heat_form(q, v) for q, v in zip(traj.full_states, traj.qdot)], dtype=float)


def energy_series(traj: Trajectory, sys: SOCSystem) -> np.ndarray:
    _need_full(traj)
    return np.array([sys.energy(q, v) for q, v in zip(traj.full_states, traj.qdot)], dtype=float)


def accumulated_heat(traj: Trajectory, sys: SOCSystem) -> np.ndarray:
    """Running integral of the heat rate: trapezoid rule with end corrections.

    Each interval gets the Euler-Maclaurin term ``-h**2/12 * (r'(b) - r'(a))``
    with ``r'`` from the grid stencil, which lifts the rule to fourth order
    like the stencils that produced the rate.
    """
    rate = heat_rate(traj, sys)
    h = np.diff(traj.times)
    pieces = 0.5 * (rate[1:] + rate[:-1]) * h
    if len(traj) >= STENCIL_WIDTH:
        slope, _ = grid_derivatives(traj.times, rate, STENCIL_WIDTH)
        pieces -= h * h / 12.0 * np.diff(slope)
    return np.concatenate([[0.0], np.cumsum(pieces)])


def energy_audit(traj: Trajectory, sys: SOCSystem) -> tuple[np.ndarray, float]:
    """``E(t) - E(0) - int_0^t heat`` and its largest interior value relative to ``|E(0)|``."""
    E = energy_series(traj, sys)
    heat = accumulated_heat(traj, sys)
    drift = E - E[0] - heat
    inner = drift[traj.interior()]
    scale = abs(E[0]) if E[0] != 0 else 1.0
    return drift, float(np.max(np.abs(inner)) / scale) if inner.size else 0.0


def entropy_margin(traj: Trajectory, sys: SOCSystem) -> np.ndarray:
    """``sum S_dot - heat / T`` at every sample."""
    _need_full(traj)
    policy = sys.second_law
    if policy is None:
        raise ValueError("system has no Second-Law policy")
    s_dot = traj.qdot[:, list(policy.entropy_indices)].sum(axis=1)
    T = traj.full_states[:, policy.temperature_index]
    return s_dot - heat_rate(traj, sys) / T


def second_law_audit(traj: Trajectory, sys: SOCSystem,
                     tol: float | None = None) -> tuple[np.ndarray, str]:
    margin = entropy_margin(traj, sys)
    tol = sys.second_law.tolerance if tol is None else tol
    inner = margin[traj.interior()]
    ok = inner.size == 0 or float(np.min(inner)) >= -tol
    return margin, "accepted" if ok else "rejected"


def reversibility_check(ode: ReducedODE, initial, t1: float, cfg: IntegratorConfig) -> float:
    """Integrate to ``t1``, flip the velocities, integrate ``t1`` more; distance from start."""
    cfg = replace(cfg, t_end=t1)
    forward = integrate(ode, initial, cfg)
    flipped = forward.states[-1].copy()
    vel = list(ode.velocity_indices)
    flipped[vel] = -flipped[vel]
    final = integrate(ode, flipped, cfg).states[-1]
    initial = np.asarray(initial, dtype=float)
    pos = [i for i in range(ode.dimension) if i not in vel]
    err_pos = np.abs(final[pos] - initial[pos])
    err_vel = np.abs(np.abs(final[vel]) - np.abs(initial[vel]))
    return float(np.max(np.concatenate([err_pos, err_vel])))


def socs_audit(traj: Trajectory, sys: SOCSystem, stride: int = 1) -> tuple[float, float]:
    """Largest kinematic residual and d'Alembert violation over interior samples."""
    _need_full(traj)
    kin = 0.0
    dal = 0.0
    for i in range(EDGE, len(traj) - EDGE, stride):
        jet = traj.jet(i)
        w = kinematic_residual(sys, jet)
        if w.size:
            kin = max(kin, float(np.max(np.abs(w))))
        dal = max(dal, dalembert_violation(sys, jet))
    return kin, dal


@dataclass(frozen=True)
class SimulationResult:
    trajectory: Trajectory
    report: SimulationReport
    margin: np.ndarray = field(repr=False)
    drift: np.ndarray = field(repr=False)


def simulate(scenario, cfg: IntegratorConfig, tol: float = DEFAULT_AUDIT_TOL,
             audit_stride: int = 1, reversibility_t1: float | None = None) -> SimulationResult:
    """Integrate a scenario, reconstruct its coordinates and run every audit."""
    traj = integrate(scenario.ode, scenario.initial, cfg)
    traj = reconstruct(traj, scenario.reconstruction, scenario.coordinate_names)
    sys = scenario.system
    drift, drift_max = energy_audit(traj, sys)
    margin, verdict = second_law_audit(traj, sys)
    kin, dal = socs_audit(traj, sys, stride=audit_stride)
    rev = None
    if reversibility_t1 is not None:
        rev = reversibility_check(scenario.ode, scenario.initial, reversibility_t1, cfg)
    inner = margin[traj.interior()]
    report = SimulationReport(
        energy_drift=drift_max,
        entropy_margin_min=float(np.min(inner)) if inner.size else 0.0,
        constraint_residual_max=kin,
        dalembert_violation_max=dal,
        second_law_verdict=verdict,
        reversibility_error=rev,
        tolerance=tol,
    )
    return SimulationResult(traj, report, margin, drift)
