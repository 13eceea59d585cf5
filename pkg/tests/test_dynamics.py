import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermomech.dynamics import (IntegratorConfig, Trajectory, accumulated_heat, energy_audit,
                                 integrate, reconstruct, reversibility_check, second_law_audit,
                                 simulate, socs_audit)
from thermomech.errors import GuardViolation, StepLimitExceeded
from thermomech.ode import ReducedODE
from thermomech.oracles import (wagon_position, wagon_temperature_adiabatic, wagon_velocity)
from thermomech.scenarios import (PistonAdiabatic, PistonIsothermal, WagonAdiabatic, WagonBath,
                                  adiabat_constant, build)
from thermomech.thermo import BodyParams

DECAY = ReducedODE(1, lambda t, s: -s, ("x",), (("x>0", lambda s: s[0] > 0),))
RK45 = IntegratorConfig(method="rk45", rtol=1e-10, atol=1e-12)
ORDER_WAGON = WagonAdiabatic(m=1.0, mu=10.0, body=BodyParams(1.0), v0=1.0, T_init=1.0)


def run(cfg, integrator):
    sc = build(cfg)
    return sc, reconstruct(integrate(sc.ode, sc.initial, integrator), sc.reconstruction,
                           sc.coordinate_names)


def wagon_error(cfg, dt, t_end):
    sc = build(cfg)
    traj = integrate(sc.ode, sc.initial, IntegratorConfig(t_end=t_end, dt=dt))
    t = traj.times
    exact = np.column_stack([
        wagon_position(cfg.m, cfg.mu, cfg.x0, cfg.v0, t),
        wagon_velocity(cfg.m, cfg.mu, cfg.v0, t),
        wagon_temperature_adiabatic(cfg.m, cfg.mu, cfg.body.nu, cfg.v0, cfg.T_init, t),
    ])
    return float(np.max(np.abs(traj.states - exact)))


# -- integrate -----------------------------------------------------------------

def test_rk4_exponential_decay():
    traj = integrate(DECAY, [1.0], IntegratorConfig(t_end=1.0, dt=1e-3))
    assert len(traj) == 1001
    assert traj.states[-1, 0] == pytest.approx(math.exp(-1), abs=1e-10)


def test_rk45_exponential_decay_on_grid():
    traj = integrate(DECAY, [1.0], dataclasses.replace(RK45, t_end=1.0, sample_dt=0.1))
    assert np.array_equal(traj.times, np.arange(11) / 10)
    assert np.max(np.abs(traj.states[:, 0] - np.exp(-traj.times))) <= 1e-9


def test_rk4_sampling():
    traj = integrate(DECAY, [1.0], IntegratorConfig(t_end=1.0, dt=1e-3, sample_dt=0.25))
    assert np.allclose(traj.times, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)


def test_wagon_velocity(unit_wagon):
    sc = build(unit_wagon)
    traj = integrate(sc.ode, sc.initial, IntegratorConfig(t_end=1.0, dt=1e-3))
    assert traj.column("v")[-1] == pytest.approx(math.exp(-1), abs=1e-9)


def test_guard_violations():
    with pytest.raises(GuardViolation) as info:
        integrate(DECAY, [-1.0], IntegratorConfig())
    assert info.value.t == 0.0
    falling = ReducedODE(1, lambda t, s: np.array([-1.0]), ("x",), (("x>0", lambda s: s[0] > 0),))
    with pytest.raises(GuardViolation) as info:
        integrate(falling, [0.5], IntegratorConfig(t_end=1.0, dt=1e-3))
    assert info.value.guard == "x>0"
    assert info.value.t == pytest.approx(0.5, abs=2e-3)
    blowup = ReducedODE(1, lambda t, s: s * s, ("x",))
    with pytest.raises(GuardViolation) as info, np.errstate(over="ignore"):
        integrate(blowup, [1.0], IntegratorConfig(t_end=2.0, dt=0.1))
    assert info.value.guard == "finite"


def test_step_limits():
    with pytest.raises(StepLimitExceeded):
        integrate(DECAY, [1.0], IntegratorConfig(t_end=1.0, dt=1e-3, max_steps=10))
    with pytest.raises(StepLimitExceeded):
        integrate(DECAY, [1.0], dataclasses.replace(RK45, max_steps=3))


def test_integrator_config_validation():
    for bad in (dict(method="euler"), dict(t_end=0.0), dict(dt=-1.0), dict(rtol=0.0),
                dict(sample_dt=0.0), dict(max_steps=0)):
        with pytest.raises(ValueError):
            IntegratorConfig(**bad)
    with pytest.raises(ValueError):
        integrate(DECAY, [1.0, 2.0], IntegratorConfig())


def test_rk4_order():
    coarse = wagon_error(ORDER_WAGON, 2e-3, 2.0)
    fine = wagon_error(ORDER_WAGON, 1e-3, 2.0)
    assert 12.0 <= coarse / fine <= 20.0


# -- reconstruct ---------------------------------------------------------------

def test_reconstruct_adiabatic_piston():
    cfg = PistonAdiabatic(m=1.0, g=1.0, A=1.5, x0=1.2, v0=0.2, T_init=1.3)
    sc, traj = run(cfg, IntegratorConfig(t_end=2.0, dt=1e-3))
    x = traj.column("x")
    assert np.array_equal(x, traj.states[:, 0])
    assert np.array_equal(traj.column("V"), 1.5 * x)
    k, gas = adiabat_constant(cfg), cfg.gas
    assert np.allclose(traj.column("U"), gas.alpha * k * (1.5 * x) ** (1 - gas.gamma), rtol=1e-13)
    assert traj.column("S")[0] == traj.column("S")[-1]


def test_reconstruct_isothermal_piston():
    cfg = PistonIsothermal(m=1.0, g=1.0, A=1.0, x0=1.5, v0=-0.4, T_init=2.0)
    _, traj = run(cfg, IntegratorConfig(t_end=2.0, dt=1e-3))
    S, x = traj.column("S"), traj.column("x")
    assert np.allclose(S - S[0], cfg.gas.n0r * np.log(x / cfg.x0), atol=1e-12)
    assert np.all(traj.column("T") == 2.0)


# -- energy audit --------------------------------------------------------------

def test_energy_audit_adiabatic_wagon(unit_wagon):
    sc, traj = run(unit_wagon, IntegratorConfig(t_end=10.0, dt=1e-3))
    drift, worst = energy_audit(traj, sc.system)
    assert drift[0] == 0.0
    assert worst <= 1e-6


def test_energy_audit_wagon_bath():
    cfg = WagonBath(m=1.0, mu=1.0, body=BodyParams(2.0), v0=1.0, T_init=2.0, kappa=0.5, Tb=1.0)
    sc, traj = run(cfg, IntegratorConfig(t_end=10.0, dt=1e-3))
    _, worst = energy_audit(traj, sc.system)
    assert worst <= 1e-6
    # the bath removes a visible amount of heat, so the balance is not trivial
    assert abs(accumulated_heat(traj, sc.system)[-1]) > 0.1


def test_energy_drift_decreases_at_integrator_order():
    cfg = PistonAdiabatic(m=1.0, g=1.0, A=1.0, x0=1.2, v0=0.1, T_init=1.0)
    drifts = []
    for dt in (0.02, 0.01):
        sc, traj = run(cfg, IntegratorConfig(t_end=10.0, dt=dt))
        drifts.append(energy_audit(traj, sc.system)[1])
    assert 12.0 <= drifts[0] / drifts[1] <= 20.0


def test_accumulated_heat_is_exact_for_cubics():
    t = np.linspace(0.0, 1.0, 21)
    rate_law = lambda s: 1.0 + 2.0 * s - 3.0 * s ** 2 + 4.0 * s ** 3

    class Fake:
        heat_form = staticmethod(lambda q, v: rate_law(q[0]))

    traj = Trajectory.from_samples(t, t[:, None], ("tau",))
    integral = t + t ** 2 - t ** 3 + t ** 4
    assert np.max(np.abs(accumulated_heat(traj, Fake) - integral)) <= 1e-12


# -- second-law audit ----------------------------------------------------------

def test_second_law_wagon_accepted(unit_wagon):
    sc, traj = run(unit_wagon, IntegratorConfig(t_end=3.0, dt=1e-3))
    margin, verdict = second_law_audit(traj, sc.system)
    inner = traj.interior()
    assert verdict == "accepted"
    assert np.all(margin[inner] > 0)
    expected = unit_wagon.mu * traj.column("v") ** 2 / traj.column("T")
    assert np.allclose(margin[inner], expected[inner], atol=1e-9)


def test_second_law_isothermal_equality():
    cfg = PistonIsothermal(m=1.0, g=1.0, A=1.0, x0=1.5, v0=0.3, T_init=1.2)
    sc, traj = run(cfg, IntegratorConfig(t_end=3.0, dt=1e-3))
    margin, verdict = second_law_audit(traj, sc.system)
    assert verdict == "accepted"
    assert np.max(np.abs(margin[traj.interior()])) <= 1e-8


def cooling_wagon(times):
    """Wagon samples with T falling and no heat exchange: entropy decreases."""
    body = BodyParams(1.0)
    T = 2.0 - 0.5 * times
    return np.column_stack([np.zeros_like(T), T, body.s0 + body.nu * np.log(T / body.t0), T])


def test_second_law_rejects_decreasing_entropy(unit_wagon):
    sys = build(unit_wagon).system
    t = np.linspace(0.0, 1.0, 101)
    traj = Trajectory.from_samples(t, cooling_wagon(t), sys.coordinate_names)
    margin, verdict = second_law_audit(traj, sys)
    assert verdict == "rejected"
    assert np.all(margin < 0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 20.0))
def test_second_law_verdict_survives_time_rescaling(c):
    sys = build(WagonAdiabatic(m=1.0, mu=1.0, body=BodyParams(1.0), T_init=1.0)).system
    t = np.linspace(0.0, 1.0, 51)
    states = cooling_wagon(t)
    base_margin, base = second_law_audit(Trajectory.from_samples(t, states, sys.coordinate_names),
                                         sys)
    margin, verdict = second_law_audit(Trajectory.from_samples(c * t, states,
                                                               sys.coordinate_names), sys)
    assert verdict == base
    assert np.allclose(margin, base_margin / c, rtol=1e-8)


# -- reversibility -------------------------------------------------------------

def test_adiabatic_piston_is_reversible():
    cfg = PistonAdiabatic(m=1.0, g=1.0, A=1.0, x0=1.2, v0=0.1, T_init=1.0)
    sc = build(cfg)
    assert reversibility_check(sc.ode, sc.initial, 2.0, IntegratorConfig()) <= 1e-6


def test_isothermal_piston_is_reversible():
    sc = build(PistonIsothermal(m=1.0, g=1.0, A=1.0, x0=1.5, v0=0.3, T_init=1.2))
    assert reversibility_check(sc.ode, sc.initial, 2.0, IntegratorConfig()) <= 1e-6


def test_wagon_is_irreversible(unit_wagon):
    sc = build(unit_wagon)
    error = reversibility_check(sc.ode, sc.initial, 2.0, IntegratorConfig())
    # forward-backward closed form: |v| ends at e**-4, the largest deviation
    assert error == pytest.approx(1 - math.exp(-4), abs=1e-9)
    assert error >= 0.5


# -- SOCS audit and simulate ---------------------------------------------------

def test_socs_audit_wagon_and_piston(unit_wagon, unit_piston):
    for cfg in (unit_wagon, dataclasses.replace(unit_piston, x0=1.3, v0=0.1)):
        sc, traj = run(cfg, IntegratorConfig(t_end=2.0, dt=1e-3))
        kin, dal = socs_audit(traj, sc.system, stride=20)
        assert kin <= 1e-6 and dal <= 1e-6


def test_socs_audit_catches_wrong_dynamics(unit_wagon):
    # wagon samples that coast without friction: kinematics can hold, dynamics cannot
    sys = build(unit_wagon).system
    t = np.linspace(0.0, 1.0, 101)
    T = 1.0 + 0.5 * t
    states = np.column_stack([t, T, np.log(T), T])
    _, dal = socs_audit(Trajectory.from_samples(t, states, sys.coordinate_names), sys, stride=10)
    assert dal > 1e-2


def test_simulate_report(unit_wagon):
    result = simulate(build(unit_wagon), IntegratorConfig(t_end=2.0, dt=1e-3), audit_stride=50,
                      reversibility_t1=1.0)
    rows = dict(result.report.rows())
    assert rows["second_law_verdict"] == "accepted"
    assert rows["energy_drift"] <= 1e-6
    assert rows["entropy_margin_min"] > 0
    assert rows["reversibility_error"] > 0.5
    assert len(result.margin) == len(result.trajectory) == len(result.drift)


def test_trajectory_requires_increasing_times():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 1.0]), np.zeros((3, 1)))
