"""``thermomech`` command-line front end.

Exit codes: 0 success, 1 configuration error, 2 integration failure
(guard violation, step limit, state-equation domain), 3 Second-Law
rejection (simulate and report), 4 failed verification check (verify).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracles
from .dynamics import (DEFAULT_AUDIT_TOL, IntegratorConfig, SimulationReport, Trajectory,
                       energy_audit, integrate, reconstruct, reversibility_check,
                       second_law_audit, socs_audit)
from .errors import DomainError, IntegrationError, ResonanceError
from .scenarios import (BUILDERS, SCENARIO_NAMES, AreaModel, DissipativePiston, PistonAdiabatic,
                        Scenario, WagonAdiabatic, WagonBath, build)
from .thermo import BodyParams, IdealGasParams

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INTEGRATION = 2
EXIT_SECOND_LAW = 3
EXIT_VERIFY = 4

FLOAT_FORMAT = "%.16e"
TOL_ENV = "THERMOMECH_TOL"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunManifest:
    command: str
    scenario: str
    config_path: Path
    integrator: IntegratorConfig
    out_dir: Path
    tolerance: float = DEFAULT_AUDIT_TOL
    trajectory_path: Path | None = None
    audit_stride: int = 1
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIO_NAMES:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"choose from {', '.join(SCENARIO_NAMES)}")


# -- configuration ----------------------------------------------------------------

_SUBTABLES = {"gas": IdealGasParams, "body": BodyParams, "area": AreaModel}
_INTEGRATOR_KEYS = {f.name for f in dataclasses.fields(IntegratorConfig)}


def _make(cls, table: dict, where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(table) - known
    if unknown:
        raise ConfigError(f"[{where}] unknown keys: {', '.join(sorted(unknown))}")
    try:
        return cls(**table)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}] {exc}") from exc


def load_table(path: Path, scenario: str) -> dict:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if scenario not in doc:
        raise ConfigError(f"config {path} has no [{scenario}] table")
    return dict(doc[scenario])


def scenario_config(scenario: str, table: dict, overrides: dict | None = None):
    """Scenario configuration object from a config table (integrator keys removed)."""
    table = {k: v for k, v in table.items() if k != "integrator"}
    table.update(overrides or {})
    cls = BUILDERS[scenario][0]
    for key, sub in _SUBTABLES.items():
        if key in table:
            if not isinstance(table[key], dict):
                raise ConfigError(f"[{scenario}.{key}] must be a table")
            table[key] = _make(sub, table[key], f"{scenario}.{key}")
    return _make(cls, table, scenario)


def integrator_config(table: dict, args) -> IntegratorConfig:
    settings = dict(table.get("integrator", {}))
    unknown = set(settings) - _INTEGRATOR_KEYS
    if unknown:
        raise ConfigError(f"[integrator] unknown keys: {', '.join(sorted(unknown))}")
    if args.dt is not None:
        settings.update(method="rk4", dt=args.dt)
    if args.rtol is not None or args.atol is not None:
        settings["method"] = "rk45"
        if args.rtol is not None:
            settings["rtol"] = args.rtol
        if args.atol is not None:
            settings["atol"] = args.atol
    if args.method is not None:
        settings["method"] = args.method
    if args.t_end is not None:
        settings["t_end"] = args.t_end
    if args.sample_dt is not None:
        settings["sample_dt"] = args.sample_dt
    if "t_end" not in settings:
        raise ConfigError("no t_end given (use --t-end or [<scenario>.integrator] t_end)")
    if not settings["t_end"] > 0:
        raise ConfigError(f"empty time window: t_end={settings['t_end']!r}")
    settings.setdefault("method", "rk45")
    try:
        return IntegratorConfig(**settings)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[integrator] {exc}") from exc


def audit_tolerance() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_AUDIT_TOL
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not value > 0:
        raise ConfigError(f"{TOL_ENV} must be positive")
    return value


# -- CSV --------------------------------------------------------------------------

def _fmt(value) -> str:
    return FLOAT_FORMAT % value


def write_table(path: Path, header, columns) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])


def write_trajectory(path: Path, traj: Trajectory) -> None:
    header = ["t"] + [f"ode.{n}" for n in traj.state_names] + list(traj.coordinate_names)
    columns = [traj.times] + list(traj.states.T) + list(traj.full_states.T)
    write_table(path, header, columns)


def read_trajectory(path: Path, coordinate_names) -> Trajectory:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory {path}: {exc}") from exc
    if len(rows) < 2:
        raise ConfigError(f"trajectory {path} has no samples")
    header = rows[0]
    missing = [c for c in ("t", *coordinate_names) if c not in header]
    if missing:
        raise ConfigError(f"trajectory {path} lacks columns {missing}")
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]])
    except ValueError as exc:
        raise ConfigError(f"trajectory {path}: {exc}") from exc
    t = data[:, header.index("t")]
    full = data[:, [header.index(c) for c in coordinate_names]]
    try:
        return Trajectory.from_samples(t, full, coordinate_names)
    except ValueError as exc:
        raise ConfigError(f"trajectory {path}: {exc}") from exc


def write_report(path: Path, report: SimulationReport) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "value"])
        for name, value in report.rows():
            writer.writerow([name, value if isinstance(value, str) else _fmt(value)])
        writer.writerow(["tolerance", _fmt(report.tolerance)])


# -- running ----------------------------------------------------------------------

def _run(scenario: Scenario, manifest: RunManifest):
    traj = integrate(scenario.ode, scenario.initial, manifest.integrator)
    traj = reconstruct(traj, scenario.reconstruction, scenario.coordinate_names)
    return traj


def _report(traj: Trajectory, scenario: Scenario, manifest: RunManifest,
            reversibility: float | None = None) -> SimulationReport:
    sys_ = scenario.system
    _, drift = energy_audit(traj, sys_)
    margin, verdict = second_law_audit(traj, sys_)
    kin, dal = socs_audit(traj, sys_, stride=manifest.audit_stride)
    inner = margin[traj.interior()]
    return SimulationReport(drift, float(np.min(inner)) if inner.size else 0.0, kin, dal,
                            verdict, reversibility, manifest.tolerance)


def _scenario(manifest: RunManifest) -> Scenario:
    table = load_table(manifest.config_path, manifest.scenario)
    return build(scenario_config(manifest.scenario, table, manifest.overrides))


def cmd_simulate(manifest: RunManifest) -> int:
    scenario = _scenario(manifest)
    traj = _run(scenario, manifest)
    report = _report(traj, scenario, manifest)
    out = manifest.out_dir
    write_trajectory(out / f"{manifest.scenario}_trajectory.csv", traj)
    write_report(out / f"{manifest.scenario}_report.csv", report)
    if report.second_law_verdict != "accepted":
        print(f"Second-Law rejection: min entropy margin {report.entropy_margin_min:.3e}",
              file=sys.stderr)
        return EXIT_SECOND_LAW
    return EXIT_OK


def _oracle_checks(traj: Trajectory, scenario: Scenario, tol: float) -> list[tuple[str, float, float]]:
    cfg = scenario.config
    t = traj.times
    inner = traj.interior()
    checks = []
    if type(cfg) is WagonAdiabatic:
        x = oracles.wagon_position(cfg.m, cfg.mu, cfg.x0, cfg.v0, t) if cfg.mu > 0 else cfg.x0 + cfg.v0 * t
        T = oracles.wagon_temperature_adiabatic(cfg.m, cfg.mu, cfg.body.nu, cfg.v0, cfg.T_init, t)
        err = max(np.max(np.abs(traj.column("x") - x)), np.max(np.abs(traj.column("T") - T)))
        checks.append(("oracle_wagon", float(err), tol))
    elif type(cfg) is WagonBath and cfg.mu > 0:
        try:
            T = oracles.wagon_temperature_bath(cfg.m, cfg.mu, cfg.body.nu, cfg.kappa, cfg.Tb,
                                               cfg.v0, cfg.T_init, t)
        except ResonanceError:
            pass
        else:
            checks.append(("oracle_wagon_bath", float(np.max(np.abs(traj.column("T") - T))), tol))
    elif type(cfg) is PistonAdiabatic:
        x = traj.column("x")[inner]
        p = cfg.m * traj.qdot[inner, 0]
        H = np.array([oracles.piston_hamiltonian(cfg, q, pp) for q, pp in zip(x, p)])
        checks.append(("hamiltonian_drift", float(np.max(np.abs(H - H[0])) / abs(H[0])), tol))
    elif type(cfg) is DissipativePiston:
        E0 = oracles.dissipative_total_energy(cfg)
        E = np.array([scenario.system.energy(q, v) for q, v in zip(traj.full_states, traj.qdot)])
        checks.append(("total_energy", float(np.max(np.abs(E[inner] - E0)) / E0), tol))
    return checks


def cmd_verify(manifest: RunManifest) -> int:
    scenario = _scenario(manifest)
    tol = manifest.tolerance
    if manifest.trajectory_path is not None:
        traj = read_trajectory(manifest.trajectory_path, scenario.coordinate_names)
    else:
        traj = _run(scenario, manifest)
    sys_ = scenario.system
    kin, dal = socs_audit(traj, sys_, stride=manifest.audit_stride)
    _, drift = energy_audit(traj, sys_)
    margin, verdict = second_law_audit(traj, sys_)
    inner = margin[traj.interior()]
    margin_min = float(np.min(inner)) if inner.size else 0.0
    checks = [
        ("kinematic_residual", kin, tol),
        ("dalembert_violation", dal, tol),
        ("energy_drift", drift, tol),
        ("second_law_margin", -margin_min, sys_.second_law.tolerance),
    ]
    checks += _oracle_checks(traj, scenario, tol)
    if manifest.trajectory_path is None and manifest.scenario in ("piston-adiabatic", "piston-isothermal"):
        t1 = min(2.0, manifest.integrator.t_end)
        rev = reversibility_check(scenario.ode, scenario.initial, t1, manifest.integrator)
        checks.append(("reversibility", rev, tol))
    width = max(len(c[0]) for c in checks)
    all_ok = True
    print(f"{'check':<{width}}  {'value':>12}  {'threshold':>10}  result")
    for name, value, threshold in checks:
        ok = bool(value <= threshold)
        all_ok &= ok
        print(f"{name:<{width}}  {value:>12.3e}  {threshold:>10.1e}  {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_VERIFY


def phase_portrait(cfg: PistonAdiabatic, n_q: int = 101, n_p: int = 101):
    """Grid of Hamiltonian values around the equilibrium ``x*``."""
    xs = oracles.piston_equilibrium(cfg)
    qs = np.linspace(0.5 * xs, 1.5 * xs, n_q)
    p_max = cfg.m * math.sqrt(2.0 * cfg.g * xs)
    ps = np.linspace(-p_max, p_max, n_p)
    Q, P = np.meshgrid(qs, ps, indexing="ij")
    H = np.vectorize(lambda q, p: oracles.piston_hamiltonian(cfg, q, p))(Q, P)
    return Q.ravel(), P.ravel(), H.ravel()


def cmd_report(manifest: RunManifest) -> int:
    scenario = _scenario(manifest)
    if manifest.trajectory_path is not None:
        traj = read_trajectory(manifest.trajectory_path, scenario.coordinate_names)
    else:
        traj = _run(scenario, manifest)
    out = manifest.out_dir
    name = manifest.scenario
    names = scenario.coordinate_names
    t = traj.times
    if "T_c" in names:
        write_table(out / f"{name}_g3.csv", ["t", "T", "x", "T_c"],
                    [t, traj.column("T"), traj.column("x"), traj.column("T_c")])
        S, Sc = traj.column("S"), traj.column("S_c")
        write_table(out / f"{name}_g4.csv", ["t", "S", "S_c", "S+S_c"], [t, S, Sc, S + Sc])
    margin, verdict = second_law_audit(traj, scenario.system)
    policy = scenario.system.second_law
    total = traj.full_states[:, list(policy.entropy_indices)].sum(axis=1)
    write_table(out / f"{name}_entropy.csv", ["t", "S_total", "margin"], [t, total, margin])
    if type(scenario.config) is PistonAdiabatic:
        write_table(out / f"{name}_phase.csv", ["q", "p", "H"], phase_portrait(scenario.config))
    if verdict != "accepted":
        print("Second-Law rejection: total entropy margin goes negative", file=sys.stderr)
        return EXIT_SECOND_LAW
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "report": cmd_report}


def execute(manifest: RunManifest) -> int:
    """Run one manifest and map every failure to its exit code."""
    try:
        return COMMANDS[manifest.command](manifest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, DomainError) as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


# -- argument parsing -------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermomech",
                                     description="Simulate and audit thermo-mechanical systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "integrate a scenario and write trajectory and report CSVs"),
                        ("verify", "run the audit battery and print a pass/fail table"),
                        ("report", "write figure-ready CSVs")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--t-end", type=float)
        p.add_argument("--dt", type=float, help="fixed RK4 step")
        p.add_argument("--rtol", type=float, help="adaptive RK45 relative tolerance")
        p.add_argument("--atol", type=float, help="adaptive RK45 absolute tolerance")
        p.add_argument("--method", choices=("rk4", "rk45"))
        p.add_argument("--sample-dt", type=float)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--audit-stride", type=int, default=1)
        p.add_argument("--sweep", help="KEY=V1,V2,... run one simulation per value concurrently")
        if name != "simulate":
            p.add_argument("--trajectory", type=Path, help="audit this CSV instead of integrating")
    return parser


def _manifest(args, overrides=None, out_dir=None) -> RunManifest:
    if args.dt is not None and (args.rtol is not None or args.atol is not None):
        raise ConfigError("--dt and --rtol/--atol are mutually exclusive")
    if args.audit_stride < 1:
        raise ConfigError("--audit-stride must be at least 1")
    table = load_table(args.config, args.scenario)
    return RunManifest(
        command=args.command, scenario=args.scenario, config_path=args.config,
        integrator=integrator_config(table, args), out_dir=out_dir or args.out,
        tolerance=audit_tolerance(), trajectory_path=getattr(args, "trajectory", None),
        audit_stride=args.audit_stride, overrides=overrides or {},
    )


def _sweep_manifests(args) -> list[RunManifest]:
    key, sep, values = args.sweep.partition("=")
    if not sep or not key or not values:
        raise ConfigError("--sweep expects KEY=V1,V2,...")
    try:
        numbers = [float(v) for v in values.split(",")]
    except ValueError:
        raise ConfigError(f"--sweep values must be numbers: {values!r}") from None
    return [_manifest(args, {key: v}, args.out / f"{key}={v:g}") for v in numbers]


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which is taken by integration failures
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        if args.sweep:
            manifests = _sweep_manifests(args)
            # validate every configuration before fanning out
            for m in manifests:
                scenario_config(m.scenario, load_table(m.config_path, m.scenario), m.overrides)
        else:
            manifests = [_manifest(args)]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if len(manifests) == 1:
        return execute(manifests[0])
    with ProcessPoolExecutor() as pool:
        codes = list(pool.map(execute, manifests))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
