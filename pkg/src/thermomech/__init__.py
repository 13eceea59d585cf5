"""Thermo-mechanical systems as Lagrangian systems with second-order constraints."""

from .errors import (ConstraintRankError, DimensionError, DomainError, GuardViolation,
                     InconsistentJetError, IntegrationError, ResonanceError, StepLimitExceeded,
                     ThermomechError, TurningPointError)
from .geometry import (ContactChart, FundamentalEquation, LegendrePatch, TangentThermo,
                       composite_chart, contact_form, pullback_residual, state_equations)
from .thermo import BodyParams, IdealGasParams
from .socs import (Jet2, KinematicConstraints, SecondLawPolicy, SOCSystem, VariationalConstraints,
                   VariationBasis, constraint_force, dalembert_violation, el_residual,
                   holonomic_embed, kinematic_residual, nonholonomic_embed, variation_basis)
from .ode import ReducedODE
from .scenarios import (AreaModel, DissipativePiston, DissipativePistonBath, PistonAdiabatic,
                        PistonIsothermal, Scenario, WagonAdiabatic, WagonBath, build)
from .dynamics import (IntegratorConfig, SimulationReport, Trajectory, energy_audit, integrate,
                       reconstruct, reversibility_check, second_law_audit, simulate, socs_audit)

__all__ = [
    "ConstraintRankError", "DimensionError", "DomainError", "GuardViolation",
    "InconsistentJetError", "IntegrationError", "ResonanceError", "StepLimitExceeded",
    "ThermomechError", "TurningPointError", "ContactChart", "FundamentalEquation", "LegendrePatch",
    "TangentThermo", "composite_chart", "contact_form", "pullback_residual", "state_equations",
    "BodyParams", "IdealGasParams", "Jet2", "KinematicConstraints", "SecondLawPolicy", "SOCSystem",
    "VariationalConstraints", "VariationBasis", "constraint_force", "dalembert_violation",
    "el_residual", "holonomic_embed", "kinematic_residual", "nonholonomic_embed",
    "variation_basis", "ReducedODE", "AreaModel", "DissipativePiston", "DissipativePistonBath",
    "PistonAdiabatic", "PistonIsothermal", "Scenario", "WagonAdiabatic", "WagonBath", "build",
    "IntegratorConfig", "SimulationReport", "Trajectory", "energy_audit", "integrate",
    "reconstruct", "reversibility_check", "second_law_audit", "simulate", "socs_audit",
]

__version__ = "0.1.0"
