"""Shape memory two-bar truss: dynamics, feedback linearization and fuzzy compensation."""

from .constitutive import CUZNALNI, MaterialProperties, TrussGeometry, austenite_temperature, strain_from_angle, stress
from .control import (
    ControllerConfig,
    combined_error,
    control_fl,
    control_fuzzy_fl,
    convergence_box,
    gain_vector,
    zeta_coefficients,
)
from .dynamics import SimState, TrussParams, derivative, equilibria, nondimensionalize, restoring_term
from .engine import BlowUpError, Scenario, ScenarioResult, poincare_section, rk4_step, run_scenario
from .fuzzy import FuzzyCompensator, MembershipPartition, RuleConsequents, adapt, infer, memberships

__version__ = "0.1.0"
