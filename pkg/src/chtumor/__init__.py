"""Cahn-Hilliard / reaction-diffusion tumor-growth toolkit.

Simulates the coupled phase/nutrient system with no-flux boundaries,
integrates its spatially homogeneous reduction, and mechanically checks
the dissipativity conditions, nutrient comparison envelopes and long-time
boundedness diagnostics.
"""
from .diagnostics import (
    AbsorptionReport,
    MonitorRow,
    absorption,
    check_sigma_envelope,
    energy,
    monitor_row,
    x_magnitude,
)
from .dynamics import (
    SchemeConfig,
    SimState,
    TrajectoryReport,
    make_initial,
    run,
    stabilization_parameter,
    step,
)
from .errors import ConfigurationError, DivergenceError, SolverError
from .grid import (
    Field,
    GridSpec,
    grad_sq_norm,
    inner,
    laplacian_neumann,
    mean,
    solve_ch_linear,
    solve_helmholtz,
)
from .homogeneous import (
    HomState,
    HomTrajectory,
    Regime,
    classify_regime,
    find_equilibria,
    hom_rhs,
    integrate,
    invariant_strip,
)
from .model import (
    DissipativityCert,
    Params,
    Potential,
    Proliferation,
    absorption_time,
    admissible_epsilon_sup,
    check_dissipativity,
    envelope_lower,
    envelope_upper,
    make_demo_potential,
    make_polynomial_double_well,
    make_proliferation,
    make_quartic_potential,
)

__version__ = "0.1.0"

__all__ = [
    "AbsorptionReport", "MonitorRow", "absorption", "check_sigma_envelope",
    "energy", "monitor_row", "x_magnitude",
    "SchemeConfig", "SimState", "TrajectoryReport", "make_initial", "run",
    "stabilization_parameter", "step",
    "ConfigurationError", "DivergenceError", "SolverError",
    "Field", "GridSpec", "grad_sq_norm", "inner", "laplacian_neumann", "mean",
    "solve_ch_linear", "solve_helmholtz",
    "HomState", "HomTrajectory", "Regime", "classify_regime", "find_equilibria",
    "hom_rhs", "integrate", "invariant_strip",
    "DissipativityCert", "Params", "Potential", "Proliferation",
    "absorption_time", "admissible_epsilon_sup", "check_dissipativity",
    "envelope_lower", "envelope_upper", "make_demo_potential",
    "make_polynomial_double_well", "make_proliferation", "make_quartic_potential",
]
