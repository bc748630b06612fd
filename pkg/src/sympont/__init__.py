"""Numerical optimal control via the symplectic discretization of the
Hamiltonian boundary-value system, with independent value-function oracles
and two-sided error-bound verification.

The package is organized around six pieces:

* :mod:`sympont.problems` - control problems, Legendre transforms between the
  Hamiltonian and the running cost, regularization, constants certification;
* :mod:`sympont.catalog` - concrete problems with certified constants;
* :mod:`sympont.solver` - the forward-backward sweep solver for the discrete
  boundary-value system;
* :mod:`sympont.variational` - direct minimization of the discrete cost
  functional, multiplier extraction, brute-force ground truth;
* :mod:`sympont.oracle` - closed forms and a semi-Lagrangian grid solver;
* :mod:`sympont.harness` - (dt, delta) sweeps, bound verdicts, order fits,
  CSV/SVG reports (also exposed as the ``sympont`` CLI).
"""

from . import catalog
from .errors import (
    BudgetExceededError,
    ExtractionInconsistentError,
    HamiltonianEvaluationError,
    MalformedProblemError,
    OptimizationFailedError,
    ReachabilityError,
    RegularizationInvalidError,
    SweepNonConvergenceError,
    SympontError,
    UnknownProblemError,
)
from .harness import (
    CellRecord,
    ExperimentReport,
    ExperimentSpec,
    emit_reports,
    error_bounds,
    fit_order,
    grid_oracle_value,
    read_cells_csv,
    run_sweep,
)
from .oracle import (
    GridSpec,
    GridValueFunction,
    continuous_hamiltonian_flow,
    control_ball_samples,
    default_grid,
    exact_value,
    solve_grid_dp,
)
from .problems import (
    ControlProblem,
    ExtendedReal,
    RegularizedHamiltonian,
    SmoothHamiltonian,
    identity_regularization,
    recover_hamiltonian,
    regularize,
    running_cost_numeric,
    verify_constants,
)
from .solver import (
    BoundReport,
    DiscreteTrajectory,
    SweepOptions,
    dual_bound_check,
    export_trajectory_csv,
    read_trajectory_csv,
    scheme_residuals,
    solve_tpbvp,
    value_of,
)
from .variational import (
    ControlVector,
    DiscreteValue,
    MinimizeOptions,
    brute_force_value,
    discrete_cost,
    discrete_cost_grad,
    extract_multipliers,
    minimize_J,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "BudgetExceededError",
    "CellRecord",
    "ControlProblem",
    "ControlVector",
    "DiscreteTrajectory",
    "DiscreteValue",
    "ExperimentReport",
    "ExperimentSpec",
    "ExtendedReal",
    "ExtractionInconsistentError",
    "GridSpec",
    "GridValueFunction",
    "HamiltonianEvaluationError",
    "MalformedProblemError",
    "MinimizeOptions",
    "OptimizationFailedError",
    "ReachabilityError",
    "RegularizationInvalidError",
    "RegularizedHamiltonian",
    "SmoothHamiltonian",
    "SweepNonConvergenceError",
    "SweepOptions",
    "SympontError",
    "UnknownProblemError",
    "brute_force_value",
    "catalog",
    "continuous_hamiltonian_flow",
    "control_ball_samples",
    "default_grid",
    "discrete_cost",
    "discrete_cost_grad",
    "dual_bound_check",
    "emit_reports",
    "error_bounds",
    "exact_value",
    "export_trajectory_csv",
    "extract_multipliers",
    "fit_order",
    "grid_oracle_value",
    "identity_regularization",
    "minimize_J",
    "read_cells_csv",
    "read_trajectory_csv",
    "recover_hamiltonian",
    "regularize",
    "run_sweep",
    "running_cost_numeric",
    "scheme_residuals",
    "solve_grid_dp",
    "solve_tpbvp",
    "value_of",
    "verify_constants",
]
