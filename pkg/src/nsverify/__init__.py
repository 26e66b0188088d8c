"""Verification harness for exact periodic Navier-Stokes solutions."""
from .evolution import (
    EvolutionSpec,
    OracleConfig,
    TabulatedForce,
    duhamel_evolve,
    family_force,
    free_space_oracle_heat,
    free_space_oracle_pressure_gradient,
    heat_propagate,
    project_force,
)
from .fields import (
    DimensionMismatchError,
    Family,
    FluidParams,
    Grid,
    ScalarField,
    SolutionFamily,
    TimeProfile,
    VectorField,
    eval_force,
    eval_inertial_closed_form,
    eval_pressure,
    eval_velocity,
    omega,
    sample,
)
from .operators import (
    Backend,
    advection,
    curl,
    divergence,
    gradient,
    laplacian,
    leray_project,
    poisson_solve,
    pressure_from_fields,
    umbilical_force,
)
from .solutions import metadata, registry, special_cases
from .verify import (
    ResidualReport,
    Tolerances,
    cell_energy,
    convergence_study,
    divergence_residual,
    evolve_vs_closed_form,
    exit_code,
    initial_condition_check,
    momentum_residual,
    ppe_consistency,
    run_family,
    umbilical_audit,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "DimensionMismatchError",
    "EvolutionSpec",
    "Family",
    "FluidParams",
    "Grid",
    "OracleConfig",
    "ResidualReport",
    "ScalarField",
    "SolutionFamily",
    "TabulatedForce",
    "TimeProfile",
    "Tolerances",
    "VectorField",
    "advection",
    "cell_energy",
    "convergence_study",
    "curl",
    "divergence",
    "divergence_residual",
    "duhamel_evolve",
    "eval_force",
    "eval_inertial_closed_form",
    "eval_pressure",
    "eval_velocity",
    "evolve_vs_closed_form",
    "exit_code",
    "family_force",
    "free_space_oracle_heat",
    "free_space_oracle_pressure_gradient",
    "gradient",
    "heat_propagate",
    "initial_condition_check",
    "laplacian",
    "leray_project",
    "momentum_residual",
    "omega",
    "poisson_solve",
    "ppe_consistency",
    "pressure_from_fields",
    "project_force",
    "run_family",
    "sample",
    "umbilical_audit",
    "metadata",
    "registry",
    "special_cases",
    "umbilical_force",
]
