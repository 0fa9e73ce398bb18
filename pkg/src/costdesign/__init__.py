"""Approximate D-optimal designs under simultaneous size and cost constraints."""
from .barycentric import (Certificate, EmptyStratumError, EquivalenceResult,
                          InfeasibleRenormalizationError, IterationInfo,
                          Snapshot, SolverOptions, SolverReport, Status,
                          TraceRow, ZeroSError, barycentric_coordinates,
                          barycentric_update, certify, delete_redundant,
                          epsilon_and_bounds, equivalence_check,
                          initial_design, mix_to_equality, renormalize,
                          solve_cost_only, solve_equality, solve_inequality,
                          solve_size_only)
from .instances import (RandomSpec, quadratic_grid_coordinates,
                        quadratic_grid_instance, random_instance)
from .model import (CostPartition, DesignInstance, InformationState,
                    InvalidInstanceError, SingularDesignError,
                    feasibility_residuals, h_threshold, info_matrix,
                    is_feasible, pair_kernel, partition, phi, s_of,
                    variance_function, weighted_variances)
from .standard import (DegenerateSupportError, StandardOptions,
                       StandardResult, compute_v0,
                       solve_standard_multiplicative)
from .transforms import (BackMap, Regime, TransformKind, classify_regime,
                         cost_only_to_standard,
                         general_two_constraint_to_canonical, normalize_costs,
                         trace_constraint_costs)

__version__ = "0.1.0"

__all__ = [
    "Certificate", "EmptyStratumError", "EquivalenceResult",
    "InfeasibleRenormalizationError", "IterationInfo", "Snapshot",
    "SolverOptions", "SolverReport", "Status", "TraceRow", "ZeroSError",
    "barycentric_coordinates", "barycentric_update", "certify",
    "delete_redundant", "epsilon_and_bounds", "equivalence_check",
    "initial_design", "mix_to_equality", "renormalize", "solve_cost_only",
    "solve_equality", "solve_inequality", "solve_size_only", "RandomSpec",
    "quadratic_grid_coordinates", "quadratic_grid_instance",
    "random_instance", "CostPartition", "DesignInstance", "InformationState",
    "InvalidInstanceError", "SingularDesignError", "feasibility_residuals",
    "h_threshold", "info_matrix", "is_feasible", "pair_kernel", "partition",
    "phi", "s_of", "variance_function", "weighted_variances",
    "DegenerateSupportError", "StandardOptions", "StandardResult",
    "compute_v0", "solve_standard_multiplicative", "BackMap", "Regime",
    "TransformKind", "classify_regime", "cost_only_to_standard",
    "general_two_constraint_to_canonical", "normalize_costs",
    "trace_constraint_costs",
]
