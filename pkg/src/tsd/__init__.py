"""Tangent subspace descent on Riemannian manifolds.

Coordinate-descent-style optimization where each inner step descends in a
projected subspace of the current tangent space.  The package provides the
geometry toolbox (Euclidean, orthogonal group, Stiefel frames, products),
deterministic and randomized subspace selection rules, solvers with fixed,
backtracking and exact Givens stepsizes, a numerical verification battery
for the theory's inequalities, and a Procrustes benchmark CLI.
"""

from .errors import CutLocusError, MonitorError, StepsizeUnderflowError, UnsupportedGeometryError
from .linalg import (
    expm_givens,
    expm_skew,
    logm_orthogonal,
    orth_complement_basis,
    random_orthogonal,
)
from .manifolds import (
    Euclidean,
    Isometry,
    Manifold,
    Objective,
    Orthogonal,
    Product,
    Stiefel,
    Tangent,
)
from .selection import (
    GivensPartition,
    SubspaceProjection,
    conjugated_projection,
    givens_rule,
    matching_partition,
    onb_block_decomposition,
    parallel_transport_rule,
    product_rule,
    randomized_finite_rule,
    randomized_orthogonal_rule,
    randomized_stiefel_rule,
    singleton_partition,
)
from .solver import (
    Backtracking,
    ExactGivens,
    FixedInverseL,
    IterationTrace,
    SolverConfig,
    givens_exact_linesearch,
    rgd_run,
    step_backtracking,
    step_fixed,
    tsd_run,
)
from .procrustes import ProcrustesInstance, component_optimum, gen_instance, svd_optimum, trace_objective
from .bench import run_benchmark
from .verify import (
    AuditReport,
    DecreaseConstants,
    GapReport,
    NormEquivalenceReport,
    adversarial_displacement,
    check_gap_orthogonal,
    counterexample_deterministic,
    counterexample_randomized,
    decrease_audit,
    estimate_randomized_constant,
    gap_radius,
    norm_equiv_ratio,
    run_all,
    seminorm,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "Backtracking",
    "CutLocusError",
    "DecreaseConstants",
    "Euclidean",
    "ExactGivens",
    "FixedInverseL",
    "GapReport",
    "GivensPartition",
    "Isometry",
    "IterationTrace",
    "Manifold",
    "MonitorError",
    "NormEquivalenceReport",
    "Objective",
    "Orthogonal",
    "ProcrustesInstance",
    "Product",
    "SolverConfig",
    "Stiefel",
    "StepsizeUnderflowError",
    "SubspaceProjection",
    "Tangent",
    "UnsupportedGeometryError",
    "adversarial_displacement",
    "check_gap_orthogonal",
    "component_optimum",
    "conjugated_projection",
    "counterexample_deterministic",
    "counterexample_randomized",
    "decrease_audit",
    "estimate_randomized_constant",
    "expm_givens",
    "expm_skew",
    "gap_radius",
    "gen_instance",
    "givens_exact_linesearch",
    "givens_rule",
    "logm_orthogonal",
    "matching_partition",
    "norm_equiv_ratio",
    "onb_block_decomposition",
    "orth_complement_basis",
    "parallel_transport_rule",
    "product_rule",
    "random_orthogonal",
    "randomized_finite_rule",
    "randomized_orthogonal_rule",
    "randomized_stiefel_rule",
    "rgd_run",
    "run_all",
    "run_benchmark",
    "seminorm",
    "singleton_partition",
    "step_backtracking",
    "step_fixed",
    "svd_optimum",
    "trace_objective",
    "tsd_run",
]
