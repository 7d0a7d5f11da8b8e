"""Morse index and nullity of symmetric bilinear forms, their behavior
under finitely many linear constraints, and a discretized interval
boundary problem exercising the index decomposition MI(Q) = a + b."""

from .bilinear import (
    Decomposition,
    Inertia,
    InnerProductSpace,
    Subspace,
    SymmetricForm,
    fundamental_decomposition,
    inertia,
    kernel_intersection,
    maximal_negative_subspace_through,
    morse_index,
    nullity,
    restrict,
    s_project,
)
from .constraints import (
    ConstrainedReport,
    Functional,
    MultiConstraintReport,
    SolveOutcome,
    analyze,
    diagonalize_duals,
    is_s_critical,
    predict_index_drop,
    predict_multi,
    predict_nullity_change,
    riesz,
    solve_dual,
)
from .boundary import (
    AssembledProblem,
    CoefficientSpec,
    Constant,
    IntervalDomain,
    NodalSamples,
    Polynomial,
    SpectrumReport,
    SteklovResult,
    assemble,
    dirichlet_spectrum,
    refine_and_check,
    robin_spectrum,
    steklov_spectrum,
    verify_decomposition,
    weak_index,
)
from .harness import ProblemFile, RunReport, fuzz, parse_problem, run
from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"

__all__ = [
    "AssembledProblem", "CoefficientSpec", "Constant", "ConstrainedReport",
    "DEFAULT", "Decomposition", "Functional", "Inertia", "InnerProductSpace",
    "IntervalDomain", "MultiConstraintReport", "NodalSamples", "Polynomial",
    "ProblemFile", "RunReport", "SolveOutcome", "SpectrumReport",
    "SteklovResult", "Subspace", "SymmetricForm", "Tolerances", "analyze",
    "assemble", "diagonalize_duals", "dirichlet_spectrum", "fundamental_decomposition",
    "fuzz", "inertia", "is_s_critical", "kernel_intersection",
    "maximal_negative_subspace_through", "morse_index", "nullity",
    "parse_problem", "predict_index_drop", "predict_multi",
    "predict_nullity_change", "refine_and_check", "restrict", "riesz",
    "robin_spectrum", "run", "s_project", "solve_dual", "steklov_spectrum",
    "verify_decomposition", "weak_index",
]
