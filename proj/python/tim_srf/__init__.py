"""Transductive multi-label completion by smoothed rank maximisation."""

from ._core import (
    InputError,
    NumericalError,
    SolverConfig,
    alpha_delta,
    approx_rank,
    auc,
    complete,
    load_dataset,
    mcar_mask,
    project,
    singular_values,
    smoothed_rank,
    smoothed_rank_gradient,
    standardize,
    synthesize,
)

__all__ = [
    "InputError",
    "NumericalError",
    "SolverConfig",
    "alpha_delta",
    "approx_rank",
    "auc",
    "complete",
    "load_dataset",
    "mcar_mask",
    "project",
    "singular_values",
    "smoothed_rank",
    "smoothed_rank_gradient",
    "standardize",
    "synthesize",
]
