"""Exact mean and variance of linear SDEs from a single matrix exponential."""

from ._core import (
    AugmentedForm,
    AugmentedSystem,
    ComputationError,
    DimensionError,
    Error,
    ExpmMethod,
    LinearSde,
    McConfig,
    McEstimate,
    ModelError,
    MomentResult,
    MomentState,
    SdeClass,
    assemble,
    classify,
    euler_maruyama_mc,
    expm,
    expm_action,
    hilbert,
    hilbert_test_equation,
    kron,
    kron_sum,
    kron_sum_vec,
    load_model,
    moments_at,
    moments_baseline,
    parse_model,
    propagate_grid,
    rk4_moments,
    serialize_model,
    unvec,
    vec,
)

__all__ = [name for name in dir() if not name.startswith("_")]
