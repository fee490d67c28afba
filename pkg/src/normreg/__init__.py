"""Deterministic sub-matrix zeroing that regularizes the operator norm of random matrices."""

from .buckets import (BucketDecomposition, BucketThresholds, StageMask,
                      decompose, handle_L, handle_M1, handle_M2)
from .damping import (DampingPlan, RowWeights, build_quantile_ladder,
                      damp_row, regularize_small_columns)
from .errors import (CapacityError, ContractError, DimensionError,
                     NormRegError, ParameterError)
from .gpselect import GPConfig, GPResult, gp_column_select, mean_grid_select
from .matcore import (IndexSet, SubmatrixMask, norm_2_to_inf,
                      norm_inf_to_2_bruteforce, op_norm_estimate,
                      restrict_columns, schur_bound, zero_block)
from .pipeline import (RegConfig, RegularizationReport, VerificationRecord,
                       regularize, regularize_iid, regularize_symmetric,
                       regularize_upper, verify)
from .samplers import SamplerSpec, sample_matrix
from .sweep import SweepSpec, run_sweep

__all__ = [
    "BucketDecomposition", "BucketThresholds", "StageMask", "decompose",
    "handle_L", "handle_M1", "handle_M2",
    "DampingPlan", "RowWeights", "build_quantile_ladder", "damp_row",
    "regularize_small_columns",
    "CapacityError", "ContractError", "DimensionError", "NormRegError",
    "ParameterError",
    "GPConfig", "GPResult", "gp_column_select", "mean_grid_select",
    "IndexSet", "SubmatrixMask", "norm_2_to_inf", "norm_inf_to_2_bruteforce",
    "op_norm_estimate", "restrict_columns", "schur_bound", "zero_block",
    "RegConfig", "RegularizationReport", "VerificationRecord", "regularize",
    "regularize_iid", "regularize_symmetric", "regularize_upper", "verify",
    "SamplerSpec", "sample_matrix",
    "SweepSpec", "run_sweep",
]
