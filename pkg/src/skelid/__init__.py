"""Row skeleton selection and interpolative decompositions ``X ~= W @ X[S]``."""
from .interpolation import Interpolation, build_id, build_osid, exact_w
from .metrics import ErrorReport, errid, error_report, errskel, eta_r, is_rank_eps_id
from .selectors import (
    SelectionResult,
    StoppingRule,
    blockwise_select,
    cpqr_select,
    robust_blockwise_filter,
    sketchy_select,
    sqnorm_distribution,
    sqnorm_sample,
    srp_select,
    weighted_sample_block,
)

__all__ = [
    "ErrorReport",
    "Interpolation",
    "SelectionResult",
    "StoppingRule",
    "blockwise_select",
    "build_id",
    "build_osid",
    "cpqr_select",
    "errid",
    "error_report",
    "errskel",
    "eta_r",
    "exact_w",
    "is_rank_eps_id",
    "robust_blockwise_filter",
    "sketchy_select",
    "sqnorm_distribution",
    "sqnorm_sample",
    "srp_select",
    "weighted_sample_block",
]
