"""Certified single-iteration bit-flipping analysis for QC-LDPC/MDPC codes."""

from .bounds import (bsc_failure_bound, capability, dfr_bound, dfr_bound_girth6_regular, dfr_bound_qc,
                     dfr_bound_regular_odd, optimize_threshold, t_mu)
from .codes import (ParityCheckMatrix, adjacency_row, build_monomial, build_qc2,
                    distinct_row_profiles, girth, load_spec, syndrome)
from .decoder import BfConfig, bf_decode, unsatisfied_counts
from .keysearch import KeygenPolicy, KeyRecord, acceptance_rate_experiment, rejection_sample_key
from .montecarlo import TrialPlan, estimate_dfr
from .subset import compress, count_exceeding, theta

__version__ = "0.1.0"

__all__ = [
    "ParityCheckMatrix", "adjacency_row", "build_monomial", "build_qc2",
    "distinct_row_profiles", "girth", "load_spec", "syndrome",
    "BfConfig", "bf_decode", "unsatisfied_counts",
    "bsc_failure_bound", "capability", "dfr_bound", "dfr_bound_girth6_regular", "dfr_bound_qc",
    "dfr_bound_regular_odd", "optimize_threshold", "t_mu",
    "KeygenPolicy", "KeyRecord", "acceptance_rate_experiment", "rejection_sample_key",
    "TrialPlan", "estimate_dfr",
    "compress", "count_exceeding", "theta",
]
