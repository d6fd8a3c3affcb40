"""RANSAC stopping criteria: approximate versus exact all-inlier probabilities."""

from .stopping import (
    UNBOUNDED,
    ConsensusCounts,
    Criterion,
    DegenerateInputError,
    StopConfig,
    approx_probability,
    exact_probability,
    relative_error,
    required_iterations,
    true_success_rate,
    undersampling_ratio,
)

__version__ = "0.1.0"
