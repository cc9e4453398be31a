"""Python bindings for the dc2b core."""

from ._core import (
    InputError,
    ItemCatalog,
    Kernel,
    NumericError,
    PosteriorState,
    Slate,
    UpdateResult,
    build_kernel,
    dataset_stats,
    exhaustive_map,
    f_measure,
    greedy_map,
    lambda_of_xi,
    logistic_lower_bound,
    sample_theta,
    simulate_regret,
    slate_ild,
    slate_probability,
    subset_log_det,
    update,
    update_features,
)

__all__ = [name for name in dir() if not name.startswith("_")]
