"""Weighted latent class model: simulation, spectral estimation, evaluation."""

__version__ = "0.1.0"

from .estimators import Estimate, KSelection, estimate_k, rmk, sck  # noqa: E402
from .generators import (  # noqa: E402
    SimulationDesign,
    make_rng,
    sample_classes,
    sample_item_params,
    sample_responses,
    simulate,
)
from .metrics import MetricVector, evaluate  # noqa: E402
from .model import (  # noqa: E402
    ClassAssignment,
    DistributionSpec,
    ItemParams,
    Kind,
    ResponseMatrix,
    check_assumption,
    one_hot,
    population_matrix,
    profile_means,
    scaling_split,
)
from .spectral import kmeans, top_k_svd  # noqa: E402

__all__ = [
    "ClassAssignment",
    "DistributionSpec",
    "Estimate",
    "ItemParams",
    "KSelection",
    "Kind",
    "MetricVector",
    "ResponseMatrix",
    "SimulationDesign",
    "check_assumption",
    "estimate_k",
    "evaluate",
    "kmeans",
    "make_rng",
    "one_hot",
    "population_matrix",
    "profile_means",
    "rmk",
    "sample_classes",
    "sample_item_params",
    "sample_responses",
    "scaling_split",
    "sck",
    "simulate",
    "top_k_svd",
]
