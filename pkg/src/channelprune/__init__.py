"""Graph-guided channel pruning for attention-weight reconstruction.

Builds a dense interaction graph over query/key channels, selects
channels to prune with a greedy minimum-incremental-error strategy (or
baselines: independent scoring, random, exhaustive oracle), shields
high-norm key channels from removal, and quantifies the resulting
reconstruction error on synthetic or file-loaded matrices.
"""

from .core import ChannelMatrix, IndexSet, column_dot, decomposed_error_sq, reconstruction_error_sq
from .errors import (
    CapacityError,
    ConfigError,
    DegenerateInputError,
    MatrixFormatError,
    MatrixValidationError,
)
from .graph import (
    DEFAULT_ENUMERATION_CAP,
    EigenCertificate,
    InteractionGraph,
    build_interaction_graph,
    jacobi_eigenvalues,
    quadratic_form,
    restricted_eigenvalues,
    restricted_eigenvalues_sampled,
)
from .prune import (
    ProtectionPolicy,
    PruneSelection,
    Selector,
    clamp_proportion,
    mies_select,
    oracle_select,
    protect_channels,
    random_select,
    select_channels,
    think_scores,
    think_select,
)
from .sim import DriftResult, SyntheticSpec, drift_evaluate, generate_instance

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ChannelMatrix",
    "ConfigError",
    "DEFAULT_ENUMERATION_CAP",
    "DegenerateInputError",
    "DriftResult",
    "EigenCertificate",
    "IndexSet",
    "InteractionGraph",
    "MatrixFormatError",
    "MatrixValidationError",
    "ProtectionPolicy",
    "PruneSelection",
    "Selector",
    "SyntheticSpec",
    "build_interaction_graph",
    "clamp_proportion",
    "column_dot",
    "decomposed_error_sq",
    "drift_evaluate",
    "generate_instance",
    "jacobi_eigenvalues",
    "mies_select",
    "oracle_select",
    "protect_channels",
    "quadratic_form",
    "random_select",
    "reconstruction_error_sq",
    "restricted_eigenvalues",
    "restricted_eigenvalues_sampled",
    "select_channels",
    "think_scores",
    "think_select",
]
