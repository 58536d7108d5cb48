"""Directional node-grouping toolkit for massive MIMO.

Partitions node populations into coherence-block groups using only long-term
directional channel properties, generates synthetic clustered channels to
test on, scores partitions by MRC SINR, and exports the underlying
mixed-integer model for external solvers.
"""

from .channel import (
    ArrayGeometry,
    ChannelInstance,
    ClusterSpec,
    ExperimentConfig,
    angular_spread,
    cluster_angular_spread,
    generate_instance,
    load_instance,
    save_instance,
    steering_vector,
)
from .errors import (
    CapacityError,
    ConfigError,
    ConsistencyError,
    EnumerationSizeError,
    SolveTimeout,
    ToolkitError,
)
from .geometry import (
    GAP_CAP,
    GroupEvaluation,
    NodeProfile,
    Partition,
    adjusted_gap,
    group_value,
    partition_objective,
)
from .harness import TOOLKIT_VERSION as __version__
from .lp_export import MilpModel, build_model, export_lp
from .partitioners import (
    METHODS,
    PartitionResult,
    approximate_partition,
    brute_force_partition,
    clumped_partition,
    exact_partition,
    power_partition,
)
from .sinr import CiSummary, SinrReport, aggregate, mean_ci, mrc_sinr

__all__ = [
    "ArrayGeometry",
    "CapacityError",
    "ChannelInstance",
    "CiSummary",
    "ClusterSpec",
    "ConfigError",
    "ConsistencyError",
    "EnumerationSizeError",
    "ExperimentConfig",
    "GAP_CAP",
    "GroupEvaluation",
    "METHODS",
    "MilpModel",
    "NodeProfile",
    "Partition",
    "PartitionResult",
    "SinrReport",
    "SolveTimeout",
    "ToolkitError",
    "adjusted_gap",
    "aggregate",
    "angular_spread",
    "approximate_partition",
    "brute_force_partition",
    "build_model",
    "cluster_angular_spread",
    "clumped_partition",
    "exact_partition",
    "export_lp",
    "generate_instance",
    "group_value",
    "load_instance",
    "mean_ci",
    "mrc_sinr",
    "partition_objective",
    "power_partition",
    "save_instance",
    "steering_vector",
    "__version__",
]
