"""Hat-basis block networks with adaptive growth.

Networks whose first stage is built from blocks that reproduce 1D
piecewise-linear nodal basis functions, trained against data-fitting or
PDE-residual objectives, and grown adaptively by estimating pointwise
errors, marking and clustering the worst points, and inserting new
blocks at cluster centroids.
"""

import os

# The arrays involved are small; BLAS thread fan-out costs more than it
# buys and makes timings erratic. One thread also keeps results
# reproducible regardless of the host's thread defaults. Override with
# HATNET_BLAS_THREADS if you know better.
try:
    from threadpoolctl import threadpool_limits as _threadpool_limits

    _threadpool_limits(int(os.environ.get("HATNET_BLAS_THREADS", "1")), "blas")
except Exception:  # pragma: no cover - purely a performance tweak
    pass

# Training allocates megabyte-scale arrays every operation; with glibc's
# default thresholds each one is a fresh mmap (page faults on every
# touch), which roughly doubles epoch times. Keeping such chunks on the
# heap is a pure performance tweak with no numerical effect.
try:
    import ctypes as _ctypes

    _libc = _ctypes.CDLL("libc.so.6")
    _libc.mallopt(-3, 256 * 1024 * 1024)  # M_MMAP_THRESHOLD
    _libc.mallopt(-1, 256 * 1024 * 1024)  # M_TRIM_THRESHOLD
except Exception:  # pragma: no cover - non-glibc platforms
    pass

from .adaptive import (
    AdaptiveConfig,
    Cluster,
    IndicatorField,
    clusters_to_nodes,
    dbscan_clusters,
    estimate,
    mark,
    run_adaptive,
    total_indicator,
)
from .autodiff import (
    DiffScalar,
    Dual,
    Group,
    ParameterStore,
    Var,
    grad_params,
    input_jacobian,
    input_laplacian,
)
from .blocks import HatBlock, NodeTriple, eval_block, relu_hat_block, tanh_hat_block
from .errors import (
    CheckpointError,
    ConfigurationError,
    HatnetError,
    TrainingDivergedError,
    UnsupportedOperationError,
)
from .network import (
    HatNet,
    build_network,
    count_params,
    enhance,
    load_checkpoint,
    network_from_description,
    params_for_structure,
    save_checkpoint,
    uniform_nodes,
)
from .estimators import AdaptiveHatNetRegressor, HatNetRegressor
from .problems import PROBLEMS, Problem, burgers_reference, get_problem
from .report import TestGrid, make_test_grid, pointwise_error_field, relative_l2
from .training import (
    SampleSet,
    TrainingConfig,
    TrainingTrace,
    adam_step,
    pinn_loss,
    sample,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig",
    "AdaptiveHatNetRegressor",
    "CheckpointError",
    "Cluster",
    "ConfigurationError",
    "DiffScalar",
    "Dual",
    "Group",
    "HatBlock",
    "HatNet",
    "HatNetRegressor",
    "HatnetError",
    "IndicatorField",
    "NodeTriple",
    "PROBLEMS",
    "ParameterStore",
    "Problem",
    "SampleSet",
    "TestGrid",
    "TrainingConfig",
    "TrainingDivergedError",
    "TrainingTrace",
    "UnsupportedOperationError",
    "Var",
    "adam_step",
    "build_network",
    "burgers_reference",
    "clusters_to_nodes",
    "count_params",
    "dbscan_clusters",
    "enhance",
    "estimate",
    "eval_block",
    "get_problem",
    "grad_params",
    "input_jacobian",
    "input_laplacian",
    "load_checkpoint",
    "make_test_grid",
    "mark",
    "network_from_description",
    "params_for_structure",
    "pinn_loss",
    "pointwise_error_field",
    "relative_l2",
    "relu_hat_block",
    "run_adaptive",
    "sample",
    "save_checkpoint",
    "tanh_hat_block",
    "total_indicator",
    "train",
    "uniform_nodes",
]
