"""Memristive reduced Chialvo neuron map: simulation and analysis toolkit."""

__version__ = "0.1.0"

from .core import (
    ESCAPE_RADIUS,
    DriveSignal,
    EscapedOrbitError,
    FiringStats,
    MapParams,
    NeuronState,
    Orbit,
    PHLTrace,
    firing_params,
    firing_stats,
    iterate,
    memristance,
    memristor_step,
    phl_trace,
    step,
)
from .fixed_points import (
    DegenerateParameterError,
    FixedPointRecord,
    StabilityReport,
    classify,
    find_fixed_points,
    jacobian,
    residual_F,
    theorem1_check,
)
from .bifurcation import (
    BifurcationDiagram,
    CritPoint,
    NSReport,
    SweepConfig,
    attractor_sweep,
    branch_track,
    ns_critical_k,
    ns_first_lyapunov,
    ns_self_consistent,
)
from .attractors import (
    AttractorRecord,
    BasinGrid,
    Budget,
    basin_grid,
    classify_attractor,
    correlation_dimension,
    correlation_sum,
    largest_lyapunov,
)
from .network import (
    NetworkConfig,
    NetworkHistory,
    NetworkState,
    SpatiotemporalReport,
    analyze,
    classify_pattern,
    cluster_count,
    coherence_profile,
    network_step,
    simulate,
    sync_error,
)
from .rng import SplitMix64
