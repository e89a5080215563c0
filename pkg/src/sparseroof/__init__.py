"""Analytical speed-of-light performance model for sparse neural networks.

Predicts inference latency bounds and sparse-over-dense speedups for pruned
networks across storage formats (CSR, BSR, N:M) and hardware profiles,
without implementing or benchmarking any kernel. Measured accuracy and
latency are joined in as data.
"""

from .cost import (
    Block,
    CostBreakdown,
    Dense,
    DTypeWidths,
    FormatInstance,
    NofM,
    SparsityConfig,
    Unstructured,
    block,
    bytes_moved,
    dense,
    flops,
    instantiate,
    n_of_m,
    parse_sparsity,
    sparsity_sweep,
    unstructured,
)
from .errors import ConfigError, DataError, InconsistencyError, SparseroofError
from .hardware import (
    EngineClass,
    HardwareProfile,
    knee_ai,
    load_profile,
    resolve_profile,
    roof_throughput,
)
from .mmio import (
    BlockOccupancy,
    SparsePattern,
    TrafficBreakdown,
    block_occupancy,
    instance_from_pattern,
    read_matrix_market,
    traffic_breakdown,
    write_matrix_market,
)
from .netgraph import (
    Conv,
    LayerSpec,
    Linear,
    MatmulShape,
    ModelGraph,
    RawMatmul,
    load_model_spec,
    lower_layer,
    resolve_model_spec,
)
from .report import (
    AccuracyRecord,
    AssembledSeries,
    Series,
    SeriesPoint,
    assemble_series,
    emit,
    load_accuracy,
)
from .roofline import (
    DEFAULT_ENGINE_MAP,
    Boundedness,
    Measurement,
    ModelSol,
    SolResult,
    SpeedupRecord,
    arithmetic_intensity,
    model_sol,
    percent_of_sol,
    roofline_point,
    sol_latency,
    speedup_at_sol,
)

__version__ = "0.1.0"
