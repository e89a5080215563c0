"""Arithmetic intensity, speed-of-light latency, speedups, and validation.

Per-layer speed-of-light latency is max(flops / peak FLOP/s, bytes / peak
bandwidth); a model's speed of light is the sum over its layers. Speedup is
the ratio of dense to sparse model latency. When dense and sparse kernels
are equally optimized (same percent of speed of light), the predicted
speedup equals the measured one exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Union

from .cost import CostBreakdown, DTypeWidths, SparsityConfig, bytes_moved, dense, instantiate
from .errors import ConfigError, InconsistencyError
from .hardware import EngineClass, HardwareProfile
from .netgraph import ModelGraph, lower_layer

# Default engine assignment per pattern family. Unstructured kernels cannot
# use matrix units; block formats can; N:M needs dedicated sparse units.
# This single mapping is the model's most consequential assumption, so every
# entry point lets callers override it.
DEFAULT_ENGINE_MAP: Mapping[str, EngineClass] = {
    "dense": EngineClass.MATRIX,
    "unstructured": EngineClass.SCALAR,
    "block": EngineClass.MATRIX,
    "nm": EngineClass.SPARSE_MATRIX,
}

# Measured latencies may beat the computed speed of light by up to this
# relative margin before being rejected as physically impossible (jitter).
SOL_TOLERANCE = 0.01


class Boundedness(enum.Enum):
    MEMORY = "memory"
    COMPUTE = "compute"


@dataclass(frozen=True)
class SolResult:
    """Speed-of-light latency for one layer, with its binding resource."""

    latency_s: float
    ai: float
    bound: Boundedness
    engine: EngineClass
    flops: int
    bytes: int


@dataclass(frozen=True)
class ModelSol:
    """Per-layer speed-of-light results and their sum for one model run."""

    model: str
    config: SparsityConfig
    per_layer: tuple[tuple[str, SolResult], ...]

    @property
    def total_latency_s(self) -> float:
        return sum(sol.latency_s for _, sol in self.per_layer)


@dataclass(frozen=True)
class SpeedupRecord:
    """Dense-over-sparse ratio of model speed-of-light latencies."""

    model: str
    config: SparsityConfig
    dense_sol_s: float
    sparse_sol_s: float

    @property
    def speedup(self) -> float:
        return self.dense_sol_s / self.sparse_sol_s


@dataclass(frozen=True)
class Measurement:
    """An externally measured latency for a layer or a whole model."""

    scope: str
    config: SparsityConfig
    measured_latency_s: float

    def __post_init__(self):
        if self.measured_latency_s <= 0:
            raise ConfigError(
                f"measurement '{self.scope}': latency must be > 0, got {self.measured_latency_s}"
            )


def arithmetic_intensity(flop_count: float, byte_count: float) -> float:
    """FLOPs per byte of memory traffic."""
    if byte_count <= 0:
        raise ConfigError(f"arithmetic intensity undefined for {byte_count} bytes")
    return flop_count / byte_count


def sol_latency(cost: CostBreakdown, profile: HardwareProfile, engine: EngineClass) -> SolResult:
    """Speed-of-light latency of one layer on one engine.

    Ties between the compute and memory term classify as compute-bound.
    """
    peak = profile.peak_for(engine)
    compute_s = cost.flops / peak
    memory_s = cost.total_bytes / profile.peak_mem_bw
    bound = Boundedness.COMPUTE if compute_s >= memory_s else Boundedness.MEMORY
    return SolResult(
        latency_s=max(compute_s, memory_s),
        ai=arithmetic_intensity(cost.flops, cost.total_bytes),
        bound=bound,
        engine=engine,
        flops=cost.flops,
        bytes=cost.total_bytes,
    )


def resolve_engine_map(overrides: Mapping[str, EngineClass] | None = None) -> dict[str, EngineClass]:
    """Default engine map with per-family overrides applied."""
    merged = dict(DEFAULT_ENGINE_MAP)
    for family, engine in (overrides or {}).items():
        if family not in merged:
            raise ConfigError(
                f"unknown pattern family '{family}' in engine map "
                f"(expected one of: {', '.join(merged)})"
            )
        merged[family] = engine
    return merged


def model_sol(
    graph: ModelGraph,
    config: SparsityConfig,
    profile: HardwareProfile,
    widths: DTypeWidths = DTypeWidths(),
    engine_map: Mapping[str, EngineClass] | None = None,
) -> ModelSol:
    """Speed-of-light latency of a whole model under one sparsity config.

    Prunable layers are costed under ``config``; non-prunable layers are
    costed dense, so dense and sparse runs always sum the same layer set.
    """
    engines = resolve_engine_map(engine_map)
    per_layer = []
    for layer in graph.layers:
        layer_config = config if layer.prunable else dense()
        try:
            shape = lower_layer(layer, graph.batch)
            inst = instantiate(layer_config, shape)
        except ConfigError as exc:
            raise ConfigError(f"model '{graph.name}', layer '{layer.id}': {exc}") from None
        cost = bytes_moved(inst, widths)
        per_layer.append((layer.id, sol_latency(cost, profile, engines[layer_config.family])))
    return ModelSol(model=graph.name, config=config, per_layer=tuple(per_layer))


def speedup_at_sol(dense_sol: ModelSol, sparse_sol: ModelSol) -> SpeedupRecord:
    """Speedup of a sparse run over its dense baseline at speed of light."""
    d, s = dense_sol.total_latency_s, sparse_sol.total_latency_s
    if d <= 0 or s <= 0:
        raise ConfigError(f"model latencies must be > 0, got dense={d}, sparse={s}")
    return SpeedupRecord(
        model=dense_sol.model, config=sparse_sol.config, dense_sol_s=d, sparse_sol_s=s
    )


def _latency_of(sol: Union[SolResult, ModelSol, float]) -> float:
    if isinstance(sol, SolResult):
        return sol.latency_s
    if isinstance(sol, ModelSol):
        return sol.total_latency_s
    return float(sol)


def percent_of_sol(sol: Union[SolResult, ModelSol, float], measured: Measurement) -> float:
    """Fraction of speed of light a measured kernel achieves (1.0 = optimal).

    Values above 1 + SOL_TOLERANCE mean the measurement beat the speed of
    light and are rejected as inconsistent data.
    """
    sol_s = _latency_of(sol)
    if sol_s <= 0:
        raise ConfigError(f"speed-of-light latency must be > 0, got {sol_s}")
    ratio = sol_s / measured.measured_latency_s
    if ratio > 1.0 + SOL_TOLERANCE:
        raise InconsistencyError(
            f"'{measured.scope}' ({measured.config.token}): measured {measured.measured_latency_s:.6g} s "
            f"is faster than the speed of light {sol_s:.6g} s by more than {SOL_TOLERANCE:.0%}"
        )
    return ratio


def roofline_point(cost: CostBreakdown, measured: Measurement) -> tuple[float, float]:
    """(arithmetic intensity, achieved FLOP/s) for a measured kernel."""
    ai = arithmetic_intensity(cost.flops, cost.total_bytes)
    achieved = cost.flops / measured.measured_latency_s
    return ai, achieved
