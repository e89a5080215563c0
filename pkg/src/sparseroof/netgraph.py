"""Network description: an ordered list of layers lowered to matmul shapes.

Only layers that lower to a (sparse weight) x (dense feature) matrix multiply
are representable: convolutions (as implicit GEMM), linear layers, and raw
matmuls. Normalization, activations, pooling and other non-matmul layers are
not part of a graph and never enter latency sums.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class MatmulShape:
    """The (m, k, n) problem a layer lowers to.

    The weight (sparse) operand is m x k; the feature (dense) operand is k x n.
    """

    m: int
    k: int
    n: int

    def __post_init__(self):
        for name in ("m", "k", "n"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"matmul dimension {name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class Conv:
    c_in: int
    c_out: int
    kernel_h: int
    kernel_w: int
    stride: int
    padding: int
    in_h: int
    in_w: int

    def __post_init__(self):
        for name in ("c_in", "c_out", "kernel_h", "kernel_w", "stride", "in_h", "in_w"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"conv field {name} must be a positive integer, got {v!r}")
        if not isinstance(self.padding, int) or self.padding < 0:
            raise ConfigError(f"conv field padding must be a non-negative integer, got {self.padding!r}")

    def output_hw(self) -> tuple[int, int]:
        out_h = (self.in_h + 2 * self.padding - self.kernel_h) // self.stride + 1
        out_w = (self.in_w + 2 * self.padding - self.kernel_w) // self.stride + 1
        return out_h, out_w


@dataclass(frozen=True)
class Linear:
    in_features: int
    out_features: int
    tokens_per_sample: int = 1

    def __post_init__(self):
        for name in ("in_features", "out_features", "tokens_per_sample"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"linear field {name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class RawMatmul:
    m: int
    k: int
    n_per_sample: int

    def __post_init__(self):
        for name in ("m", "k", "n_per_sample"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"matmul field {name} must be a positive integer, got {v!r}")


LayerKind = Conv | Linear | RawMatmul


@dataclass(frozen=True)
class LayerSpec:
    id: str
    kind: LayerKind
    prunable: bool = True


@dataclass(frozen=True)
class ModelGraph:
    name: str
    layers: tuple[LayerSpec, ...]
    batch: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not isinstance(self.batch, int) or self.batch < 1:
            raise ConfigError(f"model '{self.name}': batch must be a positive integer, got {self.batch!r}")
        seen = set()
        for layer in self.layers:
            if layer.id in seen:
                raise ConfigError(f"model '{self.name}': duplicate layer id '{layer.id}'")
            seen.add(layer.id)
        if not any(layer.prunable for layer in self.layers):
            raise ConfigError(f"model '{self.name}': no prunable layers")

    def with_batch(self, batch: int) -> "ModelGraph":
        return replace(self, batch=batch)

    def layer(self, layer_id: str) -> LayerSpec:
        for layer in self.layers:
            if layer.id == layer_id:
                return layer
        raise ConfigError(f"model '{self.name}': no layer with id '{layer_id}'")


def lower_layer(layer: LayerSpec, batch: int) -> MatmulShape:
    """Lower a layer to its matmul shape at a batch size.

    Convolutions lower as implicit GEMM (im2col shape): m = c_out,
    k = c_in * kernel_h * kernel_w, n = batch * out_h * out_w. The im2col
    buffer itself is never charged; features are charged once as n x k.
    """
    if batch < 1:
        raise ConfigError(f"batch must be >= 1, got {batch}")
    kind = layer.kind
    if isinstance(kind, Conv):
        out_h, out_w = kind.output_hw()
        if out_h < 1 or out_w < 1:
            raise ConfigError(
                f"layer '{layer.id}': invalid geometry, output spatial size "
                f"{out_h}x{out_w} (input {kind.in_h}x{kind.in_w}, kernel "
                f"{kind.kernel_h}x{kind.kernel_w}, stride {kind.stride}, padding {kind.padding})"
            )
        return MatmulShape(
            m=kind.c_out,
            k=kind.c_in * kind.kernel_h * kind.kernel_w,
            n=batch * out_h * out_w,
        )
    if isinstance(kind, Linear):
        return MatmulShape(m=kind.out_features, k=kind.in_features, n=batch * kind.tokens_per_sample)
    if isinstance(kind, RawMatmul):
        return MatmulShape(m=kind.m, k=kind.k, n=batch * kind.n_per_sample)
    raise ConfigError(f"layer '{layer.id}': unsupported layer kind {type(kind).__name__}")


_CONV_FIELDS = {"c_in", "c_out", "kernel_h", "kernel_w", "stride", "padding", "in_h", "in_w"}
_LINEAR_FIELDS = {"in_features", "out_features", "tokens_per_sample"}
_MATMUL_FIELDS = {"m", "k", "n_per_sample"}


def _parse_layer(entry: dict, source: str) -> LayerSpec:
    if not isinstance(entry, dict):
        raise ConfigError(f"{source}: each layer must be an object, got {type(entry).__name__}")
    layer_id = entry.get("id")
    if not isinstance(layer_id, str) or not layer_id:
        raise ConfigError(f"{source}: layer missing non-empty string 'id'")
    kind_token = entry.get("kind")
    prunable = entry.get("prunable", True)
    if not isinstance(prunable, bool):
        raise ConfigError(f"{source}: layer '{layer_id}': 'prunable' must be a boolean")

    def _ints(fields: set[str], defaults: dict | None = None) -> dict:
        values = dict(defaults or {})
        for f in fields:
            if f in entry:
                v = entry[f]
                if not isinstance(v, int) or isinstance(v, bool):
                    raise ConfigError(f"{source}: layer '{layer_id}': field '{f}' must be an integer")
                values[f] = v
        missing = fields - set(values)
        if missing:
            raise ConfigError(
                f"{source}: layer '{layer_id}': missing field(s) {', '.join(sorted(missing))}"
            )
        return values

    try:
        if kind_token == "conv":
            if entry.get("groups", 1) != 1:
                raise ConfigError(
                    f"{source}: layer '{layer_id}': grouped/depthwise convolution is not supported"
                )
            kind = Conv(**_ints(_CONV_FIELDS, defaults={"stride": 1, "padding": 0}))
        elif kind_token == "linear":
            kind = Linear(**_ints(_LINEAR_FIELDS, defaults={"tokens_per_sample": 1}))
        elif kind_token == "matmul":
            kind = RawMatmul(**_ints(_MATMUL_FIELDS))
        else:
            raise ConfigError(
                f"{source}: layer '{layer_id}': unknown kind {kind_token!r} "
                "(expected 'conv', 'linear', or 'matmul')"
            )
    except ConfigError as exc:
        # Re-raise dimension validation errors with the layer id attached.
        if f"'{layer_id}'" in str(exc):
            raise
        raise ConfigError(f"{source}: layer '{layer_id}': {exc}") from None
    return LayerSpec(id=layer_id, kind=kind, prunable=prunable)


def parse_model_spec(data: dict, source: str = "<model spec>") -> ModelGraph:
    """Build a validated ModelGraph from decoded JSON data."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: model spec must be a JSON object")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{source}: missing non-empty string 'name'")
    batch = data.get("batch", 1)
    layers_raw = data.get("layers")
    if not isinstance(layers_raw, list) or not layers_raw:
        raise ConfigError(f"{source}: 'layers' must be a non-empty list")
    layers = tuple(_parse_layer(entry, source) for entry in layers_raw)
    try:
        graph = ModelGraph(name=name, layers=layers, batch=batch)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    # Surface invalid conv geometry at load time rather than first lowering.
    for layer in graph.layers:
        lower_layer(layer, graph.batch)
    return graph


def load_model_spec(path: str | Path) -> ModelGraph:
    """Load and validate a model spec (JSON) from disk."""
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read model spec '{p}': {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model spec '{p}': invalid JSON: {exc}") from exc
    return parse_model_spec(data, source=str(p))


def builtin_model_path(name: str) -> Path:
    """Path of a model spec shipped with the package (e.g. ``convnext_tiny``)."""
    root = Path(__file__).parent / "data" / "models"
    candidate = root / f"{name}.json"
    if not candidate.is_file():
        known = ", ".join(sorted(f.stem for f in root.glob("*.json")))
        raise ConfigError(f"no builtin model spec '{name}' (available: {known})")
    return candidate


def resolve_model_spec(spec: str | Path) -> ModelGraph:
    """Load a model spec from a path, or from the builtin set when ``spec`` is a bare name."""
    p = Path(spec)
    if p.is_file():
        return load_model_spec(p)
    if p.suffix == "" and "/" not in str(spec):
        return load_model_spec(builtin_model_path(str(spec)))
    raise ConfigError(f"model spec not found: '{spec}'")
