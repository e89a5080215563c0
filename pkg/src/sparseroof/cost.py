"""Storage and traffic costs of dense and sparse weight formats.

For a sparse (m x k) weight times dense (k x n) feature multiply, the model
charges 2 FLOPs per stored multiply-accumulate and counts bytes moved as
stored weight values + format index data + input features (n x k) + output
features (m x n). Index data depends on the format: CSR carries one column
index per nonzero plus m + 1 row pointers, BSR one index per block plus
m/b_h + 1 block-row pointers, and N:M packs log2(M) bits per nonzero with
no pointers at all.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ConfigError
from .netgraph import MatmulShape


@dataclass(frozen=True)
class Dense:
    pass


@dataclass(frozen=True)
class Unstructured:
    pass


@dataclass(frozen=True)
class Block:
    b_h: int
    b_w: int

    def __post_init__(self):
        if self.b_h < 1 or self.b_w < 1:
            raise ConfigError(f"block dims must be >= 1, got {self.b_h}x{self.b_w}")


@dataclass(frozen=True)
class NofM:
    n_keep: int
    m_group: int

    def __post_init__(self):
        if not (1 <= self.n_keep < self.m_group):
            raise ConfigError(
                f"N:M pattern requires 1 <= N < M, got {self.n_keep}:{self.m_group}"
            )

    @property
    def level(self) -> float:
        return 1.0 - self.n_keep / self.m_group


Pattern = Dense | Unstructured | Block | NofM


@dataclass(frozen=True)
class SparsityConfig:
    """A sparsity pattern plus the fraction of zero weights it removes."""

    pattern: Pattern
    level: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.level < 1.0):
            raise ConfigError(f"sparsity level must be in [0, 1), got {self.level}")
        if isinstance(self.pattern, Dense) and self.level != 0.0:
            raise ConfigError(f"dense pattern requires level 0, got {self.level}")
        if isinstance(self.pattern, NofM) and self.level != self.pattern.level:
            raise ConfigError(
                f"{self.pattern.n_keep}:{self.pattern.m_group} pattern fixes the level at "
                f"{self.pattern.level}, got {self.level}"
            )

    @property
    def family(self) -> str:
        """Pattern family token: dense, unstructured, block, or nm."""
        return _FAMILY[type(self.pattern)]

    @property
    def pattern_token(self) -> str:
        """Structural encoding without the level, e.g. ``block:4x4`` or ``nm:2:4``."""
        p = self.pattern
        if isinstance(p, Block):
            return f"block:{p.b_h}x{p.b_w}"
        if isinstance(p, NofM):
            return f"nm:{p.n_keep}:{p.m_group}"
        return self.family

    @property
    def token(self) -> str:
        """Full CLI encoding, e.g. ``unstructured:0.875`` or ``nm:2:4``."""
        p = self.pattern
        if isinstance(p, Dense):
            return "dense"
        if isinstance(p, NofM):
            return self.pattern_token
        return f"{self.pattern_token}:{self.level:g}"


_FAMILY = {Dense: "dense", Unstructured: "unstructured", Block: "block", NofM: "nm"}


def dense() -> SparsityConfig:
    return SparsityConfig(Dense(), 0.0)


def unstructured(level: float) -> SparsityConfig:
    return SparsityConfig(Unstructured(), level)


def block(b_h: int, b_w: int, level: float) -> SparsityConfig:
    return SparsityConfig(Block(b_h, b_w), level)


def n_of_m(n_keep: int, m_group: int) -> SparsityConfig:
    pattern = NofM(n_keep, m_group)
    return SparsityConfig(pattern, pattern.level)


_BLOCK_RE = re.compile(r"^block:(\d+)x(\d+):([0-9.eE+-]+)$")
_UNSTRUCTURED_RE = re.compile(r"^unstructured:([0-9.eE+-]+)$")
_NM_RE = re.compile(r"^nm:(\d+):(\d+)$")


def parse_sparsity(text: str) -> SparsityConfig:
    """Parse a CLI encoding: ``dense``, ``unstructured:0.875``, ``block:4x4:0.875``, ``nm:2:4``."""
    token = text.strip()
    if token == "dense":
        return dense()
    m = _UNSTRUCTURED_RE.match(token)
    if m:
        return unstructured(float(m.group(1)))
    m = _BLOCK_RE.match(token)
    if m:
        return block(int(m.group(1)), int(m.group(2)), float(m.group(3)))
    m = _NM_RE.match(token)
    if m:
        return n_of_m(int(m.group(1)), int(m.group(2)))
    raise ConfigError(
        f"cannot parse sparsity config '{text}' (expected dense, unstructured:<level>, "
        "block:<h>x<w>:<level>, or nm:<n>:<m>)"
    )


def parse_pattern_token(pattern: str, level: float) -> SparsityConfig:
    """Combine a structural pattern token with a level column (measurement/accuracy CSVs)."""
    token = pattern.strip()
    if token == "dense":
        if level != 0.0:
            raise ConfigError(f"dense pattern requires level 0, got {level}")
        return dense()
    if token == "unstructured":
        return unstructured(level)
    m = re.match(r"^block:(\d+)x(\d+)$", token)
    if m:
        return block(int(m.group(1)), int(m.group(2)), level)
    m = _NM_RE.match(token)
    if m:
        cfg = n_of_m(int(m.group(1)), int(m.group(2)))
        if abs(level - cfg.level) > 1e-9:
            raise ConfigError(
                f"pattern '{token}' fixes the level at {cfg.level:g}, got {level:g}"
            )
        return cfg
    raise ConfigError(
        f"cannot parse pattern token '{pattern}' (expected dense, unstructured, "
        "block:<h>x<w>, or nm:<n>:<m>)"
    )


@dataclass(frozen=True)
class DTypeWidths:
    """Bytes per stored value, per column/block index, and per row pointer."""

    value_bytes: int = 2
    index_bytes: int = 4
    pointer_bytes: int = 4

    def __post_init__(self):
        for name in ("value_bytes", "index_bytes", "pointer_bytes"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class FormatInstance:
    """Concrete element counts a sparsity config implies on one matmul shape.

    ``stored_nnz`` counts stored weight values including any zero fill inside
    kept blocks or N:M slots.
    """

    config: SparsityConfig
    shape: MatmulShape
    stored_nnz: int
    index_elements: int
    pointer_elements: int
    index_bits_per_nnz: float = 0.0

    def __post_init__(self):
        if not (0 <= self.stored_nnz <= self.shape.m * self.shape.k):
            raise ConfigError(
                f"stored_nnz {self.stored_nnz} outside [0, {self.shape.m * self.shape.k}]"
            )
        p = self.config.pattern
        if isinstance(p, Block) and self.stored_nnz % (p.b_h * p.b_w) != 0:
            raise ConfigError(
                f"block instance stored_nnz {self.stored_nnz} is not a multiple of "
                f"{p.b_h}x{p.b_w}"
            )
        if isinstance(p, Dense) and (
            self.stored_nnz != self.shape.m * self.shape.k
            or self.index_elements or self.pointer_elements
        ):
            raise ConfigError("dense instance must store all m*k values with no index data")


@dataclass(frozen=True)
class CostBreakdown:
    """FLOPs and itemized bytes moved for one layer under one format."""

    flops: int
    weight_value_bytes: int
    index_bytes: int
    input_feature_bytes: int
    output_feature_bytes: int

    def __post_init__(self):
        for name in ("flops", "weight_value_bytes", "index_bytes",
                     "input_feature_bytes", "output_feature_bytes"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def feature_bytes(self) -> int:
        return self.input_feature_bytes + self.output_feature_bytes

    @property
    def total_bytes(self) -> int:
        return (
            self.weight_value_bytes
            + self.index_bytes
            + self.input_feature_bytes
            + self.output_feature_bytes
        )


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def instantiate(config: SparsityConfig, shape: MatmulShape) -> FormatInstance:
    """Compute stored element counts for a config on a shape.

    Unstructured maps to CSR, block to BSR (level quantized to whole blocks,
    zero fill stored and computed), N:M to the hardware-indexed format with
    log2(M)-bit offsets and no pointers.
    """
    m, k = shape.m, shape.k
    p = config.pattern
    if isinstance(p, Dense):
        return FormatInstance(config, shape, stored_nnz=m * k, index_elements=0, pointer_elements=0)
    if isinstance(p, Unstructured):
        stored = min(max(_round_half_up((1.0 - config.level) * m * k), 0), m * k)
        return FormatInstance(
            config, shape, stored_nnz=stored, index_elements=stored, pointer_elements=m + 1
        )
    if isinstance(p, Block):
        if m % p.b_h != 0 or k % p.b_w != 0:
            raise ConfigError(
                f"block {p.b_h}x{p.b_w} does not tile a {m}x{k} weight "
                f"(need {p.b_h} | {m} and {p.b_w} | {k})"
            )
        nblocks_total = (m // p.b_h) * (k // p.b_w)
        blocks = min(max(_round_half_up((1.0 - config.level) * nblocks_total), 0), nblocks_total)
        return FormatInstance(
            config,
            shape,
            stored_nnz=blocks * p.b_h * p.b_w,
            index_elements=blocks,
            pointer_elements=m // p.b_h + 1,
        )
    if isinstance(p, NofM):
        if k % p.m_group != 0:
            raise ConfigError(
                f"{p.n_keep}:{p.m_group} pattern requires {p.m_group} | k, got k={k}"
            )
        stored = m * (k // p.m_group) * p.n_keep
        return FormatInstance(
            config,
            shape,
            stored_nnz=stored,
            index_elements=0,
            pointer_elements=0,
            index_bits_per_nnz=math.log2(p.m_group),
        )
    raise ConfigError(f"unsupported pattern {type(p).__name__}")


def flops(inst: FormatInstance) -> int:
    """FLOPs for the multiply: 2 per stored multiply-accumulate, i.e. 2 * stored_nnz * n."""
    return 2 * inst.stored_nnz * inst.shape.n


def bytes_moved(inst: FormatInstance, widths: DTypeWidths = DTypeWidths()) -> CostBreakdown:
    """Itemized bytes read/written for one execution of the layer."""
    shape = inst.shape
    packed_index = math.ceil(inst.stored_nnz * inst.index_bits_per_nnz / 8)
    return CostBreakdown(
        flops=flops(inst),
        weight_value_bytes=inst.stored_nnz * widths.value_bytes,
        index_bytes=(
            inst.index_elements * widths.index_bytes
            + inst.pointer_elements * widths.pointer_bytes
            + packed_index
        ),
        input_feature_bytes=shape.n * shape.k * widths.value_bytes,
        output_feature_bytes=shape.m * shape.n * widths.value_bytes,
    )


def sparsity_sweep(start_level: float, steps: int) -> list[float]:
    """Level schedule that halves the surviving nonzeros at each step.

    s_{i+1} = s_i + (1 - s_i) / 2, starting from ``start_level``.
    """
    if not (0.0 < start_level < 1.0):
        raise ConfigError(f"start level must be in (0, 1), got {start_level}")
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    levels = [start_level]
    for _ in range(steps - 1):
        s = levels[-1]
        levels.append(s + (1.0 - s) / 2.0)
    return levels
