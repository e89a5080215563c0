"""Pruned-weight matrix ingestion (MatrixMarket) and traffic statistics.

Reads coordinate-format files as produced for the SuiteSparse collection,
keeps only the nonzero positions (values are irrelevant to the cost model;
explicitly stored zeros still occupy storage and count), and derives exact
format instances and block-occupancy statistics from the explicit pattern.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .cost import (
    Block,
    Dense,
    DTypeWidths,
    FormatInstance,
    NofM,
    SparsityConfig,
    Unstructured,
    bytes_moved,
    dense,
    instantiate,
)
from .errors import ConfigError, DataError
from .netgraph import MatmulShape, ModelGraph, lower_layer


@dataclass(frozen=True)
class SparsePattern:
    """Nonzero positions of one matrix, 0-based, unique, in-bounds."""

    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.rows.size)

    @property
    def level(self) -> float:
        """Fraction of zero entries."""
        return 1.0 - self.nnz / (self.nrows * self.ncols)

    def coords(self) -> list[tuple[int, int]]:
        """Coordinates in row-major order (normalized, for comparisons)."""
        order = np.lexsort((self.cols, self.rows))
        return list(zip(self.rows[order].tolist(), self.cols[order].tolist()))


@dataclass(frozen=True)
class BlockOccupancy:
    """How many b_h x b_w tiles hold at least one nonzero, and how full they are."""

    b_h: int
    b_w: int
    nonzero_blocks: int
    fill_ratio: float


_FIELDS = {"real", "pattern"}


def read_matrix_market(path: str | Path) -> SparsePattern:
    """Parse a coordinate-format MatrixMarket file into a SparsePattern.

    Accepts ``real`` and ``pattern`` fields with ``general`` symmetry;
    1-based indices are converted to 0-based. Malformed headers, out-of-range
    coordinates, and duplicate entries are rejected.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read matrix file '{p}': {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"matrix file '{p}' is not a text file: {exc}") from exc

    lines = text.splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise DataError(f"{p}:1: missing '%%MatrixMarket' header banner")
    banner = lines[0].split()
    if len(banner) != 5 or banner[1] != "matrix":
        raise DataError(f"{p}:1: malformed header banner '{lines[0]}'")
    _, _, layout, field, symmetry = banner
    if layout != "coordinate":
        raise DataError(f"{p}:1: unsupported layout '{layout}' (only 'coordinate')")
    if field not in _FIELDS:
        raise DataError(f"{p}:1: unsupported field '{field}' (only 'real' or 'pattern')")
    if symmetry != "general":
        raise DataError(f"{p}:1: unsupported symmetry '{symmetry}' (only 'general')")

    # Locate the size line: first non-comment line after the banner.
    size_lineno = None
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        size_lineno = lineno
        break
    if size_lineno is None:
        raise DataError(f"{p}: missing size line")
    parts = lines[size_lineno - 1].split()
    if len(parts) != 3:
        raise DataError(f"{p}:{size_lineno}: size line must be 'nrows ncols nnz'")
    try:
        nrows, ncols, nnz = (int(x) for x in parts)
    except ValueError:
        raise DataError(f"{p}:{size_lineno}: size line must hold three integers") from None
    if nrows < 1 or ncols < 1 or nnz < 0:
        raise DataError(f"{p}:{size_lineno}: invalid sizes {nrows} {ncols} {nnz}")

    body = "\n".join(lines[size_lineno:])
    expected_cols = 2 if field == "pattern" else 3
    if nnz == 0:
        data = np.empty((0, expected_cols))
    else:
        try:
            data = np.loadtxt(io.StringIO(body), comments="%", ndmin=2)
        except ValueError as exc:
            raise DataError(f"{p}: malformed entry after line {size_lineno}: {exc}") from None
    if data.shape[0] != nnz:
        raise DataError(f"{p}: size line declares {nnz} entries, found {data.shape[0]}")
    if nnz > 0 and data.shape[1] != expected_cols:
        raise DataError(
            f"{p}: '{field}' entries must have {expected_cols} columns, found {data.shape[1]}"
        )

    rows = data[:, 0].astype(np.int64) - 1
    cols = data[:, 1].astype(np.int64) - 1
    if nnz > 0 and (data[:, :2] != np.stack([rows, cols], axis=1) + 1).any():
        raise DataError(f"{p}: coordinates must be integers")

    bad = (rows < 0) | (rows >= nrows) | (cols < 0) | (cols >= ncols)
    if bad.any():
        i = int(np.argmax(bad))
        raise DataError(
            f"{p}: entry {i + 1}: coordinate ({rows[i] + 1}, {cols[i] + 1}) out of range "
            f"for a {nrows}x{ncols} matrix"
        )
    dup_key = _kernels.first_duplicate(rows * np.int64(ncols) + cols, nrows * ncols)
    if dup_key >= 0:
        r, c = divmod(int(dup_key), ncols)
        raise DataError(f"{p}: duplicate entry at coordinate ({r + 1}, {c + 1})")

    return SparsePattern(nrows=nrows, ncols=ncols, rows=rows, cols=cols)


def write_matrix_market(pattern: SparsePattern, path: str | Path) -> Path:
    """Serialize a pattern in coordinate/pattern format, row-major order."""
    p = Path(path)
    order = np.lexsort((pattern.cols, pattern.rows))
    lines = ["%%MatrixMarket matrix coordinate pattern general",
             f"{pattern.nrows} {pattern.ncols} {pattern.nnz}"]
    for r, c in zip(pattern.rows[order], pattern.cols[order]):
        lines.append(f"{r + 1} {c + 1}")
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def block_occupancy(pattern: SparsePattern, b_h: int, b_w: int) -> BlockOccupancy:
    """Count tiles holding at least one nonzero; fill_ratio = nnz / stored slots.

    An empty pattern reports zero blocks with fill_ratio 1.0 by convention.
    """
    if b_h < 1 or b_w < 1:
        raise ConfigError(f"block dims must be >= 1, got {b_h}x{b_w}")
    if pattern.nrows % b_h != 0 or pattern.ncols % b_w != 0:
        raise ConfigError(
            f"block {b_h}x{b_w} does not tile a {pattern.nrows}x{pattern.ncols} matrix"
        )
    blocks = _kernels.count_occupied_blocks(
        pattern.rows, pattern.cols, b_h, b_w, pattern.nrows // b_h, pattern.ncols // b_w
    )
    fill = pattern.nnz / (blocks * b_h * b_w) if blocks > 0 else 1.0
    return BlockOccupancy(b_h=b_h, b_w=b_w, nonzero_blocks=blocks, fill_ratio=fill)


def instance_from_pattern(pattern: SparsePattern, config: SparsityConfig) -> FormatInstance:
    """Exact element counts for storing an explicit pattern in a format.

    CSR counts come straight from nnz; BSR stores whole occupied blocks
    (zero fill included); N:M patterns are validated group by group and
    stored at full slot capacity. The level is back-computed from the
    pattern for unstructured and block configs.
    """
    shape = MatmulShape(m=pattern.nrows, k=pattern.ncols, n=1)
    p = config.pattern
    if pattern.nnz == 0 and not isinstance(p, Dense):
        raise DataError(
            "pattern has no nonzeros; level 1 is outside the representable range [0, 1)"
        )
    if isinstance(p, Dense):
        return FormatInstance(config, shape, stored_nnz=pattern.nrows * pattern.ncols,
                              index_elements=0, pointer_elements=0)
    if isinstance(p, Unstructured):
        cfg = SparsityConfig(Unstructured(), pattern.level)
        return FormatInstance(cfg, shape, stored_nnz=pattern.nnz,
                              index_elements=pattern.nnz,
                              pointer_elements=pattern.nrows + 1)
    if isinstance(p, Block):
        occ = block_occupancy(pattern, p.b_h, p.b_w)
        cfg = SparsityConfig(p, pattern.level)
        return FormatInstance(cfg, shape,
                              stored_nnz=occ.nonzero_blocks * p.b_h * p.b_w,
                              index_elements=occ.nonzero_blocks,
                              pointer_elements=pattern.nrows // p.b_h + 1)
    if isinstance(p, NofM):
        if pattern.ncols % p.m_group != 0:
            raise ConfigError(
                f"{p.n_keep}:{p.m_group} pattern requires {p.m_group} | ncols, "
                f"got ncols={pattern.ncols}"
            )
        ngroup_cols = pattern.ncols // p.m_group
        row, group = _kernels.first_nm_violation(
            pattern.rows, pattern.cols, p.n_keep, p.m_group, ngroup_cols, pattern.nrows
        )
        if row >= 0:
            c0 = group * p.m_group
            raise DataError(
                f"pattern violates {p.n_keep}:{p.m_group} structure at row {row}, "
                f"group {group} (columns {c0}..{c0 + p.m_group - 1} hold more than "
                f"{p.n_keep} nonzeros)"
            )
        return instantiate(config, shape)
    raise ConfigError(f"unsupported pattern {type(p).__name__}")


@dataclass(frozen=True)
class LayerTraffic:
    layer_id: str
    weight_bytes: int  # stored values + all index data
    feature_bytes: int  # input n*k + output m*n


@dataclass(frozen=True)
class TrafficBreakdown:
    """Weight-vs-feature memory traffic per layer and summed per model."""

    model: str
    batch: int
    per_layer: tuple[LayerTraffic, ...]

    @property
    def weight_bytes(self) -> int:
        return sum(t.weight_bytes for t in self.per_layer)

    @property
    def feature_bytes(self) -> int:
        return sum(t.feature_bytes for t in self.per_layer)

    @property
    def feature_share(self) -> float:
        """Fraction of all traffic that pruning can never remove."""
        total = self.weight_bytes + self.feature_bytes
        return self.feature_bytes / total


def traffic_breakdown(
    graph: ModelGraph,
    config: SparsityConfig,
    widths: DTypeWidths = DTypeWidths(),
    batch: int | None = None,
) -> TrafficBreakdown:
    """Itemize weight vs. feature bytes for every layer at a batch size.

    Feature traffic scales with the batch while weight traffic does not, so
    the feature share grows with batch size regardless of pruning.
    """
    b = graph.batch if batch is None else batch
    per_layer = []
    for layer in graph.layers:
        layer_config = config if layer.prunable else dense()
        try:
            shape = lower_layer(layer, b)
            inst = instantiate(layer_config, shape)
        except ConfigError as exc:
            raise ConfigError(f"model '{graph.name}', layer '{layer.id}': {exc}") from None
        cost = bytes_moved(inst, widths)
        per_layer.append(
            LayerTraffic(
                layer_id=layer.id,
                weight_bytes=cost.weight_value_bytes + cost.index_bytes,
                feature_bytes=cost.feature_bytes,
            )
        )
    return TrafficBreakdown(model=graph.name, batch=b, per_layer=tuple(per_layer))
