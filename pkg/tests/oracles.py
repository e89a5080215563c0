"""Independent brute-force oracles used by the tests.

These deliberately materialize the actual storage arrays (or enumerate
every element) instead of reusing the package's counting formulas, so the
two routes can disagree when one is wrong.
"""

import numpy as np


def csr_arrays(mask: np.ndarray):
    """Materialize CSR (values, col_indices, row_ptr) from a boolean mask."""
    m, k = mask.shape
    values, col_idx, row_ptr = [], [], [0]
    for i in range(m):
        for j in range(k):
            if mask[i, j]:
                values.append(1.0)
                col_idx.append(j)
        row_ptr.append(len(values))
    return values, col_idx, row_ptr


def bsr_arrays(mask: np.ndarray, b_h: int, b_w: int):
    """Materialize BSR (scalars incl. zero fill, block col indices, block row ptr)."""
    m, k = mask.shape
    assert m % b_h == 0 and k % b_w == 0
    scalars, block_cols, block_ptr = [], [], [0]
    for bi in range(m // b_h):
        for bj in range(k // b_w):
            tile = mask[bi * b_h:(bi + 1) * b_h, bj * b_w:(bj + 1) * b_w]
            if tile.any():
                block_cols.append(bj)
                scalars.extend(float(x) for x in tile.reshape(-1))
        block_ptr.append(len(block_cols))
    return scalars, block_cols, block_ptr


def occupied_blocks(rows, cols, b_h: int, b_w: int) -> int:
    return len({(r // b_h, c // b_w) for r, c in zip(rows, cols)})


def first_nm_violation(rows, cols, n_keep: int, m_group: int, nrows: int, ncols: int):
    """First (row, group) in row-major order holding more than n_keep nonzeros."""
    counts = {}
    for r, c in zip(rows, cols):
        counts[(r, c // m_group)] = counts.get((r, c // m_group), 0) + 1
    for r in range(nrows):
        for g in range(ncols // m_group):
            if counts.get((r, g), 0) > n_keep:
                return (r, g)
    return (-1, -1)


def conv_mac_count(c_in, c_out, k_h, k_w, batch, out_h, out_w) -> int:
    """Count multiply-accumulates of a direct convolution by full enumeration."""
    macs = 0
    for _ in range(batch):
        for _ in range(c_out):
            for _ in range(out_h):
                for _ in range(out_w):
                    for _ in range(c_in):
                        for _ in range(k_h):
                            for _ in range(k_w):
                                macs += 1
    return macs
