"""Coordinate-scan kernels for sparse patterns.

These are the only hot loops in the package: profiling a pruned-matrix corpus
visits every stored coordinate once per statistic. Each kernel has a numba
fast path and a pure-numpy fallback; set SPARSEROOF_NO_NUMBA=1 to force the
numpy path (the fallback is also used automatically when numba is missing).
numba is imported lazily so that commands which never touch matrix files do
not pay its import cost.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "SPARSEROOF_NO_NUMBA"

# The numba duplicate scan marks seen keys in a dense bool array, so it only
# pays off while nrows * ncols stays small enough to allocate; weight matrices
# are a few million entries at most. Past this limit the numpy sort path wins.
DENSE_UNIVERSE_LIMIT = 1 << 26

_numba_impls: dict | None = None
_numba_failed = False


def numba_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes"}


# -- numpy implementations ---------------------------------------------------

def count_occupied_blocks_np(rows: np.ndarray, cols: np.ndarray, b_h: int, b_w: int,
                             nblock_cols: int) -> int:
    if rows.size == 0:
        return 0
    ids = (rows // b_h) * np.int64(nblock_cols) + cols // b_w
    return int(np.unique(ids).size)


def first_duplicate_np(keys: np.ndarray) -> int:
    """Some duplicated key, or -1. Which duplicate is reported is unspecified."""
    if keys.size < 2:
        return -1
    ordered = np.sort(keys)
    dup = np.nonzero(ordered[1:] == ordered[:-1])[0]
    return int(ordered[dup[0]]) if dup.size else -1


def first_nm_violation_np(rows: np.ndarray, cols: np.ndarray, n_keep: int, m_group: int,
                          ngroup_cols: int, nrows: int) -> tuple[int, int]:
    """First group (row-major) holding more than n_keep nonzeros, or (-1, -1)."""
    if rows.size == 0:
        return (-1, -1)
    gids = rows * np.int64(ngroup_cols) + cols // m_group
    counts = np.bincount(gids, minlength=nrows * ngroup_cols)
    bad = counts > n_keep
    if not bad.any():
        return (-1, -1)
    g = int(np.argmax(bad))
    return (g // ngroup_cols, g % ngroup_cols)


# -- numba implementations (compiled on first use) ----------------------------

def _load_numba():
    global _numba_impls, _numba_failed
    if _numba_impls is not None or _numba_failed:
        return _numba_impls
    try:
        from numba import njit
    except ImportError:
        _numba_failed = True
        return None

    @njit(cache=True)
    def count_occupied_blocks_nb(rows, cols, b_h, b_w, nblock_cols, nblock_rows):
        seen = np.zeros(nblock_rows * nblock_cols, dtype=np.bool_)
        count = 0
        for i in range(rows.size):
            bid = (rows[i] // b_h) * nblock_cols + cols[i] // b_w
            if not seen[bid]:
                seen[bid] = True
                count += 1
        return count

    @njit(cache=True)
    def first_duplicate_nb(keys, universe):
        seen = np.zeros(universe, dtype=np.bool_)
        for i in range(keys.size):
            k = keys[i]
            if seen[k]:
                return k
            seen[k] = True
        return np.int64(-1)

    @njit(cache=True)
    def first_nm_violation_nb(rows, cols, n_keep, m_group, ngroup_cols, nrows):
        counts = np.zeros(nrows * ngroup_cols, dtype=np.int64)
        for i in range(rows.size):
            counts[rows[i] * ngroup_cols + cols[i] // m_group] += 1
        for g in range(counts.size):
            if counts[g] > n_keep:
                return (g // ngroup_cols, g % ngroup_cols)
        return (-1, -1)

    _numba_impls = {
        "count_occupied_blocks": count_occupied_blocks_nb,
        "first_duplicate": first_duplicate_nb,
        "first_nm_violation": first_nm_violation_nb,
    }
    return _numba_impls


def _impls():
    if not numba_disabled():
        impls = _load_numba()
        if impls is not None:
            return impls
    return None


# -- dispatching entry points --------------------------------------------------

def count_occupied_blocks(rows: np.ndarray, cols: np.ndarray, b_h: int, b_w: int,
                          nblock_rows: int, nblock_cols: int) -> int:
    impls = _impls()
    if impls is not None and rows.size > 0:
        return int(impls["count_occupied_blocks"](rows, cols, b_h, b_w, nblock_cols, nblock_rows))
    return count_occupied_blocks_np(rows, cols, b_h, b_w, nblock_cols)


def first_duplicate(keys: np.ndarray, universe: int) -> int:
    """Some duplicated key, or -1. ``universe`` bounds the key range [0, universe)."""
    impls = _impls()
    if impls is not None and 2 <= keys.size and universe <= DENSE_UNIVERSE_LIMIT:
        return int(impls["first_duplicate"](keys, universe))
    return first_duplicate_np(keys)


def first_nm_violation(rows: np.ndarray, cols: np.ndarray, n_keep: int, m_group: int,
                       ngroup_cols: int, nrows: int) -> tuple[int, int]:
    impls = _impls()
    if impls is not None and rows.size > 0:
        r, g = impls["first_nm_violation"](rows, cols, n_keep, m_group, ngroup_cols, nrows)
        return (int(r), int(g))
    return first_nm_violation_np(rows, cols, n_keep, m_group, ngroup_cols, nrows)


def active_path() -> str:
    """Which implementation the dispatchers currently select: 'numba' or 'numpy'."""
    return "numba" if _impls() is not None else "numpy"
