"""Cross-checks the numba and numpy kernel paths against brute-force oracles."""

import numpy as np
import pytest

import oracles
from sparseroof import _kernels


def random_pattern(rng, nrows, ncols, density):
    mask = rng.random((nrows, ncols)) < density
    rows, cols = np.nonzero(mask)
    perm = rng.permutation(rows.size)  # file order is not sorted in general
    return rows[perm].astype(np.int64), cols[perm].astype(np.int64)


def numba_impls():
    impls = _kernels._load_numba()
    if impls is None:
        pytest.skip("numba unavailable")
    return impls


@pytest.mark.parametrize("path", ["numpy", "numba"])
def test_count_occupied_blocks(path):
    rng = np.random.default_rng(21)
    impls = numba_impls() if path == "numba" else None
    for _ in range(30):
        b_h = int(rng.choice([1, 2, 4, 8]))
        b_w = int(rng.choice([1, 2, 4, 8]))
        nrows = b_h * int(rng.integers(1, 12))
        ncols = b_w * int(rng.integers(1, 12))
        rows, cols = random_pattern(rng, nrows, ncols, float(rng.random()))
        expected = oracles.occupied_blocks(rows, cols, b_h, b_w)
        if path == "numpy":
            got = _kernels.count_occupied_blocks_np(rows, cols, b_h, b_w, ncols // b_w)
        else:
            got = int(impls["count_occupied_blocks"](
                rows, cols, b_h, b_w, ncols // b_w, nrows // b_h
            )) if rows.size else 0
        assert got == expected


@pytest.mark.parametrize("path", ["numpy", "numba"])
def test_first_duplicate(path):
    rng = np.random.default_rng(22)
    impls = numba_impls() if path == "numba" else None

    def run(keys):
        if path == "numpy":
            return _kernels.first_duplicate_np(keys)
        return int(impls["first_duplicate"](keys, 500)) if keys.size >= 2 else -1

    for _ in range(30):
        n = int(rng.integers(0, 200))
        keys = rng.integers(0, 500, size=n).astype(np.int64)
        got = run(keys)
        has_dup = len(set(keys.tolist())) != n
        if has_dup:
            assert got >= 0
            assert np.count_nonzero(keys == got) >= 2
        else:
            assert got == -1

    assert run(np.array([7, 7], dtype=np.int64)) == 7
    assert run(np.array([], dtype=np.int64)) == -1


@pytest.mark.parametrize("path", ["numpy", "numba"])
def test_first_nm_violation(path):
    rng = np.random.default_rng(23)
    impls = numba_impls() if path == "numba" else None
    for _ in range(40):
        m_group = int(rng.choice([2, 4, 8]))
        n_keep = int(rng.integers(1, m_group))
        nrows = int(rng.integers(1, 10))
        ncols = m_group * int(rng.integers(1, 10))
        rows, cols = random_pattern(rng, nrows, ncols, float(rng.random()))
        expected = oracles.first_nm_violation(rows, cols, n_keep, m_group, nrows, ncols)
        if path == "numpy":
            got = _kernels.first_nm_violation_np(rows, cols, n_keep, m_group,
                                                 ncols // m_group, nrows)
        elif rows.size == 0:
            got = (-1, -1)
        else:
            r, g = impls["first_nm_violation"](rows, cols, n_keep, m_group,
                                               ncols // m_group, nrows)
            got = (int(r), int(g))
        assert got == expected


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv(_kernels.ENV_FLAG, "1")
    assert _kernels.numba_disabled()
    assert _kernels.active_path() == "numpy"
    monkeypatch.delenv(_kernels.ENV_FLAG)
    assert not _kernels.numba_disabled()


def test_dispatch_matches_both_paths(monkeypatch):
    rng = np.random.default_rng(24)
    rows, cols = random_pattern(rng, 16, 16, 0.4)
    keys = rows * 16 + cols
    results = {}
    for flag in ("1", ""):
        if flag:
            monkeypatch.setenv(_kernels.ENV_FLAG, flag)
        else:
            monkeypatch.delenv(_kernels.ENV_FLAG, raising=False)
        results[flag] = (
            _kernels.count_occupied_blocks(rows, cols, 4, 4, 4, 4),
            _kernels.first_duplicate(keys, 16 * 16),
            _kernels.first_nm_violation(rows, cols, 2, 4, 4, 16),
        )
    assert results["1"] == results[""]
