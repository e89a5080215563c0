"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Tolerances are fixed here, not tuned: published numeric anchors are
checked at 1-2%, structural identities exactly, and the equality theorem at
1e-12 relative error.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from oracles import bsr_arrays, csr_arrays
from sparseroof.cost import (
    DTypeWidths,
    block,
    bytes_moved,
    dense,
    flops,
    instantiate,
    n_of_m,
    sparsity_sweep,
    unstructured,
)
from sparseroof.hardware import resolve_profile
from sparseroof.mmio import SparsePattern, instance_from_pattern, traffic_breakdown
from sparseroof.netgraph import LayerSpec, MatmulShape, ModelGraph, RawMatmul, resolve_model_spec
from sparseroof.roofline import Boundedness, model_sol, speedup_at_sol


def report(n, text):
    print(f"PASS criterion {n}: {text}")


def test_01_table1_flops():
    start = time.perf_counter()
    block_inst = instantiate(unstructured(1 - 1_950_000 / (3072 * 768)), MatmulShape(3072, 768, 6272))
    unstr_inst = instantiate(unstructured(1 - 1_230_000 / (3072 * 768)), MatmulShape(3072, 768, 6272))
    block_flops = flops(block_inst)
    unstr_flops = flops(unstr_inst)
    elapsed = time.perf_counter() - start
    assert block_flops == 24_460_800_000  # 24.46 GFLOP
    assert unstr_flops == 15_429_120_000  # 15.43 GFLOP
    assert abs(block_flops - 24.4e9) / 24.4e9 < 0.01
    assert abs(unstr_flops - 15.5e9) / 15.5e9 < 0.01
    assert elapsed < 1e-3
    report(1, f"FLOPs 24.46/15.43 GFLOP match published 24.4/15.5 within 1% "
              f"({elapsed * 1e6:.0f} us)")


def test_02_table1_achieved_throughput():
    achieved_block = 24_460_800_000 / 0.613e-3
    achieved_unstr = 15_429_120_000 / 3.526e-3
    assert abs(achieved_block - 39.9e12) / 39.9e12 < 0.02
    assert abs(achieved_unstr - 4.4e12) / 4.4e12 < 0.02
    # 1.57x more FLOPs yet ~6x faster.
    assert 24_460_800_000 / 15_429_120_000 == pytest.approx(1.585, abs=0.02)
    assert 3.526 / 0.613 == pytest.approx(5.75, abs=0.1)
    report(2, "achieved 39.9/4.38 TFLOP/s match published 39.9/4.4 within 2%")


def test_03_csr_index_accounting():
    rng = np.random.default_rng(100)
    for _ in range(1000):
        m = int(rng.integers(1, 5000))
        k = int(rng.integers(1, 5000))
        level = float(rng.uniform(0, 0.999))
        inst = instantiate(unstructured(level), MatmulShape(m, k, 1))
        assert inst.index_elements + inst.pointer_elements == inst.stored_nnz + m + 1
    report(3, "CSR index accounting nnz + m + 1 exact across 1000 random shapes/levels")


def test_04_nm_metadata_bits():
    assert instantiate(n_of_m(2, 4), MatmulShape(4, 4, 1)).index_bits_per_nnz == 2.0
    assert instantiate(n_of_m(2, 16), MatmulShape(4, 16, 1)).index_bits_per_nnz == 4.0
    report(4, "N:M metadata exactly log2(M) bits per nonzero (2:4 -> 2, 2:16 -> 4)")


def test_05_block_index_reduction():
    rng = np.random.default_rng(101)
    for _ in range(1000):
        b_h = int(rng.integers(1, 33))
        b_w = int(rng.integers(1, 33))
        m = b_h * int(rng.integers(1, 65))
        k = b_w * int(rng.integers(1, 65))
        level = float(rng.uniform(0, 0.999))
        inst = instantiate(block(b_h, b_w, level), MatmulShape(m, k, 1))
        assert inst.index_elements * (b_h * b_w) == inst.stored_nnz
    report(5, "block index elements * (b_h*b_w) == stored_nnz exact, 1000 random configs")


def test_06_sweep_schedule():
    assert sparsity_sweep(0.5, 5) == [0.5, 0.75, 0.875, 0.9375, 0.96875]
    report(6, "level schedule [0.5, 0.75, 0.875, 0.9375, 0.96875] exact")


def test_07_equality_theorem():
    start = time.perf_counter()
    rng = np.random.default_rng(102)
    for _ in range(10_000):  # per-layer
        dense_sol = rng.uniform(1e-6, 1e-1)
        sparse_sol = rng.uniform(1e-6, 1e-1)
        p = rng.uniform(0.001, 1.0)
        predicted = dense_sol / sparse_sol
        measured = (dense_sol / p) / (sparse_sol / p)
        assert abs(measured - predicted) <= 1e-12 * predicted
    for _ in range(10_000):  # per-model
        nl = int(rng.integers(1, 10))
        dense_sols = rng.uniform(1e-6, 1e-2, nl)
        sparse_sols = rng.uniform(1e-6, 1e-2, nl)
        dense_meas = dense_sols * rng.uniform(1.0, 50.0, nl)
        p = dense_sols.sum() / dense_meas.sum()
        sparse_meas = sparse_sols / p
        predicted = dense_sols.sum() / sparse_sols.sum()
        measured = dense_meas.sum() / sparse_meas.sum()
        assert abs(measured - predicted) <= 1e-12 * predicted
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report(7, f"equal percent of SoL implies predicted == measured speedup to 1e-12 "
              f"(20000 cases, {elapsed:.2f} s)")


def test_08_monotonicity_and_feature_floor():
    start = time.perf_counter()
    profile = resolve_profile("a100")
    rng = np.random.default_rng(103)
    levels = [0.25, 0.5, 0.75, 0.9375]
    widths = DTypeWidths()
    floor_checks = 0
    for _ in range(100):
        layers = tuple(
            LayerSpec(f"l{i}", RawMatmul(
                m=8 * int(rng.integers(1, 33)),
                k=8 * int(rng.integers(1, 33)),
                n_per_sample=int(rng.integers(1, 129)),
            ))
            for i in range(int(rng.integers(1, 6)))
        )
        g = ModelGraph(name="rand", layers=layers, batch=1)
        baseline = model_sol(g, dense(), profile, widths)
        for make in (unstructured, lambda lv: block(8, 8, lv)):
            speedups = [
                speedup_at_sol(baseline, model_sol(g, make(lv), profile, widths)).speedup
                for lv in levels
            ]
            assert all(a <= b + 1e-12 for a, b in zip(speedups, speedups[1:]))
        # Feature floor on memory-bound single layers.
        for layer in layers:
            single = ModelGraph(name="s", layers=(layer,), batch=1)
            base = model_sol(single, dense(), profile, widths)
            if base.per_layer[0][1].bound is not Boundedness.MEMORY:
                continue
            floor_checks += 1
            shape = MatmulShape(layer.kind.m, layer.kind.k, layer.kind.n_per_sample)
            cost = bytes_moved(instantiate(dense(), shape), widths)
            cap = cost.total_bytes / cost.feature_bytes
            for lv in (0.5, 0.96875, 0.9999):
                rec = speedup_at_sol(base, model_sol(single, unstructured(lv), profile, widths))
                assert rec.speedup <= cap + 1e-12
    elapsed = time.perf_counter() - start
    assert floor_checks > 50
    assert elapsed < 5.0
    report(8, f"speedup monotone in level and bounded by dense/feature bytes "
              f"({floor_checks} memory-bound floor checks, {elapsed:.2f} s)")


def test_09_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(104)
    for _ in range(500):
        m = int(rng.integers(1, 17))
        k = int(rng.integers(1, 17))
        mask = rng.random((m, k)) < rng.random()
        if not mask.any():
            mask[int(rng.integers(m)), int(rng.integers(k))] = True
        nnz = int(mask.sum())
        rows, cols = (a.astype(np.int64) for a in np.nonzero(mask))
        pattern = SparsePattern(m, k, rows, cols)

        values, col_idx, row_ptr = csr_arrays(mask)
        level = 1.0 - nnz / (m * k)
        from_level = instantiate(unstructured(level), MatmulShape(m, k, 1))
        from_pattern = instance_from_pattern(pattern, unstructured(0.0))
        for inst in (from_level, from_pattern):
            assert inst.stored_nnz == len(values)
            assert inst.index_elements == len(col_idx)
            assert inst.pointer_elements == len(row_ptr)

        b_h = int(rng.choice([1, 2, 4, 8]))
        b_w = int(rng.choice([1, 2, 4, 8]))
        if m % b_h == 0 and k % b_w == 0:
            scalars, block_cols, block_ptr = bsr_arrays(mask, b_h, b_w)
            bsr_pattern = instance_from_pattern(pattern, block(b_h, b_w, 0.0))
            nb = (m // b_h) * (k // b_w)
            bsr_level = instantiate(
                block(b_h, b_w, 1.0 - len(block_cols) / nb), MatmulShape(m, k, 1)
            )
            for inst in (bsr_pattern, bsr_level):
                assert inst.stored_nnz == len(scalars)
                assert inst.index_elements == len(block_cols)
                assert inst.pointer_elements == len(block_ptr)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report(9, f"materialized CSR/BSR arrays match both construction routes exactly "
              f"(500 masks, {elapsed:.2f} s)")


def test_10_feature_share_ordering():
    for name in ("convnext_tiny", "swin_tiny", "resnet50"):
        graph = resolve_model_spec(name)
        t1 = traffic_breakdown(graph, unstructured(0.875), batch=1)
        t32 = traffic_breakdown(graph, unstructured(0.875), batch=32)
        assert t32.feature_share > t1.feature_share
    report(10, "feature share of traffic at batch 32 strictly exceeds batch 1")


def test_11_end_to_end_smoke(tmp_path):
    start = time.perf_counter()
    acc = tmp_path / "acc.csv"
    acc.write_text("model,pattern,level,top1\n"
                   "convnext_tiny,unstructured,0.5,0.89\n"
                   "convnext_tiny,unstructured,0.875,0.875\n")
    env_outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        sol_cmd = [sys.executable, "-m", "sparseroof", "sol",
                   "--model", "convnext_tiny", "--sparsity", "unstructured:0.875",
                   "--format", "csv,json", "--out", str(out / "sol")]
        sr_cmd = [sys.executable, "-m", "sparseroof", "sparsity-roofline",
                  "--model", "convnext_tiny", "--sparsity", "unstructured:0.5",
                  "--sparsity", "unstructured:0.875", "--accuracy", str(acc),
                  "--out", str(out / "sr")]
        for cmd in (sol_cmd, sr_cmd):
            proc = subprocess.run(cmd, capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
        env_outs.append(out)
    files = ["sol/speedups.csv", "sol/sol_layers.csv", "sol/speedups.json",
             "sr/series.csv", "sr/series.json", "sr/sparsity_roofline.svg"]
    for rel in files:
        a = (env_outs[0] / rel).read_bytes()
        b = (env_outs[1] / rel).read_bytes()
        assert a == b, f"{rel} differs between runs"
    elapsed = time.perf_counter() - start
    assert elapsed < 2.0
    report(11, f"CLI smoke: csv/json/svg written, repeated runs byte-identical "
               f"({elapsed:.2f} s)")
