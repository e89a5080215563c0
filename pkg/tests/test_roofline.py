import numpy as np
import pytest

from sparseroof.cost import (
    CostBreakdown,
    DTypeWidths,
    block,
    bytes_moved,
    dense,
    instantiate,
    unstructured,
)
from sparseroof.errors import ConfigError, InconsistencyError
from sparseroof.hardware import EngineClass, roof_throughput
from sparseroof.netgraph import LayerSpec, MatmulShape, ModelGraph, RawMatmul
from sparseroof.roofline import (
    Boundedness,
    Measurement,
    ModelSol,
    SolResult,
    arithmetic_intensity,
    model_sol,
    percent_of_sol,
    resolve_engine_map,
    roofline_point,
    sol_latency,
    speedup_at_sol,
)


def cost_of(flop_count: int, byte_count: int) -> CostBreakdown:
    return CostBreakdown(
        flops=flop_count,
        weight_value_bytes=0,
        index_bytes=0,
        input_feature_bytes=byte_count,
        output_feature_bytes=0,
    )


def make_model_sol(model, latencies, config=None):
    cfg = config or dense()
    per_layer = tuple(
        (f"l{i}", SolResult(latency_s=lat, ai=1.0, bound=Boundedness.MEMORY,
                            engine=EngineClass.SCALAR, flops=1, bytes=1))
        for i, lat in enumerate(latencies)
    )
    return ModelSol(model=model, config=cfg, per_layer=per_layer)


class TestArithmeticIntensity:
    def test_table1_block_matrix_hand_computed(self):
        # 1.95M stored values on 3072x768 with n=6272 at default widths:
        # bytes = 1.95e6*2 + 1.95e6*4 + 3073*4 + (768*6272 + 3072*6272)*2
        inst = instantiate(unstructured(1 - 1_950_000 / (3072 * 768)),
                           MatmulShape(3072, 768, 6272))
        cost = bytes_moved(inst, DTypeWidths())
        expected_bytes = (1_950_000 * 2 + 1_950_000 * 4 + 3073 * 4
                          + (768 * 6272 + 3072 * 6272) * 2)
        assert cost.total_bytes == expected_bytes
        ai = arithmetic_intensity(cost.flops, cost.total_bytes)
        assert ai == 24_460_800_000 / expected_bytes

    def test_zero_flops(self):
        assert arithmetic_intensity(0, 1024) == 0.0

    def test_identity(self):
        assert arithmetic_intensity(12345, 12345) == 1.0

    def test_zero_bytes(self):
        with pytest.raises(ConfigError, match="undefined"):
            arithmetic_intensity(10, 0)


class TestSolLatency:
    def test_memory_bound(self, scalar_profile):
        r = sol_latency(cost_of(int(1e9), int(1e9)), scalar_profile, EngineClass.SCALAR)
        assert r.latency_s == pytest.approx(0.01)
        assert r.bound is Boundedness.MEMORY

    def test_compute_bound(self, scalar_profile):
        r = sol_latency(cost_of(int(1e12), int(1e9)), scalar_profile, EngineClass.SCALAR)
        assert r.latency_s == pytest.approx(1.0)
        assert r.bound is Boundedness.COMPUTE

    def test_knee_tie_is_compute_bound(self, scalar_profile):
        # knee = 10 FLOP/byte for this profile; both terms equal 1e-2 s.
        r = sol_latency(cost_of(int(1e10), int(1e9)), scalar_profile, EngineClass.SCALAR)
        assert r.bound is Boundedness.COMPUTE

    def test_missing_engine(self, scalar_profile):
        with pytest.raises(ConfigError, match="matrix"):
            sol_latency(cost_of(1, 1), scalar_profile, EngineClass.MATRIX)


def single_layer_graph(m, k, n, name="one"):
    return ModelGraph(name=name, layers=(LayerSpec("l0", RawMatmul(m=m, k=k, n_per_sample=n)),),
                      batch=1)


class TestModelSol:
    def test_singleton_sum(self, simple_profile):
        g = single_layer_graph(64, 64, 64)
        ms = model_sol(g, dense(), simple_profile)
        assert ms.total_latency_s == ms.per_layer[0][1].latency_s

    def test_additivity(self, simple_profile):
        layers = tuple(
            LayerSpec(f"l{i}", RawMatmul(m=64, k=64, n_per_sample=64)) for i in range(2)
        )
        g = ModelGraph(name="two", layers=layers, batch=1)
        ms = model_sol(g, dense(), simple_profile)
        assert ms.total_latency_s == pytest.approx(2 * ms.per_layer[0][1].latency_s)

    def test_mixed_boundedness_within_one_model(self, simple_profile):
        # Large cube is compute bound; thin-n layer is memory bound (matrix knee = 160).
        layers = (
            LayerSpec("fat", RawMatmul(m=2048, k=2048, n_per_sample=2048)),
            LayerSpec("thin", RawMatmul(m=2048, k=2048, n_per_sample=16)),
        )
        g = ModelGraph(name="mixed", layers=layers, batch=1)
        ms = model_sol(g, dense(), simple_profile)
        bounds = {sol.bound for _, sol in ms.per_layer}
        assert bounds == {Boundedness.COMPUTE, Boundedness.MEMORY}

    def test_non_prunable_costed_dense(self, simple_profile):
        layers = (
            LayerSpec("frozen", RawMatmul(m=64, k=64, n_per_sample=64), prunable=False),
            LayerSpec("pruned", RawMatmul(m=64, k=64, n_per_sample=64)),
        )
        g = ModelGraph(name="m", layers=layers, batch=1)
        sparse = model_sol(g, unstructured(0.875), simple_profile)
        baseline = model_sol(g, dense(), simple_profile)
        frozen_sparse = dict(sparse.per_layer)["frozen"]
        frozen_dense = dict(baseline.per_layer)["frozen"]
        assert frozen_sparse == frozen_dense

    def test_error_names_layer(self, simple_profile):
        g = single_layer_graph(10, 10, 4)
        with pytest.raises(ConfigError, match="l0"):
            model_sol(g, block(3, 3, 0.5), simple_profile)


class TestSpeedup:
    def test_worked_example(self):
        rec = speedup_at_sol(make_model_sol("m", [2e-3]), make_model_sol("m", [1e-3]))
        assert rec.speedup == 2.0

    def test_identity(self):
        rec = speedup_at_sol(make_model_sol("m", [1e-3]), make_model_sol("m", [1e-3]))
        assert rec.speedup == 1.0

    def test_slowdown(self):
        rec = speedup_at_sol(make_model_sol("m", [1e-3]), make_model_sol("m", [2e-3]))
        assert rec.speedup == 0.5


class TestPercentOfSol:
    def _meas(self, latency_s):
        return Measurement(scope="l0", config=dense(), measured_latency_s=latency_s)

    def test_half(self):
        assert percent_of_sol(0.5e-3, self._meas(1.0e-3)) == pytest.approx(0.5)

    def test_perfect(self):
        assert percent_of_sol(1.0e-3, self._meas(1.0e-3)) == 1.0

    def test_faster_than_light(self):
        with pytest.raises(InconsistencyError, match="speed of light"):
            percent_of_sol(1.0e-3, self._meas(0.98e-3))

    def test_within_jitter_tolerance(self):
        assert percent_of_sol(1.0e-3, self._meas(0.995e-3)) == pytest.approx(1.0 / 0.995)

    def test_accepts_result_objects(self, scalar_profile):
        r = sol_latency(cost_of(int(1e9), int(1e9)), scalar_profile, EngineClass.SCALAR)
        assert percent_of_sol(r, self._meas(0.02)) == pytest.approx(0.5)


class TestRooflinePoint:
    def test_table1_block_row(self):
        cost = cost_of(24_460_800_000, 1)
        meas = Measurement(scope="l", config=dense(), measured_latency_s=0.613e-3)
        _, achieved = roofline_point(cost, meas)
        assert achieved == pytest.approx(39.9e12, rel=0.02)

    def test_table1_unstructured_row(self):
        cost = cost_of(15_429_120_000, 1)
        meas = Measurement(scope="l", config=dense(), measured_latency_s=3.526e-3)
        _, achieved = roofline_point(cost, meas)
        assert achieved == pytest.approx(4.4e12, rel=0.02)

    def test_trivial(self):
        cost = cost_of(int(1e9), int(1e9))
        meas = Measurement(scope="l", config=dense(), measured_latency_s=1.0)
        ai, achieved = roofline_point(cost, meas)
        assert ai == 1.0
        assert achieved == 1e9


class TestEqualityTheorem:
    def test_per_layer(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            dense_sol = rng.uniform(1e-6, 1e-1)
            sparse_sol = rng.uniform(1e-6, 1e-1)
            p = rng.uniform(0.01, 1.0)
            dense_meas = dense_sol / p
            sparse_meas = sparse_sol / p
            predicted = dense_sol / sparse_sol
            measured = dense_meas / sparse_meas
            assert abs(measured - predicted) <= 1e-12 * predicted

    def test_per_model(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            nl = int(rng.integers(1, 12))
            dense_sols = rng.uniform(1e-6, 1e-2, nl)
            sparse_sols = rng.uniform(1e-6, 1e-2, nl)
            dense_meas = dense_sols * rng.uniform(1.0, 20.0, nl)
            p = dense_sols.sum() / dense_meas.sum()
            sparse_meas = sparse_sols / p  # forces equal per-model percent of SoL
            predicted = dense_sols.sum() / sparse_sols.sum()
            measured = dense_meas.sum() / sparse_meas.sum()
            assert abs(measured - predicted) <= 1e-12 * predicted


class TestSpeedupProperties:
    def test_monotone_in_level(self, simple_profile):
        rng = np.random.default_rng(3)
        levels = [0.1, 0.3, 0.5, 0.75, 0.9]
        for _ in range(20):
            layers = tuple(
                LayerSpec(f"l{i}", RawMatmul(
                    m=int(rng.integers(1, 16)) * 8,
                    k=int(rng.integers(1, 16)) * 8,
                    n_per_sample=int(rng.integers(1, 64)),
                ))
                for i in range(int(rng.integers(1, 5)))
            )
            g = ModelGraph(name="r", layers=layers, batch=1)
            baseline = model_sol(g, dense(), simple_profile)
            for make in (unstructured, lambda lv: block(8, 8, lv)):
                speedups = [
                    speedup_at_sol(baseline, model_sol(g, make(lv), simple_profile)).speedup
                    for lv in levels
                ]
                assert all(a <= b + 1e-12 for a, b in zip(speedups, speedups[1:]))

    def test_feature_floor_for_memory_bound_layers(self, simple_profile):
        rng = np.random.default_rng(4)
        widths = DTypeWidths()
        checked = 0
        for _ in range(40):
            m = int(rng.integers(1, 32)) * 4
            k = int(rng.integers(1, 32)) * 4
            n = int(rng.integers(1, 32))
            g = single_layer_graph(m, k, n)
            baseline = model_sol(g, dense(), simple_profile, widths)
            if baseline.per_layer[0][1].bound is not Boundedness.MEMORY:
                continue
            checked += 1
            cost = bytes_moved(instantiate(dense(), MatmulShape(m, k, n)), widths)
            bound = cost.total_bytes / cost.feature_bytes
            for lv in (0.5, 0.9, 0.99):
                rec = speedup_at_sol(baseline, model_sol(g, unstructured(lv), simple_profile, widths))
                assert rec.speedup <= bound + 1e-12
        assert checked > 10

    def test_feature_floor_approached_at_extreme_level(self, simple_profile):
        widths = DTypeWidths()
        g = single_layer_graph(256, 256, 64)
        baseline = model_sol(g, dense(), simple_profile, widths)
        assert baseline.per_layer[0][1].bound is Boundedness.MEMORY
        cost = bytes_moved(instantiate(dense(), MatmulShape(256, 256, 64)), widths)
        bound = cost.total_bytes / cost.feature_bytes
        rec = speedup_at_sol(
            baseline,
            model_sol(g, unstructured(0.9999999), simple_profile, widths,
                      engine_map={"unstructured": EngineClass.MATRIX}),
        )
        assert rec.speedup <= bound
        assert rec.speedup > bound * 0.95  # approaches the Amdahl-style cap

    def test_csr_overhead_at_level_zero(self, simple_profile):
        for shape in [(64, 64, 64), (8, 128, 4), (256, 16, 32)]:
            g = single_layer_graph(*shape)
            baseline = model_sol(g, dense(), simple_profile)
            rec = speedup_at_sol(
                baseline,
                model_sol(g, unstructured(0.0), simple_profile,
                          engine_map={"unstructured": EngineClass.MATRIX}),
            )
            assert rec.speedup <= 1.0

    def test_achieved_never_exceeds_roof(self, simple_profile):
        rng = np.random.default_rng(5)
        for _ in range(200):
            flop_count = int(rng.integers(1, 1e9))
            byte_count = int(rng.integers(1, 1e9))
            engine = rng.choice([EngineClass.SCALAR, EngineClass.MATRIX])
            cost = cost_of(flop_count, byte_count)
            sol = sol_latency(cost, simple_profile, engine)
            p = rng.uniform(0.01, 1.0)
            meas = Measurement(scope="x", config=dense(),
                               measured_latency_s=sol.latency_s / p)
            ai, achieved = roofline_point(cost, meas)
            roof = roof_throughput(simple_profile, engine, ai)
            assert achieved <= roof * (1 + 1e-9)


class TestEngineMap:
    def test_defaults(self):
        merged = resolve_engine_map()
        assert merged["dense"] is EngineClass.MATRIX
        assert merged["unstructured"] is EngineClass.SCALAR
        assert merged["block"] is EngineClass.MATRIX
        assert merged["nm"] is EngineClass.SPARSE_MATRIX

    def test_override(self):
        merged = resolve_engine_map({"unstructured": EngineClass.MATRIX})
        assert merged["unstructured"] is EngineClass.MATRIX

    def test_unknown_family(self):
        with pytest.raises(ConfigError, match="butterfly"):
            resolve_engine_map({"butterfly": EngineClass.SCALAR})
