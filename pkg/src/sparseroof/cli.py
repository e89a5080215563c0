"""Command-line interface wiring the model into complete workflows.

Subcommands: ``sol`` (per-layer speed of light and per-model speedups),
``sweep-levels`` (speedups across a nonzero-halving level schedule),
``sparsity-roofline`` (join with accuracy, emit series and charts),
``validate`` (percent of speed of light against measured latencies), and
``profile-matrices`` (statistics over a MatrixMarket corpus).

Exit codes: 0 success, 2 configuration error, 3 data error, 4 physically
impossible measurement. All numeric output is fixed at 6 significant digits
so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import mmio, report
from .cost import (
    Block,
    DTypeWidths,
    SparsityConfig,
    Unstructured,
    bytes_moved,
    dense,
    instantiate,
    parse_pattern_token,
    parse_sparsity,
    sparsity_sweep,
)
from .errors import ConfigError, DataError, InconsistencyError, SparseroofError
from .hardware import EngineClass, HardwareProfile, parse_engine, resolve_profile, roof_throughput
from .netgraph import ModelGraph, lower_layer, resolve_model_spec
from .report import fmt6
from .roofline import (
    Measurement,
    ModelSol,
    SpeedupRecord,
    model_sol,
    resolve_engine_map,
    roofline_point,
    sol_latency,
    speedup_at_sol,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PHYSICAL = 4


@dataclass
class RunConfig:
    """Everything one evaluation sweep needs, resolved from CLI flags."""

    profile: HardwareProfile
    models: list[ModelGraph]
    configs: list[SparsityConfig]
    batches: list[int] | None
    widths: DTypeWidths
    engine_map: dict[str, EngineClass]
    out_dir: Path
    formats: list[str]
    svg_width: int = 640
    svg_height: int = 480

    def __post_init__(self):
        if not self.models:
            raise ConfigError("at least one --model is required")
        if not self.configs:
            raise ConfigError("at least one --sparsity config is required")
        if self.batches is not None and any(b < 1 for b in self.batches):
            raise ConfigError("--batch values must be >= 1")


def _add_hw_flag(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--hw",
        default="a100",
        metavar="PATH|NAME",
        help="hardware profile file, or the name of a bundled profile (default: a100)",
    )


def _add_cost_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--value-bytes", type=int, default=2, help="bytes per stored value (default 2)")
    sp.add_argument("--index-bytes", type=int, default=4, help="bytes per column/block index (default 4)")
    sp.add_argument("--pointer-bytes", type=int, default=4, help="bytes per row pointer (default 4)")
    sp.add_argument(
        "--engine-map",
        action="append",
        default=[],
        metavar="PATTERN=ENGINE",
        help="override the engine for a pattern family, e.g. unstructured=matrix (repeatable)",
    )


def _add_out_flags(sp: argparse.ArgumentParser, default_formats: str) -> None:
    sp.add_argument("--out", required=True, metavar="DIR", help="output directory")
    sp.add_argument(
        "--format",
        default=default_formats,
        metavar="LIST",
        help=f"comma-separated output formats (default: {default_formats})",
    )
    sp.add_argument("--svg-width", type=int, default=640)
    sp.add_argument("--svg-height", type=int, default=480)


def _parse_engine_map(entries: list[str]) -> dict[str, EngineClass]:
    overrides = {}
    for entry in entries:
        if "=" not in entry:
            raise ConfigError(f"--engine-map expects PATTERN=ENGINE, got '{entry}'")
        family, engine = entry.split("=", 1)
        overrides[family.strip()] = parse_engine(engine.strip())
    return overrides


def _parse_formats(text: str, allowed: set[str]) -> list[str]:
    formats = [f.strip() for f in text.split(",") if f.strip()]
    if not formats:
        raise ConfigError("--format must name at least one format")
    bad = [f for f in formats if f not in allowed]
    if bad:
        raise ConfigError(
            f"unsupported format(s) {', '.join(bad)} for this command "
            f"(allowed: {', '.join(sorted(allowed))})"
        )
    return formats


def _run_config(args, allowed_formats: set[str], configs: list[SparsityConfig]) -> RunConfig:
    return RunConfig(
        profile=resolve_profile(args.hw),
        models=[resolve_model_spec(m) for m in args.model],
        configs=configs,
        batches=args.batch if args.batch else None,
        widths=DTypeWidths(
            value_bytes=args.value_bytes,
            index_bytes=args.index_bytes,
            pointer_bytes=args.pointer_bytes,
        ),
        engine_map=resolve_engine_map(_parse_engine_map(args.engine_map)),
        out_dir=Path(args.out),
        formats=_parse_formats(args.format, allowed_formats),
        svg_width=args.svg_width,
        svg_height=args.svg_height,
    )


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    print(f"wrote {path}")
    return path


# -- sol / sweep evaluation ----------------------------------------------------

_LAYER_HEADER = "model,pattern,level,batch,layer,engine,bound,flops,bytes,ai,sol_latency_ms"
_SPEEDUP_HEADER = "model,pattern,level,batch,dense_sol_ms,sparse_sol_ms,speedup"


def _layer_rows(sol: ModelSol, batch: int) -> list[str]:
    rows = []
    for layer_id, r in sol.per_layer:
        rows.append(
            f"{sol.model},{sol.config.pattern_token},{fmt6(sol.config.level)},{batch},"
            f"{layer_id},{r.engine.value},{r.bound.value},{r.flops},{r.bytes},"
            f"{fmt6(r.ai)},{fmt6(r.latency_s * 1e3)}"
        )
    return rows


def _evaluate(run: RunConfig) -> tuple[list[str], list[str], list[dict], list[dict]]:
    """Evaluate every (model, config, batch) cell of the sweep.

    Returns per-layer CSV rows, speedup CSV rows, and JSON records for both.
    The dense baseline is always evaluated once per (model, batch).
    """
    layer_rows: list[str] = []
    speedup_rows: list[str] = []
    layer_records: list[dict] = []
    speedup_records: list[dict] = []
    for graph in run.models:
        batches = run.batches or [graph.batch]
        for batch in batches:
            g = graph.with_batch(batch)
            dense_sol = model_sol(g, dense(), run.profile, run.widths, run.engine_map)
            layer_rows.extend(_layer_rows(dense_sol, batch))
            layer_records.extend(_layer_json(dense_sol, batch))
            for cfg in run.configs:
                if cfg.family == "dense":
                    sparse_sol = dense_sol
                else:
                    sparse_sol = model_sol(g, cfg, run.profile, run.widths, run.engine_map)
                    layer_rows.extend(_layer_rows(sparse_sol, batch))
                    layer_records.extend(_layer_json(sparse_sol, batch))
                rec = speedup_at_sol(dense_sol, sparse_sol)
                speedup_rows.append(
                    f"{rec.model},{cfg.pattern_token},{fmt6(cfg.level)},{batch},"
                    f"{fmt6(rec.dense_sol_s * 1e3)},{fmt6(rec.sparse_sol_s * 1e3)},"
                    f"{fmt6(rec.speedup)}"
                )
                speedup_records.append(_speedup_json(rec, batch))
    return layer_rows, speedup_rows, layer_records, speedup_records


def _layer_json(sol: ModelSol, batch: int) -> list[dict]:
    return [
        {
            "model": sol.model,
            "pattern": sol.config.pattern_token,
            "level": float(fmt6(sol.config.level)),
            "batch": batch,
            "layer": layer_id,
            "engine": r.engine.value,
            "bound": r.bound.value,
            "flops": r.flops,
            "bytes": r.bytes,
            "ai": float(fmt6(r.ai)),
            "sol_latency_ms": float(fmt6(r.latency_s * 1e3)),
        }
        for layer_id, r in sol.per_layer
    ]


def _speedup_json(rec: SpeedupRecord, batch: int) -> dict:
    return {
        "model": rec.model,
        "pattern": rec.config.pattern_token,
        "level": float(fmt6(rec.config.level)),
        "batch": batch,
        "dense_sol_ms": float(fmt6(rec.dense_sol_s * 1e3)),
        "sparse_sol_ms": float(fmt6(rec.sparse_sol_s * 1e3)),
        "speedup": float(fmt6(rec.speedup)),
    }


def _write_sweep_outputs(run: RunConfig) -> None:
    layer_rows, speedup_rows, layer_records, speedup_records = _evaluate(run)
    if "csv" in run.formats:
        _write_text(run.out_dir / "sol_layers.csv", "\n".join([_LAYER_HEADER] + layer_rows) + "\n")
        _write_text(run.out_dir / "speedups.csv", "\n".join([_SPEEDUP_HEADER] + speedup_rows) + "\n")
    if "json" in run.formats:
        _write_text(run.out_dir / "sol_layers.json", json.dumps(layer_records, indent=2) + "\n")
        _write_text(run.out_dir / "speedups.json", json.dumps(speedup_records, indent=2) + "\n")


def cmd_sol(args) -> int:
    configs = [parse_sparsity(s) for s in args.sparsity]
    run = _run_config(args, {"csv", "json"}, configs)
    _write_sweep_outputs(run)
    return EXIT_OK


def cmd_sweep_levels(args) -> int:
    token = args.pattern.strip()
    levels = sparsity_sweep(args.start_level, args.steps)
    if token == "unstructured":
        configs = [SparsityConfig(Unstructured(), lv) for lv in levels]
    elif token.startswith("block:"):
        base = parse_pattern_token(token, levels[0])
        assert isinstance(base.pattern, Block)
        configs = [SparsityConfig(base.pattern, lv) for lv in levels]
    else:
        raise ConfigError(
            f"--pattern must be 'unstructured' or 'block:<h>x<w>' (level sweeps do not "
            f"apply to '{token}')"
        )
    run = _run_config(args, {"csv", "json"}, configs)
    _write_sweep_outputs(run)
    return EXIT_OK


# -- sparsity roofline ----------------------------------------------------------


def cmd_sparsity_roofline(args) -> int:
    configs = [parse_sparsity(s) for s in args.sparsity]
    run = _run_config(args, {"csv", "json", "svg"}, configs)
    accuracy = report.load_accuracy(args.accuracy)

    records: list[SpeedupRecord] = []
    for graph in run.models:
        batches = run.batches or [graph.batch]
        for batch in batches:
            g = graph.with_batch(batch)
            dense_sol = model_sol(g, dense(), run.profile, run.widths, run.engine_map)
            for cfg in run.configs:
                sparse_sol = (
                    dense_sol
                    if cfg.family == "dense"
                    else model_sol(g, cfg, run.profile, run.widths, run.engine_map)
                )
                records.append(speedup_at_sol(dense_sol, sparse_sol))

    assembled = report.assemble_series(records, accuracy)
    run.out_dir.mkdir(parents=True, exist_ok=True)
    if "csv" in run.formats:
        print(f"wrote {report.write_series_csv(assembled.series, run.out_dir / 'series.csv')}")
    if "json" in run.formats:
        print(f"wrote {report.write_series_json(assembled.series, run.out_dir / 'series.json')}")
    if "svg" in run.formats:
        path = report.write_series_svg(
            assembled.series,
            run.out_dir / "sparsity_roofline.svg",
            width=run.svg_width,
            height=run.svg_height,
        )
        print(f"wrote {path}")
    if assembled.unjoined:
        path = report.write_unjoined_csv(assembled.unjoined, run.out_dir / "unjoined.csv")
        print(f"wrote {path}")
        print(f"warning: {len(assembled.unjoined)} speedup record(s) had no accuracy data",
              file=sys.stderr)
    return EXIT_OK


# -- validate -------------------------------------------------------------------

_MEASUREMENT_HEADER = ["scope", "pattern", "level", "latency_ms"]


def _load_measurements(path: Path) -> list[Measurement]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read measurements '{path}': {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or [c.strip() for c in rows[0]] != _MEASUREMENT_HEADER:
        raise DataError(f"{path}: expected header '{','.join(_MEASUREMENT_HEADER)}'")
    measurements = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise DataError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
        scope, pattern, level_s, latency_s = (c.strip() for c in row)
        try:
            level = float(level_s)
            latency_ms = float(latency_s)
        except ValueError:
            raise DataError(f"{path}:{lineno}: level and latency_ms must be numbers") from None
        if latency_ms <= 0:
            raise DataError(f"{path}:{lineno}: latency_ms must be > 0, got {latency_ms}")
        cfg = parse_pattern_token(pattern, level)
        measurements.append(Measurement(scope=scope, config=cfg, measured_latency_s=latency_ms / 1e3))
    if not measurements:
        raise DataError(f"{path}: no measurement rows")
    return measurements


def cmd_validate(args) -> int:
    run = _run_config(args, {"csv", "json", "svg"}, [dense()])
    if len(run.models) != 1:
        raise ConfigError("validate takes exactly one --model")
    if run.batches is not None and len(run.batches) != 1:
        raise ConfigError("validate takes a single --batch")
    graph = run.models[0].with_batch(run.batches[0]) if run.batches else run.models[0]
    measurements = _load_measurements(Path(args.measurements))

    rows = []
    points = []
    engines_used = set()
    violations = []
    sol_by_key: dict[tuple[str, str], tuple[float, float]] = {}
    for meas in measurements:
        cfg = meas.config
        if meas.scope == "model":
            sol = model_sol(graph, cfg, run.profile, run.widths, run.engine_map)
            sol_s = sol.total_latency_s
            total_flops = sum(r.flops for _, r in sol.per_layer)
            total_bytes = sum(r.bytes for _, r in sol.per_layer)
            ai = total_flops / total_bytes
            achieved = total_flops / meas.measured_latency_s
            roof_s = ""
        else:
            layer = graph.layer(meas.scope)
            shape = lower_layer(layer, graph.batch)
            inst = instantiate(cfg, shape)
            cost = bytes_moved(inst, run.widths)
            engine = run.engine_map[cfg.family]
            engines_used.add(engine)
            r = sol_latency(cost, run.profile, engine)
            sol_s = r.latency_s
            ai, achieved = roofline_point(cost, meas)
            roof = roof_throughput(run.profile, engine, ai)
            roof_s = fmt6(roof)
        pct = sol_s / meas.measured_latency_s
        flagged = pct > 1.01
        if flagged:
            violations.append(f"{meas.scope} ({cfg.token}): measured beats speed of light "
                              f"({fmt6(pct * 100)}% of SoL)")
        sol_by_key[(meas.scope, cfg.token)] = (sol_s, meas.measured_latency_s)
        rows.append(
            f"{meas.scope},{cfg.pattern_token},{fmt6(cfg.level)},{fmt6(sol_s * 1e3)},"
            f"{fmt6(meas.measured_latency_s * 1e3)},{fmt6(pct)},{fmt6(ai)},{fmt6(achieved)},"
            f"{roof_s},{'yes' if flagged else 'no'}"
        )
        points.append(report.RooflinePoint(label=f"{meas.scope} {cfg.token}", ai=ai,
                                           achieved_flops=achieved))

    # Pair each sparse measurement with the dense one of the same scope.
    check_rows = []
    dense_by_scope = {
        scope: (sol_s, meas_s)
        for (scope, token), (sol_s, meas_s) in sol_by_key.items()
        if token == "dense"
    }
    for meas in measurements:
        if meas.config.family == "dense" or meas.scope not in dense_by_scope:
            continue
        sol_s, meas_s = sol_by_key[(meas.scope, meas.config.token)]
        d_sol, d_meas = dense_by_scope[meas.scope]
        predicted = d_sol / sol_s
        measured_sp = d_meas / meas_s
        pct_dense = d_sol / d_meas
        pct_sparse = sol_s / meas_s
        gap = pct_dense - pct_sparse
        check_rows.append(
            f"{meas.scope},{meas.config.pattern_token},{fmt6(meas.config.level)},"
            f"{fmt6(predicted)},{fmt6(measured_sp)},{fmt6(pct_dense)},{fmt6(pct_sparse)},"
            f"{fmt6(gap)}"
        )
        if abs(gap) <= 1e-6 * max(pct_dense, pct_sparse):
            print(
                f"{meas.scope} ({meas.config.token}): dense and sparse are equally optimized; "
                f"predicted speedup equals measured speedup ({fmt6(predicted)}x)"
            )

    header = ("scope,pattern,level,sol_latency_ms,measured_ms,pct_of_sol,ai,"
              "achieved_flops_per_s,roof_flops_per_s,faster_than_sol")
    if "csv" in run.formats:
        _write_text(run.out_dir / "validation.csv", "\n".join([header] + rows) + "\n")
        check_header = ("scope,pattern,level,predicted_speedup,measured_speedup,"
                        "dense_pct_of_sol,sparse_pct_of_sol,pct_gap")
        _write_text(run.out_dir / "speedup_check.csv",
                    "\n".join([check_header] + check_rows) + "\n")
    if "svg" in run.formats and points:
        engines = sorted(engines_used, key=lambda e: e.value) or [EngineClass.SCALAR,
                                                                  EngineClass.MATRIX]
        path = report.write_roofline_svg(
            run.profile, engines, points, run.out_dir / "roofline.svg",
            width=run.svg_width, height=run.svg_height,
        )
        print(f"wrote {path}")

    if violations:
        for v in violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_PHYSICAL
    return EXIT_OK


# -- profile-matrices -----------------------------------------------------------


def _parse_block_size(token: str) -> tuple[int, int]:
    parts = token.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"block size must look like 4x4, got '{token}'")
    try:
        b_h, b_w = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"block size must look like 4x4, got '{token}'") from None
    if b_h < 1 or b_w < 1:
        raise ConfigError(f"block dims must be >= 1, got '{token}'")
    return b_h, b_w


def cmd_profile_matrices(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise DataError(f"'{directory}' is not a directory")
    files = sorted(directory.glob("*.mtx"))
    if not files:
        raise DataError(f"no MatrixMarket (*.mtx) files in '{directory}'")
    blocks = [_parse_block_size(b) for b in (args.blocks or ["2x2", "4x4", "8x8", "16x16", "32x32"])]

    rows = []
    failures = []
    for path in files:
        try:
            pattern = mmio.read_matrix_market(path)
        except DataError as exc:
            failures.append(str(exc))
            continue
        for b_h, b_w in blocks:
            try:
                occ = mmio.block_occupancy(pattern, b_h, b_w)
            except (ConfigError, DataError) as exc:
                failures.append(f"{path}: {exc}")
                continue
            rows.append(
                f"{path.name},{pattern.nrows},{pattern.ncols},{pattern.nnz},"
                f"{fmt6(pattern.level)},{b_h}x{b_w},{occ.nonzero_blocks},{fmt6(occ.fill_ratio)}"
            )

    header = "file,nrows,ncols,nnz,level,block,nonzero_blocks,fill_ratio"
    out_dir = Path(args.out)
    _write_text(out_dir / "matrix_stats.csv", "\n".join([header] + rows) + "\n")
    if failures:
        print(f"{len(failures)} file/block combination(s) failed:", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparseroof",
        description="Analytical speed-of-light model for sparse neural network inference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sol", help="per-layer speed of light and per-model speedups")
    _add_hw_flag(sp)
    sp.add_argument("--model", action="append", required=True, metavar="PATH|NAME")
    sp.add_argument("--sparsity", action="append", required=True, metavar="ENCODING",
                    help="dense | unstructured:<level> | block:<h>x<w>:<level> | nm:<n>:<m>")
    sp.add_argument("--batch", action="append", type=int, metavar="N")
    _add_cost_flags(sp)
    _add_out_flags(sp, "csv")
    sp.set_defaults(func=cmd_sol)

    sp = sub.add_parser("sweep-levels", help="speedups across the nonzero-halving level schedule")
    _add_hw_flag(sp)
    sp.add_argument("--model", action="append", required=True, metavar="PATH|NAME")
    sp.add_argument("--pattern", required=True, metavar="TOKEN",
                    help="unstructured or block:<h>x<w>")
    sp.add_argument("--start-level", type=float, default=0.5)
    sp.add_argument("--steps", type=int, default=5)
    sp.add_argument("--batch", action="append", type=int, metavar="N")
    _add_cost_flags(sp)
    _add_out_flags(sp, "csv")
    sp.set_defaults(func=cmd_sweep_levels)

    sp = sub.add_parser("sparsity-roofline", help="accuracy vs. speedup series and charts")
    _add_hw_flag(sp)
    sp.add_argument("--model", action="append", required=True, metavar="PATH|NAME")
    sp.add_argument("--sparsity", action="append", required=True, metavar="ENCODING")
    sp.add_argument("--batch", action="append", type=int, metavar="N")
    sp.add_argument("--accuracy", required=True, metavar="CSV",
                    help="accuracy table with columns model,pattern,level,top1")
    _add_cost_flags(sp)
    _add_out_flags(sp, "csv,json,svg")
    sp.set_defaults(func=cmd_sparsity_roofline)

    sp = sub.add_parser("validate", help="percent of speed of light for measured latencies")
    _add_hw_flag(sp)
    sp.add_argument("--model", action="append", required=True, metavar="PATH|NAME")
    sp.add_argument("--measurements", required=True, metavar="CSV",
                    help="measured latencies with columns scope,pattern,level,latency_ms")
    sp.add_argument("--batch", action="append", type=int, metavar="N")
    _add_cost_flags(sp)
    _add_out_flags(sp, "csv")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("profile-matrices", help="statistics over a MatrixMarket corpus")
    sp.add_argument("directory", help="directory of *.mtx files")
    sp.add_argument("--blocks", action="append", metavar="HxW",
                    help="block size to analyze (repeatable; default 2x2..32x32)")
    sp.add_argument("--out", required=True, metavar="DIR")
    sp.set_defaults(func=cmd_profile_matrices)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InconsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICAL
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SparseroofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
