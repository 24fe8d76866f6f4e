"""Command-line entry point: config ingestion, subcommand dispatch, reports.

Exit status: 0 on success (an infeasible configuration is an answer, not
an error), 1 on validation or input errors (all violations listed on
stderr), 2 on usage errors (argparse).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import api
from .collectives import CalibrationFitError
from .config import RunConfig, parse_run_config
from .jsonio import (
    plan_csv,
    plan_table,
    read_calibration_csv,
    render_json,
    simulate_table,
    sweep_csv,
    sweep_table,
)
from .planner import OBJECTIVES, PlanConstraints


def _fail(violations: list[str]) -> int:
    for violation in violations:
        print(f"error: {violation}", file=sys.stderr)
    return 1


def _load_json(path: str) -> tuple[object | None, list[str]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        return None, [f"cannot read {path}: {exc}"]
    try:
        return json.loads(text), []
    except json.JSONDecodeError as exc:
        return None, [f"{path} is not valid JSON: {exc}"]


def _apply_overrides(raw: object, args: argparse.Namespace) -> object:
    """Fold --hardware/--model/--nodes flags into the raw config blocks."""
    if not isinstance(raw, dict):
        return raw
    raw = dict(raw)
    if getattr(args, "hardware", None):
        block = raw.get("hardware")
        block = dict(block) if isinstance(block, dict) else {}
        block.pop("gpu", None)
        block["preset"] = args.hardware
        block.setdefault("num_nodes", 1)
        raw["hardware"] = block
    if getattr(args, "model", None):
        raw["model"] = {"preset": args.model}
    nodes = getattr(args, "nodes", None)
    if nodes and not getattr(args, "_nodes_are_ladder", False):
        block = raw.get("hardware")
        block = dict(block) if isinstance(block, dict) else {}
        block["num_nodes"] = nodes[0]
        raw["hardware"] = block
    return raw


def _load_config(
    args: argparse.Namespace, require_parallelism: bool = True
) -> tuple[RunConfig | None, list[str]]:
    raw, errors = _load_json(args.config)
    if errors:
        return None, errors
    raw = _apply_overrides(raw, args)
    base_dir = Path(args.config).resolve().parent
    return parse_run_config(raw, base_dir, require_parallelism=require_parallelism)


def _parse_int_list(text: str, flag: str) -> tuple[list[int], list[str]]:
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    if not items:
        return [], [f"{flag}: expected a comma-separated list"]
    try:
        return [int(piece) for piece in items], []
    except ValueError:
        return [], [f"{flag}: expected integers, got {text!r}"]


def _write_artifacts(out_dir: str | None, name: str, text_by_ext: dict[str, str]) -> None:
    if out_dir is None:
        return
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for ext, text in text_by_ext.items():
        (directory / f"{name}.{ext}").write_text(text)


def _emit(payload_json: str, fmt: str, table: str | None, csv_text: str | None) -> None:
    if fmt == "json":
        print(payload_json)
    elif fmt == "csv":
        sys.stdout.write(csv_text if csv_text is not None else "")
    else:
        sys.stdout.write(table if table is not None else "")


def _cmd_simulate(args: argparse.Namespace) -> int:
    rc, violations = _load_config(args)
    if rc is None:
        return _fail(violations)
    breakdown, metrics = api.run_simulation(rc)
    env = api.simulation_envelope_from(rc, breakdown, metrics)
    payload_json = render_json(env)
    table = simulate_table(rc.workload, rc.parallelism, breakdown, metrics)
    _write_artifacts(args.out, "simulate", {"json": payload_json + "\n", "txt": table})
    _emit(payload_json, args.format, table, None)
    return 0


def _cmd_plan(args: argparse.Namespace) -> int:
    rc, violations = _load_config(args, require_parallelism=False)
    if rc is None:
        return _fail(violations)
    constraints = PlanConstraints(objective=args.objective)
    result = api.run_plan(rc, constraints)
    env = api.plan_envelope_from(rc, result)
    payload_json = render_json(env)
    csv_text = plan_csv(result)
    table = plan_table(result)
    _write_artifacts(args.out, "plan", {"json": payload_json + "\n", "csv": csv_text})
    _emit(payload_json, args.format, table, csv_text)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    rc, violations = _load_config(args, require_parallelism=False)
    if rc is None:
        return _fail(violations)
    request_raw: dict = {"axis": args.axis, "local_batch": args.local_batch}
    errors: list[str] = []
    if args.axis in ("world", "batch"):
        if not args.nodes_text:
            errors.append("--nodes: required for world and batch sweeps")
        else:
            nodes, errs = _parse_int_list(args.nodes_text, "--nodes")
            errors.extend(errs)
            request_raw["nodes"] = nodes
    else:
        if not args.values:
            errors.append("--values: required for model, seqlen, and hw sweeps")
        else:
            values = [piece.strip() for piece in args.values.split(",") if piece.strip()]
            if args.axis == "seqlen":
                parsed, errs = _parse_int_list(args.values, "--values")
                errors.extend(errs)
                request_raw["values"] = parsed
            else:
                request_raw["values"] = values
    if errors:
        return _fail(errors)
    request, violations = api.parse_sweep_request(request_raw)
    if request is None:
        return _fail(violations)
    constraints = PlanConstraints(objective=args.objective)
    series = api.run_sweep(rc, request, constraints)
    env = api.sweep_envelope(series)
    payload_json = render_json(env)
    csv_text = sweep_csv(series)
    table = sweep_table(series)
    _write_artifacts(args.out, "sweep", {"json": payload_json + "\n", "csv": csv_text})
    _emit(payload_json, args.format, table, csv_text)
    return 0


def _cmd_decide(args: argparse.Namespace) -> int:
    errors: list[str] = []
    configs: list[RunConfig] = []
    for path in (args.from_path, args.to_path):
        raw, errs = _load_json(path)
        if errs:
            errors.extend(errs)
            continue
        rc, violations = parse_run_config(raw, Path(path).resolve().parent)
        if rc is None:
            errors.extend(f"{path}: {v}" for v in violations)
        else:
            configs.append(rc)
    if errors:
        return _fail(errors)
    env = api.decide_envelope(configs[0], configs[1])
    if env["errors"]:
        return _fail(env["errors"])
    payload_json = render_json(env)
    _write_artifacts(args.out, "decide", {"json": payload_json + "\n"})
    print(payload_json)
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        return _fail([f"cannot read {args.input}: {exc}"])
    try:
        points = read_calibration_csv(text)
    except ValueError as exc:
        return _fail([f"{args.input}: {exc}"])
    try:
        env = api.calibrate_envelope(points)
    except CalibrationFitError as exc:
        return _fail([f"calibration failed: {exc}"])
    payload_json = render_json(env)
    _write_artifacts(args.out, "cost_params", {"json": payload_json + "\n"})
    print(payload_json)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    port = args.port if args.port is not None else int(os.environ.get("SHARDSIM_PORT", "8080"))
    uvicorn.run(create_app(), host=args.host, port=port)
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", required=True, help="path to a run-config JSON file")
    parser.add_argument("--hardware", help="hardware preset override (v100|a100|h100)")
    parser.add_argument("--model", help="model preset override (1b|7b|13b|70b)")
    parser.add_argument("--out", help="directory for emitted artifacts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shardsim",
        description="Analytical step-time, memory, and power simulator for sharded training.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser("simulate", help="simulate one training step for a fixed layout")
    _add_config_flags(p_sim)
    p_sim.add_argument("--nodes", type=int, dest="nodes_override", help="override node count")
    p_sim.add_argument("--format", choices=("json", "table"), default="json")
    p_sim.set_defaults(handler=_cmd_simulate)

    p_plan = sub.add_parser("plan", help="enumerate and rank parallelism layouts")
    _add_config_flags(p_plan)
    p_plan.add_argument("--nodes", type=int, dest="nodes_override", help="override node count")
    p_plan.add_argument("--objective", choices=OBJECTIVES, default="throughput")
    p_plan.add_argument("--format", choices=("json", "csv", "table"), default="json")
    p_plan.set_defaults(handler=_cmd_plan)

    p_sweep = sub.add_parser("sweep", help="simulate a series along one axis")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=api.SWEEP_AXES, required=True)
    p_sweep.add_argument(
        "--nodes", dest="nodes_text", help="comma-separated node ladder (world and batch axes)"
    )
    p_sweep.add_argument(
        "--values", help="comma-separated values (model, seqlen, and hw axes)"
    )
    p_sweep.add_argument(
        "--local-batch", type=int, default=2, dest="local_batch",
        help="per-rank microstep batch held fixed along a world sweep",
    )
    p_sweep.add_argument("--objective", choices=OBJECTIVES, default="throughput")
    p_sweep.add_argument("--format", choices=("json", "csv", "table"), default="json")
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_decide = sub.add_parser("decide", help="compare two layouts with the sharding cost model")
    p_decide.add_argument("--from", dest="from_path", required=True, help="baseline config JSON")
    p_decide.add_argument("--to", dest="to_path", required=True, help="candidate config JSON")
    p_decide.add_argument("--out", help="directory for emitted artifacts")
    p_decide.set_defaults(handler=_cmd_decide)

    p_cal = sub.add_parser("calibrate", help="fit collective cost parameters from measurements")
    p_cal.add_argument("--input", required=True, help="calibration CSV path")
    p_cal.add_argument("--out", help="directory for emitted artifacts")
    p_cal.set_defaults(handler=_cmd_calibrate)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=None, help="default: $SHARDSIM_PORT or 8080")
    p_serve.set_defaults(handler=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "nodes_override", None) is not None:
        args.nodes = [args.nodes_override]
        args._nodes_are_ladder = False
    else:
        args.nodes = None
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
