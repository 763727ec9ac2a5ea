"""Command-line front end: run, sweep, validate and export-field.

Exit codes: 0 success, 1 scenario/validation error, 2 runtime error.
Diagnostics go to stderr only on failure paths.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import csv
import datetime as _dt
import json
import os
import sys

from ._build import build_identifier
from .engine import run_simulation
from .floorfield import export_grid_csv, rasterize_speed, solve_eikonal
from .outputs import OutputManager
from .scenario import (Scenario, ScenarioError, scenario_from_dict,
                       validate_scenario)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _load_scenario_dict(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _apply_override(data: dict, dotted_key: str, value) -> None:
    keys = dotted_key.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise KeyError(dotted_key)
        node = node[k]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise KeyError(dotted_key)
    node[keys[-1]] = value


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _build_scenario(path: str, seed=None, overrides=()) -> Scenario:
    data = _load_scenario_dict(path)
    for dotted_key, value in overrides:
        _apply_override(data, dotted_key, value)
    if seed is not None:
        data["seed"] = seed
    return scenario_from_dict(data)


def _run_directory(out_root: str, name: str, ordinal: int | None = None) -> str:
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%d-%H%M%S")
    base = f"{name}_{stamp}" if ordinal is None else f"{name}_{stamp}_{ordinal}"
    path = os.path.join(out_root, base)
    bump = 0
    while os.path.exists(path):
        bump += 1
        path = os.path.join(out_root, f"{base}-{bump}")
    return path


def cmd_run(args) -> int:
    try:
        overrides = [(k, _parse_value(v)) for k, v in
                     (item.split("=", 1) for item in args.set)]
    except ValueError:
        print("--set expects KEY=VALUE", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        scenario = _build_scenario(args.scenario, seed=args.seed, overrides=overrides)
    except OSError as e:
        print(f"cannot read scenario: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ScenarioError, KeyError) as e:
        print(f"invalid scenario: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    diagnostics = validate_scenario(scenario)
    if any(d.severity == "error" for d in diagnostics):
        for d in diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_VALIDATION
    for d in diagnostics:  # warnings only; success path stays off stderr
        print(str(d))
    out_dir = _run_directory(args.output, scenario.name)
    try:
        summary = run_simulation(scenario, outputs=OutputManager(out_dir))
    except Exception as e:
        print(f"simulation failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"run complete: {out_dir}")
    print(f"  simulated {summary.final_sim_time:g} s in {summary.wall_time:.2f} s wall time")
    print(f"  agents spawned={summary.spawned} absorbed={summary.absorbed} "
          f"remaining={summary.remaining}")
    return EXIT_OK


def _sweep_worker(payload):
    (path, key, value, seed, out_dir) = payload
    scenario = _build_scenario(path, seed=seed, overrides=[(key, value)])
    summary = run_simulation(scenario, outputs=OutputManager(out_dir))
    return {
        "directory": out_dir, "finalSimTime": summary.final_sim_time,
        "spawned": summary.spawned, "absorbed": summary.absorbed,
    }


def cmd_sweep(args) -> int:
    values = [_parse_value(v) for v in args.values.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    try:
        # resolve the key once before launching anything
        _build_scenario(args.scenario, overrides=[(args.key, values[0])])
    except OSError as e:
        print(f"cannot read scenario: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ScenarioError, KeyError) as e:
        print(f"invalid sweep: {e}", file=sys.stderr)
        return EXIT_VALIDATION

    name = os.path.splitext(os.path.basename(args.scenario))[0]
    if name.endswith(".scenario"):
        name = name[:-len(".scenario")]
    jobs = []
    ordinal = 0
    for value in values:
        for seed in seeds:
            out_dir = _run_directory(args.output, name, ordinal)
            jobs.append((ordinal, args.key, value, seed, out_dir))
            ordinal += 1

    rows = {}
    failed = False
    with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
        futures = {
            pool.submit(_sweep_worker,
                        (args.scenario, key, value, seed, out_dir)): (i, key, value, seed, out_dir)
            for i, key, value, seed, out_dir in jobs}
        for fut in concurrent.futures.as_completed(futures):
            i, key, value, seed, out_dir = futures[fut]
            try:
                result = fut.result()
                rows[i] = {"ordinal": i, "key": key, "value": value, "seed": seed,
                           "status": "ok", **result}
            except Exception as e:
                failed = True
                rows[i] = {"ordinal": i, "key": key, "value": value, "seed": seed,
                           "status": f"error: {e}", "directory": out_dir,
                           "finalSimTime": "", "spawned": "", "absorbed": ""}

    os.makedirs(args.output, exist_ok=True)
    index_path = os.path.join(args.output, "sweep_index.csv")
    with open(index_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["ordinal", "key", "value", "seed",
                                               "directory", "status", "finalSimTime",
                                               "spawned", "absorbed"])
        writer.writeheader()
        for i in sorted(rows):
            writer.writerow(rows[i])
    print(f"sweep complete: {len(jobs)} runs, index at {index_path}")
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_validate(args) -> int:
    try:
        with open(args.scenario, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        print(f"cannot read scenario: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    from .scenario import parse_scenario
    try:
        scenario = parse_scenario(text, validate=False)
    except ScenarioError as e:
        print(str(e), file=sys.stderr)
        return EXIT_VALIDATION
    diagnostics = validate_scenario(scenario)
    errors = [d for d in diagnostics if d.severity == "error"]
    if errors:
        for d in diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_VALIDATION
    for d in diagnostics:
        print(str(d))
    print(f"{args.scenario}: ok ({len(diagnostics)} warning(s))"
          if diagnostics else f"{args.scenario}: ok")
    return EXIT_OK


def cmd_export_field(args) -> int:
    try:
        scenario = _build_scenario(args.scenario)
    except OSError as e:
        print(f"cannot read scenario: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except ScenarioError as e:
        print(f"invalid scenario: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    targets = {t.id: t for t in scenario.topography.targets}
    if args.target not in targets:
        print(f"unknown target {args.target!r}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        speed = rasterize_speed(scenario.topography, scenario.floor_field_cell_size,
                                params=scenario.floor_field)
        ff = solve_eikonal(speed, [targets[args.target].shape])
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            export_grid_csv(ff.grid, f)
    except Exception as e:
        print(f"export failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"floor field for {args.target!r} written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdkit",
        description="Microscopic pedestrian-dynamics simulator")
    parser.add_argument("--version", action="version", version=build_identifier())
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("scenario")
    p_run.add_argument("--output", "-o", default="out")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario's seed")
    p_run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a scenario field by dotted key")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--key", required=True, help="dotted scenario key to vary")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--seeds", required=True, help="comma-separated seeds")
    p_sweep.add_argument("--output", "-o", default="out")
    p_sweep.add_argument("--workers", type=int, default=4)
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("scenario")
    p_val.set_defaults(func=cmd_validate)

    p_exp = sub.add_parser("export-field", help="export a floor field as CSV")
    p_exp.add_argument("scenario")
    p_exp.add_argument("--target", required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(func=cmd_export_field)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
