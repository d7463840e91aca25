"""Command-line entry point: segment, solve, check, bench.

Exit status is 0 on success, 1 on validation or configuration errors and 2
when a solver runs out of time.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from . import bench
from .baseline import (GridAgent, GridMapfInstance, solve_grid_cbs, solve_grid_ecbs,
                       validate_grid_solution)
from .gridmap import GridFormatError, load_grid
from .highlevel import (InstanceError, MapfInstance, NoSolution, SolveTimeout, solve_cbs,
                        solve_ecbs, validate_solution)
from .lowlevel import PlannerParams, SolverTimeout
from .solution_io import (DocumentError, dump_solution, grid_paths, grid_solution_document,
                          load_solution, params_from_document, parse_agents, topometric_paths,
                          topometric_solution_document)
from .topomap import TopoMapError, read_topometric, segment_corridor_grid, write_topometric

EXIT_OK, EXIT_INVALID, EXIT_TIMEOUT = 0, 1, 2


class CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path) as f:
            return f.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def _load_topo(path: str):
    try:
        return read_topometric(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def cmd_segment(args) -> int:
    try:
        grid = load_grid(args.grid)
    except OSError as exc:
        raise CliError(f"cannot read {args.grid}: {exc.strerror}") from None
    topo = segment_corridor_grid(grid, strict=True)
    try:
        write_topometric(topo, args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc.strerror}") from None
    print(f"{len(topo.regions)} regions, {len(topo.openings)} openings")
    return EXIT_OK


def cmd_solve(args) -> int:
    topo = _load_topo(args.topo)
    agents = parse_agents(_read(args.agents))
    params = PlannerParams(args.speed, args.margin)
    omega = args.omega if args.method in ("pm-ecbs", "ecbs") else None
    try:
        if args.method in ("pm-cbs", "pm-ecbs"):
            inst = MapfInstance(topo, agents, params)
            if args.method == "pm-cbs":
                sol = solve_cbs(inst, timeout=args.timeout)
            else:
                sol = solve_ecbs(inst, args.omega, timeout=args.timeout)
            doc = topometric_solution_document(agents, sol.paths, sol.cost, sol.expanded_nodes,
                                               sol.elapsed_ms, args.method, params, omega)
        else:
            ginst = GridMapfInstance(topo.grid, [GridAgent(a.id, a.start, a.goal) for a in agents])
            if args.method == "cbs":
                sol = solve_grid_cbs(ginst, args.timeout)
            else:
                sol = solve_grid_ecbs(ginst, args.omega, args.timeout)
            doc = grid_solution_document(agents, sol.paths, sol.cost, sol.expanded_nodes,
                                         sol.elapsed_ms, args.method, params, omega)
    except (SolveTimeout, SolverTimeout):
        print(f"timeout after {args.timeout} s", file=sys.stderr)
        return EXIT_TIMEOUT
    except NoSolution as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _write(args.out, dump_solution(doc))
    print(f"cost {doc['cost']:.6g}, expanded nodes {doc['expanded_nodes']}, "
          f"elapsed ms {doc['elapsed_ms']:.3f}")
    return EXIT_OK


def cmd_check(args) -> int:
    topo = _load_topo(args.topo)
    doc = load_solution(_read(args.solution))
    if not doc["agents"]:
        print("solution contains no agents")
        return EXIT_INVALID
    if doc["kind"] == "grid":
        agents, paths = grid_paths(doc)
        problems = validate_grid_solution(GridMapfInstance(topo.grid, agents), paths)
    else:
        agents, paths = topometric_paths(doc)
        inst = MapfInstance(topo, agents, params_from_document(doc), check_distinct=False)
        problems = validate_solution(inst, paths).lines()
    if problems:
        for line in problems:
            print(line)
        print(f"INVALID: {len(problems)} problem(s)")
        return EXIT_INVALID
    print(f"OK: {len(agents)} agents, no conflicts, no violations")
    return EXIT_OK


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise CliError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not values:
        raise CliError("empty agent list")
    return values


def cmd_bench(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    config = bench.BenchConfig(
        topo_path=args.topo, grid_path=args.grid, agent_counts=_int_list(args.agents),
        instances=args.instances, timeout=args.timeout, seed=args.seed, r_speed=args.speed,
        i_margin=args.margin, omega=args.omega, methods=methods, jobs=args.jobs,
        max_ct_nodes=args.max_ct_nodes)
    try:
        topo, grid = bench.load_maps(config)
    except OSError as exc:
        raise CliError(f"cannot load map: {exc}") from None
    records = bench.run_benchmark(config, topo, grid)
    aggregates = bench.aggregate(records)
    os.makedirs(args.out_dir, exist_ok=True)
    bench.emit_csv(records, os.path.join(args.out_dir, "records.csv"), kind="records")
    bench.emit_csv(aggregates, os.path.join(args.out_dir, "aggregates.csv"), kind="aggregate")
    print(bench.summary_table(aggregates))
    invalid = [r for r in records if r.success and r.valid is False]
    if invalid:
        print(f"{len(invalid)} solution(s) failed validation", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit 1, keeping 2 for timeouts."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="topocbs", description="Multi-agent path finding on "
                                "topometric maps with CBS/ECBS and grid baselines.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("segment", help="segment a corridor grid into a topometric map")
    s.add_argument("--grid", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--topo", required=True)
    s.add_argument("--agents", required=True)
    s.add_argument("--method", required=True, choices=bench.METHODS)
    s.add_argument("--omega", type=float, default=1.2)
    s.add_argument("--speed", type=float, default=1.0)
    s.add_argument("--margin", type=float, default=1.3)
    s.add_argument("--timeout", type=float, default=30.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("check", help="validate a solution file")
    s.add_argument("--topo", required=True)
    s.add_argument("--solution", required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("bench", help="run the benchmark protocol")
    s.add_argument("--topo", default=None, help="topometric map (default: the shipped map)")
    s.add_argument("--grid", default=None, help="grid for the baselines (default: the map's grid)")
    s.add_argument("--agents", default="4,6,8,10")
    s.add_argument("--instances", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--timeout", type=float, default=30.0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--methods", default=",".join(bench.METHODS))
    s.add_argument("--omega", type=float, default=1.2)
    s.add_argument("--speed", type=float, default=1.0)
    s.add_argument("--margin", type=float, default=1.3)
    s.add_argument("--max-ct-nodes", type=int, default=None,
                   help="deterministic per-solve cap on expanded constraint-tree nodes")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, DocumentError, GridFormatError, TopoMapError, InstanceError,
            bench.BenchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
