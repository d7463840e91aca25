"""Seeded benchmark instances, timed runs of the four solvers, and CSV output.

Every method sees the same instance list per (seed, agent count).  Elapsed
time is wall clock around the solve call only; distance tables and goal
heuristics are built once per map and shared.
"""
from __future__ import annotations

import csv
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Optional, Sequence

from .baseline import GridAgent, GridMapfInstance, solve_grid_cbs, solve_grid_ecbs
from .baseline.grid_cbs import validate_grid_solution
from .gridmap import GridMap, bfs_distances
from .highlevel import (Agent, MapfInstance, NoSolution, SolveTimeout, solve_cbs, solve_ecbs,
                        validate_solution)
from .lowlevel import PlannerParams, SolverTimeout
from .topomap import RegionDistanceTable, TopometricMap, build_distance_table, read_topometric

METHODS = ("pm-cbs", "pm-ecbs", "cbs", "ecbs")
RECORD_COLUMNS = ("instance", "method", "agents", "seed", "success", "elapsed_ms", "cost_s",
                  "distance_cells", "expanded_nodes")
AGGREGATE_COLUMNS = ("method", "agents", "instances", "successes", "success_rate", "median_ms",
                     "mean_distance_cells", "median_expanded_nodes", "mean_cost_s")
TIMING_COLUMNS = frozenset({"elapsed_ms", "median_ms"})


class BenchError(ValueError):
    pass


def shipped_map_path(kind: str = "topo") -> str:
    """Path of the bundled 44x38 corridor map (``kind`` is ``topo`` or ``grid``)."""
    name = {"topo": "corridor_44x38.topo.json", "grid": "corridor_44x38.map"}[kind]
    return str(resources.files("topocbs").joinpath("data", name))


@dataclass(frozen=True)
class BenchConfig:
    topo_path: Optional[str] = None  # None: the shipped map
    grid_path: Optional[str] = None  # None: the grid embedded in the topometric map
    agent_counts: tuple[int, ...] = (4, 6, 8, 10)
    instances: int = 500
    timeout: float = 30.0
    seed: int = 0
    r_speed: float = 1.0
    i_margin: float = 1.3
    omega: float = 1.2
    methods: tuple[str, ...] = METHODS
    jobs: int = 1
    max_ct_nodes: Optional[int] = None  # deterministic cap, independent of wall clock

    def __post_init__(self):
        object.__setattr__(self, "agent_counts", tuple(self.agent_counts))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.agent_counts or any(n < 1 for n in self.agent_counts):
            raise BenchError("agent counts must be at least 1")
        if self.instances < 1:
            raise BenchError("instances must be at least 1")
        if not self.timeout > 0:
            raise BenchError("timeout must be positive")
        if self.jobs < 1:
            raise BenchError("jobs must be at least 1")
        if self.omega < 1:
            raise BenchError("omega must be at least 1")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise BenchError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
        PlannerParams(self.r_speed, self.i_margin)

    @property
    def params(self) -> PlannerParams:
        return PlannerParams(self.r_speed, self.i_margin)


@dataclass
class BenchRecord:
    instance: int
    method: str
    agents: int
    seed: int
    success: bool
    elapsed_ms: float
    cost_s: Optional[float] = None
    distance_cells: Optional[float] = None
    expanded_nodes: Optional[int] = None
    valid: Optional[bool] = field(default=None, compare=False)  # not written to CSV

    def __post_init__(self):
        # a failed run's expansion count depends on the wall clock, so it is dropped too
        if not self.success and (self.cost_s is not None or self.distance_cells is not None
                                 or self.expanded_nodes is not None):
            raise BenchError("failed records carry no cost, distance or expansion count")


@dataclass
class Aggregate:
    method: str
    agents: int
    instances: int
    successes: int
    success_rate: float  # percent
    median_ms: Optional[float]
    mean_distance_cells: Optional[float]
    median_expanded_nodes: Optional[float]
    mean_cost_s: Optional[float]


def _rng(seed: int, n_agents: int) -> random.Random:
    return random.Random(seed * 1_000_003 + n_agents)


def generate_instances(topo: TopometricMap, n_agents: int, count: int, seed: int,
                       params: PlannerParams = PlannerParams()) -> list[MapfInstance]:
    """``count`` instances with pairwise distinct start regions and distinct goal regions.

    Agents start and finish on the lexicographically smallest cell of their
    regions.  The list depends only on (map, n_agents, count, seed).
    """
    if n_agents > len(topo.regions):
        raise BenchError(f"{n_agents} agents exceed the map's {len(topo.regions)} regions")
    if n_agents < 1 or count < 0:
        raise BenchError("need at least one agent and a non-negative count")
    rng = _rng(seed, n_agents)
    out = []
    for _ in range(count):
        starts = rng.sample(topo.regions, n_agents)
        goals = rng.sample(topo.regions, n_agents)
        agents = [Agent(k, s.representative, g.representative)
                  for k, (s, g) in enumerate(zip(starts, goals))]
        out.append(MapfInstance(topo, agents, params))
    return out


def grid_instance(instance: MapfInstance, grid: Optional[GridMap] = None) -> GridMapfInstance:
    grid = grid or instance.topo.grid
    return GridMapfInstance(grid, [GridAgent(a.id, a.start, a.goal) for a in instance.agents])


class _Runner:
    """Per-map state shared by all solves of one benchmark (or one worker process)."""

    def __init__(self, topo: TopometricMap, grid: Optional[GridMap], config: BenchConfig,
                 table: Optional[RegionDistanceTable] = None):
        self.topo = topo
        self.grid = grid or topo.grid
        self.config = config
        self.table = table or build_distance_table(topo)
        self._h: dict = {}

    def heuristics(self, instance: GridMapfInstance) -> dict:
        for a in instance.agents:
            if a.goal not in self._h:
                self._h[a.goal] = bfs_distances(self.grid.free, a.goal)
        return self._h

    def run_one(self, method: str, index: int, instance: MapfInstance) -> BenchRecord:
        cfg = self.config
        n = len(instance.agents)
        tau = instance.params.cell_time
        if method.startswith("pm-"):
            solver = solve_cbs if method == "pm-cbs" else (
                lambda inst, **kw: solve_ecbs(inst, cfg.omega, **kw))
            t0 = time.perf_counter()
            try:
                sol = solver(instance, timeout=cfg.timeout, table=self.table,
                             max_ct_nodes=cfg.max_ct_nodes)
            except (SolveTimeout, SolverTimeout, NoSolution):
                elapsed = (time.perf_counter() - t0) * 1000.0
                return BenchRecord(index, method, n, cfg.seed, False, elapsed)
            elapsed = (time.perf_counter() - t0) * 1000.0
            valid = validate_solution(instance, sol.paths).ok
            return BenchRecord(index, method, n, cfg.seed, True, elapsed, sol.cost, sol.distance,
                               sol.expanded_nodes, valid)
        ginst = grid_instance(instance, self.grid)
        h = self.heuristics(ginst)
        t0 = time.perf_counter()
        try:
            if method == "cbs":
                sol = solve_grid_cbs(ginst, cfg.timeout, max_ct_nodes=cfg.max_ct_nodes, heuristics=h)
            else:
                sol = solve_grid_ecbs(ginst, cfg.omega, cfg.timeout, max_ct_nodes=cfg.max_ct_nodes,
                                      heuristics=h)
        except (SolveTimeout, SolverTimeout, NoSolution):
            elapsed = (time.perf_counter() - t0) * 1000.0
            return BenchRecord(index, method, n, cfg.seed, False, elapsed)
        elapsed = (time.perf_counter() - t0) * 1000.0
        valid = not validate_grid_solution(ginst, sol.paths)
        return BenchRecord(index, method, n, cfg.seed, True, elapsed, sol.cost * tau, sol.distance,
                           sol.expanded_nodes, valid)


_worker: Optional[_Runner] = None


def _init_worker(topo, grid, config):
    global _worker
    _worker = _Runner(topo, grid, config)


def _work(task):
    method, index, cells = task
    agents = [Agent(k, s, g) for k, (s, g) in enumerate(cells)]
    inst = MapfInstance(_worker.topo, agents, _worker.config.params)
    return _worker.run_one(method, index, inst)


def load_maps(config: BenchConfig) -> tuple[TopometricMap, GridMap]:
    from .gridmap import load_grid
    topo = read_topometric(config.topo_path or shipped_map_path("topo"))
    grid = load_grid(config.grid_path) if config.grid_path else topo.grid
    return topo, grid


def run_benchmark(config: BenchConfig, topo: Optional[TopometricMap] = None,
                  grid: Optional[GridMap] = None,
                  progress: Optional[Callable[[BenchRecord], None]] = None) -> list[BenchRecord]:
    """Run every method on every generated instance; records ordered by (agents, instance, method)."""
    if topo is None:
        topo, grid = load_maps(config)
    grid = grid or topo.grid
    plan_ = []
    for n in config.agent_counts:
        insts = generate_instances(topo, n, config.instances, config.seed, config.params)
        for i, inst in enumerate(insts):
            for m in config.methods:
                plan_.append((m, i, n, inst))
    if config.jobs == 1:
        runner = _Runner(topo, grid, config)
        records = []
        for m, i, n, inst in plan_:
            rec = runner.run_one(m, i, inst)
            if progress:
                progress(rec)
            records.append(rec)
        return records
    with ProcessPoolExecutor(config.jobs, initializer=_init_worker,
                             initargs=(topo, grid, config)) as pool:
        records = []
        for rec in pool.map(_work, [(m, i, [(a.start, a.goal) for a in inst.agents])
                                         for m, i, _, inst in plan_], chunksize=1):
            if progress:
                progress(rec)
            records.append(rec)
    return records


def _median(xs):
    return statistics.median(xs) if xs else None


def _mean(xs):
    return statistics.fmean(xs) if xs else None


def aggregate(records: Iterable[BenchRecord]) -> list[Aggregate]:
    """Table cells per (method, agent count); statistics over successes only."""
    groups: dict[tuple[str, int], list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.agents), []).append(r)
    order = {m: k for k, m in enumerate(METHODS)}
    out = []
    for (m, n), rs in sorted(groups.items(), key=lambda kv: (kv[0][1], order.get(kv[0][0], 99))):
        ok = [r for r in rs if r.success]
        out.append(Aggregate(
            m, n, len(rs), len(ok), 100.0 * len(ok) / len(rs),
            _median([r.elapsed_ms for r in ok]),
            _mean([r.distance_cells for r in ok]),
            _median([r.expanded_nodes for r in ok]),
            _mean([r.cost_s for r in ok])))
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(round(v, 6))
    return str(v)


def emit_csv(rows: Sequence[BenchRecord | Aggregate], path, include_timing: bool = True,
             kind: Optional[str] = None) -> None:
    """Write records or aggregates with a fixed header; empty input gives a header-only file.

    ``include_timing=False`` drops the wall-clock columns so two runs can be
    compared byte for byte.
    """
    if kind is None:
        kind = "aggregate" if rows and isinstance(rows[0], Aggregate) else "records"
    columns = [c for c in (AGGREGATE_COLUMNS if kind == "aggregate" else RECORD_COLUMNS)
               if include_timing or c not in TIMING_COLUMNS]
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in columns])


def read_records(path) -> list[BenchRecord]:
    def opt(v, cast):
        return None if v == "" else cast(v)

    with open(path, newline="") as f:
        return [BenchRecord(int(r["instance"]), r["method"], int(r["agents"]), int(r["seed"]),
                            r["success"] == "1", float(r["elapsed_ms"]), opt(r["cost_s"], float),
                            opt(r["distance_cells"], float), opt(r["expanded_nodes"], int))
                for r in csv.DictReader(f)]


def summary_table(aggregates: Sequence[Aggregate]) -> str:
    """Text table with metric rows per agent count, method columns."""
    methods = [m for m in METHODS if any(a.method == m for a in aggregates)]
    counts = sorted({a.agents for a in aggregates})
    cell = {(a.method, a.agents): a for a in aggregates}
    metrics = (("Median time (ms)", "median_ms", 2), ("Average distance (cells)",
               "mean_distance_cells", 2), ("Success rate (%)", "success_rate", 2),
               ("Median expanded nodes", "median_expanded_nodes", 1))
    head = f"{'metric':<26}{'agents':>7}" + "".join(f"{m:>12}" for m in methods)
    lines = [head, "-" * len(head)]
    for title, attr, digits in metrics:
        for n in counts:
            vals = []
            for m in methods:
                a = cell.get((m, n))
                v = None if a is None else getattr(a, attr)
                vals.append(f"{'-' if v is None else f'{v:.{digits}f}':>12}")
            lines.append(f"{title:<26}{n:>7}" + "".join(vals))
    return "\n".join(lines)
