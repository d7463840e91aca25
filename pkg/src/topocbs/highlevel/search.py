"""Constraint-tree search over topometric paths: optimal CBS and focal ECBS."""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..focal import FocalQueue
from ..gridmap import Cell
from ..lowlevel import (DEFAULT_NODE_BUDGET, BudgetExceeded, PlannerParams, SolverTimeout,
                        TimedPath, plan)
from ..timedomain import ConstraintSet, IntervalConstraint, overlaps
from ..topomap import RegionDistanceTable, TopometricMap, build_distance_table
from .conflicts import Conflict, constraints_for, find_conflicts, occupancy_intervals

DEFAULT_TIMEOUT = 30.0


class InstanceError(ValueError):
    pass


class NoSolution(RuntimeError):
    """The constraint tree was exhausted or its node limit reached."""

    def __init__(self, msg, expanded=0):
        super().__init__(msg)
        self.expanded = expanded


class SolveTimeout(SolverTimeout):
    def __init__(self, msg, expanded=0):
        super().__init__(msg)
        self.expanded = expanded


@dataclass(frozen=True)
class Agent:
    id: int
    start: Cell
    goal: Cell


@dataclass
class MapfInstance:
    topo: TopometricMap
    agents: Sequence[Agent]
    params: PlannerParams = field(default_factory=PlannerParams)
    check_distinct: bool = True

    def __post_init__(self):
        self.agents = tuple(self.agents)
        starts, goals = set(), set()
        for a in self.agents:
            for what, cell in (("start", a.start), ("goal", a.goal)):
                if not self.topo.grid.is_free(cell):
                    raise InstanceError(f"agent {a.id} {what} {cell} is not a free cell")
                if self.topo.region_of(cell) is None:
                    raise InstanceError(f"agent {a.id} {what} {cell} is outside every region")
            starts.add(self.topo.region_of(a.start))
            goals.add(self.topo.region_of(a.goal))
        if self.check_distinct and (len(starts) < len(self.agents) or len(goals) < len(self.agents)):
            raise InstanceError("start regions and goal regions must be pairwise distinct")


@dataclass
class Solution:
    paths: list
    cost: float
    expanded_nodes: int
    generated_nodes: int
    elapsed_ms: float

    @property
    def distance(self) -> float:
        return float(sum(p.length for p in self.paths))


@dataclass(eq=False)
class CTNode:
    constraints: ConstraintSet
    paths: tuple[TimedPath, ...]
    cost: float
    conflict_count: int
    conflict: Optional[Conflict]
    parent: Optional["CTNode"] = None
    depth: int = 0


class _Tree:
    """Shared node construction for the two high-level drivers."""

    def __init__(self, instance: MapfInstance, table: Optional[RegionDistanceTable],
                 timeout: float, node_budget: int, max_ct_nodes: Optional[int]):
        self.instance = instance
        self.table = table or build_distance_table(instance.topo)
        self.params = instance.params
        self.dt = instance.params.dt
        self.node_budget = node_budget
        self.max_ct_nodes = max_ct_nodes
        self.t0 = time.perf_counter()
        self.deadline = self.t0 + timeout
        self.expanded = 0
        self.generated = 0

    def low_level(self, agent: int, constraints: ConstraintSet) -> Optional[TimedPath]:
        a = self.instance.agents[agent]
        try:
            return plan(a.start, a.goal, self.instance.topo, self.table,
                        constraints.for_agent(agent), self.params,
                        node_budget=self.node_budget, deadline=self.deadline)
        except BudgetExceeded:
            return None

    def make_node(self, constraints, paths, parent=None) -> CTNode:
        count, first = find_conflicts(paths, self.dt)
        self.generated += 1
        return CTNode(constraints, tuple(paths), sum(p.arrival for p in paths), count, first,
                      parent, 0 if parent is None else parent.depth + 1)

    def root(self) -> CTNode:
        cs = ConstraintSet()
        paths = []
        for k in range(len(self.instance.agents)):
            p = self.low_level(k, cs)
            if p is None:
                raise NoSolution(f"agent {k} has no path", 0)
            paths.append(p)
        return self.make_node(cs, paths)

    def children(self, node: CTNode) -> list[CTNode]:
        conflict = node.conflict
        new = constraints_for(conflict, self.dt)
        out = []
        for agent, c in zip(conflict.agents, new):
            if not _violated(node.paths[agent], c):
                continue
            cs = node.constraints.add(agent, c)
            path = self.low_level(agent, cs)
            if path is None:
                continue
            paths = list(node.paths)
            paths[agent] = path
            out.append(self.make_node(cs, paths, node))
        return out

    def check_limits(self):
        if time.perf_counter() > self.deadline:
            raise SolveTimeout("high-level search timed out", self.expanded)
        if self.max_ct_nodes is not None and self.expanded >= self.max_ct_nodes:
            raise NoSolution(f"constraint tree exceeded {self.max_ct_nodes} expansions", self.expanded)

    def solution(self, node: CTNode) -> Solution:
        return Solution(list(node.paths), node.cost, self.expanded, self.generated,
                        (time.perf_counter() - self.t0) * 1000.0)


def _violated(path: TimedPath, c: IntervalConstraint) -> bool:
    return any(region == c.region and overlaps(iv, (c.start, c.end))
               for region, iv in occupancy_intervals(path))


def _run(tree: _Tree, pop, push) -> Solution:
    try:
        root = tree.root()
    except SolverTimeout:
        raise SolveTimeout("timed out while planning the root", 0) from None
    push(root)
    while True:
        tree.check_limits()
        try:
            node = pop()
        except IndexError:
            raise NoSolution("constraint tree exhausted", tree.expanded) from None
        tree.expanded += 1
        if node.conflict is None:
            return tree.solution(node)
        try:
            kids = tree.children(node)
        except SolverTimeout:
            raise SolveTimeout("high-level search timed out", tree.expanded) from None
        for child in kids:
            push(child)


def solve_cbs(instance: MapfInstance, timeout: float = DEFAULT_TIMEOUT,
              table: Optional[RegionDistanceTable] = None,
              node_budget: int = DEFAULT_NODE_BUDGET,
              max_ct_nodes: Optional[int] = None) -> Solution:
    """Optimal-order constraint-tree search (lowest cost, then fewest conflicts, then FIFO)."""
    tree = _Tree(instance, table, timeout, node_budget, max_ct_nodes)
    heap: list = []
    seq = itertools.count()

    def push(n: CTNode):
        heapq.heappush(heap, (n.cost, n.conflict_count, next(seq), n))

    def pop() -> CTNode:
        if not heap:
            raise IndexError
        return heapq.heappop(heap)[-1]

    return _run(tree, pop, push)


def solve_ecbs(instance: MapfInstance, omega: float = 1.2, timeout: float = DEFAULT_TIMEOUT,
               table: Optional[RegionDistanceTable] = None,
               node_budget: int = DEFAULT_NODE_BUDGET,
               max_ct_nodes: Optional[int] = None) -> Solution:
    """Focal search on the constraint tree; the low level stays plain best-first.

    FOCAL holds open nodes costing at most ``omega`` times the cheapest open
    node and is ordered by conflict count, then cost, then FIFO.
    """
    tree = _Tree(instance, table, timeout, node_budget, max_ct_nodes)
    queue = FocalQueue(omega)
    seq = itertools.count()

    def push(n: CTNode):
        queue.push(n, n.cost, (n.conflict_count, n.cost, next(seq)))

    return _run(tree, queue.pop, push)
