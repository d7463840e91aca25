"""Single-agent time-slot search over a topometric map.

A navigation node sits at the gate through which the agent entered its
current region and commits to the opening it will leave by.  Children are
generated per (neighbour of the next region, free slot of the next region);
the agent waits in front of the gate until the chosen slot opens.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Mapping, Optional, Sequence

from .gridmap import Cell
from .timedomain import INF, TimeSlot, time_slots
from .topomap import RegionDistanceTable, TopometricMap

DEFAULT_NODE_BUDGET = 100_000


class PlanningError(ValueError):
    """Bad planner input such as a start or goal outside free space."""


class BudgetExceeded(RuntimeError):
    """The node budget ran out before the search finished."""


class SolverTimeout(RuntimeError):
    """The wall-clock deadline passed during a search."""


@dataclass(frozen=True)
class PlannerParams:
    r_speed: float = 1.0
    i_margin: float = 1.3
    delta_t: Optional[float] = None  # None: one cell traversal time

    def __post_init__(self):
        if not self.r_speed > 0:
            raise ValueError("r_speed must be positive")
        if not self.i_margin > 1:
            raise ValueError("i_margin must be greater than 1")
        if self.delta_t is not None and self.delta_t < 0:
            raise ValueError("delta_t must be non-negative")

    @property
    def cell_time(self) -> float:
        return self.i_margin / self.r_speed

    @property
    def dt(self) -> float:
        return self.cell_time if self.delta_t is None else self.delta_t

    def travel_time(self, cells: float) -> float:
        return cells / self.r_speed * self.i_margin


@dataclass(eq=False, slots=True)
class NavNode:
    prev_region: Optional[int]
    cur_region: int
    next_region: Optional[int]  # None on the terminal node at the goal cell
    entry_opening: Optional[int]
    exit_opening: Optional[int]
    t_current: float
    t_end: float
    path_len: float
    waited: float
    entry_time: float
    slot_index: int
    position: Cell
    parent: Optional["NavNode"] = None

    @property
    def is_goal(self) -> bool:
        return self.next_region is None


@dataclass(frozen=True)
class Visit:
    region: int
    entry: float
    exit: float
    waypoints: tuple[Cell, ...]
    entry_opening: Optional[int] = None


@dataclass(frozen=True)
class TimedPath:
    visits: tuple[Visit, ...]
    arrival: float
    goal_region: int
    length: float

    @property
    def regions(self) -> list[int]:
        return [v.region for v in self.visits]

    @cached_property
    def occupancy(self) -> tuple[tuple[int, tuple[float, float]], ...]:
        """(region, [entry, next entry]) per visit; the last visit never ends."""
        vs = self.visits
        return tuple((v.region, (v.entry, vs[k + 1].entry if k + 1 < len(vs) else INF))
                     for k, v in enumerate(vs))

    @cached_property
    def crossings(self) -> tuple[tuple[int, int, int, float, tuple[float, float]], ...]:
        """(opening, from region, to region, crossing time, occupancy of the entered region)."""
        vs, occ = self.visits, self.occupancy
        return tuple((vs[k].entry_opening, vs[k - 1].region, vs[k].region, vs[k].entry, occ[k][1])
                     for k in range(1, len(vs)))


def node_priority(node: NavNode, goal: Cell, params: PlannerParams) -> float:
    """Arrival estimate: time at the node plus straight-line time to the goal."""
    dx = node.position[0] - goal[0]
    dy = node.position[1] - goal[1]
    return node.t_current + params.travel_time(math.hypot(dx, dy))


def region_slots(constraints: Mapping[int, Sequence[tuple[float, float]]],
                 region: int) -> list[TimeSlot]:
    return time_slots(constraints.get(region, ()))


@lru_cache(maxsize=1 << 16)
def _slots_of(intervals: tuple) -> tuple[TimeSlot, ...]:
    return tuple(time_slots(intervals))


_FREE = (TimeSlot(0.0, INF),)


class SearchContext:
    """Everything one ``plan`` call needs: map, distances, parameters and slot cache."""

    __slots__ = ("topo", "table", "params", "constraints", "goal", "goal_region", "_slots")

    def __init__(self, topo: TopometricMap, table: RegionDistanceTable, params: PlannerParams,
                 constraints: Mapping[int, Sequence[tuple[float, float]]], goal: Cell):
        self.topo = topo
        self.table = table
        self.params = params
        self.constraints = constraints
        self.goal = goal
        self.goal_region = topo.region_of(goal)
        self._slots: dict[int, tuple[TimeSlot, ...]] = {}

    def slots(self, region: int) -> tuple[TimeSlot, ...]:
        s = self._slots.get(region)
        if s is None:
            c = self.constraints.get(region)
            s = _slots_of(tuple(tuple(x) for x in c)) if c else _FREE
            self._slots[region] = s
        return s


def expand(node: NavNode, ctx: SearchContext) -> list[NavNode]:
    """Children of ``node``: cross into its next region in each feasible slot.

    Filters, in order: the slot must open while the agent may still stay in
    its current region (departure no later than ``node.t_end``); the slot must
    still be open when the agent reaches the gate; a planned return to the
    current region needs a finite current slot; and re-entering the region
    just left may not reuse the slot the agent occupied there.
    """
    if node.next_region is None:
        return []
    table, params = ctx.table, ctx.params
    cur, nxt, oid = node.cur_region, node.next_region, node.exit_opening
    gate_in = table.gate_cell[(oid, nxt)]
    if node.entry_opening is not None:
        steps = table.gate_distances[cur][(node.entry_opening, oid)] + 1
    else:
        steps = table.distance(cur, node.position, table.gate_cell[(oid, cur)]) + 1
    reach = node.t_current + params.travel_time(steps)
    forbidden_slot = -1
    if nxt == node.prev_region and node.parent is not None:
        forbidden_slot = node.parent.slot_index
    path_len = node.path_len + steps
    t_end = node.t_end
    neighbours = ctx.topo.adjacency[nxt]
    children = []
    for idx, slot in enumerate(ctx.slots(nxt)):
        depart = reach if reach > slot.start else slot.start
        if depart > t_end:
            break
        if slot.end <= depart or idx == forbidden_slot:
            continue
        waited = node.waited + (depart - reach)
        if nxt == ctx.goal_region and slot.end == INF:
            to_goal = table.distance(nxt, gate_in, ctx.goal)
            children.append(NavNode(
                cur, nxt, None, oid, None,
                depart + params.travel_time(to_goal), INF, path_len + to_goal, waited,
                depart, idx, ctx.goal, node))
        for oid2, after in neighbours:
            if after == cur and t_end == INF:
                continue
            children.append(NavNode(
                cur, nxt, after, oid, oid2, depart, slot.end, path_len, waited,
                depart, idx, gate_in, node))
    return children


def roots(start: Cell, ctx: SearchContext) -> list[NavNode]:
    region = ctx.topo.region_of(start)
    slots = ctx.slots(region)
    if not slots or slots[0].start > 0:
        return []
    t_end = slots[0].end
    out = []
    if region == ctx.goal_region and t_end == INF:
        d = ctx.table.distance(region, start, ctx.goal)
        out.append(NavNode(None, region, None, None, None, ctx.params.travel_time(d), INF,
                           d, 0.0, 0.0, 0, ctx.goal))
    for oid, nbr in ctx.topo.neighbors(region):
        out.append(NavNode(None, region, nbr, None, oid, 0.0, t_end, 0.0, 0.0, 0.0, 0, start))
    return out


def _reconstruct(goal_node: NavNode, ctx: SearchContext, start: Cell) -> TimedPath:
    chain = []
    n: Optional[NavNode] = goal_node
    while n is not None:
        chain.append(n)
        n = n.parent
    chain.reverse()
    gate_cell = ctx.table.gate_cell
    visits = []
    for k, n in enumerate(chain):
        first = start if n.entry_opening is None else gate_cell[(n.entry_opening, n.cur_region)]
        last = ctx.goal if n.is_goal else gate_cell[(n.exit_opening, n.cur_region)]
        cells = ctx.table.cell_path(n.cur_region, first, last).cells
        exit_time = chain[k + 1].entry_time if k + 1 < len(chain) else INF
        visits.append(Visit(n.cur_region, n.entry_time, exit_time, cells, n.entry_opening))
    return TimedPath(tuple(visits), goal_node.t_current, goal_node.cur_region, goal_node.path_len)


def plan(start: Cell, goal: Cell, topo: TopometricMap, table: RegionDistanceTable,
         constraints: Mapping[int, Sequence[tuple[float, float]]] | None = None,
         params: PlannerParams = PlannerParams(),
         node_budget: int = DEFAULT_NODE_BUDGET,
         deadline: Optional[float] = None,
         stats: Optional[dict] = None) -> Optional[TimedPath]:
    """Earliest-arrival path from ``start`` to ``goal`` under region constraints.

    ``constraints`` maps region id to merged, sorted forbidden intervals for
    this agent.  Returns None when no constrained path exists; raises
    BudgetExceeded when ``node_budget`` expansions do not settle the search.
    """
    if topo.region_of(start) is None:
        raise PlanningError(f"start {start} is not inside any region")
    if topo.region_of(goal) is None:
        raise PlanningError(f"goal {goal} is not inside any region")
    ctx = SearchContext(topo, table, params, constraints or {}, goal)
    counter = itertools.count()
    open_heap: list = []
    gx, gy = goal
    slots = ctx.slots

    def push(n: NavNode):
        # node_priority inlined: t_current + straight-line distance * i_margin / r_speed
        x, y = n.position
        f = n.t_current + math.hypot(x - gx, y - gy) / params.r_speed * params.i_margin
        nxt = -1 if n.next_region is None else n.next_region
        heapq.heappush(open_heap, (f, n.t_current, n.cur_region, nxt,
                                   slots(n.cur_region)[n.slot_index].start, next(counter), n))

    for r in roots(start, ctx):
        push(r)
    closed = set()
    expansions = 0
    while open_heap:
        n = heapq.heappop(open_heap)[-1]
        if n.is_goal:
            if stats is not None:
                stats["expansions"] = expansions
            return _reconstruct(n, ctx, start)
        key = (n.entry_opening, n.cur_region, n.exit_opening, n.slot_index)
        if key in closed:
            continue
        closed.add(key)
        expansions += 1
        if expansions > node_budget:
            raise BudgetExceeded(f"low-level search exceeded {node_budget} expansions")
        if deadline is not None and expansions % 256 == 0 and time.perf_counter() > deadline:
            raise SolverTimeout("deadline passed in low-level search")
        for child in expand(n, ctx):
            if (child.entry_opening, child.cur_region, child.exit_opening,
                    child.slot_index) not in closed:
                push(child)
    if stats is not None:
        stats["expansions"] = expansions
    return None
