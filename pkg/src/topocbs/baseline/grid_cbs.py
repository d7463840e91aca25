"""Classical discrete-time CBS and ECBS on the raw grid.

Agents move to a 4-neighbour or wait in one timestep and stay on their goal
cell forever after arriving.  Vertex conflicts put two agents on one cell at
one timestep; edge conflicts swap two agents across one edge.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ..focal import FocalQueue
from ..gridmap import Cell, GridMap, bfs_distances
from ..highlevel.search import DEFAULT_TIMEOUT, InstanceError, NoSolution, SolveTimeout

DEFAULT_NODE_BUDGET = 200_000


@dataclass(frozen=True)
class GridAgent:
    id: int
    start: Cell
    goal: Cell


@dataclass
class GridMapfInstance:
    grid: GridMap
    agents: Sequence[GridAgent]

    def __post_init__(self):
        self.agents = tuple(self.agents)
        for a in self.agents:
            for cell in (a.start, a.goal):
                if not self.grid.is_free(cell):
                    raise InstanceError(f"agent {a.id} uses non-free cell {cell}")
        if len({a.start for a in self.agents}) < len(self.agents):
            raise InstanceError("start cells must be distinct")
        if len({a.goal for a in self.agents}) < len(self.agents):
            raise InstanceError("goal cells must be distinct")


@dataclass(frozen=True)
class DiscretePath:
    cells: tuple[Cell, ...]  # cells[t] for t = 0..cost

    @property
    def cost(self) -> int:
        return len(self.cells) - 1

    @property
    def makespan(self) -> int:
        return len(self.cells) - 1

    @property
    def moves(self) -> int:
        return sum(1 for a, b in zip(self.cells, self.cells[1:]) if a != b)

    def at(self, t: int) -> Cell:
        return self.cells[t] if t < len(self.cells) else self.cells[-1]


@dataclass
class GridSolution:
    paths: list
    cost: int
    expanded_nodes: int
    generated_nodes: int
    elapsed_ms: float
    lower_bound: float = 0.0

    @property
    def distance(self) -> float:
        return float(sum(p.moves for p in self.paths))


class _Constraints:
    """Vertex and edge constraints of one agent; persistent like the topometric set."""

    __slots__ = ("vertex", "edge", "t_max", "goal_last")

    def __init__(self, vertex=frozenset(), edge=frozenset()):
        self.vertex = vertex  # {(cell, t)}
        self.edge = edge  # {(from, to, t)}: move arriving at t
        ts = [t for _, t in vertex] + [t for _, _, t in edge]
        self.t_max = max(ts, default=-1)
        self.goal_last: dict[Cell, int] = {}
        for cell, t in vertex:
            if t > self.goal_last.get(cell, -1):
                self.goal_last[cell] = t

    def with_vertex(self, cell, t):
        return _Constraints(self.vertex | {(cell, t)}, self.edge)

    def with_edge(self, u, v, t):
        return _Constraints(self.vertex, self.edge | {(u, v, t)})

    def __len__(self):
        return len(self.vertex) + len(self.edge)


def _rebuild(parents, key) -> DiscretePath:
    cells = []
    while key is not None:
        cells.append(key[0])
        key = parents[key]
    return DiscretePath(tuple(reversed(cells)))


def _prepare(grid, start, goal, constraints, h):
    constraints = constraints or _Constraints()
    if h is None:
        h = bfs_distances(grid.free, goal)
    return constraints, h


def space_time_astar(grid: GridMap, start: Cell, goal: Cell, constraints: _Constraints = None,
                     h: Optional[dict] = None, node_budget: int = DEFAULT_NODE_BUDGET,
                     deadline: Optional[float] = None) -> Optional[DiscretePath]:
    """Shortest constrained path; the agent may stop at the goal only after its last goal constraint.

    Time is capped one step past the last constraint, after which the search
    is time-independent and therefore finite.
    """
    constraints, h = _prepare(grid, start, goal, constraints, h)
    if start not in h or (start, 0) in constraints.vertex:
        return None
    cap = constraints.t_max + 1
    goal_after = constraints.goal_last.get(goal, -1)
    vertex, edge, free = constraints.vertex, constraints.edge, grid.free
    counter = itertools.count()
    start_key = (start, 0)
    open_heap = [(h[start], 0, next(counter), start, 0, start_key)]
    parents = {start_key: None}
    best_g = {start_key: 0}
    expansions = 0
    while open_heap:
        _, _, _, cell, t, key = heapq.heappop(open_heap)
        if t > best_g[key]:
            continue
        if cell == goal and t > goal_after:
            return _rebuild(parents, key)
        expansions += 1
        if expansions > node_budget:
            return None
        if deadline is not None and expansions % 512 == 0 and time.perf_counter() > deadline:
            raise SolveTimeout("deadline passed in grid low-level search")
        nt = t + 1
        x, y = cell
        for nxt in (cell, (x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nxt not in free or (nxt, nt) in vertex or (cell, nxt, nt) in edge:
                continue
            hn = h.get(nxt)
            if hn is None:
                continue
            nkey = (nxt, nt if nt <= cap else cap)
            if nt < best_g.get(nkey, 1 << 60):
                best_g[nkey] = nt
                parents[nkey] = key
                heapq.heappush(open_heap, (nt + hn, -nt, next(counter), nxt, nt, nkey))
    return None


class _ConflictTable:
    """Other agents' occupancy, for counting conflicts in the focal low level."""

    def __init__(self, paths: Sequence[Optional[DiscretePath]], skip: int):
        self.at: dict[tuple[Cell, int], int] = {}
        self.moves: dict[tuple[Cell, Cell, int], int] = {}
        self.parked: dict[Cell, list[int]] = {}
        for k, p in enumerate(paths):
            if k == skip or p is None:
                continue
            cells = p.cells
            for t, c in enumerate(cells):
                self.at[(c, t)] = self.at.get((c, t), 0) + 1
                if t > 0 and cells[t - 1] != c:
                    key = (cells[t - 1], c, t)
                    self.moves[key] = self.moves.get(key, 0) + 1
            self.parked.setdefault(cells[-1], []).append(len(cells) - 1)

    def step_conflicts(self, u: Cell, v: Cell, t: int) -> int:
        n = self.at.get((v, t), 0)
        for since in self.parked.get(v, ()):
            if t > since:
                n += 1
        if u != v:
            n += self.moves.get((v, u, t), 0)
        return n


def focal_space_time_astar(grid: GridMap, start: Cell, goal: Cell, constraints: _Constraints,
                           w: float, table: _ConflictTable, h: Optional[dict] = None,
                           node_budget: int = DEFAULT_NODE_BUDGET,
                           deadline: Optional[float] = None) -> tuple[Optional[DiscretePath], float]:
    """Focal search: a path of cost at most ``w`` times optimal, preferring few conflicts.

    Returns the path and a lower bound on the optimal cost (smallest open f
    when the goal was chosen).
    """
    constraints, h = _prepare(grid, start, goal, constraints, h)
    if start not in h or (start, 0) in constraints.vertex:
        return None, 0.0
    cap = constraints.t_max + 1
    goal_after = constraints.goal_last.get(goal, -1)
    vertex, edge, free = constraints.vertex, constraints.edge, grid.free
    queue = FocalQueue(w)
    counter = itertools.count()
    start_key = (start, 0)
    parents = {start_key: None}
    best_g = {start_key: 0}
    queue.push((start, 0, start_key, 0), float(h[start]), (0, h[start], 0, 0))
    expansions = 0
    while queue:
        lb = queue.min_f
        cell, t, key, hc = queue.pop()
        if t > best_g[key]:
            continue
        if cell == goal and t > goal_after:
            return _rebuild(parents, key), float(lb)
        expansions += 1
        if expansions > node_budget:
            return None, 0.0
        if deadline is not None and expansions % 512 == 0 and time.perf_counter() > deadline:
            raise SolveTimeout("deadline passed in grid low-level search")
        nt = t + 1
        x, y = cell
        for nxt in (cell, (x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nxt not in free or (nxt, nt) in vertex or (cell, nxt, nt) in edge:
                continue
            hn = h.get(nxt)
            if hn is None:
                continue
            nkey = (nxt, nt if nt <= cap else cap)
            if nt < best_g.get(nkey, 1 << 60):
                best_g[nkey] = nt
                parents[nkey] = key
                nhc = hc + table.step_conflicts(cell, nxt, nt)
                queue.push((nxt, nt, nkey, nhc), float(nt + hn), (nhc, nt + hn, -nt, next(counter)))
    return None, 0.0


def find_grid_conflicts(paths: Sequence[DiscretePath]):
    """Conflict count and the earliest conflict (vertex before edge, then agent pair).

    Conflicts are ``("vertex", i, j, cell, t)`` or ``("edge", i, j, u, v, t)``
    where agent i moves u -> v and agent j moves v -> u arriving at t.
    """
    horizon = max(len(p.cells) for p in paths)
    count = 0
    first = None
    for t in range(horizon):
        seen: dict[Cell, int] = {}
        for k, p in enumerate(paths):
            c = p.at(t)
            if c in seen:
                count += 1
                if first is None:
                    first = ("vertex", seen[c], k, c, t)
            else:
                seen[c] = k
        if t == 0:
            continue
        moves: dict[tuple[Cell, Cell], int] = {}
        for k, p in enumerate(paths):
            u, v = p.at(t - 1), p.at(t)
            if u != v:
                moves[(u, v)] = k
        for (u, v), k in sorted(moves.items(), key=lambda kv: kv[1]):
            other = moves.get((v, u))
            if other is not None and k < other:
                count += 1
                if first is None:
                    first = ("edge", k, other, u, v, t)
    return count, first


def validate_grid_solution(instance: GridMapfInstance, paths: Sequence[DiscretePath]) -> list[str]:
    """Problems found by an exhaustive pairwise check; empty means valid."""
    problems = []
    if len(paths) != len(instance.agents):
        return [f"{len(paths)} paths for {len(instance.agents)} agents"]
    grid = instance.grid
    for a, p in zip(instance.agents, paths):
        if p.cells[0] != a.start or p.cells[-1] != a.goal:
            problems.append(f"agent {a.id} path does not join its start and goal")
        for u, v in zip(p.cells, p.cells[1:]):
            if not grid.is_free(v) or abs(u[0] - v[0]) + abs(u[1] - v[1]) > 1:
                problems.append(f"agent {a.id} makes an illegal move {u} -> {v}")
    horizon = max(len(p.cells) for p in paths)
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            pi, pj = paths[i], paths[j]
            for t in range(horizon):
                if pi.at(t) == pj.at(t):
                    problems.append(f"vertex conflict: agents {i},{j} at {pi.at(t)} t={t}")
                if t and pi.at(t) == pj.at(t - 1) and pi.at(t - 1) == pj.at(t) and pi.at(t) != pi.at(t - 1):
                    problems.append(f"edge conflict: agents {i},{j} swap at t={t}")
    return problems


@dataclass(eq=False)
class _GridNode:
    constraints: tuple
    paths: tuple
    lbs: tuple
    cost: int
    lb: float
    conflict_count: int
    conflict: Optional[tuple]


class _GridTree:
    def __init__(self, instance, timeout, node_budget, max_ct_nodes, w, heuristics=None):
        self.instance = instance
        self.t0 = time.perf_counter()
        self.deadline = self.t0 + timeout
        self.node_budget = node_budget
        self.max_ct_nodes = max_ct_nodes
        self.w = w
        self.h = [heuristics[a.goal] if heuristics is not None and a.goal in heuristics
                  else bfs_distances(instance.grid.free, a.goal) for a in instance.agents]
        self.expanded = 0
        self.generated = 0

    def low_level(self, k, cons: _Constraints, paths) -> tuple[Optional[DiscretePath], float]:
        a = self.instance.agents[k]
        if self.w == 1.0:
            p = space_time_astar(self.instance.grid, a.start, a.goal, cons, self.h[k],
                                 self.node_budget, self.deadline)
            return p, (p.cost if p is not None else 0.0)
        table = _ConflictTable(paths, k)
        return focal_space_time_astar(self.instance.grid, a.start, a.goal, cons, self.w, table,
                                      self.h[k], self.node_budget, self.deadline)

    def make_node(self, constraints, paths, lbs):
        count, first = find_grid_conflicts(paths)
        self.generated += 1
        return _GridNode(tuple(constraints), tuple(paths), tuple(lbs),
                         sum(p.cost for p in paths), float(sum(lbs)), count, first)

    def root(self):
        n = len(self.instance.agents)
        cons = [_Constraints() for _ in range(n)]
        paths: list = [None] * n
        lbs = [0.0] * n
        for k in range(n):
            p, lb = self.low_level(k, cons[k], paths)
            if p is None:
                raise NoSolution(f"agent {k} has no path")
            paths[k], lbs[k] = p, lb
        return self.make_node(cons, paths, lbs)

    def children(self, node):
        c = node.conflict
        if c[0] == "vertex":
            _, i, j, cell, t = c
            new = [(i, node.constraints[i].with_vertex(cell, t)),
                   (j, node.constraints[j].with_vertex(cell, t))]
        else:
            _, i, j, u, v, t = c
            new = [(i, node.constraints[i].with_edge(u, v, t)),
                   (j, node.constraints[j].with_edge(v, u, t))]
        out = []
        for k, cons in new:
            p, lb = self.low_level(k, cons, node.paths)
            if p is None:
                continue
            constraints = list(node.constraints)
            constraints[k] = cons
            paths = list(node.paths)
            paths[k] = p
            lbs = list(node.lbs)
            lbs[k] = lb
            out.append(self.make_node(constraints, paths, lbs))
        return out

    def run(self, pop, push) -> GridSolution:
        try:
            push(self.root())
            while True:
                if time.perf_counter() > self.deadline:
                    raise SolveTimeout("grid high-level search timed out", self.expanded)
                if self.max_ct_nodes is not None and self.expanded >= self.max_ct_nodes:
                    raise NoSolution(f"constraint tree exceeded {self.max_ct_nodes} expansions",
                                     self.expanded)
                try:
                    node = pop()
                except IndexError:
                    raise NoSolution("constraint tree exhausted", self.expanded) from None
                self.expanded += 1
                if node.conflict is None:
                    return GridSolution(list(node.paths), node.cost, self.expanded, self.generated,
                                        (time.perf_counter() - self.t0) * 1000.0, node.lb)
                for child in self.children(node):
                    push(child)
        except SolveTimeout as exc:
            raise SolveTimeout(str(exc), self.expanded) from None


def solve_grid_cbs(instance: GridMapfInstance, timeout: float = DEFAULT_TIMEOUT,
                   node_budget: int = DEFAULT_NODE_BUDGET,
                   max_ct_nodes: Optional[int] = None,
                   heuristics: Optional[Mapping[Cell, dict]] = None) -> GridSolution:
    """Optimal CBS; ``heuristics`` optionally maps goal cells to precomputed BFS distances."""
    tree = _GridTree(instance, timeout, node_budget, max_ct_nodes, 1.0, heuristics)
    heap: list = []
    seq = itertools.count()

    def push(n):
        heapq.heappush(heap, (n.cost, n.conflict_count, next(seq), n))

    def pop():
        if not heap:
            raise IndexError
        return heapq.heappop(heap)[-1]

    return tree.run(pop, push)


def solve_grid_ecbs(instance: GridMapfInstance, omega: float = 1.2,
                    timeout: float = DEFAULT_TIMEOUT, node_budget: int = DEFAULT_NODE_BUDGET,
                    max_ct_nodes: Optional[int] = None,
                    heuristics: Optional[Mapping[Cell, dict]] = None) -> GridSolution:
    """ECBS: focal search on the constraint tree (by lower bound) and in the low level."""
    if omega < 1:
        raise ValueError("omega must be at least 1")
    if omega == 1.0:
        return solve_grid_cbs(instance, timeout, node_budget, max_ct_nodes, heuristics)
    tree = _GridTree(instance, timeout, node_budget, max_ct_nodes, omega, heuristics)
    queue = FocalQueue(omega)
    seq = itertools.count()

    def push(n):
        queue.push(n, n.lb, (n.conflict_count, n.cost, next(seq)), value=float(n.cost))

    return tree.run(queue.pop, push)
