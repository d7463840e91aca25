"""Brute-force reference solvers used only by the tests.

They share no search code with the package: each works cell by cell on the
raw grid, with time cut into quanta of ``delta`` seconds.  Region membership
comes from the topometric map, nothing else.

Model: a move to a 4-neighbour takes one cell time; the agent counts as
inside the region of the cell it last arrived at until the move finishes.
Two agents never share a region during a quantum, and two agents may not
finish opposite moves across the same gate at the same instant.
"""
from __future__ import annotations

import heapq
import itertools
from collections import deque

EPS = 1e-9
DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _quanta(params, delta):
    k = round(params.cell_time / delta)
    assert abs(k * delta - params.cell_time) < 1e-9, "cell time must be a multiple of delta"
    return k


def _neighbors(free, c):
    return [(c[0] + dx, c[1] + dy) for dx, dy in DIRS if (c[0] + dx, c[1] + dy) in free]


def _bfs(free, src):
    dist = {src: 0}
    q = deque([src])
    while q:
        c = q.popleft()
        for n in _neighbors(free, c):
            if n not in dist:
                dist[n] = dist[c] + 1
                q.append(n)
    return dist


def single_agent_oracle(topo, start, goal, constraints, params, delta=0.05, slack_steps=60):
    """Earliest arrival time at ``goal`` under closed forbidden intervals per region.

    ``constraints`` maps region id to (start, end) pairs.  Returns None when
    the goal cannot be reached within the search horizon.
    """
    k = _quanta(params, delta)
    free = topo.grid.free
    region = {c: topo.region_of(c) for c in free}
    ivs = {r: [(s / delta, e / delta) for s, e in v] for r, v in constraints.items()}
    finite_ends = [e for v in ivs.values() for _, e in v if e != float("inf")]
    horizon = int(max(finite_ends, default=0)) + 2 + slack_steps * k

    def blocked(r, q):
        return any(q < e - EPS and q + 1 > s + EPS for s, e in ivs.get(r, ()))

    def can_stay_forever(r, q):
        return all(e <= q + EPS for _, e in ivs.get(r, ()))

    frontier = {(start, None, 0)}
    for q in range(horizon + 1):
        if (goal, None, 0) in frontier and can_stay_forever(region[goal], q):
            return q * delta
        nxt = set()
        for cell, to, p in frontier:
            if blocked(region[cell], q):
                continue
            if to is None:
                nxt.add((cell, None, 0))
                for n in _neighbors(free, cell):
                    nxt.add((n, None, 0) if k == 1 else (cell, n, 1))
            elif p + 1 == k:
                nxt.add((to, None, 0))
            else:
                nxt.add((cell, to, p + 1))
        frontier = nxt
        if not frontier:
            return None
    return None


def joint_oracle(topo, agents, params, delta=0.05, max_states=3_000_000):
    """Minimum sum of arrival times for two agents (each start/goal a cell).

    Dijkstra over joint states (per agent: cell, move target, progress,
    finished flag); every quantum costs one unit per unfinished agent.
    """
    assert len(agents) == 2
    k = _quanta(params, delta)
    free = topo.grid.free
    region = {c: topo.region_of(c) for c in free}
    dist = [_bfs(free, g) for _, g in agents]
    nbrs = {c: _neighbors(free, c) for c in free}

    def h(state):
        total = 0
        for i, (cell, to, p, done) in enumerate(state):
            if done:
                continue
            if to is None:
                total += dist[i].get(cell, 10 ** 9) * k
            else:
                total += max(0, dist[i].get(to, 10 ** 9) * k + (k - p))
        return total

    def options(i, st):
        cell, to, p, done = st
        goal = agents[i][1]
        if done:
            return [(st, None)]
        if to is not None:
            if p + 1 == k:
                return [((to, None, 0, False), (cell, to))]
            return [((cell, to, p + 1, False), None)]
        out = [((cell, None, 0, False), None)]
        if cell == goal:
            out.append(((cell, None, 0, True), None))
        for n in nbrs[cell]:
            out.append(((n, None, 0, False), (cell, n)) if k == 1 else ((cell, n, 1, False), None))
        return out

    start = tuple((s, None, 0, False) for s, _ in agents)
    counter = itertools.count()
    best = {start: 0}
    heap = [(h(start), 0, next(counter), start)]
    while heap:
        f, g, _, state = heapq.heappop(heap)
        if g > best.get(state, 10 ** 18):
            continue
        if all(st[3] for st in state):
            return g * delta
        if len(best) > max_states:
            raise RuntimeError("joint oracle state limit reached")
        # the quantum [now, now + delta] is spent in the regions of the current cells
        for (s0, m0), (s1, m1) in itertools.product(options(0, state[0]), options(1, state[1])):
            if region[s0[0]] == region[s1[0]]:
                continue
            if m0 is not None and m1 is not None and m0 == (m1[1], m1[0]):
                continue  # head-on swap across one gate
            # finishing takes effect at the start of the quantum
            cost = g + (0 if s0[3] else 1) + (0 if s1[3] else 1)
            new = (s0, s1)
            if cost < best.get(new, 10 ** 18):
                best[new] = cost
                heapq.heappush(heap, (cost + h(new), cost, next(counter), new))
    return None


def joint_grid_bfs(grid, agents):
    """Optimal discrete sum of costs for grid agents with vertex and swap conflicts."""
    free = grid.free
    n = len(agents)
    dist = [_bfs(free, g) for _, g in agents]
    start = (tuple(s for s, _ in agents), (False,) * n)
    counter = itertools.count()
    best = {start: 0}

    def h(cells, done):
        return sum(0 if d else dist[i].get(c, 10 ** 9) for i, (c, d) in enumerate(zip(cells, done)))

    heap = [(h(*start), 0, next(counter), start)]
    while heap:
        f, g, _, (cells, done) = heapq.heappop(heap)
        if g > best.get((cells, done), 10 ** 18):
            continue
        if all(done):
            return g
        choices = []
        for i in range(n):
            if done[i]:
                choices.append([(cells[i], True)])
                continue
            opts = [(cells[i], False)] + [(c, False) for c in _neighbors(free, cells[i])]
            if cells[i] == agents[i][1]:
                opts.append((cells[i], True))  # stop here for good
            choices.append(opts)
        for combo in itertools.product(*choices):
            new_cells = tuple(c for c, _ in combo)
            new_done = tuple(d for _, d in combo)
            if len(set(new_cells)) < n:
                continue
            if any(new_cells[i] == cells[j] and new_cells[j] == cells[i] and cells[i] != cells[j]
                   for i in range(n) for j in range(i + 1, n)):
                continue
            # an agent that stops at t pays nothing from t on; stopping is decided before moving
            cost = g + sum(0 if (d and c == cells[i]) else 1
                           for i, (c, d) in enumerate(combo))
            if any(d and not done[i] and c != cells[i] for i, (c, d) in enumerate(combo)):
                continue
            key = (new_cells, new_done)
            if cost < best.get(key, 10 ** 18):
                best[key] = cost
                heapq.heappush(heap, (cost + h(new_cells, new_done), cost, next(counter), key))
    return None
