"""Deterministic generator for one-cell-wide corridor benchmark maps.

Junction candidates sit on a square lattice (spacing 8 by default).
Corridors are carved along lattice edges by randomised growth from the
lattice point nearest the centre (new branches or, with probability
``loop_prob``, loop-closing edges), then dead-end stubs of one or two cells
are sprinkled onto junctions and corridor sides.  A spacing of at least 4
with stubs of at most two cells keeps every corridor one cell wide.

``find_benchmark_map`` walks seeds in order until the grid has exactly the
requested free-cell count and the degree-based segmentation yields exactly
the requested number of regions.
"""
from __future__ import annotations

import random
from typing import Optional

from .gridmap import Cell, GridMap
from .topomap import has_wide_block, segment_corridor_grid

SPACING = 8
LOOP_PROB = 0.7
STUB_PROB = 0.5
STUB_CELLS = 3
BENCHMARK_SEED = 39
DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _lattice(width: int, height: int, spacing: int) -> list[Cell]:
    return [(x, y) for y in range(1, height - 1, spacing) for x in range(1, width - 1, spacing)]


def carve(width: int, height: int, free_cells: int, seed: int, loop_prob: float = LOOP_PROB,
          stub_prob: float = STUB_PROB, spacing: int = SPACING,
          stub_cells: int = STUB_CELLS) -> Optional[GridMap]:
    """One candidate map, or None when the seed misses the free-cell count.

    ``stub_cells`` free cells are held back from corridor growth and spent on
    dead-end stubs, which may branch off lattice points or corridor interiors.
    """
    rng = random.Random(seed)
    points = set(_lattice(width, height, spacing))
    cx, cy = width // 2, height // 2
    root = min(points, key=lambda p: ((p[0] - cx) ** 2 + (p[1] - cy) ** 2, p))
    free = {root}
    used = {root}
    edges: set[frozenset] = set()
    interior: list[tuple[Cell, Cell]] = []  # (corridor cell, corridor direction)

    def edge_cells(p, q):
        dx = (q[0] - p[0]) // spacing
        dy = (q[1] - p[1]) // spacing
        return [(p[0] + dx * k, p[1] + dy * k) for k in range(1, spacing + 1)]

    def candidates():
        grow, loops = [], []
        for p in sorted(used):
            for dx, dy in DIRS:
                q = (p[0] + dx * spacing, p[1] + dy * spacing)
                if q not in points or frozenset((p, q)) in edges:
                    continue
                (loops if q in used else grow).append((p, q))
        return grow, loops

    while True:
        grow, loops = candidates()
        budget = free_cells - len(free) - stub_cells
        if budget < spacing:
            break
        pool = loops if (loops and (rng.random() < loop_prob or not grow)) else grow
        if not pool:
            break
        p, q = rng.choice(pool)
        edges.add(frozenset((p, q)))
        used.add(q)
        cells = edge_cells(p, q)
        free.update(cells)
        d = ((q[0] - p[0]) // spacing, (q[1] - p[1]) // spacing)
        interior.extend((c, d) for c in cells[1:-2])
    stub_budget = free_cells - len(free)
    # stub sites: open lattice directions, then (if reserved) sideways off corridor interiors
    stub_sites = []
    for p in sorted(used):
        for d in DIRS:
            stub_sites.append((p, d))
    if stub_cells:
        for c, (dx, dy) in sorted(interior):
            stub_sites.extend(((c, (dy, dx)), (c, (-dy, -dx))))
    rng.shuffle(stub_sites)

    def clear(cell, came_from):
        if not (0 < cell[0] < width - 1 and 0 < cell[1] < height - 1) or cell in free:
            return False
        return all((cell[0] + dx, cell[1] + dy) not in free or (cell[0] + dx, cell[1] + dy) == came_from
                   for dx, dy in DIRS)

    for p, (dx, dy) in stub_sites:
        if stub_budget <= 0:
            break
        if rng.random() > stub_prob and stub_budget < len(stub_sites):
            continue
        length = min(stub_budget, rng.choice((1, 2)))
        cells = [(p[0] + dx * k, p[1] + dy * k) for k in range(1, length + 1)]
        prev = [p] + cells[:-1]
        if not all(clear(c, b) for c, b in zip(cells, prev)):
            continue
        free.update(cells)
        stub_budget -= length
    if len(free) != free_cells:
        return None
    occupied = frozenset((x, y) for y in range(height) for x in range(width) if (x, y) not in free)
    grid = GridMap(width, height, occupied)
    if has_wide_block(grid) is not None:
        return None
    return grid


def find_benchmark_map(width: int = 44, height: int = 38, free_cells: int = 385,
                       regions: int = 98, loop_prob: float = LOOP_PROB,
                       stub_prob: float = STUB_PROB, spacing: int = SPACING,
                       stub_cells: int = STUB_CELLS, first_seed: int = 0,
                       max_tries: int = 100_000) -> tuple[int, GridMap]:
    for seed in range(first_seed, first_seed + max_tries):
        grid = carve(width, height, free_cells, seed, loop_prob, stub_prob, spacing, stub_cells)
        if grid is None:
            continue
        if len(segment_corridor_grid(grid).regions) == regions:
            return seed, grid
    raise RuntimeError("no seed produced the requested map")


def benchmark_grid() -> GridMap:
    """The shipped 44x38 corridor map: 385 free cells, 98 regions."""
    grid = carve(44, 38, 385, BENCHMARK_SEED)
    if grid is None:
        raise RuntimeError("benchmark seed no longer reproduces the map")
    return grid


def write_benchmark_files(directory) -> tuple[str, str]:
    """Write the grid and its segmentation as ``corridor_44x38.{map,topo.json}``."""
    import os

    from .topomap import write_topometric

    grid = benchmark_grid()
    map_path = os.path.join(directory, "corridor_44x38.map")
    topo_path = os.path.join(directory, "corridor_44x38.topo.json")
    with open(map_path, "w") as f:
        f.write(grid.to_text())
    write_topometric(segment_corridor_grid(grid, strict=True), topo_path)
    return map_path, topo_path


if __name__ == "__main__":
    import sys

    for path in write_benchmark_files(sys.argv[1] if len(sys.argv) > 1 else "."):
        print(path)
