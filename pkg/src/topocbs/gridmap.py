"""Occupancy grids in the MovingAI-style text format and in-subset BFS."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

Cell = tuple[int, int]

# fixed expansion order keeps tie-breaking deterministic
NEIGHBOR_OFFSETS: tuple[Cell, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1))

FREE_CHAR = "."
OCCUPIED_CHAR = "@"


class GridFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    occupied: frozenset[Cell]
    free: frozenset[Cell] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GridFormatError("grid dimensions must be positive")
        for x, y in self.occupied:
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise GridFormatError(f"occupied cell {(x, y)} outside the grid")
        free = frozenset(
            (x, y)
            for y in range(self.height)
            for x in range(self.width)
            if (x, y) not in self.occupied
        )
        object.__setattr__(self, "free", free)

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def is_free(self, cell: Cell) -> bool:
        return cell in self.free

    def free_neighbors(self, cell: Cell) -> list[Cell]:
        x, y = cell
        return [(x + dx, y + dy) for dx, dy in NEIGHBOR_OFFSETS if (x + dx, y + dy) in self.free]

    def to_text(self) -> str:
        rows = [f"height {self.height}", f"width {self.width}", "map"]
        for y in range(self.height):
            rows.append("".join(OCCUPIED_CHAR if (x, y) in self.occupied else FREE_CHAR
                                for x in range(self.width)))
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class CellPath:
    cells: tuple[Cell, ...]

    @property
    def length(self) -> float:
        return float(len(self.cells) - 1)


def parse_grid(text: str) -> GridMap:
    """Parse a grid document: ``height H``, ``width W``, ``map``, then H rows of W chars.

    A leading ``type ...`` line (full MovingAI header) is accepted and ignored.
    """
    lines = text.splitlines()
    if not lines or not any(line.strip() for line in lines):
        raise GridFormatError("empty map document")
    if lines[0].startswith("type"):
        lines = lines[1:]
    if len(lines) < 3:
        raise GridFormatError("truncated header")
    try:
        key_h, h = lines[0].split()
        key_w, w = lines[1].split()
        height, width = int(h), int(w)
    except ValueError as exc:
        raise GridFormatError(f"malformed header: {exc}") from None
    if key_h != "height" or key_w != "width" or lines[2].strip() != "map":
        raise GridFormatError("header must be 'height H', 'width W', 'map'")
    if height <= 0 or width <= 0:
        raise GridFormatError("empty map")
    rows = lines[3:]
    while rows and rows[-1] == "":
        rows.pop()
    if len(rows) != height:
        raise GridFormatError(f"expected {height} rows, found {len(rows)}")
    occupied = set()
    for y, row in enumerate(rows):
        if len(row) != width:
            raise GridFormatError(f"row {y} has {len(row)} characters, expected {width}")
        for x, ch in enumerate(row):
            if ch == OCCUPIED_CHAR:
                occupied.add((x, y))
            elif ch != FREE_CHAR:
                raise GridFormatError(f"unknown character {ch!r} at {(x, y)}")
    return GridMap(width, height, frozenset(occupied))


def load_grid(path) -> GridMap:
    with open(path) as f:
        return parse_grid(f.read())


def bfs_distances(allowed: Iterable[Cell] | frozenset[Cell], source: Cell) -> dict[Cell, int]:
    """Step distances from ``source`` to every cell reachable inside ``allowed``."""
    allowed = allowed if isinstance(allowed, (set, frozenset)) else set(allowed)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x, y = queue.popleft()
        d = dist[(x, y)] + 1
        for dx, dy in NEIGHBOR_OFFSETS:
            nxt = (x + dx, y + dy)
            if nxt in allowed and nxt not in dist:
                dist[nxt] = d
                queue.append(nxt)
    return dist


def shortest_path_in_cells(grid: GridMap, allowed, start: Cell, goal: Cell) -> Optional[CellPath]:
    """Minimum-step 4-connected path from ``start`` to ``goal`` staying in ``allowed``.

    Returns None when the two cells are disconnected inside ``allowed``.
    Raises ValueError when an endpoint lies outside ``allowed`` or ``allowed``
    contains occupied cells.
    """
    allowed = allowed if isinstance(allowed, (set, frozenset)) else set(allowed)
    if start not in allowed or goal not in allowed:
        raise ValueError("path endpoints must lie inside the allowed cell set")
    blocked = [c for c in allowed if c not in grid.free]
    if blocked:
        raise ValueError(f"allowed set contains non-free cells, e.g. {blocked[0]}")
    parent: dict[Cell, Optional[Cell]] = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            break
        x, y = cur
        for dx, dy in NEIGHBOR_OFFSETS:
            nxt = (x + dx, y + dy)
            if nxt in allowed and nxt not in parent:
                parent[nxt] = cur
                queue.append(nxt)
    if goal not in parent:
        return None
    cells = [goal]
    while parent[cells[-1]] is not None:
        cells.append(parent[cells[-1]])
    return CellPath(tuple(reversed(cells)))
