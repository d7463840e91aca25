"""Topometric maps: labelled regions of free cells joined by openings.

The degree-based segmenter below is meant for corridor worlds whose free
space is one cell wide.  Each free cell is classified by its number of free
4-neighbours: three or more makes a single-cell intersection, one or zero a
single-cell dead end, and maximal connected runs of degree-two cells become
pathways.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional

from .gridmap import (NEIGHBOR_OFFSETS, Cell, CellPath, GridMap, bfs_distances, parse_grid,
                      shortest_path_in_cells)


class Label(str, Enum):
    INTERSECTION = "intersection"
    PATHWAY = "pathway"
    DEAD_END = "dead_end"


class TopoMapError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    id: int
    label: Label
    cells: frozenset[Cell]

    @cached_property
    def representative(self) -> Cell:
        return min(self.cells)


@dataclass(frozen=True)
class Opening:
    id: int
    region_a: int
    region_b: int
    gate: tuple[Cell, Cell]  # (cell in region_a, cell in region_b)

    def cell_in(self, region: int) -> Cell:
        if region == self.region_a:
            return self.gate[0]
        if region == self.region_b:
            return self.gate[1]
        raise KeyError(f"opening {self.id} does not touch region {region}")

    def other(self, region: int) -> int:
        return self.region_b if region == self.region_a else self.region_a


def _adjacent(a: Cell, b: Cell) -> bool:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def _connected(cells: frozenset[Cell]) -> bool:
    start = next(iter(cells))
    return len(bfs_distances(cells, start)) == len(cells)


@dataclass(frozen=True, eq=False)
class TopometricMap:
    grid: GridMap
    regions: tuple[Region, ...]
    openings: tuple[Opening, ...]
    region_by_id: dict[int, Region] = field(init=False, repr=False)
    opening_by_id: dict[int, Opening] = field(init=False, repr=False)
    adjacency: dict[int, tuple[tuple[int, int], ...]] = field(init=False, repr=False)
    cell_region: dict[Cell, int] = field(init=False, repr=False)

    def __post_init__(self):
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        set_("region_by_id", {r.id: r for r in self.regions})
        if len(self.region_by_id) != len(self.regions):
            raise TopoMapError("duplicate region id")
        set_("opening_by_id", {o.id: o for o in self.openings})
        if len(self.opening_by_id) != len(self.openings):
            raise TopoMapError("duplicate opening id")
        cell_region: dict[Cell, int] = {}
        for r in self.regions:
            if not r.cells:
                raise TopoMapError(f"region {r.id} has no cells")
            for c in r.cells:
                if c in cell_region:
                    raise TopoMapError(f"regions {cell_region[c]} and {r.id} overlap at {c}")
                if not self.grid.is_free(c):
                    raise TopoMapError(f"region {r.id} contains non-free cell {c}")
                cell_region[c] = r.id
            if not _connected(r.cells):
                raise TopoMapError(f"region {r.id} is not 4-connected")
        set_("cell_region", cell_region)
        adjacency: dict[int, list[tuple[int, int]]] = {r.id: [] for r in self.regions}
        seen_gates = set()
        for o in self.openings:
            for rid in (o.region_a, o.region_b):
                if rid not in self.region_by_id:
                    raise TopoMapError(f"opening {o.id} references missing region {rid}")
            if o.region_a == o.region_b:
                raise TopoMapError(f"opening {o.id} joins region {o.region_a} to itself")
            ca, cb = o.gate
            if not _adjacent(ca, cb):
                raise TopoMapError(f"opening {o.id} gate cells {ca} and {cb} are not adjacent")
            if cell_region.get(ca) != o.region_a or cell_region.get(cb) != o.region_b:
                raise TopoMapError(f"opening {o.id} gate cells do not lie in regions "
                                   f"{o.region_a} and {o.region_b}")
            key = frozenset((ca, cb))
            if key in seen_gates:
                raise TopoMapError(f"duplicate opening at gate {o.gate}")
            seen_gates.add(key)
            adjacency[o.region_a].append((o.id, o.region_b))
            adjacency[o.region_b].append((o.id, o.region_a))
        set_("adjacency", {rid: tuple(sorted(v)) for rid, v in adjacency.items()})

    def __eq__(self, other):
        if not isinstance(other, TopometricMap):
            return NotImplemented
        return (self.grid == other.grid and self.regions == other.regions
                and self.openings == other.openings)

    def __hash__(self):
        return hash((self.grid, self.regions, self.openings))

    def region_of(self, cell: Cell) -> Optional[int]:
        return self.cell_region.get(cell)

    def neighbors(self, region: int) -> tuple[tuple[int, int], ...]:
        """(opening id, neighbour region id) pairs of ``region``."""
        return self.adjacency[region]


def _boundary_openings(grid: GridMap, cell_region: dict[Cell, int]) -> list[tuple[int, int, Cell, Cell]]:
    # cross-region cell pairs grouped into connected boundaries, one gate per boundary
    pairs: dict[tuple[int, int], list[tuple[Cell, Cell]]] = {}
    for c, rc in cell_region.items():
        for dx, dy in NEIGHBOR_OFFSETS:
            n = (c[0] + dx, c[1] + dy)
            rn = cell_region.get(n)
            if rn is not None and rc < rn:
                pairs.setdefault((rc, rn), []).append((c, n))
    result = []
    for (ra, rb), plist in sorted(pairs.items()):
        plist = sorted(set(plist))
        unassigned = set(plist)
        while unassigned:
            seed = min(unassigned)
            unassigned.discard(seed)
            group, stack = [seed], [seed]
            while stack:
                a, b = stack.pop()
                for p in list(unassigned):
                    if (p[0] == a or _adjacent(p[0], a)) and (p[1] == b or _adjacent(p[1], b)):
                        unassigned.discard(p)
                        group.append(p)
                        stack.append(p)
            ca, cb = min(group)
            result.append((ra, rb, ca, cb))
    return result


def has_wide_block(grid: GridMap) -> Optional[Cell]:
    """Top-left cell of some 2x2 all-free block, or None for a corridor grid."""
    for (x, y) in sorted(grid.free):
        if (x + 1, y) in grid.free and (x, y + 1) in grid.free and (x + 1, y + 1) in grid.free:
            return (x, y)
    return None


def segment_corridor_grid(grid: GridMap, strict: bool = False) -> TopometricMap:
    """Partition the free cells of a corridor grid into labelled regions.

    With ``strict`` set, grids containing a 2x2 free block are rejected.
    """
    if not grid.free:
        raise TopoMapError("grid has no free cells")
    if strict:
        block = has_wide_block(grid)
        if block is not None:
            raise TopoMapError(f"not a corridor grid: 2x2 free block at {block}")
    degree = {c: len(grid.free_neighbors(c)) for c in grid.free}
    groups: list[tuple[Label, frozenset[Cell]]] = []
    seen: set[Cell] = set()
    for c in sorted(grid.free):
        if c in seen:
            continue
        d = degree[c]
        if d >= 3:
            groups.append((Label.INTERSECTION, frozenset([c])))
            seen.add(c)
        elif d <= 1:
            groups.append((Label.DEAD_END, frozenset([c])))
            seen.add(c)
        else:
            chain = {c}
            stack = [c]
            while stack:
                cur = stack.pop()
                for n in grid.free_neighbors(cur):
                    if degree[n] == 2 and n not in chain:
                        chain.add(n)
                        stack.append(n)
            seen |= chain
            groups.append((Label.PATHWAY, frozenset(chain)))
    groups.sort(key=lambda g: min(g[1]))
    regions = tuple(Region(i, label, cells) for i, (label, cells) in enumerate(groups))
    cell_region = {c: r.id for r in regions for c in r.cells}
    openings = tuple(Opening(i, ra, rb, (ca, cb))
                     for i, (ra, rb, ca, cb) in enumerate(_boundary_openings(grid, cell_region)))
    return TopometricMap(grid, regions, openings)


def to_document(topo: TopometricMap) -> dict:
    return {
        "grid": topo.grid.to_text(),
        "regions": [
            {"id": r.id, "label": r.label.value, "cells": [list(c) for c in sorted(r.cells)]}
            for r in topo.regions
        ],
        "openings": [
            {"id": o.id, "a": o.region_a, "b": o.region_b, "gate": [list(o.gate[0]), list(o.gate[1])]}
            for o in topo.openings
        ],
    }


def from_document(doc: dict) -> TopometricMap:
    try:
        grid = parse_grid(doc["grid"])
        regions = []
        for r in doc["regions"]:
            regions.append(Region(int(r["id"]), Label(r["label"]),
                                  frozenset((int(x), int(y)) for x, y in r["cells"])))
        openings = []
        for o in doc["openings"]:
            (ax, ay), (bx, by) = o["gate"]
            openings.append(Opening(int(o["id"]), int(o["a"]), int(o["b"]),
                                    ((int(ax), int(ay)), (int(bx), int(by)))))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, TopoMapError):
            raise
        raise TopoMapError(f"malformed topometric document: {exc!r}") from None
    return TopometricMap(grid, tuple(regions), tuple(openings))


def save_topometric(topo: TopometricMap) -> str:
    return json.dumps(to_document(topo), indent=1) + "\n"


def load_topometric(text: str) -> TopometricMap:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopoMapError(f"topometric document is not JSON: {exc}") from None
    return from_document(doc)


def read_topometric(path) -> TopometricMap:
    with open(path) as f:
        return load_topometric(f.read())


def write_topometric(topo: TopometricMap, path) -> None:
    with open(path, "w") as f:
        f.write(save_topometric(topo))


class RegionDistanceTable:
    """Shortest in-region step distances between gate cells and arbitrary cells.

    Gate-to-gate tables are built eagerly; other source cells (agent starts,
    goals) are filled in lazily on first query.
    """

    def __init__(self, topo: TopometricMap):
        self.topo = topo
        self._from: dict[tuple[int, Cell], dict[Cell, int]] = {}
        self._paths: dict[tuple[int, Cell, Cell], CellPath] = {}
        self.gate_cell: dict[tuple[int, int], Cell] = {}  # (opening, region) -> gate cell
        for o in topo.openings:
            self.gate_cell[(o.id, o.region_a)] = o.gate[0]
            self.gate_cell[(o.id, o.region_b)] = o.gate[1]
        self.gate_distances: dict[int, dict[tuple[int, int], int]] = {}
        for region in topo.regions:
            gates = [(oid, topo.opening_by_id[oid].cell_in(region.id))
                     for oid, _ in topo.neighbors(region.id)]
            table = {}
            for oid, cell in gates:
                dist = self._bfs(region.id, cell)
                for oid2, cell2 in gates:
                    if cell2 not in dist:
                        raise TopoMapError(
                            f"openings {oid} and {oid2} are unreachable from each other "
                            f"inside region {region.id}")
                    table[(oid, oid2)] = dist[cell2]
            self.gate_distances[region.id] = table

    def _bfs(self, region: int, cell: Cell) -> dict[Cell, int]:
        key = (region, cell)
        dist = self._from.get(key)
        if dist is None:
            dist = bfs_distances(self.topo.region_by_id[region].cells, cell)
            self._from[key] = dist
        return dist

    def between_openings(self, region: int, o1: int, o2: int) -> int:
        return self.gate_distances[region][(o1, o2)]

    def distance(self, region: int, a: Cell, b: Cell) -> int:
        """In-region step distance between two cells of ``region``."""
        dist = self._bfs(region, a)
        if b not in dist:
            raise TopoMapError(f"cells {a} and {b} are not connected inside region {region}")
        return dist[b]

    def cell_path(self, region: int, a: Cell, b: Cell) -> CellPath:
        """Cached shortest in-region cell sequence from ``a`` to ``b``."""
        key = (region, a, b)
        p = self._paths.get(key)
        if p is None:
            p = shortest_path_in_cells(self.topo.grid, self.topo.region_by_id[region].cells, a, b)
            if p is None:
                raise TopoMapError(f"cells {a} and {b} are not connected inside region {region}")
            self._paths[key] = p
        return p


def build_distance_table(topo: TopometricMap) -> RegionDistanceTable:
    return RegionDistanceTable(topo)
