"""Forbidden intervals and the free time slots they leave.

Constraints are closed intervals ``[start, end]``; free slots are open
intervals ``(start, end)``.  An occupancy touching a constraint at an
endpoint does not overlap it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

INF = math.inf


@dataclass(frozen=True, order=True)
class IntervalConstraint:
    region: int
    start: float
    end: float

    def __post_init__(self):
        if math.isnan(self.start) or math.isnan(self.end) or math.isinf(self.start):
            raise ValueError(f"bad constraint times {self.start}, {self.end}")
        if self.start < 0 or not self.start < self.end:
            raise ValueError(f"constraint needs 0 <= start < end, got [{self.start}, {self.end}]")


class TimeSlot(NamedTuple):
    start: float
    end: float


def overlaps(a: tuple[float, float], b: tuple[float, float]) -> bool:
    """True iff the two intervals share a stretch of positive length."""
    return max(a[0], b[0]) < min(a[1], b[1])


def merge_intervals(intervals: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for s, e in sorted(intervals):
        if out and s <= out[-1][1]:
            if e > out[-1][1]:
                out[-1][1] = e
        else:
            out.append([s, e])
    return [(s, e) for s, e in out]


def merge_constraints(constraints: Iterable[IntervalConstraint]) -> list[IntervalConstraint]:
    """Union of the constraints, region by region, as sorted disjoint intervals."""
    by_region: dict[int, list[tuple[float, float]]] = {}
    for c in constraints:
        by_region.setdefault(c.region, []).append((c.start, c.end))
    merged = []
    for region in sorted(by_region):
        merged.extend(IntervalConstraint(region, s, e) for s, e in merge_intervals(by_region[region]))
    return merged


def time_slots(merged: Iterable[IntervalConstraint | tuple[float, float]]) -> list[TimeSlot]:
    """Complement of merged constraints within (0, inf).

    A constraint starting at 0 leaves no leading slot, and one reaching
    infinity leaves no trailing slot.
    """
    slots = []
    t = 0.0
    for c in merged:
        s, e = (c.start, c.end) if isinstance(c, IntervalConstraint) else c
        if s > t:
            slots.append(TimeSlot(t, s))
        t = max(t, e)
    if t < INF:
        slots.append(TimeSlot(t, INF))
    return slots


class ConstraintSet:
    """Per-agent, per-region forbidden intervals kept merged and sorted.

    Instances are persistent: ``add`` returns a new set sharing unchanged
    per-agent tables with the original.
    """

    __slots__ = ("_table", "_size")

    def __init__(self, table=None, size=0):
        self._table: dict[int, dict[int, tuple[tuple[float, float], ...]]] = table or {}
        self._size = size

    def __len__(self):
        # raw constraints added, before merging
        return self._size

    def add(self, agent: int, constraint: IntervalConstraint) -> "ConstraintSet":
        agent_table = dict(self._table.get(agent, {}))
        current = agent_table.get(constraint.region, ())
        agent_table[constraint.region] = tuple(
            merge_intervals(current + ((constraint.start, constraint.end),)))
        table = dict(self._table)
        table[agent] = agent_table
        return ConstraintSet(table, self._size + 1)

    def for_agent(self, agent: int) -> dict[int, tuple[tuple[float, float], ...]]:
        return self._table.get(agent, {})

    def intervals(self, agent: int, region: int) -> tuple[tuple[float, float], ...]:
        return self._table.get(agent, {}).get(region, ())
