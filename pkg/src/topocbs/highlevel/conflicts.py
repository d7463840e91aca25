"""Region and opening conflicts between timed paths, and the constraints they induce."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from ..lowlevel import TimedPath
from ..timedomain import IntervalConstraint, overlaps

Interval = tuple[float, float]


@dataclass(frozen=True)
class RegionConflict:
    agents: tuple[int, int]
    region: int
    intervals: tuple[Interval, Interval]

    @property
    def time(self) -> float:
        return max(self.intervals[0][0], self.intervals[1][0])


@dataclass(frozen=True)
class OpeningConflict:
    """Agent ``agents[0]`` crosses ``regions[0] -> regions[1]``, the other the reverse.

    ``intervals[0]`` is the first agent's occupancy of ``regions[1]`` and
    ``intervals[1]`` the second agent's occupancy of ``regions[0]``.
    """
    agents: tuple[int, int]
    regions: tuple[int, int]
    opening: int
    intervals: tuple[Interval, Interval]

    @property
    def time(self) -> float:
        return min(self.intervals[0][0], self.intervals[1][0])


Conflict = Union[RegionConflict, OpeningConflict]


def occupancy_intervals(path: TimedPath) -> list[tuple[int, Interval]]:
    """One closed occupancy interval per visit; the last runs to infinity."""
    return list(path.occupancy)


def crossings(path: TimedPath) -> list[tuple[int, int, int, float, Interval]]:
    """(opening, from region, to region, crossing time, occupancy of the entered region)."""
    return list(path.crossings)


def _swap(e_i: float, e_j: float, delta_t: float) -> bool:
    return e_i == e_j or abs(e_i - e_j) < delta_t


def _conflict_order(c: Conflict):
    kind = 0 if isinstance(c, OpeningConflict) else 1
    return (c.time, kind, c.agents, c.intervals)


def find_conflicts(paths: Sequence[TimedPath], delta_t: float) -> tuple[int, Optional[Conflict]]:
    """Number of conflicts among ``paths`` and the earliest one.

    Earliest means smallest conflict start time; opening conflicts come
    before region conflicts at equal times, then lower agent pairs.
    """
    by_region: dict[int, list[tuple[float, float, int]]] = {}
    by_opening: dict[int, list[tuple[float, int, int, int, Interval]]] = {}
    for a, p in enumerate(paths):
        for region, (s, e) in p.occupancy:
            by_region.setdefault(region, []).append((s, e, a))
        for oid, src, dst, t, interval in p.crossings:
            by_opening.setdefault(oid, []).append((t, a, src, dst, interval))
    count = 0
    best: Optional[Conflict] = None
    best_key = None
    for region, items in by_region.items():
        if len(items) < 2:
            continue
        items.sort()
        # sweep: items sorted by start; compare against still-active intervals
        active: list[tuple[float, float, int]] = []
        for s, e, a in items:
            active = [x for x in active if x[1] > s]
            for s2, e2, b in active:
                if b == a or not overlaps((s, e), (s2, e2)):
                    continue
                count += 1
                if a < b:
                    c = RegionConflict((a, b), region, ((s, e), (s2, e2)))
                else:
                    c = RegionConflict((b, a), region, ((s2, e2), (s, e)))
                key = _conflict_order(c)
                if best_key is None or key < best_key:
                    best, best_key = c, key
            active.append((s, e, a))
    for oid, items in by_opening.items():
        if len(items) < 2:
            continue
        for x in range(len(items)):
            t1, a1, src1, dst1, occ1 = items[x]
            for y in range(x + 1, len(items)):
                t2, a2, src2, dst2, occ2 = items[y]
                if a1 == a2 or src1 != dst2 or dst1 != src2 or not _swap(t1, t2, delta_t):
                    continue
                # occupancy of the other agent in the region this one leaves
                count += 1
                if a1 < a2:
                    c = OpeningConflict((a1, a2), (src1, dst1), oid, (occ1, occ2))
                else:
                    c = OpeningConflict((a2, a1), (src2, dst2), oid, (occ2, occ1))
                key = _conflict_order(c)
                if best_key is None or key < best_key:
                    best, best_key = c, key
    return count, best


def detect_first_conflict(paths: Sequence[TimedPath], delta_t: float) -> Optional[Conflict]:
    return find_conflicts(paths, delta_t)[1]


def constraints_from_region_conflict(rc: RegionConflict) -> tuple[IntervalConstraint, IntervalConstraint]:
    """Each agent is barred from the region while the other one occupies it."""
    (si, ei), (sj, ej) = rc.intervals
    return IntervalConstraint(rc.region, sj, ej), IntervalConstraint(rc.region, si, ei)


def constraints_from_opening_conflict(oc: OpeningConflict,
                                      delta_t: float) -> tuple[IntervalConstraint, IntervalConstraint]:
    """Constraints for the two agents of a swap through one opening.

    The first agent loses the region it leaves for the other agent's stay
    there, widened ``delta_t`` earlier; symmetrically for the second.
    """
    region_k, region_l = oc.regions
    (si, ei), (sj, ej) = oc.intervals
    return (IntervalConstraint(region_k, max(0.0, sj - delta_t), ej),
            IntervalConstraint(region_l, max(0.0, si - delta_t), ei))


def constraints_for(conflict: Conflict, delta_t: float) -> tuple[IntervalConstraint, IntervalConstraint]:
    if isinstance(conflict, RegionConflict):
        return constraints_from_region_conflict(conflict)
    return constraints_from_opening_conflict(conflict, delta_t)
