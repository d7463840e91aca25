"""Independent checker for topometric solutions.

Deliberately shares nothing with the search-side conflict detection except
the interval overlap test: every pair of visits of every pair of agents is
compared directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from ..timedomain import INF, overlaps


@dataclass
class ValidationReport:
    conflicts: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    path_errors: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.conflicts or self.violations or self.path_errors)

    def lines(self) -> list[str]:
        out = []
        for c in self.conflicts:
            out.append("conflict: " + ", ".join(f"{k}={v}" for k, v in c.items()))
        for v in self.violations:
            out.append("violation: " + ", ".join(f"{k}={x}" for k, x in v.items()))
        out.extend("path error: " + e for e in self.path_errors)
        return out


def _check_path(k, agent, path, topo, params, errors):
    visits = path.visits
    if not visits:
        errors.append(f"agent {k} has an empty path")
        return
    tol = 1e-9
    tau = params.cell_time
    if visits[0].entry != 0:
        errors.append(f"agent {k} does not start at time 0")
    if visits[0].waypoints[0] != tuple(agent.start):
        errors.append(f"agent {k} path does not begin at its start cell")
    if visits[-1].waypoints[-1] != tuple(agent.goal):
        errors.append(f"agent {k} path does not end at its goal cell")
    if visits[-1].exit != INF:
        errors.append(f"agent {k} leaves its goal region")
    for i, v in enumerate(visits):
        region = topo.region_by_id.get(v.region)
        if region is None:
            errors.append(f"agent {k} visits unknown region {v.region}")
            continue
        for c in v.waypoints:
            if tuple(c) not in region.cells:
                errors.append(f"agent {k} waypoint {c} lies outside region {v.region}")
        for a, b in zip(v.waypoints, v.waypoints[1:]):
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                errors.append(f"agent {k} jumps from {a} to {b}")
        walk = (len(v.waypoints) - 1) * tau
        if i + 1 < len(visits):
            nxt = visits[i + 1]
            if v.exit != nxt.entry:
                errors.append(f"agent {k} visit {i} exit {v.exit} != next entry {nxt.entry}")
            gate = (tuple(v.waypoints[-1]), tuple(nxt.waypoints[0]))
            if not any({o.region_a, o.region_b} == {v.region, nxt.region}
                       and set(o.gate) == set(gate) for o in topo.openings):
                errors.append(f"agent {k} crosses from region {v.region} to {nxt.region} "
                              f"outside any opening")
            if nxt.entry + tol < v.entry + walk + tau:
                errors.append(f"agent {k} moves too fast through region {v.region}")
        elif path.arrival + tol < v.entry + walk:
            errors.append(f"agent {k} arrival {path.arrival} precedes reaching its goal")


def validate_solution(instance, paths: Sequence, constraints: Optional[Mapping] = None,
                      check_paths: bool = True) -> ValidationReport:
    """Check ``paths`` (one per agent, in agent order) for conflicts.

    ``constraints``, when given, maps agent index to {region: [(start, end), ...]}
    and every visit is checked against the agent's forbidden intervals.
    """
    report = ValidationReport()
    agents = instance.agents
    if len(paths) != len(agents):
        report.path_errors.append(f"{len(paths)} paths for {len(agents)} agents")
        return report
    if check_paths:
        for k, (agent, path) in enumerate(zip(agents, paths)):
            _check_path(k, agent, path, instance.topo, instance.params, report.path_errors)
    for k, path in enumerate(paths):
        for v in path.visits:
            for s, e in (constraints or {}).get(k, {}).get(v.region, ()):
                if overlaps((v.entry, v.exit), (s, e)):
                    report.violations.append({"agent": k, "region": v.region,
                                              "visit": (v.entry, v.exit), "forbidden": (s, e)})
    dt = instance.params.dt
    n = len(paths)
    for i in range(n):
        for j in range(i + 1, n):
            vi, vj = paths[i].visits, paths[j].visits
            for a in vi:
                for b in vj:
                    if a.region == b.region and overlaps((a.entry, a.exit), (b.entry, b.exit)):
                        report.conflicts.append({"type": "region", "agents": (i, j),
                                                 "region": a.region,
                                                 "intervals": ((a.entry, a.exit), (b.entry, b.exit))})
            for x in range(1, len(vi)):
                gi = (tuple(vi[x - 1].waypoints[-1]), tuple(vi[x].waypoints[0]))
                for y in range(1, len(vj)):
                    gj = (tuple(vj[y - 1].waypoints[-1]), tuple(vj[y].waypoints[0]))
                    if gi != (gj[1], gj[0]):
                        continue
                    ti, tj = vi[x].entry, vj[y].entry
                    if ti == tj or abs(ti - tj) < dt:
                        report.conflicts.append({"type": "opening", "agents": (i, j),
                                                 "gate": gi, "times": (ti, tj)})
    return report
