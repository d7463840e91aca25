"""JSON documents for agent lists and solutions (topometric and grid)."""
from __future__ import annotations

import json
import math
from typing import Optional

from .baseline import DiscretePath, GridAgent
from .highlevel import Agent
from .lowlevel import PlannerParams, TimedPath, Visit
from .timedomain import INF


class DocumentError(ValueError):
    pass


def _cell(v) -> tuple[int, int]:
    x, y = v
    return int(x), int(y)


def _time(v) -> float:
    return INF if v is None else float(v)


def _json_time(t: float):
    return None if math.isinf(t) else t


def parse_agents(text: str) -> list[Agent]:
    """``[{id, start: [x, y], goal: [x, y]}, ...]``; ids must be 0..n-1 in order."""
    try:
        doc = json.loads(text)
        agents = [Agent(int(a["id"]), _cell(a["start"]), _cell(a["goal"])) for a in doc]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed agents document: {exc}") from None
    if [a.id for a in agents] != list(range(len(agents))):
        raise DocumentError("agent ids must be 0, 1, ..., n-1 in order")
    return agents


def agents_document(agents) -> str:
    return json.dumps([{"id": a.id, "start": list(a.start), "goal": list(a.goal)}
                       for a in agents], indent=1) + "\n"


def _params_doc(params: PlannerParams, omega: Optional[float]) -> dict:
    return {"r_speed": params.r_speed, "i_margin": params.i_margin, "delta_t": params.dt,
            "omega": omega}


def topometric_solution_document(agents, paths, cost, expanded, elapsed_ms, method,
                                 params: PlannerParams, omega=None) -> dict:
    out = []
    for a, p in zip(agents, paths):
        out.append({
            "id": a.id, "start": list(a.start), "goal": list(a.goal),
            "arrival": p.arrival, "length": p.length,
            "path": [{"region": v.region, "entry": v.entry, "exit": _json_time(v.exit),
                      "waypoints": [list(c) for c in v.waypoints], "opening": v.entry_opening}
                     for v in p.visits],
        })
    return {"kind": "topometric", "method": method, "params": _params_doc(params, omega),
            "cost": cost, "expanded_nodes": expanded, "elapsed_ms": elapsed_ms, "agents": out}


def grid_solution_document(agents, paths, cost_steps, expanded, elapsed_ms, method,
                           params: PlannerParams, omega=None) -> dict:
    """Grid paths as runs of one cell: ``{cell, entry, exit}`` in timesteps, last exit null."""
    out = []
    for a, p in zip(agents, paths):
        runs = []
        for t, c in enumerate(p.cells):
            if runs and runs[-1]["cell"] == list(c):
                runs[-1]["exit"] = t + 1
            else:
                if runs:
                    runs[-1]["exit"] = t
                runs.append({"cell": list(c), "entry": t, "exit": t + 1})
        if runs:
            runs[-1]["exit"] = None
        out.append({"id": a.id, "start": list(a.start), "goal": list(a.goal),
                    "arrival": p.cost, "path": runs})
    return {"kind": "grid", "method": method, "params": _params_doc(params, omega),
            "cost": cost_steps * params.cell_time, "cost_steps": cost_steps,
            "expanded_nodes": expanded, "elapsed_ms": elapsed_ms, "agents": out}


def dump_solution(doc: dict) -> str:
    return json.dumps(doc, indent=1) + "\n"


def load_solution(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"solution is not JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("kind") not in ("topometric", "grid"):
        raise DocumentError("solution document needs kind 'topometric' or 'grid'")
    if not isinstance(doc.get("agents"), list):
        raise DocumentError("solution document needs an agents list")
    return doc


def params_from_document(doc: dict) -> PlannerParams:
    p = doc.get("params") or {}
    try:
        return PlannerParams(float(p.get("r_speed", 1.0)), float(p.get("i_margin", 1.3)),
                             None if p.get("delta_t") is None else float(p["delta_t"]))
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"bad params: {exc}") from None


def topometric_paths(doc: dict) -> tuple[list[Agent], list[TimedPath]]:
    agents, paths = [], []
    try:
        for a in doc["agents"]:
            agents.append(Agent(int(a["id"]), _cell(a["start"]), _cell(a["goal"])))
            visits = tuple(Visit(int(v["region"]), float(v["entry"]), _time(v["exit"]),
                                 tuple(_cell(c) for c in v["waypoints"]),
                                 None if v.get("opening") is None else int(v["opening"]))
                           for v in a["path"])
            goal_region = visits[-1].region if visits else -1
            paths.append(TimedPath(visits, float(a.get("arrival", 0.0)), goal_region,
                                   float(a.get("length", 0.0))))
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed topometric solution: {exc!r}") from None
    return agents, paths


def grid_paths(doc: dict) -> tuple[list[GridAgent], list[DiscretePath]]:
    agents, paths = [], []
    try:
        for a in doc["agents"]:
            agents.append(GridAgent(int(a["id"]), _cell(a["start"]), _cell(a["goal"])))
            cells = []
            for k, run in enumerate(a["path"]):
                entry = int(run["entry"])
                if entry != len(cells):
                    raise DocumentError(f"agent {a['id']}: run {k} enters at {entry}, "
                                        f"expected {len(cells)}")
                if run["exit"] is None:
                    # the final run lasts up to the recorded arrival step
                    cells.extend([_cell(run["cell"])] * max(1, int(a["arrival"]) + 1 - entry))
                else:
                    cells.extend([_cell(run["cell"])] * (int(run["exit"]) - entry))
            paths.append(DiscretePath(tuple(cells)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"malformed grid solution: {exc!r}") from None
    return agents, paths
