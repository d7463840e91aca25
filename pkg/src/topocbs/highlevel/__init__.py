from .conflicts import (OpeningConflict, RegionConflict, constraints_from_opening_conflict,
                        constraints_from_region_conflict, detect_first_conflict, find_conflicts,
                        occupancy_intervals)
from .search import (Agent, CTNode, InstanceError, MapfInstance, NoSolution, Solution,
                     SolveTimeout, solve_cbs, solve_ecbs)
from .validate import ValidationReport, validate_solution

__all__ = [
    "Agent", "CTNode", "InstanceError", "MapfInstance", "NoSolution", "OpeningConflict",
    "RegionConflict", "Solution", "SolveTimeout", "ValidationReport",
    "constraints_from_opening_conflict", "constraints_from_region_conflict",
    "detect_first_conflict", "find_conflicts", "occupancy_intervals", "solve_cbs",
    "solve_ecbs", "validate_solution",
]
