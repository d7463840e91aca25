from .grid_cbs import (DiscretePath, GridAgent, GridMapfInstance, GridSolution, find_grid_conflicts,
                       solve_grid_cbs, solve_grid_ecbs, space_time_astar, validate_grid_solution)

__all__ = [
    "DiscretePath", "GridAgent", "GridMapfInstance", "GridSolution", "find_grid_conflicts",
    "solve_grid_cbs", "solve_grid_ecbs", "space_time_astar", "validate_grid_solution",
]
