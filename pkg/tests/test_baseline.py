import random

import pytest

from oracles import _bfs, joint_grid_bfs
from smallmaps import grid_text
from topocbs.baseline import (DiscretePath, GridAgent, GridMapfInstance, find_grid_conflicts,
                              solve_grid_cbs, solve_grid_ecbs, space_time_astar,
                              validate_grid_solution)
from topocbs.baseline.grid_cbs import _Constraints
from topocbs.gridmap import parse_grid
from topocbs.highlevel import InstanceError, NoSolution, SolveTimeout


def grid(rows):
    return parse_grid(grid_text(rows))


def instance(rows, pairs):
    return GridMapfInstance(grid(rows), [GridAgent(k, s, g) for k, (s, g) in enumerate(pairs)])


def test_single_agent_is_shortest_path():
    g = grid(["....", ".@@.", "...."])
    p = space_time_astar(g, (0, 0), (3, 2))
    assert p.cost == _bfs(g.free, (0, 0))[(3, 2)] == 5
    sol = solve_grid_cbs(GridMapfInstance(g, [GridAgent(0, (0, 0), (3, 2))]))
    assert sol.cost == 5 and sol.expanded_nodes == 1 and sol.distance == 5


def test_constraints_delay_the_agent():
    g = grid(["...."])
    cons = _Constraints().with_vertex((1, 0), 1)
    p = space_time_astar(g, (0, 0), (3, 0), cons)
    assert p.cost == 4 and p.at(1) != (1, 0)
    # a goal constraint after arrival forces the agent to step off and come back
    late = _Constraints().with_vertex((3, 0), 5)
    q = space_time_astar(g, (0, 0), (3, 0), late)
    assert q.at(5) != (3, 0) and q.cells[-1] == (3, 0) and q.cost == 6
    edge = _Constraints().with_edge((0, 0), (1, 0), 1)
    assert space_time_astar(g, (0, 0), (1, 0), edge).cost == 2
    assert space_time_astar(grid([".@."]), (0, 0), (2, 0)) is None


def test_swap_through_side_pocket():
    inst = instance(["...", "@.@"], [((0, 0), (2, 0)), ((2, 0), (0, 0))])
    sol = solve_grid_cbs(inst)
    assert validate_grid_solution(inst, sol.paths) == []
    assert sol.cost == joint_grid_bfs(inst.grid, [((0, 0), (2, 0)), ((2, 0), (0, 0))]) == 7


def test_head_on_in_a_corridor_has_no_solution():
    inst = instance(["..."], [((0, 0), (2, 0)), ((2, 0), (0, 0))])
    with pytest.raises((NoSolution, SolveTimeout)):
        solve_grid_cbs(inst, timeout=2.0, max_ct_nodes=2000)


def test_instance_validation():
    with pytest.raises(InstanceError):
        instance([".@"], [((1, 0), (0, 0))])
    with pytest.raises(InstanceError):
        instance(["..."], [((0, 0), (2, 0)), ((0, 0), (1, 0))])
    with pytest.raises(InstanceError):
        instance(["..."], [((0, 0), (2, 0)), ((1, 0), (2, 0))])
    with pytest.raises(ValueError):
        solve_grid_ecbs(instance(["..."], [((0, 0), (2, 0))]), omega=0.5)


def random_instances(n, agents, seed, max_free=12):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        w, h = rng.randint(2, 5), rng.randint(2, 4)
        rows = ["".join("." if rng.random() < 0.75 else "@" for _ in range(w)) for _ in range(h)]
        g = grid(rows)
        if not g.free or len(g.free) > max_free:
            continue
        comp = sorted(_bfs(g.free, min(g.free)))
        if len(comp) < agents + 2:
            continue
        starts = rng.sample(comp, agents)
        goals = rng.sample(comp, agents)
        out.append(GridMapfInstance(g, [GridAgent(k, s, t) for k, (s, t) in enumerate(zip(starts, goals))]))
    return out


def test_cbs_matches_joint_search():
    checked = 0
    for inst in random_instances(40, 2, 3) + random_instances(15, 3, 4):
        expected = joint_grid_bfs(inst.grid, [(a.start, a.goal) for a in inst.agents])
        try:
            sol = solve_grid_cbs(inst, timeout=2.0, max_ct_nodes=5_000)
        except (NoSolution, SolveTimeout):
            sol = None
        if expected is None:
            assert sol is None
            continue
        assert sol is not None
        checked += 1
        assert sol.cost == expected
        assert validate_grid_solution(inst, sol.paths) == []
        assert find_grid_conflicts(sol.paths)[0] == 0
    assert checked >= 35


def test_ecbs_bounds():
    for inst in random_instances(30, 3, 9):
        try:
            opt = solve_grid_cbs(inst, timeout=2.0, max_ct_nodes=5_000)
        except (NoSolution, SolveTimeout):
            continue
        same = solve_grid_ecbs(inst, 1.0, timeout=5.0)
        assert same.cost == opt.cost
        bounded = solve_grid_ecbs(inst, 1.2, timeout=5.0)
        assert validate_grid_solution(inst, bounded.paths) == []
        assert opt.cost <= bounded.cost <= 1.2 * opt.cost + 1e-9
        assert bounded.lower_bound <= opt.cost + 1e-9


def test_conflict_detection_and_validator():
    a = DiscretePath(((0, 0), (1, 0), (2, 0)))
    b = DiscretePath(((2, 0), (1, 0), (0, 0)))
    count, first = find_grid_conflicts([a, b])
    assert first == ("vertex", 0, 1, (1, 0), 1)
    c = DiscretePath(((1, 0), (2, 0)))
    d = DiscretePath(((2, 0), (1, 0)))
    assert find_grid_conflicts([c, d])[1] == ("edge", 0, 1, (1, 0), (2, 0), 1)
    # an agent parked on its goal still blocks others
    parked = DiscretePath(((1, 0),))
    assert find_grid_conflicts([parked, DiscretePath(((0, 0), (0, 0), (0, 0), (1, 0)))])[1][0] == "vertex"
    inst = instance(["...", "@.@"], [((0, 0), (2, 0)), ((2, 0), (0, 0))])
    sol = solve_grid_cbs(inst)
    assert validate_grid_solution(inst, [a, b])
    assert validate_grid_solution(inst, sol.paths[:1])
    jump = DiscretePath(((0, 0), (2, 0)))
    assert any("illegal" in s for s in validate_grid_solution(inst, [jump, sol.paths[1]]))
