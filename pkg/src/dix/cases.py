"""Worked instances with known bounds, used by tests and the CLI.

Each builder returns fresh values; servers are written as tuples of message
indices.
"""

from . import sets
from .inner import DecodingConfig, uniform_config
from .model import Problem


def _servers(*groups):
    return sets.collection(sets.msgset(j) for j in groups)


def _d(*parts):
    return tuple(sets.msgset(x) for x in parts)


# (1|-),(2|4),(3|4),(4|3): inner 21, touch outer 21, all-server 22
def unit_problem_14():
    return Problem.from_lists([[], [4], [4], [3]])


def unit_problem_14_config():
    p = unit_problem_14()
    full = sets.all_servers(4)
    return DecodingConfig((full,) * 4, _d([1], [2, 3], [1, 2, 3], [1, 2, 4]))


# (1|4),(2|3),(3|2),(4|1): needs a non-maximal two-group fd grouping for 70/3
def unit_problem_46():
    return Problem.from_lists([[4], [3], [2], [1]])


def problem_46_fd_group():
    return _servers((1,), (2,), (3,), (4,), (1, 2), (1, 3), (2, 4), (3, 4))


# region example: every single rate <= 8, pairs <= 12, three triples <= 14
def region_problem():
    return Problem.from_lists([[4], [4], [2], [3]])


def region_expected():
    """Expected nonredundant inequalities as (message tuple, bound)."""
    out = [((i,), 8) for i in range(1, 5)]
    out += [((i, j), 12) for i in range(1, 5) for j in range(i + 1, 5)]
    out += [((1, 2, 3), 14), ((1, 2, 4), 14), ((1, 3, 4), 14)]
    return out


# per-receiver server groups beat a shared group: CCC 6, fractional 7
def varied_groups_problem():
    return Problem.from_lists(
        [[2, 5], [3, 4], [], [2, 5], [1, 2, 4]],
        {(1, 2, 3): 1, (1, 4): 1, (1, 3, 4, 5): 2})


def varied_groups_d():
    return _d([1, 3, 4], [2], [3], [1, 3, 4], [3, 5])


def varied_groups_tuples():
    j1, j2, j3 = _servers((1, 2, 3)), _servers((1, 4)), _servers((1, 3, 4, 5))
    na = j1 | j2 | j3
    return [
        (j1 | j2, j3, j2, j2 | j3, na),
        (j1 | j2, j1 | j2, j2, j1 | j2, j2 | j3),
        (j2 | j3, j3, j1 | j2, j2, j3),
        (j1 | j3, j1 | j2, j2, j3, j1),
        (j2 | j3, na, j2, j1 | j3, j2),
        (j2, j1 | j2, j2 | j3, j1 | j3, na),
        (j1 | j3, j2, j1 | j3, j1 | j3, na),
    ]


def varied_groups_configs():
    d = varied_groups_d()
    return [DecodingConfig(t, d) for t in varied_groups_tuples()]


def varied_groups_touch_parts():
    return [sets.msgset([2, 5]), sets.msgset([1, 3, 4])]


# capacity averaged over decoding sets beats per-set CCC: CCC 4, fractional 5
def averaged_capacity_problem():
    return Problem.from_lists(
        [[4], [1, 3, 4], [1, 2, 4], [1, 3], [3]],
        {(1, 2, 5): 1, (1, 2, 3, 5): 1, (2, 4, 5): 1})


def averaged_capacity_configs():
    p = averaged_capacity_problem()
    rest = [sets.full(5) & ~p.side_info[i] for i in range(5)]
    d1 = (sets.msgset([1]), rest[1], rest[2], rest[3], sets.msgset([5]))
    d2 = (sets.msgset([1, 2]), rest[1], rest[2], rest[3], sets.msgset([5]))
    return [uniform_config(p, p.active_servers(), d1), uniform_config(p, p.active_servers(), d2)]


def averaged_capacity_touch_parts():
    return [sets.msgset([1, 3]), sets.msgset([2, 4, 5])]


# three-group fd grouping reaches 34/3 where two groups stop at 12
def three_group_problem():
    active = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5), (3, 4), (3, 5), (1, 2, 3, 4, 5)]
    return Problem.from_lists([[], [3], [2], [5], [4]], {j: 1 for j in active})


def three_group_groups():
    return [
        _servers((1, 2), (1, 3), (1, 4), (1, 5)),
        _servers((2, 4), (2, 5), (3, 4), (3, 5)),
        _servers((1, 2, 3, 4, 5)),
    ]


def three_group_d():
    return _d([1], [1, 2], [1, 3], [1, 4], [1, 5])


def three_group_configs():
    p = three_group_problem()
    d = three_group_d()
    return [uniform_config(p, g, d) for g in three_group_groups()]


# intersecting a touch grouping with an fd grouping reaches 14; each alone gives 29/2
def intersect_problem():
    active = [(1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5), (3, 4, 5),
              (1, 3, 4, 5), (2, 3, 4, 5), (1, 2, 3, 4, 5)]
    return Problem.from_lists([[2], [1], [5], [3], [4]], {j: 1 for j in active})


def intersect_touch_parts():
    return [sets.msgset([1]), sets.msgset([2, 3, 4, 5])]


def intersect_fd_first():
    return _servers((1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5))


def intersect_config():
    p = intersect_problem()
    return uniform_config(p, p.active_servers(), _d([1], [2], [3, 4], [4, 5], [3, 5]))


def problem_46_grouping(ground=None):
    from .outer import Grouping
    ground = sets.all_servers(4) if ground is None else ground
    first = problem_46_fd_group() & ground
    return Grouping((first, ground & ~first), ground, "fd:46")


def canned_groupings(p):
    """Hand-picked groupings known to be tight for particular problems."""
    out = []
    if p == unit_problem_46():
        out.append(problem_46_grouping(p.active_servers()))
    return out
