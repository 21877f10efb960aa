import pytest
from hypothesis import given, settings, strategies as st

from dix import sets
from dix.fdg import (
    QueryError, ancestral_graph, build_fdg, expected_counts, fd_separates, format_vertex,
    parse_vertex, parse_vertices, prop16_check, x, xh, y,
)
from dix.model import Problem, parse_problem
from dix.sets import msgset

FIG = "(1|-),(2|4),(3|2),(4|3)"


def edge_families_hold(p, g):
    n = p.n
    servers = sets.members(p.active_servers())
    want = set()
    for j in servers:
        want |= {(x(i), y(j)) for i in sets.elements(j)}
        want |= {(y(j), xh(i)) for i in range(1, n + 1)}
    for k in range(1, n + 1):
        want |= {(x(i), xh(k)) for i in sets.elements(p.side_info[k - 1])}
        want.add((xh(k), x(k)))
    return set(g.edges) == want


# [PAPER] the four edge families on the example problem
def test_build_example_graph():
    p = parse_problem(FIG)
    g = build_fdg(p)
    assert edge_families_hold(p, g)
    assert len(g.vertices) == 4 + 15 + 4
    assert (x(4), xh(2)) in g.edges and (x(1), xh(2)) not in g.edges
    assert g.predecessors(x(3)) == [xh(3)]


# [TRIVIAL] one message
def test_build_single():
    g = build_fdg(parse_problem("(1|-)"))
    assert set(g.vertices) == {x(1), y(1), xh(1)}
    assert set(g.edges) == {(x(1), y(1)), (y(1), xh(1)), (xh(1), x(1))}


# [DERIVED] n=2 with servers {1} and {1,2}: 3 + |A_1| + |A_2| + 4 + 2 edges
def test_edge_count_n2():
    two = Problem(2, (msgset([2]), 0), (0, 1, 0, 1))
    assert len(build_fdg(two).edges) == 3 + 1 + 4 + 2
    every = build_fdg(parse_problem("(1|2),(2|-)"))
    assert len(every.edges) == 4 + 1 + 6 + 2


# [DERIVED] a server vertex has only message parents, whose edges are cut
def test_ancestral_single_server():
    g = build_fdg(parse_problem(FIG))
    sub = ancestral_graph(g, {y(msgset([1, 2]))})
    assert set(sub.vertices) == {y(msgset([1, 2]))}
    assert not sub.edges


# [TRIVIAL] message vertices have no parents among messages and servers
def test_ancestral_all_messages():
    g = build_fdg(parse_problem(FIG))
    a = {x(i) for i in range(1, 5)}
    assert set(ancestral_graph(g, a).vertices) == a


# [TRIVIAL] estimates are not allowed in ancestral sets
def test_ancestral_rejects_estimates():
    g = build_fdg(parse_problem(FIG))
    with pytest.raises(QueryError):
        ancestral_graph(g, {xh(1)})
    with pytest.raises(QueryError):
        ancestral_graph(g, {y(msgset([1, 2]))} | {x(5)})


# [PAPER] message 1 and the servers pairing it separate message 2 from messages 3, 4
def test_figure_query():
    g = build_fdg(parse_problem(FIG))
    u = {x(1), y(msgset([1, 2])), y(msgset([1, 3])), y(msgset([1, 4]))}
    assert fd_separates(g, u, {x(2)}, {x(3), x(4)})
    sub = ancestral_graph(g, u | {x(2), x(3), x(4)})
    assert len(sub.vertices) == 7 and len(sub.edges) == 6


# [DERIVED] a shared server bridges the two messages
def test_shared_server_connects():
    g = build_fdg(parse_problem(FIG))
    assert not fd_separates(g, {x(3), y(msgset([1, 2]))}, {x(1)}, {x(2)})


# [TRIVIAL] messages with no common server in the graph stay apart
def test_different_components():
    g = build_fdg(parse_problem(FIG))
    assert fd_separates(g, set(), {x(1)}, {x(2)})
    assert fd_separates(g, {x(3)}, {x(1)}, {x(2), y(msgset([2, 4]))})
    assert not fd_separates(g, set(), {x(1)}, {x(2), y(msgset([1, 2]))})


# [TRIVIAL] malformed queries
def test_query_errors():
    g = build_fdg(parse_problem(FIG))
    with pytest.raises(QueryError):
        fd_separates(g, set(), {x(1)}, {x(1), x(2)})
    with pytest.raises(QueryError):
        fd_separates(g, {x(1)}, {x(1)}, {x(2)})
    with pytest.raises(QueryError):
        fd_separates(g, set(), set(), {x(2)})


# [DERIVED] servers avoiding both sides keep them separated
def test_prop16_example():
    p = parse_problem(FIG)
    k1, k2 = msgset([1]), msgset([4])
    allowed = sets.all_servers(4) & ~sets.touch_both(4, k1, k2)
    assert prop16_check(p, allowed, k1, k2)
    assert not prop16_check(p, sets.all_servers(4), k1, k2)


# [TRIVIAL] precondition errors
def test_prop16_errors():
    p = parse_problem(FIG)
    with pytest.raises(QueryError):
        prop16_check(p, 0, 0, 1)
    with pytest.raises(QueryError):
        prop16_check(p, 0, 3, 1)


# [TRIVIAL] token syntax
def test_vertex_tokens():
    assert parse_vertex("x3") == x(3)
    assert parse_vertex("Y1,2") == y(msgset([1, 2]))
    assert parse_vertex("y{1,3}") == y(msgset([1, 3]))
    assert parse_vertex("xh2") == xh(2)
    assert parse_vertices("x1; y1,2 y1,3") == [x(1), y(3), y(5)]
    assert parse_vertices("-") == []
    assert format_vertex(y(msgset([2, 4]))) == "y2,4"
    for bad in ("z1", "y", "x", "xq"):
        with pytest.raises(QueryError):
            parse_vertex(bad)


@st.composite
def problems(draw):
    n = draw(st.integers(1, 5))
    side = tuple(draw(st.integers(0, sets.full(n))) & ~(1 << i) for i in range(n))
    caps = (0,) + tuple(draw(st.sampled_from([0, 1])) for _ in range((1 << n) - 1))
    return Problem(n, side, caps)


# [DERIVED] vertex and edge counts follow the closed form
@settings(max_examples=80, deadline=None)
@given(problems())
def test_counts_property(p):
    for servers in (None, sets.all_servers(p.n)):
        g = build_fdg(p, servers)
        assert (len(g.vertices), len(g.edges)) == expected_counts(p, servers)
    assert edge_families_hold(p, build_fdg(p))


# [DERIVED] servers avoiding every bridge always separate the two sides
@settings(max_examples=60, deadline=None)
@given(problems(), st.data())
def test_prop16_property(p, data):
    n = p.n
    if n < 2:
        return
    k1 = data.draw(st.integers(1, sets.full(n)))
    rest = sets.full(n) & ~k1
    if not rest:
        return
    k2 = data.draw(st.integers(1, rest)) & rest
    if not k2:
        return
    allowed = sets.all_servers(n) & ~sets.touch_both(n, k1, k2)
    sub = data.draw(st.integers(0, allowed)) & allowed
    assert prop16_check(p, sub, k1, k2, build_fdg(p, sets.all_servers(n)))
