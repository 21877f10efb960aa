"""Functional dependence graph of a distributed index coding problem.

Vertices are tuples: ``("x", i)`` for message i, ``("y", J)`` for the
server holding message set J (a bitmask), ``("xh", i)`` for receiver i's
estimate.  Edges: X_i -> Y_J when i is in J, X_i -> Xh_j when i is in A_j,
Y_J -> Xh_i for every J and i, Xh_i -> X_i.
"""

from collections import deque
from dataclasses import dataclass

from . import sets


class QueryError(ValueError):
    """A separation query is malformed."""


def x(i):
    return ("x", i)


def y(j):
    return ("y", j)


def xh(i):
    return ("xh", i)


@dataclass(frozen=True)
class Fdg:
    n: int
    vertices: tuple
    edges: frozenset

    def successors(self, v):
        return sorted(h for t, h in self.edges if t == v)

    def predecessors(self, v):
        return sorted(t for t, h in self.edges if h == v)


def build_fdg(p, servers=None):
    """Graph over the given servers (default: the active ones)."""
    n = p.n
    if servers is None:
        servers = p.active_servers()
    servers = sets.members(servers)
    verts = [x(i) for i in range(1, n + 1)]
    verts += [y(j) for j in servers]
    verts += [xh(i) for i in range(1, n + 1)]
    edges = set()
    for j in servers:
        for i in sets.elements(j):
            edges.add((x(i), y(j)))
        for i in range(1, n + 1):
            edges.add((y(j), xh(i)))
    for k in range(1, n + 1):
        for i in sets.elements(p.side_info[k - 1]):
            edges.add((x(i), xh(k)))
        edges.add((xh(k), x(k)))
    return Fdg(n, tuple(verts), frozenset(edges))


def expected_counts(p, servers=None):
    """Closed-form vertex and edge counts of :func:`build_fdg`."""
    n = p.n
    if servers is None:
        servers = p.active_servers()
    nserv = sets.popcount(servers)
    held = sum(sets.popcount(j) for j in sets.members(servers))
    side = sum(sets.popcount(a) for a in p.side_info)
    return 2 * n + nserv, held + side + nserv * n + n


def _check_xy(vs, what):
    for v in vs:
        if v[0] not in ("x", "y"):
            raise QueryError(f"{what} may only contain message and server vertices, got {format_vertex(v)}")


def ancestral_graph(g, a):
    """Vertex-induced subgraph on ``a`` and its ancestors.

    Ancestors are message or server vertices with a directed path to ``a``
    that uses only message and server vertices and no edge leaving a message
    vertex.
    """
    a = set(a)
    _check_xy(a, "ancestral set")
    for v in a:
        if v not in g.vertices:
            raise QueryError(f"vertex {format_vertex(v)} is not in the graph")
    pred = {}
    for t, h in g.edges:
        if t[0] == "x" or t[0] == "xh" or h[0] == "xh":
            continue
        pred.setdefault(h, []).append(t)
    keep = set(a)
    todo = deque(sorted(a))
    while todo:
        v = todo.popleft()
        for t in pred.get(v, ()):
            if t not in keep:
                keep.add(t)
                todo.append(t)
    verts = tuple(v for v in g.vertices if v in keep)
    edges = frozenset((t, h) for t, h in g.edges if t in keep and h in keep)
    return Fdg(g.n, verts, edges)


def fd_separates(g, u, w, z):
    """Does ``u`` fd-separate ``w`` and ``z``?

    Builds the ancestral graph of the union, drops edges leaving ``u`` and
    asks whether ``w`` and ``z`` are disconnected when directions are
    ignored.
    """
    u, w, z = set(u), set(w), set(z)
    if not w or not z:
        raise QueryError("W and Z must be nonempty")
    if u & w or u & z or w & z:
        raise QueryError("query sets must be pairwise disjoint")
    sub = ancestral_graph(g, u | w | z)
    adj = {v: [] for v in sub.vertices}
    for t, h in sub.edges:
        if t in u:
            continue
        adj[t].append(h)
        adj[h].append(t)
    seen = set(w)
    todo = deque(sorted(w))
    while todo:
        v = todo.popleft()
        if v in z:
            return False
        for nb in adj[v]:
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return True


def prop16_check(p, servers, k1, k2, g=None):
    """fd-separation of X_K1 and X_K2 by the other messages and the servers given."""
    if not k1 or not k2:
        raise QueryError("K and K' must be nonempty")
    if k1 & k2:
        raise QueryError("K and K' must be disjoint")
    g = build_fdg(p) if g is None else g
    rest = sets.full(p.n) & ~(k1 | k2)
    u = {x(i) for i in sets.elements(rest)} | {y(j) for j in sets.members(servers)}
    w = {x(i) for i in sets.elements(k1)}
    z = {x(i) for i in sets.elements(k2)}
    return fd_separates(g, u, w, z)


def parse_vertex(token):
    """``x3`` -> message 3, ``y1,2`` -> server {1,2}, ``xh2`` -> estimate of message 2."""
    t = token.strip().lower()
    try:
        if t.startswith("xh"):
            return xh(int(t[2:]))
        if t.startswith("x"):
            return x(int(t[1:]))
        if t.startswith("y"):
            parts = [int(s) for s in t[1:].replace("{", "").replace("}", "").split(",") if s]
            if not parts:
                raise ValueError
            return y(sets.msgset(parts))
    except ValueError:
        pass
    raise QueryError(f"bad vertex token {token!r}")


def parse_vertices(text):
    """Vertex list separated by ``;`` or spaces, e.g. ``"x1; y1,2; y1,3"``."""
    text = text.strip()
    if not text or text == "-":
        return []
    tokens = [t for chunk in text.split(";") for t in chunk.split()]
    return [parse_vertex(t) for t in tokens]


def format_vertex(v):
    kind, a = v
    if kind == "y":
        return "y" + ",".join(map(str, sets.elements(a)))
    return f"{kind}{a}"
