"""Polymatroidal outer bounds driven by server groupings.

For a grouping ``P_1..P_m`` of the servers, ``f(G, K)`` stands for the
normalized entropy of the outputs of the servers in ``P_G`` given the messages
outside ``K``.  The LP collects the rate constraints and the axioms that any
such entropy function obeys; its optimum bounds the weighted sum-capacity from
above.

Lattice points ``(G, K)`` are packed into one int ``z = G | K << m``.
"""

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction

from . import sets
from .lp import EQ, LE, CapExceeded, LinearProgram, solve

DEFAULT_CAP_VARS = 1 << 12
DEFAULT_CAP_ROWS = 400000


def cap_vars_default():
    env = os.environ.get("DIX_CAP_VARS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"DIX_CAP_VARS must be an integer, got {env!r}") from None
    return DEFAULT_CAP_VARS


class InvalidGrouping(ValueError):
    pass


@dataclass(frozen=True)
class Grouping:
    groups: tuple
    ground: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        union = 0
        for grp in self.groups:
            if grp & 1:
                raise InvalidGrouping("a group contains the empty server")
            union |= grp
        if union != self.ground:
            raise InvalidGrouping("groups do not cover the ground set exactly")

    @property
    def m(self):
        return len(self.groups)

    def describe(self):
        body = "; ".join(sets.fmt_servers(grp) for grp in self.groups)
        return f"{self.name}[{body}]" if self.name else f"[{body}]"


def pg(g, gmask):
    """Union of the groups selected by bitmask ``gmask`` (bit ``i`` = group ``i + 1``)."""
    out = 0
    i = 0
    while gmask:
        if gmask & 1:
            out |= g.groups[i]
        gmask >>= 1
        i += 1
    return out


def _ground(n, ground):
    return sets.all_servers(n) if ground is None else ground


def _make(groups, ground, name):
    return Grouping(tuple(grp for grp in groups if grp), ground, name)


def individual_touch(n, ground=None):
    ground = _ground(n, ground)
    return _make([sets.touch(n, 1 << i) & ground for i in range(n)], ground, "touch")


def aggregate_touch(n, parts, ground=None):
    ground = _ground(n, ground)
    seen = 0
    for part in parts:
        if not part or part & seen or part & ~sets.full(n):
            raise InvalidGrouping("touch parts must be disjoint nonempty subsets of [n]")
        seen |= part
    if seen != sets.full(n):
        raise InvalidGrouping("touch parts must cover [n]")
    name = "touch:" + "|".join(",".join(map(str, sets.elements(pt))) for pt in parts)
    return _make([sets.touch(n, pt) & ground for pt in parts], ground, name)


def fd2(n, k1, k2, ground=None):
    """Maximal two-group grouping that keeps ``k1`` and ``k2`` fd-separated in group 1."""
    if not k1 or not k2 or k1 & k2:
        raise InvalidGrouping("fd pair must be disjoint nonempty sets")
    ground = _ground(n, ground)
    both = sets.touch_both(n, k1, k2) & ground
    name = f"fd2:{','.join(map(str, sets.elements(k1)))};{','.join(map(str, sets.elements(k2)))}"
    return _make([ground & ~both, both], ground, name)


def fd2_multi(n, pairs, ground=None):
    """Two groups; group 1 avoids every server touching both sides of any listed pair."""
    ground = _ground(n, ground)
    bad = 0
    for k1, k2 in pairs:
        if not k1 or not k2 or k1 & k2:
            raise InvalidGrouping("fd pair must be disjoint nonempty sets")
        bad |= sets.touch_both(n, k1, k2)
    bad &= ground
    name = "fd2:" + "+".join(
        f"{','.join(map(str, sets.elements(a)))};{','.join(map(str, sets.elements(b)))}"
        for a, b in pairs)
    return _make([ground & ~bad, bad], ground, name)


def m_fd(parts, ground):
    seen = 0
    for part in parts:
        if part & seen:
            raise InvalidGrouping("fd parts must be disjoint")
        seen |= part
    if seen != ground:
        raise InvalidGrouping("fd parts must cover the ground set")
    return _make(parts, ground, f"{len(parts)}-fd")


def single_server(ground):
    return _make([1 << j for j in sets.members(ground)], ground, "single")


def all_server(ground):
    return _make([ground], ground, "allserver")


def is_refinement(fine, coarse):
    if fine.ground != coarse.ground:
        raise InvalidGrouping("groupings have different ground sets")
    for grp in coarse.groups:
        cover = 0
        for f in fine.groups:
            if f & ~grp == 0:
                cover |= f
        if cover != grp:
            return False
    return True


def intersect(a, b):
    if a.ground != b.ground:
        raise InvalidGrouping("groupings have different ground sets")
    out = []
    for x in a.groups:
        for y in b.groups:
            z = x & y
            if z and z not in out:
                out.append(z)
    name = f"{a.name or 'A'}^{b.name or 'B'}"
    g = Grouping(tuple(out), a.ground, name)
    assert is_refinement(g, a) and is_refinement(g, b)
    return g


def _weights(p, weights):
    if weights is None:
        return [Fraction(1)] * p.n
    w = [Fraction(x) for x in weights]
    if len(w) != p.n or any(x < 0 for x in w):
        raise ValueError("weights must be n nonnegative numbers")
    return w


@dataclass
class PmModel:
    lp: LinearProgram
    var_of: dict  # lattice point -> variable name, or None for the constant 0
    merge_log: list  # (member, representative) lattice points merged by restriction equality
    axiom6_count: int
    m: int
    n: int


def _point_name(z, m, n):
    gm = z & ((1 << m) - 1)
    k = z >> m
    g = ",".join(str(i + 1) for i in range(m) if gm >> i & 1)
    return f"f[{g}|{','.join(map(str, sets.elements(k)))}]"


def build_grouping_pm(p, g, weights=None, submod="full", axiom6=True, cap_vars=None,
                      cap_rows=DEFAULT_CAP_ROWS):
    n, m = p.n, g.m
    if p.active_servers() & ~g.ground:
        raise InvalidGrouping("grouping ground misses an active server")
    if g.ground & ~sets.all_servers(n):
        raise InvalidGrouping("grouping ground has servers outside [n]")
    if submod not in ("full", "elemental"):
        raise ValueError("submod must be 'full' or 'elemental'")
    cap_vars = cap_vars_default() if cap_vars is None else cap_vars
    size = 1 << (m + n)
    if size > cap_vars:
        raise CapExceeded(f"grouping needs 2^{m + n} = {size} lattice points (cap {cap_vars})")
    if submod == "full" and size * (size - 1) // 2 > cap_rows * 8:
        raise CapExceeded(f"full submodularity needs ~{size * (size - 1) // 2} pairs; use elemental")
    w = _weights(p, weights)
    gfull = (1 << m) - 1
    caps = p.capacities
    pgs = [pg(g, gm) for gm in range(1 << m)]
    tk = [sets.touch(n, k) for k in range(1 << n)]

    # restriction equality: f(G,K) depends only on K and P_G within T_K
    lp = LinearProgram("max")
    var_of = {}
    reps = {}
    merge_log = []
    for z in range(size):
        gm, k = z & gfull, z >> m
        seen = pgs[gm] & tk[k]
        if not seen:
            var_of[z] = None
            continue
        key = (k, seen)
        if key in reps:
            var_of[z] = var_of[reps[key]]
            merge_log.append((z, reps[key]))
        else:
            reps[key] = z
            var_of[z] = lp.add_variable(_point_name(z, m, n))
    for i in range(1, n + 1):
        lp.add_variable(f"R{i}")

    def add(terms, rel, rhs=0):
        coeffs = {}
        for z, c in terms:
            v = var_of[z]
            if v is not None:
                coeffs[v] = coeffs.get(v, 0) + c
        lp.add_constraint(coeffs, rel, rhs)

    # capacity of the servers seen
    for (k, seen), z in reps.items():
        lp.add_constraint({var_of[z]: 1}, LE, sum((caps[j] for j in sets.members(seen)), Fraction(0)))
    # monotone along covers
    for z in range(size):
        if var_of[z] is None:
            continue
        gm, k = z & gfull, z >> m
        for b in range(m):
            if not gm >> b & 1:
                add([(z, 1), (z | 1 << b, -1)], LE)
        for b in range(n):
            if not k >> b & 1:
                add([(z, 1), (z | 1 << (m + b), -1)], LE)
    # submodularity; K runs in reverse order so the lattice is boolean in (G, [n] \ K)
    nfull = sets.full(n)

    def flip(u):
        return (u & gfull) | ((nfull ^ (u >> m)) << m)

    count = 0
    if submod == "full":
        for u1 in range(size):
            for u2 in range(u1 + 1, size):
                if u1 & u2 == u1 or u1 & u2 == u2:
                    continue
                add([(flip(u1 | u2), 1), (flip(u1 & u2), 1), (flip(u1), -1), (flip(u2), -1)], LE)
                count += 1
                if count > cap_rows:
                    raise CapExceeded(f"submodularity exceeds {cap_rows} rows")
    else:
        bits = m + n
        for s in range(size):
            for a in range(bits):
                if s >> a & 1:
                    continue
                for b in range(a + 1, bits):
                    if s >> b & 1:
                        continue
                    sa, sb = s | 1 << a, s | 1 << b
                    add([(flip(sa | sb), 1), (flip(s), 1), (flip(sa), -1), (flip(sb), -1)], LE)
    # fd-separation: disjoint message sets are independent given the rest when no server in P_G bridges them
    a6 = 0
    if axiom6:
        for gm in range(1, 1 << m):
            pgm = pgs[gm]
            for k1, k2 in disjoint_pairs(n):
                if pgm & tk[k1] & tk[k2]:
                    continue
                z1, z2, z12 = gm | k1 << m, gm | k2 << m, gm | (k1 | k2) << m
                before = len(lp.constraints)
                add([(z1, 1), (z2, 1), (z12, -1)], EQ)
                a6 += len(lp.constraints) - before
    # rates
    for i in range(1, n + 1):
        b = p.interfering_set(i)
        hi = gfull | (b | 1 << (i - 1)) << m
        lo = gfull | b << m
        coeffs = {f"R{i}": Fraction(1)}
        for z, c in ((hi, -1), (lo, 1)):
            v = var_of[z]
            if v is not None:
                coeffs[v] = coeffs.get(v, 0) + c
        lp.add_constraint(coeffs, LE, 0, label=f"rate{i}")
    lp.set_objective({f"R{i}": w[i - 1] for i in range(1, n + 1)})
    return PmModel(lp, var_of, merge_log, a6, m, n)


def disjoint_pairs(n):
    """Unordered pairs of disjoint nonempty message sets, in a fixed order."""
    out = []
    full = sets.full(n)
    for k1 in range(1, 1 << n):
        for k2 in sets.submasks(full & ~k1):
            if k2 and k1 < k2:
                out.append((k1, k2))
    return out


def grouping_pm_lp(p, g, weights=None, submod="full", axiom6=True, cap_vars=None):
    return build_grouping_pm(p, g, weights, submod, axiom6, cap_vars).lp


def _value(lp):
    res = solve(lp)
    if not res.optimal:
        raise RuntimeError(f"outer LP unexpectedly {res.status}")
    return res.value


def grouping_pm_value(p, g, weights=None, submod="full", axiom6=True, cap_vars=None):
    return _value(grouping_pm_lp(p, g, weights, submod, axiom6, cap_vars))


def _add_polymatroid(lp, name, ground, bound, submod="full"):
    """Variables ``name(S)`` for nonempty S within ``ground``: monotone, submodular."""
    def var(s):
        return None if s == 0 else name(s)

    subs = sets.submasks(ground)
    for s in subs:
        if s:
            lp.add_variable(name(s))

    def add(terms, rel, rhs=0):
        coeffs = {}
        for s, c in terms:
            v = var(s)
            if v is not None:
                coeffs[v] = coeffs.get(v, 0) + c
        lp.add_constraint(coeffs, rel, rhs)

    for s, rhs in bound(subs):
        add([(s, 1)], LE, rhs)
    for s in subs:
        if s == 0:
            continue
        for e in sets.elements(ground & ~s):
            add([(s, 1), (s | 1 << (e - 1), -1)], LE)
    if submod == "full":
        for a, b in itertools.combinations(subs, 2):
            if a & b in (a, b):
                continue
            add([(a | b, 1), (a & b, 1), (a, -1), (b, -1)], LE)
    else:
        elems = [1 << (e - 1) for e in sets.elements(ground)]
        for s in subs:
            free = [x for x in elems if not s & x]
            for x, y in itertools.combinations(free, 2):
                add([(s | x | y, 1), (s, 1), (s | x, -1), (s | y, -1)], LE)
    return var


def all_server_lp(p, weights=None, submod="full"):
    """Single group holding every server: one polymatroid ``g(K)``."""
    n = p.n
    w = _weights(p, weights)
    caps = p.capacities
    lp = LinearProgram("max")

    def name(s):
        return f"g{sets.fmt_msgset(s)}"

    def bound(subs):
        for s in subs:
            if s:
                yield s, sum((caps[j] for j in sets.members(sets.touch(n, s))), Fraction(0))

    var = _add_polymatroid(lp, name, sets.full(n), bound, submod)
    _add_rates(lp, p, lambda s: var(s), w)
    return lp


def _add_rates(lp, p, var, w, restrict=None, tag=""):
    for i in range(1, p.n + 1):
        lp.add_variable(f"R{i}")
    for i in range(1, p.n + 1):
        if restrict is not None and not restrict >> (i - 1) & 1:
            continue
        b = p.interfering_set(i)
        hi, lo = b | 1 << (i - 1), b
        if restrict is not None:
            hi &= restrict
            lo &= restrict
        coeffs = {f"R{i}": Fraction(1)}
        for s, c in ((hi, -1), (lo, 1)):
            v = var(s)
            if v is not None:
                coeffs[v] = coeffs.get(v, 0) + c
        lp.add_constraint(coeffs, LE, 0, label=f"rate{i}{tag}")
    lp.set_objective({f"R{i}": w[i - 1] for i in range(1, p.n + 1)})


def fl_lp(p, weights=None, submod="full"):
    """One polymatroid per nonempty ``L``, each bounded only at the top by the servers touching ``L``."""
    n = p.n
    w = _weights(p, weights)
    caps = p.capacities
    lp = LinearProgram("max")
    for i in range(1, n + 1):
        lp.add_variable(f"R{i}")
    for l in range(1, 1 << n):
        tag = ",".join(map(str, sets.elements(l)))

        def name(s, tag=tag):
            return f"f_{{{tag}}}{sets.fmt_msgset(s)}"

        def bound(subs, l=l):
            yield l, sum((caps[j] for j in sets.members(sets.touch(n, l))), Fraction(0))

        var = _add_polymatroid(lp, name, l, bound, submod)
        _add_rates(lp, p, var, w, restrict=l, tag=f"@{tag}")
    return lp


def fl_bound(p, weights=None, submod="full"):
    return _value(fl_lp(p, weights, submod))


def all_server_value(p, weights=None, submod="full"):
    return _value(all_server_lp(p, weights, submod))


def touch_specialized_lp(p, weights=None, submod="full"):
    """Individual-touch bound written directly over ``f(G, K)``, ``G, K`` subsets of ``[n]``.

    Independent of :func:`build_grouping_pm`: no variable merging, the
    group-union equalities ``f(G, K) = f(K, K)`` for ``K`` within ``G`` are
    explicit rows, and the capacity bound uses servers touching both ``G``
    and ``K``.
    """
    n = p.n
    w = _weights(p, weights)
    caps = p.capacities
    lp = LinearProgram("max")
    size = 1 << (2 * n)

    def name(z):
        gm, k = z & sets.full(n), z >> n
        if gm == 0 or k == 0:
            return None
        return f"t[{','.join(map(str, sets.elements(gm)))}|{','.join(map(str, sets.elements(k)))}]"

    for z in range(size):
        if name(z):
            lp.add_variable(name(z))

    def add(terms, rel, rhs=0):
        coeffs = {}
        for z, c in terms:
            v = name(z)
            if v is not None:
                coeffs[v] = coeffs.get(v, 0) + c
        lp.add_constraint(coeffs, rel, rhs)

    for z in range(size):
        gm, k = z & sets.full(n), z >> n
        if not name(z):
            continue
        if k & ~gm == 0 and gm != k:
            add([(z, 1), (k | k << n, -1)], EQ)
        lp.add_constraint({name(z): 1}, LE,
                          sum((caps[j] for j in sets.members(sets.touch_both(n, gm, k))), Fraction(0)))
        for b in range(2 * n):
            if not z >> b & 1:
                add([(z, 1), (z | 1 << b, -1)], LE)
    nfull = sets.full(n)

    def flip(u):
        return (u & nfull) | ((nfull ^ (u >> n)) << n)

    if submod == "full":
        for u1 in range(size):
            for u2 in range(u1 + 1, size):
                if u1 & u2 in (u1, u2):
                    continue
                add([(flip(u1 | u2), 1), (flip(u1 & u2), 1), (flip(u1), -1), (flip(u2), -1)], LE)
    else:
        for s in range(size):
            for a in range(2 * n):
                for b in range(a + 1, 2 * n):
                    if s >> a & 1 or s >> b & 1:
                        continue
                    sa, sb = s | 1 << a, s | 1 << b
                    add([(flip(sa | sb), 1), (flip(s), 1), (flip(sa), -1), (flip(sb), -1)], LE)
    full_g = nfull
    for i in range(1, n + 1):
        lp.add_variable(f"R{i}")
        b = p.interfering_set(i)
        coeffs = {f"R{i}": Fraction(1)}
        for z, c in ((full_g | (b | 1 << (i - 1)) << n, -1), (full_g | b << n, 1)):
            v = name(z)
            if v is not None:
                coeffs[v] = coeffs.get(v, 0) + c
        lp.add_constraint(coeffs, LE, 0, label=f"rate{i}")
    lp.set_objective({f"R{i}": w[i - 1] for i in range(1, n + 1)})
    return lp


FAMILIES = ("all_server", "individual_touch", "fd2_all_pairs", "touch_cross_fd2", "fd2_multi_pairs")
MULTI_PAIRS_MAX = 3


def family_members(p, family):
    n = p.n
    ground = p.active_servers()
    if family == "all_server":
        return [all_server(ground)]
    if family == "individual_touch":
        return [individual_touch(n, ground)]
    if family in ("fd2_all_pairs", "touch_cross_fd2"):
        out = []
        seen = set()
        for k1, k2 in disjoint_pairs(n):
            g = fd2(n, k1, k2, ground)
            if g.m < 2 or g.groups in seen:
                continue
            seen.add(g.groups)
            out.append(g)
        if family == "touch_cross_fd2":
            touch = individual_touch(n, ground)
            crossed = []
            seen = set()
            for g in out:
                h = intersect(touch, g)
                h = Grouping(h.groups, h.ground, f"touch^{g.name}")
                if h.groups not in seen:
                    seen.add(h.groups)
                    crossed.append(h)
            return crossed
        return out
    if family == "fd2_multi_pairs":
        # two groups, the first avoiding servers that bridge any of 2..MULTI_PAIRS_MAX pairs
        pairs = disjoint_pairs(n)
        out = []
        seen = set()
        for r in range(2, MULTI_PAIRS_MAX + 1):
            for combo in itertools.combinations(pairs, r):
                g = fd2_multi(n, combo, ground)
                if g.m < 2 or g.groups in seen:
                    continue
                seen.add(g.groups)
                out.append(g)
        return out
    raise ValueError(f"unknown grouping family {family!r}")


@dataclass
class SearchResult:
    value: Fraction
    grouping: Grouping
    skipped: list
    evaluated: int


def search_upper(p, family, weights=None, submod="full", cap_vars=None):
    """Smallest bound over a named grouping family; members over the cap are skipped."""
    best = None
    best_g = None
    skipped = []
    count = 0
    for g in family_members(p, family):
        try:
            v = grouping_pm_value(p, g, weights, submod, cap_vars=cap_vars)
        except CapExceeded as exc:
            skipped.append((g.name, str(exc)))
            continue
        count += 1
        if best is None or v < best:
            best, best_g = v, g
    return SearchResult(best, best_g, skipped, count)
