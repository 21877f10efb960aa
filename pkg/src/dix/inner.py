"""Composite coding achievability LPs.

Receiver ``i`` first recovers every composite index its decoding server group
``P_i`` can see (first step), then recovers the messages ``Delta_i`` from the
composite indices (second step).  All bounds here are maximized weighted
sum-rates; strict inequalities are closed to ``<=`` since the capacity region
is a closure.

First-step constraints come in two equivalent shapes.  The ``M`` form ranges
over collections of composite indices ``M``; the ``Q`` form ranges over
subgroups ``Q`` of ``P_i``.  Both generators skip members that are dominated
by another member with a larger left side and no larger right side (an
``M`` that is not closed, a ``Q`` that is not closed upward in ``P_i``);
pass ``exhaustive=True`` to emit every member instead.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import sets
from .lp import EQ, LE, CapExceeded, LinearProgram, solve

DEFAULT_ENUM_CAP = 1 << 17
DEFAULT_VAR_CAP = 20000


@dataclass(frozen=True)
class DecodingConfig:
    """Per-receiver decoding server groups ``P`` and decoding message sets ``D``."""

    P: tuple
    D: tuple

    def validate(self, p):
        if len(self.P) != p.n or len(self.D) != p.n:
            raise ValueError("configuration must list one P_i and one D_i per receiver")
        universe = sets.all_servers(p.n)
        for i in range(1, p.n + 1):
            d = self.D[i - 1]
            if not d >> (i - 1) & 1:
                raise ValueError(f"D_{i} must contain {i}")
            if d & p.side_info[i - 1]:
                raise ValueError(f"D_{i} must not intersect A_{i}")
            if d & ~sets.full(p.n):
                raise ValueError(f"D_{i} exceeds [n]")
            pi = self.P[i - 1]
            if not pi:
                raise ValueError(f"P_{i} must be nonempty")
            if pi & ~universe:
                raise ValueError(f"P_{i} contains an invalid server")
        return self


def uniform_config(p, group, D):
    return DecodingConfig((group,) * p.n, tuple(D))


def default_config(p, D=None):
    """``P_i`` = active servers, ``D`` = closure heuristic unless given."""
    active = p.active_servers()
    return uniform_config(p, active, dstar(p) if D is None else D)


def delta(p, cfg, i):
    """Messages receiver ``i`` can recover: ``D_i`` within the reach of ``P_i``."""
    return sets.union_of(cfg.P[i - 1]) & cfg.D[i - 1]


def dstar(p, reverse=False):
    """Closure heuristic for decoding message sets.

    Start from ``D_i = {i}``; whenever ``A_j`` is contained in ``A_i | D_i``,
    merge ``D_j`` into ``D_i`` (and drop anything receiver ``i`` already
    knows).  Iterates to the fixed point.
    """
    n = p.n
    a = p.side_info
    d = [1 << i for i in range(n)]
    order = list(itertools.product(range(n), repeat=2))
    if reverse:
        order.reverse()
    changed = True
    while changed:
        changed = False
        for i, j in order:
            if a[j] & ~(a[i] | d[i]) == 0:
                new = (d[i] | d[j]) & ~a[i]
                if new != d[i]:
                    d[i] = new
                    changed = True
    return tuple(d)


def all_decoding_sets(p):
    """Every tuple ``D`` with ``i in D_i`` and ``D_i`` disjoint from ``A_i``."""
    n = p.n
    choices = []
    for i in range(n):
        free = sets.full(n) & ~p.side_info[i] & ~(1 << i)
        choices.append([s | 1 << i for s in sets.submasks(free)])
    return [tuple(t) for t in itertools.product(*choices)]


def rate_var(i, prefix=""):
    return f"{prefix}R{i}"


def comp_var(k, prefix=""):
    return f"{prefix}S{sets.fmt_msgset(k)}"


def cap_var(j, prefix=""):
    return f"{prefix}C{sets.fmt_msgset(j)}"


def _first_step_m(n, pi, u, enum_cap, exhaustive, receiver):
    """Yield (M, Q) pairs: M a collection of composites, Q its holders in P_i."""
    comps = sets.members(u)
    if len(comps) > 62 or 1 << len(comps) > enum_cap:
        raise CapExceeded(
            f"receiver {receiver}: M-form needs 2^{len(comps)} collections (cap {enum_cap})")
    holders = [sets.upset(n, k) & pi for k in comps]
    count = len(comps)
    q_of = [0] * (1 << count)
    for s in range(1, 1 << count):
        low = s & -s
        q_of[s] = q_of[s ^ low] | holders[low.bit_length() - 1]
    for s in range(1, 1 << count):
        q = q_of[s]
        if not exhaustive:
            closed = True
            for b in range(count):
                if not s >> b & 1 and holders[b] & ~q == 0:
                    closed = False
                    break
            if not closed:
                continue
        m = 0
        for b in range(count):
            if s >> b & 1:
                m |= 1 << comps[b]
        yield m, q


def _first_step_q(n, pi, a_down, enum_cap, exhaustive, receiver):
    """Yield (M, Q) pairs from subgroups Q of P_i."""
    if exhaustive:
        servers = sets.members(pi)
        if 1 << len(servers) > enum_cap:
            raise CapExceeded(
                f"receiver {receiver}: Q-form needs 2^{len(servers)} subgroups (cap {enum_cap})")
        groups = (sets.collection(c) for r in range(1, len(servers) + 1)
                  for c in itertools.combinations(servers, r))
    else:
        groups = (q for q in sets.upsets_within(n, pi) if q)
    reach = sets.subset_completion(n, pi)
    for q in groups:
        if not exhaustive and q == 0:
            continue
        only_q = reach & ~sets.subset_completion(n, pi & ~q) & ~a_down
        yield only_q, q


def _add_config(lp, p, cfg, prefix, fractional, form, enum_cap, exhaustive):
    n = p.n
    caps = p.capacities
    for i in range(1, n + 1):
        lp.add_variable(rate_var(i, prefix))
    for i in range(1, n + 1):
        pi = cfg.P[i - 1]
        ai = p.side_info[i - 1]
        a_down = sets.downset(n, ai)
        dlt = delta(p, cfg, i)
        reach = sets.subset_completion(n, pi)
        if not dlt >> (i - 1) & 1:
            # receiver i gets nothing in this configuration and decodes nothing
            lp.add_constraint({rate_var(i, prefix): 1}, EQ, 0, label=f"{prefix}undecodable{i}")
            continue
        # second step
        useful = reach & sets.downset(n, dlt | ai)
        useful_list = [k for k in sets.members(useful) if k]
        for k in useful_list:
            lp.add_variable(comp_var(k, prefix))
        for l in sets.submasks(dlt):
            if not l:
                continue
            coeffs = {rate_var(j, prefix): 1 for j in sets.elements(l)}
            for k in useful_list:
                if k & l:
                    coeffs[comp_var(k, prefix)] = -1
            lp.add_constraint(coeffs, LE, 0)
        # first step
        u = reach & ~a_down
        if not u:
            continue
        chosen = form
        if form == "auto":
            # fewer subgroups of P_i than collections of composites: use Q
            chosen = "Q" if sets.popcount(pi) < sets.popcount(u) else "M"
        if chosen == "M":
            pairs = _first_step_m(n, pi, u, enum_cap, exhaustive, i)
        elif chosen == "Q":
            pairs = _first_step_q(n, pi, a_down, enum_cap, exhaustive, i)
        else:
            raise ValueError(f"unknown first-step form {form!r}")
        for m, q in pairs:
            if not m:
                continue
            coeffs = {}
            for k in sets.members(m):
                coeffs[lp.add_variable(comp_var(k, prefix))] = 1
            if fractional:
                for j in sets.members(q):
                    coeffs[lp.add_variable(cap_var(j, prefix))] = -1
                lp.add_constraint(coeffs, LE, 0)
            else:
                lp.add_constraint(coeffs, LE, sum((caps[j] for j in sets.members(q)), Fraction(0)))


def _weights(p, weights):
    if weights is None:
        return [Fraction(1)] * p.n
    w = [Fraction(x) for x in weights]
    if len(w) != p.n or any(x < 0 for x in w):
        raise ValueError("weights must be n nonnegative numbers")
    return w


def fixed_lp(p, cfg, weights=None, form="auto", enum_cap=DEFAULT_ENUM_CAP, exhaustive=False):
    """Weighted sum-rate LP for one decoding configuration."""
    cfg.validate(p)
    w = _weights(p, weights)
    lp = LinearProgram("max")
    _add_config(lp, p, cfg, "", False, form, enum_cap, exhaustive)
    lp.set_objective({rate_var(i): w[i - 1] for i in range(1, p.n + 1)})
    return lp


def fixed_lp_q_form(p, cfg, weights=None, enum_cap=DEFAULT_ENUM_CAP, exhaustive=False):
    return fixed_lp(p, cfg, weights, form="Q", enum_cap=enum_cap, exhaustive=exhaustive)


def fixed_lp_m_form(p, cfg, weights=None, enum_cap=DEFAULT_ENUM_CAP, exhaustive=False):
    return fixed_lp(p, cfg, weights, form="M", enum_cap=enum_cap, exhaustive=exhaustive)


def fractional_lp(p, configs, weights=None, form="auto", enum_cap=DEFAULT_ENUM_CAP,
                  var_cap=DEFAULT_VAR_CAP):
    """Capacity-sharing LP over an explicit list of decoding configurations."""
    configs = list(configs)
    if not configs:
        raise ValueError("need at least one decoding configuration")
    w = _weights(p, weights)
    lp = LinearProgram("max")
    for i in range(1, p.n + 1):
        lp.add_variable(rate_var(i))
    for idx, cfg in enumerate(configs, start=1):
        cfg.validate(p)
        _add_config(lp, p, cfg, f"c{idx}.", True, form, enum_cap, False)
        if len(lp.variables) > var_cap:
            raise CapExceeded(f"fractional LP exceeds {var_cap} variables at configuration {idx}")
    for i in range(1, p.n + 1):
        coeffs = {rate_var(i): 1}
        for idx in range(1, len(configs) + 1):
            coeffs[rate_var(i, f"c{idx}.")] = -1
        lp.add_constraint(coeffs, EQ, 0, label=f"rate{i}")
    used = 0
    for cfg in configs:
        for pi in cfg.P:
            used |= pi
    for j in sets.members(used):
        coeffs = {}
        for idx in range(1, len(configs) + 1):
            name = cap_var(j, f"c{idx}.")
            if lp.has_variable(name):
                coeffs[name] = 1
        if coeffs:
            lp.add_constraint(coeffs, LE, p.cap(j), label=f"share{sets.fmt_msgset(j)}")
    lp.set_objective({rate_var(i): w[i - 1] for i in range(1, p.n + 1)})
    return lp


def uniform_groups(p):
    """Every nonempty collection of active servers."""
    active = sets.members(p.active_servers())
    out = []
    for r in range(1, len(active) + 1):
        for combo in itertools.combinations(active, r):
            out.append(sets.collection(combo))
    return out


def ccc_lp(p, D, groups=None, weights=None, group_cap=64):
    """Common-group scheme: one shared ``P`` per configuration, fixed ``D``."""
    groups = uniform_groups(p) if groups is None else list(groups)
    if not groups:
        raise ValueError("need at least one server group")
    if len(groups) > group_cap:
        raise CapExceeded(f"{len(groups)} server groups exceed the cap of {group_cap}")
    configs = [uniform_config(p, g, D) for g in groups]
    return fractional_lp(p, configs, weights)


def ccc_sum_rate(p, D, groups=None, weights=None, group_cap=64):
    return _value(ccc_lp(p, D, groups, weights, group_cap))


def ccc_best(p, groups=None, decoding_sets=None, weights=None, group_cap=64):
    """Maximum of :func:`ccc_sum_rate` over decoding set tuples (time sharing)."""
    ds = all_decoding_sets(p) if decoding_sets is None else decoding_sets
    best = None
    best_d = None
    seen = {}
    for D in ds:
        lp = ccc_lp(p, D, groups, weights, group_cap)
        key = _lp_key(lp)
        if key not in seen:
            seen[key] = _value(lp)
        v = seen[key]
        if best is None or v > best:
            best, best_d = v, D
    return best, best_d


def _lp_key(lp):
    return (tuple(sorted(lp._seen, key=repr)), tuple(sorted(lp.objective.items())))


def _value(lp):
    res = solve(lp)
    if not res.optimal:
        raise RuntimeError(f"inner LP unexpectedly {res.status}")
    return res.value


def fixed_value(p, cfg, weights=None, form="auto"):
    return _value(fixed_lp(p, cfg, weights, form))


def fractional_value(p, configs, weights=None):
    return _value(fractional_lp(p, configs, weights))


def default_value(p, weights=None):
    """Sum-rate with ``P_i`` = active servers and the closure heuristic ``D``."""
    return fixed_value(p, default_config(p), weights)


def cor4_region(p, D):
    """Rate inequalities with each server sending its own composite index at full rate.

    Returns ``(coeffs, rhs)`` pairs over ``R1..Rn`` for every receiver ``i``
    and nonempty ``L`` within ``D_i``.
    """
    n = p.n
    out = []
    seen = set()
    for i in range(1, n + 1):
        d = D[i - 1]
        if not d >> (i - 1) & 1 or d & p.side_info[i - 1]:
            raise ValueError(f"invalid D_{i}")
        room = d | p.side_info[i - 1]
        for l in sets.submasks(d):
            if not l:
                continue
            rhs = sum((p.cap(j) for j in sets.submasks(room) if j & l), Fraction(0))
            coeffs = tuple((rate_var(j), Fraction(1)) for j in sets.elements(l))
            key = (coeffs, rhs)
            if key not in seen:
                seen.add(key)
                out.append((dict(coeffs), rhs))
    return out


def cor4_lp(p, D, weights=None):
    w = _weights(p, weights)
    lp = LinearProgram("max")
    for i in range(1, p.n + 1):
        lp.add_variable(rate_var(i))
    for coeffs, rhs in cor4_region(p, D):
        lp.add_constraint(coeffs, LE, rhs)
    lp.set_objective({rate_var(i): w[i - 1] for i in range(1, p.n + 1)})
    return lp
