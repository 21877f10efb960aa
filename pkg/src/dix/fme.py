"""Fourier-Motzkin elimination with LP-based redundancy pruning.

Systems are lists of :class:`dix.lp.Constraint` with relation ``<=`` or
``=``.  Equalities containing the variable being eliminated are used for
substitution; the remaining inequalities are combined pairwise.
"""

from fractions import Fraction
from math import gcd

from .lp import EQ, INFEASIBLE, LE, UNBOUNDED, Constraint, LinearProgram, solve


def le(coeffs, rhs, label=""):
    """Build ``sum coeffs <= rhs`` with canonical term order."""
    return _make(coeffs, LE, rhs, label)


def eq(coeffs, rhs, label=""):
    return _make(coeffs, EQ, rhs, label)


def _make(coeffs, rel, rhs, label=""):
    terms = tuple(sorted((v, Fraction(c)) for v, c in coeffs.items() if c))
    return Constraint(terms, rel, Fraction(rhs), label)


def _normalize(con):
    """Scale to primitive integer coefficients so duplicates compare equal."""
    if not con.coeffs:
        return con
    den = 1
    for _, c in con.coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    den = den * con.rhs.denominator // gcd(den, con.rhs.denominator)
    nums = [int(c * den) for _, c in con.coeffs]
    g = 0
    for x in nums:
        g = gcd(g, x)
    g = gcd(g, int(con.rhs * den)) if con.rhs else g
    scale = Fraction(den, g)
    if con.rel == EQ and con.coeffs[0][1] < 0:
        scale = -scale
    return Constraint(tuple((v, c * scale) for v, c in con.coeffs), con.rel, con.rhs * scale, con.label)


def _coeff(con, v):
    for name, c in con.coeffs:
        if name == v:
            return c
    return Fraction(0)


def _combine(a, fa, b, fb):
    """``fa * a + fb * b`` with zero terms dropped."""
    terms = {}
    for v, c in a.coeffs:
        terms[v] = terms.get(v, 0) + fa * c
    for v, c in b.coeffs:
        terms[v] = terms.get(v, 0) + fb * c
    rel = EQ if a.rel == EQ and b.rel == EQ else LE
    return _make(terms, rel, fa * a.rhs + fb * b.rhs)


def _dedup(system):
    out = []
    seen = set()
    for con in system:
        con = _normalize(con)
        key = (con.coeffs, con.rel, con.rhs)
        if key not in seen:
            seen.add(key)
            out.append(con)
    # among identical left sides keep only the tightest bound
    best = {}
    for con in out:
        if con.rel == LE:
            k = con.coeffs
            if k not in best or con.rhs < best[k].rhs:
                best[k] = con
    return [c for c in out if c.rel != LE or best[c.coeffs] is c]


def variables_of(system):
    names = set()
    for con in system:
        names.update(v for v, _ in con.coeffs)
    return names


def eliminate_one(system, v):
    """Project out ``v``; the result does not mention ``v``."""
    eqs = [c for c in system if c.rel == EQ and _coeff(c, v)]
    if eqs:
        pivot = eqs[0]
        pv = _coeff(pivot, v)
        out = []
        for con in system:
            if con is pivot:
                continue
            cv = _coeff(con, v)
            out.append(_combine(con, Fraction(1), pivot, -cv / pv) if cv else con)
        return out
    pos, neg, rest = [], [], []
    for con in system:
        cv = _coeff(con, v)
        if cv > 0:
            pos.append((con, cv))
        elif cv < 0:
            neg.append((con, -cv))
        else:
            rest.append(con)
    for a, ca in pos:
        for b, cb in neg:
            rest.append(_combine(a, cb, b, ca))
    return rest


def _trivial(system):
    """Drop ``0 <= b`` rows; keep an infeasible ``0 <= b`` (b < 0) as a marker."""
    out = []
    for con in system:
        if con.coeffs:
            out.append(con)
        elif (con.rel == LE and con.rhs < 0) or (con.rel == EQ and con.rhs != 0):
            return [con]
    return out


def is_redundant(c, system, nonneg=()):
    """True when ``c`` is implied by ``system`` (other members; ``c`` itself is skipped).

    Variables are free except those listed in ``nonneg``.  An infeasible
    system implies everything.
    """
    others = [s for s in system if s is not c and s != c]
    lp = LinearProgram("max")
    names = variables_of(others) | variables_of([c])
    nonneg = set(nonneg)
    for v in sorted(names):
        lp.add_variable(v, nonneg=v in nonneg)
    for s in others:
        lp.add_constraint(dict(s.coeffs), s.rel, s.rhs)
    lp.set_objective(dict(c.coeffs))
    res = solve(lp)
    if res.status == INFEASIBLE:
        return True
    if res.status == UNBOUNDED:
        return False
    if c.rel == EQ:
        low = LinearProgram("min")
        for v in sorted(names):
            low.add_variable(v, nonneg=v in nonneg)
        for s in others:
            low.add_constraint(dict(s.coeffs), s.rel, s.rhs)
        low.set_objective(dict(c.coeffs))
        lres = solve(low)
        return res.value <= c.rhs and lres.status == "optimal" and lres.value >= c.rhs
    return res.value <= c.rhs


def prune(system, nonneg=()):
    """Remove redundant constraints one at a time, in order."""
    kept = list(system)
    i = 0
    while i < len(kept):
        if is_redundant(kept[i], kept, nonneg):
            del kept[i]
        else:
            i += 1
    return kept


def fme_eliminate(system, vars, nonneg=(), prune_rounds=True, greedy=False, max_rows=None):
    """Eliminate ``vars`` from ``system``.

    Variables absent from the system are skipped.  ``nonneg`` lists kept
    variables that are known to be nonnegative; it only informs pruning.
    With ``greedy`` the next variable is the one producing the fewest new
    rows rather than the next in ``vars``.
    """
    system = _trivial(_dedup(system))
    todo = [v for v in vars]
    rank = {v: k for k, v in enumerate(todo)}
    eliminated = set()
    while todo:
        if greedy:
            def cost(v):
                p = sum(1 for c in system if _coeff(c, v) > 0)
                n = sum(1 for c in system if _coeff(c, v) < 0)
                return (p * n - p - n, rank[v])
            todo.sort(key=cost)
        v = todo.pop(0)
        eliminated.add(v)
        if not any(_coeff(c, v) for c in system):
            continue
        system = _trivial(_dedup(eliminate_one(system, v)))
        if max_rows is not None and len(system) > max_rows:
            raise RuntimeError(f"elimination grew to {len(system)} rows")
        if prune_rounds:
            background = [x for x in nonneg if x not in eliminated]
            system = prune(system, background)
    return system


def format_system(system):
    lines = []
    for con in system:
        parts = []
        for v, c in con.coeffs:
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag} "
            sign = "-" if c < 0 else "+"
            if not parts:
                parts.append(("-" if c < 0 else "") + coef + v)
            else:
                parts.append(f"{sign} {coef}{v}")
        lines.append(f"{' '.join(parts) or '0'} {con.rel} {con.rhs}")
    return lines


def lp_system(lp):
    """Constraints of ``lp`` plus explicit sign rows for its nonnegative variables."""
    system = list(lp.constraints)
    for v in lp.variables:
        if lp.nonneg[v]:
            system.append(le({v: -1}, 0))
    return system


def project_lp(lp, keep, greedy=True, max_rows=None):
    """Feasible region of ``lp`` projected onto the variables in ``keep``."""
    keep = list(keep)
    drop = [v for v in lp.variables if v not in keep]
    nonneg = [v for v in keep if lp.nonneg[v]]
    return fme_eliminate(lp_system(lp), drop, nonneg=nonneg, greedy=greedy, max_rows=max_rows)
