"""Exact rational linear programming.

:class:`LinearProgram` stores sparse constraints keyed by variable name and
drops duplicates by hashing a canonical form.  :func:`solve` works on a
sparse tableau of ``gmpy2.mpq`` values; no floating point is involved.

For tall systems the default route is a dual simplex with exact
steepest-edge pricing.  It starts from a loose bound on the improving
columns and perturbs the costs by tiny deterministic amounts so degenerate
vertices are left quickly; the perturbation lives in a separate cost row,
and the final basis is re-priced with the true costs (a few primal pivots
finish the job if needed).  Other systems, and anything the dual route
cannot settle, go to the primal simplex with Dantzig entering and the
lexicographic ratio test, or with Bland's rule on request.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq

LE = "<="
EQ = "="
GE = ">="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class CapExceeded(RuntimeError):
    """A generator would exceed its configured size limit."""


def _frac(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(int(v.numerator), int(v.denominator))


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple  # ((name, Fraction), ...) sorted by variable order
    rel: str
    rhs: Fraction
    label: str = field(default="", compare=False)

    def lhs_value(self, point):
        return sum((c * point.get(v, 0) for v, c in self.coeffs), Fraction(0))

    def satisfied_by(self, point):
        val = self.lhs_value(point)
        return val <= self.rhs if self.rel == LE else val == self.rhs

    def as_dict(self):
        return dict(self.coeffs)


class LinearProgram:
    """Sparse LP over named variables: maximize or minimize a linear objective."""

    def __init__(self, sense="max"):
        if sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        self.sense = sense
        self.variables = []
        self._order = {}
        self.nonneg = {}
        self.constraints = []
        self._seen = set()
        self.objective = {}
        self.trivially_infeasible = False

    def __len__(self):
        return len(self.constraints)

    def add_variable(self, name, nonneg=True):
        if name not in self._order:
            self._order[name] = len(self.variables)
            self.variables.append(name)
            self.nonneg[name] = nonneg
        return name

    def has_variable(self, name):
        return name in self._order

    def set_objective(self, coeffs):
        obj = {}
        for v, c in coeffs.items():
            self.add_variable(v)
            c = Fraction(c)
            if c:
                obj[v] = obj.get(v, 0) + c
        self.objective = obj

    def add_constraint(self, coeffs, rel, rhs, label=""):
        """Add ``sum coeffs <rel> rhs``; returns False for duplicates and tautologies."""
        if rel not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {rel!r}")
        rhs = Fraction(rhs)
        terms = {}
        for v, c in coeffs.items():
            if v not in self._order:
                raise KeyError(f"constraint references undeclared variable {v!r}")
            c = Fraction(c)
            if c:
                terms[v] = terms.get(v, 0) + c
        terms = {v: c for v, c in terms.items() if c}
        if rel == GE:
            terms = {v: -c for v, c in terms.items()}
            rhs = -rhs
            rel = LE
        if not terms:
            ok = rhs >= 0 if rel == LE else rhs == 0
            if not ok:
                self.trivially_infeasible = True
            return False
        order = self._order
        items = sorted(terms.items(), key=lambda t: order[t[0]])
        lead = abs(items[0][1])
        if rel == EQ and items[0][1] < 0:
            lead = -lead
        key_items = tuple((v, c / lead) for v, c in items)
        key = (key_items, rel, rhs / lead)
        if key in self._seen:
            return False
        self._seen.add(key)
        self.constraints.append(Constraint(tuple(items), rel, rhs, label))
        return True

    def copy(self):
        lp = LinearProgram(self.sense)
        lp.variables = list(self.variables)
        lp._order = dict(self._order)
        lp.nonneg = dict(self.nonneg)
        lp.constraints = list(self.constraints)
        lp._seen = set(self._seen)
        lp.objective = dict(self.objective)
        lp.trivially_infeasible = self.trivially_infeasible
        return lp

    def size(self):
        return len(self.variables), len(self.constraints)

    def dump(self):
        """Plain-text listing, one constraint per line with exact fractions."""
        lines = [f"{self.sense}: {_fmt_expr(self.objective.items())}"]
        for k, con in enumerate(self.constraints, start=1):
            tag = con.label or f"c{k}"
            lines.append(f"{tag}: {_fmt_expr(con.coeffs)} {con.rel} {con.rhs}")
        free = [v for v in self.variables if not self.nonneg[v]]
        if free:
            lines.append("free: " + " ".join(free))
        return "\n".join(lines) + "\n"


def _fmt_expr(items):
    parts = []
    for v, c in items:
        if not parts:
            parts.append(f"{c} {v}")
        elif c < 0:
            parts.append(f"- {-c} {v}")
        else:
            parts.append(f"+ {c} {v}")
    return " ".join(parts) if parts else "0"


@dataclass
class LpResult:
    status: str
    value: Fraction = None
    primal: dict = None
    pivots: list = field(default_factory=list, repr=False)

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Obj:
    """A reduced-cost row and the objective value it tracks."""

    __slots__ = ("row", "val")

    def __init__(self, row, val=None):
        self.row = row
        self.val = mpq(0) if val is None else val


class _Tableau:
    """Dictionary-of-rows simplex tableau over ``mpq``.

    Every row owns a slack column in ``[slack0, slack1)``.  Their
    coefficients form the inverse of the current basis, which serves both
    the lexicographic ratio test (an implicit perturbation of the
    right-hand side by decreasing powers of a tiny epsilon) and the exact
    dual steepest-edge weights.
    """

    def __init__(self, slack0, slack1, track_weights=False):
        self.rows = []
        self.rhs = []
        self.basis = []
        self.where = {}
        self.slack0 = slack0
        self.slack1 = slack1
        self.weights = [] if track_weights else None
        self.pivots = []

    def _weight(self, row):
        s0, s1 = self.slack0, self.slack1
        total = mpq(0)
        for k, v in row.items():
            if s0 <= k < s1:
                total += v * v
        return total

    def add_row(self, coeffs, b, slack):
        """Append ``coeffs . x + slack = b`` rewritten in the current basis."""
        row = dict(coeffs)
        row[slack] = mpq(1)
        b = mpq(b)
        for k in [k for k in coeffs if k in self.where]:
            f = row.pop(k)
            i = self.where[k]
            for kk, v in self.rows[i].items():
                if kk == k:
                    continue
                nv = row.get(kk, 0) - f * v
                if nv:
                    row[kk] = nv
                else:
                    row.pop(kk, None)
            b -= f * self.rhs[i]
        self.where[slack] = len(self.rows)
        self.rows.append(row)
        self.rhs.append(b)
        self.basis.append(slack)
        if self.weights is not None:
            self.weights.append(None)

    def pivot(self, r, c, objs):
        rows, rhs, weights = self.rows, self.rhs, self.weights
        prow = rows[r]
        p = prow[c]
        if p != 1:
            inv = 1 / p
            for k in prow:
                prow[k] *= inv
            rhs[r] *= inv
        prow[c] = mpq(1)
        prhs = rhs[r]
        pitems = list(prow.items())
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row.get(c)
            if f is None:
                continue
            for k, v in pitems:
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            if prhs:
                rhs[i] -= f * prhs
            if weights is not None:
                weights[i] = None
        if weights is not None:
            weights[r] = None
        for o in objs:
            f = o.row.get(c)
            if f is None:
                continue
            for k, v in pitems:
                nv = o.row.get(k, 0) - f * v
                if nv:
                    o.row[k] = nv
                else:
                    o.row.pop(k, None)
            o.val += f * prhs
        del self.where[self.basis[r]]
        self.basis[r] = c
        self.where[c] = r
        self.pivots.append((r, c))

    def _lex_key(self, i, a):
        s0, s1 = self.slack0, self.slack1
        return sorted((k, v / a) for k, v in self.rows[i].items() if s0 <= k < s1)

    def _lex_less(self, x, y):
        """Is sparse vector ``x`` lexicographically smaller than ``y`` (implicit zeros)?"""
        i = j = 0
        while i < len(x) or j < len(y):
            kx = x[i][0] if i < len(x) else None
            ky = y[j][0] if j < len(y) else None
            if kx is not None and (ky is None or kx < ky):
                return x[i][1] < 0
            if ky is not None and (kx is None or ky < kx):
                return y[j][1] > 0
            if x[i][1] != y[j][1]:
                return x[i][1] < y[j][1]
            i += 1
            j += 1
        return False

    def leaving(self, c, rule):
        rows, rhs, basis = self.rows, self.rhs, self.basis
        best = None
        ties = []
        for i, row in enumerate(rows):
            a = row.get(c)
            if a is not None and a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best:
                    best = ratio
                    ties = [i]
                elif ratio == best:
                    ties.append(i)
        if not ties:
            return -1
        if len(ties) == 1:
            return ties[0]
        if rule == "bland":
            return min(ties, key=lambda i: basis[i])
        r = ties[0]
        rkey = self._lex_key(r, rows[r][c])
        for i in ties[1:]:
            key = self._lex_key(i, rows[i][c])
            if self._lex_less(key, rkey):
                r, rkey = i, key
        return r

    def run(self, obj, rule, max_iter):
        """Primal simplex, maximizing; ``obj.row`` holds reduced costs."""
        it = 0
        while True:
            cands = [k for k, v in obj.row.items() if v > 0]
            if not cands:
                return OPTIMAL
            if rule == "bland":
                c = min(cands)
            else:
                c = max(cands, key=lambda k: (obj.row[k], -k))
            r = self.leaving(c, rule)
            if r < 0:
                return UNBOUNDED
            self.pivot(r, c, [obj])
            it += 1
            if max_iter is not None and it >= max_iter:
                raise RuntimeError(f"simplex exceeded {max_iter} pivots")

    def dual_run(self, objs, max_iter):
        """Dual simplex with steepest-edge pricing.

        The reduced costs are the sum of the rows in ``objs`` and must be
        nonpositive on entry; they stay so.  Returns OPTIMAL once every
        right-hand side is nonnegative, INFEASIBLE when a negative row has
        no negative entry.
        """
        rows, rhs, weights = self.rows, self.rhs, self.weights
        it = 0
        while True:
            r = -1
            best = None
            for i, b in enumerate(rhs):
                if b < 0:
                    w = weights[i]
                    if w is None:
                        w = weights[i] = self._weight(rows[i])
                    score = b * b / w
                    if best is None or score > best:
                        best, r = score, i
            if r < 0:
                return OPTIMAL
            c = -1
            bq = None
            for k, a in rows[r].items():
                if a < 0:
                    d = mpq(0)
                    for o in objs:
                        d += o.row.get(k, 0)
                    q = d / a
                    if bq is None or q < bq or (q == bq and k < c):
                        bq, c = q, k
            if c < 0:
                return INFEASIBLE
            self.pivot(r, c, objs)
            it += 1
            if max_iter is not None and it >= max_iter:
                raise RuntimeError(f"simplex exceeded {max_iter} pivots")

    def basic_values(self):
        return {bcol: self.rhs[i] for i, bcol in enumerate(self.basis) if self.rhs[i]}


def _standard_form(lp):
    """Columns for variables (free ones split in two) and ``<=`` rows."""
    colmap = {}
    ncols = 0
    for v in lp.variables:
        if lp.nonneg[v]:
            colmap[v] = (ncols, None)
            ncols += 1
        else:
            colmap[v] = (ncols, ncols + 1)
            ncols += 2
    raw = []
    for con in lp.constraints:
        row = {}
        for v, c in con.coeffs:
            pos, neg = colmap[v]
            row[pos] = mpq(c.numerator, c.denominator)
            if neg is not None:
                row[neg] = -row[pos]
        b = mpq(con.rhs.numerator, con.rhs.denominator)
        is_eq = con.rel == EQ
        raw.append((row, b, is_eq))
        if is_eq:
            raw.append(({k: -v for k, v in row.items()}, -b, True))
    sign = 1 if lp.sense == "max" else -1
    cost = {}
    for v, c in lp.objective.items():
        pos, neg = colmap[v]
        q = mpq(c.numerator, c.denominator) * sign
        cost[pos] = q
        if neg is not None:
            cost[neg] = -q
    return colmap, ncols, raw, cost


def _result(lp, colmap, colval, tab):
    sign = 1 if lp.sense == "max" else -1
    primal = {}
    value = Fraction(0)
    for v in lp.variables:
        pos, neg = colmap[v]
        val = colval.get(pos, 0) - (colval.get(neg, 0) if neg is not None else 0)
        primal[v] = _frac(mpq(val))
    for v, c in lp.objective.items():
        value += c * primal[v]
    return LpResult(OPTIMAL, value, primal, tab.pivots)


def _solve_primal(lp, std, pivot_rule, max_iter):
    colmap, ncols, raw, cost = std
    slack0 = ncols
    art = slack0 + len(raw)
    tab = _Tableau(slack0, art)
    for i, (row, b, _) in enumerate(raw):
        tab.add_row(row, b, slack0 + i)
    rows, rhs, basis = tab.rows, tab.rhs, tab.basis

    neg_rows = [i for i, b in enumerate(rhs) if b < 0]
    if neg_rows:
        # phase 1: one artificial column enters at the most negative row
        for i in neg_rows:
            rows[i][art] = mpq(-1)
        lowest = min(rhs[i] for i in neg_rows)
        r = max(i for i in neg_rows if rhs[i] == lowest)
        obj = _Obj({art: mpq(-1)})
        tab.pivot(r, art, [obj])
        tab.run(obj, pivot_rule, max_iter)
        if obj.val != 0:
            return LpResult(INFEASIBLE, pivots=tab.pivots)
        if art in tab.where:
            i = tab.where[art]
            cols = sorted(k for k in rows[i] if k != art)
            if not cols:
                raise RuntimeError("artificial column stuck in the basis")
            tab.pivot(i, cols[0], [])
        for row in rows:
            row.pop(art, None)

    # phase 2
    obj = _Obj(dict(cost))
    for i, bcol in enumerate(basis):
        cb = cost.get(bcol)
        if cb:
            for k, v in rows[i].items():
                nv = obj.row.get(k, 0) - cb * v
                if nv:
                    obj.row[k] = nv
                else:
                    obj.row.pop(k, None)
    if tab.run(obj, pivot_rule, max_iter) == UNBOUNDED:
        return LpResult(UNBOUNDED, pivots=tab.pivots)
    return _result(lp, colmap, tab.basic_values(), tab)


def _perturbation(tab, ncols, present, scale):
    """Small distinct negative costs on nonbasic columns, the same for every run."""
    row = {}
    for k in list(range(ncols)) + present:
        if k not in tab.where:
            h = (k * 2654435761 + 97) % (1 << 20)
            row[k] = -scale * mpq(1 + h, 1 << 44)
    return _Obj(row)


def _violated(rows, pending, colval, limit):
    """Indices of pending rows the point violates, most violated first."""
    found = []
    for j in pending:
        row, b, _ = rows[j]
        lhs = mpq(0)
        for k, a in row.items():
            x = colval.get(k)
            if x:
                lhs += a * x
        if lhs > b:
            norm = sum((a * a for a in row.values()), mpq(0))
            found.append(((lhs - b) * (lhs - b) / norm, j))
    found.sort(key=lambda t: (-t[0], t[1]))
    return [j for _, j in found[:limit]]


def _solve_dual(lp, std, max_iter, lazy):
    """Dual simplex from a bounded start; None asks the caller to fall back."""
    colmap, ncols, raw, cost = std
    slack0 = ncols
    bslack = slack0 + len(raw)
    tab = _Tableau(slack0, bslack + 1, track_weights=True)
    if lazy:
        objcols = set(cost)
        first = [j for j, (row, b, is_eq) in enumerate(raw)
                 if b or is_eq or objcols.intersection(row)]
    else:
        first = list(range(len(raw)))
    taken = set(first)
    pending = [j for j in range(len(raw)) if j not in taken]
    present = []
    for j in first:
        tab.add_row(raw[j][0], raw[j][1], slack0 + j)
        present.append(slack0 + j)

    true = _Obj(dict(cost))
    poscols = sorted(k for k, v in cost.items() if v > 0)
    scale = max((abs(v) for v in cost.values()), default=mpq(1))
    if poscols:
        # a loose bound on the improving columns makes the start dual feasible
        big = mpq(1 << 40) * (1 + max((abs(b) for _, b, _ in raw), default=mpq(0)))
        tab.add_row({k: mpq(1) for k in poscols}, big, bslack)
        present.append(bslack)
        top = max(poscols, key=lambda k: (cost[k], -k))
        tab.pivot(len(tab.rows) - 1, top, [true])
    batch = max(64, 2 * ncols)
    pert = _perturbation(tab, ncols, present, scale)
    while True:
        if tab.dual_run([true, pert], max_iter) == INFEASIBLE:
            return None
        colval = tab.basic_values()
        extra = _violated(raw, pending, colval, batch) if pending else []
        if not extra and any(v > 0 for v in true.row.values()):
            # the perturbed optimum may be off by a few pivots for the true costs
            if tab.run(true, "dantzig-lex", max_iter) == UNBOUNDED:
                return None
            colval = tab.basic_values()
            extra = _violated(raw, pending, colval, batch) if pending else []
            pert = None
        if not extra:
            break
        for j in extra:
            tab.add_row(raw[j][0], raw[j][1], slack0 + j)
            present.append(slack0 + j)
        taken.update(extra)
        pending = [j for j in pending if j not in taken]
        if pert is None:
            pert = _perturbation(tab, ncols, present, scale)
    if poscols and bslack not in tab.where:
        return None
    return _result(lp, colmap, colval, tab)


def solve(lp, method="auto", pivot_rule="dantzig-lex", max_iter=None, lazy=None):
    """Solve ``lp`` exactly.  Returns an :class:`LpResult`.

    ``method="dual"`` runs the dual simplex; with ``lazy`` (default: when
    there are many more rows than columns) homogeneous rows are held back
    and added only when the current point violates them.  If the dual route
    cannot conclude, it falls back to the primal simplex, which is also
    available directly as ``method="primal"`` with ``pivot_rule``
    ``"dantzig-lex"`` or ``"bland"``.  ``"auto"`` picks the dual route for
    tall systems (more than twice as many rows as columns) and the primal
    one otherwise.
    """
    if pivot_rule not in ("dantzig-lex", "bland"):
        raise ValueError(f"unknown pivot rule {pivot_rule!r}")
    if method not in ("auto", "dual", "primal"):
        raise ValueError(f"unknown method {method!r}")
    if lp.trivially_infeasible:
        return LpResult(INFEASIBLE)
    std = _standard_form(lp)
    if method == "auto":
        method = "dual" if len(std[2]) > 2 * std[1] else "primal"
    if method == "dual":
        if lazy is None:
            lazy = len(std[2]) > 4 * std[1] + 200
        res = _solve_dual(lp, std, max_iter, lazy)
        if res is not None:
            return res
    return _solve_primal(lp, std, pivot_rule, max_iter)


def maximize(lp):
    res = solve(lp)
    if not res.optimal:
        raise RuntimeError(f"LP is {res.status}")
    return res.value
