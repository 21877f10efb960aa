"""Command-line front end.

Subcommands: ``inner``, ``outer``, ``sumcap``, ``catalog``, ``region``,
``fdg``.  Exit codes: 0 success, 2 parse error, 3 size cap exceeded,
4 internal invariant violation.
"""

import argparse
import csv
import io
import json
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import cases, fdg, fme, inner, outer, sets
from .catalog import catalog, entry
from .lp import CapExceeded
from .model import ParseError, parse_problem, serialize_sequence

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_INTERNAL = 4

FME_MAX_N = 4


# ---------------------------------------------------------------- rendering

def fmt_value(v):
    """Exact value with a four-place decimal: ``70/3 ≈ 23.3333``; integers print bare."""
    if v is None:
        return "-"
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator} ≈ {decimal4(v)}"


def decimal4(v):
    v = Fraction(v)
    q = round(v * 10000)
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // 10000}.{q % 10000:04d}"


def exact(v):
    if v is None:
        return ""
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def emit(records, fmt, out, columns=None):
    """Write report records as text, csv or json."""
    if not records:
        return
    columns = columns or list(records[0])
    if fmt == "json":
        out.write(json.dumps(records, indent=2, ensure_ascii=False) + "\n")
    elif fmt == "csv":
        w = csv.DictWriter(out, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in records:
            w.writerow(r)
    else:
        for r in records:
            out.write("  ".join(f"{k}={r[k]}" for k in columns if r.get(k) not in (None, "")) + "\n")


# ---------------------------------------------------------------- parsing

def read_text(arg):
    """``@path`` reads a file; anything else is the literal text."""
    if arg.startswith("@"):
        try:
            with open(arg[1:], encoding="utf-8") as fh:
                return fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {arg[1:]}: {exc}") from None
    return arg


def load_problem(arg):
    """Problem text, ``@file``, or a catalog number such as ``46``."""
    text = read_text(arg).strip()
    if text.isdigit():
        try:
            return entry(int(text)).problem
        except KeyError as exc:
            raise ParseError(str(exc)) from None
    return parse_problem(text.replace("\\n", "\n"))


def parse_msgset(text, n):
    text = text.strip().strip("{}")
    if text in ("", "-"):
        return 0
    try:
        idx = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"bad message set {text!r}") from None
    for i in idx:
        if not 1 <= i <= n:
            raise ParseError(f"message {i} out of range 1..{n}")
    return sets.msgset(idx)


def parse_servers(text, p):
    """Server collection: ``active``, ``all``, or ``1,2;1,4;3`` (servers split by ``;``)."""
    text = text.strip()
    if text == "active":
        return p.active_servers()
    if text == "all":
        return sets.all_servers(p.n)
    out = 0
    for part in text.split(";"):
        if part.strip():
            j = parse_msgset(part, p.n)
            if not j:
                raise ParseError("empty server in server list")
            out |= 1 << j
    if not out:
        raise ParseError("empty server collection")
    return out


def _config_lines(text):
    text = text.replace("//", "\n")
    blocks = [[]]
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if ln == "---":
            blocks.append([])
            continue
        blocks[-1].append(ln)
    return [b for b in blocks if b]


def parse_configs(text, p):
    """Decoding configurations, one block per configuration, blocks split by ``---``.

    Each block has ``D: d1 | d2 | ...`` (or ``D: dstar``) and optionally
    ``P: group`` for every receiver or ``P: g1 | g2 | ...`` per receiver.
    """
    configs = []
    for block in _config_lines(text):
        d = p_part = None
        for ln in block:
            if ":" not in ln:
                raise ParseError(f"config line must look like 'D: ...' or 'P: ...', got {ln!r}")
            key, body = ln.split(":", 1)
            key = key.strip().upper()
            if key == "D":
                d = body.strip()
            elif key == "P":
                p_part = body.strip()
            else:
                raise ParseError(f"unknown config key {key!r}")
        if d is None or d == "dstar":
            dtuple = inner.dstar(p)
        else:
            items = d.split("|")
            if len(items) != p.n:
                raise ParseError(f"D needs {p.n} entries, got {len(items)}")
            dtuple = tuple(parse_msgset(x, p.n) for x in items)
        if p_part is None:
            ptuple = (p.active_servers(),) * p.n
        else:
            items = p_part.split("|")
            if len(items) == 1:
                ptuple = (parse_servers(items[0], p),) * p.n
            elif len(items) == p.n:
                ptuple = tuple(parse_servers(x, p) for x in items)
            else:
                raise ParseError(f"P needs 1 or {p.n} entries, got {len(items)}")
        cfg = inner.DecodingConfig(ptuple, dtuple)
        try:
            cfg.validate(p)
        except ValueError as exc:
            raise ParseError(f"invalid configuration: {exc}") from None
        configs.append(cfg)
    if not configs:
        raise ParseError("empty configuration")
    return configs


def parse_weights(text, n):
    if text is None:
        return None
    try:
        w = [Fraction(x) for x in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad weights {text!r}") from None
    if len(w) != n:
        raise ParseError(f"need {n} weights, got {len(w)}")
    if any(x < 0 for x in w):
        raise ParseError("weights must be nonnegative")
    return w


_SPEC_HEAD = re.compile(r"[,+](?=\s*(?:touchagg|touch|fd2|fd|allserver|all_server|all|groups|intersect|@))")


def _split_groups(text):
    return [x.strip() for x in re.split(r"[|\n]", text) if x.strip()]


def parse_grouping(spec, p):
    """Grouping over the active servers.

    ``allserver`` | ``touch`` | ``touch:1|2,3,4`` (aggregate; ``touchagg:`` also
    accepted, parts split by ``|`` or ``/``) | ``fd2:1;4`` (or ``fd:1/4``) |
    ``groups:1,3;1,4|rest`` | ``@file`` (one group per line) |
    ``intersect:SPEC,SPEC`` (or ``+`` between specs).
    """
    n = p.n
    ground = p.active_servers()
    spec = spec.strip()
    if spec.startswith("@"):
        return _explicit_groups(_split_groups(read_text(spec)), p, "file")
    head, _, body = spec.partition(":")
    head = head.strip().lower()
    try:
        if head in ("allserver", "all_server", "all"):
            return outer.all_server(ground)
        if head in ("touch", "individual_touch") and not body:
            return outer.individual_touch(n, ground)
        if head in ("touch", "touchagg"):
            parts = [parse_msgset(x, n) for x in re.split(r"[|/]", body)]
            return outer.aggregate_touch(n, parts, ground)
        if head in ("fd", "fd2"):
            parts = re.split(r"[;/]", body)
            if len(parts) != 2:
                raise ParseError("fd2 needs two message sets: fd2:K;K'")
            k1, k2 = (parse_msgset(x, n) for x in parts)
            if not k1 or not k2 or k1 & k2:
                raise ParseError("fd2 message sets must be disjoint and nonempty")
            return outer.fd2(n, k1, k2, ground)
        if head == "groups":
            return _explicit_groups(_split_groups(body), p, "groups")
        if head == "intersect":
            parts = [parse_grouping(x, p) for x in _SPEC_HEAD.split(body)]
            if len(parts) < 2:
                raise ParseError("intersect needs at least two groupings")
            g = parts[0]
            for h in parts[1:]:
                g = outer.intersect(g, h)
            return g
    except outer.InvalidGrouping as exc:
        raise ParseError(f"invalid grouping {spec!r}: {exc}") from None
    raise ParseError(f"unknown grouping spec {spec!r}")


def _explicit_groups(items, p, name):
    """Groups of servers; ``rest`` stands for the active servers not yet listed."""
    ground = p.active_servers()
    groups = []
    rest = False
    for x in items:
        if x == "rest":
            rest = True
        else:
            groups.append(parse_servers(x.replace(" ", ";"), p) & ground)
    if rest:
        used = 0
        for grp in groups:
            used |= grp
        groups.append(ground & ~used)
    try:
        return outer.Grouping(tuple(grp for grp in groups if grp), ground, name)
    except outer.InvalidGrouping as exc:
        raise ParseError(f"invalid grouping: {exc}") from None


# ---------------------------------------------------------------- commands

def _ms(t0):
    return int(round((time.perf_counter() - t0) * 1000))


def cmd_inner(p, configs=None, weights=None, ccc=False):
    t0 = time.perf_counter()
    if ccc:
        d = None if configs is None else [configs[0].D]
        value, best_d = inner.ccc_best(p, decoding_sets=d, weights=weights)
        detail = "ccc D=" + " | ".join(",".join(map(str, sets.elements(x))) for x in best_d)
    elif configs is None:
        cfg = inner.default_config(p)
        value = inner.fixed_value(p, cfg, weights)
        detail = "default P=active D=" + " | ".join(",".join(map(str, sets.elements(x))) for x in cfg.D)
    elif len(configs) == 1:
        value = inner.fixed_value(p, configs[0], weights)
        detail = "fixed"
    else:
        value = inner.fractional_value(p, configs, weights)
        detail = f"fractional over {len(configs)} configs"
    return {"problem": str(p).replace("\n", "; "), "bound": "inner", "detail": detail,
            "value": exact(value), "decimal": decimal4(value), "display": fmt_value(value),
            "ms": _ms(t0)}


def cmd_outer(p, grouping=None, family=None, weights=None, submod="full", cap_vars=None):
    t0 = time.perf_counter()
    if grouping is not None:
        value = outer.grouping_pm_value(p, grouping, weights, submod, cap_vars=cap_vars)
        used = grouping.describe()
        skipped = []
    else:
        res = outer.search_upper(p, family, weights, submod, cap_vars)
        if res.value is None:
            raise CapExceeded(f"every member of {family} exceeds the size cap")
        value, used, skipped = res.value, res.grouping.describe(), res.skipped
    rec = {"problem": str(p).replace("\n", "; "), "bound": "outer", "detail": used,
           "value": exact(value), "decimal": decimal4(value), "display": fmt_value(value),
           "ms": _ms(t0)}
    if skipped:
        rec["skipped"] = len(skipped)
    return rec


def _short(g):
    return g.name or g.describe()


LADDER = ("all_server", "individual_touch", "fd2_all_pairs")
EXTRA_LADDER = ("fd2_multi_pairs",)


def sumcap(p, submod="full", cap_vars=None, extra=True):
    """Default inner bound against the outer search ladder.

    With ``extra`` a gap left by the standard ladder is retried with the
    multi-pair two-group family before the hand-picked groupings.
    """
    t0 = time.perf_counter()
    low = inner.default_value(p)
    ms_inner = _ms(t0)
    t1 = time.perf_counter()
    best = None
    used = ""
    for family in LADDER:
        res = outer.search_upper(p, family, None, submod, cap_vars)
        if res.value is not None and (best is None or res.value < best):
            best, used = res.value, _short(res.grouping)
        if best is not None and best == low:
            break
    if best != low and extra:
        for family in EXTRA_LADDER:
            res = outer.search_upper(p, family, None, submod, cap_vars)
            if res.value is not None and res.value < best:
                best, used = res.value, _short(res.grouping)
            if best == low:
                break
    if best != low:
        for g in cases.canned_groupings(p):
            v = outer.grouping_pm_value(p, g, None, submod, cap_vars=cap_vars)
            if best is None or v < best:
                best, used = v, _short(g)
    if best is not None and low > best:
        raise RuntimeError(f"inner bound {low} exceeds outer bound {best}")
    return {"inner": low, "outer": best, "established": best == low, "grouping_used": used,
            "ms_inner": ms_inner, "ms_outer": _ms(t1)}


def cmd_sumcap(p, submod="full", cap_vars=None, extra=True):
    r = sumcap(p, submod, cap_vars, extra)
    if r["established"]:
        verdict = f"ESTABLISHED {fmt_value(r['inner'])}"
    else:
        verdict = f"UNRESOLVED [{fmt_value(r['inner'])}, {fmt_value(r['outer'])}]"
    return {"problem": str(p).replace("\n", "; "), "verdict": verdict,
            "inner": exact(r["inner"]), "outer": exact(r["outer"]),
            "established": r["established"], "grouping_used": r["grouping_used"],
            "ms_inner": r["ms_inner"], "ms_outer": r["ms_outer"]}


CATALOG_COLUMNS = ["problem_no", "sequence", "inner", "outer", "expected", "established",
                   "grouping_used", "ms_inner", "ms_outer"]


def catalog_row(problem_no, submod="full", cap_vars=None, extra=True):
    e = entry(problem_no)
    r = sumcap(e.problem, submod, cap_vars, extra)
    return {"problem_no": problem_no, "sequence": serialize_sequence(e.problem),
            "inner": exact(r["inner"]), "outer": exact(r["outer"]),
            "expected": exact(e.expected_sumcap), "established": r["established"],
            "grouping_used": r["grouping_used"], "ms_inner": r["ms_inner"],
            "ms_outer": r["ms_outer"]}


def _catalog_job(args):
    return catalog_row(*args)


def cmd_catalog(jobs=1, problems=None, submod="full", cap_vars=None, extra=True):
    nos = problems or [e.problem_no for e in catalog()]
    work = [(no, submod, cap_vars, extra) for no in nos]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_catalog_job, work))
    else:
        rows = [_catalog_job(w) for w in work]
    rows.sort(key=lambda r: r["problem_no"])
    return rows


def catalog_summary(rows):
    inner_ok = sum(1 for r in rows if r["inner"] == r["expected"])
    outer_ok = sum(1 for r in rows if r["outer"] == r["expected"])
    lines = [f"inner matches expected: {inner_ok}/{len(rows)}",
             f"outer matches expected: {outer_ok}/{len(rows)}",
             f"established: {sum(1 for r in rows if r['established'])}/{len(rows)}"]
    unresolved = [r for r in rows if not r["established"]]
    for r in unresolved:
        lines.append(f"UNRESOLVED {r['problem_no']} {r['sequence']} "
                     f"[{fmt_value(Fraction(r['inner']))}, {fmt_value(Fraction(r['outer']))}]")
    return lines


def cmd_region(p, mode="cor4", configs=None, fme_max_n=FME_MAX_N):
    if p.n > fme_max_n:
        raise CapExceeded(f"region projection is capped at n={fme_max_n}")
    rates = [inner.rate_var(i) for i in range(1, p.n + 1)]
    if mode == "cor4":
        if configs is None:
            d = tuple((sets.full(p.n) & ~p.side_info[i]) for i in range(p.n))
        else:
            d = configs[0].D
        system = [fme.le(c, r) for c, r in inner.cor4_region(p, d)]
        system += [fme.le({v: -1}, 0) for v in rates]
        system = fme.prune(fme._dedup(system), nonneg=())
    elif mode == "allserver":
        system = fme.project_lp(outer.all_server_lp(p), rates)
    else:
        raise ParseError(f"unknown region mode {mode!r}")
    return [c for c in system if not _is_sign_row(c)]


def _is_sign_row(c):
    return len(c.coeffs) == 1 and c.coeffs[0][1] < 0 and c.rhs == 0


def cmd_fdg(p, u, w, z):
    g = fdg.build_fdg(p)
    sub = fdg.ancestral_graph(g, set(u) | set(w) | set(z))
    sep = fdg.fd_separates(g, u, w, z)
    return {"problem": str(p).replace("\n", "; "), "separated": sep,
            "ancestral_vertices": len(sub.vertices), "ancestral_edges": len(sub.edges)}


# ---------------------------------------------------------------- entry point

def build_parser():
    ap = argparse.ArgumentParser(prog="dix", description="Bounds for distributed index coding.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--cap-vars", type=int, help="lattice-point cap for outer LPs")
    common.add_argument("--submod", choices=("full", "elemental"), default="full")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("inner", parents=[common], help="composite-coding lower bound")
    s.add_argument("-p", "--problem", required=True)
    s.add_argument("--config", help="decoding configuration(s): text or @file")
    s.add_argument("--weights")
    s.add_argument("--ccc", action="store_true", help="best common-group scheme over all D")

    s = sub.add_parser("outer", parents=[common], help="grouping polymatroid upper bound")
    s.add_argument("-p", "--problem", required=True)
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--grouping")
    grp.add_argument("--family", choices=outer.FAMILIES)
    s.add_argument("--weights")

    ladder = argparse.ArgumentParser(add_help=False)
    ladder.add_argument("--ladder", choices=("standard", "extended"), default="extended",
                        help="extended retries gaps with multi-pair two-group fd groupings")

    s = sub.add_parser("sumcap", parents=[common, ladder], help="inner bound against the outer ladder")
    s.add_argument("-p", "--problem", required=True)

    s = sub.add_parser("catalog", parents=[common, ladder], help="run every catalog problem")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--problems", help="subset such as 1-20,46")

    s = sub.add_parser("region", parents=[common], help="rate region after projection")
    s.add_argument("-p", "--problem", required=True)
    s.add_argument("--mode", choices=("cor4", "allserver"), default="cor4")
    s.add_argument("--config", help="'D: ...' line for cor4 (default: everything not known)")

    s = sub.add_parser("fdg", parents=[common], help="fd-separation query")
    s.add_argument("-p", "--problem", required=True)
    s.add_argument("-u", default="-", help="conditioning vertices, e.g. 'x1 y1,2'")
    s.add_argument("-w", required=True)
    s.add_argument("-z", required=True)
    return ap


def parse_problem_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            if "-" in part:
                a, b = part.split("-")
                out.extend(range(int(a), int(b) + 1))
            elif part:
                out.append(int(part))
        except ValueError:
            raise ParseError(f"bad problem list {text!r}") from None
    return out


def run(args, out):
    fmt = args.format
    cmd = args.command
    if cmd == "catalog":
        problems = parse_problem_list(args.problems) if args.problems else None
        rows = cmd_catalog(args.jobs, problems, args.submod, args.cap_vars, args.ladder == "extended")
        if fmt == "text":
            for r in rows:
                out.write(f"{r['problem_no']:>3} {r['sequence']:<28} inner={r['inner']:<6} "
                          f"outer={r['outer']:<6} expected={r['expected']:<6} "
                          f"{'ESTABLISHED' if r['established'] else 'UNRESOLVED'} {r['grouping_used']}\n")
            for ln in catalog_summary(rows):
                out.write(ln + "\n")
        else:
            emit(rows, fmt, out, CATALOG_COLUMNS)
        return
    p = load_problem(args.problem)
    if cmd == "inner":
        configs = parse_configs(read_text(args.config), p) if args.config else None
        rec = cmd_inner(p, configs, parse_weights(args.weights, p.n), args.ccc)
        if fmt == "text":
            out.write(f"inner {rec['display']}  ({rec['detail']})\n")
        else:
            emit([rec], fmt, out)
    elif cmd == "outer":
        weights = parse_weights(args.weights, p.n)
        if args.grouping:
            rec = cmd_outer(p, parse_grouping(args.grouping, p), None, weights, args.submod, args.cap_vars)
        else:
            rec = cmd_outer(p, None, args.family, weights, args.submod, args.cap_vars)
        if fmt == "text":
            out.write(f"outer {rec['display']}  {rec['detail']}\n")
        else:
            emit([rec], fmt, out)
    elif cmd == "sumcap":
        rec = cmd_sumcap(p, args.submod, args.cap_vars, args.ladder == "extended")
        if fmt == "text":
            out.write(f"{rec['verdict']}  (outer via {rec['grouping_used']})\n")
        else:
            emit([rec], fmt, out)
    elif cmd == "region":
        configs = parse_configs(read_text(args.config), p) if args.config else None
        system = cmd_region(p, args.mode, configs)
        lines = fme.format_system(system)
        if fmt == "text":
            out.write("\n".join(lines) + "\n")
        else:
            emit([{"inequality": ln} for ln in lines], fmt, out)
    elif cmd == "fdg":
        u = fdg.parse_vertices(args.u)
        w = fdg.parse_vertices(args.w)
        z = fdg.parse_vertices(args.z)
        rec = cmd_fdg(p, u, w, z)
        if fmt == "text":
            verdict = "separated" if rec["separated"] else "not separated"
            out.write(f"{verdict}  (ancestral graph: {rec['ancestral_vertices']} vertices, "
                      f"{rec['ancestral_edges']} edges)\n")
        else:
            emit([rec], fmt, out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        run(args, buf)
    except (ParseError, fdg.QueryError, outer.InvalidGrouping) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except Exception as exc:  # anything else is a bug or a broken invariant
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
