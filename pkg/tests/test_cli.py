import json
from fractions import Fraction
from pathlib import Path

import pytest

from dix import cli, outer
from dix.catalog import entry
from dix.lp import LinearProgram, solve
from dix.model import ParseError

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# [PAPER] default inner bound for catalog problem 14
def test_inner_default(capsys):
    code, out, _ = run(capsys, "inner", "-p", "14")
    assert code == 0
    assert out.startswith("inner 21 ")


# [PAPER] own-message decoding for problem 46
def test_inner_own_message(capsys):
    code, out, _ = run(capsys, "inner", "-p", "(1|4),(2|3),(3|2),(4|1)", "--config", "D: 1|2|3|4")
    assert code == 0
    assert out.startswith("inner 70/3 ≈ 23.3333 ")


# [PAPER] two configurations read from files
def test_inner_config_file(capsys):
    code, out, _ = run(capsys, "inner", "-p", f"@{DATA / 'averaged_capacity.txt'}",
                       "--config", f"@{DATA / 'averaged_capacity.cfg'}", "--format", "json")
    assert code == 0
    rec = json.loads(out)[0]
    assert rec["value"] == "5" and rec["detail"] == "fractional over 2 configs"


# [PAPER] touch and all-server bounds for problem 14
@pytest.mark.parametrize("spec,value", [("touch", "21"), ("allserver", "22"), ("touch:4|1,2,3", "21")])
def test_outer_groupings(capsys, spec, value):
    code, out, _ = run(capsys, "outer", "-p", "14", "--grouping", spec, "--format", "json")
    assert code == 0
    assert json.loads(out)[0]["value"] == value


# [PAPER] explicit groups for problem 46
def test_outer_explicit_groups(capsys):
    spec = "groups:1;2;3;4;1,2;1,3;2,4;3,4|rest"
    code, out, _ = run(capsys, "outer", "-p", "46", "--grouping", spec, "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split(",")[:4] == ["problem", "bound", "detail", "value"]
    assert ",70/3,23.3333," in lines[1]


# [DERIVED] family search from the command line
def test_outer_family(capsys):
    code, out, _ = run(capsys, "outer", "-p", "81", "--family", "fd2_all_pairs")
    assert code == 0 and out.startswith("outer 47/2 ≈ 23.5000")


# [TRIVIAL] grouping spec forms
def test_parse_grouping_forms():
    p = cli.load_problem(f"@{DATA / 'intersect.txt'}")
    na = p.active_servers()
    assert cli.parse_grouping("allserver", p).groups == (na,)
    assert cli.parse_grouping("touch", p).m == 5
    assert cli.parse_grouping("touch:1|2,3,4,5", p) == cli.parse_grouping("touchagg:1/2,3,4,5", p)
    assert cli.parse_grouping("fd2:1;4", p) == cli.parse_grouping("fd:1/4", p)
    fd = cli.parse_grouping(f"@{DATA / 'intersect_fd.grp'}", p)
    both = cli.parse_grouping(f"intersect:touch:1|2,3,4,5,@{DATA / 'intersect_fd.grp'}", p)
    assert both.m == 4
    assert outer.is_refinement(both, fd)
    plus = cli.parse_grouping("intersect:touch+fd2:1;4", p)
    assert plus.m == 8
    for bad in ("fd2:1", "fd2:1;1", "touch:1|2", "intersect:touch", "nonsense", "groups:1,9|rest"):
        with pytest.raises(ParseError):
            cli.parse_grouping(bad, p)


# [PAPER] sum-capacity verdicts
@pytest.mark.parametrize("no,verdict", [(14, "ESTABLISHED 21"), (218, "ESTABLISHED 32")])
def test_sumcap_established(capsys, no, verdict):
    code, out, _ = run(capsys, "sumcap", "-p", str(no))
    assert code == 0 and out.startswith(verdict)


# [TRIVIAL] a gap is reported as a bracket with a zero exit code
def test_sumcap_unresolved(capsys):
    code, out, _ = run(capsys, "sumcap", "-p", "16", "--ladder", "standard")
    assert code == 0
    assert out.startswith("UNRESOLVED [19, 39/2 ≈ 19.5000]")


# [DERIVED] the extended ladder closes the same gap
def test_sumcap_extended(capsys):
    code, out, _ = run(capsys, "sumcap", "-p", "16", "--format", "json")
    rec = json.loads(out)[0]
    assert code == 0 and rec["established"] and rec["outer"] == "19"


# [TRIVIAL] catalog subset report with the fixed columns, written to a file
def test_catalog_subset(capsys, tmp_path):
    dest = tmp_path / "cat.csv"
    code, out, _ = run(capsys, "catalog", "--problems", "1-3,218", "--format", "csv", "--out", str(dest))
    assert code == 0 and out == ""
    lines = dest.read_text().splitlines()
    assert lines[0] == ",".join(cli.CATALOG_COLUMNS)
    assert [ln.split(",")[0] for ln in lines[1:]] == ["1", "2", "3", "218"]
    assert all(",True," in ln for ln in lines[1:])


# [DERIVED] repeated runs print the same bytes apart from timings
def test_deterministic_output(capsys):
    _, a, _ = run(capsys, "outer", "-p", "46", "--family", "fd2_all_pairs")
    _, b, _ = run(capsys, "outer", "-p", "46", "--family", "fd2_all_pairs")
    assert a == b
    _, a, _ = run(capsys, "region", "-p", "(1|4),(2|4),(3|2),(4|3)")
    _, b, _ = run(capsys, "region", "-p", "(1|4),(2|4),(3|2),(4|3)")
    assert a == b


# [PAPER] projected full-rate region
def test_region_cor4(capsys):
    code, out, _ = run(capsys, "region", "-p", "(1|4),(2|4),(3|2),(4|3)")
    assert code == 0
    got = sorted(out.strip().splitlines())
    want = [f"R{i} <= 8" for i in range(1, 5)]
    want += [f"R{i} + R{j} <= 12" for i in range(1, 5) for j in range(i + 1, 5)]
    want += ["R1 + R2 + R3 <= 14", "R1 + R2 + R4 <= 14", "R1 + R3 + R4 <= 14"]
    assert got == sorted(want)


# [TRIVIAL] one message
def test_region_single(capsys):
    code, out, _ = run(capsys, "region", "-p", "(1|-)", "--mode", "allserver")
    assert code == 0 and out.strip() == "R1 <= 1"


# [DERIVED] projected all-server region has the LP's support values along axes and the diagonal
def test_region_allserver_support(capsys):
    code, out, _ = run(capsys, "region", "-p", "(1|2),(2|1)", "--mode", "allserver", "--format", "json")
    assert code == 0
    rows = [r["inequality"] for r in json.loads(out)]
    lp = LinearProgram("max")
    lp.add_variable("R1")
    lp.add_variable("R2")
    for text in rows:
        lhs, rhs = text.split(" <= ")
        coeffs = {}
        for term in lhs.replace("- ", "-").replace("+ ", "").split():
            sign = -1 if term.startswith("-") else 1
            term = term.lstrip("-")
            coef, _, name = term.rpartition(" ") if " " in term else ("1", "", term)
            coeffs[name] = sign * Fraction(coef)
        lp.add_constraint(coeffs, "<=", Fraction(rhs))
    p = cli.load_problem("(1|2),(2|1)")
    for w in ([1, 0], [0, 1], [1, 1]):
        lp.set_objective({"R1": w[0], "R2": w[1]})
        assert solve(lp).value == outer.all_server_value(p, weights=w)


# [PAPER] separation query from the figure
def test_fdg_query(capsys):
    code, out, _ = run(capsys, "fdg", "-p", "(1|-),(2|4),(3|2),(4|3)",
                       "-u", "x1; y1,2; y1,3; y1,4", "-w", "x2", "-z", "x3; x4")
    assert code == 0
    assert out.startswith("separated  (ancestral graph: 7 vertices, 6 edges)")


# [DERIVED] a shared server connects the sides when nothing is conditioned on
def test_fdg_connected(capsys):
    code, out, _ = run(capsys, "fdg", "-p", "(1|-),(2|4),(3|2),(4|3)", "-w", "x1", "-z", "x2; y1,2")
    assert code == 0 and out.startswith("not separated")


# [TRIVIAL] overlapping query sets
def test_fdg_overlap(capsys):
    code, _, err = run(capsys, "fdg", "-p", "14", "-w", "x1", "-z", "x1")
    assert code == 2 and "disjoint" in err


# [TRIVIAL] exit codes
def test_exit_codes(capsys):
    assert run(capsys, "inner", "-p", "(1|1)")[0] == 2
    assert run(capsys, "inner", "-p", "999")[0] == 2
    assert run(capsys, "outer", "-p", "14", "--grouping", "touch:1|2")[0] == 2
    assert run(capsys, "outer", "-p", "14", "--grouping", "touch", "--cap-vars", "64")[0] == 3
    assert run(capsys, "inner", "-p", "14", "--config", "D: 1|2")[0] == 2
    assert run(capsys, "inner", "-p", "14", "--weights", "1,x,1,1")[0] == 2


# [TRIVIAL] the variable cap can come from the environment
def test_cap_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DIX_CAP_VARS", "64")
    assert run(capsys, "outer", "-p", "14", "--grouping", "touch")[0] == 3
    monkeypatch.setenv("DIX_CAP_VARS", "lots")
    assert run(capsys, "outer", "-p", "14", "--grouping", "touch")[0] == 4


# [TRIVIAL] value rendering
def test_rendering():
    assert cli.fmt_value(Fraction(70, 3)) == "70/3 ≈ 23.3333"
    assert cli.fmt_value(Fraction(21)) == "21"
    assert cli.fmt_value(Fraction(47, 2)) == "47/2 ≈ 23.5000"
    assert cli.decimal4(Fraction(-1, 3)) == "-0.3333"
    assert cli.exact(entry(46).expected_sumcap) == "70/3"
