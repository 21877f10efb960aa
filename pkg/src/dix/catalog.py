"""The 218 non-isomorphic four-message problems with unit link capacities.

Each entry carries the known sum-capacity and the coarsest grouping family
that certifies it (``all_server``, ``touch_agg2``, ``touch_agg3`` or ``fd2``).
Table values printed with four decimals are stored exactly: 18.6667 = 56/3,
23.3333 = 70/3, 23.5 = 47/2.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .model import Problem, parse_problem


@dataclass(frozen=True)
class CatalogEntry:
    problem_no: int
    problem: Problem
    expected_sumcap: Fraction
    table_row: str

    @property
    def sequence(self):
        return str(self.problem)


@lru_cache(maxsize=1)
def catalog():
    text = resources.files("dix.data").joinpath("catalog4.tsv").read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        no, seq, val, row = line.split("\t")
        out.append(CatalogEntry(int(no), parse_problem(seq, 4), Fraction(val), row))
    return tuple(out)


def entry(problem_no):
    entries = catalog()
    if not 1 <= problem_no <= len(entries):
        raise KeyError(f"no catalog problem {problem_no}")
    return entries[problem_no - 1]
