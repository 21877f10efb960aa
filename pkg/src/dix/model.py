"""Distributed index coding problem instances and their text notation.

A problem is written as ``(1|-),(2|3),(3|2)``: receiver ``i`` wants message
``i`` and knows the listed messages.  Link capacities default to 1 for every
nonempty server; an optional capacity block follows on separate lines::

    (1|2,5),(2|3,4),(3|-),(4|2,5),(5|1,2,4)
    default: 0
    1,2,3: 1
    1,4: 1
    1,3,4,5: 2
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction

from . import sets


class ParseError(ValueError):
    """Malformed problem, configuration, grouping or query text."""


@dataclass(frozen=True)
class Problem:
    n: int
    side_info: tuple
    capacities: tuple = field(default=None, repr=False)

    def __post_init__(self):
        n = self.n
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"message count must be a positive integer, got {n!r}")
        if n > sets.MAX_N:
            raise ValueError(f"n={n} exceeds the bitmask bound of {sets.MAX_N}")
        if len(self.side_info) != n:
            raise ValueError(f"expected {n} side-information sets, got {len(self.side_info)}")
        for i, a in enumerate(self.side_info, start=1):
            if a & ~sets.full(n):
                raise ValueError(f"side information of receiver {i} exceeds [n]")
            if a >> (i - 1) & 1:
                raise ValueError(f"receiver {i} lists its own message as side information")
        caps = self.capacities
        if caps is None:
            caps = (Fraction(0),) + (Fraction(1),) * ((1 << n) - 1)
        else:
            caps = tuple(Fraction(c) for c in caps)
            if len(caps) != 1 << n:
                raise ValueError("capacity table must have 2^n entries")
            if caps[0] != 0:
                raise ValueError("the empty server has capacity 0")
            if any(c < 0 for c in caps):
                raise ValueError("capacities must be nonnegative")
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "side_info", tuple(self.side_info))

    @classmethod
    def from_lists(cls, side_info, capacities=None, n=None):
        """Build from 1-based lists; ``capacities`` maps server tuples to values."""
        n = len(side_info) if n is None else n
        a = tuple(sets.msgset(s) for s in side_info)
        caps = None
        if capacities is not None:
            table = [Fraction(0)] * (1 << n)
            for j, c in capacities.items():
                table[sets.msgset(j)] = Fraction(c)
            caps = tuple(table)
        return cls(n, a, caps)

    def cap(self, j):
        return self.capacities[j]

    def capacity_sum(self, servers):
        caps = self.capacities
        return sum((caps[j] for j in sets.members(servers)), Fraction(0))

    def interfering_set(self, i):
        return interfering_set(self, i)

    def active_servers(self):
        return active_servers(self)

    @property
    def uniform(self):
        return all(c == 1 for c in self.capacities[1:])

    def __str__(self):
        return serialize(self)


def interfering_set(p, i):
    """Messages receiver ``i`` neither wants nor knows: [n] minus A_i and i."""
    if not 1 <= i <= p.n:
        raise IndexError(f"receiver index {i} out of range 1..{p.n}")
    return sets.full(p.n) & ~(p.side_info[i - 1] | 1 << (i - 1))


def active_servers(p):
    """Servers with strictly positive capacity."""
    bs = 0
    for j, c in enumerate(p.capacities):
        if j and c > 0:
            bs |= 1 << j
    return bs


_TOKEN = re.compile(r"\(\s*(\d+)\s*\|\s*(-|\d+(?:\s*,\s*\d+)*)?\s*\)")


def _parse_sequence(seq):
    body = seq.strip()
    pos = 0
    found = []
    while pos < len(body):
        m = _TOKEN.match(body, pos)
        if not m:
            raise ParseError(f"malformed token at position {pos}: {body[pos:pos + 20]!r}")
        i = int(m.group(1))
        raw = m.group(2)
        if raw is None or raw == "-":
            side = []
        else:
            side = [int(x) for x in raw.split(",")]
        found.append((i, side))
        pos = m.end()
        rest = body[pos:].lstrip()
        if rest.startswith(","):
            pos = len(body) - len(rest) + 1
            while pos < len(body) and body[pos].isspace():
                pos += 1
        elif rest:
            raise ParseError(f"expected ',' between receivers near {rest[:20]!r}")
        else:
            break
    if not found:
        raise ParseError("empty problem sequence")
    return found


def _parse_server(text, n):
    try:
        idx = [int(x) for x in text.replace("{", "").replace("}", "").split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"bad server {text!r}") from None
    if not idx:
        raise ParseError("empty server in capacity block")
    for i in idx:
        if not 1 <= i <= n:
            raise ParseError(f"server message {i} out of range 1..{n}")
    return sets.msgset(idx)


def _parse_value(text):
    try:
        v = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad capacity value {text!r}") from None
    if v < 0:
        raise ParseError(f"negative capacity {text!r}")
    return v


def parse_problem(text, n=None):
    """Parse the ``(i|A_i)`` notation with an optional capacity block."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.strip().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError("empty problem text")
    found = _parse_sequence(lines[0])
    size = len(found) if n is None else n
    if n is not None and len(found) != n:
        raise ParseError(f"expected {n} receivers, found {len(found)}")
    if size > sets.MAX_N:
        raise ParseError(f"n={size} exceeds the supported maximum of {sets.MAX_N}")
    side = [None] * size
    for pos, (i, a) in enumerate(found, start=1):
        if not 1 <= i <= size:
            raise ParseError(f"receiver index {i} out of range 1..{size}")
        if side[i - 1] is not None:
            raise ParseError(f"duplicate receiver {i}")
        if i != pos:
            raise ParseError(f"receivers must be listed in order; got {i} at position {pos}")
        for j in a:
            if not 1 <= j <= size:
                raise ParseError(f"side-information index {j} out of range 1..{size}")
            if j == i:
                raise ParseError(f"receiver {i} lists its own message as side information")
        side[i - 1] = sets.msgset(a)

    caps = None
    if len(lines) > 1:
        default = Fraction(1)
        explicit = {}
        for ln in lines[1:]:
            if ":" not in ln:
                raise ParseError(f"capacity line must be 'J: c', got {ln!r}")
            key, val = ln.split(":", 1)
            if key.strip().lower() == "default":
                default = _parse_value(val)
                continue
            j = _parse_server(key, size)
            if j in explicit:
                raise ParseError(f"duplicate capacity for server {sets.fmt_msgset(j)}")
            explicit[j] = _parse_value(val)
        table = [Fraction(0)] + [default] * ((1 << size) - 1)
        for j, v in explicit.items():
            table[j] = v
        caps = tuple(table)
    return Problem(size, tuple(side), caps)


def serialize_sequence(p):
    parts = []
    for i, a in enumerate(p.side_info, start=1):
        body = ",".join(str(j) for j in sets.elements(a)) or "-"
        parts.append(f"({i}|{body})")
    return ",".join(parts)


def _fmt_frac(v):
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def serialize(p):
    """Inverse of :func:`parse_problem`; the capacity block is emitted only when needed."""
    head = serialize_sequence(p)
    if p.uniform:
        return head
    caps = p.capacities[1:]
    counts = {}
    for c in caps:
        counts[c] = counts.get(c, 0) + 1
    default = max(sorted(counts), key=lambda c: counts[c])
    lines = [head, f"default: {_fmt_frac(default)}"]
    for j in range(1, 1 << p.n):
        if p.capacities[j] != default:
            lines.append(f"{','.join(map(str, sets.elements(j)))}: {_fmt_frac(p.capacities[j])}")
    return "\n".join(lines)
