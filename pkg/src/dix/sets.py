"""Bitmask algebra over messages and servers.

Message sets are ints: bit ``i - 1`` is message ``i``.  A server is identified
with the message set it stores, so a collection of servers (or of composite
indices) is an int bitset whose bit ``J`` is set when mask ``J`` is a member.
The empty server is never a member of a server set; collections of message
sets produced by :func:`subset_completion` may contain the empty set (bit 0).
"""

from functools import lru_cache

MAX_N = 16


def full(n):
    return (1 << n) - 1


def msgset(elems):
    """Bitmask from an iterable of 1-based message indices."""
    mask = 0
    for i in elems:
        if i < 1:
            raise ValueError(f"message index must be >= 1, got {i}")
        mask |= 1 << (i - 1)
    return mask


def elements(mask):
    """1-based message indices in ``mask``, ascending."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(x):
    return bin(x).count("1")


def members(bitset):
    """Masks whose bits are set in a collection bitset, ascending."""
    out = []
    j = 0
    while bitset:
        low = bitset & -bitset
        j = low.bit_length() - 1
        out.append(j)
        bitset ^= low
    return out


def collection(masks):
    """Collection bitset from an iterable of masks."""
    bs = 0
    for m in masks:
        bs |= 1 << m
    return bs


def submasks(mask):
    """All submasks of ``mask`` (including 0 and ``mask``), ascending."""
    subs = []
    s = mask
    while True:
        subs.append(s)
        if s == 0:
            break
        s = (s - 1) & mask
    subs.reverse()
    return subs


def fmt_msgset(mask):
    return "{" + ",".join(str(i) for i in elements(mask)) + "}"


def fmt_servers(bitset):
    return "{" + ", ".join(fmt_msgset(j) for j in members(bitset)) + "}"


@lru_cache(maxsize=None)
def _tables(n):
    if not 0 <= n <= MAX_N:
        raise ValueError(f"n must be in [0, {MAX_N}], got {n}")
    size = 1 << n
    nonempty = ((1 << size) - 1) & ~1
    down = [0] * size
    up = [0] * size
    for j in range(size):
        for s in submasks(j):
            down[j] |= 1 << s
    for k in range(size):
        bs = 0
        for j in range(size):
            if j and (j & k) == k:
                bs |= 1 << j
        up[k] = bs
    return nonempty, tuple(down), tuple(up)


def all_servers(n):
    """Bitset of all ``2^n - 1`` nonempty servers."""
    return _tables(n)[0]


@lru_cache(maxsize=None)
def touch(n, k):
    """Servers J with J & K != 0."""
    bs = 0
    for j in range(1, 1 << n):
        if j & k:
            bs |= 1 << j
    return bs


def not_touch(n, k):
    """Servers J with J & K == 0."""
    return all_servers(n) & ~touch(n, k)


def touch_both(n, k, l):
    return touch(n, k) & touch(n, l)


def touch_first_not_second(n, k, l):
    return touch(n, k) & ~touch(n, l)


def downset(n, j):
    """Bitset of all subsets of ``j`` (``2^J``), including the empty set."""
    return _tables(n)[1][j]


def upset(n, k):
    """Bitset of nonempty servers containing ``k``."""
    return _tables(n)[2][k]


def subset_completion(n, servers):
    """Union of ``2^J`` over servers J; empty collection maps to empty."""
    down = _tables(n)[1]
    bs = 0
    for j in members(servers):
        bs |= down[j]
    return bs


def superset_completion(n, sets):
    """Nonempty servers containing at least one member of ``sets``."""
    up = _tables(n)[2]
    bs = 0
    for k in members(sets):
        bs |= up[k]
    return bs


def union_of(servers):
    """Message set covered by a collection of servers."""
    m = 0
    for j in members(servers):
        m |= j
    return m


def upsets_within(n, servers):
    """Enumerate subcollections Q of ``servers`` that are closed upward in it.

    Q is closed upward when J in Q, J' in ``servers`` and J subset of J'
    imply J' in Q.  Yields bitsets, starting with the empty collection.
    """
    order = sorted(members(servers), key=lambda j: (-popcount(j), j))
    supers = []
    for j in order:
        sup = 0
        for j2 in order:
            if j2 != j and (j2 & j) == j:
                sup |= 1 << j2
        supers.append(sup)

    out = []

    def rec(idx, chosen):
        if idx == len(order):
            out.append(chosen)
            return
        rec(idx + 1, chosen)
        if supers[idx] & ~chosen == 0:
            rec(idx + 1, chosen | (1 << order[idx]))

    rec(0, 0)
    return out
