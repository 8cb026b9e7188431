"""Bitmask subset machinery shared across the package.

A subset of ordering positions is encoded as an int: bit k set means the
node at ordering position k is a member.  The canonical order used
everywhere is graded lexicographic: subsets sorted by cardinality first,
then lexicographically on their sorted index lists.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Iterator, List


def bits_of(mask: int) -> List[int]:
    """Indices of the set bits, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def iter_graded_subsets(universe: int, include_empty: bool = False) -> Iterator[int]:
    """Subsets of `universe` in graded-lex order."""
    members = bits_of(universe)
    start = 0 if include_empty else 1
    for k in range(start, len(members) + 1):
        for combo in combinations(members, k):
            yield mask_of(combo)


def iter_submasks(mask: int) -> Iterator[int]:
    """All submasks of `mask`, including 0 and mask itself (unspecified order)."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def combination_rank(positions, f: int) -> int:
    """Lexicographic rank of an ascending k-combination drawn from range(f)."""
    rank = 0
    prev = -1
    k = len(positions)
    for i, c in enumerate(positions):
        for v in range(prev + 1, c):
            rank += math.comb(f - 1 - v, k - 1 - i)
        prev = c
    return rank


def graded_rank(mask: int, universe: int) -> int:
    """Position of nonempty `mask` among the nonempty graded-lex subsets of `universe`."""
    if mask == 0 or mask & ~universe:
        raise ValueError("mask must be a nonempty subset of the universe")
    members = bits_of(universe)
    pos_of = {b: i for i, b in enumerate(members)}
    positions = [pos_of[b] for b in bits_of(mask)]
    f = len(members)
    k = len(positions)
    base = sum(math.comb(f, j) for j in range(1, k))
    return base + combination_rank(positions, f)


def compress(mask: int, universe: int) -> int:
    """Re-index a subset of `universe` onto dense bits 0..popcount(universe)-1."""
    out = 0
    for i, b in enumerate(bits_of(universe)):
        if mask >> b & 1:
            out |= 1 << i
    return out


def expand(cmask: int, universe: int) -> int:
    """Inverse of compress."""
    out = 0
    for i, b in enumerate(bits_of(universe)):
        if cmask >> i & 1:
            out |= 1 << b
    return out


# In-place lattice transforms on dense arrays indexed by submask.  They are
# type-agnostic: ints, floats and Fractions all work.

def zeta_subsets_inplace(a, nbits: int) -> None:
    """a[m] becomes sum of a[s] over s subset of m."""
    for j in range(nbits):
        bit = 1 << j
        for m in range(1 << nbits):
            if m & bit:
                a[m] = a[m] + a[m ^ bit]


def mobius_subsets_inplace(a, nbits: int) -> None:
    """Inverse of zeta_subsets_inplace: a[m] becomes the signed subset sum."""
    for j in range(nbits):
        bit = 1 << j
        for m in range(1 << nbits):
            if m & bit:
                a[m] = a[m] - a[m ^ bit]


def zeta_supersets_inplace(a, nbits: int) -> None:
    """a[m] becomes sum of a[t] over t superset of m."""
    for j in range(nbits):
        bit = 1 << j
        for m in range(1 << nbits):
            if not m & bit:
                a[m] = a[m] + a[m | bit]


def mobius_supersets_inplace(a, nbits: int) -> None:
    """Inverse of zeta_supersets_inplace."""
    for j in range(nbits):
        bit = 1 << j
        for m in range(1 << nbits):
            if not m & bit:
                a[m] = a[m] - a[m | bit]
