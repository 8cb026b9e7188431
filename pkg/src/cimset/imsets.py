"""Characteristic imsets over a block coordinate index.

For a family, only coordinates that can vary or are genuinely part of the
support are stored: one block per child i with a nonempty ceiling, holding
a coordinate for every nonempty subset S of the ceiling, in graded-lex
order.  Coordinate (i, S) stands for the node set S together with child i.
The imset of a graph has bit(i, S) = 1 exactly when S is contained in the
parent set of i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .errors import DomainError, NotAVertexError, ResourceError, UnsupportedError
from .graphs import PER_CHILD_LIMIT, FamilySpec, ParentMap, _parent_map_unchecked, family_contains
from .subsets import bits_of, graded_rank, iter_graded_subsets


@dataclass(frozen=True)
class Block:
    child: int
    universe: int
    offset: int
    size: int

    def subset_at(self, j: int, subsets_np) -> int:
        return int(subsets_np[j])


class CoordinateIndex:
    """Layout of the stored imset coordinates for one family."""

    def __init__(self, spec: FamilySpec):
        self.spec = spec
        blocks = []
        subset_arrays = []
        offset = 0
        for i in range(spec.n):
            universe = spec.ceiling[i]
            if universe == 0:
                continue
            k = universe.bit_count()
            size = (1 << k) - 1
            if size > PER_CHILD_LIMIT:
                raise ResourceError(
                    f"child {spec.ordering.names[i]!r} has {size} coordinates, "
                    f"over the per-child limit {PER_CHILD_LIMIT}"
                )
            arr = np.fromiter(iter_graded_subsets(universe), dtype=np.int64, count=size)
            blocks.append(Block(i, universe, offset, size))
            subset_arrays.append(arr)
            offset += size
        self.blocks: Tuple[Block, ...] = tuple(blocks)
        self._subsets = tuple(subset_arrays)
        self.total = offset
        self._block_of_child = {b.child: j for j, b in enumerate(blocks)}

    def __eq__(self, other):
        return isinstance(other, CoordinateIndex) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def block_for_child(self, child: int) -> Block:
        j = self._block_of_child.get(child)
        if j is None:
            raise DomainError(
                f"child {self.spec.ordering.names[child]!r} has no coordinate block"
            )
        return self.blocks[j]

    def block_subsets(self, child: int):
        """The numpy array of subset masks for one child's block."""
        return self._subsets[self._block_of_child[child]]

    def position(self, child: int, subset_mask: int) -> int:
        block = self.block_for_child(child)
        if subset_mask == 0 or subset_mask & ~block.universe:
            raise DomainError("coordinate subset must be a nonempty subset of the ceiling")
        return block.offset + graded_rank(subset_mask, block.universe)

    def coordinates(self) -> Iterator[Tuple[int, int]]:
        """All (child, subset mask) pairs in storage order."""
        for j, block in enumerate(self.blocks):
            for s in self._subsets[j]:
                yield block.child, int(s)


def coordinate_index(spec: FamilySpec) -> CoordinateIndex:
    if spec.max_parents is not None:
        raise UnsupportedError(
            "coordinate geometry for capped families is unsupported: the block "
            "polytopes are no longer full simplices over the ceiling lattice"
        )
    return CoordinateIndex(spec)


@dataclass(frozen=True)
class CharImset:
    """A 0/1 coordinate vector over a CoordinateIndex, stored as bytes."""

    index: CoordinateIndex
    bits: bytes

    def __post_init__(self):
        if len(self.bits) != self.index.total:
            raise DomainError(
                f"expected {self.index.total} coordinates, got {len(self.bits)}"
            )
        if any(b > 1 for b in self.bits):
            raise DomainError("imset entries must be 0 or 1")

    def bit(self, child: int, subset_mask: int) -> int:
        return self.bits[self.index.position(child, subset_mask)]

    def block_slice_bytes(self, child: int) -> bytes:
        block = self.index.block_for_child(child)
        return self.bits[block.offset:block.offset + block.size]


def characteristic_imset(g: ParentMap, index: CoordinateIndex) -> CharImset:
    if not family_contains(index.spec, g):
        raise DomainError("graph is not a member of the indexed family")
    chunks = []
    for j, block in enumerate(index.blocks):
        subs = index._subsets[j]
        p = g.parents[block.child]
        bits = (subs & p) == subs
        chunks.append(bits.astype(np.uint8).tobytes())
    return CharImset(index, b"".join(chunks))


def imset_from_bits(index: CoordinateIndex, bits: Sequence[int]) -> CharImset:
    return CharImset(index, bytes(bits))


def imset_to_graph(c: CharImset) -> ParentMap:
    """Invert characteristic_imset, verifying the product pattern on every block."""
    spec = c.index.spec
    parents = [spec.floor[i] for i in range(spec.n)]
    for j, block in enumerate(c.index.blocks):
        subs = c.index._subsets[j]
        stored = np.frombuffer(c.bits, dtype=np.uint8,
                               count=block.size, offset=block.offset)
        singles = subs[(stored == 1) & (subs & (subs - 1) == 0)]
        p = int(np.bitwise_or.reduce(singles)) if singles.size else 0
        expected = ((subs & p) == subs)
        mismatch = np.nonzero(expected != (stored == 1))[0]
        if mismatch.size:
            pos = int(mismatch[0])
            child_name = spec.ordering.names[block.child]
            subset_names = ",".join(spec.ordering.names_of_mask(int(subs[pos])))
            raise NotAVertexError(
                f"coordinate ({child_name}, {{{subset_names}}}) breaks the product "
                "pattern: the vector is not the imset of any graph"
            )
        parents[block.child] = p
    g = _parent_map_unchecked(spec.ordering, tuple(parents))
    if not family_contains(spec, g):
        raise NotAVertexError("the decoded parent sets fall outside the family")
    return g


def block_slice(c: CharImset, child: int) -> Tuple[int, ...]:
    return tuple(c.block_slice_bytes(child))


def imset_text_lines(c: CharImset) -> Iterator[str]:
    """Text form: one `<child> <parents> <bit>` line per coordinate."""
    names = c.index.spec.ordering.names
    for pos, (child, s) in enumerate(c.index.coordinates()):
        members = ",".join(names[b] for b in bits_of(s))
        yield f"{names[child]} {members} {c.bits[pos]}"


def export_full_vector(c: CharImset) -> List[int]:
    """The imset over every node set T with |T| >= 2, in graded-lex order.

    This inflates the block storage to the classical dense vector of length
    2**n - (n+1); entries off the family's support are zero.  Intended only
    for cross-tool comparison.
    """
    spec = c.index.spec
    n = spec.n
    if n > 22:
        raise ResourceError(f"full vector over {n} nodes is too large to expand")
    full = (1 << n) - 1
    out = []
    for t in iter_graded_subsets(full):
        if t.bit_count() < 2:
            continue
        child = t.bit_length() - 1
        s = t ^ (1 << child)
        try:
            block = c.index.block_for_child(child)
        except DomainError:
            out.append(0)
            continue
        if s & ~block.universe:
            out.append(0)
        else:
            out.append(c.bits[block.offset + graded_rank(s, block.universe)])
    return out
