"""Polytope structure of a family's imset vertices.

Per child, the possible block slices are the vertices of a simplex, so the
convex hull of a family's imsets is a product of simplices.  This module
gives the closed forms: the product factors, the facet inequality system
of a block, vertex adjacency, and exact decomposition of edge points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterator, List, Optional, Tuple

from .errors import DegeneratePairError, DomainError, ResourceError, UnsupportedError
from .graphs import FamilySpec, ParentMap, _parent_map_unchecked, family_contains
from .imsets import CharImset, coordinate_index
from .subsets import (
    bits_of,
    compress,
    expand,
    graded_rank,
    iter_graded_subsets,
    iter_submasks,
    mobius_supersets_inplace,
)

MAX_FACET_GROUND = 22
DENSE_MATRIX_MAX = 12
PER_FAMILY_NEIGHBOR_LIMIT = 1 << 24


@dataclass(frozen=True)
class ProductFactor:
    child: int
    dimension: int
    multiplicity: int


@dataclass(frozen=True)
class ProductStructure:
    factors: Tuple[ProductFactor, ...]
    total_dimension: int


def product_structure(spec: FamilySpec) -> ProductStructure:
    """Simplex factors of the family polytope, one per child with free parents.

    A child with f free parents (ceiling minus floor) contributes a simplex
    of dimension 2**f - 1; its coordinates repeat once per subset of the
    floor, recorded as the factor multiplicity.  total_dimension sums
    multiplicity * dimension.  Children with no free parents pin their block
    to a single point and contribute no factor.
    """
    if spec.max_parents is not None:
        raise UnsupportedError(
            "product structure for capped families is unsupported: facet "
            "descriptions of the capped blocks are unknown"
        )
    factors = []
    total = 0
    for i in range(spec.n):
        free = spec.free_mask(i)
        if free == 0:
            continue
        dim = (1 << free.bit_count()) - 1
        mult = 1 << spec.floor[i].bit_count()
        factors.append(ProductFactor(i, dim, mult))
        total += mult * dim
    return ProductStructure(tuple(factors), total)


def affine_dimension_formula(spec: FamilySpec) -> int:
    """Affine dimension of the family polytope: each free child adds 2**f - 1.

    Coordinate copies across floor subsets move in lockstep, so multiplicity
    does not increase the affine dimension.
    """
    if spec.max_parents is not None:
        raise UnsupportedError("dimension formula for capped families is unsupported")
    return sum((1 << spec.free_mask(i).bit_count()) - 1 for i in range(spec.n))


class FacetSystem:
    """The 2**k facet rows of a (2**k - 1)-simplex block.

    Rows and columns are indexed by subsets s, t of a k-element ground set;
    the entry is (-1)**(|t|-|s|) when s is a subset of t and 0 otherwise.
    Column 0 is the empty set and acts as the constant term; the remaining
    columns follow the block's graded-lex coordinate order.  Evaluating row
    s at a vertex with parent set s' yields 1 if s == s' and 0 otherwise,
    so each row supports the facet opposite the vertex of s.
    """

    def __init__(self, k: int, member_names: Optional[Tuple[str, ...]] = None,
                 fixed_names: Tuple[str, ...] = ()):
        if k < 1:
            raise DomainError("facet system needs a ground set of size >= 1")
        if k > MAX_FACET_GROUND:
            raise ResourceError(f"facet ground set of size {k} over the limit {MAX_FACET_GROUND}")
        self.k = k
        self.universe = (1 << k) - 1
        self.member_names = member_names
        self.fixed_names = tuple(fixed_names)
        if k <= 16:
            rank_of = [0] * (1 << k)
            for j, t in enumerate(iter_graded_subsets(self.universe)):
                rank_of[t] = j
            self._rank_of = rank_of
        else:
            self._rank_of = None

    @property
    def nrows(self) -> int:
        return 1 << self.k

    def _rank(self, t: int) -> int:
        if self._rank_of is not None:
            return self._rank_of[t]
        return graded_rank(t, self.universe)

    def row_sparse(self, s: int) -> Iterator[Tuple[int, int]]:
        """Yield (column subset, sign) for the nonzero entries of row s."""
        if s & ~self.universe:
            raise DomainError("row subset outside the ground set")
        comp = self.universe & ~s
        for u in iter_submasks(comp):
            yield s | u, -1 if u.bit_count() & 1 else 1

    def dense_row(self, s: int) -> List[int]:
        row = [0] * (1 << self.k)
        for t, sign in self.row_sparse(s):
            row[0 if t == 0 else 1 + self._rank(t)] = sign
        return row

    def dense_matrix(self) -> List[List[int]]:
        """All rows, graded-lex by s.  Guarded to small ground sets."""
        if self.k > DENSE_MATRIX_MAX:
            raise ResourceError(
                f"dense facet matrix for k={self.k} refused; query rows lazily instead"
            )
        return [self.dense_row(s) for s in iter_graded_subsets(self.universe, include_empty=True)]

    def evaluate(self, s: int, block_vector) -> object:
        """Exact value of row s at a block vector (graded-lex, no constant slot)."""
        if len(block_vector) != (1 << self.k) - 1:
            raise DomainError(
                f"block vector has {len(block_vector)} entries, expected {(1 << self.k) - 1}"
            )
        total = 0
        for t, sign in self.row_sparse(s):
            if t == 0:
                total += sign
                continue
            x = block_vector[self._rank(t)]
            if isinstance(x, float):
                raise DomainError("facet evaluation requires exact integer or rational entries")
            total = total + (x if sign > 0 else -x)
        return total


def facet_matrix(k: int) -> FacetSystem:
    return FacetSystem(k)


def facet_evaluate(system: FacetSystem, s: int, block_vector) -> object:
    return system.evaluate(s, block_vector)


def facet_system_for_child(spec: FamilySpec, child: int) -> FacetSystem:
    """Facet system of one child's block simplex.

    The ground set is the child's free parent set; for children with a
    nonempty floor the system applies to the block coordinates whose subset
    is floor union a free set (the copies over other floor subsets repeat
    those values).
    """
    if spec.max_parents is not None:
        raise UnsupportedError(
            "facet systems for capped families are unsupported: the capped "
            "block polytopes have no known inequality description"
        )
    if not 0 <= child < spec.n:
        raise DomainError(f"no child with index {child}")
    free = spec.free_mask(child)
    if free == 0:
        raise DomainError(
            f"child {spec.ordering.names[child]!r} has no free parents; its block is a point"
        )
    names = spec.ordering.names
    member_names = tuple(names[b] for b in bits_of(free))
    fixed_names = tuple(names[b] for b in bits_of(spec.floor[child]))
    return FacetSystem(free.bit_count(), member_names, fixed_names)


def are_neighbors(g1: ParentMap, g2: ParentMap, spec: FamilySpec) -> bool:
    """Vertex adjacency on the family polytope: parent sets differ at exactly one child."""
    if not family_contains(spec, g1) or not family_contains(spec, g2):
        raise DomainError("both graphs must belong to the family")
    diff = sum(1 for a, b in zip(g1.parents, g2.parents) if a != b)
    if diff == 0:
        raise DegeneratePairError("adjacency is undefined for a vertex paired with itself")
    return diff == 1


def neighbors(g: ParentMap, spec: FamilySpec) -> Iterator[ParentMap]:
    """All polytope neighbors of g: every single-child admissible replacement."""
    if not family_contains(spec, g):
        raise DomainError("graph is not a member of the family")
    total = sum(spec.admissible_count(i) - 1 for i in range(spec.n))
    if total > PER_FAMILY_NEIGHBOR_LIMIT:
        raise ResourceError(
            f"vertex has {total} neighbors, over the limit {PER_FAMILY_NEIGHBOR_LIMIT}"
        )
    ordering = g.ordering
    parents = g.parents
    for i in range(spec.n):
        current = parents[i]
        prefix = parents[:i]
        suffix = parents[i + 1:]
        for p in spec.iter_admissible(i):
            if p != current:
                yield _parent_map_unchecked(ordering, prefix + (p,) + suffix)


@dataclass(frozen=True)
class EdgeDecomposition:
    """x = weight * first + (1 - weight) * second on the polytope edge (first, second).

    For a vertex the pair is (v, v) with weight 1 and is_vertex set.
    """
    child: Optional[int]
    first: ParentMap
    second: ParentMap
    weight: Fraction
    is_vertex: bool


def edge_point_decompose(x, spec: FamilySpec) -> Optional[EdgeDecomposition]:
    """Decompose a point that lies on a vertex or an edge of the family polytope.

    Takes exact rational coordinates over the family's coordinate index.
    Returns None for any point that is neither a vertex nor interior to an
    edge (in particular for points outside the polytope).
    """
    index = coordinate_index(spec)
    if len(x) != index.total:
        raise DomainError(f"expected {index.total} coordinates, got {len(x)}")
    vals = []
    for v in x:
        if isinstance(v, float) or not isinstance(v, Rational):
            raise DomainError("edge decomposition requires exact rational coordinates")
        vals.append(Fraction(v))

    chosen = []          # (child, parent mask) for blocks pinned at a vertex
    edge_block = None    # (child, small mask, big mask, weight of small)
    for block in index.blocks:
        k = block.universe.bit_count()
        arr = [Fraction(0)] * (1 << k)
        arr[0] = Fraction(1)
        for j, s in enumerate(index.block_subsets(block.child)):
            arr[compress(int(s), block.universe)] = vals[block.offset + j]
        # Barycentric coordinates over the block simplex: invert the
        # superset-sum relation x(S) = sum of lambda_P over P containing S.
        mobius_supersets_inplace(arr, k)
        support = [(expand(cm, block.universe), lam) for cm, lam in enumerate(arr) if lam != 0]
        if any(lam < 0 for _, lam in support):
            return None
        if len(support) == 1:
            chosen.append((block.child, support[0][0]))
        elif len(support) == 2:
            if edge_block is not None:
                return None
            (p_a, lam_a), (p_b, lam_b) = support
            # graded-lex order fixes which endpoint comes first
            if _graded_key(p_a) > _graded_key(p_b):
                p_a, lam_a, p_b, lam_b = p_b, lam_b, p_a, lam_a
            edge_block = (block.child, p_a, p_b, lam_a)
        else:
            return None

    base = [spec.floor[i] for i in range(spec.n)]
    for child, p in chosen:
        base[child] = p
    if edge_block is None:
        g = _parent_map_unchecked(spec.ordering, tuple(base))
        if not family_contains(spec, g):
            return None
        return EdgeDecomposition(None, g, g, Fraction(1), True)
    child, p_a, p_b, lam_a = edge_block
    first_parents = list(base)
    second_parents = list(base)
    first_parents[child] = p_a
    second_parents[child] = p_b
    g1 = _parent_map_unchecked(spec.ordering, tuple(first_parents))
    g2 = _parent_map_unchecked(spec.ordering, tuple(second_parents))
    if not family_contains(spec, g1) or not family_contains(spec, g2):
        return None
    return EdgeDecomposition(child, g1, g2, lam_a, False)


def _graded_key(mask: int):
    return (mask.bit_count(), bits_of(mask))


def vertex_block_vector(k: int, parent_positions_mask: int) -> Tuple[int, ...]:
    """Block slice of the vertex whose parent set is the given mask over range(k)."""
    universe = (1 << k) - 1
    if parent_positions_mask & ~universe:
        raise DomainError("parent mask outside the ground set")
    return tuple(
        1 if (t & parent_positions_mask) == t else 0
        for t in iter_graded_subsets(universe)
    )
