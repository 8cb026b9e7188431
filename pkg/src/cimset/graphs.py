"""Node orderings, parent maps and admissible-parent families.

All graphs here are DAGs compatible with one fixed node ordering: the
parents of a node must come strictly earlier in the ordering.  A family is
described per child by a floor (parents that must be present), a ceiling
(parents that may be present) and an optional cap on the parent-set size.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .errors import DomainError, FormatError, ResourceError
from .subsets import bits_of, iter_graded_subsets, mask_of

ENUM_LIMIT_DEFAULT = 1 << 24
# Cap on the number of admissible parent sets handled for a single child.
PER_CHILD_LIMIT = 1 << 22


def default_enum_limit() -> int:
    raw = os.environ.get("CIMSET_ENUM_LIMIT")
    if raw is None:
        return ENUM_LIMIT_DEFAULT
    try:
        return int(raw)
    except ValueError as exc:
        raise FormatError(f"CIMSET_ENUM_LIMIT must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class NodeOrdering:
    """A total order on named nodes; position in `names` is the node index."""

    names: tuple
    position: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) < 1:
            raise DomainError("an ordering needs at least one node")
        pos = {}
        for i, name in enumerate(names):
            if not isinstance(name, str) or not name:
                raise DomainError(f"node names must be nonempty strings, got {name!r}")
            if name in pos:
                raise DomainError(f"duplicate node name {name!r}")
            pos[name] = i
        object.__setattr__(self, "position", pos)

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.position[name]
        except KeyError:
            raise DomainError(f"unknown node name {name!r}") from None

    def mask_of_names(self, names) -> int:
        return mask_of(self.index(nm) for nm in names)

    def names_of_mask(self, mask: int) -> tuple:
        return tuple(self.names[b] for b in bits_of(mask))


@dataclass(frozen=True)
class ParentMap:
    """One DAG compatible with the ordering: parents[i] is a bitmask of indices < i."""

    ordering: NodeOrdering
    parents: tuple

    def __post_init__(self):
        parents = tuple(self.parents)
        object.__setattr__(self, "parents", parents)
        n = self.ordering.n
        if len(parents) != n:
            raise DomainError(f"expected {n} parent sets, got {len(parents)}")
        for i, p in enumerate(parents):
            if p & ~((1 << i) - 1):
                raise DomainError(
                    f"child {self.ordering.names[i]!r} lists a non-predecessor parent"
                )

    def parent_names(self, i: int) -> tuple:
        return self.ordering.names_of_mask(self.parents[i])

    def edges(self) -> list:
        out = []
        for i in range(self.ordering.n):
            child = self.ordering.names[i]
            for b in bits_of(self.parents[i]):
                out.append((self.ordering.names[b], child))
        return out


def _parent_map_unchecked(ordering: NodeOrdering, parents: tuple) -> ParentMap:
    # Internal fast path for streams that produce already-valid parent tuples.
    pm = object.__new__(ParentMap)
    object.__setattr__(pm, "ordering", ordering)
    object.__setattr__(pm, "parents", parents)
    return pm


@dataclass(frozen=True)
class FamilySpec:
    """Per-child floor/ceiling parent constraints plus an optional size cap."""

    ordering: NodeOrdering
    floor: tuple
    ceiling: tuple
    max_parents: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "floor", tuple(self.floor))
        object.__setattr__(self, "ceiling", tuple(self.ceiling))
        n = self.ordering.n
        if len(self.floor) != n or len(self.ceiling) != n:
            raise DomainError("floor and ceiling must list one mask per node")
        cap = self.max_parents
        if cap is not None and cap < 0:
            raise DomainError("max_parents must be nonnegative")
        for i in range(n):
            pred = (1 << i) - 1
            f, c = self.floor[i], self.ceiling[i]
            if c & ~pred:
                raise DomainError(
                    f"ceiling of {self.ordering.names[i]!r} contains a non-predecessor"
                )
            if f & ~c:
                raise DomainError(
                    f"floor of {self.ordering.names[i]!r} is not contained in its ceiling"
                )
            if cap is not None and f.bit_count() > cap:
                raise DomainError(
                    f"floor of {self.ordering.names[i]!r} exceeds max_parents={cap}; "
                    "the family is empty"
                )

    @property
    def n(self) -> int:
        return self.ordering.n

    def free_mask(self, i: int) -> int:
        return self.ceiling[i] & ~self.floor[i]

    def admissible_count(self, i: int) -> int:
        f = self.free_mask(i).bit_count()
        if self.max_parents is None:
            return 1 << f
        extra = self.max_parents - self.floor[i].bit_count()
        return sum(math.comb(f, j) for j in range(0, min(extra, f) + 1))

    def iter_admissible(self, i: int) -> Iterator[int]:
        """Admissible parent sets of child i in graded-lex order."""
        floor = self.floor[i]
        free = self.free_mask(i)
        if self.max_parents is None:
            budget = free.bit_count()
        else:
            budget = min(self.max_parents - floor.bit_count(), free.bit_count())
        members = bits_of(free)
        for k in range(0, budget + 1):
            for combo in itertools.combinations(members, k):
                yield floor | mask_of(combo)

    def family_size(self) -> int:
        size = 1
        for i in range(self.n):
            size *= self.admissible_count(i)
        return size


def diagnosis_family(m: int, n: int) -> FamilySpec:
    """Bipartite family: m disease nodes a1..am, n symptom nodes b1..bn.

    Symptoms may take any subset of the diseases as parents; diseases have
    no parents.
    """
    if m <= 0 or n <= 0:
        raise DomainError(f"diagnosis family needs positive dimensions, got m={m}, n={n}")
    names = tuple(f"a{i}" for i in range(1, m + 1)) + tuple(f"b{j}" for j in range(1, n + 1))
    ordering = NodeOrdering(names)
    disease_mask = (1 << m) - 1
    floor = (0,) * (m + n)
    ceiling = (0,) * m + (disease_mask,) * n
    return FamilySpec(ordering, floor, ceiling, None)


def full_ordered_family(ordering) -> FamilySpec:
    """Every DAG compatible with the ordering: ceiling is all predecessors."""
    if not isinstance(ordering, NodeOrdering):
        ordering = NodeOrdering(tuple(ordering))
    n = ordering.n
    floor = (0,) * n
    ceiling = tuple((1 << i) - 1 for i in range(n))
    return FamilySpec(ordering, floor, ceiling, None)


def family_contains(spec: FamilySpec, g: ParentMap) -> bool:
    if spec.ordering != g.ordering:
        raise DomainError("graph and family use different node orderings")
    cap = spec.max_parents
    for i in range(spec.n):
        p = g.parents[i]
        if (spec.floor[i] & ~p) or (p & ~spec.ceiling[i]):
            return False
        if cap is not None and p.bit_count() > cap:
            return False
    return True


def enumerate_family(spec: FamilySpec, limit: Optional[int] = None) -> Iterator[ParentMap]:
    """Stream every family member in canonical order.

    Canonical order: the tuple of parent sets runs through the cartesian
    product of the per-child admissible lists (each in graded-lex order),
    with later children varying fastest.  Refuses families larger than
    `limit` (default: CIMSET_ENUM_LIMIT or 2**24).
    """
    if limit is None:
        limit = default_enum_limit()
    size = spec.family_size()
    if size > limit:
        raise ResourceError(
            f"family has {size} members, over the enumeration limit {limit}"
        )
    per_child = [list(spec.iter_admissible(i)) for i in range(spec.n)]
    ordering = spec.ordering
    for combo in itertools.product(*per_child):
        yield _parent_map_unchecked(ordering, combo)


# --- JSON forms ---------------------------------------------------------
#
# family: {"ordering": [names], "floor": [[names]...], "ceiling": [[names]...],
#          "max_parents": int | null}
# graph:  {"ordering": [names], "parents": [[names]...]}

def _require(obj, key, kind, what):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{what} is missing the {key!r} field")
    val = obj[key]
    if not isinstance(val, kind):
        raise FormatError(f"{what} field {key!r} has the wrong type")
    return val


def _name_lists_to_masks(ordering: NodeOrdering, lists, what: str) -> tuple:
    if len(lists) != ordering.n:
        raise FormatError(f"{what} must list one entry per node")
    masks = []
    for entry in lists:
        if not isinstance(entry, list):
            raise FormatError(f"{what} entries must be lists of node names")
        try:
            masks.append(ordering.mask_of_names(entry))
        except DomainError as exc:
            raise FormatError(str(exc)) from None
    return tuple(masks)


def family_to_json(spec: FamilySpec) -> dict:
    return {
        "ordering": list(spec.ordering.names),
        "floor": [list(spec.ordering.names_of_mask(m)) for m in spec.floor],
        "ceiling": [list(spec.ordering.names_of_mask(m)) for m in spec.ceiling],
        "max_parents": spec.max_parents,
    }


def family_from_json(obj) -> FamilySpec:
    names = _require(obj, "ordering", list, "family")
    ordering = NodeOrdering(tuple(names))
    floor = _name_lists_to_masks(ordering, _require(obj, "floor", list, "family"), "floor")
    ceiling = _name_lists_to_masks(ordering, _require(obj, "ceiling", list, "family"), "ceiling")
    cap = obj.get("max_parents")
    if cap is not None and not isinstance(cap, int):
        raise FormatError("max_parents must be an integer or null")
    try:
        return FamilySpec(ordering, floor, ceiling, cap)
    except DomainError as exc:
        raise FormatError(str(exc)) from None


def graph_to_json(g: ParentMap) -> dict:
    return {
        "ordering": list(g.ordering.names),
        "parents": [list(g.parent_names(i)) for i in range(g.ordering.n)],
    }


def graph_from_json(obj) -> ParentMap:
    names = _require(obj, "ordering", list, "graph")
    ordering = NodeOrdering(tuple(names))
    parents = _name_lists_to_masks(ordering, _require(obj, "parents", list, "graph"), "parents")
    try:
        return ParentMap(ordering, parents)
    except DomainError as exc:
        raise FormatError(str(exc)) from None
