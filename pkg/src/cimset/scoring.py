"""Discrete-data scoring and the linear objective over imset coordinates.

A fitted graph is scored as a sum of per-child local scores.  Because the
family factors into per-child blocks, each local score table can be folded
by a subset Möbius transform into a vector r over the block coordinates,
and the graph score becomes (sum of per-child offsets) - <r, c_G>.  The
transform algebra is type-agnostic: integer or Fraction tables stay exact,
float tables stay float.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from .errors import DomainError, FormatError, ResourceError, UnsupportedError
from .graphs import FamilySpec, NodeOrdering, ParentMap, family_contains, \
    family_from_json, family_to_json
from .imsets import CharImset, CoordinateIndex
from .subsets import compress, expand, mobius_subsets_inplace

SCORE_SNAP = 1e-12
TABLE_CHILD_LIMIT = 1 << 20

CRITERIA = ("ll", "bic", "aic")


def score_gt(a, b) -> bool:
    """Strict greater-than used for every score comparison.

    Exact when both operands are exact; floats are compared after an
    absolute snap, so near-ties resolve the same way on every platform.
    """
    if isinstance(a, float) or isinstance(b, float):
        return a - b > SCORE_SNAP
    return a > b


# --- data ---------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    """Complete discrete observations over the ordering's variables."""

    ordering: NodeOrdering
    cardinalities: Tuple[int, ...]
    rows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        n = self.ordering.n
        if len(self.cardinalities) != n:
            raise DomainError("one cardinality per variable required")
        if any(c < 1 for c in self.cardinalities):
            raise DomainError("cardinalities must be at least 1")
        if not self.rows:
            raise DomainError("a dataset needs at least one row")
        for r, row in enumerate(self.rows):
            if len(row) != n:
                raise DomainError(f"row {r} has {len(row)} values, expected {n}")
            for j, v in enumerate(row):
                if not 0 <= v < self.cardinalities[j]:
                    raise DomainError(
                        f"row {r} column {self.ordering.names[j]}: state {v} out of range"
                    )

    @property
    def n_rows(self) -> int:
        return len(self.rows)


def load_csv(path, ordering: NodeOrdering) -> Dataset:
    """Read a header + bare-token CSV, mapping values to dense state indices.

    Columns are matched by header name and may appear in any order; extra
    columns are ignored.  State indices follow first appearance per column.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        cols = []
        for name in ordering.names:
            if name not in header:
                raise FormatError(f"{path}: column '{name}' missing from header")
            cols.append(header.index(name))

        seen: List[Dict[str, int]] = [{} for _ in ordering.names]
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            row = []
            for j, c in enumerate(cols):
                if c >= len(raw):
                    raise FormatError(
                        f"{path}: row {lineno} is missing column '{ordering.names[j]}'"
                    )
                tok = raw[c].strip()
                if not tok:
                    raise FormatError(
                        f"{path}: empty cell at row {lineno}, column '{ordering.names[j]}'"
                    )
                row.append(seen[j].setdefault(tok, len(seen[j])))
            rows.append(tuple(row))
    if not rows:
        raise FormatError(f"{path}: no data rows")
    cards = tuple(len(s) for s in seen)
    return Dataset(ordering, cards, tuple(rows))


# --- local scores -------------------------------------------------------

def local_score(data: Dataset, child: int, parents: int, criterion: str):
    """Per-child fit of one parent set: ll, bic, or aic.

    ll is the maximized multinomial log-likelihood sum over parent
    configurations; bic subtracts (ln N / 2) * q * (r - 1) and aic
    subtracts q * (r - 1), q = product of parent cardinalities.
    """
    crit = criterion.lower()
    if crit not in CRITERIA:
        raise DomainError(f"unknown criterion '{criterion}'")
    if parents & ~((1 << child) - 1):
        raise DomainError("parents must precede the child in the ordering")

    pcols = [j for j in range(child) if parents >> j & 1]
    joint: Dict[tuple, int] = {}
    marg: Dict[tuple, int] = {}
    for row in data.rows:
        pi = tuple(row[j] for j in pcols)
        joint[pi + (row[child],)] = joint.get(pi + (row[child],), 0) + 1
        marg[pi] = marg.get(pi, 0) + 1
    ll = sum(c * math.log(c) for c in joint.values())
    ll -= sum(c * math.log(c) for c in marg.values())

    if crit == "ll":
        return ll
    q = 1
    for j in pcols:
        q *= data.cardinalities[j]
    free_params = q * (data.cardinalities[child] - 1)
    if crit == "bic":
        return ll - math.log(data.n_rows) / 2 * free_params
    return ll - free_params


# --- score tables -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Local score of every admissible parent set, for every child."""

    spec: FamilySpec
    entries: Tuple[Dict[int, object], ...]
    criterion: str = "custom"

    def __post_init__(self):
        if len(self.entries) != self.spec.ordering.n:
            raise DomainError("one entry map per child required")
        for i, cell in enumerate(self.entries):
            admissible = set(self.spec.iter_admissible(i))
            if set(cell) != admissible:
                raise DomainError(
                    f"child {self.spec.ordering.names[i]}: score table keys do not "
                    f"match the admissible parent sets"
                )
            for v in cell.values():
                if isinstance(v, float) and not math.isfinite(v):
                    raise DomainError("scores must be finite")

    def local(self, child: int, parents: int):
        try:
            return self.entries[child][parents]
        except (IndexError, KeyError):
            raise DomainError("no score for that child and parent set") from None


def build_score_table(data: Dataset, spec: FamilySpec, criterion: str) -> ScoreTable:
    if data.ordering.names != spec.ordering.names:
        raise DomainError("dataset and family use different variable orderings")
    entries = []
    for i in range(spec.ordering.n):
        count = spec.admissible_count(i)
        if count > TABLE_CHILD_LIMIT:
            raise ResourceError(
                f"child {spec.ordering.names[i]} has {count} admissible parent sets, "
                f"over the score-table limit {TABLE_CHILD_LIMIT}"
            )
        entries.append({p: local_score(data, i, p, criterion) for p in spec.iter_admissible(i)})
    return ScoreTable(spec, tuple(entries), criterion.lower())


def table_graph_score(table: ScoreTable, g: ParentMap):
    """Sum of the per-child locals at the graph's parent sets."""
    total = 0
    for i, p in enumerate(g.parents):
        total = total + table.local(i, p)
    return total


def score_table_to_json(table: ScoreTable) -> dict:
    scores = []
    names = table.spec.ordering.names
    for i, cell in enumerate(table.entries):
        for p in sorted(cell, key=lambda m: (m.bit_count(), m)):
            v = cell[p]
            if isinstance(v, Fraction):
                v = str(v)
            scores.append({"child": names[i],
                           "parents": list(table.spec.ordering.names_of_mask(p)),
                           "score": v})
    return {"family": family_to_json(table.spec), "criterion": table.criterion,
            "scores": scores}


def score_table_from_json(obj) -> ScoreTable:
    if not isinstance(obj, dict) or "family" not in obj or "scores" not in obj:
        raise FormatError("score table JSON needs 'family' and 'scores'")
    spec = family_from_json(obj["family"])
    entries: Tuple[Dict[int, object], ...] = tuple({} for _ in spec.ordering.names)
    for k, item in enumerate(obj["scores"]):
        if not isinstance(item, dict) or "child" not in item or "score" not in item:
            raise FormatError(f"score entry {k}: needs 'child' and 'score'")
        try:
            i = spec.ordering.index(item["child"])
            mask = spec.ordering.mask_of_names(item.get("parents", []))
        except (DomainError, KeyError, TypeError) as exc:
            raise FormatError(f"score entry {k}: {exc}") from None
        v = item["score"]
        if isinstance(v, str):
            try:
                v = Fraction(v)
            except (ValueError, ZeroDivisionError):
                raise FormatError(f"score entry {k}: bad rational '{v}'") from None
        elif isinstance(v, bool) or not isinstance(v, (int, float)):
            raise FormatError(f"score entry {k}: score must be a number")
        entries[i][mask] = v
    try:
        return ScoreTable(spec, entries, str(obj.get("criterion", "custom")))
    except DomainError as exc:
        raise FormatError(str(exc)) from None


# --- the linear objective -----------------------------------------------

@dataclass(frozen=True, eq=False)
class DataVector:
    """Block-coordinate vector r plus per-child offsets.

    For every admissible parent set P of child i the identity
    offsets[i] - sum(values over coordinates (i, S) with S <= P) = local(i, P)
    holds; summing over children turns the table score into
    sum(offsets) - <r, c_G>.
    """

    index: CoordinateIndex
    values: Tuple[object, ...]
    offsets: Tuple[object, ...]

    def __post_init__(self):
        if len(self.values) != self.index.total:
            raise DomainError("one value per coordinate required")
        if len(self.offsets) != self.index.spec.ordering.n:
            raise DomainError("one offset per child required")

    @property
    def s_total(self):
        total = 0
        for v in self.offsets:
            total = total + v
        return total


def mobius_data_vector(table: ScoreTable, index: CoordinateIndex) -> DataVector:
    """Fold a score table into the block objective by Möbius inversion.

    Within each block the transform runs over the child's free sublattice;
    the result lands on the minimal lift (free part united with the floor),
    every other coordinate of the block gets zero.
    """
    spec = table.spec
    if spec != index.spec:
        raise DomainError("score table and coordinate index describe different families")
    if spec.max_parents is not None:
        raise UnsupportedError("block objectives for capped families are unsupported")

    values: List[object] = [0] * index.total
    offsets = tuple(table.local(i, spec.floor[i]) for i in range(spec.ordering.n))
    for block in index.blocks:
        i = block.child
        floor = spec.floor[i]
        free = spec.free_mask(i)
        k = free.bit_count()
        arr: List[object] = [table.local(i, floor | expand(s, free)) for s in range(1 << k)]
        mobius_subsets_inplace(arr, k)
        subs = index.block_subsets(i)
        for j in range(block.size):
            s = int(subs[j])
            if s & floor == floor and s != floor:
                values[block.offset + j] = -arr[compress(s & free, free)]
    return DataVector(index, tuple(values), offsets)


def data_vector_dot(dv: DataVector, c: CharImset):
    """Exact <r, c> over the shared coordinate index."""
    if c.index != dv.index:
        raise DomainError("imset and data vector use different coordinate indexes")
    total = 0
    for v, b in zip(dv.values, c.bits):
        if b and v != 0:
            total = total + v
    return total


def score_graph(dv: DataVector, g: ParentMap):
    """Graph quality sum(offsets) - <r, c_g>, computed blockwise."""
    spec = dv.index.spec
    if not family_contains(spec, g):
        raise DomainError("graph is not a member of the data vector's family")
    total = dv.s_total
    for block in dv.index.blocks:
        pa = g.parents[block.child]
        subs = dv.index.block_subsets(block.child)
        for j in range(block.size):
            v = dv.values[block.offset + j]
            if v != 0 and int(subs[j]) & pa == int(subs[j]):
                total = total - v
    return total
