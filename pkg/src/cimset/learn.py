"""Structure learning under a fixed ordering.

The family factors into independent per-child blocks, so the exact
optimum is found by maximizing each child's local score separately.  The
greedy K2 baselines walk the same per-child lattices by single-node
additions (forward) or removals (backward) and can get stuck; `compare`
reports both against the exact answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from .errors import DomainError
from .graphs import FamilySpec, ParentMap, _parent_map_unchecked
from .scoring import ScoreTable, score_gt

METHODS = ("exact", "k2-forward", "k2-backward")


@dataclass(frozen=True)
class ChildChoice:
    child: int
    parents: int
    local: object
    evaluated: int


@dataclass(frozen=True, eq=False)
class LearnResult:
    graph: ParentMap
    total_score: object
    per_child: Tuple[ChildChoice, ...]
    method: str


def _assemble(spec: FamilySpec, choices: List[ChildChoice], method: str) -> LearnResult:
    g = _parent_map_unchecked(spec.ordering, tuple(c.parents for c in choices))
    total = 0
    for c in choices:
        total = total + c.local
    return LearnResult(g, total, tuple(choices), method)


def _check(table: ScoreTable, spec: FamilySpec) -> None:
    if table.spec != spec:
        raise DomainError("score table was built for a different family")


def optimize_exact(table: ScoreTable, spec: FamilySpec) -> LearnResult:
    """Per-child maximization; ties keep the graded-lex smallest parent set.

    Block independence makes the assembled graph the global optimum over
    the entire family.
    """
    _check(table, spec)
    choices = []
    for i in range(spec.n):
        best_p = None
        best_s = None
        count = 0
        for p in spec.iter_admissible(i):
            s = table.local(i, p)
            count += 1
            if best_p is None or score_gt(s, best_s):
                best_p, best_s = p, s
        choices.append(ChildChoice(i, best_p, best_s, count))
    return _assemble(spec, choices, "exact")


def k2_forward(table: ScoreTable, spec: FamilySpec) -> LearnResult:
    """Greedy single-node additions from the floor, per child.

    A step is taken only on strict improvement; equally-improving
    additions resolve to the lowest node index.
    """
    _check(table, spec)
    cap = spec.max_parents
    choices = []
    for i in range(spec.n):
        p = spec.floor[i]
        s = table.local(i, p)
        count = 1
        free = spec.free_mask(i)
        while True:
            if cap is not None and p.bit_count() >= cap:
                break
            best_v = -1
            best_s = s
            rest = free & ~p
            while rest:
                low = rest & -rest
                trial = table.local(i, p | low)
                count += 1
                if score_gt(trial, best_s):
                    best_v, best_s = low, trial
                rest ^= low
            if best_v < 0:
                break
            p |= best_v
            s = best_s
        choices.append(ChildChoice(i, p, s, count))
    return _assemble(spec, choices, "k2-forward")


def _backward_start(spec: FamilySpec, i: int) -> int:
    """The ceiling, or under a cap the graded-lex-first admissible maximal set."""
    cap = spec.max_parents
    ceiling = spec.ceiling[i]
    if cap is None or ceiling.bit_count() <= cap:
        return ceiling
    p = spec.floor[i]
    free = spec.free_mask(i)
    while p.bit_count() < cap:
        low = free & -free
        p |= low
        free ^= low
    return p


def k2_backward(table: ScoreTable, spec: FamilySpec) -> LearnResult:
    """Greedy single-node removals from the largest admissible set, per child."""
    _check(table, spec)
    choices = []
    for i in range(spec.n):
        p = _backward_start(spec, i)
        s = table.local(i, p)
        count = 1
        floor = spec.floor[i]
        while True:
            best_v = -1
            best_s = s
            rest = p & ~floor
            while rest:
                low = rest & -rest
                trial = table.local(i, p & ~low)
                count += 1
                if score_gt(trial, best_s):
                    best_v, best_s = low, trial
                rest ^= low
            if best_v < 0:
                break
            p &= ~best_v
            s = best_s
        choices.append(ChildChoice(i, p, s, count))
    return _assemble(spec, choices, "k2-backward")


def structural_hamming(g1: ParentMap, g2: ParentMap) -> int:
    """Size of the symmetric difference of the edge sets."""
    if g1.ordering.names != g2.ordering.names:
        raise DomainError("graphs use different orderings")
    return sum((a ^ b).bit_count() for a, b in zip(g1.parents, g2.parents))


@dataclass(frozen=True, eq=False)
class CompareReport:
    results: Dict[str, LearnResult]
    gaps: Dict[str, object]
    agreement: Dict[str, Tuple[bool, ...]]
    hamming: Dict[str, int]


def compare(table: ScoreTable, spec: FamilySpec) -> CompareReport:
    """Exact vs both K2 variants: scores, gaps, per-child agreement, SHD."""
    exact = optimize_exact(table, spec)
    results = {"exact": exact,
               "k2-forward": k2_forward(table, spec),
               "k2-backward": k2_backward(table, spec)}
    gaps = {}
    agreement = {}
    hamming = {}
    for name in ("k2-forward", "k2-backward"):
        r = results[name]
        gaps[name] = exact.total_score - r.total_score
        agreement[name] = tuple(a == b for a, b in zip(exact.graph.parents, r.graph.parents))
        hamming[name] = structural_hamming(exact.graph, r.graph)
    return CompareReport(results, gaps, agreement, hamming)
