"""Independent exact-arithmetic certification oracle.

Everything here works from first principles on explicit vertex clouds:
LP feasibility with exact rational pivoting (Bland's rule, so no cycling),
midpoint convex-combination tests for adjacency, exact affine rank, facet
verification, and exhaustive brute-force structure learning.  None of it
relies on the closed-form block structure it is used to certify.

Rational vectors and matrices are plain sequences of ints or
fractions.Fraction values; results are Fractions in lowest terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import DegeneratePairError, DomainError, ResourceError
from .graphs import FamilySpec, ParentMap, enumerate_family
from .imsets import CharImset
from .subsets import iter_graded_subsets, iter_submasks

LP_MAX_ROWS = 4096
LP_MAX_COLS = 4096
RANK_MAX = 1 << 16
ADJACENCY_CLOUD_MAX = 4096
BRUTEFORCE_MAX = 1 << 20


def _exact(v) -> Fraction:
    if isinstance(v, float):
        raise DomainError("exact rational arithmetic required; got a float")
    return Fraction(v)


def _vec(v) -> Tuple[int, ...]:
    if isinstance(v, CharImset):
        return tuple(v.bits)
    return tuple(int(e) for e in v)


# --- exact simplex ------------------------------------------------------
#
# Tableau rows hold integers with one positive denominator per row; pivots
# cross-multiply and re-reduce by the gcd, so every quantity stays exact.

def _normalize(row: List[int], den: int) -> Tuple[List[int], int]:
    g = den
    for v in row:
        g = math.gcd(g, v)
        if g == 1:
            return row, den
    return [v // g for v in row], den // g


def _solve_phase1(rows, rhs, eq_flags):
    """Exact phase-1 simplex for {x >= 0 : Ax (<=|=) b}.

    Returns (x, None) for a feasible point, or (None, farkas) where farkas
    is a list of Fractions y with: y_i <= 0 on inequality rows,
    sum_i y_i * A[i] <= 0 componentwise, and sum_i y_i * b_i > 0, which
    refutes feasibility.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    if m > LP_MAX_ROWS or n > LP_MAX_COLS:
        raise ResourceError(f"LP of size {m}x{n} over the {LP_MAX_ROWS}x{LP_MAX_COLS} limit")
    if m == 0:
        return (), None
    if n == 0:
        rows = [[] for _ in range(m)]

    # integerize and flip rows so every right-hand side is nonnegative
    int_rows: List[List[int]] = []
    int_rhs: List[int] = []
    scales: List[int] = []
    signs: List[int] = []
    for i in range(m):
        coeffs = [_exact(v) for v in rows[i]]
        b = _exact(rhs[i])
        scale = 1
        for v in coeffs:
            scale = scale * v.denominator // math.gcd(scale, v.denominator)
        scale = scale * b.denominator // math.gcd(scale, b.denominator)
        row = [int(v * scale) for v in coeffs]
        bi = int(b * scale)
        sign = 1
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
            sign = -1
        int_rows.append(row)
        int_rhs.append(bi)
        scales.append(scale)
        signs.append(sign)

    ineq_rows = [i for i in range(m) if not eq_flags[i]]
    slack_col = {i: n + j for j, i in enumerate(ineq_rows)}
    n_slack = len(ineq_rows)
    art0 = n + n_slack
    total = art0 + m

    V: List[List[int]] = []
    dens: List[int] = []
    basis: List[int] = []
    for i in range(m):
        ext = int_rows[i] + [0] * (n_slack + m) + [int_rhs[i]]
        if i in slack_col:
            ext[slack_col[i]] = signs[i]
        ext[art0 + i] = 1
        V.append(ext)
        dens.append(1)
        basis.append(art0 + i)

    # phase-1 objective: minimize the sum of the artificials
    obj = [0] * (total + 1)
    for j in range(art0, art0 + m):
        obj[j] = 1
    for row in V:
        obj = [a - b for a, b in zip(obj, row)]
    obj, obj_den = _normalize(obj, 1)

    guard = 0
    while True:
        guard += 1
        assert guard < 2_000_000, "simplex failed to terminate"
        enter = -1
        for j in range(total):
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best_num = best_den = 0
        for i in range(m):
            a = V[i][enter]
            if a > 0:
                bnum = V[i][-1]
                if leave < 0 or bnum * best_den < best_num * a or (
                        bnum * best_den == best_num * a and basis[i] < basis[leave]):
                    leave, best_num, best_den = i, bnum, a
        assert leave >= 0, "phase-1 objective cannot be unbounded"
        prow = V[leave]
        p = prow[enter]
        for i in range(m):
            if i == leave:
                continue
            f = V[i][enter]
            if f:
                V[i], dens[i] = _normalize(
                    [a * p - f * b for a, b in zip(V[i], prow)], dens[i] * p)
        f = obj[enter]
        if f:
            obj, obj_den = _normalize(
                [a * p - f * b for a, b in zip(obj, prow)], obj_den * p)
        basis[leave] = enter

    w = Fraction(0)
    for i in range(m):
        if basis[i] >= art0:
            w += Fraction(V[i][-1], V[i][basis[i]])

    if w == 0:
        x = [Fraction(0)] * n
        for i in range(m):
            j = basis[i]
            if j < n:
                x[j] = Fraction(V[i][-1], V[i][j])
        return tuple(x), None

    # Farkas multipliers: duals read off the artificial columns, mapped back
    # through the per-row scaling and sign flips.
    farkas = []
    for i in range(m):
        y_i = 1 - Fraction(obj[art0 + i], obj_den)
        farkas.append(y_i * signs[i] * scales[i])
    _check_farkas(rows, rhs, eq_flags, farkas)
    return None, farkas


def _check_farkas(rows, rhs, eq_flags, farkas) -> None:
    m = len(rows)
    n = len(rows[0]) if m else 0
    for i in range(m):
        if not eq_flags[i] and farkas[i] > 0:
            raise AssertionError("Farkas multiplier has the wrong sign on an inequality row")
    for j in range(n):
        combo = sum(farkas[i] * _exact(rows[i][j]) for i in range(m))
        if combo > 0:
            raise AssertionError("Farkas combination is not nonpositive on a column")
    if sum(farkas[i] * _exact(rhs[i]) for i in range(m)) <= 0:
        raise AssertionError("Farkas combination does not refute the right-hand side")


def _eq_flags(m: int, equalities) -> List[bool]:
    if equalities is None:
        return [False] * m
    if isinstance(equalities, (set, frozenset)):
        return [i in equalities for i in range(m)]
    flags = [bool(v) for v in equalities]
    if len(flags) != m:
        raise DomainError("equality mask length must match the number of rows")
    return flags


def lp_feasible(rows, rhs, equalities=None) -> Optional[Tuple[Fraction, ...]]:
    """A feasible point of {x >= 0 : Ax (<=|=) b}, or None when there is none."""
    if len(rows) != len(rhs):
        raise DomainError("rows and right-hand sides differ in length")
    x, _ = _solve_phase1(rows, rhs, _eq_flags(len(rows), equalities))
    return x


# --- certificates -------------------------------------------------------

@dataclass
class Certificate:
    """A replayable verdict: kind, witness payload, and its verification state."""

    kind: str
    payload: dict
    verified: bool

    def replay(self) -> bool:
        """Re-verify the stored witness by direct arithmetic."""
        return _REPLAY[self.kind](self.payload)


def _replay_non_adjacency(p) -> bool:
    v1, v2 = p["v1"], p["v2"]
    combo = p["combination"]
    if not combo:
        return False
    total = Fraction(0)
    mix = [Fraction(0)] * len(v1)
    for vec, lam in combo:
        if lam < 0 or vec == v1 or vec == v2:
            return False
        total += lam
        for j, e in enumerate(vec):
            if e:
                mix[j] += lam * e
    if total != 1:
        return False
    return all(2 * mix[j] == v1[j] + v2[j] for j in range(len(v1)))


def _replay_adjacency(p) -> bool:
    v1, v2 = p["v1"], p["v2"]
    support = p["support"]
    zero_cols = p["zero_cols"]
    two_cols = p["two_cols"]
    y = p["farkas"]
    # vertices pruned before the LP must each be forced to weight zero by a
    # coordinate where the midpoint is 0 (they carry a 1) or 1 (they carry a 0)
    for vec in p["excluded"]:
        if not any(vec[j] for j in zero_cols) and not any(
                not vec[j] for j in two_cols):
            return False
    for vec in p["candidates"]:
        if sum(y[t] * vec[j] for t, j in enumerate(support)) + y[-1] > 0:
            return False
    lhs = sum(y[t] * (v1[j] + v2[j]) for t, j in enumerate(support)) + 2 * y[-1]
    return lhs > 0


def _replay_separation(p) -> bool:
    w = p["witness"]
    v1, v2 = p["v1"], p["v2"]
    d1 = sum(wi * e for wi, e in zip(w, v1))
    d2 = sum(wi * e for wi, e in zip(w, v2))
    if d1 != d2:
        return False
    return all(sum(wi * e for wi, e in zip(w, u)) + 1 <= d1 for u in p["others"])


def _replay_facet(p) -> bool:
    coeffs = p["coefficients"]
    cloud = p["cloud"]
    tight = []
    off = []
    for vec in cloud:
        val = coeffs[0] + sum(c * e for c, e in zip(coeffs[1:], vec))
        if val < 0:
            return False
        (tight if val == 0 else off).append(vec)
    if len(off) != 1 or off[0] != p["vertex"]:
        return False
    return affine_dimension(tight) == len(cloud) - 2


def _replay_dimension(p) -> bool:
    return affine_dimension(p["cloud"]) == p["rank"]


_REPLAY = {
    "non-adjacency": _replay_non_adjacency,
    "adjacency": _replay_adjacency,
    "separation": _replay_separation,
    "facet": _replay_facet,
    "dimension": _replay_dimension,
}


# --- adjacency ----------------------------------------------------------

def oracle_adjacent(v1, v2, cloud, synthesize_witness: bool = True) -> Certificate:
    """Decide vertex adjacency on conv(cloud) by the midpoint test.

    Two distinct vertices of a 0/1 polytope are adjacent exactly when their
    midpoint cannot be written as a convex combination of the remaining
    vertices.  On adjacency, optionally also synthesizes a separating cost
    vector w with w.v1 = w.v2 >= w.u + 1 for every other vertex u.
    """
    b1, b2 = _vec(v1), _vec(v2)
    if b1 == b2:
        raise DegeneratePairError("adjacency oracle called with identical vertices")
    vecs = [_vec(u) for u in cloud]
    if len(vecs) > ADJACENCY_CLOUD_MAX:
        raise ResourceError(f"cloud of {len(vecs)} vertices over the limit {ADJACENCY_CLOUD_MAX}")
    if b1 not in vecs or b2 not in vecs:
        raise DomainError("both query vertices must belong to the cloud")
    others = [u for u in vecs if u != b1 and u != b2]

    target = [a + b for a, b in zip(b1, b2)]
    support = [j for j, t in enumerate(target) if t]
    zero_cols = [j for j, t in enumerate(target) if not t]
    # a combination with weight on u needs u to vanish where the midpoint
    # does and to be 1 where both endpoints are
    two_cols = [j for j, t in enumerate(target) if t == 2]
    candidates = []
    excluded = []
    for u in others:
        if any(u[j] for j in zero_cols) or any(not u[j] for j in two_cols):
            excluded.append(u)
        else:
            candidates.append(u)

    lp_rows = [[u[j] for u in candidates] for j in support]
    lp_rhs = [target[j] for j in support]
    lp_rows.append([1] * len(candidates))
    lp_rhs.append(2)
    x, farkas = _solve_phase1(lp_rows, lp_rhs, [True] * len(lp_rows))

    if x is not None:
        combo = [(candidates[t], x[t] / 2) for t in range(len(candidates)) if x[t]]
        payload = {"v1": b1, "v2": b2, "combination": combo}
        cert = Certificate("non-adjacency", payload, False)
        cert.verified = cert.replay()
        return cert

    scale = math.lcm(*(y.denominator for y in farkas)) if farkas else 1
    payload = {
        "v1": b1, "v2": b2,
        "support": tuple(support), "zero_cols": tuple(zero_cols),
        "two_cols": tuple(two_cols),
        "candidates": tuple(candidates), "excluded": tuple(excluded),
        "farkas": tuple(int(y * scale) for y in farkas),
    }
    cert = Certificate("adjacency", payload, False)
    cert.verified = cert.replay()
    if synthesize_witness and cert.verified:
        w = _edge_witness(b1, b2, others)
        payload["witness"] = w
        sep = Certificate("separation", {"witness": w, "v1": b1, "v2": b2,
                                         "others": tuple(others)}, False)
        sep.verified = sep.replay()
        cert.verified = cert.verified and sep.verified
    return cert


def _edge_witness(b1, b2, others) -> Tuple[Fraction, ...]:
    """A cost vector equal on b1, b2 and at least 1 below them on the rest."""
    d = len(b1)
    active = sorted({j for u in [b1, b2, *others] for j in range(d) if u[j]})
    na = len(active)
    # variables: w restricted to active coordinates, split as w+ - w-
    rows = []
    rhs = []
    eq = []
    diff = [b1[j] - b2[j] for j in active]
    rows.append(diff + [-v for v in diff])
    rhs.append(0)
    eq.append(True)
    for u in others:
        gap = [b1[j] - u[j] for j in active]
        rows.append([-v for v in gap] + gap)
        rhs.append(-1)
        eq.append(False)
    x, _ = _solve_phase1(rows, rhs, eq)
    if x is None:
        raise AssertionError("separating witness LP must be feasible for an adjacent pair")
    w = [Fraction(0)] * d
    for t, j in enumerate(active):
        w[j] = x[t] - x[na + t]
    return tuple(w)


# --- affine rank --------------------------------------------------------

def affine_dimension(cloud) -> int:
    """Exact affine dimension of a point cloud over the rationals."""
    vecs = [_vec(v) for v in cloud]
    if not vecs:
        raise DomainError("affine dimension of an empty cloud is undefined")
    ambient = len(vecs[0])
    if len(vecs) > RANK_MAX or ambient > RANK_MAX:
        raise ResourceError(f"cloud of {len(vecs)} x {ambient} over the rank limit {RANK_MAX}")
    v0 = vecs[0]
    basis: Dict[int, Dict[int, int]] = {}
    for v in vecs[1:]:
        if len(v) != ambient:
            raise DomainError("cloud vectors have mixed lengths")
        r = {j: d for j, d in enumerate(a - b for a, b in zip(v, v0)) if d}
        r = _eliminate(r, basis)
        if r:
            _normalize_sparse(r)
            basis[min(r)] = r
    return len(basis)


def _eliminate(r: Dict[int, int], basis: Dict[int, Dict[int, int]]) -> Dict[int, int]:
    while True:
        pivots = sorted(c for c in r if c in basis)
        if not pivots:
            return r
        for c in pivots:
            if c not in r:
                continue
            b = basis[c]
            if len(b) == 1:
                # unit row: eliminating just deletes the column
                del r[c]
                continue
            rc = r[c]
            bc = b[c]
            new: Dict[int, int] = {}
            for j, val in r.items():
                if j != c:
                    new[j] = val * bc
            for j, val in b.items():
                if j == c:
                    continue
                acc = new.get(j, 0) - val * rc
                if acc:
                    new[j] = acc
                elif j in new:
                    del new[j]
            _normalize_sparse(new)
            r = new
            break


def _normalize_sparse(r: Dict[int, int]) -> None:
    if not r:
        return
    g = 0
    for v in r.values():
        g = math.gcd(g, v)
        if g == 1:
            break
    piv = min(r)
    if r[piv] < 0:
        g = -g
    if g != 1:
        for j in list(r):
            r[j] //= g


# --- facet verification -------------------------------------------------

def oracle_facet_check(sys_row, cloud) -> Certificate:
    """Certify one candidate facet row against a full block vertex cloud.

    sys_row is (s, coefficients) with the constant first and the remaining
    coefficients in the block's graded-lex coordinate order.  The checks:
    the row is nonnegative on every vertex, tight on all of them except
    exactly the vertex whose parent set is s, and the tight set spans an
    affine space of dimension len(cloud) - 2.
    """
    s, coeffs = sys_row
    vecs = [_vec(v) for v in cloud]
    if not vecs:
        raise DomainError("facet check needs a nonempty vertex cloud")
    k = (len(vecs[0]) + 1).bit_length() - 1
    if (1 << k) - 1 != len(vecs[0]) or len(coeffs) != 1 << k:
        raise DomainError("coefficient row and cloud dimensions are inconsistent")
    universe = (1 << k) - 1
    s_vertex = tuple(1 if (t & s) == t else 0 for t in iter_graded_subsets(universe))

    coeffs = [int(c) for c in coeffs]
    payload = {"s": s, "coefficients": tuple(coeffs), "cloud": tuple(vecs),
               "vertex": s_vertex, "failing": None}
    tight = []
    off = []
    for vec in vecs:
        val = coeffs[0] + sum(c * e for c, e in zip(coeffs[1:], vec))
        if val < 0:
            payload["failing"] = vec
            return Certificate("facet", payload, False)
        (tight if val == 0 else off).append(vec)
    if len(off) != 1 or off[0] != s_vertex:
        payload["failing"] = off[0] if off else None
        return Certificate("facet", payload, False)
    if affine_dimension(tight) != len(vecs) - 2:
        payload["failing"] = "tight-set-rank"
        return Certificate("facet", payload, False)
    return Certificate("facet", payload, True)


# --- brute-force learning ----------------------------------------------

def learn_bruteforce(spec: FamilySpec, table) -> ParentMap:
    """Exhaustively score every family member; ties keep the earliest graph."""
    from .scoring import score_gt, table_graph_score

    size = spec.family_size()
    if size > BRUTEFORCE_MAX:
        raise ResourceError(f"family of {size} members over the brute-force limit {BRUTEFORCE_MAX}")
    best = None
    best_score = None
    for g in enumerate_family(spec):
        total = table_graph_score(table, g)
        if best is None or score_gt(total, best_score):
            best, best_score = g, total
    if best is None:
        raise DomainError("empty family")
    return best


# --- hand-built separating vectors for single-symptom blocks -------------

def lemma32_witness(pa1: int, pa2: int, m: int) -> Dict[int, int]:
    """A cost vector over one block separating the edge (pa1, pa2).

    Returns a sparse map from coordinate subset to weight, built by the
    case analysis on how the two parent sets differ.  Used as an
    independent cross-check of the LP-synthesized witnesses.
    """
    universe = (1 << m) - 1
    if pa1 & ~universe or pa2 & ~universe:
        raise DomainError("parent sets must live on the m disease nodes")
    if pa1 == pa2:
        raise DegeneratePairError("witness requested for identical parent sets")
    w: Dict[int, int] = {}

    def singles(mask, value):
        mm = mask
        while mm:
            low = mm & -mm
            w[low] = w.get(low, 0) + value
            mm ^= low

    d12 = pa1 & ~pa2
    d21 = pa2 & ~pa1
    if not d12 or not d21:
        lo, hi = (pa1, pa2) if not d12 else (pa2, pa1)
        extra = hi & ~lo
        if extra.bit_count() > 1:
            singles(lo, 1)
            singles(universe & ~lo, -1)
            w[extra] = w.get(extra, 0) + extra.bit_count()
        else:
            singles(lo, 1)
            singles(universe & ~hi, -1)
    else:
        inter = pa1 & pa2
        union = pa1 | pa2
        n12, n21 = d12.bit_count(), d21.bit_count()
        if n12 > 1 and n21 > 1:
            singles(inter, 1)
            singles(universe & ~inter, -1)
            w[d12] = w.get(d12, 0) + n12 + 1
            w[d21] = w.get(d21, 0) + n21 + 1
            w[d12 | d21] = w.get(d12 | d21, 0) - 2
        elif n12 == 1 and n21 == 1:
            singles(union, 1)
            singles(universe & ~union, -1)
            w[d12 | d21] = w.get(d12 | d21, 0) - 2
        else:
            base, large = (pa1, d21) if n12 == 1 else (pa2, d12)
            singles(base, 1)
            singles(universe & ~base, -1)
            w[large] = w.get(large, 0) + large.bit_count() + 1
            w[d12 | d21] = w.get(d12 | d21, 0) - 2
    return {mask: val for mask, val in w.items() if val}


def witness_block_value(w: Dict[int, int], parent_mask: int) -> int:
    """Evaluate a sparse block cost vector on the vertex with the given parents."""
    return sum(val for mask, val in w.items() if (mask & parent_mask) == mask)
