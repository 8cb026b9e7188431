import random
from fractions import Fraction

import pytest

from cimset.subsets import (bits_of, combination_rank, compress, expand, graded_rank,
                            iter_graded_subsets, iter_submasks, mask_of,
                            mobius_subsets_inplace, mobius_supersets_inplace,
                            zeta_subsets_inplace, zeta_supersets_inplace)


def test_bits_and_mask_roundtrip():
    assert bits_of(0) == []
    assert bits_of(0b1011) == [0, 1, 3]
    assert mask_of([0, 1, 3]) == 0b1011
    assert mask_of([]) == 0


def test_graded_order_small():
    # cardinality first, then lexicographic on sorted members
    got = list(iter_graded_subsets(0b111))
    assert got == [0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]
    assert list(iter_graded_subsets(0b111, include_empty=True))[0] == 0
    # works on a sparse universe
    got = list(iter_graded_subsets(0b1010))
    assert got == [0b0010, 0b1000, 0b1010]


def test_graded_rank_matches_iteration():
    universe = 0b11011
    for j, s in enumerate(iter_graded_subsets(universe)):
        assert graded_rank(s, universe) == j


def test_graded_rank_rejects_bad_input():
    with pytest.raises(ValueError):
        graded_rank(0, 0b11)
    with pytest.raises(ValueError):
        graded_rank(0b100, 0b11)


def test_combination_rank_full_sweep():
    from itertools import combinations
    f = 6
    expect = 0
    for k in range(1, f + 1):
        for combo in combinations(range(f), k):
            # rank is within the k-block, not across cardinalities
            assert combination_rank(combo, f) == expect
            expect += 1
        expect = 0


def test_submasks_complete():
    m = 0b10110
    subs = set(iter_submasks(m))
    assert len(subs) == 8
    assert all(s & ~m == 0 for s in subs)
    assert 0 in subs and m in subs
    assert set(iter_submasks(0)) == {0}


def test_compress_expand_roundtrip():
    universe = 0b101101
    for s in iter_submasks(universe):
        c = compress(s, universe)
        assert expand(c, universe) == s
    assert compress(0b100, 0b101) == 0b10


def test_zeta_mobius_subsets_inverse():
    rng = random.Random(7)
    k = 6
    a = [rng.randrange(-50, 50) for _ in range(1 << k)]
    b = list(a)
    zeta_subsets_inplace(b, k)
    # zeta really is the subset sum
    for m in range(1 << k):
        assert b[m] == sum(a[s] for s in iter_submasks(m))
    mobius_subsets_inplace(b, k)
    assert b == a


def test_zeta_mobius_supersets_inverse():
    rng = random.Random(8)
    k = 6
    a = [Fraction(rng.randrange(-50, 50), rng.randrange(1, 9)) for _ in range(1 << k)]
    b = list(a)
    zeta_supersets_inplace(b, k)
    full = (1 << k) - 1
    for m in range(1 << k):
        assert b[m] == sum(a[m | (t & ~m)] for t in iter_submasks(full) if t & ~m == t)
    mobius_supersets_inplace(b, k)
    assert b == a


def test_transforms_stay_exact_with_fractions():
    a = [Fraction(1, 3), Fraction(1, 7), Fraction(2, 5), Fraction(-1, 11)]
    b = list(a)
    zeta_subsets_inplace(b, 2)
    mobius_subsets_inplace(b, 2)
    assert b == a and all(isinstance(v, Fraction) for v in b)
