import math
import random
from fractions import Fraction

import pytest

from cimset.errors import DomainError, FormatError
from cimset.graphs import (FamilySpec, NodeOrdering, ParentMap, diagnosis_family,
                           enumerate_family, full_ordered_family)
from cimset.imsets import characteristic_imset, coordinate_index
from cimset.scoring import (Dataset, ScoreTable, build_score_table, data_vector_dot,
                            load_csv, local_score, mobius_data_vector, score_gt,
                            score_graph, score_table_from_json, score_table_to_json,
                            table_graph_score)


# --- comparator -----------------------------------------------------------

def test_score_gt_exact():
    assert score_gt(1, 0)
    assert not score_gt(1, 1)
    assert not score_gt(0, 1)
    assert score_gt(Fraction(1, 3), Fraction(333, 1000))
    assert not score_gt(Fraction(1, 3), Fraction(1, 3))


def test_score_gt_float_snap():
    assert not score_gt(1.0 + 1e-13, 1.0)
    assert score_gt(1.0 + 1e-9, 1.0)
    assert not score_gt(1.0, 1.0 + 1e-9)
    # mixing one float in forces the snapped comparison
    assert not score_gt(1, 1.0 + 1e-13)


# --- datasets -------------------------------------------------------------

def _ab_dataset():
    o = NodeOrdering(("a", "b"))
    return Dataset(o, (2, 2), ((0, 0), (0, 0), (0, 1), (1, 1)))


def test_dataset_validation():
    o = NodeOrdering(("a", "b"))
    with pytest.raises(DomainError):
        Dataset(o, (2,), ((0, 0),))
    with pytest.raises(DomainError):
        Dataset(o, (2, 0), ((0, 0),))
    with pytest.raises(DomainError):
        Dataset(o, (2, 2), ())
    with pytest.raises(DomainError):
        Dataset(o, (2, 2), ((0, 2),))
    with pytest.raises(DomainError):
        Dataset(o, (2, 2), ((0,),))
    assert _ab_dataset().n_rows == 4


def test_load_csv_roundtrip(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("b,junk,a\nyes,1,x\nno,2,y\nyes,3,x\n")
    o = NodeOrdering(("a", "b"))
    data = load_csv(p, o)
    # column order follows the ordering, not the file; states by first appearance
    assert data.rows == ((0, 0), (1, 1), (0, 0))
    assert data.cardinalities == (2, 2)


def test_load_csv_errors(tmp_path):
    o = NodeOrdering(("a", "b"))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(FormatError):
        load_csv(empty, o)
    noheader = tmp_path / "missing.csv"
    noheader.write_text("a,c\n1,2\n")
    with pytest.raises(FormatError, match="column 'b'"):
        load_csv(noheader, o)
    short = tmp_path / "short.csv"
    short.write_text("a,b\n1\n")
    with pytest.raises(FormatError, match="row 2"):
        load_csv(short, o)
    blank = tmp_path / "blank.csv"
    blank.write_text("a,b\n1,\n")
    with pytest.raises(FormatError, match="row 2"):
        load_csv(blank, o)
    nodata = tmp_path / "nodata.csv"
    nodata.write_text("a,b\n")
    with pytest.raises(FormatError, match="no data rows"):
        load_csv(nodata, o)


# --- local scores -----------------------------------------------------------

def test_local_score_ll_by_hand():
    data = _ab_dataset()
    # child b with parent a: counts (2,1) under a=0 and (1,) under a=1
    got = local_score(data, 1, 0b01, "ll")
    want = (2 * math.log(2) + 1 * math.log(1) - 3 * math.log(3)) + (
        1 * math.log(1) - 1 * math.log(1))
    assert got == pytest.approx(want, rel=1e-12)
    # child b with no parents: counts (2, 2) out of 4
    got0 = local_score(data, 1, 0, "ll")
    assert got0 == pytest.approx(4 * math.log(2) - 4 * math.log(4), rel=1e-12)


def test_local_score_penalties():
    data = _ab_dataset()
    ll = local_score(data, 1, 0b01, "ll")
    # q = card(a) = 2 parent configurations, r - 1 = 1 free parameter each
    assert local_score(data, 1, 0b01, "bic") == pytest.approx(
        ll - math.log(4) / 2 * 2, rel=1e-12)
    assert local_score(data, 1, 0b01, "aic") == pytest.approx(ll - 2, rel=1e-12)


def test_local_score_guards():
    data = _ab_dataset()
    with pytest.raises(DomainError):
        local_score(data, 0, 0b10, "ll")  # parent after child
    with pytest.raises(DomainError):
        local_score(data, 1, 0, "bayes")


def test_perfect_dependence_prefers_the_parent():
    o = NodeOrdering(("a", "b"))
    rows = tuple((i & 1, i & 1) for i in range(8))
    data = Dataset(o, (2, 2), rows)
    assert score_gt(local_score(data, 1, 1, "bic"), local_score(data, 1, 0, "bic"))


# --- score tables -----------------------------------------------------------

def test_score_table_validation():
    spec = diagnosis_family(2, 1)
    with pytest.raises(DomainError):
        ScoreTable(spec, ({0: 0.0}, {0: 0.0}))
    with pytest.raises(DomainError):
        ScoreTable(spec, ({0: 0.0}, {0: 0.0}, {0: 0.0, 1: 1.0}))
    with pytest.raises(DomainError):
        ScoreTable(spec, ({0: 0.0}, {0: 0.0},
                          {0: 0.0, 1: 1.0, 2: 2.0, 3: math.nan}))
    table = ScoreTable(spec, ({0: 0.0}, {0: 0.0}, {0: 0.0, 1: 1.0, 2: 2.0, 3: 3.0}))
    assert table.local(2, 0b10) == 2.0
    with pytest.raises(DomainError):
        table.local(2, 0b100)


def test_build_table_and_graph_score():
    o = NodeOrdering(("a", "b"))
    data = _ab_dataset()
    spec = full_ordered_family(o)
    table = build_score_table(data, spec, "ll")
    g = ParentMap(o, (0, 0b01))
    assert table_graph_score(table, g) == pytest.approx(
        local_score(data, 0, 0, "ll") + local_score(data, 1, 1, "ll"), rel=1e-12)
    other = NodeOrdering(("x", "y"))
    with pytest.raises(DomainError):
        build_score_table(data, full_ordered_family(other), "ll")


def test_score_table_json_roundtrip():
    spec = diagnosis_family(2, 1)
    table = ScoreTable(spec, ({0: 0}, {0: Fraction(1, 3)},
                              {0: 0.5, 1: 1, 2: Fraction(-7, 2), 3: 3}),
                       criterion="custom")
    obj = score_table_to_json(table)
    assert obj["criterion"] == "custom"
    assert any(isinstance(e["score"], str) for e in obj["scores"])
    back = score_table_from_json(obj)
    assert back.spec == spec
    for i in range(3):
        for p in spec.iter_admissible(i):
            assert back.local(i, p) == table.local(i, p)
            assert type(back.local(i, p)) is type(table.local(i, p))
    with pytest.raises(FormatError):
        score_table_from_json({"scores": []})
    bad = dict(obj)
    bad["scores"] = obj["scores"][:-1]
    with pytest.raises(FormatError):
        score_table_from_json(bad)


# --- block objective ---------------------------------------------------------

def _random_table(spec, rng, exact=True):
    entries = []
    for i in range(spec.ordering.n):
        if exact:
            cell = {p: Fraction(rng.randrange(-400, 400), rng.randrange(1, 7))
                    for p in spec.iter_admissible(i)}
        else:
            cell = {p: rng.uniform(-40, 40) for p in spec.iter_admissible(i)}
        entries.append(cell)
    return ScoreTable(spec, tuple(entries))


def test_mobius_identity_exact_whole_family():
    rng = random.Random(11)
    for spec in (diagnosis_family(2, 2), full_ordered_family(("a", "b", "c", "d"))):
        idx = coordinate_index(spec)
        table = _random_table(spec, rng, exact=True)
        dv = mobius_data_vector(table, idx)
        for g in enumerate_family(spec):
            assert score_graph(dv, g) == table_graph_score(table, g)
            c = characteristic_imset(g, idx)
            assert dv.s_total - data_vector_dot(dv, c) == score_graph(dv, g)


def test_mobius_identity_with_floor():
    o = NodeOrdering(("a", "b", "c", "d"))
    spec = FamilySpec(o, (0, 0, 0, 0b10), (0, 0b01, 0b11, 0b111))
    rng = random.Random(12)
    idx = coordinate_index(spec)
    table = _random_table(spec, rng, exact=True)
    dv = mobius_data_vector(table, idx)
    # values live only on minimal lifts: subsets containing the floor
    for block in idx.blocks:
        floor = spec.floor[block.child]
        subs = idx.block_subsets(block.child)
        for j in range(block.size):
            s = int(subs[j])
            if s & floor != floor or s == floor:
                assert dv.values[block.offset + j] == 0
    for g in enumerate_family(spec):
        assert score_graph(dv, g) == table_graph_score(table, g)


def test_mobius_identity_float():
    spec = diagnosis_family(3, 1)
    idx = coordinate_index(spec)
    rng = random.Random(13)
    table = _random_table(spec, rng, exact=False)
    dv = mobius_data_vector(table, idx)
    for g in enumerate_family(spec):
        assert score_graph(dv, g) == pytest.approx(table_graph_score(table, g),
                                                   rel=1e-9, abs=1e-9)


def test_data_vector_guards():
    spec = diagnosis_family(2, 1)
    idx = coordinate_index(spec)
    other_idx = coordinate_index(diagnosis_family(2, 2))
    table = ScoreTable(spec, ({0: 0}, {0: 0}, {0: 0, 1: 1, 2: 2, 3: 3}))
    with pytest.raises(DomainError):
        mobius_data_vector(table, other_idx)
    dv = mobius_data_vector(table, idx)
    g_out = ParentMap(diagnosis_family(2, 2).ordering, (0, 0, 0, 0))
    with pytest.raises(DomainError):
        score_graph(dv, g_out)
