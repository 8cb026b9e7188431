import json
from pathlib import Path

import pytest

import cimset.cli as cli
from cimset.cli import main
from cimset.graphs import (diagnosis_family, family_to_json, graph_to_json,
                           ParentMap)

FIX = str(Path(__file__).resolve().parent.parent / "fixtures")


def _write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def diag21(tmp_path):
    spec = diagnosis_family(2, 1)
    fam = _write_json(tmp_path / "family.json", family_to_json(spec))
    g = ParentMap(spec.ordering, (0, 0, 0b01))
    graph = _write_json(tmp_path / "graph.json", graph_to_json(g))
    return spec, fam, graph


def test_imset_text(diag21, capsys):
    _, fam, graph = diag21
    assert main(["imset", "--family", fam, "--graph", graph]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["b1 a1 1", "b1 a2 0", "b1 a1,a2 0"]


def test_imset_json_and_full(diag21, capsys):
    _, fam, graph = diag21
    assert main(["imset", "--family", fam, "--graph", graph, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["coordinates"][0] == {"child": "b1", "subset": ["a1"], "value": 1}
    assert main(["imset", "--family", fam, "--graph", graph, "--full"]) == 0
    lines = capsys.readouterr().out.splitlines()
    # ambient sets of size >= 2 over 3 nodes: a1,a2 / a1,b1 / a2,b1 / a1,a2,b1
    assert lines == ["a1,a2 0", "a1,b1 1", "a2,b1 0", "a1,a2,b1 0"]


def test_facets_text(diag21, capsys):
    _, fam, _ = diag21
    assert main(["facets", "--family", fam]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4
    assert out[0] == "b1 s={}: 1 - x[a1] - x[a2] + x[a1,a2] >= 0"
    assert out[-1] == "b1 s={a1,a2}: + x[a1,a2] >= 0"


def test_facets_limit_and_child(diag21, capsys):
    _, fam, _ = diag21
    assert main(["facets", "--family", fam, "--child", "b1", "--limit", "2"]) == 0
    captured = capsys.readouterr()
    assert len(captured.out.splitlines()) == 2
    assert "row limit" in captured.err
    assert main(["facets", "--family", fam, "--child", "zz"]) == 1


def test_facets_json(diag21, capsys):
    _, fam, _ = diag21
    assert main(["facets", "--family", fam, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc[0]["child"] == "b1"
    assert doc[0]["rows"][0]["s"] == []
    assert {"subset": [], "coef": 1} in doc[0]["rows"][0]["terms"]


def test_neighbors(diag21, capsys):
    _, fam, graph = diag21
    assert main(["neighbors", "--family", fam, "--graph", graph]) == 0
    captured = capsys.readouterr()
    assert len(captured.out.splitlines()) == 3
    assert "3 neighbors" in captured.err
    assert main(["neighbors", "--family", fam, "--graph", graph, "--count-only"]) == 0
    assert capsys.readouterr().out.strip() == "3"


def test_enumerate(diag21, capsys):
    _, fam, _ = diag21
    assert main(["enumerate", "--family", fam, "--format", "json"]) == 0
    captured = capsys.readouterr()
    assert len(captured.out.splitlines()) == 4
    assert "4 graphs" in captured.err
    assert main(["enumerate", "--family", fam, "--limit", "2"]) == 1
    assert "enumeration limit" in capsys.readouterr().err


def test_verify_all_pass(diag21, tmp_path, capsys):
    _, fam, _ = diag21
    certs = tmp_path / "certs.jsonl"
    assert main(["verify", "--family", fam, "--certificates", str(certs)]) == 0
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert [ln.split()[0] for ln in lines] == ["product", "dimension",
                                               "adjacency", "facets"]
    assert all("PASS" in ln for ln in lines)
    assert "family: 4 vertices" in captured.err
    recorded = [json.loads(ln) for ln in certs.read_text().splitlines()]
    assert all(c["verified"] for c in recorded)
    kinds = {c["kind"] for c in recorded}
    assert "facet" in kinds and {"adjacency", "non-adjacency"} & kinds


def test_verify_json_format(diag21, capsys):
    _, fam, _ = diag21
    assert main(["verify", "--family", fam, "--checks", "product,dimension",
                 "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [c["check"] for c in doc["checks"]] == ["product", "dimension"]
    assert all(c["pass"] for c in doc["checks"])


def test_verify_exit_2_on_falsified_claim(diag21, capsys, monkeypatch):
    _, fam, _ = diag21
    # force the closed-form adjacency rule to disagree with the oracle
    monkeypatch.setattr(cli, "are_neighbors", lambda *a, **k: False)
    assert main(["verify", "--family", fam, "--checks", "adjacency"]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_verify_unknown_check_and_size_guard(diag21, tmp_path, capsys):
    _, fam, _ = diag21
    assert main(["verify", "--family", fam, "--checks", "nonsense"]) == 1
    assert "unknown checks" in capsys.readouterr().err
    big = _write_json(tmp_path / "big.json",
                      family_to_json(diagnosis_family(4, 4)))
    assert main(["verify", "--family", big]) == 1
    assert "refuses families over" in capsys.readouterr().err


def test_learn_from_scores(capsys):
    assert main(["learn", "--scores", f"{FIX}/example_k2_forward.json",
                 "--method", "all", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["exact"]["graph"]["parents"][3] == ["a1", "a3"]
    assert doc["k2-forward"]["graph"]["parents"][3] == ["a2", "a3"]
    assert doc["exact"]["score"] == 12
    assert doc["k2-forward"]["score"] == 7


def test_learn_writes_graph(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["learn", "--scores", f"{FIX}/example_k2_forward.json",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["parents"][3] == ["a1", "a3"]
    assert "wrote exact graph" in capsys.readouterr().err


def test_learn_from_csv(capsys):
    assert main(["learn", "--data", f"{FIX}/binary_demo.csv",
                 "--family", f"{FIX}/diag_2_2.json",
                 "--criterion", "bic", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["exact"]["graph"]["parents"][2] == ["a1", "a2"]
    assert doc["exact"]["graph"]["parents"][3] == ["a1"]


def test_learn_max_parents(capsys):
    assert main(["learn", "--data", f"{FIX}/binary_demo.csv",
                 "--family", f"{FIX}/diag_2_2.json", "--max-parents", "1",
                 "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["exact"]["graph"]["parents"][2]) <= 1


def test_learn_flag_validation(capsys):
    assert main(["learn", "--scores", f"{FIX}/example_k2_forward.json",
                 "--data", f"{FIX}/binary_demo.csv"]) == 1
    assert "not both" in capsys.readouterr().err
    assert main(["learn", "--scores", f"{FIX}/example_k2_forward.json",
                 "--max-parents", "2"]) == 1
    assert "--max-parents applies only with --data" in capsys.readouterr().err
    assert main(["learn", "--data", f"{FIX}/binary_demo.csv"]) == 1
    assert "--data requires --family" in capsys.readouterr().err
    assert main(["learn"]) == 1
    capsys.readouterr()


def test_learn_rational_gate(capsys):
    assert main(["learn", "--scores", f"{FIX}/example_k2_forward.json",
                 "--rational"]) == 0
    capsys.readouterr()
    assert main(["learn", "--data", f"{FIX}/binary_demo.csv",
                 "--family", f"{FIX}/diag_2_2.json", "--rational"]) == 1
    assert "exact score table" in capsys.readouterr().err


def test_compare_k2(capsys):
    assert main(["compare-k2", "--scores", f"{FIX}/example_k2_forward.json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["gaps"]["k2-forward"] == 5
    assert doc["structural_hamming"]["k2-forward"] == 2
    assert doc["agreement"]["k2-forward"] == [True, True, True, False]
    assert main(["compare-k2", "--scores", f"{FIX}/example_k2_backward.json",
                 "--format", "text"]) == 0
    text = capsys.readouterr().out
    assert "gap k2-backward: 1" in text


def test_threads_flag_accepted(capsys):
    assert main(["learn", "--scores", f"{FIX}/example_k2_forward.json",
                 "--threads", "8"]) == 0
    capsys.readouterr()


def test_bad_arguments_exit_1(capsys):
    assert main(["imset", "--family", "nope.json"]) == 1
    capsys.readouterr()
    assert main(["frobnicate"]) == 1
    capsys.readouterr()


def test_missing_file_message(diag21, capsys):
    _, fam, _ = diag21
    assert main(["imset", "--family", fam, "--graph", "/does/not/exist.json"]) == 1
    assert "cannot read graph file" in capsys.readouterr().err
