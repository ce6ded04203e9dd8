import json
import subprocess
import sys

import pydot
import pytest

from disjoint_kit.cli import main
from disjoint_kit.fincat import category_from_json
from disjoint_kit.disjoint import table_from_json


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def setwise_doc():
    from importlib import resources

    return json.loads((resources.files("disjoint_kit") / "data" / "setwise_small.json").read_text())


def test_verify_axioms_bundled(capsys):
    code, out, _ = run(capsys, "verify-axioms", "setwise_small.json")
    assert code == 0
    assert json.loads(out)["status"] == "pass"


def test_seeded_violation_witness_revalidates(tmp_path, capsys):
    doc = setwise_doc()
    # keep one related pair of points into object 1 but drop every pair that the axioms force from it
    C = category_from_json(doc["body"]["category"])
    pts = [m for m in range(C.n_morphisms) if C.source[m] == 0 and C.target[m] == 2]
    doc["body"]["pairs"] = [[pts[0], pts[1]], [pts[1], pts[0]], [8, 8]]
    code, out, _ = run(capsys, "verify-axioms", write(tmp_path, "bad.json", doc))
    assert code == 1
    rep = json.loads(out)
    fail = next(c for c in rep["checks"] if c["status"] == "fail")
    law, f1, f2, *rest = fail["witnesses"][0]
    T = table_from_json(C, doc["body"]["pairs"])
    if law == "precomposition":
        g1, g2 = rest
        assert T.related(f1, f2) and not T.related(C.compose(f1, g1), C.compose(f2, g2))
    else:
        pytest.fail(f"unexpected law {law}")


def test_empty_category_passes(tmp_path, capsys):
    doc = {"kind": "disjointness", "version": "1", "body": {"category": {"objects": [], "morphisms": [], "identities": [], "composition": []}, "pairs": []}}
    code, out, _ = run(capsys, "verify-axioms", write(tmp_path, "empty.json", doc))
    assert code == 0


def test_parse_error_reports_line(tmp_path, capsys):
    code, _, err = run(capsys, "verify-axioms", write(tmp_path, "broken.json", '{\n  "kind": "disjointness",\n  "version": 1,,\n}'))
    assert code == 2
    assert "line 3" in err


def test_field_diagnostics(tmp_path, capsys):
    code, _, err = run(capsys, "verify-axioms", write(tmp_path, "v.json", {"kind": "disjointness", "version": "2", "body": {}}))
    assert code == 2 and "version" in err
    code, _, err = run(capsys, "verify-axioms", write(tmp_path, "k.json", {"kind": "causal_patch", "version": "1", "body": {}}))
    assert code == 2 and "kind" in err
    code, _, err = run(capsys, "verify-axioms", write(tmp_path, "m.json", {"kind": "disjointness", "version": "1"}))
    assert code == 2 and "body" in err


def test_overlap_monics_are_injective(capsys):
    code, out, _ = run(capsys, "overlap-monics", "setwise_small.json")
    rep = json.loads(out)
    C = category_from_json(setwise_doc()["body"]["category"])
    # labels spell out each map's values
    injective = [m for m in range(C.n_morphisms) if len(set(C.labels[m])) == len(C.labels[m])]
    assert code == 0 and rep["overlap_monics"] == injective


def test_all_related_table_lists_everything(tmp_path, capsys):
    doc = setwise_doc()
    C = category_from_json(doc["body"]["category"])
    doc["body"]["pairs"] = [[a, b] for a in range(C.n_morphisms) for b in range(C.n_morphisms) if C.target[a] == C.target[b]]
    code, out, _ = run(capsys, "overlap-monics", write(tmp_path, "all.json", doc))
    assert json.loads(out)["overlap_monics"] == list(range(C.n_morphisms))


def test_dot_round_trip(tmp_path, capsys):
    dot = tmp_path / "cat.dot"
    run(capsys, "overlap-monics", "setwise_small.json", "--dot", str(dot))
    (graph,) = pydot.graph_from_dot_file(str(dot))
    C = category_from_json(setwise_doc()["body"]["category"])
    edges = graph.get_edges()
    assert len(graph.get_nodes()) == C.n_objects
    assert len(edges) == sum(not C.is_identity(m) for m in range(C.n_morphisms))
    blue = sum(e.get_attributes().get("color") == "blue" for e in edges)
    assert blue == sum(len(set(C.labels[m])) == len(C.labels[m]) for m in range(C.n_morphisms) if not C.is_identity(m))


def test_causal_classify_block(tmp_path, capsys):
    doc = {"kind": "causal_patch", "version": "1", "body": {"block": [5, 5]}}
    code, out, _ = run(capsys, "causal", write(tmp_path, "b.json", doc), "--classify", "--cauchy", "--convex", "[[0,0],[2,2]]")
    rep = json.loads(out)
    assert rep["classification"] == ["globally_hyperbolic"]
    assert rep["convex"]["convex"] is False
    assert rep["cauchy"][0]


def test_causal_theorems_punctured(capsys, tmp_path):
    hasse = tmp_path / "h.dot"
    code, out, _ = run(capsys, "causal", "punctured_block.json", "--theorems", "--dot", str(hasse))
    rep = json.loads(out)
    assert code == 0
    a = next(c for c in rep["checks"] if c["name"] == "A_closure")
    assert a["status"] == "pass" and a["checked"] > 0
    assert [[0, -1], [0, 1]] in rep["closure_gap_pairs"][0]
    assert pydot.graph_from_dot_file(str(hasse))


def test_chiral_fermion_linear(tmp_path, capsys):
    out_file = tmp_path / "field.json"
    code, out, _ = run(capsys, "chiral", "block5.json", "--fermion", "fermion_linear.json", "--output", str(out_file), "--classify")
    assert code == 0
    field = json.loads(out_file.read_text())["body"]["field"]
    assert len(field) == 25 and all(v == xm for xm, _, v in field)
    assert json.loads(out)["classification"][0] == "globally_hyperbolic"


def test_chiral_quotient_and_precondition(tmp_path, capsys):
    q = tmp_path / "q.json"
    code, _, _ = run(capsys, "chiral", "block5.json", "--quotient", str(q))
    assert code == 0
    bundles = json.loads(q.read_text())["body"]["bundles"]
    assert [len(b["chains"][0]) for b in bundles] == [5, 5]
    cyl = {"kind": "chiral_patch", "version": "1", "body": {"points": [[i, j] for i in range(3) for j in range(2)], "periods": [3, None]}}
    code, _, err = run(capsys, "chiral", write(tmp_path, "cyl.json", cyl), "--quotient", str(q))
    assert code == 2 and "periodic" in err


def test_chiral_fermion_not_cauchy(tmp_path, capsys):
    data = write(tmp_path, "d.json", {"points": [[0, 0]], "values": [1]})
    code, _, err = run(capsys, "chiral", "block5.json", "--fermion", data)
    assert code == 2 and "unvalued" in err


def test_chiral_theorems(capsys):
    code, out, _ = run(capsys, "chiral", "block5.json", "--theorems")
    rep = json.loads(out)
    assert code == 0 and all(c["status"] == "pass" for c in rep["checks"])


def small_manifest(members):
    return {"kind": "suite", "version": "1", "body": {"members": members}}


def test_empty_manifest(tmp_path, capsys):
    code, out, _ = run(capsys, "suite", write(tmp_path, "m.json", small_manifest([])))
    rep = json.loads(out)
    assert code == 0 and rep["totals"]["checks"] == 0


def test_seeded_failing_manifest(tmp_path, capsys):
    members = [{"name": "ok", "suite": "setwise", "params": {"instances": 3}}, {"name": "bad", "suite": "no_such_suite"}]
    code, out, _ = run(capsys, "suite", write(tmp_path, "m.json", small_manifest(members)))
    rep = json.loads(out)
    assert code == 1
    assert [m["status"] for m in rep["members"]] == ["pass", "fail"]
    assert rep["totals"]["failed_checks"] == 1


def test_suite_output_files_and_text(tmp_path, capsys):
    members = [{"name": "s", "suite": "fermion", "params": {"n": 3}}]
    rep_file, timing = tmp_path / "r.json", tmp_path / "t.json"
    code, out, _ = run(capsys, "--format", "text", "suite", write(tmp_path, "m.json", small_manifest(members)), "--output", str(rep_file), "--timing", str(timing))
    assert code == 0 and out.startswith("suite: pass")
    assert "s" in json.loads(timing.read_text())["members"]
    assert json.loads(rep_file.read_text())["status"] == "pass"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "disjoint_kit", "verify-axioms", "setwise_small.json"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["status"] == "pass"

