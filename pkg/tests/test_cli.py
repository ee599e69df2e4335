import json
import subprocess
import sys
from math import comb

import pytest

from extremal_geom.cli import EXIT_EXHAUSTED, EXIT_INVARIANT, EXIT_OK, EXIT_PARAM, main
from extremal_geom.geom import canonicalize_line, lines_intersect


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_vectors(capsys):
    code, doc = run_json(capsys, "vectors", "--N", "30", "--seed", "7")
    assert code == EXIT_OK
    rep = doc["report"]
    size = len(doc["direction_set"]["elements"])
    assert rep["triples_checked"] == comb(size, 3) == rep["triples_expected"]
    assert rep["violations"] == 0 and rep["ok"]
    assert doc["config"]["N"] == 30 and doc["config"]["seed"] == 7


def test_vectors_is_byte_identical(capsys):
    a = run(capsys, "vectors", "--N", "30", "--seed", "7")[1]
    b = run(capsys, "vectors", "--N", "30", "--seed", "7")[1]
    assert a == b


def test_vectors_bad_parameter(capsys):
    code, _, err = run(capsys, "vectors", "--N", "1")
    assert code == EXIT_PARAM
    assert "parameter error" in err


def test_vectors_exhausted(capsys):
    code, _, err = run(capsys, "vectors", "--N", "30", "--epsilon", "99/100")
    assert code == EXIT_EXHAUSTED and "exhausted" in err


def test_lines_tiny_instance(capsys):
    code, doc = run_json(capsys, "lines", "--N", "4", "--k", "16", "--r", "2", "--p", "0.1", "--seed", "1")
    assert code == EXIT_OK
    assert doc["stats"]["triangles_H_prime"] == 0
    assert all(doc["checks"].values())
    assert doc["config"]["p"] == "1/10"


def test_lines_bad_probability(capsys):
    code, _, _ = run(capsys, "lines", "--N", "4", "--k", "16", "--r", "2", "--p", "1.5")
    assert code == EXIT_PARAM


def test_lines_full_graph_matches_oracle(capsys, tmp_path):
    code, doc = run_json(
        capsys, "lines", "--N", "10", "--k", "6", "--r", "2", "--p", "1/2", "--emit-full-graph", "--out", str(tmp_path)
    )
    assert code == EXIT_OK and doc["checks"]["full_graph_oracle"]
    family = json.loads((tmp_path / "lines.json").read_text())
    lines = [canonicalize_line(item["base"], item["dir"]) for item in family]
    edges = {tuple(e) for e in doc["G"]["edge_list"]}
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            assert ((i, j) in edges) == lines_intersect(lines[i], lines[j])
    text = (tmp_path / "G.edgelist").read_text()
    assert {tuple(map(int, ln.split())) for ln in text.splitlines()} == edges
    assert (tmp_path / "H_prime.edgelist").exists()


def test_boxes_desk_instance(capsys):
    code, doc = run_json(capsys, "boxes", "--d", "2", "--k", "3", "--s", "4", "--n", "100")
    assert code == EXIT_OK
    assert doc["k22"] == "none"
    assert doc["degree_histogram"] == {"4": 100}


def test_boxes_van_der_corput(capsys):
    code, doc = run_json(capsys, "boxes", "--van-der-corput", "8")
    assert code == EXIT_OK
    vdc = doc["van_der_corput"]
    assert vdc["ok"] and vdc["rectangles_checked"] == 9 * 256


def test_boxes_separation(capsys):
    code, doc = run_json(capsys, "boxes", "--d", "3", "--k", "2", "--s", "9", "--n", "500", "--verify-separation")
    assert code == EXIT_OK
    assert doc["separation"]["result"] == "pass"
    assert doc["checks"]["separation"] and doc["checks"]["embedding_order"]


def test_boxes_csv_view_and_files(capsys, tmp_path):
    code, out, _ = run(capsys, "boxes", "--d", "2", "--k", "3", "--s", "4", "--n", "20", "--format", "csv", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert out == "degree,count\n4,20\n"
    assert (tmp_path / "degrees.csv").read_text() == out
    pts = json.loads((tmp_path / "points.json").read_text())
    assert pts["extent"] == 64 and len(pts["points"]) == 20
    assert len((tmp_path / "incidence.edgelist").read_text().splitlines()) == 80


def test_delaunay_report(capsys):
    code, doc = run_json(capsys, "delaunay", "--d", "3", "--k", "2", "--s", "4", "--seed", "3", "--no-containers")
    assert code == EXIT_OK
    rep = doc["report"]
    assert rep["subgraph_check"] and rep["alpha_D_le_alpha_GP"]
    assert rep["alpha_D"] <= rep["alpha_GP"]
    for key in ("params", "N", "n", "p", "triples_removed", "alpha_GP", "alpha_D", "container_count", "container_max_size", "theorem_bound_nominal"):
        assert key in rep


def test_delaunay_planar_and_deterministic(capsys):
    argv = ("delaunay", "--d", "2", "--k", "3", "--s", "4", "--divisor", "1", "--seed", "2", "--no-containers")
    code, a, _ = run(capsys, *argv)
    assert code == EXIT_OK
    assert run(capsys, *argv)[1] == a


def test_delaunay_edgelist_view(capsys, tmp_path):
    argv = ("delaunay", "--seed", "1", "--no-containers", "--out", str(tmp_path))
    code, out, _ = run(capsys, *argv, "--format", "edgelist")
    assert code == EXIT_OK
    assert out == (tmp_path / "D.edgelist").read_text()
    assert json.loads((tmp_path / "P.json").read_text())["denominator_exponent"] == 53


def test_missing_view_is_parameter_error(capsys):
    code, _, err = run(capsys, "vectors", "--N", "10", "--format", "csv")
    assert code == EXIT_PARAM and "no csv view" in err


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("EXTREMAL_GEOM_SEED", "7")
    env_out = run(capsys, "vectors", "--N", "30")[1]
    monkeypatch.delenv("EXTREMAL_GEOM_SEED")
    assert env_out == run(capsys, "vectors", "--N", "30", "--seed", "7")[1]
    monkeypatch.setenv("EXTREMAL_GEOM_SEED", "seven")
    assert run(capsys, "vectors", "--N", "30")[0] == EXIT_PARAM


def test_verify_all_fault_exit(capsys):
    code, out, err = run(capsys, "verify-all", "--inject-fault", "boxes.k22-free")
    assert code == EXIT_INVARIANT
    assert "first failing invariant: boxes.k22-free" in err
    assert json.loads(out)["first_failure"] == "boxes.k22-free"


def test_verify_all_unknown_fault(capsys):
    assert run(capsys, "verify-all", "--inject-fault", "nope")[0] == EXIT_PARAM


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "extremal_geom", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "extremal-geom" in out.stdout


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["boxes", "--strategy", "magic"])
    assert info.value.code == 2
