import csv
import json

import pytest

from wlforge.cli import main
from wlforge.io import load_edge_list
from wlforge.graph import product_graph

from conftest import DATA

C6, TWO_C3, P3 = str(DATA / "c6.txt"), str(DATA / "two_c3.txt"), str(DATA / "p3.txt")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_distinguish_c6_vs_two_triangles(capsys):
    code, out, _ = run(capsys, "distinguish", "--a", C6, "--b", TWO_C3)
    assert code == 0 and out.strip() == "not distinguished"


def test_distinguish_with_kwl_writes_verdict(capsys, tmp_path):
    code, out, _ = run(capsys, "distinguish", "--a", C6, "--b", TWO_C3, "--refiner", "kwl", "--k", "3", "--variant", "set-split", "--out", tmp_path / "v.json")
    assert code == 0 and out.startswith("distinguished")
    v = json.loads((tmp_path / "v.json").read_text())
    assert v["distinguished"] and v["config"]["command"] == "distinguish"


def test_color_outputs(capsys, tmp_path):
    code, _, _ = run(capsys, "color", "--input", P3, "--iters", "2", "--out", tmp_path)
    assert code == 0
    rows = list(csv.reader((tmp_path / "colors.csv").open()))
    assert rows[0] == ["element", "t0", "t1", "t2"]
    assert [r[2] for r in rows[1:]] == ["0", "1", "0"]
    hist = json.loads((tmp_path / "histogram.json").read_text())
    assert hist["num_colors"] == [1, 2, 2]
    assert hist["config"]["params"]["iters"] == 2


def test_color_kwl(capsys, tmp_path):
    code, _, _ = run(capsys, "color", "--input", C6, "--refiner", "kwl", "--k", "2", "--variant", "set-local", "--out", tmp_path)
    assert code == 0
    rows = list(csv.reader((tmp_path / "colors.csv").open()))
    assert len(rows) == 1 + 15 and rows[1][0] == "0 1"


def test_kernel_outputs(capsys, tmp_path):
    code, _, _ = run(capsys, "kernel", "--dataset", DATA / "toy", "--iters", "2", "--normalize", "--out", tmp_path)
    assert code == 0
    rows = list(csv.reader((tmp_path / "gram.csv").open()))
    assert rows == [["1", "2"], ["1.0", "1.0"], ["1.0", "1.0"]]
    feats = json.loads((tmp_path / "features.json").read_text())
    assert feats["ids"] == ["1", "2"]


def test_product(capsys, tmp_path):
    out = tmp_path / "prod.txt"
    code, _, _ = run(capsys, "product", "--input", C6, "--k", "2", "--out", out)
    assert code == 0
    assert load_edge_list(out) == product_graph(load_edge_list(C6), 2)
    side = json.loads(out.with_name("prod.txt.json").read_text())
    assert side["nodes"][0] == [0, 1] and len(side["nodes"]) == 15


def test_simulate_sign_and_relu(capsys, tmp_path):
    for act in ("sign", "relu"):
        code, out, _ = run(capsys, "simulate", "--input", DATA / "labeled.txt", "--activation", act, "--out", tmp_path / act)
        assert code == 0 and out.strip() == "equivalent at all t"
        rep = json.loads((tmp_path / act / "report.json").read_text())
        assert rep["ok"] and all(rep["equivalent"])
        assert (tmp_path / act / "weights.json").exists()


def test_gnn_command(capsys, tmp_path):
    code, out, _ = run(capsys, "gnn", "--dataset", DATA / "count", "--arch", "1-2", "--epochs", "3", "--hidden", "8", "--out", tmp_path)
    assert code == 0 and out.startswith("epoch 3")
    lines = (tmp_path / "loss.csv").read_text().splitlines()
    assert lines[0] == "epoch,loss,accuracy" and len(lines) == 5
    model = json.loads((tmp_path / "model.json").read_text())
    assert model["run"]["params"]["model"]["dims"] == [1, 2]


def test_gnn_regress(capsys, tmp_path):
    code, _, _ = run(capsys, "gnn", "--dataset", DATA / "toy", "--task", "regress", "--epochs", "2", "--hidden", "4", "--out", tmp_path)
    assert code == 0


def test_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "thm1", "--trials", "10", "--out", tmp_path / "r.json")
    assert code == 0 and out.strip() == "thm1: 10/10 PASS"
    assert json.loads((tmp_path / "r.json").read_text())["passed"] == 10


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["color", "--input", P3, "--out", "x", "--unknown"],
        ["verify", "--suite", "nope"],
        ["gnn", "--dataset", str(DATA / "toy"), "--arch", "1-3", "--out", "x"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_invalid_combination_is_usage_error(capsys, tmp_path):
    assert run(capsys, "product", "--input", P3, "--k", "5", "--out", tmp_path / "p")[0] == 1
    assert run(capsys, "color", "--input", P3, "--refiner", "kwl", "--k", "7", "--out", tmp_path)[0] == 1


def test_format_errors(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1 1\n0 0\n1 0\n0 0\n")
    code, _, err = run(capsys, "color", "--input", bad, "--out", tmp_path)
    assert code == 2 and "bad.txt:4" in err
    assert run(capsys, "color", "--input", tmp_path / "missing.txt", "--out", tmp_path)[0] == 2


def test_property_failure_exit_code(capsys, tmp_path):
    # the literal concatenation construction breaks row independence on this graph
    from wlforge.graph import Graph, write_edge_list

    g = tmp_path / "g.txt"
    g.write_text(write_edge_list(Graph(8, [(0, 2), (4, 3), (1, 6), (5, 7)], [0, 0, 0, 0, 1, 1, 1, 1])))
    code, out, _ = run(capsys, "simulate", "--input", g, "--construction", "concat", "--out", tmp_path / "s")
    assert code == 3 and out.startswith("NOT equivalent")
