import shutil

import pytest
from hypothesis import given, settings

from wlforge import FormatError
from wlforge.graph import Graph, path_graph, write_edge_list
from wlforge.io import Dataset, load_dataset, load_edge_list, load_tudataset, parse_edge_list, save_edge_list, write_tudataset

from conftest import DATA
from test_graph import graphs


def test_p3_example():
    g = load_edge_list(DATA / "p3.txt")
    assert g == path_graph(3)


@pytest.mark.parametrize(
    "text, line",
    [
        ("2 1 1\n0 0\n1 0\n0 0\n", 4),  # self-loop
        ("3 2 1\n0 0\n1 0\n2 0\n0 1\n1 0\n", 6),  # duplicate
        ("3 2 1\n0 0\n1 0\n2 0\n0 1\n", None),  # missing edge line
        ("3 1 1\n0 0\n1 0\n2 0\n0 1\n1 2\n", None),  # extra edge line
        ("2 0 1\n1 0\n0 0\n", 2),  # nodes out of order
        ("2 0 1\n0 0\n1 x\n", 3),  # not an integer
        ("2 0 1\n0 0\n1 1\n", 3),  # label outside the alphabet
    ],
)
def test_format_errors(text, line):
    with pytest.raises(FormatError) as e:
        parse_edge_list(text)
    if line is not None:
        assert e.value.line == line


def test_empty_file():
    with pytest.raises(FormatError):
        parse_edge_list("")


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=7, max_labels=3))
def test_edge_list_round_trip(g):
    text = write_edge_list(g)
    assert parse_edge_list(text) == g
    assert write_edge_list(parse_edge_list(text)) == text


def test_fixture_files_are_canonical(tmp_path):
    for name in ("p3.txt", "c6.txt", "two_c3.txt", "triangle_c4.txt", "labeled.txt"):
        save_edge_list(load_edge_list(DATA / name), tmp_path / name)
        assert (tmp_path / name).read_bytes() == (DATA / name).read_bytes()


def test_tudataset_two_triangles():
    ds = load_tudataset(DATA / "toy", "TOY")
    assert len(ds) == 2
    assert [g.n for g in ds.graphs] == [3, 3]
    assert all(g.num_edges == 3 for g in ds.graphs)
    assert ds.graph_labels == [1, -1]


def test_absent_node_labels_are_zero():
    ds = load_dataset(DATA / "toy")
    assert all(set(g.labels) == {0} for g in ds.graphs)
    assert ds.num_labels == 1


def test_crossing_edge(tmp_path):
    shutil.copytree(DATA / "toy", tmp_path / "toy")
    with open(tmp_path / "toy" / "TOY_A.txt", "a") as f:
        f.write("3, 4\n")
    with pytest.raises(FormatError) as e:
        load_tudataset(tmp_path / "toy", "TOY")
    assert e.value.line == 13


def test_indicator_inconsistency(tmp_path):
    shutil.copytree(DATA / "toy", tmp_path / "toy")
    (tmp_path / "toy" / "TOY_graph_indicator.txt").write_text("1\n2\n1\n2\n2\n2\n")
    with pytest.raises(FormatError):
        load_tudataset(tmp_path / "toy", "TOY")


def test_node_labels_compacted_and_round_trip(tmp_path):
    gs = [Graph(3, [(0, 1)], [5, 9, 5]), Graph(2, [(0, 1)], [9, 9])]
    d = tmp_path / "raw"
    d.mkdir()
    (d / "X_A.txt").write_text("1, 2\n2, 1\n4, 5\n5, 4\n")
    (d / "X_graph_indicator.txt").write_text("1\n1\n1\n2\n2\n")
    (d / "X_node_labels.txt").write_text("5\n9\n5\n9\n9\n")
    ds = load_tudataset(d, "X")
    assert [g.labels for g in ds.graphs] == [(0, 1, 0), (1, 1)]
    assert ds.node_label_names == [5, 9]
    assert [g.edges for g in ds.graphs] == [g.edges for g in gs]
    write_tudataset(Dataset("Y", ds.graphs, [0, 1]), tmp_path / "out")
    back = load_dataset(tmp_path / "out")
    assert back.graphs == ds.graphs and back.graph_labels == [0, 1]


def test_missing_files(tmp_path):
    with pytest.raises(FormatError):
        load_dataset(tmp_path)
    with pytest.raises(FormatError):
        load_tudataset(tmp_path, "NOPE")
