import json

import numpy as np
import pytest

from bingbs.graphio import (
    Dataset,
    DatasetFormatError,
    Graph,
    dataset_from_json,
    dataset_to_json,
    erdos_renyi,
    from_edges,
    load_tudataset,
    preprocess,
    read_graph,
)
from conftest import MUTAG_DIR


def write_tu(tmp_path, name, edges, indicator, labels):
    d = tmp_path / name
    d.mkdir()
    (d / f"{name}_A.txt").write_text("".join(f"{a}, {b}\n" for a, b in edges))
    (d / f"{name}_graph_indicator.txt").write_text("".join(f"{g}\n" for g in indicator))
    (d / f"{name}_graph_labels.txt").write_text("".join(f"{l}\n" for l in labels))
    return d


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        Graph(np.eye(2))
    with pytest.raises(ValueError):
        Graph(np.zeros((0, 0)))


def test_counts():
    g = from_edges(3, [(0, 1), (1, 2)])
    assert g.num_vertices == 3 and g.num_edges == 2


def test_load_small_dataset(tmp_path):
    # two triangles, second graph labelled -1; edges listed in both directions
    edges = [(1, 2), (2, 1), (2, 3), (3, 2), (1, 3), (3, 1), (4, 5), (5, 4)]
    d = write_tu(tmp_path, "TOY", edges, [1, 1, 1, 2, 2], [1, -1])
    ds = load_tudataset(d)
    assert len(ds) == 2 and ds.name == "TOY"
    assert ds.graphs[0].num_edges == 3 and ds.graphs[1].num_edges == 1
    assert ds.label_map == {1: 0, -1: 1}
    assert ds.labels.tolist() == [0, 1]
    assert [g.id for g in ds] == [0, 1]


def test_self_loops_dropped_with_warning(tmp_path, caplog):
    d = write_tu(tmp_path, "LOOP", [(1, 1), (1, 2), (2, 1)], [1, 1], [0])
    ds = load_tudataset(d)
    assert np.all(np.diag(ds.graphs[0].adjacency) == 0)
    assert "self-loop" in caplog.text.lower()


def test_missing_file(tmp_path):
    (tmp_path / "X_A.txt").write_text("1, 2\n")
    with pytest.raises((DatasetFormatError, FileNotFoundError)):
        load_tudataset(tmp_path)


def test_bad_token(tmp_path):
    d = write_tu(tmp_path, "BAD", [(1, 2)], [1, 1], [0])
    (d / "BAD_A.txt").write_text("1, x\n")
    with pytest.raises(DatasetFormatError):
        load_tudataset(d)


def test_edge_to_unknown_node(tmp_path):
    d = write_tu(tmp_path, "UNK", [(1, 9)], [1, 1], [0])
    with pytest.raises(DatasetFormatError):
        load_tudataset(d)


def test_mutag_statistics(mutag):
    raw = load_tudataset(MUTAG_DIR)
    assert len(raw) == 188
    s = mutag.stats()
    assert s["graphs"] == 179 and s["classes"] == 2
    assert s["avg_vertices"] == pytest.approx(17.48, abs=0.01)
    assert s["avg_edges"] == pytest.approx(19.23, abs=0.01)


def test_preprocess_filters_and_binarizes():
    g1 = Graph(np.array([[0, 2.0], [2.0, 0]]), id=0)
    g2 = from_edges(6, [(0, 1)], id=1)
    ds = preprocess(Dataset([g1, g2], num_classes=1), min_vertices=2, max_vertices=3)
    assert len(ds) == 1 and ds.graphs[0].adjacency[0, 1] == 1.0
    with pytest.raises(ValueError):
        preprocess(Dataset([g1], num_classes=1))


def test_erdos_renyi_deterministic():
    a, b = erdos_renyi(8, 0.4, seed=3), erdos_renyi(8, 0.4, seed=3)
    assert np.array_equal(a.adjacency, b.adjacency)
    assert erdos_renyi(5, 0.0, seed=0).num_edges == 0
    assert erdos_renyi(5, 1.0, seed=0).num_edges == 10


def test_json_round_trip(tmp_path):
    ds = Dataset([from_edges(3, [(0, 1)], label=1, id=4)], name="T", num_classes=2, label_map={5: 0, 7: 1})
    back = dataset_from_json(dataset_to_json(ds))
    assert back.name == "T" and back.label_map == ds.label_map
    assert np.array_equal(back.graphs[0].adjacency, ds.graphs[0].adjacency)
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"adjacency": [[0, 1], [1, 0]]}))
    assert read_graph(p).num_edges == 1
    q = tmp_path / "g.txt"
    q.write_text("0 1 1\n1 0 0\n1 0 0\n")
    assert read_graph(q).num_edges == 2
