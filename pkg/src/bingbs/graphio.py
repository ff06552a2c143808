"""Graphs, TUDataset ingestion, preprocessing filters and synthetic graphs."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    adjacency: np.ndarray
    label: int = 0
    id: int = 0

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ValueError(f"adjacency must be a non-empty square matrix, got {A.shape}")
        if not np.array_equal(A, A.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        A.setflags(write=False)
        object.__setattr__(self, "adjacency", A)

    @property
    def num_vertices(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency)))


@dataclass(frozen=True)
class Dataset:
    graphs: tuple
    name: str = ""
    num_classes: int = 0
    # original label -> contiguous id, in first-seen order
    label_map: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        for g in self.graphs:
            if not 0 <= g.label < max(self.num_classes, 1):
                raise ValueError(f"graph {g.id} has label {g.label} outside [0, {self.num_classes})")

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    @property
    def labels(self) -> np.ndarray:
        return np.array([g.label for g in self.graphs], dtype=int)

    def stats(self) -> dict:
        sizes = [g.num_vertices for g in self.graphs]
        edges = [g.num_edges for g in self.graphs]
        return {
            "name": self.name,
            "graphs": len(self.graphs),
            "classes": self.num_classes,
            "avg_vertices": float(np.mean(sizes)) if sizes else 0.0,
            "avg_edges": float(np.mean(edges)) if edges else 0.0,
        }


def _read_int_rows(path: Path, width: int) -> np.ndarray:
    if not path.exists():
        raise FileNotFoundError(f"missing dataset file: {path}")
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            tokens = [t for t in line.replace(",", " ").split()]
            if len(tokens) != width:
                raise DatasetFormatError(f"{path.name}:{lineno}: expected {width} values, got {line!r}")
            try:
                rows.append([int(t) for t in tokens])
            except ValueError:
                raise DatasetFormatError(f"{path.name}:{lineno}: non-integer token in {line!r}") from None
    return np.array(rows, dtype=np.int64).reshape(-1, width)


def load_tudataset(dir_path, name: str | None = None) -> Dataset:
    """Load a dataset in TUDataset plain-text format.

    Reads ``DS_A.txt`` (1-indexed ``i, j`` node pairs), ``DS_graph_indicator.txt``
    and ``DS_graph_labels.txt``; ``DS`` defaults to the directory name. Edges are
    symmetrized, duplicate edges collapse, self-loops are dropped with a warning,
    and labels are remapped to ``0..k-1`` in first-seen order.
    """
    root = Path(dir_path)
    name = name or root.name
    edges = _read_int_rows(root / f"{name}_A.txt", 2)
    indicator = _read_int_rows(root / f"{name}_graph_indicator.txt", 1)[:, 0]
    raw_labels = _read_int_rows(root / f"{name}_graph_labels.txt", 1)[:, 0]

    n_nodes = len(indicator)
    if edges.size and (edges.min() < 1 or edges.max() > n_nodes):
        raise DatasetFormatError(f"edge references a node outside 1..{n_nodes}")
    graph_ids = np.unique(indicator)
    if graph_ids.size and (graph_ids[0] < 1 or graph_ids[-1] > len(raw_labels)):
        raise DatasetFormatError("graph indicator references a graph without a label")

    label_map: dict[int, int] = {}
    for lab in raw_labels:
        label_map.setdefault(int(lab), len(label_map))

    # node -> (graph id, local index)
    local = np.empty(n_nodes, dtype=np.int64)
    sizes = np.zeros(len(raw_labels) + 1, dtype=np.int64)
    for node, gid in enumerate(indicator):
        local[node] = sizes[gid]
        sizes[gid] += 1

    adj = {int(gid): np.zeros((sizes[gid], sizes[gid])) for gid in graph_ids}
    n_loops = 0
    for i, j in edges - 1:
        gi, gj = indicator[i], indicator[j]
        if gi != gj:
            raise DatasetFormatError(f"edge ({i + 1}, {j + 1}) joins different graphs")
        if i == j:
            n_loops += 1
            continue
        A = adj[int(gi)]
        A[local[i], local[j]] = A[local[j], local[i]] = 1.0
    if n_loops:
        log.warning("%s: dropped %d self-loop entries", name, n_loops)

    graphs = [
        Graph(adj[int(gid)], label=label_map[int(raw_labels[gid - 1])], id=int(gid) - 1)
        for gid in graph_ids
    ]
    return Dataset(graphs, name=name, num_classes=len(label_map), label_map=label_map)


def preprocess(ds: Dataset, min_vertices: int = 6, max_vertices: int = 25, binarize: bool = True) -> Dataset:
    """Keep graphs with ``min_vertices <= M <= max_vertices``; optionally set weights to 1."""
    kept = []
    for g in ds.graphs:
        if not min_vertices <= g.num_vertices <= max_vertices:
            continue
        if binarize:
            g = replace(g, adjacency=(g.adjacency != 0).astype(float))
        kept.append(g)
    if not kept:
        raise ValueError(f"{ds.name or 'dataset'}: no graphs with {min_vertices}..{max_vertices} vertices")
    return replace(ds, graphs=kept)


def erdos_renyi(M: int, p: float, seed: int, label: int = 0, id: int = 0) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((M, M)) < p, k=1)
    return Graph((upper | upper.T).astype(float), label=label, id=id)


def from_edges(M: int, edges, label: int = 0, id: int = 0) -> Graph:
    """Unweighted graph on ``M`` vertices from 0-based edge pairs."""
    A = np.zeros((M, M))
    for i, j in edges:
        A[i, j] = A[j, i] = 1.0
    return Graph(A, label=label, id=id)


def dataset_to_json(ds: Dataset) -> str:
    return json.dumps(
        {
            "name": ds.name,
            "num_classes": ds.num_classes,
            "label_map": {str(k): v for k, v in ds.label_map.items()},
            "graphs": [
                {"id": g.id, "label": g.label, "adjacency": g.adjacency.tolist()} for g in ds.graphs
            ],
        }
    )


def dataset_from_json(text: str) -> Dataset:
    doc = json.loads(text)
    graphs = [Graph(np.array(g["adjacency"], dtype=float), g["label"], g["id"]) for g in doc["graphs"]]
    return Dataset(
        graphs,
        name=doc.get("name", ""),
        num_classes=doc["num_classes"],
        label_map={int(k): v for k, v in doc.get("label_map", {}).items()},
    )


def read_graph(path) -> Graph:
    """Read a single graph: JSON ``{"adjacency": [...]}`` or a whitespace/comma matrix."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        return Graph(np.array(doc["adjacency"], dtype=float), doc.get("label", 0), doc.get("id", 0))
    rows = [r.replace(",", " ").split() for r in text.splitlines() if r.strip() and not r.startswith("#")]
    return Graph(np.array(rows, dtype=float))
