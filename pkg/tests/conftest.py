from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bingbs.graphio import Graph, from_edges, load_tudataset, preprocess

settings.register_profile("default", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
MUTAG_DIR = ROOT / "data" / "MUTAG"


def complete_graph(m, id=0, label=0):
    return from_edges(m, [(i, j) for i in range(m) for j in range(i + 1, m)], id=id, label=label)


def random_symmetric(rng, n, scale=1.0):
    A = rng.normal(scale=scale, size=(n, n))
    return (A + A.T) / 2


def random_connected_graph(rng, M, p=0.5, id=0):
    """Erdos-Renyi graph with at least one edge (resampled until nonempty)."""
    if M < 2:
        raise ValueError("a graph with an edge needs at least 2 vertices")
    while True:
        upper = np.triu(rng.random((M, M)) < p, k=1)
        if upper.any():
            A = (upper | upper.T).astype(float)
            return Graph(A, id=id)


@pytest.fixture
def single_edge():
    return from_edges(2, [(0, 1)])


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture(scope="session")
def mutag():
    return preprocess(load_tudataset(MUTAG_DIR))


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
