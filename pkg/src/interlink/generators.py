"""Random layer generators for experiments and tests (connected by resampling)."""

from __future__ import annotations

import networkx as nx
import numpy as np

from .core import LayerGraph

MAX_TRIES = 1000


def _connected(make, seed):
    rng = np.random.default_rng(seed)
    for _ in range(MAX_TRIES):
        G = make(int(rng.integers(2**31 - 1)))
        if G.number_of_nodes() < 2 or nx.is_connected(G):
            return LayerGraph.from_networkx(G)
    raise RuntimeError("could not draw a connected graph; raise the density")


def geometric_layer(n, radius=None, seed=0) -> LayerGraph:
    """Random geometric graph in the unit square, resampled until connected."""
    radius = radius if radius is not None else min(1.0, 1.6 * np.sqrt(np.log(n) / n))
    return _connected(lambda s: nx.random_geometric_graph(n, radius, seed=s), seed)


def erdos_renyi_layer(n, p=None, seed=0) -> LayerGraph:
    p = p if p is not None else min(1.0, 2.0 * np.log(n) / n)
    return _connected(lambda s: nx.gnp_random_graph(n, p, seed=s), seed)


def watts_strogatz_layer(n, k=4, p=0.1, seed=0) -> LayerGraph:
    return _connected(lambda s: nx.watts_strogatz_graph(n, k, p, seed=s), seed)


def path_layer(n) -> LayerGraph:
    return LayerGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def complete_layer(n) -> LayerGraph:
    return LayerGraph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))
