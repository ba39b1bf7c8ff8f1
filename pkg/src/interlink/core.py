"""Two-layer networks, interlink weight assignments and the supra-Laplacian.

Layer-1 nodes take global indices ``0..n-1`` and layer-2 node ``j`` maps to
global index ``n + j``.  Interlinks are always written as ``(i, j)`` with
``i`` a layer-1 index and ``j`` a layer-2 index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyPattern,
    IndexOutOfRange,
    InvalidWeight,
    SizeMismatch,
    ValidationError,
)

Pair = tuple[int, int]

PATTERN_KINDS = ("all_pairs", "k_to_k", "one_to_one", "explicit")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LayerGraph:
    """Undirected weighted graph of one layer.

    ``edges`` may be given as ``(i, j)`` or ``(i, j, weight)``; it is stored
    as a sorted tuple of ``(i, j, weight)`` with ``i < j``.
    """

    node_count: int
    edges: tuple = ()

    def __post_init__(self):
        if int(self.node_count) != self.node_count or self.node_count < 1:
            raise ValidationError(f"node_count must be a positive integer, got {self.node_count!r}")
        object.__setattr__(self, "node_count", int(self.node_count))
        seen = set()
        norm = []
        for e in self.edges:
            if len(e) == 2:
                i, j, w = e[0], e[1], 1.0
            elif len(e) == 3:
                i, j, w = e
            else:
                raise ValidationError(f"edge must be (i, j) or (i, j, w), got {e!r}")
            i, j, w = int(i), int(j), float(w)
            for v in (i, j):
                if not 0 <= v < self.node_count:
                    raise IndexOutOfRange(f"edge ({i}, {j}) references node {v} outside [0, {self.node_count})")
            if i == j:
                raise ValidationError(f"self-loop on node {i}")
            if not math.isfinite(w) or w < 0:
                raise InvalidWeight(f"edge ({i}, {j}) has invalid weight {w}")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise ValidationError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            norm.append((i, j, w))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def from_networkx(cls, G, weight="weight"):
        nodes = sorted(G.nodes())
        index = {v: k for k, v in enumerate(nodes)}
        edges = [(index[u], index[v], d.get(weight, 1.0)) for u, v, d in G.edges(data=True)]
        return cls(len(nodes), tuple(edges))

    @classmethod
    def from_laplacian(cls, L, tol=0.0):
        L = np.asarray(L, dtype=float)
        n = L.shape[0]
        edges = [(i, j, -L[i, j]) for i in range(n) for j in range(i + 1, n) if -L[i, j] > tol]
        return cls(n, tuple(edges))

    def laplacian(self) -> np.ndarray:
        n = self.node_count
        L = np.zeros((n, n))
        for i, j, w in self.edges:
            L[i, j] -= w
            L[j, i] -= w
            L[i, i] += w
            L[j, j] += w
        return L

    def to_networkx(self):
        import networkx as nx

        G = nx.Graph()
        G.add_nodes_from(range(self.node_count))
        G.add_weighted_edges_from(self.edges)
        return G


@dataclass(frozen=True)
class InterlayerPattern:
    """Admissible interlinks between a layer of ``n`` and one of ``m`` nodes."""

    n: int
    m: int
    pairs: tuple = ()
    kind: str = "explicit"
    k: int | None = None

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValidationError(f"unknown pattern kind {self.kind!r}")
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        seen = set()
        for i, j in pairs:
            if not (0 <= i < self.n and 0 <= j < self.m):
                raise IndexOutOfRange(f"pair ({i}, {j}) outside {self.n}x{self.m}")
            if (i, j) in seen:
                raise ValidationError(f"duplicate pair ({i}, {j})")
            seen.add((i, j))
        if self.kind == "one_to_one" and (self.n != self.m or set(pairs) != {(i, i) for i in range(self.n)}):
            raise ValidationError("one_to_one pattern needs n == m and pairs {(i, i)}")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "_index", MappingProxyType({p: k for k, p in enumerate(pairs)}))

    @classmethod
    def all_pairs(cls, n, m):
        return cls(n, m, tuple((i, j) for i in range(n) for j in range(m)), "all_pairs")

    @classmethod
    def one_to_one(cls, n):
        return cls(n, n, tuple((i, i) for i in range(n)), "one_to_one")

    @classmethod
    def k_to_k(cls, n, k):
        """Circulant k-to-k coupling: layer-1 node i links to layer-2 nodes i, ..., i+k-1 (mod n)."""
        if not 1 <= k <= n:
            raise ValidationError(f"k must lie in [1, {n}], got {k}")
        pairs = sorted((i, (i + s) % n) for i in range(n) for s in range(k))
        return cls(n, n, tuple(pairs), "k_to_k", k)

    @classmethod
    def explicit(cls, n, m, pairs):
        return cls(n, m, tuple(pairs), "explicit")

    def __len__(self):
        return len(self.pairs)

    def index(self, pair) -> int:
        return self._index[pair]

    def __contains__(self, pair):
        return tuple(pair) in self._index


@dataclass(frozen=True)
class MultilayerNetwork:
    layer1: LayerGraph
    layer2: LayerGraph
    pattern: InterlayerPattern
    name: str = ""

    def __post_init__(self):
        if self.pattern.n != self.layer1.node_count or self.pattern.m != self.layer2.node_count:
            raise SizeMismatch(
                f"pattern is {self.pattern.n}x{self.pattern.m} but layers have "
                f"{self.layer1.node_count} and {self.layer2.node_count} nodes"
            )

    @property
    def n(self) -> int:
        return self.layer1.node_count

    @property
    def m(self) -> int:
        return self.layer2.node_count

    @property
    def N(self) -> int:
        return self.n + self.m

    def intra_laplacian(self) -> np.ndarray:
        """Laplacian of the disjoint union of the two layers."""
        n = self.n
        L0 = np.zeros((self.N, self.N))
        L0[:n, :n] = self.layer1.laplacian()
        L0[n:, n:] = self.layer2.laplacian()
        return L0

    def incidence(self, pairs=None) -> np.ndarray:
        """N x p matrix whose columns are e_i - e_{n+j} for each interlink."""
        pairs = self.pattern.pairs if pairs is None else pairs
        A = np.zeros((self.N, len(pairs)))
        for k, (i, j) in enumerate(pairs):
            A[i, k] = 1.0
            A[self.n + j, k] = -1.0
        return A

    def with_pattern(self, pattern: InterlayerPattern) -> "MultilayerNetwork":
        return MultilayerNetwork(self.layer1, self.layer2, pattern, self.name)


@dataclass(frozen=True)
class WeightAssignment:
    """Nonnegative interlink weights distributing a total budget."""

    weights: Mapping = field(default_factory=dict)
    budget: float = 0.0
    label: str = ""

    def __post_init__(self):
        w = {(int(i), int(j)): float(v) for (i, j), v in dict(self.weights).items()}
        object.__setattr__(self, "weights", MappingProxyType(w))
        object.__setattr__(self, "budget", float(self.budget))

    @classmethod
    def from_vector(cls, pattern: InterlayerPattern, w, budget=None, label=""):
        w = np.asarray(w, dtype=float)
        if w.shape != (len(pattern),):
            raise SizeMismatch(f"expected {len(pattern)} weights, got shape {w.shape}")
        budget = math.fsum(w) if budget is None else budget
        return cls(dict(zip(pattern.pairs, w.tolist())), budget, label)

    @classmethod
    def from_matrix(cls, W, budget=None, label="", tol=0.0):
        W = np.asarray(W, dtype=float)
        weights = {(i, j): W[i, j] for i, j in zip(*np.nonzero(np.abs(W) > tol))}
        budget = math.fsum(W.ravel()) if budget is None else budget
        return cls(weights, budget, label)

    def vector(self, pattern: InterlayerPattern) -> np.ndarray:
        """Weights aligned with ``pattern.pairs``; raises if support leaves the pattern."""
        out = np.zeros(len(pattern))
        for pair, v in self.weights.items():
            if pair not in pattern:
                if v == 0.0:
                    continue
                raise ValidationError(f"pair {pair} carries weight but is not admissible")
            out[pattern.index(pair)] = v
        return out

    def matrix(self, n, m) -> np.ndarray:
        W = np.zeros((n, m))
        for (i, j), v in self.weights.items():
            if not (0 <= i < n and 0 <= j < m):
                raise IndexOutOfRange(f"pair ({i}, {j}) outside {n}x{m}")
            W[i, j] += v
        return W

    def total(self) -> float:
        return math.fsum(self.weights.values())


@dataclass(frozen=True)
class SupraLaplacian:
    """Dense symmetric supra-Laplacian with layer sizes attached."""

    matrix: np.ndarray
    n: int
    m: int
    provenance: tuple = ("", "")

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(self.matrix))

    @property
    def N(self):
        return self.n + self.m

    def blocks(self):
        """Recover ``(L1, L2, W)`` from the block structure."""
        n = self.n
        M = self.matrix
        W = -M[:n, n:]
        L1 = M[:n, :n] - np.diag(W.sum(axis=1))
        L2 = M[n:, n:] - np.diag(W.sum(axis=0))
        return L1, L2, W


def supra_from_blocks(L1, L2, W) -> np.ndarray:
    """Dense supra-Laplacian [[L1 + diag(W 1), -W], [-W^T, L2 + diag(W^T 1)]]."""
    L1 = np.asarray(L1, dtype=float)
    L2 = np.asarray(L2, dtype=float)
    W = np.asarray(W, dtype=float)
    n, m = W.shape
    M = np.empty((n + m, n + m))
    M[:n, :n] = L1 + np.diag(W.sum(axis=1))
    M[n:, n:] = L2 + np.diag(W.sum(axis=0))
    M[:n, n:] = -W
    M[n:, :n] = -W.T
    return M


def build_supra_laplacian(network: MultilayerNetwork, assignment: WeightAssignment) -> SupraLaplacian:
    n, m = network.n, network.m
    for (i, j), v in assignment.weights.items():
        if not (0 <= i < n and 0 <= j < m):
            raise IndexOutOfRange(f"interlink ({i}, {j}) references a node outside {n}x{m}")
        if not math.isfinite(v) or v < 0:
            raise InvalidWeight(f"interlink ({i}, {j}) has invalid weight {v}")
    W = assignment.matrix(n, m)
    M = supra_from_blocks(network.layer1.laplacian(), network.layer2.laplacian(), W)
    return SupraLaplacian(M, n, m, (network.name, assignment.label))


def uniform_assignment(pattern: InterlayerPattern, c: float) -> WeightAssignment:
    if c < 0 or not math.isfinite(c):
        raise InvalidWeight(f"budget must be finite and nonnegative, got {c}")
    if not pattern.pairs:
        if c > 0:
            raise EmptyPattern("cannot spread a positive budget over an empty pattern")
        return WeightAssignment({}, 0.0, "uniform")
    each = c / len(pattern)
    return WeightAssignment({p: each for p in pattern.pairs}, c, "uniform")


@dataclass(frozen=True)
class Violation:
    kind: str  # "range" | "support" | "nonnegativity" | "budget"
    message: str
    pairs: tuple = ()
    residual: float = 0.0


@dataclass(frozen=True)
class AssignmentReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def budget_tolerance(c) -> float:
    return 1e-12 * max(1.0, abs(c))


def validate_assignment(network: MultilayerNetwork, assignment: WeightAssignment) -> AssignmentReport:
    out = []
    n, m = network.n, network.m
    bad_range = [p for p in assignment.weights if not (0 <= p[0] < n and 0 <= p[1] < m)]
    if bad_range:
        out.append(Violation("range", f"pairs outside the {n}x{m} node grid: {bad_range}", tuple(bad_range)))
    outside = [p for p, v in assignment.weights.items() if v != 0.0 and p not in network.pattern and p not in bad_range]
    if outside:
        out.append(Violation("support", f"weight on non-admissible pairs {outside}", tuple(outside)))
    negative = [p for p, v in assignment.weights.items() if not (v >= 0) or not math.isfinite(v)]
    if negative:
        out.append(Violation("nonnegativity", f"negative or non-finite weights on {negative}", tuple(negative)))
    if assignment.budget < 0:
        out.append(Violation("nonnegativity", f"negative budget {assignment.budget}", (), assignment.budget))
    residual = math.fsum(assignment.weights.values()) - assignment.budget
    if not abs(residual) <= budget_tolerance(assignment.budget):
        out.append(Violation("budget", f"weights sum to budget {residual:+.17g}", (), residual))
    return AssignmentReport(tuple(out))


def layer_totals(network: MultilayerNetwork, assignment: WeightAssignment):
    """Per-node total interlink weight in each layer: (W 1_m, W^T 1_n)."""
    W = assignment.matrix(network.n, network.m)
    return W.sum(axis=1), W.sum(axis=0)


def as_matrix(obj) -> np.ndarray:
    """Accept a SupraLaplacian, LayerGraph or array-like and return a float array."""
    if isinstance(obj, SupraLaplacian):
        return obj.matrix
    if isinstance(obj, LayerGraph):
        return obj.laplacian()
    return np.asarray(obj, dtype=float)


def pairs_sorted(pairs: Iterable[Pair]) -> list:
    return sorted((int(i), int(j)) for i, j in pairs)


def network_from_layers(L1, L2, pattern: InterlayerPattern | str = "all_pairs", name="", k=None,
                        pairs: Sequence[Pair] = ()) -> MultilayerNetwork:
    """Convenience constructor from layer graphs or Laplacian matrices."""
    g1 = L1 if isinstance(L1, LayerGraph) else LayerGraph.from_laplacian(L1)
    g2 = L2 if isinstance(L2, LayerGraph) else LayerGraph.from_laplacian(L2)
    n, m = g1.node_count, g2.node_count
    if isinstance(pattern, str):
        if pattern == "all_pairs":
            pattern = InterlayerPattern.all_pairs(n, m)
        elif pattern == "one_to_one":
            pattern = InterlayerPattern.one_to_one(n)
        elif pattern == "k_to_k":
            pattern = InterlayerPattern.k_to_k(n, k)
        elif pattern == "explicit":
            pattern = InterlayerPattern.explicit(n, m, pairs)
        else:
            raise ValidationError(f"unknown pattern kind {pattern!r}")
    return MultilayerNetwork(g1, g2, pattern, name)
