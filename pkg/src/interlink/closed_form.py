"""Analytic results for two-layer networks.

Bounds on the maximal algebraic connectivity, regularity of interlink
weights, the spectrum under uniform all-pairs weights, the transition
thresholds c* and c**, super-diffusion windows and layer-Fiedler bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .core import InterlayerPattern, WeightAssignment
from .errors import DegenerateCase, ValidationError
from .spectra import Spectrum, fiedler

DEGENERATE_RTOL = 1e-12


def upper_bound_F(n, m, c) -> float:
    """Largest possible algebraic connectivity for budget ``c``: (1/n + 1/m) c."""
    if n < 1 or m < 1:
        raise ValidationError(f"layer sizes must be positive, got n={n}, m={m}")
    return (1.0 / n + 1.0 / m) * c


# ---------------------------------------------------------------- regularity


@dataclass(frozen=True)
class RegularityWitness:
    feasible: bool
    weights: WeightAssignment | None = None
    n: int = 0
    m: int = 0
    budget: float = 0.0

    def row_sums(self):
        return self.weights.matrix(self.n, self.m).sum(axis=1)

    def column_sums(self):
        return self.weights.matrix(self.n, self.m).sum(axis=0)


def _is_regular(W, n, m, c, tol):
    return (np.abs(W.sum(axis=1) - c / n).max() <= tol
            and np.abs(W.sum(axis=0) - c / m).max() <= tol)


def regularity_pattern_feasible(pattern: InterlayerPattern) -> tuple[bool, dict]:
    """Decide whether the pattern supports row sums 1/n and column sums 1/m.

    Scaled by ``n m`` this is an integral transportation problem: each layer-1
    node supplies ``m`` units, each layer-2 node absorbs ``n`` units and the
    total is ``n m``.  Integral max-flow settles feasibility exactly and returns
    the flow on each admissible pair.
    """
    n, m = pattern.n, pattern.m
    G = nx.DiGraph()
    for i in range(n):
        G.add_edge("s", ("a", i), capacity=m)
    for j in range(m):
        G.add_edge(("b", j), "t", capacity=n)
    for i, j in pattern.pairs:
        G.add_edge(("a", i), ("b", j))  # no capacity attribute means unbounded
    if not pattern.pairs:
        return False, {}
    value, flow = nx.maximum_flow(G, "s", "t")
    if value != n * m:
        return False, {}
    return True, {(i, j): flow[("a", i)][("b", j)] for i, j in pattern.pairs}


def regularity_witness(pattern: InterlayerPattern, n, m, c) -> RegularityWitness:
    """Regular weights on the admissible set, if any exist.

    Uniform weights are returned whenever they are already regular (k-to-k,
    one-to-one, all-pairs); otherwise the max-flow solution scaled to ``c``.
    """
    if (n, m) != (pattern.n, pattern.m):
        raise ValidationError(f"pattern is {pattern.n}x{pattern.m}, expected {n}x{m}")
    if c < 0:
        raise ValidationError(f"budget must be nonnegative, got {c}")
    if c == 0:
        return RegularityWitness(True, WeightAssignment({p: 0.0 for p in pattern.pairs}, 0.0, "regular"), n, m, 0.0)
    feasible, flow = regularity_pattern_feasible(pattern)
    if not feasible:
        return RegularityWitness(False, None, n, m, float(c))
    tol = 1e-12 * max(1.0, c)
    each = c / len(pattern)
    W = np.zeros((n, m))
    for i, j in pattern.pairs:
        W[i, j] = each
    if _is_regular(W, n, m, c, tol):
        weights = {p: each for p in pattern.pairs}
    else:
        weights = {p: f * c / (n * m) for p, f in flow.items()}
    return RegularityWitness(True, WeightAssignment(weights, c, "regular"), n, m, float(c))


# ---------------------------------------------------------- uniform all-pairs


def uniform_allpairs_spectrum(spec1: Spectrum, spec2: Spectrum, n, m, c) -> Spectrum:
    """Eigenpairs of the supra-Laplacian with every interlink weighted c/(nm).

    Layer eigenvectors orthogonal to 1 lift unchanged with shifts c/n and c/m;
    the remaining two modes are 1 (eigenvalue 0) and (m 1_n, -n 1_m)
    (eigenvalue (1/n + 1/m) c).
    """
    if len(spec1) != n or len(spec2) != m:
        raise ValidationError("layer spectra must be complete")
    N = n + m
    vals = [0.0]
    vecs = [np.full(N, 1.0 / math.sqrt(N))]
    h = 1.0 / math.sqrt(n * m * (n + m))
    vals.append(upper_bound_F(n, m, c))
    vecs.append(np.concatenate([np.full(n, m * h), np.full(m, -n * h)]))
    # the lowest layer mode is the constant one; keep the rest, re-orthogonalised against 1
    for spec, size, shift, offset in ((spec1, n, c / n, 0), (spec2, m, c / m, n)):
        V = np.array(spec.eigenvectors[:, 1:], dtype=float)
        V -= V.mean(axis=0, keepdims=True)
        for k in range(V.shape[1]):
            v = np.zeros(N)
            v[offset:offset + size] = V[:, k] / np.linalg.norm(V[:, k])
            vals.append(float(spec.eigenvalues[k + 1]) + shift)
            vecs.append(v)
    vals = np.array(vals)
    vecs = np.column_stack(vecs)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return Spectrum(vals, vecs)


def uniform_lambda2(l21, l22, n, m, c) -> float:
    """Algebraic connectivity under uniform all-pairs weights."""
    if l21 < 0 or l22 < 0:
        raise ValidationError("layer algebraic connectivities must be nonnegative")
    return min(upper_bound_F(n, m, c), l21 + c / n, l22 + c / m)


@dataclass(frozen=True)
class ThresholdReport:
    case_label: str  # "Case1" | "Case2" | "Case3" | "Degenerate"
    c_star: float
    c_star_star: float | None = None
    formulas_used: tuple = ()
    mirrored: bool = False
    specific_connectivities: tuple = ()


def _specific(l21, l22, n, m):
    return l21 / n, l22 / m


def thresholds_allpairs(l21, l22, n, m) -> ThresholdReport:
    """Transition budgets for the all-pairs pattern.

    ``c*`` is where (1/n + 1/m) c meets the first layer branch of the uniform
    spectrum.  A second transition ``c**`` exists when the layer with the
    smaller specific connectivity has fewer nodes, so its branch grows faster
    and later crosses the other layer branch.  The n > m form is labelled
    Case1; the same situation with the layers swapped is also labelled Case1,
    with ``mirrored=True``.
    """
    if not (l21 > 0 and l22 > 0):
        raise ValidationError(f"layer algebraic connectivities must be positive, got {l21}, {l22}")
    s1, s2 = _specific(l21, l22, n, m)
    if abs(s1 - s2) <= DEGENERATE_RTOL * max(s1, s2):
        report = ThresholdReport("Degenerate", n * l22, None, ("c*=n*l22=m*l21",), False, (s1, s2))
        raise DegenerateCase(
            f"layers have equal specific connectivity ({s1:.17g} vs {s2:.17g}); no case applies", report)
    if s1 > s2:
        c_star = n * l22
        if n > m:
            c2 = (l21 - l22) / (1.0 / m - 1.0 / n)
            return ThresholdReport("Case1", c_star, c2, ("c*=n*l22", "c**=(l21-l22)/(1/m-1/n)"), False, (s1, s2))
        return ThresholdReport("Case3", c_star, None, ("c*=n*l22",), False, (s1, s2))
    c_star = m * l21
    if m > n:
        c2 = (l22 - l21) / (1.0 / n - 1.0 / m)
        return ThresholdReport("Case1", c_star, c2, ("c*=m*l21", "c**=(l22-l21)/(1/n-1/m)"), True, (s1, s2))
    return ThresholdReport("Case2", c_star, None, ("c*=m*l21",), False, (s1, s2))


@dataclass(frozen=True)
class SuperdiffusionReport:
    condition_holds: bool
    case_label: str
    inequality_values: tuple  # (left, middle, right) of left < middle < right


def superdiffusion_window(l21, l22, n, m) -> SuperdiffusionReport:
    """Whether some budget up to c* makes the network beat both layers.

    With the weaker layer (smaller specific connectivity) labelled ``a`` and
    the other ``b``, the chain is la/na < lb/nb < (1/n + 1/m) la, with strict
    comparisons.
    """
    s1, s2 = _specific(l21, l22, n, m)
    try:
        label = thresholds_allpairs(l21, l22, n, m).case_label
    except DegenerateCase:
        label = "Degenerate"
    if s2 <= s1:
        left, middle, right = s2, s1, upper_bound_F(n, m, l22)
    else:
        left, middle, right = s1, s2, upper_bound_F(n, m, l21)
    return SuperdiffusionReport(bool(left < middle < right), label, (left, middle, right))


# ------------------------------------------------------- layer-Fiedler bounds


def layer_fiedler_bounds(L1, L2, W, u1=None, v2=None) -> tuple[float, float]:
    """Upper bounds on lambda_2 of the supra-Laplacian from each layer's Fiedler vector.

    ``bound1 = lambda_2(L1) + u1^T diag(W 1) u1`` and
    ``bound2 = lambda_2(L2) + v2^T diag(W^T 1) v2``.  Both are strict for
    connected layers and nonzero ``W``.
    """
    L1 = np.asarray(L1, dtype=float)
    L2 = np.asarray(L2, dtype=float)
    W = np.asarray(W, dtype=float)
    f1 = fiedler(L1)
    f2 = fiedler(L2)
    u1 = f1.vector if u1 is None else np.asarray(u1, dtype=float)
    v2 = f2.vector if v2 is None else np.asarray(v2, dtype=float)
    b1 = f1.lambda2 + float(u1 @ (W.sum(axis=1) * u1))
    b2 = f2.lambda2 + float(v2 @ (W.sum(axis=0) * v2))
    return b1, b2


def ktok_threshold_bounds(l2_min, n) -> tuple[float, float]:
    """Bracket (n l2_min / 2, n l2_min) on c* for k-to-k coupling of equal-size layers."""
    if l2_min < 0:
        raise ValidationError("algebraic connectivity must be nonnegative")
    return n * l2_min / 2.0, n * l2_min


def regular_threshold_bracket(l21, l22, n, m) -> tuple[float, float]:
    """Bracket on c* valid for any regular-feasible pattern.

    The lower end is min(l21, l22) / (1/n + 1/m) and the upper end is
    min(n l22, m l21), the all-pairs value.
    """
    return min(l21, l22) / (1.0 / n + 1.0 / m), min(n * l22, m * l21)
