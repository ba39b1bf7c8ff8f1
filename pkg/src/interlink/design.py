"""Perturbation estimates past the thresholds and greedy interlink placement."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import LayerGraph, MultilayerNetwork, WeightAssignment, as_matrix, supra_from_blocks
from .errors import ExhaustedPairs, SizeMismatch, ValidationError
from .spectra import algebraic_connectivity, fiedler

TIE_RTOL = 1e-9


def perturbation_matrix(Wprime) -> np.ndarray:
    """Supra-Laplacian of the interlink increment alone, [[diag(W'1), -W'], [-W'^T, diag(W'^T 1)]]."""
    Wp = np.atleast_2d(np.asarray(Wprime, dtype=float))
    n, m = Wp.shape
    return supra_from_blocks(np.zeros((n, n)), np.zeros((m, m)), Wp)


@dataclass(frozen=True)
class PerturbationInput:
    base_eigenvalue: float
    base_eigenvector: np.ndarray
    perturbation: np.ndarray  # L'
    epsilon: float = 0.0
    c0: float = 0.0
    c_prime: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.base_eigenvector, dtype=float)
        Lp = np.asarray(self.perturbation, dtype=float)
        if Lp.shape != (x.size, x.size):
            raise SizeMismatch(f"L' is {Lp.shape}, eigenvector has {x.size} entries")
        if abs(np.linalg.norm(x) - 1.0) > 1e-10:
            raise ValidationError(f"base eigenvector must have unit norm, got {np.linalg.norm(x):.3e}")
        scale = max(1.0, float(np.abs(Lp).max(initial=0.0)))
        if np.abs(Lp - Lp.T).max(initial=0.0) > 1e-12 * scale:
            raise ValidationError("L' is not symmetric")
        if np.abs(Lp.sum(axis=1)).max(initial=0.0) > 1e-10 * scale:
            raise ValidationError("L' rows do not sum to zero")
        object.__setattr__(self, "base_eigenvector", x)
        object.__setattr__(self, "perturbation", Lp)

    @classmethod
    def from_increment(cls, lam0, x0, Wprime, epsilon=0.0, c0=0.0):
        Wp = np.atleast_2d(np.asarray(Wprime, dtype=float))
        return cls(float(lam0), x0, perturbation_matrix(Wp), float(epsilon), float(c0), float(Wp.sum()))

    def first_order(self) -> float:
        """lambda_0 + epsilon * lambda'."""
        return self.base_eigenvalue + self.epsilon * rayleigh_increment(self)


def rayleigh_increment(inp: PerturbationInput) -> float:
    """First-order eigenvalue change x0^T L' x0 / ||x0||^2."""
    x = inp.base_eigenvector
    return float(x @ inp.perturbation @ x / (x @ x))


def post_threshold_increment(fiedler_vec, Wprime, side="layer2") -> float:
    """Growth of lambda_2 past c* when the Fiedler vector lives on one layer.

    ``side="layer2"`` gives v^T diag(W'^T 1) v, ``side="layer1"`` gives
    u^T diag(W' 1) u.
    """
    v = np.asarray(fiedler_vec, dtype=float)
    Wp = np.atleast_2d(np.asarray(Wprime, dtype=float))
    if side == "layer2":
        totals = Wp.sum(axis=0)
    elif side == "layer1":
        totals = Wp.sum(axis=1)
    else:
        raise ValidationError(f"side must be 'layer1' or 'layer2', got {side!r}")
    if totals.size != v.size:
        raise SizeMismatch(f"{side} has {totals.size} nodes, Fiedler vector has {v.size}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValidationError("Fiedler vector must have unit norm")
    return float(v @ (totals * v))


def richardson_errors(L, Lprime, epsilon) -> tuple[float, float, float]:
    """First-order errors at epsilon and epsilon/2 and their ratio.

    The base eigenpair is lambda_2 of ``L``, which must be simple for the
    ratio to approach 4.
    """
    L = as_matrix(L)
    Lp = as_matrix(Lprime)
    fd = fiedler(L)
    inp = PerturbationInput(fd.lambda2, fd.vector, Lp)
    slope = rayleigh_increment(inp)
    errs = []
    for eps in (epsilon, epsilon / 2):
        exact = algebraic_connectivity(L + eps * Lp)
        errs.append(abs(exact - (fd.lambda2 + eps * slope)))
    ratio = errs[0] / errs[1] if errs[1] > 0 else float("inf")
    return errs[0], errs[1], ratio


# -------------------------------------------------------------------- greedy


@dataclass(frozen=True)
class GreedyPlan:
    added_edges: tuple
    w0: float
    r: int
    lambda2_trace: tuple
    scores: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if len(self.added_edges) != self.r:
            raise ValidationError("plan length differs from r")
        if len(set(self.added_edges)) != len(self.added_edges):
            raise ValidationError("plan repeats an interlink")

    def assignment(self) -> WeightAssignment:
        return WeightAssignment({p: self.w0 for p in self.added_edges}, self.w0 * self.r, "greedy")


def _scores(L, A):
    fd = fiedler(L)
    V = fd.cluster_basis
    AV = A.T @ V
    # cluster-averaged projector when lambda_2 is repeated; (v_i - v_j)^2 otherwise
    return np.sum(AV * AV, axis=1) / V.shape[1]


def greedy_interlinks(network: MultilayerNetwork, r, w0) -> GreedyPlan:
    """Add ``r`` interlinks of weight ``w0`` one at a time from the admissible set.

    The layers start uncoupled.  Each step picks the unused pair with the
    largest (v_i - v_j)^2 for the current Fiedler vector v; pairs within a
    relative 1e-9 of the best score are broken lexicographically.
    """
    r = int(r)
    if r < 0:
        raise ValidationError(f"r must be nonnegative, got {r}")
    if r == 0:
        return GreedyPlan((), float(w0), 0, ())
    if not w0 > 0:
        raise ValidationError(f"w0 must be positive, got {w0}")
    pairs = list(network.pattern.pairs)
    if r > len(pairs):
        raise ExhaustedPairs(f"asked for {r} interlinks but only {len(pairs)} pairs are admissible")
    A = network.incidence()
    L = network.intra_laplacian()
    used = np.zeros(len(pairs), dtype=bool)
    added, trace, chosen_scores = [], [], []
    for _ in range(r):
        s = _scores(L, A)
        s[used] = -np.inf
        top = s.max()
        ties = [k for k in np.flatnonzero(s >= top - TIE_RTOL * max(abs(top), 1e-300))]
        k = min(ties, key=lambda t: pairs[t])
        used[k] = True
        L = L + w0 * np.outer(A[:, k], A[:, k])
        added.append(pairs[k])
        chosen_scores.append(float(w0 * s[k]))
        trace.append(algebraic_connectivity(L))
    return GreedyPlan(tuple(added), float(w0), r, tuple(trace), tuple(chosen_scores))


def average_laplacian_condition(L1, L2) -> bool:
    """True when lambda_2 of (L1 + L2)/2 beats both layers."""
    M1 = L1.laplacian() if isinstance(L1, LayerGraph) else as_matrix(L1)
    M2 = L2.laplacian() if isinstance(L2, LayerGraph) else as_matrix(L2)
    if M1.shape != M2.shape:
        raise SizeMismatch(f"layers have {M1.shape[0]} and {M2.shape[0]} nodes")
    avg = algebraic_connectivity((M1 + M2) / 2)
    return bool(avg > max(algebraic_connectivity(M1), algebraic_connectivity(M2)))
