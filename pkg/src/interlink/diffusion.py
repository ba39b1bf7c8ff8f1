"""Linear diffusion dX/dt = -L X on a supra-Laplacian."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import SupraLaplacian, as_matrix
from .errors import DegenerateTrajectory, ValidationError

TAIL_DECAY = 1e3
TAIL_FRACTION = 0.5


@dataclass(frozen=True)
class DiffusionTrajectory:
    times: np.ndarray
    states: np.ndarray  # len(times) x N
    initial_state: np.ndarray
    eigenvalues: np.ndarray | None = field(default=None, repr=False)

    def deviation_norms(self) -> np.ndarray:
        """||X(t) - mean(X(t)) 1|| at each sample."""
        dev = self.states - self.states.mean(axis=1, keepdims=True)
        return np.linalg.norm(dev, axis=1)

    def layer_spread(self, n) -> tuple[np.ndarray, np.ndarray]:
        """Within-layer standard deviation over time for nodes [:n] and [n:]."""
        return self.states[:, :n].std(axis=1), self.states[:, n:].std(axis=1)


def simulate(L, X0, times) -> DiffusionTrajectory:
    """Exact propagation X(t) = sum_k exp(-lambda_k t) (v_k^T X0) v_k."""
    M = L.matrix if isinstance(L, SupraLaplacian) else as_matrix(L)
    x0 = np.asarray(X0, dtype=float)
    t = np.asarray(times, dtype=float)
    if x0.shape != (M.shape[0],):
        raise ValidationError(f"initial state has shape {x0.shape}, expected ({M.shape[0]},)")
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValidationError("times must be strictly ascending and start at 0")
    vals, vecs = np.linalg.eigh((M + M.T) / 2)
    # the kernel is exact: clamp roundoff so the consensus mode never grows
    vals = np.maximum(vals, 0.0)
    coef = vecs.T @ x0
    states = np.exp(-np.outer(t, vals)) * coef @ vecs.T
    states[0] = x0
    return DiffusionTrajectory(t, states, x0.copy(), vals)


def estimate_rate(trajectory: DiffusionTrajectory) -> float:
    """Decay rate from a least-squares fit of log ||X(t) - mean|| on the tail.

    The tail starts once the fastest mode has shrunk by 1e3 and keeps the
    last half of those samples.
    """
    t = trajectory.times
    dev = trajectory.deviation_norms()
    scale = max(1.0, float(np.abs(trajectory.initial_state).max(initial=0.0)))
    if dev[0] <= 1e-12 * scale * math.sqrt(len(trajectory.initial_state)):
        raise DegenerateTrajectory("initial state is already at consensus")
    mask = np.ones(t.size, dtype=bool)
    ev = trajectory.eigenvalues
    if ev is not None and ev.size and ev[-1] > 0:
        mask &= t >= math.log(TAIL_DECAY) / ev[-1]
    # samples lost in roundoff carry no rate information
    mask &= dev > 1e-13 * dev[0]
    idx = np.flatnonzero(mask)
    idx = idx[int(math.floor(idx.size * (1 - TAIL_FRACTION))):]
    if idx.size < 3:
        raise DegenerateTrajectory(f"only {idx.size} samples in the asymptotic window; need 3")
    slope, _ = np.polyfit(t[idx], np.log(dev[idx]), 1)
    return float(-slope)


def balance_interlinks(W, unified="layer1") -> np.ndarray:
    """Spread each node's interlink total evenly over the other layer.

    With ``unified="layer1"`` column sums are kept and every layer-1 node
    sees the same weights, so layer-constant states stay constant on layer 1.
    ``"layer2"`` keeps row sums instead.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    n, m = W.shape
    if unified == "layer1":
        return np.tile(W.sum(axis=0) / n, (n, 1))
    if unified == "layer2":
        return np.tile(W.sum(axis=1)[:, None] / m, (1, m))
    raise ValidationError(f"unified must be 'layer1' or 'layer2', got {unified!r}")
