"""Dual-side helpers shared by the optimizer and the embedding module."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _lmi


@lru_cache(maxsize=16)
def _complement_basis_cached(N: int) -> np.ndarray:
    # Householder reflector mapping e_0 to 1/sqrt(N); its other columns span 1-perp
    h = np.full(N, 1.0 / np.sqrt(N))
    h[0] -= 1.0
    H = np.eye(N) - 2.0 * np.outer(h, h) / (h @ h)
    Q = H[:, 1:].copy()
    Q.flags.writeable = False
    return Q


def complement_basis(N: int) -> np.ndarray:
    """Orthonormal N x (N-1) basis of the complement of the all-ones vector."""
    if N < 2:
        raise ValueError("need at least two nodes")
    return _complement_basis_cached(int(N))


def dual_bound(X, L0, A, c) -> float:
    """c * max_k a_k^T X a_k + <X, L0>, an upper bound on lambda_2 of every
    feasible weighting when X is PSD, trace one and orthogonal to 1."""
    X = np.asarray(X, dtype=float)
    per_link = np.einsum("ik,ij,jk->k", A, X, A)
    top = float(per_link.max()) if per_link.size else 0.0
    return c * top + float(np.sum(X * L0))


@dataclass
class ClusterDual:
    S: np.ndarray  # q x q, PSD, trace one
    nu: float  # max_k a_k^T V S V^T a_k
    objective: float  # c * nu + <V S V^T, L0>
    status: str


def cluster_dual(V, L0, A, c) -> ClusterDual:
    """Minimise c * max_k <V S V^T, a_k a_k^T> + <V S V^T, L0> over trace-one PSD S."""
    V = np.asarray(V, dtype=float)
    q = V.shape[1]
    C = V.T @ L0 @ V
    C = (C + C.T) / 2
    Ar = V.T @ A
    if q == 1:
        S = np.ones((1, 1))
        status = "closed_form"
    elif c <= 0 or Ar.shape[1] == 0:
        vals, vecs = np.linalg.eigh(C)
        S = np.outer(vecs[:, 0], vecs[:, 0])
        status = "closed_form"
    else:
        sol = _lmi.solve(C, Ar, c)
        S = (sol.X + sol.X.T) / 2
        # clip tiny negative eigenvalues and renormalise to trace one
        ev, U = np.linalg.eigh(S)
        ev = np.maximum(ev, 0.0)
        S = (U * ev) @ U.T
        S /= np.trace(S)
        status = sol.status
    per_link = np.einsum("ik,ij,jk->k", Ar, S, Ar)
    nu = float(per_link.max()) if per_link.size else 0.0
    obj = c * nu + float(np.sum(S * C))
    return ClusterDual(S, nu, obj, status)
