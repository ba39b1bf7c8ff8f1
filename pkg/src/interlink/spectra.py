"""Symmetric eigen-decompositions, Fiedler data and specific connectivity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LayerGraph, as_matrix
from .errors import ConvergenceFailure

SIGN_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1]) if len(self.eigenvalues) > 1 else 0.0


@dataclass(frozen=True)
class FiedlerData:
    lambda2: float
    vector: np.ndarray
    multiplicity: int
    cluster_tolerance: float
    cluster_basis: np.ndarray  # N x multiplicity, orthonormal, orthogonal to 1
    cluster_values: np.ndarray


def fix_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its first component with magnitude above 1e-9 is positive."""
    v = np.array(v, dtype=float)
    big = np.flatnonzero(np.abs(v) > SIGN_TOL)
    if big.size and v[big[0]] < 0:
        v = -v
    return v


def _fix_signs(V):
    V = np.array(V, dtype=float)
    for k in range(V.shape[1]):
        V[:, k] = fix_sign(V[:, k])
    return V


def cluster_tolerance(eigenvalues) -> float:
    top = float(eigenvalues[-1]) if len(eigenvalues) else 0.0
    return 1e-6 * max(1.0, top)


def full_spectrum(matrix) -> Spectrum:
    """All eigenpairs of a symmetric matrix, ascending, sign-fixed and residual-checked."""
    M = as_matrix(matrix)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max(initial=0.0))):
        raise ValueError("matrix is not symmetric")
    M = (M + M.T) / 2
    try:
        vals, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    vecs = _fix_signs(vecs)
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    if vals.size:
        resid = np.linalg.norm(M @ vecs - vecs * vals, axis=0).max()
        if not resid <= 1e-9 * scale:
            raise ConvergenceFailure(f"eigen-residual {resid:.3e} exceeds {1e-9 * scale:.3e}")
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return Spectrum(vals, vecs)


def fiedler_from_spectrum(spec: Spectrum, tol=None) -> FiedlerData:
    vals, vecs = spec.eigenvalues, spec.eigenvectors
    N = len(vals)
    if N < 2:
        raise ValueError("algebraic connectivity needs at least two nodes")
    tol = cluster_tolerance(vals) if tol is None else float(tol)
    lam2 = float(vals[1])
    idx = [k for k in range(1, N) if abs(vals[k] - lam2) <= tol]
    q = len(idx)
    if abs(vals[0] - lam2) <= tol:
        # disconnected: the zero eigenspace contains 1, keep its orthogonal complement
        span = vecs[:, [0] + idx]
        span = span - span.mean(axis=0, keepdims=True)
        U, s, _ = np.linalg.svd(span, full_matrices=False)
        basis = U[:, :q]
    else:
        basis = vecs[:, idx]
    basis = _fix_signs(basis)
    return FiedlerData(
        lambda2=lam2,
        vector=basis[:, 0].copy(),
        multiplicity=q,
        cluster_tolerance=tol,
        cluster_basis=basis,
        cluster_values=np.array(vals[idx]),
    )


def fiedler(matrix, tol=None) -> FiedlerData:
    return fiedler_from_spectrum(full_spectrum(matrix), tol)


def algebraic_connectivity(matrix) -> float:
    M = as_matrix(matrix)
    if M.shape[0] < 2:
        return 0.0
    return float(np.linalg.eigvalsh(M)[1])


def specific_connectivity(layer: LayerGraph) -> float:
    """Algebraic connectivity per node."""
    if layer.node_count < 2:
        return 0.0
    return fiedler(layer.laplacian()).lambda2 / layer.node_count


def rayleigh_quotient(matrix, v) -> float:
    M = as_matrix(matrix)
    v = np.asarray(v, dtype=float)
    return float(v @ M @ v / (v @ v))
