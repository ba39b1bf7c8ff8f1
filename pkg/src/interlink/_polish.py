"""Gauss-Newton refinement of a near-optimal primal-dual pair.

At an optimum with a q-fold lambda_2 the pair satisfies the smooth system

    L(w) V = lambda V,   V^T V = I,   (V^T a_k)^T S (V^T a_k) = nu  for k in the support,
    sum w = c,   tr S = 1

with V spanning the lambda_2 eigenspace and X = V S V^T the dual matrix.
Interior-point iterates stall a few digits short of this system because
lambda_2 is flat to second order along eigenspace rotations; a handful of
minimum-norm Newton steps recovers the missing digits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PolishedPair:
    w: np.ndarray
    V: np.ndarray
    S: np.ndarray
    lam: float
    nu: float
    residual: float
    iterations: int


def _sym_index(q):
    return [(i, j) for i in range(q) for j in range(i, q)]


def _unpack(x, s, N, q, idx):
    w = x[:s]
    V = x[s:s + N * q].reshape(N, q, order="F")
    lam = x[s + N * q]
    S = np.zeros((q, q))
    for t, (i, j) in enumerate(idx):
        S[i, j] = S[j, i] = x[s + N * q + 1 + t]
    nu = x[-1]
    return w, V, lam, S, nu


def _residual_and_jacobian(x, L0, AJ, c, N, q, idx):
    s = AJ.shape[1]
    w, V, lam, S, nu = _unpack(x, s, N, q, idx)
    ns = len(idx)
    L = L0 + (AJ * w) @ AJ.T
    B = AJ.T @ V  # s x q, row k is b_k
    nvar = x.size
    # R1: (L - lam) V, column-major
    R1 = (L @ V - lam * V).ravel(order="F")
    J1 = np.zeros((N * q, nvar))
    for col in range(q):
        rows = slice(col * N, (col + 1) * N)
        J1[rows, :s] = AJ * B[:, col]
        J1[rows, s + col * N:s + (col + 1) * N] = L - lam * np.eye(N)
        J1[rows, s + N * q] = -V[:, col]
    # R2: V^T V - I on the upper triangle
    G = V.T @ V - np.eye(q)
    R2 = np.array([G[i, j] for i, j in idx])
    J2 = np.zeros((ns, nvar))
    for t, (i, j) in enumerate(idx):
        J2[t, s + j * N:s + (j + 1) * N] += V[:, i]
        J2[t, s + i * N:s + (i + 1) * N] += V[:, j]
    # R3: b_k^T S b_k - nu on the support
    SB = B @ S  # s x q
    R3 = np.einsum("kq,kq->k", B, SB) - nu
    J3 = np.zeros((s, nvar))
    for col in range(q):
        J3[:, s + col * N:s + (col + 1) * N] = 2.0 * AJ.T * SB[:, [col]]
    for t, (i, j) in enumerate(idx):
        J3[:, s + N * q + 1 + t] = B[:, i] * B[:, j] * (1.0 if i == j else 2.0)
    J3[:, -1] = -1.0
    # R4: budget and trace
    R4 = np.array([w.sum() - c, np.trace(S) - 1.0])
    J4 = np.zeros((2, nvar))
    J4[0, :s] = 1.0
    for t, (i, j) in enumerate(idx):
        if i == j:
            J4[1, s + N * q + 1 + t] = 1.0
    return np.concatenate([R1, R2, R3, R4]), np.vstack([J1, J2, J3, J4])


def _newton(L0, A, J, V, S, w, c, max_iter):
    N = A.shape[0]
    q = V.shape[1]
    AJ = A[:, J]
    L = L0 + (AJ * w[J]) @ AJ.T
    lam = float(np.trace(V.T @ L @ V) / q)
    B = AJ.T @ V
    nu = float(np.mean(np.einsum("kq,kq->k", B, B @ S)))
    idx = _sym_index(q)
    x = np.concatenate([w[J], V.ravel(order="F"), [lam], [S[i, j] for i, j in idx], [nu]])
    scale = max(1.0, float(np.abs(L).max()))
    r, Jac = _residual_and_jacobian(x, L0, AJ, c, N, q, idx)
    res_norm = float(np.linalg.norm(r))
    it = 0
    for it in range(1, max_iter + 1):
        if res_norm <= 1e-13 * scale:
            break
        step = np.linalg.lstsq(Jac, -r, rcond=1e-10)[0]
        t = 1.0
        for _ in range(30):
            trial = x + t * step
            r_t, Jac_t = _residual_and_jacobian(trial, L0, AJ, c, N, q, idx)
            if np.linalg.norm(r_t) < res_norm:
                break
            t *= 0.5
        else:
            break
        x, r, Jac, res_norm = trial, r_t, Jac_t, float(np.linalg.norm(r_t))
    wJ, V, lam, S, nu = _unpack(x, J.size, N, q, idx)
    return wJ, V, S, lam, nu, res_norm, it


def _fb_residual_and_jacobian(x, L0, A, c, N, q, idx, ws, ns):
    # complementarity on every pair via phi(a, b) = a + b - sqrt(a^2 + b^2),
    # a = w_k / ws, b = (nu - b_k^T S b_k) / ns
    p = A.shape[1]
    r, Jac = _residual_and_jacobian(x, L0, A, c, N, q, idx)
    nq = N * q
    nsym = len(idx)
    w = x[:p]
    nu = x[-1]
    g = r[nq + nsym:nq + nsym + p] + nu  # b_k^T S b_k
    a = w / ws
    b = (nu - g) / ns
    rad = np.hypot(a, b)
    safe = rad > 1e-300
    da = np.where(safe, 1.0 - a / np.where(safe, rad, 1.0), 1.0 - 1.0 / np.sqrt(2.0))
    db = np.where(safe, 1.0 - b / np.where(safe, rad, 1.0), 1.0 - 1.0 / np.sqrt(2.0))
    rows = slice(nq + nsym, nq + nsym + p)
    Jg = Jac[rows].copy()
    Jg[:, -1] = 0.0  # gradient of g alone
    J3 = -(db / ns)[:, None] * Jg
    J3[np.arange(p), np.arange(p)] += da / ws
    J3[:, -1] += db / ns
    r = r.copy()
    r[rows] = a + b - rad
    Jac[rows] = J3
    return r, Jac


def _newton_fb(L0, A, V, S, w, c, max_iter):
    N, p = A.shape
    q = V.shape[1]
    L = L0 + (A * w) @ A.T
    lam = float(np.trace(V.T @ L @ V) / q)
    B = A.T @ V
    nu = float(np.einsum("kq,kq->k", B, B @ S).max())
    idx = _sym_index(q)
    ws = c / p
    ns = max(nu, 1e-300)
    x = np.concatenate([w, V.ravel(order="F"), [lam], [S[i, j] for i, j in idx], [nu]])
    scale = max(1.0, float(np.abs(L).max()))
    r, Jac = _fb_residual_and_jacobian(x, L0, A, c, N, q, idx, ws, ns)
    res_norm = float(np.linalg.norm(r))
    it = 0
    for it in range(1, max_iter + 1):
        if res_norm <= 1e-13 * scale:
            break
        step = np.linalg.lstsq(Jac, -r, rcond=1e-10)[0]
        t = 1.0
        for _ in range(40):
            trial = x + t * step
            r_t, Jac_t = _fb_residual_and_jacobian(trial, L0, A, c, N, q, idx, ws, ns)
            if np.linalg.norm(r_t) < (1.0 - 1e-4 * t) * res_norm:
                break
            t *= 0.5
        else:
            break
        x, r, Jac, res_norm = trial, r_t, Jac_t, float(np.linalg.norm(r_t))
    wn, V, lam, S, nu = _unpack(x, p, N, q, idx)
    return wn, V, S, lam, nu, res_norm, it


def _dual_violation(A, V, S, nu):
    B = A.T @ V
    g = np.einsum("kq,kq->k", B, B @ S)
    return max(0.0, float((g - nu).max(initial=0.0)))


def polish_pair(L0, A, w, X, c, *, max_iter=12, fb_iter=40, support_tol=1e-7, rank_tols=(1e-6, 1e-3),
                support_cuts=(1e-2, 1e-1, 3e-1)) -> PolishedPair | None:
    """Refine (w, X) to the smooth optimality system.

    A semismooth Newton solve over every pair, with a Fischer-Burmeister
    complementarity residual, runs first.  If it stalls, typically because
    some pairs carry no weight yet sit exactly on the nu sphere, the support
    is fixed instead: once from ``support_tol * c`` on the input weights and
    once for each ``support_cuts`` fraction of c/p on the semismooth iterate.
    Pairs the Newton step pushes negative are dropped and the system is
    solved again.  Candidates are ranked by the larger of the residual and
    the dual infeasibility on the pairs left out.
    """
    N, p = A.shape
    ev, E = np.linalg.eigh((X + X.T) / 2)
    best = None
    seen = set()

    def consider(cand, V):
        nonlocal best
        viol = _dual_violation(A, cand.V, cand.S, cand.nu)
        cand.residual = max(cand.residual, viol)
        if best is None or cand.residual < best.residual:
            best = cand

    for rt in rank_tols:
        keep = ev > rt * ev[-1]
        q = int(keep.sum())
        if q < 1 or q in seen:
            continue
        seen.add(q)
        V = E[:, keep]
        S = np.diag(ev[keep] / ev[keep].sum())
        wn, Vn, Sn, lam, nu, res, it = _newton_fb(L0, A, V, S, w, c, fb_iter)
        consider(PolishedPair(np.maximum(wn, 0.0), Vn, Sn, float(lam), float(nu), res, it), Vn)
        if best.residual <= 1e-12 * max(1.0, c):
            continue
        starts = [(np.flatnonzero(w > support_tol * c), V, S, w)]
        wn = np.maximum(wn, 0.0)
        starts += [(np.flatnonzero(wn > cut * c / p), Vn, Sn, wn) for cut in support_cuts]
        for J, V0, S0, w0 in starts:
            for _ in range(6):
                if J.size == 0:
                    break
                wJ, Vj, Sj, lam, nu, res, it = _newton(L0, A, J, V0, S0, w0, c, max_iter)
                neg = wJ < -1e-12 * c
                if not neg.any():
                    w_full = np.zeros(p)
                    w_full[J] = np.maximum(wJ, 0.0)
                    consider(PolishedPair(w_full, Vj, Sj, float(lam), float(nu), res, it), Vj)
                    break
                J = J[~neg]
    return best
