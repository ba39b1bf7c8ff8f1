"""Primal-dual interior-point kernel for budgeted rank-one pencils.

Solves the pair

    max  t        s.t.  C + sum_k w_k a_k a_k^T - t I  >= 0,  w >= 0,  sum w <= budget
    min  <C, X> + budget * nu
                  s.t.  tr X = 1,  a_k^T X a_k + z_k = nu,  X >= 0,  z >= 0,  nu >= 0

with the HKM search direction and Mehrotra predictor-corrector steps.  All
constraint matrices are rank one, so the Schur complement is the Hadamard
product (A^T X A) * (A^T S^-1 A) plus diagonal terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

STEP_FRACTION = 0.98


@dataclass
class LmiSolution:
    w: np.ndarray
    t: float
    X: np.ndarray
    nu: float
    z: np.ndarray
    primal_objective: float  # <C, X> + budget * nu, an upper bound
    dual_objective: float  # t, a lower bound
    iterations: int
    status: str  # "optimal" | "max_iter" | "target_reached" | "target_unreachable" | "stalled"


def _max_step(M, dM):
    """Largest alpha with M + alpha dM positive semidefinite (M positive definite)."""
    try:
        R = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return 0.0
    Ri = sla.solve_triangular(R, np.eye(len(M)), lower=True)
    G = Ri @ dM @ Ri.T
    lo = np.linalg.eigvalsh((G + G.T) / 2)[0]
    return np.inf if lo >= 0 else -1.0 / lo


def _ratio(x, dx):
    neg = dx < 0
    return np.inf if not neg.any() else float(np.min(-x[neg] / dx[neg]))


def _sym(M):
    return (M + M.T) / 2


def _independent_rows(R, b):
    U, s, Vt = np.linalg.svd(R, full_matrices=False)
    r = int(np.sum(s > 1e-10 * max(1.0, s[0]))) if s.size else 0
    return s[:r, None] * Vt[:r], U[:, :r].T @ b


def solve(C, A, budget, *, w0=None, tol=1e-9, max_iter=100, target=None, target_tol=0.0, equality=None):
    """Run the interior-point method.

    ``target`` enables early exit once ``t >= target - target_tol`` or the
    primal bound drops below ``target - target_tol``.

    ``equality = (R, b)`` adds the constraints ``R w = b``.  They must imply
    ``sum w = budget``; the budget row then only caps the weights at twice
    the budget so its slack stays interior.
    """
    C = _sym(np.asarray(C, dtype=float))
    A = np.asarray(A, dtype=float)
    d, p = A.shape
    if budget <= 0 or p == 0:
        raise ValueError("interior-point kernel needs a positive budget and at least one pair")

    # normalise the budget to 1 so tolerances are scale-free
    scale = float(budget)
    C = C / scale
    cap = 1.0
    if equality is not None:
        R, b = _independent_rows(np.asarray(equality[0], dtype=float), np.asarray(equality[1], dtype=float) / scale)
        cap = 2.0
    else:
        R, b = np.zeros((0, p)), np.zeros(0)
    r = len(b)
    lam = np.zeros(r)
    uniform = np.full(p, 1.0 / (p + 1))
    if w0 is not None and np.sum(w0) > 0:
        w0 = np.maximum(np.asarray(w0, dtype=float), 0.0)
        w = 0.5 * w0 / w0.sum() * (p / (p + 1)) + 0.5 * uniform
    else:
        w = uniform
    s_last = cap - w.sum()
    Z = C + (A * w) @ A.T
    t = np.linalg.eigvalsh(Z)[0] - 1.0
    Id = np.eye(d)
    X = Id / d
    diagAXA = np.einsum("ik,ij,jk->k", A, X, A)
    nu = 2.0 * diagAXA.max() + 1.0 / d
    z = nu - diagAXA

    status = "max_iter"
    it = 0
    best = None
    since_best = 0
    for it in range(1, max_iter + 1):
        S = _sym(C + (A * w) @ A.T - t * Id)
        pobj = float(np.sum(C * X) + cap * nu - lam @ b)
        dobj = float(t)
        rp_w = np.einsum("ik,ij,jk->k", A, X, A) + z - nu + R.T @ lam
        rp_t = 1.0 - np.trace(X)
        r_eq = b - R @ w
        pinf = max(np.abs(rp_w).max(initial=0.0), abs(rp_t), np.abs(r_eq).max(initial=0.0))
        gap = pobj - dobj
        if best is None or (pinf <= 1e-8 and gap < best[0]):
            best = (gap, w.copy(), t, X.copy(), nu, z.copy(), lam.copy())
            since_best = 0
        else:
            since_best += 1
        if since_best >= 8:
            status = "stalled"
            break
        if target is not None and pinf <= 1e-9:
            if dobj >= target / scale - target_tol / scale:
                status = "target_reached"
                break
            if pobj < target / scale - target_tol / scale:
                status = "target_unreachable"
                break
        if gap <= tol * (1.0 + abs(dobj)) and pinf <= tol:
            status = "optimal"
            break

        try:
            cS = sla.cho_factor(S)
        except np.linalg.LinAlgError:
            status = "stalled"
            break
        Sinv = sla.cho_solve(cS, Id)
        Sinv = _sym(Sinv)
        AX = A.T @ X  # p x d
        G1 = AX @ A
        G2 = A.T @ Sinv @ A
        XSi = X @ Sinv
        sXSi = _sym(XSi)
        M = np.empty((p + 1, p + 1))
        M[:p, :p] = G1 * G2 + np.diag(z / w) + (nu / s_last)
        col = -np.einsum("ik,ij,jk->k", A, sXSi, A)
        M[:p, p] = col
        M[p, :p] = col
        M[p, p] = np.trace(XSi)
        if r:
            # saddle-point system [[M, -R^T], [R, 0]] for the equality multipliers
            Kmat = np.zeros((p + 1 + r, p + 1 + r))
            Kmat[:p + 1, :p + 1] = M
            Kmat[:p, p + 1:] = -R.T
            Kmat[p + 1:, :p] = R
            try:
                lu = sla.lu_factor(Kmat)
                ksolve = lambda v: sla.lu_solve(lu, v)  # noqa: E731
            except (np.linalg.LinAlgError, ValueError):
                ksolve = lambda v: np.linalg.lstsq(Kmat, v, rcond=None)[0]  # noqa: E731

            def msolve(v):
                out = ksolve(np.concatenate([v, r_eq]))
                return out
        else:
            try:
                cM = sla.cho_factor(M)
                msolve = lambda v: sla.cho_solve(cM, v)  # noqa: E731
            except np.linalg.LinAlgError:
                msolve = lambda v: np.linalg.lstsq(M, v, rcond=None)[0]  # noqa: E731

        mu = (np.sum(X * S) + z @ w + nu * s_last) / (d + p + 1)

        def direction(Tmat, Tlin_w, Tlin_last):
            # Tmat: target for X S (matrix), Tlin_*: targets for x*s
            K = _sym(Tmat @ Sinv) - X
            kw = Tlin_w / w - z
            kl = Tlin_last / s_last - nu
            AK = np.concatenate([-np.einsum("ik,ij,jk->k", A, K, A) - kw + kl, [np.trace(K)]])
            rhs = np.concatenate([rp_w, [rp_t]]) - AK
            dy = msolve(rhs)
            dw, dt, dlam = dy[:p], dy[p], dy[p + 1:]
            dS = (A * dw) @ A.T - dt * Id
            dX = K - _sym(X @ dS @ Sinv)
            dz = kw - z * dw / w
            dnu = kl + nu * dw.sum() / s_last
            return dw, dt, dS, dX, dz, dnu, dlam

        # predictor
        dw, dt, dS, dX, dz, dnu, dlam = direction(np.zeros((d, d)), np.zeros(p), 0.0)
        ap = min(1.0, _max_step(X, dX), _ratio(z, dz), _ratio(np.array([nu]), np.array([dnu])))
        ad = min(1.0, _max_step(S, dS), _ratio(w, dw), _ratio(np.array([s_last]), np.array([-dw.sum()])))
        mu_aff = (np.sum((X + ap * dX) * (S + ad * dS)) + (z + ap * dz) @ (w + ad * dw)
                  + (nu + ap * dnu) * (s_last - ad * dw.sum())) / (d + p + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        # corrector
        Tm = sigma * mu * Id - dX @ dS
        Tw = sigma * mu - dz * dw
        Tl = sigma * mu + dnu * dw.sum()
        dw, dt, dS, dX, dz, dnu, dlam = direction(Tm, Tw, Tl)
        ap = min(1.0, STEP_FRACTION * _max_step(X, dX), STEP_FRACTION * _ratio(z, dz),
                 STEP_FRACTION * _ratio(np.array([nu]), np.array([dnu])))
        ad = min(1.0, STEP_FRACTION * _max_step(S, dS), STEP_FRACTION * _ratio(w, dw),
                 STEP_FRACTION * _ratio(np.array([s_last]), np.array([-dw.sum()])))
        if ap <= 1e-12 and ad <= 1e-12:
            status = "stalled"
            break
        X = _sym(X + ap * dX)
        z = z + ap * dz
        nu = nu + ap * dnu
        lam = lam + ap * dlam
        w = w + ad * dw
        t = t + ad * dt
        s_last = s_last - ad * dw.sum()

    if status in ("stalled", "max_iter") and best is not None:
        _, w, t, X, nu, z, lam = best
    return LmiSolution(
        w=w * scale,
        t=float(t) * scale,
        X=X,
        nu=float(nu),
        z=z,
        primal_objective=float(np.sum(C * X) + cap * nu - lam @ b) * scale,
        dual_objective=float(t) * scale,
        iterations=it,
        status=status,
    )
