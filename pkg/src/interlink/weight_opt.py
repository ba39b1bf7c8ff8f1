"""Maximise the algebraic connectivity over interlink weights under a budget.

The default iterative path solves the semidefinite program on the complement
of the all-ones vector with a primal-dual interior-point method (``_lmi``).
A projected supergradient ascent is kept as ``method="supergradient"``.
"""

from __future__ import annotations

import dataclasses

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _lmi
from ._dual import cluster_dual, complement_basis, dual_bound
from ._polish import polish_pair
from .closed_form import (
    RegularityWitness,
    regular_threshold_bracket,
    regularity_pattern_feasible,
    regularity_witness,
    upper_bound_F,
)
from .core import MultilayerNetwork, WeightAssignment
from .errors import (
    InfeasiblePattern,
    InvalidWeight,
    NoCoalescence,
    NotRegular,
    TooManyPairs,
    Unconverged,
    ValidationError,
)
from .spectra import fiedler_from_spectrum, full_spectrum

ANALYTIC_RTOL = 1e-10
MAX_CLUSTER = 6


@dataclass(frozen=True)
class SolverOptions:
    tol_gap: float = 1e-4
    max_iter: int = 5000
    step_rule: str = "polyak"  # supergradient only: "polyak" | "diminishing"
    rng_seed: int = 42
    eigen_cluster_tol: float | None = None  # None: 1e-6 * max(1, lambda_N)
    method: str = "interior"  # "interior" | "supergradient"
    warm_start: bool = True

    def __post_init__(self):
        if not self.tol_gap > 0:
            raise ValidationError(f"tol_gap must be positive, got {self.tol_gap}")
        if int(self.max_iter) < 1:
            raise ValidationError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.method not in ("interior", "supergradient"):
            raise ValidationError(f"unknown method {self.method!r}")
        if self.step_rule not in ("polyak", "diminishing"):
            raise ValidationError(f"unknown step rule {self.step_rule!r}")


@dataclass(frozen=True)
class OptimizationResult:
    assignment: WeightAssignment
    lambda2_star: float
    mu: float
    certified_upper: float
    gap: float
    mode: str  # "analytic" | "iterative" | "grid"
    iterations: int
    fiedler_multiplicity: int
    budget: float = 0.0
    status: str = "optimal"
    dual_matrix: np.ndarray | None = field(default=None, repr=False)


# ------------------------------------------------------------------ helpers


def _check_budget(network, c):
    c = float(c)
    if not math.isfinite(c) or c < 0:
        raise InvalidWeight(f"budget must be finite and nonnegative, got {c}")
    if c > 0 and not network.pattern.pairs:
        raise InfeasiblePattern("positive budget but the admissible set is empty")
    return c


def _fiedler_of(M, options):
    spec = full_spectrum(M)
    return fiedler_from_spectrum(spec, options.eigen_cluster_tol)


def _assignment(pattern, w, c, label):
    w = np.maximum(np.asarray(w, dtype=float), 0.0)
    s = w.sum()
    if c == 0 or s == 0:
        w = np.zeros(len(pattern)) if c == 0 else np.full(len(pattern), c / len(pattern))
    else:
        w = w * (c / s)
    return WeightAssignment.from_vector(pattern, w, budget=c, label=label)


def _cluster_bound(fd, L0, A, c):
    if fd.multiplicity > MAX_CLUSTER:
        return math.inf
    return cluster_dual(fd.cluster_basis, L0, A, c).objective


def _result(network, assignment, fd, upper, mode, iterations, c, status="optimal", X=None):
    lam = fd.lambda2
    upper = min(upper, upper_bound_F(network.n, network.m, c)) if c > 0 else upper
    return OptimizationResult(
        assignment=assignment,
        lambda2_star=lam,
        mu=lam / network.N,
        certified_upper=upper,
        gap=upper - lam,
        mode=mode,
        iterations=iterations,
        fiedler_multiplicity=fd.multiplicity,
        budget=c,
        status=status,
        dual_matrix=X,
    )


def _zero_budget(network, options):
    L0 = network.intra_laplacian()
    fd = _fiedler_of(L0, options)
    a = WeightAssignment({p: 0.0 for p in network.pattern.pairs}, 0.0, "zero")
    # two uncoupled components: lambda_2 is exactly 0
    fd = dataclasses.replace(fd, lambda2=0.0)
    return _result(network, a, fd, 0.0, "analytic", 0, 0.0)


# ----------------------------------------------------------------- analytic


def analytic_optimum(witness: RegularityWitness, n, m, c, network: MultilayerNetwork | None = None,
                     options: SolverOptions | None = None) -> OptimizationResult:
    """Optimum below the threshold: regular weights reach (1/n + 1/m) c.

    When ``network`` is given the multiplicity is read from the actual
    supra-Laplacian; otherwise it is reported as 1.
    """
    if not witness.feasible:
        raise NotRegular("the admissible set admits no regular weighting")
    F = upper_bound_F(n, m, c)
    assignment = WeightAssignment(dict(witness.weights.weights), c, "analytic")
    mult = 1
    if network is not None:
        from .core import build_supra_laplacian

        fd = _fiedler_of(build_supra_laplacian(network, assignment).matrix, options or SolverOptions())
        mult = fd.multiplicity
    N = n + m
    return OptimizationResult(assignment, F, F / N, F, 0.0, "analytic", 0, mult, float(c))


def _try_analytic(network, witness, c, options):
    A = network.incidence()
    L0 = network.intra_laplacian()
    w = witness.weights.vector(network.pattern)
    fd = _fiedler_of(L0 + (A * w) @ A.T, options)
    F = upper_bound_F(network.n, network.m, c)
    if fd.lambda2 >= F - ANALYTIC_RTOL * max(1.0, F):
        assignment = WeightAssignment.from_vector(network.pattern, w, budget=c, label="analytic")
        return _result(network, assignment, fd, F, "analytic", 0, c)
    return None


def _try_regular(network, witness, c, options):
    if network.N < 3:
        return None
    F = upper_bound_F(network.n, network.m, c)
    tol = ANALYTIC_RTOL * max(1.0, F)
    w0 = witness.weights.vector(network.pattern)
    sol = _regular_lmi(network, c, w0=w0, target=F + tol, target_tol=0.0)
    if sol.t < F:
        return None
    w = _regular_weights(network, sol.w, c)
    witness = RegularityWitness(True, WeightAssignment.from_vector(network.pattern, w, budget=c),
                                network.n, network.m, c)
    return _try_analytic(network, witness, c, options)


# ---------------------------------------------------------------- iterative


def _polished(network, assignment, fd, X, c, options):
    """Newton-refined pair, kept only if it is feasible and at least as good."""
    A = network.incidence()
    L0 = network.intra_laplacian()
    w = assignment.vector(network.pattern)
    pp = polish_pair(L0, A, w, X, c)
    if pp is None or pp.w.sum() <= 0:
        return None
    scale = max(1.0, float(np.abs(L0).max()), c)
    if pp.residual > 1e-9 * scale or np.linalg.eigvalsh(pp.S)[0] < -1e-12:
        return None
    cand = _assignment(network.pattern, pp.w, c, "iterative")
    fd_pol = _fiedler_of(L0 + (A * cand.vector(network.pattern)) @ A.T, options)
    if fd_pol.lambda2 < fd.lambda2:
        return None
    Vq, R = np.linalg.qr(pp.V)
    X_pol = Vq @ (R @ pp.S @ R.T) @ Vq.T
    X_pol = (X_pol + X_pol.T) / 2
    X_pol /= np.trace(X_pol)
    return cand, fd_pol, X_pol, dual_bound(X_pol, L0, A, c)


def _interior(network, c, options, w0):
    pattern = network.pattern
    A = network.incidence()
    L0 = network.intra_laplacian()
    Q = complement_basis(network.N)
    sol = _lmi.solve(Q.T @ L0 @ Q, Q.T @ A, c, w0=w0, max_iter=min(int(options.max_iter), 150))
    assignment = _assignment(pattern, sol.w, c, "iterative")
    w = assignment.vector(pattern)
    fd = _fiedler_of(L0 + (A * w) @ A.T, options)
    X = Q @ sol.X @ Q.T
    X = (X + X.T) / 2
    X /= np.trace(X)
    upper = dual_bound(X, L0, A, c)
    polished = _polished(network, assignment, fd, X, c, options)
    if polished is not None:
        assignment, fd, X, upper_pol = polished
        upper = min(upper, upper_pol)
    upper = min(upper, _cluster_bound(fd, L0, A, c))
    return _result(network, assignment, fd, upper, "iterative", sol.iterations, c, sol.status, X)


def project_simplex(v, c):
    """Euclidean projection of ``v`` onto {w >= 0, sum w = c}."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return v
    # shift invariance keeps huge steps from cancelling below the budget
    v = v - v.max()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - c
    idx = np.arange(1, v.size + 1)
    active = np.nonzero(u - css / idx > 0)[0]
    rho = active[-1] if active.size else 0
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _supergradient(network, c, options, w0):
    """Projected supergradient ascent with an ergodic dual bound.

    The step-weighted average of the cluster projectors V V^T / q is a dual
    feasible point, so ``dual_bound`` of that average certifies the iterate.
    """
    pattern = network.pattern
    A = network.incidence()
    L0 = network.intra_laplacian()
    p = len(pattern)
    w = np.full(p, c / p) if w0 is None else project_simplex(np.asarray(w0, dtype=float), c)
    F = upper_bound_F(network.n, network.m, c)
    best = None
    upper = F
    X_avg = np.zeros_like(L0)
    weight_sum = 0.0
    it = 0
    status = "max_iter"
    for it in range(1, int(options.max_iter) + 1):
        fd = _fiedler_of(L0 + (A * w) @ A.T, options)
        lam = fd.lambda2
        if best is None or lam > best[0]:
            best = (lam, w.copy(), fd)
        V = fd.cluster_basis
        P = V @ V.T / V.shape[1]
        AV = A.T @ V
        g = np.sum(AV * AV, axis=1) / V.shape[1]  # <V V^T / q, a_k a_k^T>
        g = g - g.mean()
        gn = float(np.sqrt(g @ g))
        if options.step_rule == "polyak":
            # target level halfway between the best value and the best bound
            step = 0.5 * (upper - best[0]) / max(gn, 1e-300) ** 2
        else:
            step = c / math.sqrt(it) / max(gn, 1e-300)
        X_avg += step * P
        weight_sum += step
        if it % 10 == 0 or gn <= 1e-300:
            upper = min(upper, dual_bound(X_avg / weight_sum, L0, A, c))
            if it % 50 == 0 or gn <= 1e-300:
                upper = min(upper, _cluster_bound(best[2], L0, A, c))
        if upper - best[0] <= options.tol_gap * max(1.0, best[0]):
            status = "optimal"
            break
        if gn <= 1e-300:
            break
        w = project_simplex(w + step * g, c)
    lam, w, fd = best
    assignment = _assignment(pattern, w, c, "iterative")
    return _result(network, assignment, fd, upper, "iterative", it, c, status)


def maximize_lambda2(network: MultilayerNetwork, c, options: SolverOptions | None = None,
                     *, warm_start=None) -> OptimizationResult:
    """Largest algebraic connectivity reachable with budget ``c`` on the admissible set.

    Regular weights are tried first; if they reach (1/n + 1/m) c the result
    is analytic.  Otherwise the semidefinite program is solved iteratively
    and a dual bound certifies the answer.  ``warm_start`` is a weight
    vector aligned with ``network.pattern.pairs``.
    """
    options = options or SolverOptions()
    c = _check_budget(network, c)
    if c == 0:
        return _zero_budget(network, options)
    witness = regularity_witness(network.pattern, network.n, network.m, c)
    if witness.feasible:
        res = _try_analytic(network, witness, c, options)
        if res is not None:
            return res
        res = _try_regular(network, witness, c, options)
        if res is not None:
            return res
    if options.method == "interior":
        res = _interior(network, c, options, warm_start)
    else:
        res = _supergradient(network, c, options, warm_start)
    if res.gap > options.tol_gap * max(1.0, res.lambda2_star):
        raise Unconverged(f"duality gap {res.gap:.3e} above tolerance after {res.iterations} iterations", res)
    return res


# -------------------------------------------------------------------- oracle


def _compositions(total, parts):
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield out


def oracle_grid_optimum(network: MultilayerNetwork, c, grid_step=0.01, options: SolverOptions | None = None,
                        chunk=20000) -> OptimizationResult:
    """Exhaustive search over the budget simplex with spacing ``grid_step * c``."""
    options = options or SolverOptions()
    c = _check_budget(network, c)
    p = len(network.pattern)
    if p > 4:
        raise TooManyPairs(f"grid oracle handles at most 4 admissible pairs, got {p}")
    if c == 0:
        return _zero_budget(network, options)
    K = int(round(1.0 / grid_step))
    if K < 1 or abs(K * grid_step - 1.0) > 1e-9:
        raise ValidationError(f"grid_step must be 1/K for an integer K, got {grid_step}")
    A = network.incidence()
    L0 = network.intra_laplacian()
    grid = np.array(list(_compositions(K, p)), dtype=float) * (c / K)
    best_val, best_idx = -math.inf, 0
    for start in range(0, len(grid), chunk):
        W = grid[start:start + chunk]
        stack = L0[None, :, :] + np.einsum("bk,ik,jk->bij", W, A, A)
        lam2 = np.linalg.eigvalsh(stack)[:, 1]
        k = int(np.argmax(lam2))
        if lam2[k] > best_val:
            best_val, best_idx = float(lam2[k]), start + k
    assignment = WeightAssignment.from_vector(network.pattern, grid[best_idx], budget=c, label="grid")
    w = grid[best_idx]
    fd = _fiedler_of(L0 + (A * w) @ A.T, options)
    X = fd.cluster_basis @ fd.cluster_basis.T / fd.multiplicity
    return _result(network, assignment, fd, dual_bound(X, L0, A, c), "grid", len(grid), c)


# --------------------------------------------------------------------- sweep


def sweep_budget(network: MultilayerNetwork, c_values, options: SolverOptions | None = None):
    """Solve for each budget in ascending order, warm-starting from the previous optimum."""
    options = options or SolverOptions()
    c_values = [float(c) for c in c_values]
    if any(b < a for a, b in zip(c_values, c_values[1:])):
        raise ValidationError("budgets must be sorted ascending")
    out = []
    prev = None
    for c in c_values:
        w0 = None
        if options.warm_start and prev is not None and prev.budget > 0 and c > 0:
            w0 = prev.assignment.vector(network.pattern) * (c / prev.budget)
        res = maximize_lambda2(network, c, options, warm_start=w0)
        out.append((c, res))
        prev = res
    return out


# ----------------------------------------------------------------- threshold


def _invariant_basis(n, m) -> np.ndarray:
    """Orthonormal basis of {x : layer-1 part and layer-2 part each sum to zero}."""
    M = np.zeros((n + m, 2))
    M[:n, 0] = 1.0
    M[n:, 1] = 1.0
    U = np.linalg.svd(M, full_matrices=True)[0]
    return U[:, 2:]


def regularity_constraints(pattern, c):
    """(R, b) with R w = b the row-sum c/n and column-sum c/m conditions."""
    n, m = pattern.n, pattern.m
    R = np.zeros((n + m, len(pattern)))
    for k, (i, j) in enumerate(pattern.pairs):
        R[i, k] = 1.0
        R[n + j, k] = 1.0
    b = np.concatenate([np.full(n, c / n), np.full(m, c / m)])
    return R, b


def _regular_lmi(network, c, w0=None, target=None, target_tol=0.0):
    """Maximise the smallest eigenvalue on the layer-centred subspace over regular weights.

    Regular weights leave that subspace invariant, so lambda_2 of the
    network is min((1/n + 1/m) c, optimum of this problem).
    """
    if network.n + network.m < 3:
        raise ValidationError("need at least three nodes for a nontrivial invariant subspace")
    P = _invariant_basis(network.n, network.m)
    A = network.incidence()
    L0 = network.intra_laplacian()
    return _lmi.solve(P.T @ L0 @ P, P.T @ A, c, w0=w0, target=target, target_tol=target_tol,
                      equality=regularity_constraints(network.pattern, c))


def _regular_weights(network, w, c):
    """Clip and rescale IPM weights; the equality residual is already at rounding level."""
    w = np.maximum(np.asarray(w, dtype=float), 0.0)
    return w * (c / w.sum())


def _reaches_bound(network, c, tol):
    """True when some regular weighting has lambda_2 >= (1/n + 1/m) c - tol."""
    F = upper_bound_F(network.n, network.m, c)
    witness = regularity_witness(network.pattern, network.n, network.m, c)
    A = network.incidence()
    L0 = network.intra_laplacian()
    w = witness.weights.vector(network.pattern)
    if np.linalg.eigvalsh(L0 + (A * w) @ A.T)[1] >= F - tol:
        return True
    sol = _regular_lmi(network, c, w0=w, target=F, target_tol=tol)
    if sol.status == "target_reached":
        return True
    if sol.status == "target_unreachable":
        return False
    return bool(sol.t >= F - tol)


def layer_lambda2(network: MultilayerNetwork) -> tuple[float, float]:
    out = []
    for layer in (network.layer1, network.layer2):
        out.append(float(np.linalg.eigvalsh(layer.laplacian())[1]) if layer.node_count > 1 else 0.0)
    return out[0], out[1]


def detect_threshold_numeric(network: MultilayerNetwork, options: SolverOptions | None = None,
                             *, rel_tol=1e-10) -> float:
    """Largest budget at which regular weights still reach (1/n + 1/m) c.

    Beyond it lambda_2 and lambda_3 of the optimum coalesce.  With g(c) the
    best smallest eigenvalue on the layer-centred subspace over regular
    weights, g is concave with g(0) = min(l21, l22) > 0, so g(c) - (1/n + 1/m) c
    changes sign exactly once.  Bisection runs inside the proven bracket
    [min(l21, l22) / (1/n + 1/m), min(n l22, m l21)].
    """
    options = options or SolverOptions()
    feasible, _ = regularity_pattern_feasible(network.pattern)
    if not feasible:
        raise NotRegular("the admissible set admits no regular weighting")
    l21, l22 = layer_lambda2(network)
    if min(l21, l22) <= 1e-12 * max(1.0, l21, l22):
        raise NoCoalescence("a layer has vanishing algebraic connectivity; there is no transition")
    lo, hi = regular_threshold_bracket(l21, l22, network.n, network.m)

    def tol(c):
        return rel_tol * max(1.0, upper_bound_F(network.n, network.m, c))

    if _reaches_bound(network, hi, tol(hi)):
        return float(hi)
    a, b = lo, hi
    while b - a > 1e-9 * hi:
        mid = 0.5 * (a + b)
        if _reaches_bound(network, mid, tol(mid)):
            a = mid
        else:
            b = mid
    return float(0.5 * (a + b))
