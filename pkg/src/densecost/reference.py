"""Projected-gradient reference solver for the box-constrained dual.

An independent check on the two-multiplier ascent: a different algorithm
(fixed-step gradient ascent with exact Euclidean projection onto the
feasible set) that converges to the same optimum. The selftest below runs
both solvers on random instances and compares objectives.
"""

import numpy as np
from numba import njit

from .kernel import gram
from .svc import bias_from_state, solve_dual


@njit(cache=True, nogil=True)
def project_feasible(v, y, U):
    """Euclidean projection of v onto {u : 0 <= u <= U, y @ u = 0}.

    With u(lam) = clip(v - lam * y, 0, U), h(lam) = y @ u(lam) is continuous
    and nonincreasing, positive for lam low and nonpositive for lam high,
    so bisection on lam pins h = 0 to machine precision.
    """
    l = v.shape[0]
    m = 0.0
    for p in range(l):
        a = abs(v[p])
        if a > m:
            m = a
        if U[p] > m:
            m = U[p]
    lo = -(m + 1.0)
    hi = m + 1.0
    u = np.empty(l)
    lam = 0.0
    for _ in range(120):
        lam = 0.5 * (lo + hi)
        h = 0.0
        for p in range(l):
            t = v[p] - lam * y[p]
            if t < 0.0:
                t = 0.0
            elif t > U[p]:
                t = U[p]
            u[p] = t
            h += y[p] * t
        if h > 0.0:
            lo = lam
        else:
            hi = lam
    return u


@njit(cache=True, nogil=True)
def _pg_loop(K, y, U, step, max_iter, tol):
    l = K.shape[0]
    alpha = np.zeros(l)
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        v = np.empty(l)
        for p in range(l):
            s = 0.0
            for q in range(l):
                s += alpha[q] * y[q] * K[p, q]
            v[p] = alpha[p] + step * (1.0 - y[p] * s)
        newalpha = project_feasible(v, y, U)
        delta = 0.0
        for p in range(l):
            d = abs(newalpha[p] - alpha[p])
            if d > delta:
                delta = d
        alpha = newalpha
        if delta < tol:
            converged = True
            break
    # objective at the final iterate
    quad = 0.0
    lin = 0.0
    for p in range(l):
        s = 0.0
        for q in range(l):
            s += alpha[q] * y[q] * K[p, q]
        quad += alpha[p] * y[p] * s
        lin += alpha[p]
    return alpha, lin - 0.5 * quad, it, converged


class ReferenceSolution:
    def __init__(self, alpha, objective, iterations, converged):
        self.alpha = alpha
        self.objective = objective
        self.iterations = iterations
        self.converged = converged


def solve_reference(K, y, U, max_iter=200000, tol=1e-12):
    """Maximize the dual by projected-gradient ascent with step 1/lambda_max.

    Stops when the iterate moves by less than ``tol`` in the sup norm (a
    fixed point of the projected step is optimal for this convex problem).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    U = np.ascontiguousarray(U, dtype=np.float64)
    Q = (y[:, None] * y[None, :]) * K
    lam_max = float(np.linalg.eigvalsh(Q)[-1])
    step = 1.0 / max(lam_max, 1e-12)
    alpha, obj, iters, conv = _pg_loop(K, y, U, step, int(max_iter), float(tol))
    return ReferenceSolution(alpha, float(obj), int(iters), bool(conv))


def reference_decision(X_train, y, alpha, U, gamma, Z):
    """Decision values at rows of Z for a reference dual solution.

    Rebuilds the margins g on the training set, derives the offset with the
    same rule the main solver uses, and evaluates the kernel expansion.
    """
    K = gram(X_train, gamma)
    coef = alpha * y
    g = K @ coef
    b = bias_from_state(alpha, g, y, U)
    return gram(X_train, gamma, Z=Z) @ coef + b


def random_instance(rng):
    """One random small problem: (X, y, w, C, gamma).

    Sizes and ranges are chosen to exercise every clipping case: a handful
    of points in few dimensions, uneven weights, and C values from heavily
    regularized to nearly hard-margin.
    """
    l = int(rng.integers(3, 7))
    d = int(rng.integers(1, 4))
    X = rng.uniform(-1.0, 1.0, (l, d))
    y = np.where(rng.random(l) < 0.5, 1.0, -1.0)
    w = rng.uniform(0.5, 2.0, l)
    C = float(rng.choice([0.1, 1.0, 10.0]))
    gamma = float(rng.choice([0.1, 1.0]))
    return X, y, w, C, gamma


def selftest(instances=20, seed=0, max_iter=1_000_000, tol=1e-6,
             objective_tol=1e-4, engine="fast"):
    """Cross-check the pair-ascent solver against the projected-gradient one.

    Runs ``instances`` random problems, solving each with both methods, and
    reports the largest objective gap plus any feasibility breach. Passing
    means every gap is at most ``objective_tol``.
    """
    rng = np.random.default_rng(seed)
    gaps = []
    failures = []
    for n in range(instances):
        X, y, w, C, gamma = random_instance(rng)
        K = gram(X, gamma)
        U = C * w
        sol = solve_dual(K, y, U, max_iter=max_iter, tol=tol, engine=engine,
                         seed=int(rng.integers(1 << 62)))
        ref = solve_reference(K, y, U)
        gap = abs(sol.objective - ref.objective)
        gaps.append(gap)
        feasible = (np.all(sol.alpha >= 0.0) and np.all(sol.alpha <= U)
                    and abs(float(sol.alpha @ y)) <= 1e-8 * max(1.0, float(sol.alpha.sum())))
        if gap > objective_tol or not feasible:
            failures.append({"instance": n, "gap": gap, "feasible": bool(feasible),
                             "objective": sol.objective,
                             "reference": ref.objective})
    return {
        "instances": instances,
        "max_gap": max(gaps) if gaps else 0.0,
        "mean_gap": float(np.mean(gaps)) if gaps else 0.0,
        "failures": failures,
        "passed": not failures,
    }
