"""Support-vector classification with per-sample box constraints.

The dual problem is

    maximize   sum_i alpha_i - 1/2 sum_ij alpha_i y_i alpha_j y_j K_ij
    subject to 0 <= alpha_i <= C * w_i,   sum_i alpha_i y_i = 0,

solved by a randomized two-multiplier coordinate ascent. Two engines share
one RNG stream: ``fast`` (numba, see _smo_fast.py) and ``checked`` (pure
python, asserting the step invariants as it goes). Their arithmetic is kept
identical operation for operation, so the engines agree bitwise.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import _smo_fast
from .data import DataError
from .kernel import gram

ETA_MIN = 1e-12       # curvature below this marks a degenerate pair
NU_MIN = 1e-12        # clipped steps smaller than this are not applied
MARGIN_SCALE = 1e-8   # alpha within margin_scale * U of a bound counts as at it

_MASK64 = (1 << 64) - 1


def _next_u64_py(state):
    # python twin of _smo_fast._next_u64 (splitmix64)
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D49BE3AA3D35B4) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def bias_from_state(alpha, g, y, U, margin_scale=MARGIN_SCALE):
    """Python twin of _smo_fast.bias_from_state; see there."""
    l = alpha.shape[0]
    acc = 0.0
    cnt = 0
    for p in range(l):
        mt = margin_scale * U[p]
        if alpha[p] > mt and alpha[p] < U[p] - mt:
            acc += y[p] - g[p]
            cnt += 1
    if cnt > 0:
        return acc / cnt
    lo = -np.inf
    hi = np.inf
    for p in range(l):
        mt = margin_scale * U[p]
        v = y[p] - g[p]
        if alpha[p] <= mt:
            if y[p] > 0.0:
                if v > lo:
                    lo = v
            else:
                if v < hi:
                    hi = v
        elif alpha[p] >= U[p] - mt:
            if y[p] > 0.0:
                if v < hi:
                    hi = v
            else:
                if v > lo:
                    lo = v
    if lo > -np.inf and hi < np.inf:
        return 0.5 * (lo + hi)
    if lo > -np.inf:
        return lo
    if hi < np.inf:
        return hi
    return 0.0


def max_kkt_violation(alpha, g, y, U, b, margin_scale=MARGIN_SCALE):
    """Python twin of _smo_fast.max_kkt_violation; see there."""
    l = alpha.shape[0]
    worst = 0.0
    for p in range(l):
        mt = margin_scale * U[p]
        m = y[p] * (g[p] + b)
        if alpha[p] <= mt:
            d = 1.0 - m
            if d < 0.0:
                d = 0.0
        elif alpha[p] >= U[p] - mt:
            d = m - 1.0
            if d < 0.0:
                d = 0.0
        else:
            d = m - 1.0
            if d < 0.0:
                d = -d
        if d > worst:
            worst = d
    return worst


def _smo_checked(K, y, U, budget, check_every, tol, seed, eta_min, nu_min,
                 margin_scale):
    """Pure-python twin of _smo_fast.smo_solve with invariant assertions.

    Asserts after every accepted step that the iterate stays in the box,
    that the equality constraint has not drifted, and that the analytic
    objective gain is nonnegative; at every periodic recompute, that the
    incrementally maintained g and objective agree with fresh ones. The
    assertions are diagnostics only: state updates are arithmetic mirrors
    of the fast engine.
    """
    l = K.shape[0]
    alpha = np.zeros(l)
    g = np.zeros(l)
    D = 0.0
    attempted = 0
    accepted = 0
    sk_deg = 0
    sk_clip = 0
    recomputes = 0
    stopped = False
    if l < 2:
        return alpha, g, D, attempted, accepted, sk_deg, sk_clip, recomputes, stopped
    state = seed
    while attempted < budget:
        state, z1 = _next_u64_py(state)
        state, z2 = _next_u64_py(state)
        i = z1 % l
        j = z2 % (l - 1)
        if j >= i:
            j += 1
        attempted += 1
        eta = K[i, i] - 2.0 * K[i, j] + K[j, j]
        if eta < eta_min:
            sk_deg += 1
        else:
            num = (y[i] - y[j]) - (g[i] - g[j])
            nu = num / eta
            if y[i] > 0.0:
                lo = -alpha[i]
                hi = U[i] - alpha[i]
            else:
                lo = alpha[i] - U[i]
                hi = alpha[i]
            if y[j] > 0.0:
                lo2 = alpha[j] - U[j]
                hi2 = alpha[j]
            else:
                lo2 = -alpha[j]
                hi2 = U[j] - alpha[j]
            if lo2 > lo:
                lo = lo2
            if hi2 < hi:
                hi = hi2
            if nu < lo:
                nu = lo
            if nu > hi:
                nu = hi
            if abs(nu) < nu_min:
                sk_clip += 1
            else:
                accepted += 1
                alpha[i] = alpha[i] + nu * y[i]
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                elif alpha[i] > U[i]:
                    alpha[i] = U[i]
                alpha[j] = alpha[j] - nu * y[j]
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                elif alpha[j] > U[j]:
                    alpha[j] = U[j]
                for p in range(l):
                    g[p] = g[p] + nu * (K[p, i] - K[p, j])
                gain = nu * num - 0.5 * nu * nu * eta
                D = D + gain
                assert gain >= 0.0, \
                    f"objective moved down by {gain!r} at step {attempted}"
                assert 0.0 <= alpha[i] <= U[i] and 0.0 <= alpha[j] <= U[j], \
                    f"box constraint violated at step {attempted}"
                balance = math.fsum(alpha[p] * y[p] for p in range(l))
                scale = max(1.0, math.fsum(alpha))
                assert abs(balance) <= 1e-10 * scale, \
                    f"equality constraint drifted to {balance!r} at step {attempted}"
        if attempted % check_every == 0:
            fresh = np.empty(l)
            for p in range(l):
                s = 0.0
                for q in range(l):
                    s = s + alpha[q] * y[q] * K[p, q]
                fresh[p] = s
            drift = float(np.max(np.abs(g - fresh))) if l else 0.0
            assert drift <= 1e-8, \
                f"incremental g drifted by {drift!r} at step {attempted}"
            g = fresh
            lin = 0.0
            for p in range(l):
                lin = lin + alpha[p]
            quad = 0.0
            for p in range(l):
                quad = quad + alpha[p] * y[p] * g[p]
            D_fresh = lin - 0.5 * quad
            assert abs(D - D_fresh) <= 1e-8 * max(1.0, abs(D_fresh)), \
                f"incremental objective drifted to {D!r} vs {D_fresh!r}"
            D = D_fresh
            recomputes += 1
            if tol > 0.0:
                b = bias_from_state(alpha, g, y, U, margin_scale)
                v = max_kkt_violation(alpha, g, y, U, b, margin_scale)
                if v < tol:
                    stopped = True
                    break
    return alpha, g, D, attempted, accepted, sk_deg, sk_clip, recomputes, stopped


class SolverStats:
    """Counters from one dual solve."""

    __slots__ = ("attempted", "accepted", "skipped_degenerate",
                 "skipped_clipped", "recomputes", "stopped_early",
                 "violation", "budget")

    def __init__(self, attempted, accepted, skipped_degenerate,
                 skipped_clipped, recomputes, stopped_early, violation,
                 budget):
        self.attempted = attempted
        self.accepted = accepted
        self.skipped_degenerate = skipped_degenerate
        self.skipped_clipped = skipped_clipped
        self.recomputes = recomputes
        self.stopped_early = stopped_early
        self.violation = violation
        self.budget = budget

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__slots__}

    def __eq__(self, other):
        return isinstance(other, SolverStats) and self.to_dict() == other.to_dict()

    def __repr__(self):
        inner = ", ".join(f"{k}={getattr(self, k)!r}" for k in self.__slots__)
        return f"SolverStats({inner})"


class DualSolution:
    """Solution of one dual solve: multipliers, margins g, objective, offset."""

    def __init__(self, alpha, g, objective, bias, stats):
        self.alpha = alpha
        self.g = g
        self.objective = objective
        self.bias = bias
        self.stats = stats


def solve_dual(K, y, U, *, iter_multiplier=50.0, max_iter=None, tol=1e-6,
               check_every=None, seed=3, engine="fast"):
    """Solve the box-constrained dual for a fixed Gram matrix.

    Parameters
    ----------
    K : (l, l) Gram matrix.
    y : (l,) labels in {-1, +1}.
    U : (l,) per-sample upper bounds C * w_i, strictly positive.
    iter_multiplier : the step budget is ceil(iter_multiplier * l**2)
        attempted pair updates (skipped pairs count).
    max_iter : explicit step budget, overriding iter_multiplier.
    tol : early-stop threshold on the worst KKT violation, checked every
        ``check_every`` attempted steps; 0 or None disables early stopping.
    check_every : recompute/checking period; defaults to l**2.
    seed : RNG seed for the pair draws.
    engine : "fast" (numba) or "checked" (python with assertions).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    U = np.ascontiguousarray(U, dtype=np.float64)
    l = K.shape[0]
    if K.ndim != 2 or K.shape[1] != l:
        raise DataError("Gram matrix must be square")
    if y.shape != (l,) or U.shape != (l,):
        raise DataError("y and U must match the Gram matrix size")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise DataError("labels must be -1 or +1")
    if not np.all(U > 0.0):
        raise DataError("upper bounds must be strictly positive")
    if max_iter is not None:
        budget = int(max_iter)
    else:
        budget = int(math.ceil(iter_multiplier * l * l))
    if budget < 0:
        raise DataError("iteration budget must be nonnegative")
    if check_every is None:
        check_every = max(l * l, 1)
    check_every = int(check_every)
    if check_every < 1:
        raise DataError("check_every must be positive")
    tol_val = float(tol) if tol else 0.0
    seed_val = int(seed) & 0x7FFFFFFFFFFFFFFF
    if engine == "fast":
        out = _smo_fast.smo_solve(K, y, U, budget, check_every, tol_val,
                                  seed_val, ETA_MIN, NU_MIN, MARGIN_SCALE)
    elif engine == "checked":
        out = _smo_checked(K, y, U, budget, check_every, tol_val,
                           seed_val, ETA_MIN, NU_MIN, MARGIN_SCALE)
    else:
        raise DataError(f"unknown engine {engine!r}")
    alpha, g, D, attempted, accepted, sk_deg, sk_clip, recomputes, stopped = out
    b = bias_from_state(alpha, g, y, U, MARGIN_SCALE)
    viol = max_kkt_violation(alpha, g, y, U, b, MARGIN_SCALE)
    stats = SolverStats(int(attempted), int(accepted), int(sk_deg),
                        int(sk_clip), int(recomputes), bool(stopped),
                        float(viol), budget)
    return DualSolution(alpha, g, float(D), float(b), stats)


class SvcModel:
    """Kernel SVC with per-sample upper bounds C * w_i on the dual variables.

    Follows the usual estimator shape: construct with hyperparameters, then
    ``fit(X, y, sample_weight=None)``. With sample_weight omitted this is a
    plain soft-margin SVC with a uniform box.
    """

    def __init__(self, C=1.0, gamma=1.0, iter_multiplier=50.0, max_iter=None,
                 tol=1e-6, check_every=None, seed=3, engine="fast"):
        self.C = float(C)
        self.gamma = float(gamma)
        self.iter_multiplier = float(iter_multiplier)
        self.max_iter = max_iter
        self.tol = tol
        self.check_every = check_every
        self.seed = seed
        self.engine = engine

    def fit(self, X, y, sample_weight=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if X.ndim != 2:
            raise DataError("X must be 2-d")
        l = X.shape[0]
        if y.shape != (l,):
            raise DataError("y length does not match X")
        if sample_weight is None:
            w = np.ones(l)
        else:
            w = np.ascontiguousarray(sample_weight, dtype=np.float64)
            if w.shape != (l,):
                raise DataError("sample_weight length does not match X")
            if not np.all(w > 0.0):
                raise DataError("sample weights must be strictly positive")
        if self.C <= 0.0:
            raise DataError("C must be positive")
        K = gram(X, self.gamma)
        sol = solve_dual(K, y, self.C * w,
                         iter_multiplier=self.iter_multiplier,
                         max_iter=self.max_iter, tol=self.tol,
                         check_every=self.check_every, seed=self.seed,
                         engine=self.engine)
        self.alpha_ = sol.alpha
        self.bias_ = sol.bias
        self.objective_ = sol.objective
        self.stats_ = sol.stats
        # exact zeros contribute nothing to the decision sum; prune them
        sv = np.flatnonzero(sol.alpha > 0.0)
        self.support_ = sv
        self.X_sv_ = X[sv]
        self.coef_sv_ = sol.alpha[sv] * y[sv]
        self.n_features_ = X.shape[1]
        return self

    def decision_function(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise DataError(f"expected {self.n_features_} features")
        if len(self.coef_sv_) == 0:
            return np.full(X.shape[0], self.bias_)
        Kx = gram(self.X_sv_, self.gamma, Z=X)
        return Kx @ self.coef_sv_ + self.bias_

    def predict(self, X):
        d = self.decision_function(X)
        return np.where(d >= 0.0, 1.0, -1.0)

    @property
    def n_support_(self):
        return len(self.support_)

    def to_dict(self):
        return {
            "kind": "svc",
            "C": self.C,
            "gamma": self.gamma,
            "iter_multiplier": self.iter_multiplier,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "check_every": self.check_every,
            "seed": self.seed,
            "engine": self.engine,
            "bias": self.bias_,
            "objective": self.objective_,
            "n_features": self.n_features_,
            "support": self.support_.tolist(),
            "X_sv": self.X_sv_.tolist(),
            "coef_sv": self.coef_sv_.tolist(),
            "stats": self.stats_.to_dict(),
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") != "svc":
            raise DataError("not a saved SVC model")
        model = cls(C=d["C"], gamma=d["gamma"],
                    iter_multiplier=d["iter_multiplier"],
                    max_iter=d["max_iter"], tol=d["tol"],
                    check_every=d["check_every"], seed=d["seed"],
                    engine=d["engine"])
        model.bias_ = float(d["bias"])
        model.objective_ = float(d["objective"])
        model.n_features_ = int(d["n_features"])
        model.support_ = np.asarray(d["support"], dtype=np.int64)
        model.X_sv_ = np.asarray(d["X_sv"], dtype=np.float64).reshape(
            len(d["support"]), d["n_features"])
        model.coef_sv_ = np.asarray(d["coef_sv"], dtype=np.float64)
        model.stats_ = SolverStats(**d["stats"])
        return model

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
