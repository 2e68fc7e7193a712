"""numba kernels for the two-multiplier dual ascent (the "fast" engine).

The pure-python twin in svc.py must stay arithmetically identical: both
engines consume the same splitmix64 stream and perform the same IEEE-754
operations in the same order, so their outputs compare equal *bitwise*.
If you change a loop here, change the twin too (and vice versa); the
cross-engine tests will catch a drift.

The uint64 RNG state never crosses the python/numba boundary: boxing a
uint64 with the top bit set round-trips through a signed python int and
poisons later type inference, so each engine keeps its state local to the
solve loop.
"""

import numpy as np
from numba import njit

U64 = np.uint64
_SM_GAMMA = U64(0x9E3779B97F4A7C15)
_SM_MIX1 = U64(0xBF58476D1CE4E5B9)
_SM_MIX2 = U64(0x94D49BE3AA3D35B4)


@njit(cache=True, nogil=True, inline="always")
def _next_u64(state):
    state = state + _SM_GAMMA
    z = state
    z = (z ^ (z >> U64(30))) * _SM_MIX1
    z = (z ^ (z >> U64(27))) * _SM_MIX2
    z = z ^ (z >> U64(31))
    return state, z


@njit(cache=True, nogil=True)
def bias_from_state(alpha, g, y, U, margin_scale):
    """Offset b from a dual state.

    Mean of y_i - g_i over margin vectors (alpha strictly inside the box by
    more than margin_scale * U_i). Without margin vectors, falls back to the
    midpoint of the interval that the bound samples' optimality conditions
    leave for b.
    """
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


@njit(cache=True, nogil=True)
def max_kkt_violation(alpha, g, y, U, b, margin_scale):
    """Largest optimality-condition violation, given the offset b.

    Samples at the lower bound must have margin >= 1, samples at the upper
    bound margin <= 1, interior samples margin == 1.
    """
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


@njit(cache=True, nogil=True)
def smo_solve(K, y, U, budget, check_every, tol, seed, eta_min, nu_min,
              margin_scale):
    """Randomized two-multiplier ascent on the box-constrained dual.

    Pairs (i, j) are drawn uniformly; the step nu maximizing the dual along
    the feasible direction (alpha_i += nu*y_i, alpha_j -= nu*y_j) is clipped
    to the box. g_p = sum_q alpha_q y_q K_pq is maintained incrementally and
    recomputed every ``check_every`` attempted steps, where the optional
    early stop (tol > 0) also checks the worst KKT violation.

    Returns (alpha, g, objective, attempted, accepted, skipped_degenerate,
    skipped_clipped, recomputes, stopped_early).
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
    state = U64(seed)
    while attempted < budget:
        state, z1 = _next_u64(state)
        state, z2 = _next_u64(state)
        # cast before any arithmetic: uint64 mixed with a signed literal
        # would promote to float64 under numba's numpy-style rules
        i = np.int64(z1 % U64(l))
        j = np.int64(z2 % U64(l - 1))
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
                D = D + (nu * num - 0.5 * nu * nu * eta)
        if attempted % check_every == 0:
            for p in range(l):
                s = 0.0
                for q in range(l):
                    s = s + alpha[q] * y[q] * K[p, q]
                g[p] = s
            lin = 0.0
            for p in range(l):
                lin = lin + alpha[p]
            quad = 0.0
            for p in range(l):
                quad = quad + alpha[p] * y[p] * g[p]
            D = lin - 0.5 * quad
            recomputes += 1
            if tol > 0.0:
                b = bias_from_state(alpha, g, y, U, margin_scale)
                v = max_kkt_violation(alpha, g, y, U, b, margin_scale)
                if v < tol:
                    stopped = True
                    break
    return alpha, g, D, attempted, accepted, sk_deg, sk_clip, recomputes, stopped
