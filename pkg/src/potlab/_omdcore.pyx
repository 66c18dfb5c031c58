# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trajectory loop for entropic mirror descent.

Mirrors potlab._omdpy.run exactly; potlab.dynamics picks whichever is
importable. Keep the two in lockstep when changing semantics.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, isfinite, pow

cnp.import_array()

DEF BR_VALUE_EPS = 1e-12
DEF PROX_FLOOR = 1e-300


cdef int _gradient(const double[:, ::1] payoffs, long long[::1] dims,
                   long long[::1] offsets, double[::1] strat,
                   double[:, ::1] grads, long long[::1] digits) nogil:
    """Expected payoff of every pure action for every player, O(A * N^2).

    Returns -1 if any gradient entry is non-finite, else 0.
    """
    cdef Py_ssize_t n_players = payoffs.shape[0]
    cdef Py_ssize_t n_profiles = payoffs.shape[1]
    cdef Py_ssize_t i, j, p
    cdef double prod
    for i in range(n_players):
        for j in range(dims[i]):
            grads[i, j] = 0.0
        digits[i] = 0
    for p in range(n_profiles):
        for i in range(n_players):
            prod = payoffs[i, p]
            for j in range(n_players):
                if j != i:
                    prod *= strat[offsets[j] + digits[j]]
            grads[i, digits[i]] += prod
        j = n_players - 1
        while j >= 0:
            digits[j] += 1
            if digits[j] < dims[j]:
                break
            digits[j] = 0
            j -= 1
    for i in range(n_players):
        for j in range(dims[i]):
            if not isfinite(grads[i, j]):
                return -1
    return 0


def run(const double[:, ::1] payoffs, long long[::1] dims, long long[::1] offsets,
        double[::1] strat, double eta0, double beta, double tol,
        double purity_tol, Py_ssize_t max_iters, double[::1] loss_out):
    """Iterate the multiplicative-weights update in place on ``strat``.

    strat holds the players' concatenated simplex vectors; offsets[i] is
    player i's start (length N+1). loss_out receives the per-iteration max
    relative utility loss, evaluated on the post-update profile. Returns
    (status, iterations): status 1 = converged to an approximately pure
    profile, 0 = iteration cap reached, -1 = non-finite gradient.
    """
    cdef Py_ssize_t n_players = payoffs.shape[0]
    cdef Py_ssize_t i, k, t, mi, base
    cdef Py_ssize_t max_m = 0
    cdef double eta, b, c, loss, worst, vmax, w, total, smax
    cdef bint pure

    for i in range(n_players):
        if dims[i] > max_m:
            max_m = dims[i]
    grads_arr = np.zeros((n_players, max_m), dtype=np.float64)
    digits_arr = np.zeros(n_players, dtype=np.int64)
    cdef double[:, ::1] grads = grads_arr
    cdef long long[::1] digits = digits_arr

    if _gradient(payoffs, dims, offsets, strat, grads, digits) < 0:
        return -1, 0
    for t in range(1, max_iters + 1):
        eta = eta0 * pow(<double> t, -beta)
        # simultaneous prox update from the gradients at the previous profile
        for i in range(n_players):
            base = offsets[i]
            mi = dims[i]
            vmax = grads[i, 0]
            for k in range(1, mi):
                if grads[i, k] > vmax:
                    vmax = grads[i, k]
            total = 0.0
            for k in range(mi):
                w = strat[base + k] * exp(eta * (grads[i, k] - vmax))
                strat[base + k] = w
                total += w
            for k in range(mi):
                w = strat[base + k] / total
                if w < PROX_FLOOR:
                    w = PROX_FLOOR
                strat[base + k] = w
            total = 0.0
            for k in range(mi):
                total += strat[base + k]
            for k in range(mi):
                strat[base + k] /= total
        if _gradient(payoffs, dims, offsets, strat, grads, digits) < 0:
            return -1, t
        worst = 0.0
        pure = True
        for i in range(n_players):
            base = offsets[i]
            mi = dims[i]
            b = grads[i, 0]
            for k in range(1, mi):
                if grads[i, k] > b:
                    b = grads[i, k]
            c = 0.0
            for k in range(mi):
                c += strat[base + k] * grads[i, k]
            if fabs(b) > BR_VALUE_EPS:
                loss = (b - c) / fabs(b)
            else:
                loss = b - c
            if loss > worst:
                worst = loss
            smax = strat[base]
            for k in range(1, mi):
                if strat[base + k] > smax:
                    smax = strat[base + k]
            if smax < 1.0 - purity_tol:
                pure = False
        loss_out[t - 1] = worst
        if worst < tol and pure:
            return 1, t
    return 0, max_iters
