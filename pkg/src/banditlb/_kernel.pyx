# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation core: fused per-round loops for the hot strategies.

This module mirrors the pure-Python reference path (strategies driven by
samplers.sample_one) operation for operation, consuming the same uniform
streams through the same transforms, so both backends produce bit-identical
run records.  Any change here must be matched in strategies.py/samplers.py
and is guarded by the cross-backend equality tests.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport INFINITY, exp, log, sqrt
from numpy.random cimport bitgen_t
from scipy.special.cython_special cimport betaincinv, gammaincinv, ndtri

# strategy codes, kept in sync with backend.KERNEL_STRATEGY_CODES
cdef enum:
    STRAT_UNIFORM = 0
    STRAT_UCB = 1
    STRAT_KLUCB = 2
    STRAT_THOMPSON = 3
    STRAT_KNOWN_MU = 4

# family codes, kept in sync with samplers.FAMILY_CODES
cdef enum:
    FAM_BERNOULLI = 0
    FAM_GAUSSIAN = 1
    FAM_POISSON = 2
    FAM_GAMMA = 3
    FAM_BINOMIAL = 4
    FAM_DIRAC = 5
    FAM_FINITE = 6

cdef double U_FLOOR = 2.0 ** -54


cdef bitgen_t *_extract(object bitgen) except NULL:
    capsule = bitgen.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline double _next(bitgen_t *rng) noexcept nogil:
    return rng.next_double(rng.state)


cdef inline double _kl_bern(double p, double q) noexcept nogil:
    cdef double acc
    if p == q:
        return 0.0
    if q == 0.0 or q == 1.0:
        return INFINITY
    acc = 0.0
    if p > 0.0:
        acc += p * log(p / q)
    if p < 1.0:
        acc += (1.0 - p) * log((1.0 - p) / (1.0 - q))
    return acc


cdef inline double _klucb_quantile(double phat, double target) noexcept nogil:
    cdef double lo = phat
    cdef double hi = 1.0
    cdef double mid
    cdef int i
    for i in range(34):
        mid = 0.5 * (lo + hi)
        if _kl_bern(phat, mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


cdef double _sample_reward(long code, double a, double b, double c, double e,
                           double[::1] fvals, double[::1] fcums,
                           long flo, long fhi, bitgen_t *rng) noexcept nogil:
    cdef double u, p, f
    cdef long k, n, cap, i
    if code == FAM_BERNOULLI:
        return 1.0 if _next(rng) < a else 0.0
    if code == FAM_GAUSSIAN:
        u = _next(rng)
        if u <= 0.0:
            u = U_FLOOR
        return a + b * ndtri(u)
    if code == FAM_POISSON:
        u = _next(rng)
        p = b
        f = p
        k = 0
        cap = <long> c
        while u > f and k < cap:
            k += 1
            p *= a / k
            f += p
        return <double> k
    if code == FAM_GAMMA:
        u = _next(rng)
        return b * gammaincinv(a, u)
    if code == FAM_BINOMIAL:
        u = _next(rng)
        n = <long> a
        p = c
        f = p
        k = 0
        while u > f and k < n:
            k += 1
            p *= (n - k + 1.0) / k * e
            f += p
        return <double> k
    if code == FAM_DIRAC:
        return a
    if code == FAM_FINITE:
        u = _next(rng)
        for i in range(flo, fhi):
            if u < fcums[i]:
                return fvals[i]
        return fvals[fhi - 1]
    return 0.0


cdef inline long _draw_index(long m, bitgen_t *rng) noexcept nogil:
    cdef double u = _next(rng)
    cdef long i = <long> (u * m)
    if i >= m:
        i = m - 1
    return i


def kl_bern_probe(double p, double q):
    """Expose the kernel's internal Bernoulli KL for equality tests."""
    return _kl_bern(p, q)


def klucb_quantile_probe(double phat, double target):
    """Expose the kernel's internal index quantile for equality tests."""
    return _klucb_quantile(phat, target)


def run(long strat_code, double sp0, long K, long T,
        long[::1] fam, double[::1] pa, double[::1] pb,
        double[::1] pc, double[::1] pe,
        double[::1] fvals, double[::1] fcums, long[::1] foff,
        double[::1] gaps, long[::1] checkpoints,
        object reward_bitgen, object strat_bitgen):
    """Simulate T rounds; returns (counts, regret-at-checkpoints, status).

    Status 0 is success; 1 flags a non-binary reward fed to posterior
    sampling; 2 flags an empirical mean outside the declared support of the
    divergence-index strategy.
    """
    counts_arr = np.zeros(K, dtype=np.int64)
    regret_arr = np.zeros(checkpoints.shape[0], dtype=np.float64)
    means_arr = np.zeros(K, dtype=np.float64)
    succ_arr = np.zeros(K, dtype=np.int64)
    buf_arr = np.zeros(K, dtype=np.int64)

    cdef long[::1] counts = counts_arr
    cdef double[::1] regret = regret_arr
    cdef double[::1] means = means_arr
    cdef long[::1] succ = succ_arr
    cdef long[::1] buf = buf_arr

    cdef bitgen_t *rrng = _extract(reward_bitgen)
    cdef bitgen_t *srng = _extract(strat_bitgen)

    cdef long ncp = checkpoints.shape[0]
    cdef long t, arm, a, k, m, ci = 0
    cdef long rr_active = 0, rr_pos = 0
    cdef double r, u, lnt, v, best, phat, na, acc
    cdef int status = 0

    with reward_bitgen.lock, strat_bitgen.lock:
        for t in range(1, T + 1):
            # ---- choose ----------------------------------------------------
            if strat_code == STRAT_UNIFORM:
                arm = _draw_index(K, srng)
            elif strat_code == STRAT_THOMPSON:
                best = -INFINITY
                arm = 0
                for a in range(K):
                    u = _next(srng)
                    v = betaincinv(1.0 + succ[a], 1.0 + (counts[a] - succ[a]), u)
                    if v > best:
                        best = v
                        arm = a
            elif strat_code == STRAT_KNOWN_MU:
                if rr_active:
                    arm = rr_pos
                elif t <= K:
                    arm = t - 1
                else:
                    m = 0
                    for a in range(K):
                        na = <double> counts[a]
                        if means[a] - sp0 > -sqrt(4.0 * log(na) / na):
                            buf[m] = a
                            m += 1
                    if m > 0:
                        arm = buf[_draw_index(m, srng)]
                    else:
                        rr_active = 1
                        rr_pos = 0
                        arm = 0
            else:  # index strategies share forced initialization and ties
                if t <= K:
                    arm = t - 1
                else:
                    lnt = log(<double> t)
                    best = -INFINITY
                    m = 0
                    for a in range(K):
                        if strat_code == STRAT_UCB:
                            v = means[a] + sqrt(2.0 * lnt / <double> counts[a])
                        else:
                            phat = means[a] / sp0
                            if not (0.0 <= phat <= 1.0):
                                status = 2
                                break
                            v = sp0 * _klucb_quantile(phat, lnt / <double> counts[a])
                        if v > best:
                            best = v
                            m = 1
                            buf[0] = a
                        elif v == best:
                            buf[m] = a
                            m += 1
                    if status != 0:
                        break
                    if m > 1:
                        arm = buf[_draw_index(m, srng)]
                    else:
                        arm = buf[0]

            # ---- sample ----------------------------------------------------
            r = _sample_reward(fam[arm], pa[arm], pb[arm], pc[arm], pe[arm],
                               fvals, fcums, foff[arm], foff[arm + 1], rrng)

            # ---- update ----------------------------------------------------
            if strat_code == STRAT_THOMPSON:
                if r == 1.0:
                    succ[arm] += 1
                elif r != 0.0:
                    status = 1
                    break
            elif strat_code == STRAT_KNOWN_MU:
                if rr_active and arm == rr_pos:
                    rr_pos += 1
                    if rr_pos >= K:
                        rr_active = 0
                        rr_pos = 0
            counts[arm] += 1
            means[arm] += (r - means[arm]) / <double> counts[arm]

            while ci < ncp and checkpoints[ci] == t:
                acc = 0.0
                for k in range(K):
                    acc += gaps[k] * counts[k]
                regret[ci] = acc
                ci += 1

    return counts_arr, regret_arr, status
