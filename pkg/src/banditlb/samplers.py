"""Reward sampling, one uniform-driven transform per family.

Each family uses a fixed documented algorithm so that replays agree across
backends: Bernoulli by threshold, Gaussian and Gamma by inverse CDF,
Poisson and Binomial by sequential inversion of the CDF from a single
uniform, Finite by cumulative-weight lookup, point masses without
consuming randomness.  The compiled kernel implements the same transforms
operation for operation; ``pack_arm`` computes the shared per-arm
constants used by both backends.
"""

import math

import numpy as np
from scipy.special import gammaincinv, ndtri

__all__ = ["FAMILY_CODES", "pack_arm", "pack_problem", "sample_one"]

FAMILY_CODES = {
    "bernoulli": 0,
    "gaussian": 1,
    "poisson": 2,
    "gamma": 3,
    "binomial": 4,
    "dirac": 5,
    "finite": 6,
}

# uniforms of exactly 0.0 are nudged to the half-step below the smallest
# positive draw so the inverse Gaussian CDF stays finite
_U_FLOOR = 2.0**-54

#: Poisson means above this would underflow exp(-lam) in the inversion
POISSON_LAM_MAX = 500.0


def pack_arm(d):
    """(family code, four scalar slots, support values, cumulative weights)."""
    code = FAMILY_CODES[d.family]
    a = b = c = e = 0.0
    vals = np.zeros(0)
    cums = np.zeros(0)
    if d.family == "bernoulli":
        a = d.p
    elif d.family == "gaussian":
        a = d.mu
        b = math.sqrt(d.variance)
    elif d.family == "poisson":
        if d.lam > POISSON_LAM_MAX:
            raise ValueError(
                f"Poisson sampling by inversion supports means up to "
                f"{POISSON_LAM_MAX}, got {d.lam!r}"
            )
        a = d.lam
        b = math.exp(-d.lam)
        c = float(math.ceil(d.lam + 12.0 * math.sqrt(d.lam) + 50.0))
    elif d.family == "gamma":
        a = d.shape
        b = d.mu / d.shape  # scale
    elif d.family == "binomial":
        a = float(d.n)
        p = d.mu / d.n
        b = p
        c = (1.0 - p) ** d.n  # P(X = 0)
        e = p / (1.0 - p)  # odds used by the CDF recurrence
    elif d.family == "dirac":
        a = d.point
    elif d.family == "finite":
        vals = np.asarray(d.points, dtype=np.float64)
        cums = np.cumsum(np.asarray(d.weights, dtype=np.float64))
    return code, a, b, c, e, vals, cums


def pack_problem(nu):
    """Flatten a problem's arms into the arrays the compiled kernel takes."""
    K = nu.num_arms
    fam = np.zeros(K, dtype=np.int64)
    pa = np.zeros(K)
    pb = np.zeros(K)
    pc = np.zeros(K)
    pe = np.zeros(K)
    vals_parts = []
    cums_parts = []
    off = np.zeros(K + 1, dtype=np.int64)
    for i, d in enumerate(nu.arms):
        code, a, b, c, e, vals, cums = pack_arm(d)
        fam[i] = code
        pa[i], pb[i], pc[i], pe[i] = a, b, c, e
        vals_parts.append(vals)
        cums_parts.append(cums)
        off[i + 1] = off[i] + len(vals)
    fvals = np.concatenate(vals_parts) if vals_parts else np.zeros(0)
    fcums = np.concatenate(cums_parts) if cums_parts else np.zeros(0)
    gaps = np.asarray(nu.gaps, dtype=np.float64)
    return fam, pa, pb, pc, pe, fvals, fcums, off, gaps


def sample_one(code, a, b, c, e, vals, cums, stream):
    """Draw one reward; the pure-Python twin of the kernel's sampler."""
    if code == 0:  # bernoulli
        return 1.0 if stream.draw() < a else 0.0
    if code == 1:  # gaussian: mean + sd * inverse CDF
        u = stream.draw()
        if u <= 0.0:
            u = _U_FLOOR
        return a + b * float(ndtri(u))
    if code == 2:  # poisson by CDF inversion
        u = stream.draw()
        p = b
        f = p
        k = 0
        cap = int(c)
        while u > f and k < cap:
            k += 1
            p *= a / k
            f += p
        return float(k)
    if code == 3:  # gamma by inverse CDF
        u = stream.draw()
        return b * float(gammaincinv(a, u))
    if code == 4:  # binomial by CDF inversion
        u = stream.draw()
        n = int(a)
        p = c
        f = p
        k = 0
        while u > f and k < n:
            k += 1
            p *= (n - k + 1.0) / k * e
            f += p
        return float(k)
    if code == 5:  # point mass, no randomness consumed
        return a
    if code == 6:  # finite support by cumulative lookup
        u = stream.draw()
        for i in range(len(cums)):
            if u < cums[i]:
                return float(vals[i])
        return float(vals[len(vals) - 1])
    raise ValueError(f"unknown family code {code!r}")
