"""Scalar numeric kernels: Bernoulli KL divergence, binary entropy, the
nonnegative branch of the Lambert W function, and a quadratic root bound.

All functions are pure, operate on Python floats in IEEE-754 double
precision, and treat +inf as a first-class value (the divergence of a
distribution from one that misses part of its support).  Boundary
conventions: 0*ln(0) = 0 and 0*ln(0/0) = 0.
"""

import math

__all__ = [
    "bernoulli_kl",
    "binary_entropy",
    "lambert_w",
    "quadratic_root_bound",
]


def _check_unit_interval(name: str, x: float) -> None:
    # the negated comparison also rejects NaN
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence kl(p, q) between Bernoulli(p) and Bernoulli(q), in nats.

    Returns +inf when q puts zero mass where p does not (q = 0 with p > 0,
    or q = 1 with p < 1).

    Raises ValueError if either argument is outside [0, 1] or not finite.
    """
    _check_unit_interval("p", p)
    _check_unit_interval("q", q)
    if p == q:
        return 0.0
    if q == 0.0 or q == 1.0:
        return math.inf
    acc = 0.0
    if p > 0.0:
        acc += p * math.log(p / q)
    if p < 1.0:
        acc += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return acc


def binary_entropy(x: float) -> float:
    """Binary entropy h(x) = -(x ln x + (1-x) ln(1-x)), in nats.

    Satisfies kl(x, 1/2) = ln 2 - h(x).
    """
    _check_unit_interval("x", x)
    acc = 0.0
    if x > 0.0:
        acc -= x * math.log(x)
    if x < 1.0:
        acc -= (1.0 - x) * math.log(1.0 - x)
    return acc


#: residual certificate: |w * exp(w) - u| <= LAMBERT_RTOL * max(1, u)
LAMBERT_RTOL = 1e-12

# above this, v*exp(v) is evaluated in log space to avoid overflow
_LAMBERT_LOG_DOMAIN = 1e10


def _lambert_residual(v: float, u: float) -> float:
    if u <= _LAMBERT_LOG_DOMAIN:
        return v * math.exp(v) - u
    # v*exp(v) - u == u * (exp(v + ln v - ln u) - 1), overflow-free
    return u * math.expm1(v + math.log(v) - math.log(u))


def lambert_w(u: float) -> float:
    """Principal branch of the Lambert function on [0, +inf): the unique
    v >= 0 with v * exp(v) = u.

    Halley iteration from the starting point
    max(ln(1+u) - ln(ln(e+u)), u/(1+u)); the result carries a residual
    certificate |v*exp(v) - u| <= 1e-12 * max(1, u).

    Raises ValueError for u < 0 or NaN.
    """
    if not (u >= 0.0):
        raise ValueError(f"lambert_w requires u >= 0, got {u!r}")
    if u == 0.0:
        return 0.0
    if math.isinf(u):
        return math.inf

    v = max(math.log1p(u) - math.log(math.log(math.e + u)), u / (1.0 + u))
    if u <= _LAMBERT_LOG_DOMAIN:
        for _ in range(64):
            ev = math.exp(v)
            f = v * ev - u
            # Halley step for f(v) = v e^v - u
            denom = ev * (v + 1.0) - (v + 2.0) * f / (2.0 * v + 2.0)
            step = f / denom
            v -= step
            if abs(step) <= 1e-16 * max(1.0, abs(v)):
                break
    else:
        # Newton on g(v) = v + ln v - ln u, the log form of the equation
        lnu = math.log(u)
        for _ in range(64):
            g = v + math.log(v) - lnu
            step = g * v / (v + 1.0)
            v -= step
            if abs(step) <= 1e-16 * max(1.0, abs(v)):
                break

    if abs(_lambert_residual(v, u)) > LAMBERT_RTOL * max(1.0, u):
        raise ArithmeticError(
            f"lambert_w residual certificate failed at u={u!r}"
        )
    return v


def quadratic_root_bound(alpha: float, beta: float) -> float:
    """Upper bound alpha + beta + sqrt(alpha*beta) on any x satisfying
    (x - alpha)^2 <= beta * x, for alpha, beta >= 0.

    This dominates the larger root (2a + b + sqrt(4ab + b^2))/2 of the
    associated quadratic.
    """
    if not (alpha >= 0.0):
        raise ValueError(f"alpha must be >= 0, got {alpha!r}")
    if not (beta >= 0.0):
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    return alpha + beta + math.sqrt(alpha * beta)
