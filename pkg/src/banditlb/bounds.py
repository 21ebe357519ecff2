"""Regret and pull-count lower bounds, each as a scalar formula and, where
meaningful, as a curve generator over the horizon.

Conventions shared by every emitter:

* bounds on counts or regret are clamped at 0 and flagged ``void`` when the
  formula goes nonpositive (a negative lower bound carries no information);
* a divergence of +inf makes the corresponding term contribute 0 (no model
  member beats the best mean, so the bound is vacuous for that arm);
* curves are emitted in regret units, points sorted by strictly
  increasing horizon.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .divergences import lambert_w
from .models import BanditProblem, continuity_slope, hardness_h, k_inf, k_max

__all__ = [
    "BoundCurve",
    "CurvePoint",
    "LargeTConstants",
    "asymptotic_curve",
    "distribution_free_bound",
    "distribution_free_opt",
    "bpr_known_mu_star",
    "bpr_known_gap",
    "small_t_absolute",
    "small_t_relative",
    "collective_bound",
    "large_t_bound",
    "envelope",
    "build_curve",
    "CURVE_BOUND_IDS",
]


class CurvePoint(NamedTuple):
    t: int
    value: float
    void: bool = False
    attained_by: str = ""


@dataclass(frozen=True)
class BoundCurve:
    """A (T, value) series tagged with a bound identifier and parameters."""

    bound_id: str
    params: dict
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        ts = [p.t for p in self.points]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("curve points must have strictly increasing horizons")
        if any(not math.isfinite(p.value) for p in self.points):
            raise ValueError("curve values must be finite (clamp voids to 0)")

    def csv_rows(self):
        """Rows under the header ``bound_id,T,value,void,attained_by``."""
        for p in self.points:
            yield (self.bound_id, p.t, p.value, int(p.void), p.attained_by)


@dataclass(frozen=True)
class LargeTConstants:
    """Constants of the large-horizon bound.

    ``c_psi`` is the super-consistency constant (pulls of a suboptimal arm
    are at most c_psi * ln T / gap^2); 16 is a documented conventional value
    for index policies.  ``omega`` is the per-unit continuity slope of the
    model's smallest-divergence functional; when None it is derived per arm
    from the model (see models.continuity_slope).
    """

    c_psi: float = 16.0
    omega: float | None = None

    def __post_init__(self):
        if not (self.c_psi > 0.0) or not math.isfinite(self.c_psi):
            raise ValueError(f"c_psi must be positive and finite, got {self.c_psi!r}")
        if self.omega is not None and (self.omega < 0.0 or not math.isfinite(self.omega)):
            raise ValueError(f"omega must be a finite nonnegative value, got {self.omega!r}")

    def omega_for(self, nu: BanditProblem, arm: int) -> float:
        if self.omega is not None:
            return self.omega
        return continuity_slope(nu.arms[arm], nu.mu_star, nu.model)


def _k_inf_arm(nu: BanditProblem, arm: int) -> float:
    return k_inf(nu.arms[arm], nu.mu_star, nu.model)


def asymptotic_curve(nu: BanditProblem, t_grid) -> BoundCurve:
    """Classic asymptotic regret benchmark: sum over suboptimal arms of
    gap * ln T / K_inf(arm, best mean).  Arms whose K_inf is +inf (no model
    member beats the best mean) contribute nothing."""
    coeffs = []
    for a in nu.suboptimal_arms:
        d = _k_inf_arm(nu, a)
        if 0.0 < d < math.inf:
            coeffs.append(nu.gaps[a] / d)
    slope = math.fsum(coeffs)
    points = []
    for t in sorted(set(int(t) for t in t_grid)):
        if t < 1:
            raise ValueError("horizons must be >= 1")
        points.append(CurvePoint(t, slope * math.log(t), False, ""))
    return BoundCurve("asymptotic", {"slope": slope}, tuple(points))


def distribution_free_bound(K: int, T: int, eps: float) -> float:
    """Worst-case regret bound T*eps*(1 - 1/K - sqrt((T/K) ln(1/(1-4 eps^2)))/2)
    achieved by a problem of coin flips at 1/2 with one arm at 1/2 + eps."""
    if K < 2:
        raise ValueError(f"need K >= 2 arms, got {K}")
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    if not (0.0 < eps < 0.5):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps!r}")
    inner = 1.0 - 1.0 / K - 0.5 * math.sqrt((T / K) * math.log(1.0 / (1.0 - 4.0 * eps * eps)))
    return T * eps * inner


def distribution_free_opt(K: int, T: int) -> float:
    """Epsilon-optimised form: min(sqrt(K*T), T) / 20."""
    if K < 2:
        raise ValueError(f"need K >= 2 arms, got {K}")
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    return min(math.sqrt(K * T), float(T)) / 20.0


class KnownMuStarBound(NamedTuple):
    count_v1: float
    regret_v1: float
    count_v2: float
    regret_v2: float


def bpr_known_mu_star(delta: float, T: int) -> KnownMuStarBound:
    """Two-armed Gaussian bounds when the best mean is known.

    v1 holds for strategies that split pulls evenly on two identical arms:
    count 1/(delta^2 + 1/T).  v2 holds for any strategy whose suboptimal arm
    has at least one expected pull at horizon T:
    count min(2 ln 2 / (delta^2 + 2 ln(4T)/T), T/2).
    """
    if not (delta > 0.0):
        raise ValueError(f"delta must be positive, got {delta!r}")
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    c1 = 1.0 / (delta * delta + 1.0 / T)
    c2 = min(2.0 * math.log(2.0) / (delta * delta + 2.0 * math.log(4.0 * T) / T), T / 2.0)
    return KnownMuStarBound(c1, delta * c1, c2, delta * c2)


def bpr_known_gap(delta: float, T: int) -> float:
    """Two-armed Gaussian regret bound when the gap is known:
    min(W(T delta^2 / 1.2) / (2 delta), T delta / 2) with W the Lambert
    function."""
    if not (delta > 0.0):
        raise ValueError(f"delta must be positive, got {delta!r}")
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    return min(lambert_w(T * delta * delta / 1.2) / (2.0 * delta), T * delta / 2.0)


class SmallTAbsolute(NamedTuple):
    value: float
    void: bool
    #: horizon below which the simplified bound T/(2K) is in force
    simple_threshold: float


def small_t_absolute(nu: BanditProblem, arm: int, T: int, K: int | None = None) -> SmallTAbsolute:
    """Per-arm pull-count bound (T/K)(1 - sqrt(2 T K_inf(arm, best mean)))
    for strategies at least as generous to optimal arms as uniform play.

    Clamped at 0 with a void flag once the square root exceeds 1; for
    horizons up to 1/(8 K_inf) the simplified bound T/(2K) holds.
    """
    if K is None:
        K = nu.num_arms
    if T < 0:
        raise ValueError(f"need T >= 0, got {T}")
    d = _k_inf_arm(nu, arm)
    if d == math.inf:
        return SmallTAbsolute(0.0, True, 0.0)
    threshold = math.inf if d == 0.0 else 1.0 / (8.0 * d)
    raw = (T / K) * (1.0 - math.sqrt(2.0 * T * d))
    if raw <= 0.0:
        return SmallTAbsolute(0.0, raw < 0.0, threshold)
    return SmallTAbsolute(raw, False, threshold)


class SmallTRelative(NamedTuple):
    #: bound on E[max(N_a,1)/max(N_a*,1)] under the theorem's second branch
    ratio_bound: float
    #: the first branch of the disjunction: E[N_a(T)] >= T/K outright
    count_threshold: float


def small_t_relative(nu: BanditProblem, arm: int, arm_star: int, T: int,
                     K: int | None = None) -> SmallTRelative:
    """Relative bound between a suboptimal arm and an optimal arm: either
    the suboptimal arm already has T/K expected pulls, or the expected
    pull-count ratio is at least 1 - 2 sqrt(2 T KL(arm, arm*) / K).

    The disjunction cannot be collapsed into one scalar; both branch values
    are returned.
    """
    if K is None:
        K = nu.num_arms
    if nu.gaps[arm] <= 0.0:
        raise ValueError(f"arm {arm} is optimal; the relative bound needs a suboptimal arm")
    if nu.gaps[arm_star] != 0.0:
        raise ValueError(f"arm {arm_star} is not optimal")
    if T < 0:
        raise ValueError(f"need T >= 0, got {T}")
    from .models import kl_div

    d = kl_div(nu.arms[arm], nu.arms[arm_star])
    if d == math.inf:
        return SmallTRelative(-math.inf, T / K)
    return SmallTRelative(1.0 - 2.0 * math.sqrt(2.0 * T * d / K), T / K)


class CollectiveBound(NamedTuple):
    count: float
    regret: float
    void: bool


def collective_bound(nu: BanditProblem, T: int) -> CollectiveBound:
    """Bound on total suboptimal pulls,
    T(1 - A*/K - A* sqrt(2 T Kmax)/K - 2 A* T Kmax / K), and the induced
    regret bound (min positive gap times the count); clamped at 0 with a
    void flag when negative."""
    if T < 0:
        raise ValueError(f"need T >= 0, got {T}")
    K = nu.num_arms
    a_star = len(nu.optimal_arms)
    kmax = k_max(nu)
    if kmax == math.inf:
        return CollectiveBound(0.0, 0.0, True)
    raw = T * (
        1.0
        - a_star / K
        - a_star * math.sqrt(2.0 * T * kmax) / K
        - 2.0 * a_star * T * kmax / K
    )
    if raw <= 0.0:
        return CollectiveBound(0.0, 0.0, raw < 0.0)
    return CollectiveBound(raw, nu.min_positive_gap() * raw, False)


class LargeTBound(NamedTuple):
    value: float
    a_t: float
    b_t: float
    c_t: float
    applicable: bool


def large_t_bound(nu: BanditProblem, arm: int, T: int,
                  consts: LargeTConstants | None = None) -> LargeTBound:
    """Non-asymptotic per-arm pull-count bound for the logarithmic regime:

        ln T / K_inf - (a_T + b_T + c_T) ln T - ln 2 / K_inf

    with a_T = omega/K_inf (ln T)^-4, b_T = C H(nu) ln T / T and
    c_T = ln(K C (ln T)^9)/ln T.  The bound only applies when a_T, b_T, c_T
    are all below 1; the flag reports that."""
    if consts is None:
        consts = LargeTConstants()
    if T < 2:
        raise ValueError(f"the large-horizon bound needs T >= 2, got {T}")
    d = _k_inf_arm(nu, arm)
    if not (0.0 < d < math.inf):
        raise ValueError(
            f"arm {arm} has K_inf {d!r}; the bound needs it positive and finite"
        )
    K = nu.num_arms
    lnt = math.log(T)
    omega = consts.omega_for(nu, arm)
    a_t = omega / d * lnt**-4
    b_t = consts.c_psi * hardness_h(nu) * lnt / T
    c_t = math.log(K * consts.c_psi * lnt**9) / lnt
    value = lnt / d - (a_t + b_t + c_t) * lnt - math.log(2.0) / d
    applicable = a_t < 1.0 and b_t < 1.0 and c_t < 1.0
    return LargeTBound(value, a_t, b_t, c_t, applicable)


def _sum_small_t_regret(nu: BanditProblem, t: int) -> float:
    return math.fsum(
        nu.gaps[a] * small_t_absolute(nu, a, t).value for a in nu.suboptimal_arms
    )


def _sum_large_t_regret(nu: BanditProblem, t: int, consts: LargeTConstants) -> float:
    if t < 2:
        return 0.0
    total = 0.0
    for a in nu.suboptimal_arms:
        d = _k_inf_arm(nu, a)
        if not (0.0 < d < math.inf):
            continue
        b = large_t_bound(nu, a, t, consts)
        if b.applicable and b.value > 0.0:
            total += nu.gaps[a] * b.value
    return total


def envelope(nu: BanditProblem, t_grid, consts: LargeTConstants | None = None) -> BoundCurve:
    """Pointwise maximum of the collective regret bound, the summed per-arm
    small-horizon bounds, and the applicable large-horizon bounds; each
    point is tagged with the bound that attained the maximum ("zero" when
    all are void)."""
    if consts is None:
        consts = LargeTConstants()
    points = []
    for t in sorted(set(int(t) for t in t_grid)):
        if t < 1:
            raise ValueError("horizons must be >= 1")
        candidates = [
            ("collective", collective_bound(nu, t).regret),
            ("small-t-absolute", _sum_small_t_regret(nu, t)),
            ("large-t", _sum_large_t_regret(nu, t, consts)),
        ]
        tag, value = max(candidates, key=lambda kv: kv[1])
        if value <= 0.0:
            points.append(CurvePoint(t, 0.0, True, "zero"))
        else:
            points.append(CurvePoint(t, value, False, tag))
    return BoundCurve("envelope", {"c_psi": consts.c_psi, "omega": consts.omega},
                      tuple(points))


#: bound identifiers the curve builder accepts
CURVE_BOUND_IDS = (
    "asymptotic",
    "envelope",
    "collective",
    "small-t-absolute",
    "large-t",
    "distribution-free",
    "distribution-free-opt",
    "bpr-known-mu-star",
    "bpr-known-gap",
)


def build_curve(bound_id: str, nu: BanditProblem, t_grid, *,
                eps: float | None = None, delta: float | None = None,
                consts: LargeTConstants | None = None) -> BoundCurve:
    """Evaluate one named bound over a horizon grid, in regret units.

    ``delta`` defaults to the problem's smallest positive gap for the
    two-armed known-gap / known-best-mean bounds; ``eps`` is required for
    the distribution-free bound.
    """
    if consts is None:
        consts = LargeTConstants()
    ts = sorted(set(int(t) for t in t_grid))
    if any(t < 1 for t in ts):
        raise ValueError("horizons must be >= 1")
    if bound_id == "asymptotic":
        return asymptotic_curve(nu, ts)
    if bound_id == "envelope":
        return envelope(nu, ts, consts)

    K = nu.num_arms
    if delta is None:
        delta = nu.min_positive_gap()
    points = []
    if bound_id == "collective":
        for t in ts:
            b = collective_bound(nu, t)
            points.append(CurvePoint(t, b.regret, b.void, ""))
    elif bound_id == "small-t-absolute":
        for t in ts:
            v = _sum_small_t_regret(nu, t)
            points.append(CurvePoint(t, v, v <= 0.0 and t > 0, ""))
    elif bound_id == "large-t":
        for t in ts:
            v = _sum_large_t_regret(nu, t, consts)
            points.append(CurvePoint(t, v, v <= 0.0, ""))
    elif bound_id == "distribution-free":
        if eps is None:
            raise ValueError("the distribution-free bound needs eps in (0, 1/2)")
        for t in ts:
            v = distribution_free_bound(K, t, eps)
            points.append(CurvePoint(t, max(v, 0.0), v <= 0.0, ""))
    elif bound_id == "distribution-free-opt":
        for t in ts:
            points.append(CurvePoint(t, distribution_free_opt(K, t), False, ""))
    elif bound_id == "bpr-known-mu-star":
        if delta <= 0.0:
            raise ValueError("bpr-known-mu-star needs a positive gap")
        for t in ts:
            points.append(CurvePoint(t, bpr_known_mu_star(delta, t).regret_v1, False, ""))
    elif bound_id == "bpr-known-gap":
        if delta <= 0.0:
            raise ValueError("bpr-known-gap needs a positive gap")
        for t in ts:
            points.append(CurvePoint(t, bpr_known_gap(delta, t), False, ""))
    else:
        raise ValueError(f"unknown bound id {bound_id!r}")
    return BoundCurve(bound_id, {"eps": eps, "delta": delta}, tuple(points))
