"""Distribution families, bandit problems, and per-model divergence
quantities: closed-form KL between family members, the smallest divergence
to a model member with mean above a target (computed by a concave dual for
the bounded-support model), its continuity-in-the-target bound, and the
problem-level summaries used by the lower-bound formulas.
"""

import math
from dataclasses import dataclass
from functools import cached_property

from .divergences import bernoulli_kl

__all__ = [
    "Bernoulli",
    "Gaussian",
    "Poisson",
    "GammaKnownShape",
    "Binomial",
    "Dirac",
    "Finite",
    "Distribution",
    "BanditProblem",
    "FamilyMismatchError",
    "ParameterMismatchError",
    "ModelMismatchError",
    "mean",
    "kl_div",
    "k_inf",
    "k_inf_continuity_increment",
    "continuity_slope",
    "exp_family_curvature_bound",
    "mean_range_sup",
    "hardness_h",
    "k_max",
]


class FamilyMismatchError(ValueError):
    """KL between distributions of different families is not defined here."""


class ParameterMismatchError(ValueError):
    """Closed forms require the known parameters (variance, shape, trial
    count) to agree between the two distributions."""


class ModelMismatchError(ValueError):
    """Distribution does not belong to the requested bandit model."""


EXPONENTIAL_FAMILIES = ("bernoulli", "gaussian", "poisson", "gamma", "binomial")


@dataclass(frozen=True)
class Bernoulli:
    p: float
    family = "bernoulli"

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"Bernoulli parameter must lie in [0, 1], got {self.p!r}")

    @property
    def mean(self) -> float:
        return self.p


@dataclass(frozen=True)
class Gaussian:
    """Gaussian with known variance (the variance is a model parameter,
    not a free one)."""

    mu: float
    variance: float
    family = "gaussian"

    def __post_init__(self):
        if not (self.variance > 0.0) or not math.isfinite(self.variance):
            raise ValueError(f"variance must be positive, got {self.variance!r}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mean must be finite, got {self.mu!r}")

    @property
    def mean(self) -> float:
        return self.mu


@dataclass(frozen=True)
class Poisson:
    lam: float
    family = "poisson"

    def __post_init__(self):
        if not (self.lam > 0.0) or not math.isfinite(self.lam):
            raise ValueError(f"Poisson mean must be positive, got {self.lam!r}")

    @property
    def mean(self) -> float:
        return self.lam


@dataclass(frozen=True)
class GammaKnownShape:
    """Gamma distribution parameterised by its mean, with known shape."""

    shape: float
    mu: float
    family = "gamma"

    def __post_init__(self):
        if not (self.shape > 0.0) or not math.isfinite(self.shape):
            raise ValueError(f"shape must be positive, got {self.shape!r}")
        if not (self.mu > 0.0) or not math.isfinite(self.mu):
            raise ValueError(f"mean must be positive, got {self.mu!r}")

    @property
    def mean(self) -> float:
        return self.mu


@dataclass(frozen=True)
class Binomial:
    """Binomial over n trials, parameterised by its mean in (0, n)."""

    n: int
    mu: float
    family = "binomial"

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"trial count must be an integer >= 1, got {self.n!r}")
        if not (0.0 < self.mu < self.n):
            raise ValueError(f"mean must lie in (0, {self.n}), got {self.mu!r}")

    @property
    def mean(self) -> float:
        return self.mu


@dataclass(frozen=True)
class Dirac:
    point: float
    family = "dirac"

    def __post_init__(self):
        if not math.isfinite(self.point):
            raise ValueError(f"point must be finite, got {self.point!r}")

    @property
    def mean(self) -> float:
        return self.point


@dataclass(frozen=True)
class Finite:
    """Finitely supported distribution on [0, ceiling].

    Support points must be distinct and sorted increasing; weights must be
    nonnegative and sum to 1 within 1e-12.
    """

    points: tuple
    weights: tuple
    ceiling: float
    family = "finite"

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(x) for x in self.points))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not (self.ceiling > 0.0) or not math.isfinite(self.ceiling):
            raise ValueError(f"ceiling must be positive, got {self.ceiling!r}")
        if len(self.points) == 0 or len(self.points) != len(self.weights):
            raise ValueError("points and weights must be nonempty and equal length")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ValueError("support points must be strictly increasing")
        if not all(0.0 <= x <= self.ceiling for x in self.points):
            raise ValueError("support points must lie in [0, ceiling]")
        if any(w < 0.0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")

    @property
    def mean(self) -> float:
        return math.fsum(w * x for w, x in zip(self.weights, self.points))


Distribution = (Bernoulli, Gaussian, Poisson, GammaKnownShape, Binomial, Dirac, Finite)

#: model tags a BanditProblem may carry
MODEL_TAGS = EXPONENTIAL_FAMILIES + ("dirac", "bounded")


def mean(d) -> float:
    """Expectation of a distribution."""
    return d.mean


def default_model(d) -> str:
    """Model tag a distribution naturally belongs to."""
    return "bounded" if d.family == "finite" else d.family


def _finite_atoms(d):
    if d.family == "finite":
        return d.points, d.weights
    if d.family == "dirac":
        return (d.point,), (1.0,)
    raise FamilyMismatchError(f"not a finitely supported distribution: {d!r}")


def kl_div(d1, d2) -> float:
    """KL divergence between two distributions of the same family (with
    matching known parameters), or between two finitely supported
    distributions.  Returns +inf when absolute continuity fails."""
    fin = ("finite", "dirac")
    if d1.family in fin and d2.family in fin:
        pts1, w1 = _finite_atoms(d1)
        pts2, w2 = _finite_atoms(d2)
        lookup = dict(zip(pts2, w2))
        acc = 0.0
        for x, w in zip(pts1, w1):
            if w == 0.0:
                continue
            w2x = lookup.get(x, 0.0)
            if w2x == 0.0:
                return math.inf
            acc += w * math.log(w / w2x)
        return max(acc, 0.0)

    if d1.family != d2.family:
        raise FamilyMismatchError(
            f"cannot take KL between {d1.family} and {d2.family}"
        )
    if d1.family == "bernoulli":
        return bernoulli_kl(d1.p, d2.p)
    if d1.family == "gaussian":
        if d1.variance != d2.variance:
            raise ParameterMismatchError("Gaussian KL requires equal variances")
        diff = d1.mu - d2.mu
        return diff * diff / (2.0 * d1.variance)
    if d1.family == "poisson":
        return d2.lam - d1.lam + d1.lam * math.log(d1.lam / d2.lam)
    if d1.family == "gamma":
        if d1.shape != d2.shape:
            raise ParameterMismatchError("Gamma KL requires equal shapes")
        r = d1.mu / d2.mu
        return d1.shape * (r - 1.0 - math.log(r))
    if d1.family == "binomial":
        if d1.n != d2.n:
            raise ParameterMismatchError("Binomial KL requires equal trial counts")
        n = d1.n
        return d1.mu * math.log(d1.mu / d2.mu) + (n - d1.mu) * math.log(
            (n - d1.mu) / (n - d2.mu)
        )
    raise FamilyMismatchError(f"no KL closed form for family {d1.family!r}")


def mean_range_sup(d) -> float:
    """Supremum of the mean range of the exponential family d lives in."""
    if d.family == "bernoulli":
        return 1.0
    if d.family == "binomial":
        return float(d.n)
    if d.family in ("gaussian", "poisson", "gamma"):
        return math.inf
    raise ModelMismatchError(f"{d.family} is not one of the exponential families")


def _family_member_with_mean(d, x):
    if d.family == "bernoulli":
        return Bernoulli(x)
    if d.family == "gaussian":
        return Gaussian(x, d.variance)
    if d.family == "poisson":
        return Poisson(x)
    if d.family == "gamma":
        return GammaKnownShape(d.shape, x)
    if d.family == "binomial":
        return Binomial(d.n, x)
    raise ModelMismatchError(f"no mean-parameterised member for {d.family}")


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def _golden_max(f, a: float, b: float, tol: float):
    """Golden-section maximisation of a concave f on [a, b] down to bracket
    width tol; returns (argmax, value)."""
    h = b - a
    if h <= tol:
        m = 0.5 * (a + b)
        return m, f(m)
    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
    if yc > yd:
        return c, yc
    return d, yd


def _k_inf_bounded(d: Finite, x: float) -> float:
    """Smallest KL from d to a distribution on [0, ceiling] with mean above
    x, computed as the concave one-dimensional dual

        max over lam in [0, 1/(M-x)] of  sum_i w_i ln(1 - lam*(x_i - x)).
    """
    M = d.ceiling
    if x >= M:
        return math.inf
    pts, wts = d.points, d.weights

    def dual(lam):
        acc = 0.0
        for xi, wi in zip(pts, wts):
            if wi == 0.0:
                continue
            arg = 1.0 - lam * (xi - x)
            if arg <= 0.0:
                return -math.inf
            acc += wi * math.log(arg)
        return acc

    lam_max = 1.0 / (M - x)
    _, val = _golden_max(dual, 0.0, lam_max, 1e-10)
    # the boundary can carry the maximum when no atom sits at the ceiling
    val = max(val, dual(0.0), dual(lam_max))
    return max(val, 0.0)


def k_inf(d, x: float, model: str | None = None) -> float:
    """Smallest KL divergence from d to a member of the model with mean
    strictly above x; +inf if no such member exists.

    Returns 0 whenever mean(d) >= x (continuity from below at the boundary).
    For the exponential families this reduces to the closed-form KL to the
    member with mean x; for the bounded-support model it is computed by the
    concave dual maximisation.
    """
    if model is None:
        model = default_model(d)
    if model not in MODEL_TAGS:
        raise ModelMismatchError(f"unknown model tag {model!r}")
    if not math.isfinite(x):
        raise ValueError(f"target mean must be finite, got {x!r}")

    if model in EXPONENTIAL_FAMILIES:
        if d.family != model:
            raise ModelMismatchError(f"{d.family} arm in {model!r} model")
        if d.mean >= x:
            return 0.0
        if x >= mean_range_sup(d):
            # no member has mean above x: the infimum runs over an empty set
            return math.inf
        return kl_div(d, _family_member_with_mean(d, x))

    if model == "dirac":
        if d.family != "dirac":
            raise ModelMismatchError(f"{d.family} arm in 'dirac' model")
        return 0.0 if d.mean >= x else math.inf

    # bounded-support model
    if d.family != "finite":
        raise ModelMismatchError(
            "bounded-support computations require Finite arms "
            "(wrap a point mass as Finite((x,), (1.0,), ceiling))"
        )
    if d.mean >= x:
        return 0.0
    return _k_inf_bounded(d, x)


def exp_family_curvature_bound(d, mu_star: float) -> float:
    """Per-family bound on the maximal curvature of the divergence
    representation over [mu_star, mu_star + B]: 1/mu* for Poisson,
    shape/mu*^2 for Gamma, 1/variance for Gaussian, and the relaxed
    2n/(mu*(n - mu*)) for Binomial (Bernoulli is the n = 1 case)."""
    if d.family == "poisson":
        if mu_star <= 0.0:
            raise ValueError("Poisson reference mean must be positive")
        return 1.0 / mu_star
    if d.family == "gamma":
        if mu_star <= 0.0:
            raise ValueError("Gamma reference mean must be positive")
        return d.shape / (mu_star * mu_star)
    if d.family == "gaussian":
        return 1.0 / d.variance
    if d.family == "binomial":
        n = d.n
        if not (0.0 < mu_star < n):
            raise ValueError(f"Binomial reference mean must lie in (0, {n})")
        return 2.0 * n / (mu_star * (n - mu_star))
    if d.family == "bernoulli":
        if not (0.0 < mu_star < 1.0):
            raise ValueError("Bernoulli reference mean must lie in (0, 1)")
        return 2.0 / (mu_star * (1.0 - mu_star))
    raise ModelMismatchError(f"{d.family} is not one of the exponential families")


def _b_mu_star(d, mu_star: float) -> float:
    return min((mean_range_sup(d) - mu_star) / 2.0, 1.0)


def k_inf_continuity_increment(d, mu_star: float, eps: float, model: str | None = None) -> float:
    """Upper bound on k_inf(d, mu_star + eps) - k_inf(d, mu_star).

    Bounded-support model: 4*eps/(M - mu_star), valid for
    0 < eps < (M - mu_star)/4.  Exponential families:
    eps * (mu_star + B - mean(d)) * G with B = min((sup I - mu_star)/2, 1)
    and G the family curvature bound, valid for 0 < eps < B.
    """
    if model is None:
        model = default_model(d)
    if model == "bounded":
        if d.family != "finite":
            raise ModelMismatchError("bounded-support increment requires a Finite arm")
        M = d.ceiling
        if not (0.0 <= mu_star < M):
            raise ValueError(f"reference mean must lie in [0, {M}), got {mu_star!r}")
        if not (0.0 < eps < (M - mu_star) / 4.0):
            raise ValueError(
                f"eps must lie in (0, {(M - mu_star) / 4.0}), got {eps!r}"
            )
        return 4.0 * eps / (M - mu_star)
    if model in EXPONENTIAL_FAMILIES:
        if d.family != model:
            raise ModelMismatchError(f"{d.family} arm in {model!r} model")
        b = _b_mu_star(d, mu_star)
        if not (0.0 < eps < b):
            raise ValueError(f"eps must lie in (0, {b}), got {eps!r}")
        return eps * (mu_star + b - d.mean) * exp_family_curvature_bound(d, mu_star)
    raise ModelMismatchError(f"no continuity bound for model {model!r}")


def continuity_slope(d, mu_star: float, model: str | None = None) -> float:
    """Linear coefficient of the continuity increment in eps: the per-model
    slope used as the default large-horizon correction constant."""
    if model is None:
        model = default_model(d)
    if model == "bounded":
        if d.family != "finite":
            raise ModelMismatchError("bounded-support slope requires a Finite arm")
        if not (0.0 <= mu_star < d.ceiling):
            raise ValueError(f"reference mean must lie in [0, {d.ceiling})")
        return 4.0 / (d.ceiling - mu_star)
    if model in EXPONENTIAL_FAMILIES:
        if d.family != model:
            raise ModelMismatchError(f"{d.family} arm in {model!r} model")
        b = _b_mu_star(d, mu_star)
        return (mu_star + b - d.mean) * exp_family_curvature_bound(d, mu_star)
    raise ModelMismatchError(f"no continuity slope for model {model!r}")


@dataclass(frozen=True)
class BanditProblem:
    """Ordered arms plus the model they live in.

    Derived quantities (best mean, gaps, optimal and worst arm sets) are
    computed once and cached.
    """

    arms: tuple
    model: str

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 2:
            raise ValueError("a bandit problem needs at least 2 arms")
        if self.model not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {self.model!r}")
        if self.model in EXPONENTIAL_FAMILIES or self.model == "dirac":
            for a in self.arms:
                if a.family != self.model:
                    raise ModelMismatchError(
                        f"arm family {a.family!r} does not match model {self.model!r}"
                    )
        else:  # bounded
            ceilings = set()
            for a in self.arms:
                if a.family != "finite":
                    raise ModelMismatchError(
                        "bounded model requires Finite arms "
                        "(wrap point masses as single-atom Finite)"
                    )
                ceilings.add(a.ceiling)
            if len(ceilings) != 1:
                raise ModelMismatchError("bounded model requires a common ceiling")

    @property
    def num_arms(self) -> int:
        return len(self.arms)

    @cached_property
    def means(self) -> tuple:
        return tuple(a.mean for a in self.arms)

    @cached_property
    def mu_star(self) -> float:
        return max(self.means)

    @cached_property
    def gaps(self) -> tuple:
        star = self.mu_star
        return tuple(star - m for m in self.means)

    @cached_property
    def optimal_arms(self) -> tuple:
        return tuple(a for a, g in enumerate(self.gaps) if g == 0.0)

    @cached_property
    def suboptimal_arms(self) -> tuple:
        return tuple(a for a, g in enumerate(self.gaps) if g > 0.0)

    @cached_property
    def worst_arms(self) -> tuple:
        lo = min(self.means)
        return tuple(a for a, m in enumerate(self.means) if m == lo)

    def min_positive_gap(self) -> float:
        subs = self.suboptimal_arms
        if not subs:
            return 0.0
        return min(self.gaps[a] for a in subs)


def hardness_h(nu: BanditProblem) -> float:
    """Sum of 1/gap^2 over suboptimal arms (0 when every arm is optimal)."""
    return math.fsum(1.0 / nu.gaps[a] ** 2 for a in nu.suboptimal_arms)


def k_max(nu: BanditProblem) -> float:
    """min over worst arms of max over optimal arms of KL(worst, optimal)."""
    best = math.inf
    for w in nu.worst_arms:
        worst_val = max(kl_div(nu.arms[w], nu.arms[a]) for a in nu.optimal_arms)
        best = min(best, worst_val)
    return best
