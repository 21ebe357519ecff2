"""Exhaustive enumeration of trajectory distributions on micro instances.

For coin-reward problems and strategies whose randomization thresholds live
on a finite grid, every trajectory of (randomization symbol, reward) pairs
over a short horizon is enumerated with its exact probability under two
problems at once.  That certifies, to machine precision, the chain-rule
identity (the divergence between full trajectory laws equals the
pull-count-weighted sum of per-arm divergences) and the fundamental
inequality (that sum dominates the Bernoulli divergence between the
expectations of any [0,1] trajectory statistic), as well as the
data-processing inequality on arbitrary finite distributions.
"""

import math
from dataclasses import dataclass
from itertools import product

from .divergences import bernoulli_kl
from .models import BanditProblem, kl_div
from .strategies import make_strategy
from .streams import DiscreteStream

__all__ = [
    "TrajectoryTable",
    "EnumerationSizeError",
    "DiscretizationError",
    "enumerate_table",
    "all_z_ids",
    "chain_rule_residual",
    "fundamental_slack",
    "data_processing_check",
]

ROW_CAP = 10**7
MAX_HORIZON = 12
MAX_ALPHABET = 4


class EnumerationSizeError(ValueError):
    """The requested table would exceed the row cap."""


class DiscretizationError(ValueError):
    """The strategy's randomization thresholds do not live on the grid of
    the requested alphabet, so exact discretization is impossible."""


@dataclass(frozen=True)
class TrajectoryTable:
    """Exact trajectory law of one strategy under two problems.

    Rows are (symbol sequence, reward sequence) pairs; each row carries its
    probability under both problems and the final pull counts.
    """

    horizon: int
    num_arms: int
    alphabet_size: int
    probs_nu: tuple
    probs_nu_prime: tuple
    counts: tuple

    def __post_init__(self):
        for probs in (self.probs_nu, self.probs_nu_prime):
            total = math.fsum(probs)
            if abs(total - 1.0) > 1e-12:
                raise AssertionError(f"row probabilities sum to {total!r}, not 1")
        for row in self.counts:
            if sum(row) != self.horizon:
                raise AssertionError("row counts do not sum to the horizon")

    def expected_count(self, arm: int, under_prime: bool = False) -> float:
        probs = self.probs_nu_prime if under_prime else self.probs_nu
        return math.fsum(p * row[arm] for p, row in zip(probs, self.counts))

    def z_values(self, z_id) -> tuple:
        """Per-row values of a configured [0,1] statistic."""
        kind = z_id[0]
        T = self.horizon
        if kind == "count_frac":
            arm = z_id[1]
            return tuple(row[arm] / T for row in self.counts)
        if kind == "optimal_frac":
            arms = z_id[1]
            return tuple(sum(row[a] for a in arms) / T for row in self.counts)
        if kind == "plus_ratio":
            a, b = z_id[1], z_id[2]
            out = []
            for row in self.counts:
                na = max(row[a], 1)
                nb = max(row[b], 1)
                out.append(na / (na + nb))
            return tuple(out)
        raise ValueError(f"unknown statistic id {z_id!r}")

    def expected_z(self, z_id, under_prime: bool = False) -> float:
        probs = self.probs_nu_prime if under_prime else self.probs_nu
        vals = self.z_values(z_id)
        return math.fsum(p * z for p, z in zip(probs, vals))


def all_z_ids(nu: BanditProblem) -> tuple:
    """Every configured statistic for a problem: per-arm count fractions,
    the optimal-arm count fraction, and the guarded pull-count ratio for
    each (suboptimal, optimal) pair."""
    ids = [("count_frac", a) for a in range(nu.num_arms)]
    ids.append(("optimal_frac", nu.optimal_arms))
    for a in nu.suboptimal_arms:
        for b in nu.optimal_arms:
            ids.append(("plus_ratio", a, b))
    return tuple(ids)


def _validate_pair(nu: BanditProblem, nu_prime: BanditProblem):
    if nu.num_arms != nu_prime.num_arms:
        raise ValueError("the two problems must have the same number of arms")
    for d in nu.arms + nu_prime.arms:
        if d.family != "bernoulli":
            raise ValueError("enumeration supports coin-reward arms only")


def enumerate_table(nu: BanditProblem, nu_prime: BanditProblem, strategy,
                    T: int, rand_alphabet_size: int = 1) -> TrajectoryTable:
    """Exact trajectory table of `strategy` over horizon T under both
    problems, with the strategy's randomization discretized to
    ``rand_alphabet_size`` equiprobable symbols per round.

    Strategies whose threshold denominators do not divide the alphabet are
    rejected rather than approximated.
    """
    _validate_pair(nu, nu_prime)
    if not (1 <= T <= MAX_HORIZON):
        raise ValueError(f"horizon must lie in [1, {MAX_HORIZON}], got {T}")
    R = rand_alphabet_size
    if not (1 <= R <= MAX_ALPHABET):
        raise ValueError(f"alphabet size must lie in [1, {MAX_ALPHABET}], got {R}")
    rows = (2 * R) ** T
    if rows > ROW_CAP:
        raise EnumerationSizeError(f"{rows} rows exceed the cap of {ROW_CAP}")

    if isinstance(strategy, str):
        sid, params = strategy, {}
    else:
        sid, params = strategy[0], dict(strategy[1] or {})
    K = nu.num_arms

    probe = make_strategy(sid, K, DiscreteStream((), 1), params)
    den = probe.rand_denominator
    if den is None:
        raise DiscretizationError(
            f"strategy {sid!r} draws through a continuum of thresholds"
        )
    if den > 1 and R % den != 0:
        raise DiscretizationError(
            f"strategy {sid!r} needs an alphabet divisible by {den}, got {R}"
        )

    p_nu = [d.p for d in nu.arms]
    p_nup = [d.p for d in nu_prime.arms]

    probs = []
    probs_prime = []
    counts = []
    sym_weight = 1.0 / R
    for symbols in product(range(R), repeat=T):
        for rewards in product((1.0, 0.0), repeat=T):
            stream_replay = DiscreteStream(symbols, R)
            strat = make_strategy(sid, K, stream_replay, params)
            row_counts = [0] * K
            pr = 1.0
            pr_prime = 1.0
            for t in range(1, T + 1):
                arm = strat.choose(t)
                y = rewards[t - 1]
                strat.update(arm, y)
                row_counts[arm] += 1
                pr *= sym_weight * (p_nu[arm] if y == 1.0 else 1.0 - p_nu[arm])
                pr_prime *= sym_weight * (
                    p_nup[arm] if y == 1.0 else 1.0 - p_nup[arm]
                )
            probs.append(pr)
            probs_prime.append(pr_prime)
            counts.append(tuple(row_counts))
    return TrajectoryTable(T, K, R, tuple(probs), tuple(probs_prime), tuple(counts))


def trajectory_kl(table: TrajectoryTable) -> float:
    """KL divergence between the two trajectory laws of the table."""
    terms = []
    for p, q in zip(table.probs_nu, table.probs_nu_prime):
        if p == 0.0:
            continue
        if q == 0.0:
            return math.inf
        terms.append(p * math.log(p / q))
    return math.fsum(terms)


def _count_weighted_kl(table: TrajectoryTable, nu, nu_prime) -> float:
    total = []
    for a in range(table.num_arms):
        d = kl_div(nu.arms[a], nu_prime.arms[a])
        if d == 0.0:
            continue
        expected = table.expected_count(a)
        if d == math.inf:
            if expected > 0.0:
                return math.inf
            continue
        total.append(expected * d)
    return math.fsum(total)


def chain_rule_residual(table: TrajectoryTable, nu: BanditProblem,
                        nu_prime: BanditProblem) -> float:
    """|KL between trajectory laws - sum_a E[N_a] KL(nu_a, nu'_a)|; both
    sides infinite counts as an exact match (residual 0), one-sided
    infinity surfaces as an infinite residual."""
    lhs = trajectory_kl(table)
    rhs = _count_weighted_kl(table, nu, nu_prime)
    if math.isinf(lhs) or math.isinf(rhs):
        return 0.0 if lhs == rhs else math.inf
    return abs(lhs - rhs)


def _clamp_unit(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


_INTERIOR_BELOW_ONE = 1.0 - 2.0**-53  # largest double below 1


def _kl_of_expectations(e1: float, e2: float) -> float:
    """kl between two [0,1] expectations computed by floating sums.

    When the weighted divergence on the left side is finite, the
    contraction theorem excludes genuinely one-sided singular pairs, so an
    expectation that rounds to exactly 1 while its partner sits just below
    can only be accumulation error; such endpoint values are resolved to
    the nearest representable interior point (which maps the constant-
    statistic case to kl of equal arguments, exactly 0).
    """
    e1 = _clamp_unit(e1)
    e2 = _clamp_unit(e2)
    if e1 == e2:
        return 0.0
    if e1 == 1.0:
        e1 = _INTERIOR_BELOW_ONE
    if e2 == 1.0:
        e2 = _INTERIOR_BELOW_ONE
    return bernoulli_kl(e1, e2)


def fundamental_slack(table: TrajectoryTable, nu: BanditProblem,
                      nu_prime: BanditProblem, z_id) -> float:
    """sum_a E[N_a] KL(nu_a, nu'_a) - kl(E[Z], E'[Z]) for a configured
    [0,1] statistic Z; nonnegative up to float rounding."""
    vals = table.z_values(z_id)
    if any(not (0.0 <= z <= 1.0) for z in vals):
        raise ValueError(f"statistic {z_id!r} leaves [0, 1]")
    lhs = _count_weighted_kl(table, nu, nu_prime)
    if lhs == math.inf:
        return math.inf
    ez = table.expected_z(z_id)
    ez_prime = table.expected_z(z_id, under_prime=True)
    return lhs - _kl_of_expectations(ez, ez_prime)


def data_processing_check(p1, p2, z) -> float:
    """KL(p1, p2) - kl(E1[z], E2[z]) over a finite outcome set; the
    contraction property makes this nonnegative for every [0,1] statistic."""
    p1 = list(p1)
    p2 = list(p2)
    z = list(z)
    if not (len(p1) == len(p2) == len(z)):
        raise ValueError("p1, p2 and z must have equal length")
    if len(p1) > 64:
        raise ValueError("outcome sets are capped at 64 points")
    for name, p in (("p1", p1), ("p2", p2)):
        if any(v < 0.0 for v in p):
            raise ValueError(f"{name} has negative mass")
        if abs(math.fsum(p) - 1.0) > 1e-9:
            raise ValueError(f"{name} does not sum to 1")
    if any(not (0.0 <= v <= 1.0) for v in z):
        raise ValueError("z must be [0,1]-valued")

    terms = []
    kl_full = None
    for a, b in zip(p1, p2):
        if a == 0.0:
            continue
        if b == 0.0:
            kl_full = math.inf
            break
        terms.append(a * math.log(a / b))
    if kl_full is None:
        kl_full = math.fsum(terms)
    if kl_full == math.inf:
        return math.inf
    e1 = math.fsum(a * v for a, v in zip(p1, z))
    e2 = math.fsum(b * v for b, v in zip(p2, z))
    return kl_full - _kl_of_expectations(e1, e2)
