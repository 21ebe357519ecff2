"""Bandit strategies under one sequential contract: ``choose(t)`` returns an
arm for round t (consuming randomization draws only when the decision needs
one), ``update(arm, reward)`` folds the observed reward in.

Decisions depend only on the history of pulled arms, observed rewards and
randomization draws.  Randomization discipline per strategy:

* uniform play: one draw per round;
* index policies (mean-plus-bonus and divergence-threshold): no draws,
  except one draw to break an exactly tied argmax uniformly;
* posterior sampling: exactly K draws per round (one inverse-CDF sample
  of each arm's posterior);
* the known-best-mean algorithm: one draw per candidate-set round, none
  during its forced round-robin bursts.

Ties elsewhere resolve to the lowest arm index.  Every draw comes from the
strategy's own uniform stream, so replays with equal seeds are
bit-identical.
"""

import math
from functools import reduce

from numpy.random import PCG64
from scipy.special import betaincinv

from .divergences import bernoulli_kl
from .streams import UniformStream, run_seed_sequence

__all__ = [
    "Strategy",
    "ContractViolation",
    "UniformRandom",
    "UCB",
    "KLUCB",
    "ThompsonBernoulli",
    "KnownBestMean",
    "Greedy",
    "Constant",
    "RoundRobin",
    "CoinMix",
    "known_mu_star_candidates",
    "make_strategy",
    "STRATEGY_IDS",
    "uniform",
    "ucb",
    "kl_ucb",
    "thompson_bernoulli",
    "known_mu_star",
]


class ContractViolation(RuntimeError):
    """The choose/update alternation or arm echo was broken by the caller."""


class StrategyDomainError(ValueError):
    """A reward fell outside the strategy's declared domain."""


def _lcm_upto(k: int) -> int:
    return reduce(math.lcm, range(1, k + 1), 1)


class Strategy:
    """Shared state: pull counts, streaming empirical means, round counter.

    ``rand_denominator`` declares the granularity of the strategy's decision
    thresholds on its uniform draws: every threshold is a multiple of
    1/rand_denominator (1 for deterministic strategies, None when the
    thresholds are not a finite set, as for posterior sampling).
    """

    rand_denominator: int | None = 1

    def __init__(self, K: int, stream):
        if K < 1:
            raise ValueError("need at least one arm")
        self.K = K
        self.stream = stream
        self.counts = [0] * K
        self.means = [0.0] * K
        self.t = 0  # completed rounds
        self._pending = None  # arm returned by choose, awaiting update

    def choose(self, t: int) -> int:
        if t != self.t + 1:
            raise ContractViolation(
                f"choose called for round {t}, expected {self.t + 1}"
            )
        if self._pending is not None:
            raise ContractViolation("choose called twice without update")
        arm = self._decide(t)
        self._pending = arm
        return arm

    def update(self, arm: int, reward: float):
        if self._pending is None or arm != self._pending:
            raise ContractViolation(
                f"update for arm {arm}, last chosen was {self._pending}"
            )
        self._pending = None
        self._fold(arm, reward)
        n = self.counts[arm] + 1
        self.counts[arm] = n
        self.means[arm] += (reward - self.means[arm]) / n
        self.t += 1

    # hooks -----------------------------------------------------------------
    def _decide(self, t: int) -> int:
        raise NotImplementedError

    def _fold(self, arm: int, reward: float):
        """Strategy-specific bookkeeping before the shared count/mean fold."""

    # helpers ---------------------------------------------------------------
    def _draw_index(self, m: int) -> int:
        """Uniform index in range(m), one draw."""
        u = self.stream.draw()
        i = int(u * m)
        return m - 1 if i >= m else i

    def _argmax_with_tie_draw(self, values) -> int:
        best = -math.inf
        ties = []
        for a, v in enumerate(values):
            if v > best:
                best = v
                ties = [a]
            elif v == best:
                ties.append(a)
        if len(ties) == 1:
            return ties[0]
        return ties[self._draw_index(len(ties))]


class UniformRandom(Strategy):
    """Pulls an arm uniformly at random at each round (one draw)."""

    def __init__(self, K, stream):
        super().__init__(K, stream)
        self.rand_denominator = K

    def _decide(self, t):
        return self._draw_index(self.K)


class UCB(Strategy):
    """Mean plus sqrt(2 ln t / N) index with forced initialization over the
    first K rounds; exactly tied indices are broken uniformly at random."""

    def __init__(self, K, stream):
        super().__init__(K, stream)
        self.rand_denominator = _lcm_upto(K)

    def _decide(self, t):
        if t <= self.K:
            return t - 1
        lnt = math.log(t)
        idx = [
            self.means[a] + math.sqrt(2.0 * lnt / self.counts[a])
            for a in range(self.K)
        ]
        return self._argmax_with_tie_draw(idx)


def _klucb_quantile(phat: float, target: float) -> float:
    """Largest q in [phat, 1] with kl(phat, q) <= target, by 34 bisection
    steps (bracket below 1e-10, inside the declared 1e-9 tolerance)."""
    lo, hi = phat, 1.0
    for _ in range(34):
        mid = 0.5 * (lo + hi)
        if bernoulli_kl(phat, mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


class KLUCB(Strategy):
    """Divergence-threshold index for rewards in [0, support]: the largest
    q with N * kl(mean/support, q/support) <= ln t.  Forced initialization
    over the first K rounds; ties broken uniformly at random."""

    def __init__(self, K, stream, support: float = 1.0):
        super().__init__(K, stream)
        if not (support > 0.0) or not math.isfinite(support):
            raise ValueError(f"support bound must be positive, got {support!r}")
        self.support = support
        self.rand_denominator = _lcm_upto(K)

    def _decide(self, t):
        if t <= self.K:
            return t - 1
        lnt = math.log(t)
        idx = []
        for a in range(self.K):
            phat = self.means[a] / self.support
            if not (0.0 <= phat <= 1.0):
                raise StrategyDomainError(
                    f"empirical mean {self.means[a]!r} outside [0, {self.support}]"
                )
            idx.append(self.support * _klucb_quantile(phat, lnt / self.counts[a]))
        return self._argmax_with_tie_draw(idx)


class ThompsonBernoulli(Strategy):
    """Posterior sampling for 0/1 rewards with a flat prior per arm: one
    inverse-CDF posterior sample per arm per round (K draws), highest
    sample wins, ties to the lowest index."""

    rand_denominator = None

    def __init__(self, K, stream):
        super().__init__(K, stream)
        self.successes = [0] * K

    def _decide(self, t):
        best = -math.inf
        pick = 0
        for a in range(self.K):
            u = self.stream.draw()
            s = self.successes[a]
            n = self.counts[a]
            v = float(betaincinv(1.0 + s, 1.0 + (n - s), u))
            if v > best:
                best = v
                pick = a
        return pick

    def _fold(self, arm, reward):
        if reward == 1.0:
            self.successes[arm] += 1
        elif reward != 0.0:
            raise StrategyDomainError(
                f"posterior sampling for 0/1 rewards got {reward!r}"
            )


class KnownBestMean(Strategy):
    """Candidate-elimination algorithm that knows the best achievable mean.

    After one forced pull of each arm, a round keeps the arms whose
    empirical mean clears mu_star - sqrt(4 ln N / N) strictly and plays one
    of them uniformly at random (one draw).  When no arm qualifies, every
    arm is replayed once in index order over the next K rounds, consuming
    no draws.
    """

    def __init__(self, K, stream, mu_star: float):
        super().__init__(K, stream)
        if not math.isfinite(mu_star):
            raise ValueError(f"mu_star must be finite, got {mu_star!r}")
        self.mu_star = mu_star
        self.queue = []
        self.rand_denominator = _lcm_upto(K)

    def candidates(self):
        if any(n < 1 for n in self.counts):
            raise ContractViolation("candidate set undefined before every arm is pulled")
        out = []
        for a in range(self.K):
            n = self.counts[a]
            if self.means[a] - self.mu_star > -math.sqrt(4.0 * math.log(n) / n):
                out.append(a)
        return out

    def _decide(self, t):
        if self.queue:
            return self.queue[0]
        if t <= self.K:
            return t - 1
        cand = self.candidates()
        if cand:
            return cand[self._draw_index(len(cand))]
        self.queue = list(range(self.K))
        return self.queue[0]

    def _fold(self, arm, reward):
        if self.queue and arm == self.queue[0]:
            self.queue.pop(0)


def known_mu_star_candidates(state: KnownBestMean) -> set:
    """Candidate arms of the known-best-mean algorithm at its current state
    (0-based indices).  Requires every arm pulled at least once."""
    return set(state.candidates())


class Greedy(Strategy):
    """Plays each arm once, then the highest empirical mean (lowest index
    on ties).  Deterministic; consumes no draws."""

    def _decide(self, t):
        if t <= self.K:
            return t - 1
        best = -math.inf
        pick = 0
        for a in range(self.K):
            if self.means[a] > best:
                best = self.means[a]
                pick = a
        return pick


class Constant(Strategy):
    """Always plays one fixed arm.  Deterministic test strategy."""

    def __init__(self, K, stream, arm: int = 0):
        super().__init__(K, stream)
        if not (0 <= arm < K):
            raise ValueError(f"arm {arm} outside range({K})")
        self.arm = arm

    def _decide(self, t):
        return self.arm


class RoundRobin(Strategy):
    """Cycles through the arms in index order.  Deterministic test strategy."""

    def _decide(self, t):
        return (t - 1) % self.K


class CoinMix(Strategy):
    """Test strategy with a single randomization threshold at 1/2: explore
    round-robin on heads, exploit the best pulled arm on tails."""

    rand_denominator = 2

    def _decide(self, t):
        u = self.stream.draw()
        if u < 0.5:
            return (t - 1) % self.K
        best = -math.inf
        pick = 0
        for a in range(self.K):
            if self.counts[a] >= 1 and self.means[a] > best:
                best = self.means[a]
                pick = a
        return pick


_REGISTRY = {
    "uniform": UniformRandom,
    "ucb": UCB,
    "kl_ucb": KLUCB,
    "thompson_bernoulli": ThompsonBernoulli,
    "known_mu_star": KnownBestMean,
    "greedy": Greedy,
    "constant": Constant,
    "round_robin": RoundRobin,
    "coin_mix": CoinMix,
}

STRATEGY_IDS = tuple(sorted(_REGISTRY))


def make_strategy(strategy_id: str, K: int, stream, params: dict | None = None):
    """Instantiate a registered strategy around an injected uniform stream."""
    if strategy_id not in _REGISTRY:
        raise ValueError(f"unknown strategy id {strategy_id!r}")
    return _REGISTRY[strategy_id](K, stream, **(params or {}))


def _own_stream(seed):
    return UniformStream(PCG64(run_seed_sequence(seed)))


def uniform(K: int, seed) -> UniformRandom:
    return UniformRandom(K, _own_stream(seed))


def ucb(K: int, seed) -> UCB:
    return UCB(K, _own_stream(seed))


def kl_ucb(K: int, seed, support: float = 1.0) -> KLUCB:
    return KLUCB(K, _own_stream(seed), support=support)


def thompson_bernoulli(K: int, seed) -> ThompsonBernoulli:
    return ThompsonBernoulli(K, _own_stream(seed))


def known_mu_star(K: int, seed, mu_star: float) -> KnownBestMean:
    return KnownBestMean(K, _own_stream(seed), mu_star=mu_star)
