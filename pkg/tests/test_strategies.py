"""Strategy contract tests: the choose/update protocol, candidate sets,
randomization discipline, and the sample-level behavioural definitions
(uniform share for optimal arms, twin-arm exchangeability)."""

import pytest
from scipy.optimize import brentq

from banditlb.divergences import bernoulli_kl
from banditlb.models import BanditProblem, Bernoulli
from banditlb.simulate import monte_carlo
from banditlb.strategies import (
    ContractViolation,
    make_strategy,
    kl_ucb,
    known_mu_star,
    known_mu_star_candidates,
    thompson_bernoulli,
    ucb,
    uniform,
)
from banditlb.streams import DiscreteStream

FIG1 = BanditProblem(
    tuple(Bernoulli(p) for p in (0.05, 0.04, 0.02, 0.015, 0.01, 0.005)),
    "bernoulli",
)


def feed(strategy, rewards):
    """Drive a strategy through a fixed reward list, returning choices."""
    arms = []
    for t, r in enumerate(rewards, start=1):
        arm = strategy.choose(t)
        strategy.update(arm, r)
        arms.append(arm)
    return arms


class TestContract:
    def test_round_bookkeeping(self):
        s = uniform(3, 1)
        arm = s.choose(1)
        s.update(arm, 0.0)
        assert s.t == 1
        assert sum(s.counts) == 1

    def test_choose_wrong_round(self):
        s = uniform(3, 1)
        with pytest.raises(ContractViolation):
            s.choose(2)

    def test_double_choose(self):
        s = uniform(3, 1)
        s.choose(1)
        with pytest.raises(ContractViolation):
            s.choose(2)

    def test_update_wrong_arm(self):
        s = uniform(3, 1)
        arm = s.choose(1)
        with pytest.raises(ContractViolation):
            s.update((arm + 1) % 3, 0.0)

    def test_streaming_mean(self):
        s = ucb(2, 1)
        a1 = s.choose(1)
        s.update(a1, 0.0)
        assert s.counts[a1] == 1 and s.means[a1] == 0.0
        a2 = s.choose(2)
        s.update(a2, 1.0)
        a3 = s.choose(3)
        s.update(a3, 1.0)
        # two rewards 0 then 1 on the same arm average to 0.5
        if a3 == a1:
            assert s.means[a1] == pytest.approx(0.5)
        assert sum(s.counts) == 3


class TestInitialization:
    def test_ucb_plays_arms_in_order(self):
        s = ucb(4, 1)
        assert feed(s, [0.0, 0.0, 0.0, 0.0]) == [0, 1, 2, 3]

    def test_known_mu_star_plays_arms_in_order(self):
        s = known_mu_star(4, 1, mu_star=0.5)
        assert feed(s, [0.0, 0.0, 0.0, 0.0]) == [0, 1, 2, 3]

    def test_uniform_matches_draw_cells(self):
        # with a 4-symbol alphabet on 4 arms the symbol picks the arm
        s = make_strategy("uniform", 4, DiscreteStream((2, 0, 3, 1), 4))
        assert feed(s, [0.0] * 4) == [2, 0, 3, 1]


class TestKnownMuStarCandidates:
    def test_boundary_exclusion_at_single_pull(self):
        s = known_mu_star(2, 1, mu_star=0.5)
        feed(s, [0.5, 0.2])
        # arm 0 sits exactly at mu_star with one pull: strict inequality
        # against a zero threshold excludes it
        assert known_mu_star_candidates(s) == set()

    def test_threshold_at_hundred_pulls(self, oracle):
        s = known_mu_star(2, 1, mu_star=0.5)
        s.counts = [100, 100]
        s.means = [0.5 - 0.3, 0.5 - 0.43]
        s.t = 200
        assert known_mu_star_candidates(s) == {0}
        assert oracle["candidate_threshold_N100"] == pytest.approx(0.42919, abs=1e-4)

    def test_requires_every_arm_pulled(self):
        s = known_mu_star(3, 1, mu_star=0.5)
        with pytest.raises(ContractViolation):
            known_mu_star_candidates(s)

    def test_empty_candidates_trigger_round_robin(self):
        s = known_mu_star(3, 1, mu_star=10.0)  # unreachable best mean
        arms = feed(s, [0.0] * 9)
        # init 0,1,2 then an empty candidate set forces 0,1,2 again (twice)
        assert arms == [0, 1, 2, 0, 1, 2, 0, 1, 2]
        # no randomization consumed: every round was forced
        assert s.stream.position == 0


class TestKLUCBIndex:
    def test_quantile_matches_root_finder(self):
        from banditlb.strategies import _klucb_quantile

        for phat in (0.0, 0.1, 0.5, 0.9):
            for target in (0.05, 0.5, 2.0):
                q = _klucb_quantile(phat, target)
                if bernoulli_kl(phat, 1.0 - 1e-12) > target:
                    root = brentq(
                        lambda x: bernoulli_kl(phat, x) - target, phat, 1.0 - 1e-12,
                        xtol=1e-12,
                    )
                    assert q == pytest.approx(root, abs=1e-8)
                else:
                    assert q == pytest.approx(1.0, abs=1e-9)

    def test_kernel_quantile_matches_pure(self):
        from banditlb import backend

        if not backend.have_kernel():
            pytest.skip("compiled kernel not built")
        from banditlb._kernel import klucb_quantile_probe
        from banditlb.strategies import _klucb_quantile

        for phat in (0.0, 0.03, 0.4, 0.77, 1.0):
            for target in (0.01, 0.3, 1.7):
                assert klucb_quantile_probe(phat, target) == _klucb_quantile(
                    phat, target
                )

    def test_support_scaling(self):
        s = kl_ucb(2, 1, support=2.0)
        feed(s, [2.0, 0.0])
        arm = s.choose(3)
        assert arm == 0  # the saturated arm's index is the support bound


class TestDrawDiscipline:
    def test_uniform_one_draw_per_round(self):
        s = uniform(5, 3)
        feed(s, [0.0] * 20)
        assert s.stream.position == 20

    def test_thompson_k_draws_per_round(self):
        s = thompson_bernoulli(3, 3)
        feed(s, [0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
        assert s.stream.position == 3 * 6

    def test_ucb_draws_only_on_ties(self):
        # continuous rewards: ties have probability zero, no draws ever
        import numpy as np

        rng = np.random.default_rng(5)
        s = ucb(3, 3)
        feed(s, list(rng.normal(size=50)))
        assert s.stream.position == 0

    def test_replay_equality(self):
        rewards = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0]
        a = feed(thompson_bernoulli(2, 99), rewards)
        b = feed(thompson_bernoulli(2, 99), rewards)
        assert a == b

    def test_candidate_step_is_causal(self):
        # changing rewards after round s never changes choices up to s:
        # the candidate set reads only past observations
        base = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0]
        for s in (3, 5, 8):
            altered = base[:s] + [1.0 - r for r in base[s:]]
            a = feed(known_mu_star(3, 17, mu_star=0.5), base)
            b = feed(known_mu_star(3, 17, mu_star=0.5), altered)
            assert a[:s] == b[:s]


def _twin_problem():
    return BanditProblem((Bernoulli(0.5), Bernoulli(0.5)), "bernoulli")


class TestLabelSymmetry:
    """Twin optimal arms with equal laws: pull counts exchangeable at the
    4-standard-error level over at least 10^4 runs."""

    @pytest.mark.parametrize(
        "strategy",
        [
            "uniform",
            "ucb",
            ("kl_ucb", {"support": 1.0}),
            "thompson_bernoulli",
            ("known_mu_star", {"mu_star": 0.5}),
        ],
        ids=["uniform", "ucb", "kl_ucb", "thompson", "known_mu_star"],
    )
    def test_twin_arm_exchangeability(self, strategy):
        from banditlb.simulate import empirical_definition_checks

        checks = empirical_definition_checks(
            _twin_problem(), strategy, T=30, runs=10_000, base_seed=424242,
            checks=("symmetry",),
        )
        (sym,) = checks
        assert not sym.violated, f"|E N1 - E N2| = {sym.estimate} (z = {sym.z_score})"


class TestSmarterThanUniform:
    """Optimal arms receive at least the uniform share T/K, sample level."""

    @pytest.mark.parametrize(
        "strategy",
        [
            "ucb",
            ("kl_ucb", {"support": 1.0}),
            "thompson_bernoulli",
            ("known_mu_star", {"mu_star": 0.05}),
        ],
        ids=["ucb", "kl_ucb", "thompson", "known_mu_star"],
    )
    @pytest.mark.parametrize("T,runs", [(120, 2000), (1200, 600)])
    def test_fig1_optimal_share(self, strategy, T, runs):
        agg = monte_carlo(FIG1, strategy, T, runs, base_seed=1000 + T)
        a_star = 0
        est = agg.arm_mean_counts[a_star]
        se = agg.arm_count_stderr[a_star]
        assert est >= T / 6 - 4 * se, f"E[N*]={est} < T/K - 4se at T={T}"

    def test_uniform_equals_share_every_arm(self):
        agg = monte_carlo(FIG1, "uniform", 60, 10_000, base_seed=5)
        for a in range(6):
            est = agg.arm_mean_counts[a]
            se = agg.arm_count_stderr[a]
            assert abs(est - 10.0) <= 4 * se
