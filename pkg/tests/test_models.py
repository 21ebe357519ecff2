"""Distribution families, closed-form divergences, and the bounded-support
divergence solver checked against its independent primal oracle."""

import math

import pytest

from banditlb.divergences import bernoulli_kl
from banditlb.models import (
    BanditProblem,
    Bernoulli,
    Binomial,
    Dirac,
    FamilyMismatchError,
    Finite,
    GammaKnownShape,
    Gaussian,
    ModelMismatchError,
    ParameterMismatchError,
    Poisson,
    exp_family_curvature_bound,
    hardness_h,
    k_inf,
    k_inf_continuity_increment,
    k_max,
    kl_div,
    mean,
)
from banditlb.verify import k_inf_primal_oracle

FIG1 = BanditProblem(
    tuple(Bernoulli(p) for p in (0.05, 0.04, 0.02, 0.015, 0.01, 0.005)),
    "bernoulli",
)


class TestDistributions:
    def test_means(self):
        assert mean(Bernoulli(0.05)) == 0.05
        assert mean(Dirac(0.0)) == 0.0
        assert mean(Finite((0.0, 1.0, 2.0), (0.5, 0.25, 0.25), 2.0)) == 0.75
        assert mean(Gaussian(-0.5, 1.0)) == -0.5
        assert mean(Poisson(2.0)) == 2.0
        assert mean(GammaKnownShape(1.0, 3.0)) == 3.0
        assert mean(Binomial(10, 2.5)) == 2.5

    def test_validation(self):
        with pytest.raises(ValueError):
            Bernoulli(1.2)
        with pytest.raises(ValueError):
            Gaussian(0.0, 0.0)
        with pytest.raises(ValueError):
            Poisson(-1.0)
        with pytest.raises(ValueError):
            Binomial(5, 5.0)
        with pytest.raises(ValueError):
            Finite((0.0, 0.5), (0.6, 0.5), 1.0)  # weights sum to 1.1
        with pytest.raises(ValueError):
            Finite((0.5, 0.2), (0.5, 0.5), 1.0)  # not increasing
        with pytest.raises(ValueError):
            Finite((0.0, 1.5), (0.5, 0.5), 1.0)  # point above ceiling


class TestKLDiv:
    def test_gaussian_closed_form(self, oracle):
        assert kl_div(Gaussian(-0.5, 1.0), Gaussian(0.0, 1.0)) == pytest.approx(
            oracle["gauss_kl_gap05_var1"], abs=1e-15
        )

    def test_poisson(self, oracle):
        assert kl_div(Poisson(2.0), Poisson(3.0)) == pytest.approx(
            oracle["poisson_kl_2_3"], abs=1e-6
        )

    def test_gamma(self, oracle):
        assert kl_div(GammaKnownShape(1.0, 1.0), GammaKnownShape(1.0, 2.0)) == pytest.approx(
            oracle["gamma_kl_shape1_mean1_mean2"], abs=1e-6
        )

    def test_binomial_matches_scaled_bernoulli_factor(self):
        # n = 1 binomial-style formula at means (p, q) equals kl(p, q)
        d1, d2 = Binomial(1, 0.3), Binomial(1, 0.6)
        assert kl_div(d1, d2) == pytest.approx(bernoulli_kl(0.3, 0.6), rel=1e-12)

    def test_identity_zero_and_separation(self):
        dists = [
            Bernoulli(0.3),
            Gaussian(1.0, 2.0),
            Poisson(4.0),
            GammaKnownShape(2.0, 1.5),
            Binomial(6, 2.0),
            Finite((0.0, 0.5, 1.0), (0.2, 0.3, 0.5), 1.0),
            Dirac(0.7),
        ]
        for d in dists:
            assert kl_div(d, d) <= 1e-12
        # distinct parameters within a family separate
        assert kl_div(Bernoulli(0.3), Bernoulli(0.300001)) > 1e-12
        assert kl_div(Gaussian(0.0, 1.0), Gaussian(1e-5, 1.0)) > 1e-12
        assert kl_div(Poisson(2.0), Poisson(2.001)) > 1e-12

    def test_finite_absolute_continuity(self):
        d1 = Finite((0.0, 0.5), (0.5, 0.5), 1.0)
        d2 = Finite((0.0, 0.5, 1.0), (0.25, 0.5, 0.25), 1.0)
        assert math.isfinite(kl_div(d1, d2))
        assert kl_div(d2, d1) == math.inf  # d1 misses the atom at 1
        assert kl_div(Dirac(0.5), d1) == pytest.approx(math.log(2.0), rel=1e-12)
        assert kl_div(Dirac(0.25), d1) == math.inf
        assert kl_div(Dirac(0.5), Dirac(0.5)) == 0.0
        assert kl_div(Dirac(0.5), Dirac(0.6)) == math.inf

    def test_mismatches(self):
        with pytest.raises(FamilyMismatchError):
            kl_div(Bernoulli(0.5), Gaussian(0.5, 1.0))
        with pytest.raises(ParameterMismatchError):
            kl_div(Gaussian(0.0, 1.0), Gaussian(0.0, 2.0))
        with pytest.raises(ParameterMismatchError):
            kl_div(GammaKnownShape(1.0, 1.0), GammaKnownShape(2.0, 1.0))
        with pytest.raises(ParameterMismatchError):
            kl_div(Binomial(3, 1.0), Binomial(4, 1.0))


class TestKInf:
    def test_bernoulli_reduction(self, oracle):
        assert k_inf(Bernoulli(0.04), 0.05) == pytest.approx(
            oracle["kl_04_05"], abs=1e-8
        )

    def test_zero_at_or_below_mean(self):
        for d in (Bernoulli(0.6), Gaussian(0.4, 1.0), Poisson(2.0),
                  Finite((0.0, 1.0), (0.4, 0.6), 1.0)):
            assert k_inf(d, d.mean) == 0.0
            assert k_inf(d, d.mean - 0.1) == 0.0

    def test_empty_model_above_range(self):
        assert k_inf(Bernoulli(0.3), 1.0) == math.inf
        assert k_inf(Bernoulli(0.3), 1.5) == math.inf
        assert k_inf(Binomial(4, 2.0), 4.0) == math.inf
        assert k_inf(Dirac(0.5), 0.6) == math.inf
        assert k_inf(Dirac(0.5), 0.4) == 0.0
        f = Finite((0.0, 0.5), (0.5, 0.5), 1.0)
        assert k_inf(f, 1.0) == math.inf

    def test_gaussian_any_target(self):
        assert k_inf(Gaussian(0.0, 1.0), 2.0) == pytest.approx(2.0, rel=1e-12)

    def test_bounded_two_point_example(self, oracle):
        d = Finite((0.0, 0.5), (0.5, 0.5), 1.0)
        assert k_inf(d, 0.6) == pytest.approx(
            oracle["kinf_finite_0_05_M1_x06_bruteforce"], abs=1e-4
        )

    def test_bounded_matches_bernoulli_on_01_support(self):
        for p in (0.1, 0.3, 0.5, 0.8):
            d = Finite((0.0, 1.0), (1.0 - p, p), 1.0)
            for x in (p + 0.05, p + 0.2, 0.9, 0.99):
                if not (p < x < 1.0):
                    continue
                assert k_inf(d, x) == pytest.approx(bernoulli_kl(p, x), abs=1e-6)

    def test_bounded_monotone_in_target(self):
        d = Finite((0.1, 0.4, 0.9), (0.5, 0.3, 0.2), 1.0)
        xs = [d.mean + i * (1.0 - d.mean) / 40 for i in range(40)]
        vals = [k_inf(d, x) for x in xs]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_exp_family_monotone_and_zero_left(self):
        d = Poisson(2.0)
        xs = [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 8.0]
        vals = [k_inf(d, x) for x in xs]
        assert vals[0] == vals[1] == vals[2] == 0.0
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_pinsker_transfer_for_bernoulli(self):
        for p in (0.05, 0.2, 0.45):
            for x in (p + 0.01, p + 0.1, p + 0.3):
                if x >= 1.0:
                    continue
                assert k_inf(Bernoulli(p), x) >= 2.0 * (x - p) ** 2 - 1e-12

    def test_dual_vs_primal_oracle_spot(self):
        d = Finite((0.0, 0.3, 0.75), (0.3, 0.45, 0.25), 1.0)
        x = 0.55
        assert k_inf(d, x) == pytest.approx(k_inf_primal_oracle(d, x), abs=1e-4)

    def test_model_mismatch(self):
        with pytest.raises(ModelMismatchError):
            k_inf(Bernoulli(0.4), 0.5, model="poisson")
        with pytest.raises(ModelMismatchError):
            k_inf(Dirac(0.5), 0.6, model="bounded")


class TestContinuityIncrement:
    def test_bounded_formula(self):
        d = Finite((0.0, 0.5), (0.5, 0.5), 1.0)
        assert k_inf_continuity_increment(d, 0.5, 0.1) == pytest.approx(0.8, rel=1e-12)

    def test_curvature_constants(self):
        assert exp_family_curvature_bound(Gaussian(0.0, 1.0), 0.3) == 1.0
        assert exp_family_curvature_bound(Poisson(1.0), 2.0) == 0.5
        assert exp_family_curvature_bound(GammaKnownShape(2.0, 1.0), 2.0) == 0.5
        assert exp_family_curvature_bound(Binomial(10, 3.0), 5.0) == pytest.approx(
            2 * 10 / (5.0 * 5.0)
        )

    def test_eps_validity(self):
        d = Finite((0.0, 0.5), (0.5, 0.5), 1.0)
        with pytest.raises(ValueError):
            k_inf_continuity_increment(d, 0.5, 0.2)  # (M-mu)/4 = 0.125
        with pytest.raises(ValueError):
            k_inf_continuity_increment(Gaussian(0.0, 1.0), 0.5, 1.5)  # B = 1

    def test_bounded_continuity_vs_dual_solver(self):
        # the analytic increment dominates the solver's actual increment
        supports = [
            Finite((0.0, 0.5), (0.5, 0.5), 1.0),
            Finite((0.1, 0.4, 0.9), (0.5, 0.3, 0.2), 1.0),
            Finite((0.0, 0.25, 0.5, 1.0), (0.4, 0.3, 0.2, 0.1), 1.0),
        ]
        for d in supports:
            mu = d.mean
            for frac in (0.2, 0.5):
                mu_star = mu + (d.ceiling - mu) * frac
                eps = (d.ceiling - mu_star) / 8.0
                lhs = k_inf(d, mu_star + eps)
                rhs = k_inf(d, mu_star) + k_inf_continuity_increment(d, mu_star, eps)
                assert lhs <= rhs + 1e-6


class TestProblemSummaries:
    def test_derived_sets(self):
        assert FIG1.mu_star == 0.05
        assert FIG1.optimal_arms == (0,)
        assert FIG1.worst_arms == (5,)
        assert FIG1.suboptimal_arms == (1, 2, 3, 4, 5)
        assert FIG1.gaps[1] == pytest.approx(0.01)

    def test_hardness(self, oracle):
        assert hardness_h(FIG1) == pytest.approx(oracle["fig1_hardness"], abs=0.01)
        same = BanditProblem((Bernoulli(0.4), Bernoulli(0.4)), "bernoulli")
        assert hardness_h(same) == 0.0
        two = BanditProblem((Bernoulli(0.5), Bernoulli(0.4)), "bernoulli")
        assert hardness_h(two) == pytest.approx(100.0)

    def test_k_max(self, oracle):
        assert k_max(FIG1) == pytest.approx(oracle["fig1_kmax"], abs=1e-6)
        same = BanditProblem((Bernoulli(0.4), Bernoulli(0.4)), "bernoulli")
        assert k_max(same) == 0.0
        gauss = BanditProblem((Gaussian(0.0, 1.0), Gaussian(-0.5, 1.0)), "gaussian")
        assert k_max(gauss) == pytest.approx(0.125)

    def test_k_max_tie_handling(self):
        # two worst arms: the minimum over both is kept
        nu = BanditProblem(
            (Bernoulli(0.5), Bernoulli(0.1), Bernoulli(0.1)), "bernoulli"
        )
        assert k_max(nu) == pytest.approx(bernoulli_kl(0.1, 0.5), rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            BanditProblem((Bernoulli(0.5),), "bernoulli")
        with pytest.raises(ModelMismatchError):
            BanditProblem((Bernoulli(0.5), Gaussian(0.0, 1.0)), "bernoulli")
        with pytest.raises(ModelMismatchError):
            BanditProblem(
                (Finite((0.0,), (1.0,), 1.0), Finite((0.0,), (1.0,), 2.0)), "bounded"
            )
