"""Lower bounds, divergence kernels, strategies, a seeded simulator and an
exact small-horizon verifier for stochastic multi-armed bandits."""

from .backend import have_kernel
from .bounds import (
    BoundCurve,
    LargeTConstants,
    asymptotic_curve,
    bpr_known_gap,
    bpr_known_mu_star,
    build_curve,
    collective_bound,
    distribution_free_bound,
    distribution_free_opt,
    envelope,
    large_t_bound,
    small_t_absolute,
    small_t_relative,
)
from .divergences import bernoulli_kl, binary_entropy, lambert_w, quadratic_root_bound
from .exact import (
    chain_rule_residual,
    data_processing_check,
    enumerate_table,
    fundamental_slack,
)
from .models import (
    BanditProblem,
    Bernoulli,
    Binomial,
    Dirac,
    Finite,
    GammaKnownShape,
    Gaussian,
    Poisson,
    hardness_h,
    k_inf,
    k_inf_continuity_increment,
    k_max,
    kl_div,
    mean,
)
from .simulate import (
    AggregateCurve,
    RunRecord,
    empirical_definition_checks,
    monte_carlo,
    run_once,
)
from .strategies import (
    kl_ucb,
    known_mu_star,
    known_mu_star_candidates,
    make_strategy,
    thompson_bernoulli,
    ucb,
    uniform,
)

__version__ = "0.1.0"
