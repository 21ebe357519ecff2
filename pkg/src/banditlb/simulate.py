"""Seeded Monte Carlo bandit environment.

One run plays T rounds of the choose/sample/update protocol and records
final pull counts plus the gap-weighted pseudo-regret at a checkpoint
grid; the pseudo-regret at a checkpoint is recomputed as the dot product
of gaps with current counts, so the trajectory identity
r(T) = sum_a gap_a * N_a(T) holds exactly.

Runs are reproducible: seed s yields the two substreams of
SeedSequence(s) (rewards, strategy); Monte Carlo run i of a batch uses
seed (base_seed, i).  Aggregation is a fixed-order reduction over run
indices, independent of any execution order.
"""

import math
from dataclasses import dataclass

from .backend import KERNEL_STRATEGY_CODES, kernel, resolve_backend
from .models import BanditProblem, EXPONENTIAL_FAMILIES, ModelMismatchError
from .samplers import pack_arm, pack_problem, sample_one
from .strategies import make_strategy
from .streams import UniformStream, derive_run_entropy, split_run_streams

__all__ = [
    "RunRecord",
    "AggregateCurve",
    "DefinitionCheck",
    "SimulationError",
    "run_once",
    "monte_carlo",
    "empirical_definition_checks",
    "lowered_problem",
    "log_grid",
    "linear_grid",
]


class SimulationError(RuntimeError):
    """A run failed (sampler domain error or invalid strategy state)."""


@dataclass(frozen=True)
class RunRecord:
    """Outcome of a single simulated run."""

    counts: tuple
    checkpoints: tuple
    regret: tuple
    seed: object

    def __post_init__(self):
        assert len(self.checkpoints) == len(self.regret)


@dataclass(frozen=True)
class AggregateCurve:
    """Mean pseudo-regret with standard errors over independent runs, plus
    per-arm mean counts at the final horizon."""

    checkpoints: tuple
    mean_regret: tuple
    stderr: tuple
    runs: int
    arm_mean_counts: tuple
    arm_count_stderr: tuple

    def regret_csv_rows(self):
        """Rows under the header ``T,mean_regret,stderr,runs``."""
        for t, m, s in zip(self.checkpoints, self.mean_regret, self.stderr):
            yield (t, m, s, self.runs)

    def counts_csv_rows(self):
        """Rows under the header ``arm,mean_count,stderr``."""
        for a, (m, s) in enumerate(zip(self.arm_mean_counts, self.arm_count_stderr)):
            yield (a, m, s)


def _normalize_strategy(strategy):
    if isinstance(strategy, str):
        return strategy, {}
    sid, params = strategy
    return sid, dict(params or {})


def _normalize_checkpoints(checkpoints, T):
    if checkpoints is None:
        return (T,)
    cps = sorted(set(int(c) for c in checkpoints))
    if not cps:
        return (T,)
    if cps[0] < 1 or cps[-1] > T:
        raise ValueError(f"checkpoints must lie in [1, {T}]")
    return tuple(cps)


def log_grid(T: int, n: int) -> tuple:
    """About n log-spaced integer checkpoints from 1 to T (deduplicated)."""
    if T < 1 or n < 1:
        raise ValueError("need T >= 1 and n >= 1")
    if n == 1:
        return (T,)
    pts = {int(round(math.exp(math.log(T) * i / (n - 1)))) for i in range(n)}
    pts.add(1)
    pts.add(T)
    return tuple(sorted(p for p in pts if 1 <= p <= T))


def linear_grid(T: int, n: int) -> tuple:
    """About n evenly spaced integer checkpoints from 1 to T."""
    if T < 1 or n < 1:
        raise ValueError("need T >= 1 and n >= 1")
    if n == 1:
        return (T,)
    pts = {int(round(1 + (T - 1) * i / (n - 1))) for i in range(n)}
    return tuple(sorted(pts))


def _run_pure(nu, sid, params, T, seed, checkpoints):
    reward_bg, strat_bg = split_run_streams(seed)
    rstream = UniformStream(reward_bg)
    sstream = UniformStream(strat_bg)
    strat = make_strategy(sid, nu.num_arms, sstream, params)
    packed = [pack_arm(d) for d in nu.arms]
    gaps = nu.gaps
    K = nu.num_arms
    regret = []
    ci = 0
    ncp = len(checkpoints)
    for t in range(1, T + 1):
        arm = strat.choose(t)
        code, a, b, c, e, vals, cums = packed[arm]
        r = sample_one(code, a, b, c, e, vals, cums, rstream)
        strat.update(arm, r)
        if ci < ncp and checkpoints[ci] == t:
            acc = 0.0
            for k in range(K):
                acc += gaps[k] * strat.counts[k]
            regret.append(acc)
            ci += 1
    return tuple(strat.counts), tuple(regret)


def _run_compiled(nu, sid, params, T, seed, checkpoints):
    import numpy as np

    fam, pa, pb, pc, pe, fvals, fcums, off, gaps = pack_problem(nu)
    code = KERNEL_STRATEGY_CODES[sid]
    sp0 = 0.0
    if sid == "kl_ucb":
        sp0 = float(params.get("support", 1.0))
    elif sid == "known_mu_star":
        sp0 = float(params["mu_star"])
    elif params:
        raise ValueError(f"unexpected parameters for {sid!r}: {sorted(params)}")
    reward_bg, strat_bg = split_run_streams(seed)
    cps = np.asarray(checkpoints, dtype=np.int64)
    counts, regret, status = kernel().run(
        code, sp0, nu.num_arms, T, fam, pa, pb, pc, pe, fvals, fcums, off,
        gaps, cps, reward_bg, strat_bg,
    )
    if status == 1:
        raise SimulationError("posterior sampling saw a reward outside {0, 1}")
    if status == 2:
        raise SimulationError("empirical mean left the declared reward support")
    if status != 0:
        raise SimulationError(f"kernel failure (status {status})")
    return tuple(int(x) for x in counts), tuple(float(x) for x in regret)


def run_once(nu: BanditProblem, strategy, T: int, seed,
             checkpoints=None, backend: str | None = None) -> RunRecord:
    """Simulate one run of T rounds.

    ``strategy`` is a registered id or an (id, params) pair; ``seed`` is an
    int or tuple of ints.  Identical arguments give a bit-identical record.
    """
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    sid, params = _normalize_strategy(strategy)
    cps = _normalize_checkpoints(checkpoints, T)
    if sid == "known_mu_star" and "mu_star" not in params:
        raise ValueError("known_mu_star requires a mu_star parameter")
    chosen = resolve_backend(backend, sid)
    try:
        if chosen == "compiled":
            counts, regret = _run_compiled(nu, sid, params, T, seed, cps)
        else:
            counts, regret = _run_pure(nu, sid, params, T, seed, cps)
    except (ValueError, ArithmeticError) as exc:
        raise SimulationError(str(exc)) from exc
    return RunRecord(counts, cps, regret, seed)


def _mean_stderr(values):
    n = len(values)
    m = math.fsum(values) / n
    if n == 1:
        return m, 0.0
    var = math.fsum((v - m) ** 2 for v in values) / (n - 1)
    return m, math.sqrt(var / n)


def monte_carlo(nu: BanditProblem, strategy, T: int, runs: int, base_seed: int,
                checkpoints=None, backend: str | None = None) -> AggregateCurve:
    """Aggregate ``runs`` independent runs seeded (base_seed, i)."""
    if runs < 1:
        raise ValueError(f"need runs >= 1, got {runs}")
    cps = _normalize_checkpoints(checkpoints, T)
    records = []
    for i in range(runs):
        try:
            records.append(
                run_once(nu, strategy, T, derive_run_entropy(base_seed, i),
                         checkpoints=cps, backend=backend)
            )
        except SimulationError as exc:
            raise SimulationError(f"run {i} failed: {exc}") from exc
    mean_r = []
    se_r = []
    for j in range(len(cps)):
        m, s = _mean_stderr([rec.regret[j] for rec in records])
        mean_r.append(m)
        se_r.append(s)
    mean_c = []
    se_c = []
    for a in range(nu.num_arms):
        m, s = _mean_stderr([float(rec.counts[a]) for rec in records])
        mean_c.append(m)
        se_c.append(s)
    return AggregateCurve(cps, tuple(mean_r), tuple(se_r), runs,
                          tuple(mean_c), tuple(se_c))


@dataclass(frozen=True)
class DefinitionCheck:
    """Sample-level check of one behavioural definition: an estimate, its
    reference value, the z-score of the falsifying direction, and whether
    the violation exceeds 4 standard errors."""

    name: str
    estimate: float
    reference: float
    z_score: float
    violated: bool


def lowered_problem(nu: BanditProblem, new_mean: float) -> BanditProblem:
    """Copy of the problem with every suboptimal arm's mean lowered to
    ``new_mean`` (same family and known parameters): a problem dominated by
    nu in the easier-problem order."""
    from .models import _family_member_with_mean

    if nu.model not in EXPONENTIAL_FAMILIES:
        raise ModelMismatchError(
            "mean-lowering is defined for the exponential-family models"
        )
    if any(new_mean > nu.means[a] for a in nu.suboptimal_arms):
        raise ValueError("new mean must not exceed any suboptimal arm's mean")
    arms = list(nu.arms)
    for a in nu.suboptimal_arms:
        arms[a] = _family_member_with_mean(nu.arms[a], new_mean)
    return BanditProblem(tuple(arms), nu.model)


def _collect_counts(nu, strategy, T, runs, base_seed, backend):
    out = []
    for i in range(runs):
        rec = run_once(nu, strategy, T, derive_run_entropy(base_seed, i),
                       backend=backend)
        out.append(rec.counts)
    return out


def empirical_definition_checks(nu: BanditProblem, strategy, T: int, runs: int,
                                base_seed: int, checks=None,
                                lowered_mean: float | None = None,
                                backend: str | None = None) -> tuple:
    """Sample-level evidence for the behavioural definitions: optimal arms
    receive at least uniform share; twin optimal arms are exchangeable;
    easier problems give optimal arms at least as many pulls.  Never
    asserts the infinite-population definition, only flags deviations
    beyond 4 standard errors."""
    if checks is None:
        checks = ("smarter_than_uniform", "symmetry", "monotonicity")
    results = []
    counts = _collect_counts(nu, strategy, T, runs, base_seed, backend)
    K = nu.num_arms

    if "smarter_than_uniform" in checks:
        ref = T / K
        for a in nu.optimal_arms:
            est, se = _mean_stderr([float(c[a]) for c in counts])
            z = 0.0 if se == 0.0 else (ref - est) / se
            results.append(DefinitionCheck(
                f"smarter_than_uniform[arm {a}]", est, ref, z,
                est < ref and (se == 0.0 or z > 4.0),
            ))

    if "symmetry" in checks:
        twins = None
        opts = nu.optimal_arms
        for i in range(len(opts)):
            for j in range(i + 1, len(opts)):
                if nu.arms[opts[i]] == nu.arms[opts[j]]:
                    twins = (opts[i], opts[j])
                    break
            if twins:
                break
        if twins is None:
            raise ValueError(
                "the symmetry check needs two optimal arms with equal laws"
            )
        i, j = twins
        diffs = [float(c[i] - c[j]) for c in counts]
        est, se = _mean_stderr(diffs)
        z = 0.0 if se == 0.0 else abs(est) / se
        results.append(DefinitionCheck(
            f"pairwise_symmetry[arms {i},{j}]", est, 0.0, z,
            est != 0.0 and (se == 0.0 or z > 4.0),
        ))

    if "monotonicity" in checks:
        if lowered_mean is None:
            lowered_mean = min(nu.means)
        easier = lowered_problem(nu, lowered_mean)
        counts2 = _collect_counts(easier, strategy, T, runs, base_seed + 1, backend)
        opt_nu = [math.fsum(float(c[a]) for a in nu.optimal_arms) for c in counts]
        opt_e = [math.fsum(float(c[a]) for a in easier.optimal_arms) for c in counts2]
        m1, s1 = _mean_stderr(opt_nu)
        m2, s2 = _mean_stderr(opt_e)
        se = math.sqrt(s1 * s1 + s2 * s2)
        z = 0.0 if se == 0.0 else (m1 - m2) / se
        results.append(DefinitionCheck(
            "monotonic_optimal_pulls", m2, m1, z,
            m2 < m1 and (se == 0.0 or z > 4.0),
        ))
    return tuple(results)
