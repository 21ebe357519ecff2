"""Numerical verification batteries and the independent oracle used to
cross-check the bounded-support divergence solver.

Each battery returns a list of ReportRow; a row is a single named check
with the measured value, the threshold it is held to, and the verdict.
The batteries are what the command-line ``verify`` front-end runs, and the
test suite calls them directly.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import divergences
from .divergences import binary_entropy, lambert_w
from .models import Bernoulli, Finite, k_inf, k_inf_continuity_increment

__all__ = [
    "ReportRow",
    "k_inf_primal_oracle",
    "divergence_grid_battery",
    "chain_rule_battery",
    "data_processing_battery",
    "k_inf_battery",
    "full_battery",
]


@dataclass(frozen=True)
class ReportRow:
    instance_id: str
    check: str
    value: float
    threshold: float
    passed: bool


def _row_le(instance_id, check, value, threshold):
    return ReportRow(instance_id, check, value, threshold, bool(value <= threshold))


def _row_ge(instance_id, check, value, threshold):
    return ReportRow(instance_id, check, value, threshold, bool(value >= threshold))


# ---------------------------------------------------------------------------
# independent primal oracle for the bounded-support K_inf
# ---------------------------------------------------------------------------

def k_inf_primal_oracle(d: Finite, x: float) -> float:
    """Brute-force primal value of the smallest KL from d to a distribution
    on [0, ceiling] with mean >= x.

    Any candidate's mass placed off support(d) never enters the KL sum and
    only helps through its mean contribution, so moving all of it to the
    ceiling dominates; the candidate class (weights on support(d), plus one
    atom at the ceiling) is therefore fully general.  That finite convex
    program is solved by SLSQP from several starts -- a route entirely
    disjoint from the golden-section dual it is used to check.
    """
    M = d.ceiling
    if x >= M:
        return math.inf
    if d.mean >= x:
        return 0.0
    pts = np.array(d.points + (M,)) if d.points[-1] != M else np.array(d.points)
    has_extra = d.points[-1] != M
    w = np.array(d.weights)
    s = len(d.points)
    dim = s + (1 if has_extra else 0)

    def objective(v):
        vw = np.maximum(v[:s], 1e-300)
        return float(np.sum(w * np.log(w / vw)))

    def grad(v):
        g = np.zeros(dim)
        g[:s] = -w / np.maximum(v[:s], 1e-300)
        return g

    constraints = [
        {"type": "eq", "fun": lambda v: np.sum(v) - 1.0},
        {"type": "ineq", "fun": lambda v: float(np.dot(v, pts)) - x},
    ]
    bounds = [(1e-12, 1.0)] * dim

    starts = []
    base = np.full(dim, 1.0 / dim)
    starts.append(base)
    tilted = np.concatenate([w * 0.5, [0.5]]) if has_extra else w.copy()
    tilted /= tilted.sum()
    starts.append(tilted)
    heavy_top = np.full(dim, 0.1 / max(dim - 1, 1))
    heavy_top[-1] = 0.9
    starts.append(heavy_top)

    best = math.inf
    for v0 in starts:
        with warnings.catch_warnings():
            # SLSQP emits a harmless clipping warning when an iterate
            # brushes the simplex boundary
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(
                objective,
                v0,
                jac=grad,
                method="SLSQP",
                bounds=bounds,
                constraints=constraints,
                options={"maxiter": 500, "ftol": 1e-14},
            )
        if res.success or res.fun is not None:
            v = np.asarray(res.x)
            feasible = (
                abs(v.sum() - 1.0) <= 1e-8 and float(np.dot(v, pts)) >= x - 1e-9
            )
            if feasible:
                best = min(best, objective(v))
    return max(best, 0.0)


# ---------------------------------------------------------------------------
# divergence inequality grids
# ---------------------------------------------------------------------------

def divergence_grid_battery(quick: bool = False, kl=None) -> list:
    """All scalar-kernel inequality grids.  ``kl`` may be overridden to run
    the battery against a deliberately broken kernel (negative control)."""
    if kl is None:
        kl = divergences.bernoulli_kl
    n = 100 if quick else 200
    grid = [i / n for i in range(n + 1)]
    rows = []

    worst = math.inf
    for p in grid:
        for q in grid:
            worst = min(worst, kl(p, q) - 2.0 * (p - q) ** 2)
    rows.append(_row_ge("grid", "pinsker_classical", worst, -1e-12))

    worst_peak = math.inf
    worst_q = math.inf
    for p in grid:
        for q in grid:
            if not (p < q < 1.0):
                continue
            d = kl(p, q)
            peak = 0.25 if p <= 0.5 <= q else max(p * (1 - p), q * (1 - q))
            worst_peak = min(worst_peak, d - (p - q) ** 2 / (2 * peak))
            worst_q = min(worst_q, d - (p - q) ** 2 / (2 * q))
    rows.append(_row_ge("grid", "pinsker_local_peak", worst_peak, -1e-12))
    rows.append(_row_ge("grid", "pinsker_local_q", worst_q, -1e-12))

    worst = math.inf
    ln2 = math.log(2.0)
    for p in grid:
        for q in grid:
            if not (0.0 < q < 1.0):
                continue
            linear = p * math.log(1 / q) + (1 - p) * math.log(1 / (1 - q))
            worst = min(worst, kl(p, q) - (linear - ln2))
    rows.append(_row_ge("grid", "kl_linear_minus_ln2", worst, -1e-12))

    m = 500 if quick else 1000
    worst = math.inf
    for i in range(1, m + 1):
        xx = 0.5 * i / m
        worst = min(worst, xx * math.log(4.0 / xx) - binary_entropy(xx))
    rows.append(_row_ge("grid", "entropy_x_ln_4_over_x", worst, -1e-12))

    worst = math.inf
    for i in range(1, m):
        xx = i / m
        lhs = (1.0 - 2.0 * xx) * math.log((1.0 - xx) / xx)
        worst = min(worst, lhs - math.log(1.0 / (2.4 * xx)))
    rows.append(_row_ge("grid", "function_study_2_4", worst, -1e-12))

    lo_slack = math.inf
    hi_slack = math.inf
    resid = 0.0
    u = math.e
    while u <= 1e12:
        v = lambert_w(u)
        hi_slack = min(hi_slack, math.log(u) - v)
        lo_slack = min(lo_slack, v - (math.log(u) - math.log(math.log(u))))
        resid = max(resid, abs(v * math.exp(v) - u) / max(1.0, u))
        u *= 1.35 if not quick else 2.9
    rows.append(_row_ge("grid", "lambert_upper_ln", hi_slack, -1e-12))
    rows.append(_row_ge("grid", "lambert_lower_ln_lnln", lo_slack, -1e-12))
    rows.append(_row_le("grid", "lambert_residual", resid, 1e-12))

    worst = math.inf
    for p in (0.0, 0.15, 0.5, 0.85, 1.0):
        below = [kl(p, q) for q in grid if q <= p]
        above = [kl(p, q) for q in grid if q >= p]
        for a, b in zip(below, below[1:]):
            worst = min(worst, a - b)
        for a, b in zip(above, above[1:]):
            worst = min(worst, b - a)
    rows.append(_row_ge("grid", "kl_monotone_around_p", worst, -1e-12))
    return rows


# ---------------------------------------------------------------------------
# exact-enumeration battery: chain-rule equality and the fundamental
# inequality on micro instances
# ---------------------------------------------------------------------------

def _battery_instances(quick: bool):
    # (instance_id, K, nu_params, nu_prime_params, strategy_id, params, R, T)
    from itertools import product

    pairs2 = [
        ((0.3, 0.5), (0.3, 0.7)),
        ((0.3, 0.5), (0.6, 0.5)),
        ((0.4, 0.6), (0.4, 0.6)),
        ((0.05, 0.95), (0.5, 0.5)),
    ]
    pairs3 = [
        ((0.3, 0.5, 0.7), (0.3, 0.5, 0.2)),
        ((0.2, 0.5, 0.5), (0.8, 0.5, 0.5)),
        ((0.1, 0.45, 0.9), (0.1, 0.45, 0.9)),
    ]
    det2 = [("constant", {"arm": 0}), ("round_robin", {}), ("greedy", {})]
    rnd2 = [("uniform", {}), ("coin_mix", {}), ("ucb", {}),
            ("known_mu_star", {"mu_star": 0.55})]
    det3 = [("constant", {"arm": 1}), ("round_robin", {}), ("greedy", {})]
    rnd3 = [("coin_mix", {})]

    ts_det = (1, 2, 3, 5, 8) if not quick else (1, 3, 5)
    ts_rnd = (1, 2, 4, 6) if not quick else (1, 3)

    instances = []
    for (nu, nup), (sid, sp) in product(pairs2, det2):
        for t in ts_det:
            instances.append((2, nu, nup, sid, sp, 1, t))
    for (nu, nup), (sid, sp) in product(pairs2, rnd2):
        for t in ts_rnd:
            instances.append((2, nu, nup, sid, sp, 2, t))
    for (nu, nup), (sid, sp) in product(pairs3, det3):
        for t in ts_det:
            instances.append((3, nu, nup, sid, sp, 1, t))
    for (nu, nup), (sid, sp) in product(pairs3, rnd3):
        for t in ts_rnd:
            instances.append((3, nu, nup, sid, sp, 2, t))
    # a couple of deeper randomized horizons
    if not quick:
        instances.append((2, *pairs2[0], "uniform", {}, 2, 8))
        instances.append((2, *pairs2[1], "coin_mix", {}, 2, 8))
    return instances


def chain_rule_battery(quick: bool = False) -> list:
    from .exact import all_z_ids, chain_rule_residual, enumerate_table, fundamental_slack
    from .models import BanditProblem

    rows = []
    worst_resid = 0.0
    worst_slack = math.inf
    count = 0
    for K, nu_p, nup_p, sid, sp, R, T in _battery_instances(quick):
        nu = BanditProblem(tuple(Bernoulli(p) for p in nu_p), "bernoulli")
        nup = BanditProblem(tuple(Bernoulli(p) for p in nup_p), "bernoulli")
        table = enumerate_table(nu, nup, (sid, sp), T, rand_alphabet_size=R)
        inst = f"K{K}-{sid}-T{T}-R{R}-{nu_p}-{nup_p}"
        resid = chain_rule_residual(table, nu, nup)
        worst_resid = max(worst_resid, resid)
        rows.append(_row_le(inst, "chain_rule_residual", resid, 1e-10))
        inst_slack = math.inf
        for z_id in all_z_ids(nu):
            slack = fundamental_slack(table, nu, nup, z_id)
            inst_slack = min(inst_slack, slack)
        worst_slack = min(worst_slack, inst_slack)
        rows.append(_row_ge(inst, "fundamental_slack_min", inst_slack, -1e-10))
        count += 1
    rows.append(_row_ge("battery", "instance_count", float(count), 100.0 if not quick else 1.0))
    rows.append(_row_le("battery", "chain_rule_residual_max", worst_resid, 1e-10))
    rows.append(_row_ge("battery", "fundamental_slack_min", worst_slack, -1e-10))
    return rows


def data_processing_battery(quick: bool = False, seed: int = 977) -> list:
    from .exact import data_processing_check

    rng = np.random.default_rng(seed)
    n_triples = 1000 if quick else 10_000
    worst = math.inf
    for _ in range(n_triples):
        m = int(rng.integers(2, 65))
        p1 = rng.exponential(size=m) + 1e-12
        p1 /= p1.sum()
        p2 = rng.exponential(size=m) + 1e-12
        p2 /= p2.sum()
        kind = rng.integers(0, 3)
        if kind == 0:
            z = rng.random(m)
        elif kind == 1:
            z = (rng.random(m) < 0.5).astype(float)  # indicator statistic
        else:
            z = rng.random(m)
            p2 = p1.copy()
        worst = min(worst, data_processing_check(p1, p2, z))
    return [_row_ge("battery", "data_processing_slack_min", worst, -1e-12)]


def k_inf_battery(quick: bool = False, seed: int = 1311) -> list:
    rows = []
    rng = np.random.default_rng(seed)

    # (a) exponential-family reduction against the Bernoulli closed form
    worst = 0.0
    pairs = 0
    for p in [0.02 + 0.96 * i / 9 for i in range(10)]:
        for dx in [0.01, 0.05, 0.1, 0.2, 0.5]:
            x = p + dx * (1.0 - p)
            worst = max(worst, abs(k_inf(Bernoulli(p), x) - divergences.bernoulli_kl(p, x)))
            pairs += 1
    assert pairs >= 50
    rows.append(_row_le("battery", "k_inf_bernoulli_reduction", worst, 1e-10))

    # (b) bounded-support dual against the brute-force primal oracle
    n_supports = 8 if quick else 20
    worst = 0.0
    worst_cont = math.inf
    for i in range(n_supports):
        size = int(rng.integers(2, 5))
        M = float(rng.choice([1.0, 2.0]))
        pts = np.sort(rng.random(size)) * M
        pts[0] *= 0.5
        if rng.random() < 0.5:
            pts[-1] = M  # exercise an atom at the ceiling
        w = rng.exponential(size=size) + 0.05
        w /= w.sum()
        w = np.round(w, 9)
        w[-1] = 1.0 - w[:-1].sum()
        d = Finite(tuple(round(float(x), 9) for x in pts), tuple(float(x) for x in w), M)
        mu = d.mean
        x = mu + (M - mu) * float(rng.uniform(0.1, 0.9))
        dual = k_inf(d, x)
        oracle = k_inf_primal_oracle(d, x)
        worst = max(worst, abs(dual - oracle))

        # (c) continuity of the dual in the target, Lemma-level bound
        mu_star = mu + (M - mu) * 0.3
        eps = (M - mu_star) / 8.0
        lhs = k_inf(d, mu_star + eps)
        rhs = k_inf(d, mu_star) + k_inf_continuity_increment(d, mu_star, eps)
        worst_cont = min(worst_cont, rhs - lhs)
    rows.append(_row_le("battery", "k_inf_dual_vs_primal_oracle", worst, 1e-4))
    rows.append(_row_ge("battery", "k_inf_continuity_bound", worst_cont, -1e-6))
    return rows


def faulty_bernoulli_kl(p: float, q: float) -> float:
    """Negative control for the verifier: the divergence with the sign of
    its second term flipped.  Running the grid battery against this kernel
    must fail the Pinsker rows; it exists only to prove the battery can
    catch a broken kernel."""
    if p == q:
        return 0.0
    if q == 0.0 or q == 1.0:
        return math.inf
    acc = 0.0
    if p > 0.0:
        acc += p * math.log(p / q)
    if p < 1.0:
        acc -= (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return acc


FAULT_MODES = ("kl-sign",)


def full_battery(quick: bool = False, fault: str | None = None) -> list:
    """Every battery; ``fault`` names an injected defect (negative control)."""
    kl = None
    if fault is not None:
        if fault not in FAULT_MODES:
            raise ValueError(f"unknown fault mode {fault!r} (choose from {FAULT_MODES})")
        kl = faulty_bernoulli_kl
    rows = []
    rows += divergence_grid_battery(quick=quick, kl=kl)
    rows += chain_rule_battery(quick=quick)
    rows += data_processing_battery(quick=quick)
    rows += k_inf_battery(quick=quick)
    return rows
