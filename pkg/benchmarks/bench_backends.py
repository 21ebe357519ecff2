#!/usr/bin/env python3
"""Benchmark the compiled simulation kernel against the pure-Python
reference loop, and verify they agree bit-for-bit on every timed case.

Usage: python benchmarks/bench_backends.py [--runs N] [--horizon T]
"""

import argparse
import time

from banditlb.backend import have_kernel
from banditlb.models import BanditProblem, Bernoulli, Gaussian
from banditlb.simulate import run_once


def bench(nu, strategy, T, runs, backend):
    t0 = time.perf_counter()
    last = None
    for i in range(runs):
        last = run_once(nu, strategy, T, (1234, i), backend=backend)
    return time.perf_counter() - t0, last


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=20)
    parser.add_argument("--horizon", type=int, default=5000)
    args = parser.parse_args()

    if not have_kernel():
        raise SystemExit("compiled kernel not built; nothing to compare")

    fig1 = BanditProblem(
        tuple(Bernoulli(p) for p in (0.05, 0.04, 0.02, 0.015, 0.01, 0.005)),
        "bernoulli",
    )
    gauss = BanditProblem((Gaussian(0.0, 1.0), Gaussian(-0.5, 1.0)), "gaussian")

    cases = [
        ("thompson / 6-arm coins", fig1, "thompson_bernoulli"),
        ("kl_ucb / 6-arm coins", fig1, ("kl_ucb", {"support": 1.0})),
        ("ucb / 6-arm coins", fig1, "ucb"),
        ("uniform / 6-arm coins", fig1, "uniform"),
        ("known_mu_star / 2-arm gaussian", gauss, ("known_mu_star", {"mu_star": 0.0})),
    ]

    T, runs = args.horizon, args.runs
    print(f"{runs} runs x {T} rounds per case\n")
    print(f"{'case':32s} {'compiled':>10s} {'pure':>10s} {'speedup':>8s}  identical")
    for name, nu, strategy in cases:
        t_c, rec_c = bench(nu, strategy, T, runs, "compiled")
        t_p, rec_p = bench(nu, strategy, T, runs, "pure")
        same = rec_c.counts == rec_p.counts and rec_c.regret == rec_p.regret
        print(f"{name:32s} {t_c:9.3f}s {t_p:9.3f}s {t_p / t_c:7.1f}x  {same}")
        if not same:
            raise SystemExit(f"backend mismatch on {name}")


if __name__ == "__main__":
    main()
