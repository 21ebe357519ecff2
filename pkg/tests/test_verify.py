"""Battery-level contracts of the verification module."""

import pytest

from banditlb.models import Finite
from banditlb.verify import (
    divergence_grid_battery,
    faulty_bernoulli_kl,
    full_battery,
    k_inf_battery,
    k_inf_primal_oracle,
)


def test_grid_battery_passes():
    rows = divergence_grid_battery()
    assert rows and all(r.passed for r in rows)


def test_faulty_kernel_fails_pinsker_rows():
    rows = divergence_grid_battery(quick=True, kl=faulty_bernoulli_kl)
    failing = {r.check for r in rows if not r.passed}
    assert any("pinsker" in c for c in failing)


def test_k_inf_battery_counts(oracle):
    rows = k_inf_battery()
    by_check = {r.check: r for r in rows}
    assert by_check["k_inf_bernoulli_reduction"].passed
    assert by_check["k_inf_dual_vs_primal_oracle"].passed
    assert by_check["k_inf_continuity_bound"].passed


def test_primal_oracle_matches_frozen_bruteforce(oracle):
    d = Finite((0.0, 0.5), (0.5, 0.5), 1.0)
    assert k_inf_primal_oracle(d, 0.6) == pytest.approx(
        oracle["kinf_finite_0_05_M1_x06_bruteforce"], abs=1e-5
    )


def test_unknown_fault_mode_rejected():
    with pytest.raises(ValueError):
        full_battery(fault="cosmic-rays")
