"""Acceptance criteria, one test each, with a PASS/FAIL line in the summary.

Each test records its outcome through the ``criterion`` fixture before
asserting, so a failing criterion still shows up with its numbers.
"""

import math
import time

import mpmath as mp
import numpy as np
import pytest
import scipy.linalg

from oracles import random_hermitian, two_level_cycle
from zenoprobe.estimator import (
    estimate_adaptive,
    estimate_fixed_n,
    predicted_survival,
    predicted_survival_second_order,
    run_campaign,
)
from zenoprobe.models import ContinuumModel, GenericModel, TwoLevelModel, build_generic, delta_h_ee, omega_bar
from zenoprobe.paper_check import scenario_params
from zenoprobe.protocol import (
    ProtocolParams,
    compute_cycle_amplitudes,
    exact_survival_one_cycle,
    run_full_composite,
    run_postselected,
    second_order_pe,
    second_order_phi,
    validity_margin,
    variance_identity_residual,
)
from zenoprobe.records import derive_seed
from zenoprobe.scan import default_config, run_scan

pytestmark = pytest.mark.acceptance

CHECK_MODEL = TwoLevelModel(1.0, 1.0)


def test_c1_analytic_survival(criterion):
    start = time.perf_counter()
    params = scenario_params()
    exact = predicted_survival(params, compute_cycle_amplitudes(CHECK_MODEL, params.tau, params.nu))
    second = predicted_survival_second_order(params, 1.0)
    elapsed = time.perf_counter() - start
    ok = (
        0.985 <= exact.p_all <= 0.995
        and 0.985 <= second.p_all <= 0.995
        and abs(exact.p_all - exact.asymptote) <= 1e-3
        and abs(second.p_all - second.asymptote) <= 1e-3
        and elapsed < 1.0
    )
    criterion("C1 analytic survival", ok,
              f"exact={exact.p_all:.6f} second={second.p_all:.6f} asym={exact.asymptote:.6f} t={elapsed:.2f}s")
    assert ok


def test_c2_sampled_check_point(criterion):
    start = time.perf_counter()
    base = scenario_params()
    cycle = compute_cycle_amplitudes(CHECK_MODEL, base.tau, base.nu)
    ratios, full = [], 0
    campaigns = 1000
    for k in range(campaigns):
        rec = run_campaign(CHECK_MODEL, base.with_(seed=derive_seed(0, k)), cycle)
        full += rec.survived == rec.total
        if k < 30:
            ratios.append(estimate_fixed_n(rec).delta_h_hat / 1.0)
    elapsed = time.perf_counter() - start
    mean_ratio = float(np.mean(ratios))
    pooled = full / campaigns
    ok = 0.95 <= mean_ratio <= 1.05 and 0.975 <= pooled <= 0.998 and elapsed < 10
    criterion("C2 sampled check point", ok,
              f"mean Omega/delta={mean_ratio:.4f} (30 seeds) pooled campaign survival={pooled:.4f} "
              f"({campaigns} campaigns) t={elapsed:.2f}s")
    assert ok


def test_c3_variance_identity(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for k in range(100):
        d = (2, 4, 8, 16)[k % 4]
        tau = 10 ** rng.uniform(-3, 0)
        worst = max(worst, variance_identity_residual(GenericModel(random_hermitian(rng, d)), tau))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-11 and elapsed < 5
    criterion("C3 variance identity", ok, f"max residual={worst:.2e} t={elapsed:.2f}s")
    assert ok


def test_c4_oracle_equivalence(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_amp = worst_log = 0.0
    for d in (2, 4, 8):
        model = GenericModel(random_hermitian(rng, d))
        for tau in (1e-3, 1e-2, 0.1, 1.0):
            for nu in (math.pi / 4, math.pi / 2, 3 * math.pi / 4):
                cycle = compute_cycle_amplitudes(model, tau, nu)
                for n in (1, 37, 1000):
                    params = ProtocolParams(tau, nu, n)
                    fast = run_postselected(cycle, params)
                    ref, _ = run_full_composite(model, params)
                    worst_amp = max(worst_amp, float(np.max(np.abs(fast.ancilla_state - ref.ancilla_state))))
                    worst_log = max(worst_log, abs(fast.log_survival - ref.log_survival))
    elapsed = time.perf_counter() - start
    ok = worst_amp <= 1e-9 and worst_log <= 1e-9 and elapsed < 30
    criterion("C4 oracle equivalence", ok,
              f"max |amp diff|={worst_amp:.2e} max |log-survival diff|={worst_log:.2e} t={elapsed:.2f}s")
    assert ok


def _c5_models(rng):
    models = [build_generic(CHECK_MODEL), build_generic(ContinuumModel([0.3, -0.2, 0.5], [0.4, 0.7j, -0.2]))]
    models += [GenericModel(random_hermitian(rng, d)) for d in (2, 4, 8)]
    return models


def test_c5_second_order_validity(criterion):
    rng = np.random.default_rng(5)
    checked = violations = 0
    worst_phi = worst_pe = 0.0
    for model in _c5_models(rng):
        dh, ob = delta_h_ee(model), omega_bar(model)
        for t_ob in np.logspace(-9, -3, 13):
            tau = t_ob / ob
            for gap in np.logspace(-4, math.log10(math.pi - 0.1), 12):
                nu = math.pi - gap
                if validity_margin(tau, nu, ob).margin < 10:
                    continue
                cycle = compute_cycle_amplitudes(model, tau, nu)
                phi = run_postselected(cycle, ProtocolParams(tau, nu)).phi_exact_per_cycle
                _, deficit = exact_survival_one_cycle(cycle)
                phi2, pe2 = second_order_phi(tau, nu, dh), second_order_pe(tau, nu, dh)
                r_phi = abs(phi - phi2) / abs(phi2) / (10 * t_ob / math.sin(nu))
                r_pe = abs(deficit - pe2) / pe2 / (10 * t_ob / (1 + math.cos(nu)))
                worst_phi, worst_pe = max(worst_phi, r_phi), max(worst_pe, r_pe)
                violations += r_phi > 1 or r_pe > 1
                checked += 1

    cells = run_scan(default_config())
    outside = [c for c in cells if c.margin < 1]
    broken = max(c.abs_diff for c in outside)
    ok = checked > 0 and violations == 0 and broken > 0.01
    criterion("C5 second-order validity", ok,
              f"{checked} points, worst error/bound phi={worst_phi:.2e} deficit={worst_pe:.2e}; "
              f"max |dp_all| with margin<1 = {broken:.3f}")
    assert ok


def test_c6_continuum_recovery(criterion):
    hits, estimates = 0, []
    for seed in range(30):
        omegas = np.random.default_rng([6, seed]).uniform(-5, 5, 2)
        res = estimate_adaptive(ContinuumModel(omegas, [3, 4]), 1e-2, math.pi / 2, 400, seed=seed)
        estimates.append(res.delta_h_hat)
        hits += abs(res.delta_h_hat - 5.0) <= 0.5
    ok = hits >= 27
    criterion("C6 continuum recovery", ok,
              f"{hits}/30 within 10% of 5 (range {min(estimates):.3f}..{max(estimates):.3f})")
    assert ok


def _naive_deficit(tau, nu):
    k = scipy.linalg.expm(-0.5j * tau * np.array([[0, 1], [1, 1]], dtype=complex))
    k_ee, dk = k[0, 0], k[0, 1] * k[1, 0]
    lam = [k_ee**2 + np.exp(s * 1j * nu) * dk for s in (1, -1)]
    return 1.0 - 0.5 * (abs(lam[0]) ** 2 + abs(lam[1]) ** 2)


def test_c7_numerical_stability(criterion):
    params = scenario_params()
    with mp.workdps(60):
        ref = float(two_level_cycle(1, 1, params.tau, mp.pi - mp.mpf("1e-4"))["deficit"])
    _, deficit = exact_survival_one_cycle(compute_cycle_amplitudes(CHECK_MODEL, params.tau, params.nu))
    naive = _naive_deficit(params.tau, params.nu)
    rel = abs(deficit - ref) / ref
    naive_rel = abs(naive - ref) / ref
    ok = rel <= 0.01 and naive_rel > 0.01
    criterion("C7 numerical stability", ok,
              f"oracle={ref:.6e} increments={deficit:.6e} (rel {rel:.1e}); "
              f"naive 1-|lambda|^2={naive:.3e} (rel {naive_rel:.1e}, negative control)")
    assert ok
