"""The two-level check point: Omega = delta = 1, tau = 1e-8, pi - nu = 1e-4, Q = 100.

N is ``ceil(1 / |phi|)`` with phi at second order, i.e. about 4e20 cycles per
round. The analytic survival of the whole campaign should be about 0.99 on
both the exact and second-order paths, and a sampled campaign should recover
``Omega / delta = 1``.
"""

from __future__ import annotations

import math

import numpy as np

from .estimator import (
    estimate_fixed_n,
    predicted_survival,
    predicted_survival_second_order,
    run_campaign,
)
from .models import TwoLevelModel, delta_h_ee, omega_bar, shift_energy_zero
from .protocol import ProtocolParams, compute_cycle_amplitudes, second_order_phi, snr, validity_margin
from .records import derive_seed

OMEGA = 1.0
DELTA = 1.0
TAU = 1e-8
PI_MINUS_NU = 1e-4
Q_ROUNDS = 100

P_ALL_RANGE = (0.985, 0.995)
ASYMPTOTE_TOL = 1e-3
RATIO_RANGE = (0.95, 1.05)
POOLED_SURVIVAL_RANGE = (0.975, 0.998)
POOLED_CAMPAIGNS = 1000


def scenario_params(seed: int = 0) -> ProtocolParams:
    nu = math.pi - PI_MINUS_NU
    n = float(math.ceil(1.0 / abs(second_order_phi(TAU, nu, OMEGA))))
    return ProtocolParams(TAU, nu, n, Q_ROUNDS, seed)


def _within(x, bounds):
    return bounds[0] <= x <= bounds[1]


def paper_check(seed: int = 0, pooled_campaigns: int = POOLED_CAMPAIGNS) -> dict:
    """Run the check point and return a JSON-ready report with pass flags."""
    model = TwoLevelModel(OMEGA, DELTA)
    shifted, _ = shift_energy_zero(model)
    dh, ob = delta_h_ee(shifted), omega_bar(shifted)
    params = scenario_params(seed)
    cycle = compute_cycle_amplitudes(shifted, params.tau, params.nu)

    exact = predicted_survival(params, cycle)
    second = predicted_survival_second_order(params, dh)
    margin = validity_margin(params.tau, params.nu, ob)

    record = run_campaign(model, params, cycle)
    est = estimate_fixed_n(record)
    ratio = est.delta_h_hat / DELTA

    # survival of whole Q-round campaigns over independent seeds
    full = 0
    ratios = []
    for k in range(pooled_campaigns):
        rec = run_campaign(model, params.with_(seed=derive_seed(seed, k)), cycle)
        full += rec.survived == rec.total
        if k < 30:
            ratios.append(estimate_fixed_n(rec).delta_h_hat / DELTA)
    pooled = full / pooled_campaigns
    mean_ratio = float(np.mean(ratios)) if ratios else math.nan

    checks = {
        "p_all_exact_in_range": _within(exact.p_all, P_ALL_RANGE),
        "p_all_second_order_in_range": _within(second.p_all, P_ALL_RANGE),
        "exact_matches_asymptote": abs(exact.p_all - exact.asymptote) <= ASYMPTOTE_TOL,
        "second_order_matches_asymptote": abs(second.p_all - second.asymptote) <= ASYMPTOTE_TOL,
        "omega_ratio_in_range": _within(ratio, RATIO_RANGE),
        "mean_omega_ratio_in_range": _within(mean_ratio, RATIO_RANGE),
        "pooled_survival_in_range": _within(pooled, POOLED_SURVIVAL_RANGE),
    }
    return {
        "scenario": {
            "omega": OMEGA,
            "delta": DELTA,
            "tau": params.tau,
            "nu": params.nu,
            "pi_minus_nu": PI_MINUS_NU,
            "q_rounds": params.q_rounds,
            "n_cycles": params.n_cycles,
            "seed": seed,
        },
        "margin": margin.margin,
        "tau_omega_bar": margin.tau_omega_bar,
        "snr": snr(params.nu),
        "p_all_exact": exact.p_all,
        "p_all_second_order": second.p_all,
        "asymptote": exact.asymptote,
        "campaign": {
            "survived_rounds": record.survived,
            "total_rounds": record.total,
            "plus": record.plus_count,
            "minus": record.minus_count,
            "n_phi_hat": est.n_phi_hat,
            "omega_over_delta": ratio,
            "ci95": [est.ci95_delta_h[0] / DELTA, est.ci95_delta_h[1] / DELTA],
        },
        "pooled": {
            "campaigns": pooled_campaigns,
            "all_rounds_survived_fraction": pooled,
            "mean_omega_over_delta_first_30": mean_ratio,
        },
        "checks": checks,
        "passed": all(checks.values()),
    }


def format_report(report: dict) -> str:
    s, c, p = report["scenario"], report["campaign"], report["pooled"]
    lines = [
        f"two-level check: Omega={s['omega']:g} delta={s['delta']:g} tau={s['tau']:g} "
        f"pi-nu={s['pi_minus_nu']:g} Q={s['q_rounds']} N={s['n_cycles']:.6g} seed={s['seed']}",
        f"validity margin |pi-nu|/sqrt(tau*Omega_bar) = {report['margin']:.6f}   SNR = {report['snr']:.6g}",
        f"P_e^NQ exact        = {report['p_all_exact']:.6f}",
        f"P_e^NQ second order = {report['p_all_second_order']:.6f}",
        f"exp(-Q/SNR)         = {report['asymptote']:.6f}",
        f"campaign: {c['survived_rounds']}/{c['total_rounds']} rounds survived, "
        f"{c['plus']} plus / {c['minus']} minus",
        f"Omega/delta = {c['omega_over_delta']:.4f}  (95% CI {c['ci95'][0]:.4f} .. {c['ci95'][1]:.4f})",
        f"pooled: {p['all_rounds_survived_fraction']:.4f} of {p['campaigns']} campaigns kept |e> throughout; "
        f"mean Omega/delta over 30 = {p['mean_omega_over_delta_first_30']:.4f}",
    ]
    for name, ok in report["checks"].items():
        lines.append(f"  [{'PASS' if ok else 'FAIL'}] {name}")
    lines.append("PASSED" if report["passed"] else "FAILED")
    return "\n".join(lines)
