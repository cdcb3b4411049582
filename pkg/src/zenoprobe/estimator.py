"""Measurement campaigns and inversion of readout statistics.

A campaign is Q independent rounds. Each round runs N post-selected cycles on
a fresh equal-superposition ancilla, survives with probability
``exp(log_survival)``, and (if it survives) reads the ancilla out in the
``(|+> +- |->)/sqrt(2)`` basis, which gives ``minus`` with probability
``sin^2(N phi)``.

Only ``|N phi|`` is observable; the sign of phi is negative for every nu in
(0, pi) and is supplied by theory, so estimates are magnitudes.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DegenerateInversionError, GuardExceededError, NoSurvivorsError
from .models import AnyModel, ContinuumModel, GenericModel, TwoLevelModel, omega_bar, shift_energy_zero
from .protocol import (
    CycleAmplitudes,
    ProtocolParams,
    compute_cycle_amplitudes,
    readout_probabilities,
    run_postselected,
    second_order_pe,
    second_order_phi,
    snr,
)
from .records import MINUS, PLUS, MeasurementRecord, RoundResult, derive_seed, round_rng

__all__ = [
    "EstimationResult",
    "MeasurementRecord",
    "N_MAX",
    "SurvivalPrediction",
    "choose_n",
    "estimate_adaptive",
    "estimate_fixed_n",
    "model_type",
    "predicted_survival",
    "predicted_survival_second_order",
    "run_campaign",
    "wilson_interval",
]

N_MAX = 1e30
Z95 = 1.959963984540054


def model_type(model: AnyModel) -> str:
    if isinstance(model, TwoLevelModel):
        return "two_level"
    if isinstance(model, ContinuumModel):
        return "continuum"
    if isinstance(model, GenericModel):
        return "generic"
    raise TypeError(f"unsupported model type {type(model).__name__}")


@dataclass(frozen=True)
class EstimationResult:
    n_phi_hat: float
    phi_hat: float
    delta_h_hat: float
    ci95_delta_h: tuple
    survived_rounds: int
    total_rounds: int
    n_cycles: float
    derived: Optional[dict] = None
    one_sided: bool = False
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "n_phi_hat": self.n_phi_hat,
            "phi_hat": self.phi_hat,
            "delta_h_hat": self.delta_h_hat,
            "ci95_delta_h": list(self.ci95_delta_h),
            "survived_rounds": self.survived_rounds,
            "total_rounds": self.total_rounds,
            "n_cycles": self.n_cycles,
            "derived": self.derived,
            "one_sided": self.one_sided,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class SurvivalPrediction:
    """Probability that all N*Q projective measurements find |e>."""

    p_all: float
    log_p_all: float
    asymptote: float


def run_campaign(model: AnyModel, params: ProtocolParams,
                 cycle: Optional[CycleAmplitudes] = None) -> MeasurementRecord:
    if cycle is None:
        shifted, _ = shift_energy_zero(model)
        cycle = compute_cycle_amplitudes(shifted, params.tau, params.nu)
    branch = run_postselected(cycle, params)
    p_survive = branch.survival
    p_plus, _ = readout_probabilities(branch.ancilla_state)

    rounds = []
    for r in range(params.q_rounds):
        rng = round_rng(params.seed, r)
        if rng.random() >= p_survive:
            rounds.append(RoundResult(False, None))
        else:
            rounds.append(RoundResult(True, PLUS if rng.random() < p_plus else MINUS))
    echo = params.to_dict()
    echo["model_type"] = model_type(model)
    return MeasurementRecord(rounds=tuple(rounds), seed=params.seed, params=echo)


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("need at least one trial")
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return lo, hi


def _delta_h_from_n_phi(n_phi: float, n: float, tau: float, nu: float) -> float:
    phi = n_phi / n
    return math.sqrt(4.0 * phi / (tau * tau * math.sin(nu)))


def _derived(kind: Optional[str], value: float) -> Optional[dict]:
    if kind == "two_level":
        return {"omega": value}
    if kind == "continuum":
        return {"coupling_norm": value}
    return None


def estimate_fixed_n(record: MeasurementRecord) -> EstimationResult:
    """Invert ``p_minus = sin^2(N phi)`` on ``[0, pi/2]`` and then phi for Delta H_ee.

    The 95% interval is a Wilson score interval on the minus fraction, pushed
    through the (monotone) inversion.
    """
    tau, nu, n = record.params["tau"], record.params["nu"], float(record.params["n_cycles"])
    survived = record.survived
    if survived == 0:
        raise NoSurvivorsError("no round survived; nothing to invert")
    minus = record.minus_count
    p_minus = minus / survived
    lo, hi = wilson_interval(minus, survived)

    def invert(p):
        n_phi = math.asin(math.sqrt(p))
        return n_phi, _delta_h_from_n_phi(n_phi, n, tau, nu)

    n_phi, dh = invert(p_minus)
    one_sided = minus == survived
    ci = (invert(lo)[1], math.inf if one_sided else invert(hi)[1])
    result = EstimationResult(
        n_phi_hat=n_phi,
        phi_hat=n_phi / n,
        delta_h_hat=dh,
        ci95_delta_h=ci,
        survived_rounds=survived,
        total_rounds=record.total,
        n_cycles=n,
        derived=_derived(record.params.get("model_type"), dh),
        one_sided=one_sided,
    )
    if one_sided:
        raise DegenerateInversionError(
            "every surviving round read 'minus': N*phi is at or beyond pi/2", result)
    return result


def choose_n(tau: float, nu: float, delta_h_prior: float) -> float:
    """Cycle count putting ``N |phi|`` at pi/4, where the readout is most sensitive."""
    if not delta_h_prior > 0:
        raise ValueError("delta_h_prior must be positive")
    phi = abs(second_order_phi(tau, nu, delta_h_prior))
    if phi == 0.0:
        raise ValueError("second-order phase vanishes; no finite N")
    n = float(max(1, round((math.pi / 4.0) / phi)))
    if n > N_MAX:
        raise GuardExceededError(f"N = {n:.3e} exceeds {N_MAX:.0e}")
    return n


def predicted_survival(params: ProtocolParams, cycle: CycleAmplitudes) -> SurvivalPrediction:
    """Exact-amplitude survival of a full campaign plus the large-N asymptote."""
    log_round = run_postselected(cycle, params).log_survival
    log_all = params.q_rounds * log_round
    return SurvivalPrediction(math.exp(log_all), log_all, math.exp(-params.q_rounds / snr(params.nu)))


def predicted_survival_second_order(params: ProtocolParams, delta_h_ee: float) -> SurvivalPrediction:
    d = second_order_pe(params.tau, params.nu, delta_h_ee)
    log_all = params.n_cycles * params.q_rounds * math.log1p(-min(d, 1.0))
    return SurvivalPrediction(math.exp(log_all), log_all, math.exp(-params.q_rounds / snr(params.nu)))


def _merge(records: list[MeasurementRecord]) -> MeasurementRecord:
    rounds = tuple(r for rec in records for r in rec.rounds)
    return MeasurementRecord(rounds=rounds, seed=records[0].seed, params=records[0].params)


def estimate_adaptive(model: AnyModel, tau: float, nu: float, round_budget: int,
                      seed: int = 0, stage_rounds: Optional[int] = None) -> EstimationResult:
    """Estimate Delta H_ee with no prior, by doubling N.

    The schedule starts where even the largest Delta H_ee the matrix elements
    allow (``omega_bar * sqrt(dim - 1)``) gives ``N |phi| = 0.1``. It doubles N
    while the minus fraction stays below 1/2 and the doubled phase's upper
    confidence bound stays below pi/2, then spends what is left of the budget
    at the final N. If the budget runs out while still doubling, the best
    estimate so far is returned with ``converged=False``.
    """
    if round_budget < 16:
        raise ValueError("round_budget must be at least 16")
    shifted, _ = shift_energy_zero(model)
    kind = model_type(model)
    bound = omega_bar(shifted) * math.sqrt(shifted.dim - 1)
    if bound == 0.0:
        # H = 0: no coupling can be present
        return EstimationResult(0.0, 0.0, 0.0, (0.0, 0.0), round_budget, round_budget, 1.0,
                                _derived(kind, 0.0))

    cycle = compute_cycle_amplitudes(shifted, tau, nu)
    stage_rounds = stage_rounds or max(8, round_budget // 16)
    n = float(max(1, math.floor(0.1 / abs(second_order_phi(tau, nu, bound)))))
    if n > N_MAX:
        raise GuardExceededError(f"starting N = {n:.3e} exceeds {N_MAX:.0e}")

    spent, stage = 0, 0
    all_rounds: list[MeasurementRecord] = []
    at_final: list[MeasurementRecord] = []
    converged = False
    while round_budget - spent >= stage_rounds:
        params = ProtocolParams(tau, nu, n, stage_rounds, derive_seed(seed, stage))
        rec = run_campaign(model, params, cycle)
        spent += stage_rounds
        stage += 1
        all_rounds.append(rec)
        at_final = [rec]
        if rec.survived == 0:
            continue
        p_minus = rec.minus_count / rec.survived
        _, p_hi = wilson_interval(rec.minus_count, rec.survived)
        if p_minus >= 0.5 or 2.0 * math.asin(math.sqrt(p_hi)) > math.pi / 2 or 2.0 * n > N_MAX:
            converged = True
            break
        n *= 2.0

    if converged and round_budget - spent > 0:
        params = ProtocolParams(tau, nu, n, round_budget - spent, derive_seed(seed, stage))
        rec = run_campaign(model, params, cycle)
        spent += rec.total
        all_rounds.append(rec)
        at_final.append(rec)

    pooled = _merge(at_final)
    try:
        result = estimate_fixed_n(pooled)
    except DegenerateInversionError as exc:
        result = exc.result
    except NoSurvivorsError:
        result = EstimationResult(math.nan, math.nan, math.nan, (0.0, math.inf), 0, 0, n,
                                  None, converged=False)
    survived = sum(rec.survived for rec in all_rounds)
    return dataclasses.replace(result, survived_rounds=survived, total_rounds=spent,
                               converged=converged and result.converged)
