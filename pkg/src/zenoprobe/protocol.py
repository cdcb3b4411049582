"""Measurement-cycle engine.

One cycle is: free evolution for tau/2, a controlled-M on the ancilla
(identity if the system is in |e>, M otherwise), another tau/2, and a
projective measurement onto |e>. Conditioned on finding |e>, the ancilla is
mapped by ``A = K_ee^2 I + dK M`` where ``K_ee = <e|K(tau/2)|e>`` and
``dK = sum_{i != e} K_ei K_ie``. M is ``diag(exp(i nu), exp(-i nu))`` in the
ancilla basis (|+>, |->), so A is diagonal there with eigenvalues
``lambda_pm = K_ee^2 + exp(+-i nu) dK``.

At realistic parameters every interesting quantity (``K_ee - 1``, ``dK``,
``1 - |lambda|^2``) is far below one ulp of 1.0, so all of them are carried as
increments and survival probabilities are accumulated in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import BranchAnnihilatedError, GuardExceededError, NotShiftedError
from .linalg import as_state, evolution_increment, evolution_operator, spectral_decompose
from .models import SHIFT_TOL, AnyModel, build_generic, omega_bar
from .records import MINUS, PLUS, MeasurementRecord, RoundResult, round_rng

__all__ = [
    "BranchReport",
    "CycleAmplitudes",
    "FULL_COMPOSITE_MAX_CYCLES",
    "ProtocolParams",
    "ValidityMargin",
    "compute_cycle_amplitudes",
    "equal_superposition",
    "exact_survival_one_cycle",
    "readout_probabilities",
    "run_full_composite",
    "run_postselected",
    "second_order_pe",
    "second_order_phi",
    "snr",
    "u_eff_increments",
    "validity_margin",
    "variance_identity_residual",
]

FULL_COMPOSITE_MAX_CYCLES = 10**6


def equal_superposition() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ProtocolParams:
    """Protocol settings.

    ``n_cycles`` is a float so that counts beyond 2**53 (the small-tau
    regime needs ~1e20) can be represented; it must still be a whole number.
    ``ancilla`` holds the initial (|+>, |->) amplitudes.
    """

    tau: float
    nu: float
    n_cycles: float = 1.0
    q_rounds: int = 1
    seed: int = 0
    ancilla: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive and finite, got {self.tau!r}")
        if not (0 < self.nu <= math.pi):
            raise ValueError(f"nu must lie in (0, pi], got {self.nu!r}")
        n = float(self.n_cycles)
        if not (math.isfinite(n) and n >= 1 and n == math.floor(n)):
            raise ValueError(f"n_cycles must be a whole number >= 1, got {self.n_cycles!r}")
        if int(self.q_rounds) != self.q_rounds or self.q_rounds < 1:
            raise ValueError(f"q_rounds must be a positive integer, got {self.q_rounds!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        anc = equal_superposition() if self.ancilla is None else as_state(self.ancilla)
        if anc.shape != (2,):
            raise ValueError("ancilla must have two amplitudes")
        anc.setflags(write=False)
        object.__setattr__(self, "n_cycles", n)
        object.__setattr__(self, "q_rounds", int(self.q_rounds))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "ancilla", anc)

    def with_(self, **changes) -> "ProtocolParams":
        fields = dict(tau=self.tau, nu=self.nu, n_cycles=self.n_cycles,
                      q_rounds=self.q_rounds, seed=self.seed, ancilla=self.ancilla)
        fields.update(changes)
        return ProtocolParams(**fields)

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "nu": self.nu,
            "pi_minus_nu": math.pi - self.nu,
            "n_cycles": self.n_cycles,
            "q_rounds": self.q_rounds,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CycleAmplitudes:
    u: complex
    delta_k2: complex
    lambda_plus_inc: complex
    lambda_minus_inc: complex
    nu: float

    @property
    def k_ee(self) -> complex:
        return 1.0 + self.u

    @property
    def lambdas(self) -> tuple[complex, complex]:
        return 1.0 + self.lambda_plus_inc, 1.0 + self.lambda_minus_inc


@dataclass(frozen=True)
class BranchReport:
    ancilla_state: np.ndarray
    phi_exact_per_cycle: float
    common_phase_per_cycle: float
    log_survival: float
    survival_deficit: float
    n_cycles: float

    @property
    def survival(self) -> float:
        return math.exp(self.log_survival)


@dataclass(frozen=True)
class ValidityMargin:
    margin: float
    tau_omega_bar: float


def _lambda_increments(u: complex, dk: complex, nu: float) -> tuple[complex, complex]:
    # lambda - 1 = 2u + u^2 + exp(+-i nu) dK
    base = 2.0 * u + u * u
    rot = complex(math.cos(nu), math.sin(nu))
    return base + rot * dk, base + rot.conjugate() * dk


def compute_cycle_amplitudes(model: AnyModel, tau: float, nu: float) -> CycleAmplitudes:
    model = build_generic(model)
    if not (math.isfinite(tau) and tau > 0):
        raise ValueError(f"tau must be positive and finite, got {tau!r}")
    e = model.initial_index
    if abs(model.h_ee) > SHIFT_TOL * omega_bar(model):
        raise NotShiftedError(f"<e|H|e> = {model.h_ee!r}; call shift_energy_zero first")
    inc = evolution_increment(spectral_decompose(model.matrix), 0.5 * tau)
    u = complex(inc[e, e])
    row = np.delete(inc[e, :], e)
    col = np.delete(inc[:, e], e)
    # intermediate-state sum; never <e|K(tau)|e> - K_ee^2
    dk = complex(np.dot(row, col))
    lp, lm = _lambda_increments(u, dk, nu)
    return CycleAmplitudes(u=u, delta_k2=dk, lambda_plus_inc=lp, lambda_minus_inc=lm, nu=float(nu))


def variance_identity_residual(model: AnyModel, tau: float) -> float:
    """Mismatch between the two sides of the completeness identity.

    Left: ``sum_{i != e} K_ei K_ie`` from increments. Right:
    ``<e|K(tau)|e> - <e|K(tau/2)|e>^2`` from plain propagators. The right side
    loses all precision once ``tau * |H|`` is below ~1e-8, so only use this at
    moderate tau.
    """
    model = build_generic(model)
    e = model.initial_index
    decomp = spectral_decompose(model.matrix)
    inc = evolution_increment(decomp, 0.5 * tau)
    lhs = np.dot(np.delete(inc[e, :], e), np.delete(inc[:, e], e))
    k_half = evolution_operator(decomp, 0.5 * tau)[e, e]
    rhs = evolution_operator(decomp, tau)[e, e] - k_half * k_half
    return float(abs(lhs - rhs))


def _deficit(inc: complex) -> float:
    """``1 - |1 + inc|^2`` from the increment alone."""
    d = -2.0 * inc.real - (inc.real * inc.real + inc.imag * inc.imag)
    return min(max(d, 0.0), 1.0)


def _log_abs2(inc: complex) -> float:
    """``log |1 + inc|^2``, accurate both near one and near zero."""
    d = _deficit(inc)
    if d < 0.5:
        return math.log1p(-d)
    a2 = abs(1.0 + inc) ** 2
    return math.log(a2) if a2 > 0 else -math.inf


def _arg(inc: complex) -> float:
    return math.atan2(inc.imag, 1.0 + inc.real)


def exact_survival_one_cycle(cycle: CycleAmplitudes, ancilla=None) -> tuple[float, float]:
    """Probability that one cycle finds |e> again, as ``(log P, 1 - P)``."""
    a = equal_superposition() if ancilla is None else as_state(ancilla)
    w = np.abs(a) ** 2
    deficit = float(w[0] * _deficit(cycle.lambda_plus_inc) + w[1] * _deficit(cycle.lambda_minus_inc))
    if deficit < 0.5:
        return math.log1p(-deficit), deficit
    lp, lm = cycle.lambdas
    p = float(w[0] * abs(lp) ** 2 + w[1] * abs(lm) ** 2)
    return (math.log(p) if p > 0 else -math.inf), 1.0 - p


def run_postselected(cycle: CycleAmplitudes, params: ProtocolParams) -> BranchReport:
    """Ancilla state and survival after ``params.n_cycles`` post-selected cycles.

    N-th powers of the branch eigenvalues are taken as ``N * log`` in
    (log-modulus, phase) form; N is never iterated.
    """
    n = params.n_cycles
    a = params.ancilla
    w = np.abs(a) ** 2
    incs = (cycle.lambda_plus_inc, cycle.lambda_minus_inc)
    # log |lambda|^(2N) per branch; 0 * -inf must stay 0 for an unpopulated branch
    logs = [n * _log_abs2(inc) for inc in incs]
    live = [wk > 0 for wk in w]
    if not any(live[k] and logs[k] > -math.inf for k in range(2)):
        raise BranchAnnihilatedError("post-selected branch has zero probability")

    branch_deficits = [-math.expm1(lg) for lg in logs]
    deficit = float(sum(w[k] * branch_deficits[k] for k in range(2) if live[k]))
    if deficit < 0.5:
        log_s = math.log1p(-deficit)
    else:
        terms = [math.log(w[k]) + logs[k] for k in range(2) if live[k]]
        log_s = float(np.logaddexp.reduce(terms))
        deficit = -math.expm1(log_s)

    args = [_arg(inc) for inc in incs]
    amps = np.zeros(2, dtype=complex)
    for k in range(2):
        if not live[k] or logs[k] == -math.inf:
            continue
        log_mod = math.log(abs(a[k])) + 0.5 * (logs[k] - log_s)
        phase = math.atan2(a[k].imag, a[k].real) + math.fmod(n * args[k], 2.0 * math.pi)
        amps[k] = math.exp(log_mod) * complex(math.cos(phase), math.sin(phase))
    amps /= np.linalg.norm(amps)

    return BranchReport(
        ancilla_state=amps,
        phi_exact_per_cycle=0.5 * (args[0] - args[1]),
        common_phase_per_cycle=0.5 * (args[0] + args[1]),
        log_survival=log_s,
        survival_deficit=min(max(deficit, 0.0), 1.0),
        n_cycles=n,
    )


def u_eff_increments(cycle: CycleAmplitudes, ancilla=None) -> tuple[complex, complex]:
    """Eigenvalues of the renormalized one-cycle map ``A / sqrt(P_e)``, minus one."""
    log_p, _ = exact_survival_one_cycle(cycle, ancilla)
    s = math.expm1(-0.5 * log_p)
    incs = (cycle.lambda_plus_inc, cycle.lambda_minus_inc)
    return tuple(inc + s + inc * s for inc in incs)


def _sample_round(rng: np.random.Generator, cycle_probs, ancilla) -> RoundResult:
    if np.any(rng.random(len(cycle_probs)) >= cycle_probs):
        return RoundResult(False, None)
    p_plus, _ = readout_probabilities(ancilla)
    return RoundResult(True, PLUS if rng.random() < p_plus else MINUS)


def run_full_composite(
    model: AnyModel, params: ProtocolParams, mode: str = "postselect"
) -> tuple[BranchReport, Optional[MeasurementRecord]]:
    """Brute-force propagation of system (x) ancilla, cycle by cycle.

    This is the reference the closed-form branch engine is checked against;
    the propagator comes from ``scipy.linalg.expm`` rather than the eigenpair
    route. In ``sample`` mode each of the ``q_rounds`` rounds draws a
    Bernoulli survival per cycle, then one readout; a failed round records
    no outcome.
    """
    if mode not in ("postselect", "sample"):
        raise ValueError(f"mode must be 'postselect' or 'sample', got {mode!r}")
    model = build_generic(model)
    n = params.n_cycles
    if n > FULL_COMPOSITE_MAX_CYCLES:
        raise GuardExceededError(f"n_cycles={n:g} exceeds the explicit-simulation guard {FULL_COMPOSITE_MAX_CYCLES}")
    if abs(model.h_ee) > SHIFT_TOL * omega_bar(model):
        raise NotShiftedError(f"<e|H|e> = {model.h_ee!r}; call shift_energy_zero first")
    n = int(n)
    d, e = model.dim, model.initial_index

    k_half = scipy.linalg.expm(-0.5j * params.tau * model.matrix)
    m_diag = np.array([np.exp(1j * params.nu), np.exp(-1j * params.nu)])
    flipped = np.ones(d, dtype=bool)
    flipped[e] = False

    anc = np.array(params.ancilla)
    log_s = 0.0
    probs = np.empty(n)
    for c in range(n):
        state = np.outer(k_half[:, e], anc)  # K (x) I on |e>|anc>
        state[flipped] *= m_diag  # controlled-M
        branch = k_half[e, :] @ state  # K then project onto <e|
        p = min(float(np.vdot(branch, branch).real), 1.0)  # expm rounding can overshoot 1
        if p == 0.0:
            raise BranchAnnihilatedError(f"projection onto |e> has zero probability at cycle {c}")
        probs[c] = p
        log_s += math.log(p)
        anc = branch / math.sqrt(p)

    dk = k_half[e, flipped] @ k_half[flipped, e]
    args = np.angle(k_half[e, e] ** 2 + m_diag * dk)
    report = BranchReport(
        ancilla_state=anc,
        phi_exact_per_cycle=0.5 * float(args[0] - args[1]),
        common_phase_per_cycle=0.5 * float(args[0] + args[1]),
        log_survival=log_s,
        survival_deficit=-math.expm1(log_s),
        n_cycles=float(n),
    )
    if mode == "postselect":
        return report, None
    rounds = tuple(_sample_round(round_rng(params.seed, r), probs, anc) for r in range(params.q_rounds))
    return report, MeasurementRecord(rounds=rounds, seed=params.seed, params=params.to_dict())


def second_order_phi(tau: float, nu: float, delta_h_ee: float) -> float:
    """Per-cycle ancilla phase to second order in tau (hbar = 1)."""
    return -(tau * tau) * (delta_h_ee * delta_h_ee) * math.sin(nu) / 4.0


def second_order_pe(tau: float, nu: float, delta_h_ee: float) -> float:
    """Per-cycle survival deficit ``1 - P_e`` to second order in tau."""
    # 1 + cos(nu) = 2 cos^2(nu/2) stays accurate as nu -> pi
    c = math.cos(0.5 * nu)
    return (tau * tau) * (delta_h_ee * delta_h_ee) * c * c


def snr(nu: float) -> float:
    """``sin(nu) / (2 (1 + cos nu))``, written as ``tan(nu/2) / 2``."""
    return 0.5 * math.tan(0.5 * nu)


def validity_margin(tau: float, nu: float, omega_bar: float) -> ValidityMargin:
    tw = tau * omega_bar
    gap = abs(math.pi - nu)
    margin = gap / math.sqrt(tw) if tw > 0 else math.inf
    return ValidityMargin(margin=margin, tau_omega_bar=tw)


def readout_probabilities(ancilla) -> tuple[float, float]:
    """Outcome probabilities when measuring in ``(|+> +- |->)/sqrt(2)``."""
    a = as_state(ancilla)
    p_plus = abs(a[0] + a[1]) ** 2 / 2.0
    p_minus = abs(a[0] - a[1]) ** 2 / 2.0
    return p_plus, p_minus
