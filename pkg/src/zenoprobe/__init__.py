"""Zeno-protected ancilla measurement of a metastable system's transition strength.

A system held in |e> by repeated projective measurements is entangled with an
ancilla qubit through a controlled-M between measurements. The ancilla picks
up a phase set by ``Delta H_ee = sqrt(<e|H^2|e>)`` while the system almost
never leaves |e>.
"""

from .estimator import (
    EstimationResult,
    SurvivalPrediction,
    choose_n,
    estimate_adaptive,
    estimate_fixed_n,
    predicted_survival,
    predicted_survival_second_order,
    run_campaign,
)
from .models import (
    ContinuumModel,
    GenericModel,
    ModelSummary,
    TwoLevelModel,
    build_generic,
    delta_h_ee,
    shift_energy_zero,
    summarize,
)
from .protocol import (
    BranchReport,
    CycleAmplitudes,
    ProtocolParams,
    compute_cycle_amplitudes,
    exact_survival_one_cycle,
    readout_probabilities,
    run_full_composite,
    run_postselected,
    second_order_pe,
    second_order_phi,
    snr,
    validity_margin,
    variance_identity_residual,
)
from .records import MeasurementRecord, RoundResult

__version__ = "0.1.0"
