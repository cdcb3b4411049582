"""Model Hamiltonians with a distinguished initial state (hbar = 1).

Frequencies are in units of a caller-chosen reference; two-level scenarios
use the detuning as that reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError, NotShiftedError
from .linalg import HERMITIAN_TOL, as_matrix, max_abs, spectral_decompose

__all__ = [
    "ContinuumModel",
    "GenericModel",
    "ModelSummary",
    "TwoLevelModel",
    "build_generic",
    "delta_h_ee",
    "omega_bar",
    "shift_energy_zero",
    "summarize",
]

SHIFT_TOL = 1e-12


@dataclass(frozen=True)
class TwoLevelModel:
    omega: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.omega) and math.isfinite(self.delta)):
            raise ValueError("omega and delta must be finite")
        if self.omega < 0:
            raise ValueError("omega must be non-negative; absorb its phase into the basis")


@dataclass(frozen=True)
class ContinuumModel:
    """Initial state coupled to a discretized band of modes, no mode-mode couplings."""

    omegas: tuple
    couplings: tuple

    def __init__(self, omegas: Sequence[float], couplings: Sequence[complex]):
        omegas = tuple(float(w) for w in omegas)
        couplings = tuple(complex(v) for v in couplings)
        if not omegas or len(omegas) != len(couplings):
            raise ValueError("omegas and couplings must be non-empty and of equal length")
        if not all(math.isfinite(w) for w in omegas) or not all(
            math.isfinite(v.real) and math.isfinite(v.imag) for v in couplings
        ):
            raise ValueError("continuum parameters must be finite")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "couplings", couplings)


@dataclass(frozen=True, eq=False)
class GenericModel:
    """Full Hermitian matrix; ``initial_index`` picks out |e>."""

    matrix: np.ndarray
    initial_index: int = 0

    def __post_init__(self):
        h = as_matrix(self.matrix)
        if h.shape[0] != h.shape[1]:
            raise DimensionError(f"Hamiltonian must be square, got {h.shape}")
        if not 0 <= self.initial_index < h.shape[0]:
            raise DimensionError(f"initial_index {self.initial_index} out of range for dim {h.shape[0]}")
        asym = max_abs(h - h.conj().T)
        if asym > HERMITIAN_TOL * max(1.0, max_abs(h)):
            # reuse the decomposition's error type and message
            spectral_decompose(h)
        h.setflags(write=False)
        object.__setattr__(self, "matrix", h)
        object.__setattr__(self, "initial_index", int(self.initial_index))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def h_ee(self) -> complex:
        return self.matrix[self.initial_index, self.initial_index]


AnyModel = Union[TwoLevelModel, ContinuumModel, GenericModel]


@dataclass(frozen=True)
class ModelSummary:
    dim: int
    delta_h_ee: float
    omega_bar: float
    h_ee_shift: float

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "delta_h_ee": self.delta_h_ee,
            "omega_bar": self.omega_bar,
            "h_ee_shift": self.h_ee_shift,
        }


def build_generic(model: AnyModel) -> GenericModel:
    if isinstance(model, GenericModel):
        return model
    if isinstance(model, TwoLevelModel):
        h = np.array([[0.0, model.omega], [model.omega, model.delta]], dtype=complex)
        return GenericModel(h, 0)
    if isinstance(model, ContinuumModel):
        n = len(model.omegas)
        h = np.zeros((n + 1, n + 1), dtype=complex)
        h[1:, 0] = model.couplings
        h[0, 1:] = np.conj(model.couplings)
        h[np.arange(1, n + 1), np.arange(1, n + 1)] = model.omegas
        return GenericModel(h, 0)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def shift_energy_zero(model: AnyModel) -> tuple[GenericModel, float]:
    """Move the energy zero onto |e>; returns the shifted model and the shift."""
    model = build_generic(model)
    shift = float(model.h_ee.real)
    h = np.array(model.matrix)
    h[np.diag_indices_from(h)] -= shift
    e = model.initial_index
    h[e, e] = 0.0
    return GenericModel(h, e), shift


def omega_bar(model: AnyModel) -> float:
    """Largest matrix element magnitude, the bound used for higher-order terms."""
    return max_abs(build_generic(model).matrix)


def delta_h_ee(model: AnyModel) -> float:
    """Energy spread of |e>: ``sqrt(<e|H^2|e>)`` for a shifted model.

    Only the couplings out of |e> contribute, so the value is computed as the
    norm of column e with the diagonal entry removed.
    """
    model = build_generic(model)
    e = model.initial_index
    if abs(model.h_ee) > SHIFT_TOL * omega_bar(model):
        raise NotShiftedError(f"<e|H|e> = {model.h_ee!r}; call shift_energy_zero first")
    col = np.delete(model.matrix[:, e], e)
    return math.hypot(*np.abs(col))


def summarize(model: AnyModel) -> ModelSummary:
    shifted, shift = shift_energy_zero(model)
    return ModelSummary(
        dim=shifted.dim,
        delta_h_ee=delta_h_ee(shifted),
        omega_bar=omega_bar(shifted),
        h_ee_shift=shift,
    )
