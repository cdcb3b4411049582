"""Small dense complex linear algebra.

Everything here works on plain ``numpy`` arrays. The one non-standard piece is
the treatment of near-unity quantities: propagators are also available as
increments ``K(t) - I`` so that amplitudes like ``K_ee - 1`` keep full relative
precision when they are far below one ulp of 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NonHermitianError

__all__ = [
    "HERMITIAN_TOL",
    "SpectralDecomposition",
    "as_matrix",
    "as_state",
    "evolution_increment",
    "evolution_operator",
    "kron",
    "max_abs",
    "phase_increment",
    "spectral_decompose",
]

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def as_state(amplitudes, normalized: bool = True) -> np.ndarray:
    """Validate a state vector.

    Sub-normalized vectors are accepted when ``normalized`` is false (they
    represent unnormalized branches); the norm may never exceed one.
    """
    v = np.array(amplitudes, dtype=complex).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise ValueError("state must be a non-empty finite vector")
    n2 = float(np.vdot(v, v).real)
    if normalized:
        if abs(n2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |v|^2 = {n2!r}")
    elif n2 > 1.0 + NORM_TOL:
        raise ValueError(f"state norm exceeds one: |v|^2 = {n2!r}")
    return v


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a Hermitian matrix; ``vectors[:, k]`` belongs to ``energies[k]``."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.energies) @ self.vectors.conj().T


def spectral_decompose(h) -> SpectralDecomposition:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"Hamiltonian must be square, got shape {h.shape}")
    scale = max_abs(h)
    asym = max_abs(h - h.conj().T)
    if asym > HERMITIAN_TOL * max(1.0, scale):
        raise NonHermitianError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    # symmetrize so that eigh sees exactly the Hermitian part
    energies, vectors = np.linalg.eigh(0.5 * (h + h.conj().T))
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralDecomposition(energies, vectors)


def phase_increment(x):
    """``exp(1j*x) - 1`` without cancellation for small ``x``.

    Uses ``exp(ix) - 1 = -2 sin^2(x/2) + i sin(x)``. Works elementwise on
    arrays and returns a Python complex for scalars.
    """
    x = np.asarray(x, dtype=float)
    s = np.sin(0.5 * x)
    out = -2.0 * s * s + 1j * np.sin(x)
    return complex(out) if out.ndim == 0 else out


def evolution_operator(decomp: SpectralDecomposition, t: float) -> np.ndarray:
    """``K(t) = exp(-i H t)`` assembled from the eigenpairs (hbar = 1)."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    v = decomp.vectors
    phases = np.exp(-1j * decomp.energies * t)
    return (v * phases) @ v.conj().T


def evolution_increment(decomp: SpectralDecomposition, t: float) -> np.ndarray:
    """``K(t) - I`` with full relative precision in every entry.

    The identity is never added and subtracted: each entry is the eigen-sum of
    ``exp(-i E_k t) - 1`` terms, so its error scales with ``|E t|`` rather than
    with one.
    """
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    v = decomp.vectors
    inc = phase_increment(-decomp.energies * t)
    return (v * inc) @ v.conj().T


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))
