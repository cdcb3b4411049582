"""Reference computations that share no code path with the package."""

import mpmath as mp
import numpy as np


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * scale * (a + a.conj().T) / np.sqrt(2)
    h -= h[0, 0].real * np.eye(d)
    h[0, 0] = 0.0
    return h


def two_level_amplitudes(omega, delta, t, dps=60):
    """Closed-form ``K(t) = exp(-i H t)`` entries for ``H = [[0, omega], [omega, delta]]``.

    Returns ``(K_ee, K_ge)`` as mpmath complex numbers at ``dps`` digits.
    """
    with mp.workdps(dps):
        omega, delta, t = mp.mpf(omega), mp.mpf(delta), mp.mpf(t)
        r = mp.sqrt(omega**2 + delta**2 / 4)
        glob = mp.expj(-delta * t / 2)
        s = mp.sin(r * t) / r if r != 0 else t
        k_ee = glob * (mp.cos(r * t) + 1j * (delta / 2) * s)
        k_ge = glob * (-1j * omega * s)
        return k_ee, k_ge


def two_level_cycle(omega, delta, tau, nu, dps=60):
    """Per-cycle quantities at extended precision.

    ``nu`` may be given as an mpmath number to avoid rounding pi - x.
    Returns a dict with u, delta_k2, lambda_plus, lambda_minus and the
    survival deficit for an equal-weight ancilla.
    """
    with mp.workdps(dps):
        k_ee, k_ge = two_level_amplitudes(omega, delta, mp.mpf(tau) / 2, dps)
        dk = k_ge * k_ge
        lp = k_ee**2 + mp.expj(nu) * dk
        lm = k_ee**2 + mp.expj(-nu) * dk
        deficit = 1 - (abs(lp) ** 2 + abs(lm) ** 2) / 2
        return {
            "u": k_ee - 1,
            "delta_k2": dk,
            "lambda_plus": lp,
            "lambda_minus": lm,
            "deficit": deficit,
            "phi": (mp.arg(lp) - mp.arg(lm)) / 2,
        }
