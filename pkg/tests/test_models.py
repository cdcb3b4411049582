import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zenoprobe.errors import NotShiftedError
from zenoprobe.models import (
    ContinuumModel,
    GenericModel,
    TwoLevelModel,
    build_generic,
    delta_h_ee,
    shift_energy_zero,
    summarize,
)


def test_two_level_matrix():
    np.testing.assert_array_equal(build_generic(TwoLevelModel(1, 1)).matrix, [[0, 1], [1, 1]])


def test_two_level_decoupled():
    np.testing.assert_array_equal(build_generic(TwoLevelModel(0, 2)).matrix, np.diag([0, 2]))


def test_continuum_matrix():
    h = build_generic(ContinuumModel([1, 2], [0.3, 0.4j])).matrix
    assert h.shape == (3, 3)
    assert h[1, 0] == 0.3 and h[2, 0] == 0.4j
    assert h[0, 2] == -0.4j
    assert h[0, 0] == 0 and h[1, 1] == 1 and h[2, 2] == 2
    assert h[1, 2] == 0 and h[2, 1] == 0


def test_empty_continuum_rejected():
    with pytest.raises(ValueError):
        ContinuumModel([], [])


def test_negative_omega_rejected():
    with pytest.raises(ValueError):
        TwoLevelModel(-1, 0)


def test_generic_index_out_of_range():
    with pytest.raises(ValueError):
        GenericModel(np.eye(2), 2)


@pytest.mark.parametrize(
    "h, shifted, shift",
    [
        (np.diag([3.0, 4.0]), np.diag([0.0, 1.0]), 3.0),
        ([[0, 1], [1, 1]], [[0, 1], [1, 1]], 0.0),
        ([[2, 1], [1, 1]], [[0, 1], [1, -1]], 2.0),
    ],
)
def test_shift_energy_zero(h, shifted, shift):
    m, s = shift_energy_zero(GenericModel(np.array(h, dtype=complex)))
    np.testing.assert_allclose(m.matrix, shifted)
    assert s == shift
    assert m.h_ee == 0


def test_shift_respects_initial_index():
    m, s = shift_energy_zero(GenericModel(np.diag([1.0, 5.0, 2.0]), initial_index=1))
    assert s == 5.0
    np.testing.assert_allclose(np.diag(m.matrix).real, [-4, 0, -3])


def test_delta_h_two_level():
    assert delta_h_ee(TwoLevelModel(1, 1)) == 1


def test_delta_h_continuum():
    assert delta_h_ee(ContinuumModel([0.1, 0.2], [3, 4])) == pytest.approx(5.0, rel=1e-15)


def test_delta_h_diagonal_is_zero():
    assert delta_h_ee(GenericModel(np.diag([0.0, 3.0, 7.0]))) == 0


def test_delta_h_requires_shift():
    with pytest.raises(NotShiftedError):
        delta_h_ee(GenericModel(np.diag([1.0, 2.0])))


def test_delta_h_equals_sqrt_h2_ee(rng):
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    m, _ = shift_energy_zero(GenericModel(a + a.conj().T, 2))
    h2 = (m.matrix @ m.matrix)[2, 2].real
    assert delta_h_ee(m) == pytest.approx(math.sqrt(h2), rel=1e-13)


def test_delta_h_unchanged_by_mode_couplings(rng):
    # g-g couplings do not enter Delta H_ee
    base = build_generic(ContinuumModel([1, 2, 3], [1, 1j, 0.5])).matrix.copy()
    base[1, 2] = base[2, 1] = 0.7
    assert delta_h_ee(GenericModel(base)) == pytest.approx(math.sqrt(2.25), rel=1e-15)


@pytest.mark.parametrize(
    "model, dim, dh, obar, shift",
    [
        (TwoLevelModel(1, 1), 2, 1.0, 1.0, 0.0),
        (GenericModel(np.diag([0.0, 5.0])), 2, 0.0, 5.0, 0.0),
        (ContinuumModel([2], [1]), 2, 1.0, 2.0, 0.0),
        (GenericModel(np.diag([1.0, 2.0, 3.0])), 3, 0.0, 2.0, 1.0),
    ],
)
def test_summarize(model, dim, dh, obar, shift):
    s = summarize(model)
    assert (s.dim, s.delta_h_ee, s.omega_bar, s.h_ee_shift) == (dim, dh, obar, shift)


@given(st.floats(0, 10), st.floats(0, 10))
def test_two_level_delta_h_is_omega(omega, delta):
    assert delta_h_ee(TwoLevelModel(omega, delta)) == omega


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.floats(-5, 5))
def test_shift_invariance(diag, offset):
    h = np.array([[0, 1, 2j], [1, 0, 0.5], [-2j, 0.5, 0]], dtype=complex)
    h += np.diag(diag)
    shifted, _ = shift_energy_zero(GenericModel(h))
    shifted2, _ = shift_energy_zero(GenericModel(h + offset * np.eye(3)))
    assert delta_h_ee(shifted) == pytest.approx(delta_h_ee(shifted2), rel=1e-14)


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=2))
def test_continuum_independent_of_frequencies(omegas):
    assert delta_h_ee(ContinuumModel(omegas, [3, 4])) == delta_h_ee(ContinuumModel([0, 0], [3, 4]))
