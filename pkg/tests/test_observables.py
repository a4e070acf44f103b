import math

import numpy as np
import pytest

from jcnoise.dynamics import GROUND, JointState, evolve_analytic, evolve_pure_analytic, initial_joint_state
from jcnoise.errors import DomainError, EmptyWindow
from jcnoise.observables import (
    TimeSeries,
    default_grid,
    negativity,
    population_inversion,
    revival_contrast,
    schmidt_negativity,
    time_series,
)
from jcnoise.states import (
    coherent_amplitudes,
    coherent_state,
    displaced_thermal,
    equal_overlap_q,
    mtcs,
    number_state,
    photon_add,
    thermal_state,
)

A = math.sqrt(10.0)


def series(t, w):
    t = np.asarray(t, dtype=float)
    return TimeSeries(t, np.asarray(w, dtype=float), np.zeros_like(t))


# -- inversion ------------------------------------------------------------------------

def test_initial_inversion_is_one():
    for f in (number_state(0, 5), thermal_state(1.0, 150), coherent_state(A, 150)):
        assert population_inversion(initial_joint_state(f)) == 1.0


def test_vacuum_inversion_at_half_period():
    assert population_inversion(evolve_analytic(number_state(0, 6), math.pi / 2)) == pytest.approx(-1, abs=1e-9)


def test_mixed_atom_inversion_zero():
    rho = np.zeros((6, 6))
    rho[0, 0] = rho[3, 3] = 0.5
    assert population_inversion(JointState(rho, 3)) == 0.0


# -- negativity ------------------------------------------------------------------------

def bell(N=2):
    psi = np.zeros(2 * N, dtype=complex)
    psi[0], psi[GROUND * N + 1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    return JointState(np.outer(psi, psi.conj()), N)


def test_bell_pair_negativity():
    assert negativity(bell()) == pytest.approx(0.5, abs=1e-9)
    assert negativity(bell(6)) == pytest.approx(0.5, abs=1e-9)


def test_vacuum_quarter_period_negativity():
    assert negativity(evolve_analytic(number_state(0, 8), math.pi / 4)) == pytest.approx(0.5, abs=1e-8)


def test_product_states_have_zero_negativity():
    q = equal_overlap_q(A, 1.0)
    fields = [coherent_state(A, 150), thermal_state(1.0, 150), displaced_thermal(A, 1.0, 150),
              mtcs(A, 1.0, q, 150)]
    fields += [photon_add(f) for f in fields[2:]]
    for f in fields:
        assert negativity(initial_joint_state(f)) <= 1e-10


def test_schmidt_route_matches_spectral_route():
    psi = coherent_amplitudes(A, 150)
    f = coherent_state(A, 150)
    for t in (0.7, 5.0, 12.0, 19.9):
        spectral = negativity(evolve_analytic(f, t))
        assert schmidt_negativity(evolve_pure_analytic(psi, t)) == pytest.approx(spectral, abs=1e-8)


def test_schmidt_product_is_zero():
    c = np.zeros((2, 4))
    c[0, 1] = 1
    assert schmidt_negativity(c) == pytest.approx(0.0, abs=1e-15)


def test_phase_invariance_of_series():
    grid = np.linspace(0, 25, 101)
    a = displaced_thermal(A, 1.0, 150)
    b = displaced_thermal(A * np.exp(1j * math.pi / 3), 1.0, 150)
    sa, sb = time_series(a, grid), time_series(b, grid)
    assert np.max(np.abs(sa.negativity - sb.negativity)) <= 1e-8
    assert np.max(np.abs(sa.inversion - sb.inversion)) <= 1e-8


@pytest.mark.parametrize("kind", ["dts", "mtcs", "photon_added_mtcs"])
def test_clamp_does_not_hide_real_negativity(kind):
    q = equal_overlap_q(A, 1.0)
    f = displaced_thermal(A, 1.0, 150) if kind == "dts" else mtcs(A, 1.0, q, 150)
    if kind.startswith("photon_added"):
        f = photon_add(f)
    for t in (0.0, 3.0, 10.0, 20.0):
        J = evolve_analytic(f, t)
        assert abs(negativity(J, clamp=1e-10) - negativity(J, clamp=1e-12)) <= 1e-8


# -- time series ---------------------------------------------------------------------------

def test_single_point_grid():
    s = time_series(coherent_state(A, 150), [0.0])
    assert s.rows == [(0.0, 1.0, 0.0)]


def test_vacuum_series_is_cosine():
    grid = default_grid()
    s = time_series(number_state(0, 8), grid)
    assert len(s) == 2001
    assert np.max(np.abs(s.inversion - np.cos(2 * grid))) <= 1e-8


def test_numeric_propagator_series():
    grid = np.linspace(0, 5, 11)
    f = number_state(0, 6)
    s = time_series(f, grid, propagator="numeric")
    assert np.max(np.abs(s.inversion - np.cos(2 * grid))) <= 1e-9


def test_revival_near_two_pi_sqrt_nbar():
    grid = default_grid()
    s = time_series(displaced_thermal(A, 0.0, 150), grid, with_negativity=False)
    # squared inversion smoothed over one fast period traces the envelope
    win = int(round(math.pi / math.sqrt(11) / (grid[1] - grid[0])))
    env = np.convolve(s.inversion**2, np.ones(win) / win, mode="same")
    late = grid > 10
    peak = grid[late][np.argmax(env[late])]
    assert abs(peak - 2 * math.pi * A) < 1.5


@pytest.mark.parametrize("kind", ["dts", "mtcs"])
def test_series_ranges(kind):
    q = equal_overlap_q(A, 1.0)
    f = displaced_thermal(A, 1.0, 150) if kind == "dts" else mtcs(A, 1.0, q, 150)
    s = time_series(f, np.linspace(0, 25, 51))
    assert np.all(np.abs(s.inversion) <= 1 + 1e-9)
    assert np.all(s.negativity >= -1e-10)


def test_workers_give_identical_series():
    f = displaced_thermal(A, 1.0, 150)
    grid = np.linspace(0, 25, 41)
    a = time_series(f, grid)
    b = time_series(f, grid, workers=4)
    np.testing.assert_array_equal(a.inversion, b.inversion)
    np.testing.assert_array_equal(a.negativity, b.negativity)


def test_grid_validation():
    f = number_state(0, 4)
    for grid in ([], [1.0, 0.5], [-1.0, 0.0], [0.0, 0.0]):
        with pytest.raises(DomainError):
            time_series(f, grid)
    with pytest.raises(ValueError):
        time_series(f, [0.0], propagator="magic")


# -- revival contrast ------------------------------------------------------------------------

def test_contrast_of_zero_series():
    t = np.linspace(0, 25, 2001)
    assert revival_contrast(series(t, 0 * t)) == 0.0


def test_contrast_of_cosine():
    t = np.linspace(15, 15 + math.pi, 200)
    assert revival_contrast(series(t, np.cos(2 * t)), (15, 15 + math.pi)) == pytest.approx(1.0, abs=1e-3)


def test_contrast_empty_window():
    t = np.linspace(0, 10, 50)
    with pytest.raises(EmptyWindow):
        revival_contrast(series(t, 0 * t))
