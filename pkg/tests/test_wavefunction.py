import functools
import math

import numpy as np
import pytest
from scipy.integrate import simpson

from nonstatq.envelope import (
    glauber_initial_conditions,
    integrate_envelope,
    stationary_envelope,
)
from nonstatq.errors import AmplitudeOverflowError, GridError
from nonstatq.medium import Constants, MediumProfile, ModeSpec
from nonstatq.quadratures import invariant_coefficients, moments_for_state
from nonstatq.states import CoherentState, FockState
from nonstatq.wavefunction import (
    WaveGrid,
    build_wave_grid,
    eigen_residual,
    psi_coherent,
    psi_fock,
    psi_ground,
    schrodinger_residual,
    wave_norm,
)

CONSTS = Constants(1.0, 1.0, 1.0)
MODE = ModeSpec(omega0=1.0)
PI_QUARTER = math.pi ** -0.25


@functools.lru_cache(maxsize=None)
def conductive_trajectory():
    prof = MediumProfile.constant(1.0, 1.0, 0.2)
    return integrate_envelope(prof, MODE, CONSTS,
                              glauber_initial_conditions(math.sqrt(0.99)),
                              np.linspace(0.0, 10.0, 2001), tol=1e-11)


@functools.lru_cache(maxsize=None)
def vacuum_trajectory():
    return integrate_envelope(MediumProfile.vacuum(), MODE, CONSTS,
                              glauber_initial_conditions(1.0),
                              np.linspace(0.0, 10.0, 2001), tol=1e-11)


def lossy_sample(t=5.0):
    return conductive_trajectory().sample_at(t)


# ------------------------------------------------------------ pinned values


def test_ground_state_at_origin():
    psi = psi_ground(np.array([0.0]), stationary_envelope(1.0, 0.0), CONSTS)
    assert psi[0].real == pytest.approx(PI_QUARTER, rel=1e-14)
    assert psi[0].imag == pytest.approx(0.0, abs=1e-14)
    assert abs(psi[0]) == pytest.approx(0.7511255444649425, rel=1e-14)
    # even at the start: psi(+2) == psi(-2)
    pair = psi_ground(np.array([-2.0, 2.0]), stationary_envelope(1.0, 0.0), CONSTS)
    assert pair[0] == pair[1]


def test_second_level_at_origin():
    psi = psi_fock(np.array([0.0]), 2, stationary_envelope(1.0, 0.0), CONSTS)
    assert psi[0].real == pytest.approx(-PI_QUARTER / math.sqrt(2.0), rel=1e-13)
    assert abs(psi[0]) == pytest.approx(0.5311259660135985, rel=1e-13)
    # odd levels vanish at the center of symmetry
    assert abs(psi_fock(np.array([0.0]), 3,
                        stationary_envelope(1.0, 0.0), CONSTS)[0]) < 1e-15


def test_coherent_reduces_to_ground_at_zero_amplitude():
    q = np.linspace(-5, 5, 201)
    s = lossy_sample()
    np.testing.assert_allclose(psi_coherent(q, s, CONSTS, 0.0),
                               psi_ground(q, s, CONSTS), atol=1e-15)
    np.testing.assert_allclose(psi_fock(q, 0, s, CONSTS),
                               psi_ground(q, s, CONSTS), atol=1e-15)


# ------------------------------------------------------------------- norms


@pytest.mark.parametrize("state", [CoherentState(0.0), CoherentState(1.0 + 1.0j),
                                   FockState(1), FockState(4)])
def test_unit_norm(state):
    grid = build_wave_grid(lossy_sample(), CONSTS, state)
    assert wave_norm(grid) == pytest.approx(1.0, abs=1e-6)


def test_levels_stay_orthonormal():
    s = lossy_sample()
    widest = build_wave_grid(s, CONSTS, FockState(5))
    q = widest.q
    funcs = [psi_fock(q, n, s, CONSTS) for n in range(6)]
    for m in range(6):
        for n in range(6):
            overlap = simpson(np.conj(funcs[m]) * funcs[n], x=q)
            expected = 1.0 if m == n else 0.0
            assert abs(overlap - expected) < 1e-6
    assert abs(simpson(np.conj(funcs[1]) * funcs[3], x=q)) < 1e-8


# ------------------------------------------------------- eigenvalue residual


def test_eigen_residual_small_on_default_grid():
    s = lossy_sample()
    coeffs = invariant_coefficients(s, CONSTS, 1.0)
    for alpha in (0.0, 1.0 + 0.5j):
        grid = build_wave_grid(s, CONSTS, CoherentState(alpha))
        assert eigen_residual(grid, coeffs, alpha) < 1e-6


def test_eigen_residual_fourth_order_in_spacing():
    s = lossy_sample()
    coeffs = invariant_coefficients(s, CONSTS, 1.0)
    alpha = 0.8 - 0.3j
    res, spacing = [], []
    for npoints in (512, 1024):
        grid = build_wave_grid(s, CONSTS, CoherentState(alpha), npoints=npoints)
        res.append(eigen_residual(grid, coeffs, alpha))
        spacing.append(grid.spacing)
    order = math.log(res[0] / res[1]) / math.log(spacing[0] / spacing[1])
    assert order > 3.9


def test_eigen_residual_detects_wrong_eigenvalue():
    s = lossy_sample()
    coeffs = invariant_coefficients(s, CONSTS, 1.0)
    grid = build_wave_grid(s, CONSTS, CoherentState(1.0))
    assert eigen_residual(grid, coeffs, 1.0 + 0.1) > 1e-2


def test_eigen_residual_detects_mismatched_invariant():
    """Coefficients taken at the wrong time must not annihilate the state."""
    traj = conductive_trajectory()
    s = traj.sample_at(5.0)
    stale = invariant_coefficients(traj.sample_at(0.0), CONSTS, 1.0)
    grid = build_wave_grid(s, CONSTS, CoherentState(1.0))
    assert eigen_residual(grid, stale, 1.0) > 1e-3


def test_eigen_residual_rejects_coarse_grids():
    s = stationary_envelope(1.0, 0.0)
    coeffs = invariant_coefficients(s, CONSTS, 1.0)
    grid = build_wave_grid(s, CONSTS, CoherentState(0.0), npoints=19)
    with pytest.raises(GridError):
        eigen_residual(grid, coeffs, 0.0)


# --------------------------------------------------- moments cross-validation


@pytest.mark.parametrize("alpha", [1.0, -1.0j, 2.0j, 1.0 + 1.0j])
def test_position_moments_match_quadrature_records(alpha):
    s = lossy_sample()
    state = CoherentState(alpha)
    grid = build_wave_grid(s, CONSTS, state, npoints=4096, span_sigmas=12.0)
    rec = moments_for_state(s, CONSTS, state)
    dens = np.abs(grid.psi) ** 2
    mean_q = simpson(grid.q * dens, x=grid.q)
    mean_q2 = simpson(grid.q ** 2 * dens, x=grid.q)
    assert mean_q == pytest.approx(rec.mean_q, abs=1e-8)
    assert mean_q2 == pytest.approx(rec.var_q + rec.mean_q ** 2, abs=1e-8)


def test_momentum_mean_matches_quadrature_record():
    s = lossy_sample()
    state = CoherentState(1.0 + 1.0j)
    grid = build_wave_grid(s, CONSTS, state, npoints=4096, span_sigmas=12.0)
    rec = moments_for_state(s, CONSTS, state)
    psi, q, h = grid.psi, grid.q, grid.spacing
    dpsi = (-psi[4:] + 8.0 * psi[3:-1] - 8.0 * psi[1:-3] + psi[:-4]) / (12.0 * h)
    inner = slice(2, len(q) - 2)
    integrand = np.conj(psi[inner]) * (-1j * CONSTS.hbar) * dpsi
    mean_p = simpson(integrand, x=q[inner]).real
    assert mean_p == pytest.approx(rec.mean_p, abs=1e-6)


def test_fock_density_is_even():
    s = lossy_sample()
    q = np.linspace(-8.0, 8.0, 401)
    dens = np.abs(psi_fock(q, 3, s, CONSTS)) ** 2
    np.testing.assert_allclose(dens, dens[::-1], atol=1e-12)


# ------------------------------------------------------- evolution residual


def test_schrodinger_residual_second_order_vacuum():
    traj = vacuum_trajectory()
    res = [schrodinger_residual(traj, CONSTS, CoherentState(1.0), 5.0, h_t)
           for h_t in (0.02, 0.01)]
    assert res[1] < 1e-3
    assert math.log2(res[0] / res[1]) > 1.9


def test_schrodinger_residual_second_order_lossy_fock():
    traj = conductive_trajectory()
    res = [schrodinger_residual(traj, CONSTS, FockState(1), 5.0, h_t)
           for h_t in (0.02, 0.01)]
    assert math.log2(res[0] / res[1]) > 1.9


def test_schrodinger_residual_needs_medium():
    samples = [stationary_envelope(1.0, t) for t in np.linspace(0, 1, 11)]
    from nonstatq.envelope import EnvelopeTrajectory
    bare = EnvelopeTrajectory(samples)
    with pytest.raises(ValueError):
        schrodinger_residual(bare, CONSTS, CoherentState(1.0), 0.5, 0.1)


# ------------------------------------------------------------------ guards


def test_amplitude_overflow_guard():
    s = stationary_envelope(1.0, 0.0)
    with pytest.raises(AmplitudeOverflowError):
        psi_coherent(np.linspace(-15.0, 15.0, 101), s, CONSTS, 100.0j)


def test_fock_level_guards():
    s = stationary_envelope(1.0, 0.0)
    q = np.linspace(-5, 5, 64)
    with pytest.raises(ValueError):
        psi_fock(q, -1, s, CONSTS)
    with pytest.raises(ValueError):
        psi_fock(q, 2.5, s, CONSTS)
    with pytest.raises(ValueError):
        psi_fock(q, 51, s, CONSTS)
    assert np.all(np.isfinite(psi_fock(q, 51, s, CONSTS, max_n=60)))


def test_wave_grid_validation():
    s = stationary_envelope(1.0, 0.0)
    good_q = np.linspace(-1, 1, 8)
    with pytest.raises(GridError):
        WaveGrid(q=good_q.reshape(2, 4), psi=np.zeros((2, 4), complex),
                 t=0.0, state_kind="coherent", sample=s, consts=CONSTS)
    with pytest.raises(GridError):
        WaveGrid(q=good_q, psi=np.zeros(7, complex), t=0.0,
                 state_kind="coherent", sample=s, consts=CONSTS)
    with pytest.raises(GridError):
        WaveGrid(q=good_q[:4], psi=np.zeros(4, complex), t=0.0,
                 state_kind="coherent", sample=s, consts=CONSTS)


def test_build_wave_grid_guards():
    s = stationary_envelope(1.0, 0.0)
    with pytest.raises(GridError):
        build_wave_grid(s, CONSTS, CoherentState(0.0), span_sigmas=3.0)
    with pytest.raises(GridError):
        build_wave_grid(s, CONSTS, CoherentState(0.0), npoints=4)
    with pytest.raises(TypeError):
        build_wave_grid(s, CONSTS, "vacuum")
