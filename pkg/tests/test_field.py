import math

import numpy as np
import pytest

from nonstatq.envelope import (
    glauber_initial_conditions,
    integrate_envelope,
    stationary_envelope,
)
from nonstatq.field import (
    EnergyReport,
    FieldMoments,
    energy_terms,
    field_first_moments,
    field_moments,
    field_rs_residual,
    field_second_moments,
    mean_energy_coherent,
    mean_energy_fock,
)
from nonstatq.medium import Constants, MediumProfile, ModeSpec
from nonstatq.quadratures import quadrature_moments

CONSTS = Constants(1.0, 1.0, 1.0)
MODE = ModeSpec(omega0=1.0)
VACUUM = MediumProfile.vacuum()


def conductive_trajectory(t_end=10.0, n=201):
    prof = MediumProfile.constant(1.0, 1.0, 0.2)
    traj = integrate_envelope(prof, MODE, CONSTS,
                              glauber_initial_conditions(math.sqrt(0.99)),
                              np.linspace(0.0, t_end, n), tol=1e-12)
    return prof, traj


# ------------------------------------------------------------ second moments


def test_vacuum_second_moments_pinned():
    for t in (0.0, 0.7, 2.0):
        fm = field_second_moments(stationary_envelope(1.0, t), MODE, CONSTS)
        assert fm.var_e == pytest.approx(0.5, rel=1e-12)
        assert fm.var_b == pytest.approx(0.5, rel=1e-12)
        assert fm.cov_eb == pytest.approx(0.5, rel=1e-12)
        assert fm.comm_eb == pytest.approx(0.0, abs=1e-14)
        assert abs(field_rs_residual(fm)) < 1e-14


def test_uncertainty_identity_closes_by_construction():
    _, traj = conductive_trajectory()
    for s in traj[::20]:
        fm = field_second_moments(s, MODE, CONSTS)
        scale = max(1.0, fm.var_e * fm.var_b)
        assert abs(fm.rs_residual) < 1e-14 * scale
        assert fm.comm_eb != 0.0  # lossy medium: commutator scale is live


def test_corrupted_variance_breaks_identity():
    fm = FieldMoments(t=0.0, x=0.0, mean_e=0.0, mean_b=0.0,
                      var_e=0.5 * 1.1, var_b=0.5, cov_eb=0.5, comm_eb=0.0)
    assert fm.rs_residual == pytest.approx(0.1 * 0.5 * 0.5, rel=1e-12)


def test_volume_scaling():
    wide = ModeSpec(omega0=1.0, volume=4.0)
    fm1 = field_second_moments(stationary_envelope(1.0, 0.0), MODE, CONSTS)
    fm4 = field_second_moments(stationary_envelope(1.0, 0.0), wide, CONSTS)
    assert fm4.var_e == pytest.approx(fm1.var_e / 4.0, rel=1e-12)
    assert fm4.var_b == pytest.approx(fm1.var_b / 4.0, rel=1e-12)


def test_cross_path_variance_identities():
    """var_E against the momentum route and var_B against the position route.

    The magnetic identity is the same algebra twice; the electric one holds
    only on the -2i Wronskian branch, so it is a real consistency check."""
    _, traj = conductive_trajectory()
    for s in traj[::20]:
        fm = field_second_moments(s, MODE, CONSTS)
        rec = quadrature_moments(s, CONSTS, 0.0)
        k = MODE.wavenumber_value(CONSTS)
        ve = math.exp(-2.0 * s.lam) * rec.var_p / (CONSTS.eps0 ** 2 * MODE.volume)
        vb = k * k * rec.var_q / MODE.volume
        assert fm.var_e == pytest.approx(ve, rel=1e-9)
        assert fm.var_b == pytest.approx(vb, rel=1e-12)


def test_stationary_damping_ratio_is_constant():
    _, traj = conductive_trajectory()
    ratios = [field_second_moments(s, MODE, CONSTS).var_b * math.exp(s.lam)
              / s.rho ** 2 for s in traj]
    assert max(ratios) - min(ratios) < 1e-8 * abs(ratios[0])


# ------------------------------------------------------------- first moments


def test_first_moments_vanish_at_the_start():
    fm = field_first_moments(stationary_envelope(1.0, 0.0), MODE, CONSTS,
                             alpha=1.0, x=0.0)
    assert fm == (0.0, 0.0)


def test_first_moments_quarter_period_pinned():
    s = stationary_envelope(1.0, math.pi / 2.0)
    mean_e, mean_b = field_first_moments(s, MODE, CONSTS, alpha=1.0, x=0.0)
    assert mean_b == pytest.approx(-1.414214, abs=1e-6)
    assert mean_e == pytest.approx(math.sqrt(0.5), rel=1e-9)


def test_first_moments_zero_for_empty_mode():
    s = stationary_envelope(1.0, 1.3)
    assert field_first_moments(s, MODE, CONSTS, alpha=0.0) == (0.0, 0.0)


def test_first_moments_scale_with_amplitude():
    s = stationary_envelope(1.0, math.pi / 2.0)
    e1, b1 = field_first_moments(s, MODE, CONSTS, alpha=1.0)
    e3, b3 = field_first_moments(s, MODE, CONSTS, alpha=3.0)
    assert e3 == pytest.approx(3.0 * e1, rel=1e-12)
    assert b3 == pytest.approx(3.0 * b1, rel=1e-12)


def test_half_lambda_variant_changes_only_the_electric_mean():
    prof, traj = conductive_trajectory(t_end=3.0, n=31)
    s = traj[-1]
    full = field_first_moments(s, MODE, CONSTS, alpha=1.0)
    half = field_first_moments(s, MODE, CONSTS, alpha=1.0, half_lambda=True)
    assert full[1] == half[1]
    assert full[0] != half[0]
    # vacuum: no damping rate, so the switch is inert
    v = stationary_envelope(1.0, 1.0)
    assert field_first_moments(v, MODE, CONSTS, 1.0) == \
        field_first_moments(v, MODE, CONSTS, 1.0, half_lambda=True)


def test_field_moments_combines_both_pieces():
    s = stationary_envelope(1.0, math.pi / 2.0)
    fm = field_moments(s, MODE, CONSTS, alpha=2.0, x=0.25)
    assert fm.x == 0.25
    e, b = field_first_moments(s, MODE, CONSTS, 2.0, x=0.25)
    assert fm.mean_e == e and fm.mean_b == b
    assert fm.var_e == field_second_moments(s, MODE, CONSTS).var_e


# -------------------------------------------------------------------- energy


def test_ground_state_energy_limits():
    s = stationary_envelope(1.0, 0.0)
    coh = mean_energy_coherent(s, VACUUM, MODE, CONSTS, 0.0)
    fock = mean_energy_fock(s, VACUUM, MODE, CONSTS, 0)
    assert coh.w_printed == pytest.approx(0.5, rel=1e-12)
    assert coh.w_oracle == pytest.approx(0.5, rel=1e-12)
    assert fock.w_printed == pytest.approx(0.5, rel=1e-12)
    assert fock.w_oracle == coh.w_oracle  # identical state, identical number


def test_displaced_and_excited_energies():
    s = stationary_envelope(1.0, 0.0)
    coh = mean_energy_coherent(s, VACUUM, MODE, CONSTS, 1.0)
    assert coh.w_printed == pytest.approx(0.75, rel=1e-12)
    assert coh.w_oracle == pytest.approx(1.5, rel=1e-12)
    assert coh.discrepancy == pytest.approx(-0.75, rel=1e-12)

    one = mean_energy_fock(s, VACUUM, MODE, CONSTS, 1)
    assert one.w_printed == pytest.approx(0.75, rel=1e-12)
    assert one.w_oracle == pytest.approx(1.5, rel=1e-12)
    assert one.state_label.startswith("fock")


def test_energy_terms_vacuum():
    a_tilde, c_tilde = energy_terms(stationary_envelope(1.0, 0.0), VACUUM,
                                    MODE, CONSTS)
    assert a_tilde == pytest.approx(0.0, abs=1e-14)
    assert c_tilde == pytest.approx(0.5, rel=1e-12)


def test_quadratic_weight_stays_positive():
    prof, traj = conductive_trajectory()
    for s in traj[::10]:
        _, c_tilde = energy_terms(s, prof, MODE, CONSTS)
        assert c_tilde > 0.0
        rep = mean_energy_fock(s, prof, MODE, CONSTS, 0)
        assert rep.w_oracle >= 0.0
        assert math.isfinite(rep.discrepancy)


def test_energy_decays_with_the_damping_exponent():
    """Conductive but stationary envelope: both energy routes for the ground
    state decay exactly as exp(-lam)."""
    prof = MediumProfile.constant(1.0, 1.0, 0.2)
    base = None
    for t in (0.0, 1.5, 6.0):
        s = stationary_envelope(0.99, t, gamma_val=0.2)
        rep = mean_energy_coherent(s, prof, MODE, CONSTS, 0.0)
        pair = (rep.w_printed * math.exp(s.lam), rep.w_oracle * math.exp(s.lam))
        if base is None:
            base = pair
        else:
            assert pair[0] == pytest.approx(base[0], rel=1e-12)
            assert pair[1] == pytest.approx(base[1], rel=1e-12)


def test_fock_energy_validates_n():
    s = stationary_envelope(1.0, 0.0)
    with pytest.raises(ValueError):
        mean_energy_fock(s, VACUUM, MODE, CONSTS, -1)
    with pytest.raises(ValueError):
        mean_energy_fock(s, VACUUM, MODE, CONSTS, 1.5)


def test_report_carries_discrepancy():
    rep = EnergyReport(t=0.0, state_label="x", a_tilde=0.0, c_tilde=0.5,
                       w_printed=0.75, w_oracle=1.5)
    assert rep.discrepancy == pytest.approx(-0.75)
