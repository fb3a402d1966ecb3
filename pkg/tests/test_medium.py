import math

import numpy as np
import pytest

from nonstatq.errors import MediumError, ProfileDomainError
from nonstatq.medium import (
    ConstantFunction,
    Constants,
    ExponentialFunction,
    LinearRampFunction,
    MediumProfile,
    ModeSpec,
    SinusoidalFunction,
    TabulatedFunction,
    effective_frequency_sq,
    gamma,
    gamma_dot,
    hyperbolic_decay_medium,
    lambda_accum,
    mode_frequency,
)

CONSTS = Constants(1.0, 1.0, 1.0)
MODE = ModeSpec(omega0=1.0)


def test_constant_profile_basics():
    prof = MediumProfile.constant(2.0, 1.5, 0.0)
    assert prof.epsilon(3.0) == 2.0
    assert prof.mu(-1.0) == 1.5
    assert prof.sigma(0.0) == 0.0
    assert gamma(prof, 1.0) == 0.0
    assert lambda_accum(prof, 5.0) == 0.0
    w = mode_frequency(prof, MODE, CONSTS, 0.0)
    assert w == pytest.approx(1.0 / math.sqrt(3.0))


def test_conductive_gamma_and_lambda():
    prof = MediumProfile.constant(1.0, 1.0, 0.2)
    assert gamma(prof, 0.0) == pytest.approx(0.2)
    assert gamma_dot(prof, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert lambda_accum(prof, 7.0) == pytest.approx(1.4, rel=1e-10)
    # matches the dissipation-corrected frequency: 1 - 0 - 0.01
    assert effective_frequency_sq(prof, MODE, CONSTS, 0.0) == pytest.approx(0.99)


def test_exponential_permittivity_constant_gamma():
    """eps ~ e^{g t} with sigma = 0 gives Gamma = eps_dot/eps = g exactly."""
    prof = MediumProfile(
        ExponentialFunction(1.0, 0.3),
        ConstantFunction(1.0),
        ConstantFunction(0.0),
    )
    for t in (0.0, 1.0, 4.0):
        assert gamma(prof, t) == pytest.approx(0.3, rel=1e-12)
        assert gamma_dot(prof, t) == pytest.approx(0.0, abs=1e-12)
    assert lambda_accum(prof, 2.0) == pytest.approx(0.6, rel=1e-9)


def test_include_eps_dot_switch():
    prof_on = MediumProfile(ExponentialFunction(1.0, 0.5), ConstantFunction(1.0),
                            ConstantFunction(0.1), include_eps_dot=True)
    prof_off = MediumProfile(ExponentialFunction(1.0, 0.5), ConstantFunction(1.0),
                             ConstantFunction(0.1), include_eps_dot=False)
    t = 1.3
    eps = math.exp(0.5 * t)
    assert gamma(prof_on, t) == pytest.approx((0.1 + 0.5 * eps) / eps, rel=1e-12)
    assert gamma(prof_off, t) == pytest.approx(0.1 / eps, rel=1e-12)


def test_gamma_dot_general_formula():
    # sigma(t) = 0.1 + 0.02 t against the analytic derivative of (sigma+deps)/eps
    prof = MediumProfile(ExponentialFunction(1.0, 0.3), ConstantFunction(1.0),
                         LinearRampFunction(0.1, 0.02))
    t = 2.0
    eps = math.exp(0.3 * t)
    deps = 0.3 * eps
    ddeps = 0.09 * eps
    sig = 0.1 + 0.02 * t
    expected = (0.02 + ddeps) / eps - (sig + deps) * deps / eps ** 2
    assert gamma_dot(prof, t) == pytest.approx(expected, rel=1e-12)


def test_sinusoidal_function_derivatives():
    f = SinusoidalFunction(2.0, 0.5, 3.0, 0.7)
    t = 1.1
    assert f.value(t) == pytest.approx(2.0 + 0.5 * math.sin(3.0 * t + 0.7))
    assert f.derivative(t) == pytest.approx(1.5 * math.cos(3.0 * t + 0.7))
    assert f.second_derivative(t) == pytest.approx(-4.5 * math.sin(3.0 * t + 0.7))


def test_tabulated_cubic_reproduces_quadratics_exactly():
    """Not-a-knot cubic splines are exact on polynomials up to degree 3, and
    the centered difference fallback derivatives are exact on quadratics, so a
    quadratic table must round-trip values and both derivatives to roundoff."""
    ts = np.linspace(-0.5, 12.0, 801)
    f = TabulatedFunction(ts, (1.0 + ts) ** 2)
    for t in (0.0, 1.7, 9.3):
        assert f.value(t) == pytest.approx((1.0 + t) ** 2, rel=1e-12)
        assert f.derivative(t) == pytest.approx(2.0 * (1.0 + t), rel=1e-9)
        assert f.second_derivative(t) == pytest.approx(2.0, rel=1e-7)


def test_tabulated_domain_error():
    f = TabulatedFunction(np.linspace(0, 1, 11), np.ones(11))
    with pytest.raises(ProfileDomainError):
        f.value(2.0)


def test_nonpositive_permittivity_rejected():
    prof = MediumProfile(LinearRampFunction(1.0, -1.0), ConstantFunction(1.0),
                         ConstantFunction(0.0))
    assert prof.epsilon(0.5) == 0.5
    with pytest.raises(MediumError):
        prof.epsilon(1.0)


def test_mode_spec_validation():
    with pytest.raises(ValueError):
        ModeSpec(omega0=-1.0)
    with pytest.raises(ValueError):
        ModeSpec(omega0=1.0, volume=0.0)
    mode = ModeSpec(omega0=2.0)
    assert mode.wavenumber_value(CONSTS) == pytest.approx(2.0)
    assert ModeSpec(omega0=2.0, wavenumber=2.0).wavenumber_value(CONSTS) == 2.0


def test_hyperbolic_decay_medium_effective_frequency():
    """The tabulated (1 + w0 t)^2 permittivity gives Omega^2 = 1/(t + 1/w0)^2;
    the quadratic table makes the spline representation exact, so this holds to
    the finite-difference roundoff floor rather than any interpolation error."""
    prof = hyperbolic_decay_medium(omega0=1.0, t_max=12.0)
    for t in (0.0, 1.0, 5.0, 9.9):
        tau = t + 1.0
        got = effective_frequency_sq(prof, MODE, CONSTS, t)
        assert got == pytest.approx(1.0 / tau ** 2, abs=1e-9)
        assert gamma(prof, t) == pytest.approx(2.0 / tau, rel=1e-9)
    assert lambda_accum(prof, 4.0) == pytest.approx(2.0 * math.log(5.0), rel=1e-8)


def test_hyperbolic_decay_medium_rejects_bad_args():
    with pytest.raises(ValueError):
        hyperbolic_decay_medium(omega0=0.0)
    with pytest.raises(ValueError):
        hyperbolic_decay_medium(t_max=-1.0)


def test_constants_validation():
    with pytest.raises(ValueError):
        Constants(hbar=0.0, eps0=1.0, c=1.0)
