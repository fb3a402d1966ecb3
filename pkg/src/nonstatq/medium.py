"""Time-dependent linear media and the frequencies they induce on a field mode.

A medium is described by three real profiles of time: permittivity (relative
units), permeability (relative units), and conductivity (scaled so that
conductivity/permittivity has dimension 1/time).  From these the damping rate
``gamma``, its time integral ``lambda_accum``, the instantaneous mode frequency
and the effective oscillator frequency are derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline, interp1d

from .errors import MediumError, ProfileDomainError

__all__ = [
    "TimeFunction",
    "ConstantFunction",
    "ExponentialFunction",
    "LinearRampFunction",
    "SinusoidalFunction",
    "TabulatedFunction",
    "MediumProfile",
    "ModeSpec",
    "Constants",
    "gamma",
    "gamma_dot",
    "lambda_accum",
    "mode_frequency",
    "effective_frequency_sq",
    "hyperbolic_decay_medium",
]

# Fraction of the tabulated time span used as the default finite-difference step.
DEFAULT_FD_FRACTION = 1e-4


class TimeFunction:
    """A scalar function of time with first and second derivatives.

    Parametric subclasses differentiate analytically; tabulated data falls back
    to central finite differences with a declared step.
    """

    kind = "abstract"

    def value(self, t: float) -> float:
        raise NotImplementedError

    def derivative(self, t: float) -> float:
        raise NotImplementedError

    def second_derivative(self, t: float) -> float:
        raise NotImplementedError

    def __call__(self, t: float) -> float:
        return self.value(t)


@dataclass(frozen=True)
class ConstantFunction(TimeFunction):
    constant: float
    kind = "constant"

    def value(self, t):
        return self.constant

    def derivative(self, t):
        return 0.0

    def second_derivative(self, t):
        return 0.0


@dataclass(frozen=True)
class ExponentialFunction(TimeFunction):
    """amplitude * exp(rate * t)"""

    amplitude: float
    rate: float
    kind = "exponential"

    def value(self, t):
        return self.amplitude * math.exp(self.rate * t)

    def derivative(self, t):
        return self.rate * self.value(t)

    def second_derivative(self, t):
        return self.rate**2 * self.value(t)


@dataclass(frozen=True)
class LinearRampFunction(TimeFunction):
    """offset + slope * t"""

    offset: float
    slope: float
    kind = "linear-ramp"

    def value(self, t):
        return self.offset + self.slope * t

    def derivative(self, t):
        return self.slope

    def second_derivative(self, t):
        return 0.0


@dataclass(frozen=True)
class SinusoidalFunction(TimeFunction):
    """offset + amplitude * sin(angular_frequency * t + phase)"""

    offset: float
    amplitude: float
    angular_frequency: float
    phase: float = 0.0
    kind = "sinusoidal"

    def value(self, t):
        return self.offset + self.amplitude * math.sin(self.angular_frequency * t + self.phase)

    def derivative(self, t):
        return self.amplitude * self.angular_frequency * math.cos(self.angular_frequency * t + self.phase)

    def second_derivative(self, t):
        w = self.angular_frequency
        return -self.amplitude * w * w * math.sin(w * t + self.phase)


class TabulatedFunction(TimeFunction):
    """Sampled profile with interpolation.

    Parameters
    ----------
    times, values : array_like
        Strictly increasing sample times and the profile values there.
    order : int
        Interpolation order, 1 (piecewise linear) or 3 (cubic spline, default).
    derivative_step : float, optional
        Step for the central finite differences used by :meth:`derivative` and
        :meth:`second_derivative`.  Defaults to ``1e-4`` of the sampled span.
    """

    kind = "tabulated"

    def __init__(self, times, values, order: int = 3, derivative_step: float | None = None):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.size < 2 or times.shape != values.shape:
            raise ValueError("tabulated profile needs matching 1-d times and values with at least 2 samples")
        if np.any(np.diff(times) <= 0):
            raise ValueError("tabulated profile times must be strictly increasing")
        if order not in (1, 3):
            raise ValueError(f"interpolation order must be 1 or 3, got {order}")
        self.times = times
        self.values = values
        self.order = order
        span = float(times[-1] - times[0])
        self.derivative_step = DEFAULT_FD_FRACTION * span if derivative_step is None else float(derivative_step)
        if self.derivative_step <= 0:
            raise ValueError("derivative_step must be positive")
        if order == 3:
            if times.size < 4:
                raise ValueError("cubic interpolation needs at least 4 samples")
            self._interp = CubicSpline(times, values)
        else:
            self._interp = interp1d(times, values)

    def _check_domain(self, t: float):
        if t < self.times[0] or t > self.times[-1]:
            raise ProfileDomainError(
                f"tabulated profile queried at t={t!r}, outside sampled range "
                f"[{self.times[0]!r}, {self.times[-1]!r}]"
            )

    def value(self, t):
        self._check_domain(t)
        return float(self._interp(t))

    def derivative(self, t):
        h = self.derivative_step
        self._check_domain(t - h)
        self._check_domain(t + h)
        return (float(self._interp(t + h)) - float(self._interp(t - h))) / (2.0 * h)

    def second_derivative(self, t):
        h = self.derivative_step
        self._check_domain(t - h)
        self._check_domain(t + h)
        f = self._interp
        return (float(f(t + h)) - 2.0 * float(f(t)) + float(f(t - h))) / (h * h)


def _as_time_function(obj) -> TimeFunction:
    if isinstance(obj, TimeFunction):
        return obj
    if isinstance(obj, (int, float)):
        return ConstantFunction(float(obj))
    raise TypeError(f"cannot interpret {obj!r} as a time-dependent profile")


@dataclass(frozen=True)
class MediumProfile:
    """The three material profiles of a nonstationary linear medium.

    ``include_eps_dot`` controls whether the time derivative of the
    permittivity contributes to the damping rate alongside the conductivity.
    The default (True) keeps it; switching it off reproduces the older
    convention in which only conduction damps the mode.
    """

    permittivity: TimeFunction
    permeability: TimeFunction
    conductivity: TimeFunction
    include_eps_dot: bool = True

    @classmethod
    def constant(cls, eps: float = 1.0, mu: float = 1.0, sigma: float = 0.0, **kw) -> "MediumProfile":
        if sigma < 0:
            raise MediumError(f"conductivity must be nonnegative, got {sigma}")
        return cls(ConstantFunction(eps), ConstantFunction(mu), ConstantFunction(sigma), **kw)

    @classmethod
    def vacuum(cls, **kw) -> "MediumProfile":
        return cls.constant(1.0, 1.0, 0.0, **kw)

    def epsilon(self, t: float) -> float:
        e = self.permittivity.value(t)
        if e <= 0:
            raise MediumError(f"permittivity must be positive, got {e} at t={t}")
        return e

    def mu(self, t: float) -> float:
        m = self.permeability.value(t)
        if m <= 0:
            raise MediumError(f"permeability must be positive, got {m} at t={t}")
        return m

    def sigma(self, t: float) -> float:
        s = self.conductivity.value(t)
        if s < 0:
            raise MediumError(f"conductivity must be nonnegative, got {s} at t={t}")
        return s


@dataclass(frozen=True)
class Constants:
    """Unit system: hbar, vacuum permittivity, vacuum light speed (all default 1)."""

    hbar: float = 1.0
    eps0: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "eps0", "c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ModeSpec:
    """One spatial mode of the cavity/box: reference frequency, quantization
    volume, and (optionally) an explicit wavenumber.

    When ``wavenumber`` is omitted it is derived as omega0 / c at the point of
    use; when given it must be consistent with that relation.
    """

    omega0: float
    volume: float = 1.0
    wavenumber: float | None = None
    polarization: str = "x"

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.volume <= 0:
            raise ValueError(f"volume must be positive, got {self.volume}")
        if self.wavenumber is not None and self.wavenumber <= 0:
            raise ValueError(f"wavenumber must be positive, got {self.wavenumber}")

    def wavenumber_value(self, consts: Constants) -> float:
        expected = self.omega0 / consts.c
        if self.wavenumber is None:
            return expected
        if abs(self.wavenumber - expected) > 1e-9 * expected:
            raise ValueError(
                f"wavenumber {self.wavenumber} inconsistent with omega0/c = {expected}"
            )
        return self.wavenumber


def gamma(profile: MediumProfile, t: float) -> float:
    """Damping rate of the mode momentum: (conductivity + d/dt permittivity) / permittivity.

    With ``profile.include_eps_dot`` false the derivative term is dropped.
    """
    eps = profile.epsilon(t)
    num = profile.sigma(t)
    if profile.include_eps_dot:
        num += profile.permittivity.derivative(t)
    return num / eps


def gamma_dot(profile: MediumProfile, t: float) -> float:
    """Time derivative of :func:`gamma`, from the profile derivatives."""
    eps = profile.epsilon(t)
    deps = profile.permittivity.derivative(t)
    num = profile.sigma(t)
    dnum = profile.conductivity.derivative(t)
    if profile.include_eps_dot:
        num += deps
        dnum += profile.permittivity.second_derivative(t)
    return dnum / eps - num * deps / (eps * eps)


def lambda_accum(profile: MediumProfile, t: float, t0: float = 0.0) -> float:
    """Accumulated damping exponent: integral of :func:`gamma` from ``t0`` to ``t``.

    Adaptive quadrature; raises :class:`IntegrationWarning`-grade failures as
    :class:`MediumError` with the offending interval.
    """
    if t == t0:
        return 0.0
    with np.errstate(all="ignore"):
        val, err = quad(lambda s: gamma(profile, s), t0, t, limit=200)
    if not math.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise MediumError(
            f"damping-exponent quadrature did not converge on [{t0}, {t}] "
            f"(estimate {val}, error bound {err})"
        )
    return val


def mode_frequency(profile: MediumProfile, mode: ModeSpec, consts: Constants, t: float) -> float:
    """Instantaneous mode frequency omega0 / (c sqrt(eps * mu))."""
    eps = profile.epsilon(t)
    mu = profile.mu(t)
    return mode.omega0 / (consts.c * math.sqrt(eps * mu))


def effective_frequency_sq(profile: MediumProfile, mode: ModeSpec, consts: Constants, t: float) -> float:
    """Squared effective oscillator frequency after removing the damping term.

    Equals mode_frequency**2 - gamma_dot/2 - gamma**2/4.  May legitimately be
    negative for strong damping; callers that need a real frequency must check.
    """
    w = mode_frequency(profile, mode, consts, t)
    g = gamma(profile, t)
    gd = gamma_dot(profile, t)
    return w * w - 0.5 * gd - 0.25 * g * g


def hyperbolic_decay_medium(omega0: float = 1.0, t_max: float = 12.0,
                            n_samples: int = 4001) -> MediumProfile:
    """Lossless medium whose relative permittivity grows as (1 + omega0*t)^2.

    The mode frequency then decays as omega0/(1 + omega0*t) and the effective
    frequency obeys Omega^2 = 1/(t + 1/omega0)^2, one of the few profiles with
    a closed-form envelope.  Built from tabulated samples on purpose: it
    exercises the spline/finite-difference path of TabulatedFunction, and a
    cubic spline through a quadratic is exact, so no accuracy is lost.  The
    table extends half a period before t=0 so centered differences stay inside
    the domain at the usual start time.
    """
    if omega0 <= 0.0:
        raise ValueError(f"omega0 must be positive, got {omega0}")
    if t_max <= 0.0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    t_lo = -0.5 / omega0
    times = np.linspace(t_lo, t_max, int(n_samples))
    values = (1.0 + omega0 * times) ** 2
    eps = TabulatedFunction(times, values, order=3)
    return MediumProfile(permittivity=eps,
                         permeability=ConstantFunction(1.0),
                         conductivity=ConstantFunction(0.0))
