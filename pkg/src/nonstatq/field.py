"""One-mode plane-wave electric/magnetic field moments and mean energies.

Everything here is a closed form in the envelope sample; position enters only
through k*x phase offsets.  Field operators inherit the damping factor
exp(-lam/2), so all first moments carry exp(-lam/2) and all second moments
exp(-lam).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .envelope import EnvelopeSample
from .medium import Constants, MediumProfile, ModeSpec, mode_frequency
from .quadratures import fock_quadrature_moments, quadrature_moments

__all__ = [
    "FieldMoments",
    "field_first_moments",
    "field_second_moments",
    "field_moments",
    "field_rs_residual",
    "EnergyReport",
    "energy_terms",
    "mean_energy_coherent",
    "mean_energy_fock",
]


@dataclass(frozen=True)
class FieldMoments:
    """E/B statistics at one (t, x).  comm_EB stores the real scale of the
    c-number commutator expectation i*comm_EB = <[E, B]>."""

    t: float
    x: float
    mean_e: float
    mean_b: float
    var_e: float
    var_b: float
    cov_eb: float
    comm_eb: float

    @property
    def rs_residual(self) -> float:
        return self.var_e * self.var_b - self.cov_eb ** 2 - 0.25 * self.comm_eb ** 2


def field_first_moments(sample: EnvelopeSample, mode: ModeSpec, consts: Constants,
                        alpha: complex, x: float = 0.0,
                        half_lambda: bool = False) -> tuple[float, float]:
    """Mean electric and magnetic field in the evolved coherent state.

    half_lambda switches the damping-rate coefficient of the E-mean from the
    plain gamma*rho to gamma*rho/2 (the variant that matches the second-moment
    conventions); both are kept because either normalization appears in use.
    """
    alpha = complex(alpha)
    mag = abs(alpha)
    if mag == 0.0:
        return 0.0, 0.0
    theta = cmath.phase(alpha)
    k = mode.wavenumber_value(consts)
    damp = math.exp(-0.5 * sample.lam)
    rho, drho, phi = sample.rho, sample.drho, sample.phase
    gr = sample.gamma_val * rho
    if half_lambda:
        gr *= 0.5
    scale_e = math.sqrt(consts.hbar / (2.0 * consts.eps0 * mode.volume))
    mean_e = scale_e * damp * mag * (
        (gr - drho) * math.cos(k * x + phi + theta)
        - math.sin(k * x - phi + theta) / rho
    )
    scale_b = k * math.sqrt(2.0 * consts.hbar / (consts.eps0 * mode.volume))
    mean_b = -scale_b * damp * mag * rho * math.sin(k * x + phi + theta)
    return mean_e, mean_b


def field_second_moments(sample: EnvelopeSample, mode: ModeSpec,
                         consts: Constants) -> FieldMoments:
    """Variances, covariance and commutator scale of (E, B); independent of the
    coherent displacement, so no alpha argument.

    The covariance and commutator both come from the single complex number
    z = gamma|eps|^2/2 - deps*conj(eps) = -(deps - gamma*eps/2)*conj(eps):
    cov = -k*pref*Im(z), comm = -2k*pref*Re(z).  The factor 2 on the commutator
    is what closes var_e*var_b - cov^2 = comm^2/4 exactly, since
    |z|^2 = Re(z)^2 + Im(z)^2 reproduces the variance product.
    """
    k = mode.wavenumber_value(consts)
    pref = consts.hbar / (2.0 * consts.eps0 * mode.volume) * math.exp(-sample.lam)
    eps, deps, g = sample.eps, sample.deps, sample.gamma_val
    damped_rate = deps - 0.5 * g * eps
    z = 0.5 * g * abs(eps) ** 2 - deps * eps.conjugate()
    var_e = pref * abs(damped_rate) ** 2
    var_b = k * k * pref * sample.rho ** 2
    cov_eb = -k * pref * z.imag
    comm_eb = -2.0 * k * pref * z.real
    return FieldMoments(t=sample.t, x=0.0, mean_e=0.0, mean_b=0.0,
                        var_e=var_e, var_b=var_b, cov_eb=cov_eb, comm_eb=comm_eb)


def field_moments(sample: EnvelopeSample, mode: ModeSpec, consts: Constants,
                  alpha: complex = 0.0, x: float = 0.0,
                  half_lambda: bool = False) -> FieldMoments:
    """Complete field moment record at one (t, x) for a coherent state."""
    second = field_second_moments(sample, mode, consts)
    mean_e, mean_b = field_first_moments(sample, mode, consts, alpha, x,
                                         half_lambda=half_lambda)
    return FieldMoments(t=sample.t, x=x, mean_e=mean_e, mean_b=mean_b,
                        var_e=second.var_e, var_b=second.var_b,
                        cov_eb=second.cov_eb, comm_eb=second.comm_eb)


def field_rs_residual(fm: FieldMoments) -> float:
    """var_e*var_b - cov^2 - comm^2/4; zero to roundoff on valid samples (the
    evolved coherent states saturate the E-B Robertson-Schrodinger relation)."""
    return fm.rs_residual


@dataclass(frozen=True)
class EnergyReport:
    """Mean field energy by two routes.

    w_printed uses the quadratic-envelope closed form (a_tilde, c_tilde);
    w_oracle is the moment-path value (eps/2)[a^2 e^... kinetic + potential]
    assembled from the quadrature moments, which reduces to the textbook
    hbar*omega*(n + 1/2) limits.  The two disagree by state-dependent factors
    (the closed form undercounts the |alpha|^2 and n terms); the discrepancy is
    reported, never silently reconciled.
    """

    t: float
    state_label: str
    a_tilde: complex
    c_tilde: float
    w_printed: float
    w_oracle: float

    @property
    def discrepancy(self) -> float:
        return self.w_printed - self.w_oracle


def energy_terms(sample: EnvelopeSample, profile: MediumProfile, mode: ModeSpec,
                 consts: Constants) -> tuple[complex, float]:
    """Quadratic envelope combinations (a_tilde, c_tilde) entering the mean
    energy: a_tilde = -(hbar/2 eps0)(eps^2 + (deps - gamma eps/2)^2),
    c_tilde = (hbar/4 eps0)(omega^2 |eps|^2 + |deps - gamma eps/2|^2)."""
    w = mode_frequency(profile, mode, consts, sample.t)
    damped_rate = sample.deps - 0.5 * sample.gamma_val * sample.eps
    a_tilde = -consts.hbar / (2.0 * consts.eps0) * (sample.eps ** 2 + damped_rate ** 2)
    c_tilde = consts.hbar / (4.0 * consts.eps0) * (
        w * w * sample.rho ** 2 + abs(damped_rate) ** 2)
    return a_tilde, c_tilde


def _oracle_energy(rec, sample, profile, mode, consts) -> float:
    # <W> = (eps_dim/2)[(exp(-2 lam)/eps0^2) <p^2> + omega^2 <q^2>]
    eps_dim = consts.eps0 * profile.epsilon(sample.t)
    w = mode_frequency(profile, mode, consts, sample.t)
    kin = math.exp(-2.0 * sample.lam) / consts.eps0 ** 2 \
        * (rec.var_p + rec.mean_p ** 2)
    pot = w * w * (rec.var_q + rec.mean_q ** 2)
    return 0.5 * eps_dim * (kin + pot)


def mean_energy_coherent(sample: EnvelopeSample, profile: MediumProfile,
                         mode: ModeSpec, consts: Constants,
                         alpha: complex) -> EnergyReport:
    alpha = complex(alpha)
    a_tilde, c_tilde = energy_terms(sample, profile, mode, consts)
    eps_dim = consts.eps0 * profile.epsilon(sample.t)
    damp = math.exp(-sample.lam)
    printed = 0.5 * eps_dim * damp * (
        (a_tilde.conjugate() * alpha ** 2 + a_tilde * alpha.conjugate() ** 2).real
        + c_tilde * abs(alpha) ** 2 + 2.0 * c_tilde)
    rec = quadrature_moments(sample, consts, alpha)
    oracle = _oracle_energy(rec, sample, profile, mode, consts)
    return EnergyReport(t=sample.t, state_label=f"coherent(alpha={alpha})",
                        a_tilde=a_tilde, c_tilde=c_tilde,
                        w_printed=printed, w_oracle=oracle)


def mean_energy_fock(sample: EnvelopeSample, profile: MediumProfile,
                     mode: ModeSpec, consts: Constants, n: int) -> EnergyReport:
    if n < 0 or n != int(n):
        raise ValueError(f"photon number must be a nonnegative integer, got {n}")
    a_tilde, c_tilde = energy_terms(sample, profile, mode, consts)
    eps_dim = consts.eps0 * profile.epsilon(sample.t)
    printed = eps_dim * math.exp(-sample.lam) * (1.0 + 0.5 * n) * c_tilde
    rec = fock_quadrature_moments(sample, consts, n)
    oracle = _oracle_energy(rec, sample, profile, mode, consts)
    return EnergyReport(t=sample.t, state_label=f"fock(n={n})",
                        a_tilde=a_tilde, c_tilde=c_tilde,
                        w_printed=printed, w_oracle=oracle)
