"""Ladder-operator invariant and the statistics it generates.

The annihilation-type invariant of the damped mode is A = (mu*q - nu*p)/(i*hbar)
with envelope-built coefficients

    nu = -i sqrt(hbar/2 eps0) * eps * exp(-lam/2)
    mu = -i sqrt(hbar eps0/2) * (deps - gamma*eps/2) * exp(+lam/2)

so that q = nu*A^dag + conj(nu)*A and p likewise with mu.  States that start as
ordinary coherent/number states stay eigenstates of A / A^dag A, which turns
every moment below into a closed form in (eps, deps, lam, gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import EnvelopeSample, EnvelopeTrajectory, wronskian_drift
from .errors import GridError, WronskianError
from .medium import Constants
from .states import CoherentState, FockState

__all__ = [
    "InvariantCoefficients",
    "invariant_coefficients",
    "MomentRecord",
    "quadrature_moments",
    "fock_quadrature_moments",
    "moments_for_state",
    "rs_residual",
    "SqueezeReport",
    "squeeze_report",
    "PhotonStatistics",
    "photon_statistics",
    "photon_statistics_oracle",
    "ChoiYeonSeries",
    "choi_yeon_params",
]


def _nu_mu(sample: EnvelopeSample, consts: Constants) -> tuple[complex, complex]:
    nu = -1j * math.sqrt(consts.hbar / (2.0 * consts.eps0)) * sample.eps \
        * math.exp(-0.5 * sample.lam)
    mu = -1j * math.sqrt(consts.hbar * consts.eps0 / 2.0) \
        * (sample.deps - 0.5 * sample.gamma_val * sample.eps) * math.exp(0.5 * sample.lam)
    return nu, mu


@dataclass(frozen=True)
class InvariantCoefficients:
    """Position/momentum coefficients (nu, mu) of the invariant plus the Yuen
    pair (u, v) of A = u*a + v*a_dag over the reference-frequency photon
    operators a, a_dag."""

    t: float
    nu: complex
    mu: complex
    u: complex
    v: complex
    hbar: float = 1.0

    @property
    def pairing_residual(self) -> float:
        """|conj(nu)*mu - nu*conj(mu) - i*hbar|: canonical-pair preservation."""
        return abs(self.nu.conjugate() * self.mu - self.nu * self.mu.conjugate()
                   - 1j * self.hbar)

    @property
    def bogoliubov_residual(self) -> float:
        """Defect of |u|^2 - |v|^2 = 1."""
        return abs(abs(self.u) ** 2 - abs(self.v) ** 2 - 1.0)


def invariant_coefficients(sample: EnvelopeSample, consts: Constants, omega0: float,
                           wronskian_tol: float = 1e-6) -> InvariantCoefficients:
    """Build (nu, mu, u, v) at one envelope sample.

    omega0 fixes the reference photon operators: a is the annihilation operator
    of the static oscillator at omega0, with zero-point widths
    s = sqrt(hbar/2 eps0 omega0) in q and sqrt(hbar eps0 omega0/2) in p.
    Raises WronskianError when the sample is off the -2i branch (the result
    would not be a canonical pair).
    """
    if omega0 <= 0:
        raise ValueError(f"reference frequency must be positive, got {omega0}")
    drift = wronskian_drift(sample)
    if drift > wronskian_tol:
        raise WronskianError(
            f"sample at t={sample.t} violates the Wronskian normalization "
            f"(drift {drift:.3g} > {wronskian_tol:.3g})"
        )
    nu, mu = _nu_mu(sample, consts)
    s = math.sqrt(consts.hbar / (2.0 * consts.eps0 * omega0))
    p = math.sqrt(consts.hbar * consts.eps0 * omega0 / 2.0)
    ih = 1j * consts.hbar
    u = (mu * s + 1j * nu * p) / ih
    v = (mu * s - 1j * nu * p) / ih
    return InvariantCoefficients(t=sample.t, nu=nu, mu=mu, u=u, v=v, hbar=consts.hbar)


@dataclass(frozen=True)
class MomentRecord:
    """First and second moments of the conjugate pair (q, p) at one instant,
    with the two sides of the Robertson-Schrodinger identity.

    rs_rhs holds the value the state saturates: hbar^2/4 for evolved coherent
    states (the minimum-uncertainty bound itself) and (2n+1)^2 hbar^2/4 for the
    evolved n-quantum state, so rs_lhs - rs_rhs vanishes on valid samples for
    both families."""

    t: float
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    cov_qp: float
    rs_lhs: float
    rs_rhs: float


def _second_moments(sample: EnvelopeSample, consts: Constants) -> tuple[float, float, float]:
    # var_q = (hbar a/2) rho^2, var_p = (hbar/2a)[rho^-2 + (drho - gamma rho/2)^2],
    # cov = -(hbar/2) rho (drho - gamma rho/2), with a = exp(-lam)/eps0.
    a = math.exp(-sample.lam) / consts.eps0
    rho = sample.rho
    slope = sample.drho - 0.5 * sample.gamma_val * rho
    var_q = 0.5 * consts.hbar * a * rho * rho
    var_p = 0.5 * consts.hbar / a * (rho ** -2 + slope * slope)
    cov = -0.5 * consts.hbar * rho * slope
    return var_q, var_p, cov


def quadrature_moments(sample: EnvelopeSample, consts: Constants,
                       alpha: complex) -> MomentRecord:
    """Moments of q and p in the evolved coherent state of eigenvalue alpha.

    The product var_q*var_p - cov^2 equals hbar^2/4 identically (the evolved
    coherent states saturate the Robertson-Schrodinger relation), so rs_lhs and
    rs_rhs agree to roundoff for every valid sample.
    """
    alpha = complex(alpha)
    nu, mu = _nu_mu(sample, consts)
    var_q, var_p, cov = _second_moments(sample, consts)
    mean_q = 2.0 * (nu * alpha.conjugate()).real
    mean_p = 2.0 * (mu * alpha.conjugate()).real
    return MomentRecord(t=sample.t, mean_q=mean_q, mean_p=mean_p,
                        var_q=var_q, var_p=var_p, cov_qp=cov,
                        rs_lhs=var_q * var_p - cov * cov,
                        rs_rhs=0.25 * consts.hbar ** 2)


def fock_quadrature_moments(sample: EnvelopeSample, consts: Constants,
                            n: int) -> MomentRecord:
    """Moments of q and p in the evolved n-quantum state: zero means, second
    central moments (2n+1) times the coherent-state ones."""
    if n < 0 or n != int(n):
        raise ValueError(f"photon number must be a nonnegative integer, got {n}")
    factor = 2 * int(n) + 1
    var_q, var_p, cov = _second_moments(sample, consts)
    var_q *= factor
    var_p *= factor
    cov *= factor
    return MomentRecord(t=sample.t, mean_q=0.0, mean_p=0.0,
                        var_q=var_q, var_p=var_p, cov_qp=cov,
                        rs_lhs=var_q * var_p - cov * cov,
                        rs_rhs=factor * factor * 0.25 * consts.hbar ** 2)


def moments_for_state(sample: EnvelopeSample, consts: Constants, state) -> MomentRecord:
    if isinstance(state, CoherentState):
        return quadrature_moments(sample, consts, state.alpha)
    if isinstance(state, FockState):
        return fock_quadrature_moments(sample, consts, state.n)
    raise TypeError(f"unsupported state {state!r}")


def rs_residual(rec: MomentRecord) -> float:
    """rs_lhs - rs_rhs: the defect of the state's saturated
    Robertson-Schrodinger value; zero to roundoff on Wronskian-valid samples."""
    return rec.rs_lhs - rec.rs_rhs


@dataclass(frozen=True)
class SqueezeReport:
    """Dimensionless quadrature variances 0.5|u -/+ v|^2 in reference-frequency
    units; either dropping below the vacuum value 1/2 signals squeezing."""

    delta_q_sq: float
    delta_p_sq: float

    @property
    def uncertainty_product(self) -> float:
        return self.delta_q_sq * self.delta_p_sq

    @property
    def squeezed(self) -> bool:
        return self.delta_q_sq < 0.5 or self.delta_p_sq < 0.5


def squeeze_report(coeffs: InvariantCoefficients) -> SqueezeReport:
    return SqueezeReport(delta_q_sq=0.5 * abs(coeffs.u - coeffs.v) ** 2,
                         delta_p_sq=0.5 * abs(coeffs.u + coeffs.v) ** 2)


@dataclass(frozen=True)
class PhotonStatistics:
    """Photon-number mean/variance over the reference-frequency number operator
    and the Mandel parameter (NaN when the mean vanishes)."""

    mean_n: float
    var_n: float
    mandel_q: float


def photon_statistics(coeffs: InvariantCoefficients, state) -> PhotonStatistics:
    """Exact photon statistics of an evolved coherent or number state.

    Inverting A = u*a + v*a_dag gives a = conj(u)*A - v*A_dag; normal-ordered
    expectations in the A-eigenstates then reduce to the displaced-Gaussian
    closed form (coherent) or to a three-line ladder expansion (Fock).
    Accepts a bare complex amplitude as shorthand for a coherent state.
    """
    nn = abs(coeffs.v) ** 2
    if isinstance(state, FockState):
        n = state.n
        mean = n + (2 * n + 1) * nn
        var = 2.0 * abs(coeffs.u * coeffs.v) ** 2 * (n * n + n + 1)
    else:
        alpha = complex(state.alpha if isinstance(state, CoherentState) else state)
        beta = coeffs.u.conjugate() * alpha - coeffs.v * alpha.conjugate()
        m_anom = -coeffs.u.conjugate() * coeffs.v
        b2 = abs(beta) ** 2
        mean = b2 + nn
        var = (b2 * (1.0 + 2.0 * nn)
               + 2.0 * ((beta.conjugate() ** 2) * m_anom).real
               + nn * (nn + 1.0) + abs(m_anom) ** 2)
    q = (var - mean) / mean if mean > 0.0 else float("nan")
    return PhotonStatistics(mean_n=mean, var_n=var, mandel_q=q)


@dataclass(frozen=True)
class ChoiYeonSeries:
    """Phase/amplitude parametrization (gamma, M) on the trajectory grid and the
    finite-difference defects of its governing pair of equations.

    gamma is the unwrapped envelope phase (so dgamma/dt = rho^-2) and
    M = m0 * (rho/rho(0)) * exp(-(lam - lam(0))/2); only the log-derivative of M
    is physical, the scale m0 is free.  residual_gamma checks
    gamma'' + gamma'(Gamma + 2 M'/M) = 0 and residual_m checks
    M'' - M(gamma'^2 - omega^2) + M' Gamma = 0; endpoints are NaN.
    """

    t: np.ndarray
    gamma_phase: np.ndarray
    big_m: np.ndarray
    residual_gamma: np.ndarray
    residual_m: np.ndarray

    @property
    def max_residual(self) -> float:
        rg = np.nanmax(np.abs(self.residual_gamma))
        rm = np.nanmax(np.abs(self.residual_m))
        return float(max(rg, rm))


def choi_yeon_params(traj: EnvelopeTrajectory, m0: float = 1.0) -> ChoiYeonSeries:
    """Map a trajectory to (gamma, M) and verify their equations of motion by
    central differences on the (uniform) trajectory grid."""
    if m0 <= 0:
        raise ValueError(f"m0 must be positive, got {m0}")
    if traj.profile is None or traj.mode is None or traj.consts is None:
        raise ValueError("trajectory carries no medium; mode frequency unavailable")
    if len(traj) < 3:
        raise GridError("need at least three samples for finite-difference residuals")
    from .medium import mode_frequency

    t = traj.times()
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise GridError("Choi-Yeon residuals expect a uniform grid")
    h = float(h[0])

    gam = np.array([s.phase for s in traj])
    rho = np.array([s.rho for s in traj])
    lam = np.array([s.lam for s in traj])
    big_m = m0 * (rho / rho[0]) * np.exp(-0.5 * (lam - lam[0]))

    gd = (gam[2:] - gam[:-2]) / (2.0 * h)
    gdd = (gam[2:] - 2.0 * gam[1:-1] + gam[:-2]) / (h * h)
    md = (big_m[2:] - big_m[:-2]) / (2.0 * h)
    mdd = (big_m[2:] - 2.0 * big_m[1:-1] + big_m[:-2]) / (h * h)

    gval = np.array([s.gamma_val for s in traj])[1:-1]
    omega = np.array([mode_frequency(traj.profile, traj.mode, traj.consts, float(tt))
                      for tt in t])[1:-1]
    m_mid = big_m[1:-1]

    res_g = np.full(t.size, np.nan)
    res_m = np.full(t.size, np.nan)
    res_g[1:-1] = gdd + gd * (gval + 2.0 * md / m_mid)
    res_m[1:-1] = mdd - m_mid * (gd ** 2 - omega ** 2) + md * gval
    return ChoiYeonSeries(t=t, gamma_phase=gam, big_m=big_m,
                          residual_gamma=res_g, residual_m=res_m)


def photon_statistics_oracle(coeffs: InvariantCoefficients, state,
                             dim: int = 256) -> PhotonStatistics:
    """Brute-force check of photon_statistics in a truncated number basis.

    Builds the invariant ladder matrix A = u*a + v*a_dag on dim levels, finds
    the requested state as a vector (kernel of A - alpha for coherent states,
    repeated A_dag ladder steps for number states), and reads the moments of
    the diagonal number operator directly.  Exists so the closed-form mean and
    variance are never trusted on their own; slow and truncation-limited
    (keep |v| and |alpha| moderate for dim=256).
    """
    if dim < 64:
        raise ValueError(f"truncated basis needs at least 64 levels, got {dim}")
    root = np.sqrt(np.arange(1, dim))
    lower = np.diag(root, k=1)          # a |n> = sqrt(n) |n-1>
    raise_op = np.diag(root, k=-1)
    a_inv = coeffs.u * lower + coeffs.v * raise_op

    if isinstance(state, CoherentState) or isinstance(state, complex) \
            or isinstance(state, (int, float)):
        alpha = state.alpha if isinstance(state, CoherentState) else complex(state)
        shifted = a_inv - alpha * np.eye(dim)
        _, _, vh = np.linalg.svd(shifted)
        vec = vh[-1].conj()
    elif isinstance(state, FockState):
        shifted = a_inv
        _, _, vh = np.linalg.svd(shifted)
        vec = vh[-1].conj()
        for _ in range(state.n):
            vec = (coeffs.u.conjugate() * raise_op + coeffs.v.conjugate() * lower) @ vec
            vec = vec / np.linalg.norm(vec)
    else:
        raise TypeError(f"unsupported state {state!r}")

    weights = np.abs(vec) ** 2
    levels = np.arange(dim)
    mean_n = float(weights @ levels)
    mean_n2 = float(weights @ levels ** 2)
    var_n = mean_n2 - mean_n ** 2
    q = (var_n - mean_n) / mean_n if mean_n > 0 else math.nan
    return PhotonStatistics(mean_n=mean_n, var_n=var_n, mandel_q=q)
