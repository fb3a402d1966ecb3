"""Position-space wavefunctions attached to the ladder invariant.

The evolved vacuum is a squeezed Gaussian whose log-derivative is set by the
envelope: psi0 ~ rho^{-1/2} exp(-i phase/2) exp(C q^2 / 2) with
C = (i / (a hbar)) (deps/eps - gamma/2) and a = exp(-lam)/eps0.  Coherent
states multiply in a linear exponent, number states a normalized Hermite
ladder.  Everything is evaluated on explicit grids; the residual helpers give
back discretized operator errors rather than asserting properties.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .envelope import EnvelopeSample, EnvelopeTrajectory
from .errors import AmplitudeOverflowError, GridError
from .medium import Constants, mode_frequency
from .quadratures import InvariantCoefficients, moments_for_state
from .states import CoherentState, FockState

__all__ = [
    "WaveGrid",
    "psi_ground",
    "psi_coherent",
    "psi_fock",
    "build_wave_grid",
    "wave_norm",
    "eigen_residual",
    "schrodinger_residual",
]

# Largest exponent real part we will hand to exp(); beyond this the amplitude
# overflows double precision.
_EXP_GUARD = 700.0


@dataclass(frozen=True)
class WaveGrid:
    """A wavefunction sampled on a uniform position grid at one time."""

    q: np.ndarray
    psi: np.ndarray
    t: float
    state_kind: str
    sample: EnvelopeSample
    consts: Constants

    def __post_init__(self):
        if self.q.ndim != 1 or self.q.shape != self.psi.shape:
            raise GridError("position and wavefunction arrays must be 1-d and equal length")
        if len(self.q) < 5:
            raise GridError("wavefunction grid needs at least 5 points")

    @property
    def spacing(self) -> float:
        return float(self.q[1] - self.q[0])


def _mass_scale(sample: EnvelopeSample, consts: Constants) -> float:
    # inverse-mass factor of the damped oscillator Hamiltonian
    return math.exp(-sample.lam) / consts.eps0


def _ground_parts(sample: EnvelopeSample, consts: Constants):
    """(a, C, prefactor) with psi0(q) = prefactor * exp(C q^2 / 2)."""
    a = _mass_scale(sample, consts)
    ah = a * consts.hbar
    u = sample.deps / sample.eps - 0.5 * sample.gamma_val
    c_quad = 1j / ah * u
    pref = (math.pi * ah) ** -0.25 * sample.rho ** -0.5 \
        * cmath.exp(-0.5j * sample.phase)
    return a, c_quad, pref


def psi_ground(q, sample: EnvelopeSample, consts: Constants) -> np.ndarray:
    """Evolved-vacuum wavefunction on the position array q."""
    q = np.asarray(q, dtype=float)
    _, c_quad, pref = _ground_parts(sample, consts)
    return pref * np.exp(0.5 * c_quad * q * q)


def psi_coherent(q, sample: EnvelopeSample, consts: Constants,
                 alpha: complex) -> np.ndarray:
    """Eigenfunction of the ladder invariant with eigenvalue alpha.

    Normalization is automatic: the alpha-dependent constant in the exponent
    already makes the norm one, so no quadrature-based rescaling happens here.
    """
    q = np.asarray(q, dtype=float)
    alpha = complex(alpha)
    a, c_quad, pref = _ground_parts(sample, consts)
    c_lin = 1j * math.sqrt(2.0 / (a * consts.hbar)) * alpha / sample.eps
    c_const = (sample.eps.conjugate() / (2.0 * sample.eps)) * alpha ** 2 \
        - 0.5 * abs(alpha) ** 2
    exponent = 0.5 * c_quad * q * q + c_lin * q + c_const
    peak = float(np.max(exponent.real))
    # A normalized state peaks at exponent 0, so |peak| beyond the exp() range
    # means either a corrupted sample (overflow) or a grid that misses the
    # displaced state entirely (every amplitude underflows to zero).  Tail
    # values below the range on an otherwise healthy grid just underflow.
    if not -_EXP_GUARD <= peak <= _EXP_GUARD:
        raise AmplitudeOverflowError(
            f"wavefunction exponent peaks at {peak:.1f}, outside the "
            f"representable range +/-{_EXP_GUARD:.0f} "
            "(displacement too large for this grid)")
    return pref * np.exp(exponent)


def _hermite_ladder(x: np.ndarray, n: int) -> np.ndarray:
    """Normalized Hermite function h_n(x) with the Gaussian weight built in:
    integral h_n h_m dx = delta_nm.  Three-term recurrence keeps every level
    at unit scale, so it is stable out to large n."""
    h_prev = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n == 0:
        return h_prev
    h_cur = math.sqrt(2.0) * x * h_prev
    for k in range(1, n):
        h_next = x * math.sqrt(2.0 / (k + 1)) * h_cur \
            - math.sqrt(k / (k + 1.0)) * h_prev
        h_prev, h_cur = h_cur, h_next
    return h_cur


def psi_fock(q, n: int, sample: EnvelopeSample, consts: Constants,
             max_n: int = 50) -> np.ndarray:
    """n-th eigenfunction of the quadratic invariant at this instant."""
    if n != int(n) or n < 0:
        raise ValueError(f"level index must be a nonnegative integer, got {n}")
    if n > max_n:
        raise ValueError(f"level {n} above max_n={max_n}; raise max_n explicitly")
    q = np.asarray(q, dtype=float)
    a, c_quad, pref = _ground_parts(sample, consts)
    width = math.sqrt(a * consts.hbar) * sample.rho
    x = q / width
    # the Gaussian modulus lives inside the Hermite ladder; only the phase
    # curvature of C and the level phase -n*phase remain outside
    osc = np.exp(0.5j * c_quad.imag * q * q - 1j * n * sample.phase)
    return pref * math.pi ** 0.25 * osc * _hermite_ladder(x, int(n))


def _psi_for_state(q, sample: EnvelopeSample, consts: Constants, state) -> np.ndarray:
    if isinstance(state, CoherentState):
        return psi_coherent(q, sample, consts, state.alpha)
    if isinstance(state, FockState):
        return psi_fock(q, state.n, sample, consts, max_n=max(50, state.n))
    raise TypeError(f"unsupported state {state!r}")


def build_wave_grid(sample: EnvelopeSample, consts: Constants, state,
                    npoints: int = 2048, span_sigmas: float = 10.0) -> WaveGrid:
    """Uniform grid centered on the mean position, wide enough that the
    neglected tails are far below roundoff.  span_sigmas is the half-width in
    position standard deviations and must keep the full span at least eight
    sigmas."""
    if span_sigmas < 4.0:
        raise GridError(f"span of {2 * span_sigmas} sigmas is below the minimum of 8")
    if npoints < 5:
        raise GridError("need at least 5 grid points")
    rec = moments_for_state(sample, consts, state)
    sigma = math.sqrt(rec.var_q)
    q = np.linspace(rec.mean_q - span_sigmas * sigma,
                    rec.mean_q + span_sigmas * sigma, int(npoints))
    psi = _psi_for_state(q, sample, consts, state)
    return WaveGrid(q=q, psi=psi, t=sample.t, state_kind=state.kind,
                    sample=sample, consts=consts)


def wave_norm(grid: WaveGrid) -> float:
    """Simpson-rule norm integral of |psi|^2 over the grid."""
    return float(simpson(np.abs(grid.psi) ** 2, x=grid.q))


def _check_resolution(grid: WaveGrid, extra_k: float = 0.0):
    """Raise GridError when the spacing undersamples the local oscillation.

    The local wavenumber is bounded by |Im C| * |q|_max plus any linear-phase
    contribution passed in extra_k, plus the envelope scale 1/width; we demand
    ten points per shortest wavelength."""
    a, c_quad, _ = _ground_parts(grid.sample, grid.consts)
    width = math.sqrt(a * grid.consts.hbar) * grid.sample.rho
    qmax = float(np.max(np.abs(grid.q)))
    kmax = abs(c_quad.imag) * qmax + abs(extra_k) + 1.0 / width
    h = grid.spacing
    if h * kmax > math.pi / 5.0:
        raise GridError(
            f"grid spacing {h:.3g} gives fewer than 10 points per local "
            f"wavelength {2 * math.pi / kmax:.3g}")


def eigen_residual(grid: WaveGrid, coeffs: InvariantCoefficients,
                   alpha: complex) -> float:
    """Discretized |(A - alpha) psi| / max|psi| on the interior of the grid.

    The ladder invariant acts as A = (mu q + i hbar nu d/dq) / (i hbar); the
    derivative uses the five-point fourth-order stencil, so the residual of an
    exact eigenfunction scales as h^4.
    """
    alpha = complex(alpha)
    psi = grid.psi
    q = grid.q
    h = grid.spacing
    extra_k = 0.0
    if grid.state_kind == "coherent":
        a_scale = _mass_scale(grid.sample, grid.consts)
        extra_k = abs((math.sqrt(2.0 / (a_scale * grid.consts.hbar))
                       * alpha / grid.sample.eps).real)
    _check_resolution(grid, extra_k=extra_k)
    dpsi = (-psi[4:] + 8.0 * psi[3:-1] - 8.0 * psi[1:-3] + psi[:-4]) / (12.0 * h)
    inner = slice(2, len(q) - 2)
    apsi = coeffs.mu * q[inner] * psi[inner] / (1j * coeffs.hbar) + coeffs.nu * dpsi
    res = np.abs(apsi - alpha * psi[inner])
    return float(np.max(res) / np.max(np.abs(psi)))


def schrodinger_residual(traj: EnvelopeTrajectory, consts: Constants, state,
                         t: float, h_t: float, npoints: int = 2048,
                         span_sigmas: float = 8.0) -> float:
    """Max-norm defect of i hbar d(psi)/dt = H psi at time t.

    H is the damped-oscillator Hamiltonian (a/2) p^2 + (omega^2 / 2a) q^2 with
    a = exp(-lam)/eps0.  The time derivative is a centered difference over
    trajectory samples at t +/- h_t (which must exist in the trajectory), the
    second position derivative a fourth-order stencil, so the residual of an
    exact solution shrinks as h_t^2.
    """
    if traj.profile is None or traj.mode is None:
        raise ValueError("trajectory must carry its medium and mode to evaluate H")
    s_minus = traj.sample_at(t - h_t)
    s_mid = traj.sample_at(t)
    s_plus = traj.sample_at(t + h_t)
    grid = build_wave_grid(s_mid, consts, state, npoints=npoints,
                           span_sigmas=span_sigmas)
    q, psi = grid.q, grid.psi
    h = grid.spacing
    psi_minus = _psi_for_state(q, s_minus, consts, state)
    psi_plus = _psi_for_state(q, s_plus, consts, state)
    dpsi_dt = (psi_plus - psi_minus) / (2.0 * h_t)
    d2 = (-psi[4:] + 16.0 * psi[3:-1] - 30.0 * psi[2:-2]
          + 16.0 * psi[1:-3] - psi[:-4]) / (12.0 * h * h)
    inner = slice(2, len(q) - 2)
    a = _mass_scale(s_mid, consts)
    w = mode_frequency(traj.profile, traj.mode, consts, t)
    h_psi = -0.5 * a * consts.hbar ** 2 * d2 \
        + 0.5 * (w * w / a) * q[inner] ** 2 * psi[inner]
    res = np.abs(1j * consts.hbar * dpsi_dt[inner] - h_psi)
    return float(np.max(res) / np.max(np.abs(psi)))
