"""Quantized field modes in nonstationary linear media.

The pipeline: describe the medium (permittivity, permeability, conductivity as
functions of time), integrate the complex envelope of the mode oscillator,
then read off ladder-invariant coefficients, quadrature and field moments,
photon statistics, energies, and position-space wavefunctions — each with a
numerical residual that says how well the claimed identities actually hold.
"""

from .errors import (
    AmplitudeOverflowError,
    ConfigError,
    GridError,
    IntegrationError,
    MediumError,
    NonstatqError,
    ProfileDomainError,
    WronskianError,
)
from .medium import (
    ConstantFunction,
    Constants,
    ExponentialFunction,
    LinearRampFunction,
    MediumProfile,
    ModeSpec,
    SinusoidalFunction,
    TabulatedFunction,
    TimeFunction,
    effective_frequency_sq,
    gamma,
    gamma_dot,
    hyperbolic_decay_medium,
    lambda_accum,
    mode_frequency,
)
from .states import CoherentState, FockState
from .envelope import (
    DampedEnvelope,
    EnvelopeSample,
    EnvelopeTrajectory,
    damped_envelope_transform,
    damped_equation_residual,
    ermakov_residual,
    glauber_initial_conditions,
    hyperbolic_decay_envelope,
    integrate_envelope,
    stationary_envelope,
    wronskian,
    wronskian_drift,
)
from .quadratures import (
    ChoiYeonSeries,
    InvariantCoefficients,
    MomentRecord,
    PhotonStatistics,
    SqueezeReport,
    choi_yeon_params,
    fock_quadrature_moments,
    invariant_coefficients,
    moments_for_state,
    photon_statistics,
    photon_statistics_oracle,
    quadrature_moments,
    rs_residual,
    squeeze_report,
)
from .field import (
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
from .wavefunction import (
    WaveGrid,
    build_wave_grid,
    eigen_residual,
    psi_coherent,
    psi_fock,
    psi_ground,
    schrodinger_residual,
    wave_norm,
)
from .cli import ScenarioConfig, parse_scenario, run_scenario, check_suite

__version__ = "0.1.0"
