"""Hong-Ou-Mandel coincidence probabilities and rates of distinguishability
for Gaussian single-photon wave packets and polarization mixtures."""

from .dipfit import DipCurve, fit_parabola, fit_summary, read_csv, sweep, write_csv
from .mixed import (
    DensityMatrix, MixedRateResult, PolarizedMixture, delta_p11_dof_mixed,
    delta_p11_weights, density_from_dict, first_order_term, mixed_series,
    p11_mixed, perturbation_linear_term, polarized_case_a, polarized_case_b,
    purity, rate_mixed,
)
from .overlap import (
    ENGINES, Coincidence, OverlapResult, delta_p11_exact, p11_lab, p11_pure,
    perturbation_parameters, scalar_product,
)
from .quadrature import ConvergenceError, QuadratureSpec
from .rate import (
    METHODS, FiniteDifferenceError, RateResult, delta_p11_series, rate,
    rate_closed_form, rate_derivative_form, rate_finite_difference,
)
from .wavepacket import (
    DOF_KINDS, DofSelector, GaussianWavePacket, ParaxialWarning, apply_dof,
    mean_energy_ratio, packet_from_dict, packet_to_dict, parity_invert,
    spectral_amplitude,
)

__version__ = "0.1.0"
