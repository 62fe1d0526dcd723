import math

import numpy as np
import pytest

from homrate import (
    DOF_KINDS, GaussianWavePacket, apply_dof, delta_p11_series, rate, rate_closed_form,
    rate_derivative_form, rate_finite_difference,
)
from homrate.rate import fd_step, natural_scale, second_derivative, taylor_coefficients
from homrate.wavepacket import amplitudes, self_rule

from conftest import random_packet

# One-dimensional Gaussian overlaps worked by hand with |γ|² of variance σ²/2:
# |(ψ, ψ_k0+δ)|² = exp(-δ²/2σ²) and |(ψ, ψ_r0+δ)|² = exp(-σ²δ²/2)
SIGMA3 = 2.0
R_R03 = SIGMA3 ** 2 / 2  # 2.0
R_K03 = 1 / (2 * SIGMA3 ** 2)  # 0.125
# coupled widths: 1/(2σ²(1-ρ²)²) at σ = 1, ρ = 1/2
R_SIGMA1_RHO_HALF = 8.0 / 9.0


def _wide():
    return GaussianWavePacket(k0=(0, 0, 10.0), sigma=(1.0, 1.0, SIGMA3))


def test_unit_oracles_by_finite_difference():
    wp = _wide()
    assert rate_finite_difference(wp, "r03").value == pytest.approx(R_R03, rel=1e-8)
    assert rate_finite_difference(wp, "k03").value == pytest.approx(R_K03, rel=1e-8)
    assert rate_closed_form(wp, "r03").value == R_R03
    assert rate_closed_form(wp, "k03").value == R_K03


def test_coupled_width_oracle():
    wp = GaussianWavePacket(k0=(0, 0, 10.0), sigma=(1.0, 1.0, 1.0), sigma12=2.0)
    assert wp.rho == pytest.approx(0.5)
    assert rate_closed_form(wp, "sigma1").value == pytest.approx(R_SIGMA1_RHO_HALF, rel=1e-15)
    assert rate_finite_difference(wp, "sigma1").value == pytest.approx(R_SIGMA1_RHO_HALF, rel=1e-7)


def test_phase_rate_vanishes_for_linear_polarization():
    wp = GaussianWavePacket(k0=(0, 0, 1.0), sigma=(0.05, 0.08, 0.1), theta=0.0)
    assert rate_closed_form(wp, "phi1").value == 0.0
    assert abs(rate_finite_difference(wp, "phi1").value) < 1e-12


def test_theta_rate_paraxial_limit():
    wp = GaussianWavePacket(k0=(0, 0, 1.0), sigma=(1e-3, 2e-3, 1e-3), theta=0.3)
    assert rate_finite_difference(wp, "theta").value == pytest.approx(1.0, abs=1e-5)


def test_closed_form_refusals():
    coupled = GaussianWavePacket(k0=(0, 0, 1.0), sigma=(0.05, 0.08, 0.1), sigma12=0.01)
    for kind in ("sigma12", "sigma3", "k01", "r02", "theta"):
        with pytest.raises(ValueError):
            rate_closed_form(coupled, kind)
    tilted = GaussianWavePacket(k0=(0.1, 0, 1.0), sigma=(0.05, 0.08, 0.1))
    with pytest.raises(ValueError):
        rate_closed_form(tilted, "theta")
    with pytest.raises(ValueError):
        rate(tilted, "theta", "no_such_method")


def test_position_derivative_is_purely_imaginary(reference_packet):
    # ψ' = -i q₃ ψ for f = r03, so (ψ, ψ') is imaginary and (ψ', ψ') = <q₃²>
    k, w = self_rule(reference_packet, 40)
    psi = amplitudes(reference_packet, k)
    h = 1e-4
    plus = amplitudes(apply_dof(reference_packet, "r03", h), k)
    minus = amplitudes(apply_dof(reference_packet, "r03", -h), k)
    dpsi = (plus - minus) / (2 * h)
    pd = complex(np.sum(w[:, None] * psi * dpsi.conj()))
    assert abs(pd.real) < 1e-10
    res = rate_derivative_form(reference_packet, "r03")
    assert res.norm_derivative == pytest.approx(0.1 ** 2 / 2, rel=1e-6)


@pytest.mark.parametrize("kind", DOF_KINDS)
def test_derivative_form_matches_finite_difference(kind):
    wp = GaussianWavePacket(k0=(0.02, -0.01, 1.0), sigma=(0.05, 0.08, 0.1), sigma12=0.02,
                            r0=(0.5, -1.0, 2.0), theta=0.4, phi1=0.3, phi2=1.1)
    fd = rate_finite_difference(wp, kind).value
    df = rate_derivative_form(wp, kind).value
    floor = 1e-6 / natural_scale(wp, kind) ** 2
    assert abs(fd - df) <= 1e-3 * abs(fd) + floor


def test_non_negative_and_scaling_covariance(rng):
    for _ in range(4):
        wp = random_packet(rng, coupled=False)
        for kind in ("k01", "sigma2", "r03", "theta"):
            assert rate_finite_difference(wp, kind).value >= 0
        # R_r scales as σ², so halving every width quarters it
        wide = GaussianWavePacket(k0=wp.k0, sigma=tuple(0.5 * s for s in wp.sigma), r0=wp.r0)
        ratio = rate_finite_difference(wp, "r02").value / rate_finite_difference(wide, "r02").value
        assert ratio == pytest.approx(4.0, rel=1e-6)


def test_uncertainty_products(rng):
    for _ in range(3):
        wp = random_packet(rng, coupled=False)
        for n in (1, 2, 3):
            prod = (rate_finite_difference(wp, f"k0{n}").value
                    * rate_finite_difference(wp, f"r0{n}").value)
            assert prod == pytest.approx(0.25, rel=1e-6)


def test_coupled_width_rate_grows_with_coupling():
    values = []
    for rho in np.linspace(0.0, 0.95, 8):
        s12 = None if rho == 0 else 0.05 * 0.08 / rho
        wp = GaussianWavePacket(k0=(0, 0, 1.0), sigma=(0.05, 0.08, 0.1), sigma12=s12)
        values.append(rate_finite_difference(wp, "sigma1").value)
        assert values[-1] == pytest.approx(rate_closed_form(wp, "sigma1").value, rel=1e-6)
    assert np.all(np.diff(values) > 0)


def test_series_coefficients(reference_packet):
    c = delta_p11_series(reference_packet, "k02")
    assert abs(c[0]) < 1e-8
    assert c[1] == pytest.approx(rate_closed_form(reference_packet, "k02").value / 2, rel=1e-3)
    # exp(-δ²/2σ²) expansion has no cubic term and a quartic -1/(16σ⁴)
    assert abs(c[2]) < 1e-3 * abs(c[3])
    assert c[3] == pytest.approx(-1 / (16 * 0.08 ** 4), rel=1e-3)


def test_taylor_coefficients_polynomial_oracle():
    coef = taylor_coefficients(lambda d: 1 + 2 * d - 3 * d ** 2 + 0.5 * d ** 4, 0.1, 4)
    np.testing.assert_allclose(coef, [1, 2, -3, 0, 0.5], atol=1e-10)
    for bad in (0, 5):
        with pytest.raises(ValueError):
            taylor_coefficients(math.cos, 0.1, bad)


def test_second_derivative_of_known_function():
    value, err = second_derivative(math.cos, 2.0 ** -4, 1.0)
    assert value == pytest.approx(-1.0, abs=1e-10)
    assert abs(value + 1.0) <= err < 1e-7


def test_fd_step_is_power_of_two(reference_packet):
    for kind in DOF_KINDS:
        if kind == "sigma12":
            with pytest.raises(ValueError):
                fd_step(reference_packet, kind)
            continue
        h = fd_step(reference_packet, kind, order=6)
        assert h == 2.0 ** round(math.log2(h))


def test_quadrature_engine_table_cell(reference_packet):
    res = rate_finite_difference(reference_packet, "sigma3", "quadrature")
    assert res.value == pytest.approx(1 / (2 * 0.1 ** 2), rel=1e-3)
    assert res.error_estimate < 1e-3 * res.value
