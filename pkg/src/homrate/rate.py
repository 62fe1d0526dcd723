"""Rate of distinguishability R_f: the curvature of the HOM dip in one parameter.

Three independent routes are provided:

* :func:`rate_finite_difference` differentiates P₁,₁[ψ(f), ψ(f+δf)] twice
  in δf (5-point stencil + Richardson extrapolation);
* :func:`rate_derivative_form` evaluates (ψ', ψ') - |(ψ, ψ')|² with ψ'
  obtained by differencing the wave function itself on a fixed quadrature
  grid;
* :func:`rate_closed_form` returns the closed forms for Gaussian packets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .overlap import p11_pure
from .quadrature import ConvergenceError, QuadratureSpec
from .wavepacket import (
    GaussianWavePacket, amplitudes, apply_dof, dof_kind, self_rule,
)

METHODS = ("closed_form", "finite_difference", "derivative_form")

_EPS = np.finfo(float).eps
# 5-point central stencil for the second derivative, offsets -2..2
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
# 4-point central stencil for the first derivative, offsets -2..2
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


class FiniteDifferenceError(ConvergenceError):
    """Richardson levels disagree beyond the expected truncation error."""


@dataclass(frozen=True)
class RateResult:
    value: float
    method: str
    f_kind: str
    error_estimate: float
    norm_derivative: float | None = None  # ‖ψ'‖², derivative_form only


def natural_scale(wp: GaussianWavePacket, f) -> float:
    """Parameter shift over which the photons become distinguishable."""
    kind = dof_kind(f)
    if kind[0] == "k":
        return wp.sigma[int(kind[-1]) - 1]
    if kind.startswith("sigma") and kind != "sigma12":
        n = int(kind[-1])
        if n == 3:
            return wp.sigma[2]
        # the packet stops being normalizable once |rho| reaches 1
        rho = abs(wp.rho)
        return wp.sigma[n - 1] * (1.0 - rho) / (1.0 + rho)
    if kind[0] == "r":
        n = int(kind[-1]) - 1
        return 1.0 / math.sqrt(np.linalg.inv(wp.inverse_covariance)[n, n])
    if kind == "sigma12":
        rho = abs(wp.rho)
        return abs(wp.value("sigma12")) * (1.0 - rho) / (2.0 * (1.0 + rho))
    return 1.0


def fd_step(wp: GaussianWavePacket, f, order: int = 2, relative: bool = True) -> float:
    """Finite-difference step ``max(|f|, scale) · ε^{1/(order+2)}``.

    ``order`` is the truncation order of the derivative estimate, 6 for the
    Richardson-extrapolated second derivative. With ``relative=False`` the
    step ignores |f|, which suits quantities free of cancellation in f.
    Rounded to a power of two so that halved offsets stay exact shifts of
    the parameter value.
    """
    kind = dof_kind(f)
    scale = natural_scale(wp, kind)
    if kind == "sigma12" or not relative:
        base = scale
    else:
        base = max(abs(wp.value(kind)), scale)
    return 2.0 ** round(math.log2(base * _EPS ** (1.0 / (order + 2))))


def _exact_step(x: float, h: float) -> float:
    # representable shift, so that (x + h) - x == h
    return (x + h) - x


def _stencil_d2(func: Callable[[float], float], h: float):
    vals = np.array([func(j * h) for j in (-2, -1, 0, 1, 2)])
    return float(_D2 @ vals) / h ** 2, vals


def second_derivative(func: Callable[[float], float], h: float, scale: float,
                      noise: float = 0.0, f_kind: str = "") -> tuple[float, float]:
    """Second derivative of ``func`` at 0 with one Richardson level.

    ``noise`` is the absolute error of each function value. Returns the
    extrapolated value and an error estimate; raises
    :class:`FiniteDifferenceError` if the two step sizes disagree by more
    than ten times the expected truncation plus noise error.
    """
    d_h, vals = _stencil_d2(func, h)
    d_h2, vals2 = _stencil_d2(func, h / 2)
    value = (16.0 * d_h2 - d_h) / 15.0
    spread = abs(d_h2 - d_h)
    amp = max(np.max(np.abs(vals)), np.max(np.abs(vals2)))
    noise_err = np.sum(np.abs(_D2)) * (4.0 * _EPS * amp + noise) / (h / 2) ** 2
    expected = abs(value) * (h / scale) ** 4 + noise_err
    if spread > 10.0 * expected + 1e-300:
        raise FiniteDifferenceError(
            f"Richardson levels for {f_kind or 'f'} disagree: {d_h!r} vs {d_h2!r}", spread)
    return float(value), float(spread / 15.0 + noise_err)


def _p11_curve(wp, kind, engine, quad):
    x0 = wp.value(kind)

    def curve(delta):
        return p11_pure(wp, apply_dof(wp, kind, delta), engine, quad)
    return x0, curve


def rate_finite_difference(wp: GaussianWavePacket, f, engine: str = "analytic",
                           quad: QuadratureSpec | None = None) -> RateResult:
    """R_f as the second derivative of the coincidence probability at δf = 0."""
    kind = dof_kind(f)
    x0 = wp.value(kind)
    h = _exact_step(x0, fd_step(wp, kind, order=6, relative=False))
    if engine == "quadrature":
        quad = quad or QuadratureSpec()
        # resolution check once, at the widest stencil point
        p11_pure(wp, apply_dof(wp, kind, _exact_step(x0, 2 * h)), engine, quad)
        quad = QuadratureSpec(quad.nodes_per_axis, None, quad.atol)
    _, curve = _p11_curve(wp, kind, engine, quad)
    cache = {}
    for j in (-4, -2, -1, 0, 1, 2, 4):
        cache[j] = curve(_exact_step(x0, j * h / 2))
    noise = max(c.rounding for c in cache.values())
    scale = natural_scale(wp, kind)
    value, err = second_derivative(lambda d: cache[round(2 * d / h)].probability,
                                   h, scale, noise, kind)
    # engine bias is smooth in δf and bends the curve on the natural scale
    bias = max(c.error_estimate for c in cache.values()) / scale ** 2
    return RateResult(value, "finite_difference", kind, err + bias)


def rate_derivative_form(wp: GaussianWavePacket, f,
                         quad: QuadratureSpec | None = None) -> RateResult:
    """R_f = (ψ', ψ') - |(ψ, ψ')|² with ψ' from central differences of ψ."""
    kind = dof_kind(f)
    quad = quad or QuadratureSpec()
    x0 = wp.value(kind)
    h = _exact_step(x0, fd_step(wp, kind, order=1))
    shifted = [apply_dof(wp, kind, _exact_step(x0, j * h)) for j in (-2, -1, 1, 2)]

    results = []
    for n in quad.resolutions():
        k, w = self_rule(wp, n)
        psi = amplitudes(wp, k)
        vals = [amplitudes(s, k) for s in shifted]
        dpsi = (_D1[0] * vals[0] + _D1[1] * vals[1] + _D1[3] * vals[2] + _D1[4] * vals[3]) / h
        w = w[:, None]
        dd = float(np.sum(w * np.abs(dpsi) ** 2))
        pd = complex(np.sum(w * psi * dpsi.conj()))
        results.append((dd - abs(pd) ** 2, dd))
    value, dd = results[0]
    err = abs(results[-1][0] - value) + 64 * _EPS * dd
    if len(results) > 1 and abs(results[1][0] - value) > quad.atol * max(1.0, dd):
        raise ConvergenceError(f"derivative-form quadrature for {kind} unsettled", err)
    return RateResult(value, "derivative_form", kind, err, norm_derivative=dd)


def rate_closed_form(wp: GaussianWavePacket, f) -> RateResult:
    """Closed-form rates for Gaussian packets.

    Uncoupled packets: k0n and sigma_n -> 1/(2σ_n²), r0n -> σ_n²/2, theta and
    phi_n -> second-order paraxial expansions. Coupled packets (sigma12 set):
    only sigma1 and sigma2, via 1/(2σ_n²(1-ρ²)²). Everything else raises
    ValueError.
    """
    kind = dof_kind(f)
    coupled = wp.sigma12 is not None
    if kind == "sigma12":
        raise ValueError("no closed form is available for f = sigma12")
    if coupled and kind not in ("sigma1", "sigma2"):
        raise ValueError(f"no closed form is available for {kind} on a coupled packet")
    if kind[0] in "ks":
        n = int(kind[-1])
        s = wp.sigma[n - 1]
        return RateResult(1.0 / (2.0 * s * s * (1.0 - wp.rho ** 2) ** 2), "closed_form", kind, 0.0)
    if kind[0] == "r":
        s = wp.sigma[int(kind[-1]) - 1]
        return RateResult(s * s / 2.0, "closed_form", kind, 0.0)

    if abs(wp.k0[0]) + abs(wp.k0[1]) > 1e-12 * wp.k0_norm:
        raise ValueError("polarization closed forms assume k0 along axis 3")
    s1, s2 = wp.sigma[0], wp.sigma[1]
    k0 = wp.k0_norm
    correction = 1.0 + (s1 ** 2 - s2 ** 2) / (2.0 * k0 ** 2) * math.cos(2.0 * wp.theta)
    err = (max(s1, s2) / k0) ** 4
    if kind == "theta":
        return RateResult(correction, "closed_form", kind, err)
    return RateResult(math.sin(2.0 * wp.theta) ** 2 / 4.0 * correction, "closed_form", kind, err)


def rate(wp: GaussianWavePacket, f, method: str = "finite_difference",
         engine: str = "analytic", quad: QuadratureSpec | None = None) -> RateResult:
    if method == "closed_form":
        return rate_closed_form(wp, f)
    if method == "finite_difference":
        return rate_finite_difference(wp, f, engine, quad)
    if method == "derivative_form":
        return rate_derivative_form(wp, f, quad)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def taylor_coefficients(func: Callable[[float], float], h: float, max_order: int,
                        extra: int = 3) -> np.ndarray:
    """Coefficients c_0..c_max_order of ``func(δ) ≈ Σ c_n δ^n``.

    Least-squares polynomial fit of degree ``max_order + extra`` on the
    symmetric stencil δ = j·h, |j| <= max_order + extra + 1. The extra
    degrees absorb higher-order terms so the reported ones are not aliased.
    """
    if not 1 <= max_order <= 4:
        raise ValueError("max_order must be between 1 and 4")
    degree = max_order + extra
    m = degree + 1
    x = np.arange(-m, m + 1, dtype=float)
    y = np.array([func(j * h) for j in x])
    design = np.vander(x / m, degree + 1, increasing=True)
    cond = np.linalg.cond(design)
    if cond > 1e10:
        raise FiniteDifferenceError(f"ill-conditioned Taylor fit (cond {cond:.2e})")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef[: max_order + 1] / (m * h) ** np.arange(max_order + 1)


def delta_p11_series(wp: GaussianWavePacket, f, max_order: int = 4,
                     engine: str = "analytic", quad: QuadratureSpec | None = None,
                     step: float | None = None) -> np.ndarray:
    """Taylor coefficients [c_1, ..., c_max_order] of δf ↦ ΔP₁,₁.

    Note c_2 = R_f / 2 since R_f is the second derivative.
    """
    kind = dof_kind(f)
    x0, curve = _p11_curve(wp, kind, engine, quad)
    h = step if step is not None else 0.01 * natural_scale(wp, kind)
    coef = taylor_coefficients(lambda d: curve(_exact_step(x0, d)).probability, h, max_order)
    return coef[1:]
