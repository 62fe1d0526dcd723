"""Acceptance suite: one PASS/FAIL line per criterion.

Run with pytest (lines are repeated in the terminal summary) or directly:
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

from homrate import (  # noqa: E402
    DensityMatrix, GaussianWavePacket, ParaxialWarning, PolarizedMixture, apply_dof,
    delta_p11_dof_mixed, delta_p11_exact, fit_parabola, p11_mixed, p11_pure,
    perturbation_parameters, polarized_case_a, polarized_case_b, rate_closed_form,
    rate_finite_difference, sweep,
)
from homrate.dipfit import DipCurve  # noqa: E402
from homrate.mixed import first_order_term  # noqa: E402
from homrate.rate import natural_scale  # noqa: E402
from homrate.wavepacket import DOF_KINDS  # noqa: E402

from conftest import ACCEPTANCE_LINES, random_packet  # noqa: E402

TABLE1 = GaussianWavePacket(k0=(0, 0, 1.0), sigma=(0.05, 0.08, 0.1))
TABLE1_KINDS = [f"{p}{n}" for n in (1, 2, 3) for p in ("k0", "sigma", "r0")]


def _report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def _expected_table1(kind):
    s = TABLE1.sigma[int(kind[-1]) - 1]
    return s * s / 2 if kind.startswith("r0") else 1 / (2 * s * s)


def test_criterion_1_table_of_rates():
    worst = {}
    start = time.perf_counter()
    for engine in ("analytic", "quadrature"):
        worst[engine] = max(
            abs(rate_finite_difference(TABLE1, k, engine).value / _expected_table1(k) - 1)
            for k in TABLE1_KINDS)
    elapsed = time.perf_counter() - start
    ok = worst["analytic"] <= 1e-6 and worst["quadrature"] <= 1e-3 and elapsed < 10
    _report(1, ok, f"max rel err analytic {worst['analytic']:.1e} (tol 1e-6), "
                   f"quadrature {worst['quadrature']:.1e} (tol 1e-3), {elapsed:.1f} s (< 10 s)")


def test_criterion_2_uncertainty_products():
    closed, fd = 0.0, 0.0
    for n in (1, 2, 3):
        cf = rate_closed_form(TABLE1, f"k0{n}").value * rate_closed_form(TABLE1, f"r0{n}").value
        closed = max(closed, abs(cf - 0.25))
        prod = (rate_finite_difference(TABLE1, f"k0{n}").value
                * rate_finite_difference(TABLE1, f"r0{n}").value)
        fd = max(fd, abs(prod / 0.25 - 1))
    ok = closed == 0.0 and fd <= 1e-5
    _report(2, ok, f"closed-form |R_k R_r - 1/4| = {closed:.1e} (exact), "
                   f"finite-difference rel err {fd:.1e} (tol 1e-5)")


def test_criterion_3_coupled_width_rate():
    values, worst = [], 0.0
    for rho in (0.0, 0.3, 0.6, 0.9):
        s12 = None if rho == 0 else 0.05 * 0.08 / rho
        wp = GaussianWavePacket(k0=(0, 0, 1.0), sigma=(0.05, 0.08, 0.1), sigma12=s12)
        r = rate_finite_difference(wp, "sigma1").value
        expected = 1 / (2 * 0.05 ** 2 * (1 - rho ** 2) ** 2)
        worst = max(worst, abs(r / expected - 1))
        values.append(r)
    increasing = all(b > a for a, b in zip(values, values[1:]))
    ok = worst <= 1e-4 and increasing
    _report(3, ok, f"max rel err {worst:.1e} (tol 1e-4), strictly increasing: {increasing}")


def _polarization_packet(theta):
    return GaussianWavePacket(k0=(0, 0, 1.0), sigma=(0.1, 0.05, 0.1), theta=theta)


def test_criterion_4_polarization_rates():
    worst = 0.0
    for theta in (math.pi / 8, math.pi / 4, 3 * math.pi / 8):
        wp = _polarization_packet(theta)
        for kind in ("theta", "phi1"):
            r = rate_finite_difference(wp, kind, "quadrature").value
            worst = max(worst, abs(r - rate_closed_form(wp, kind).value))
    at_zero = abs(rate_finite_difference(_polarization_packet(0.0), "phi1", "quadrature").value)
    ok = worst <= 5e-4 and at_zero <= 1e-8
    _report(4, ok, f"max abs residual {worst:.1e} (tol 5e-4), R_phi1 at theta = 0: "
                   f"{at_zero:.1e} (tol 1e-8)")


def test_criterion_5_dip_curves():
    s3 = TABLE1.sigma[2]
    k_curve = sweep(TABLE1, "k03", -4 * s3, 4 * s3, 201)
    oracle = (1 - np.exp(-k_curve.delta_f ** 2 / (2 * s3 ** 2))) / 2
    pointwise = float(np.max(np.abs(k_curve.p11 - oracle)))
    expected = 1 / (2 * s3 ** 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParaxialWarning)
        s_curve = sweep(TABLE1, "sigma3", -0.8 * s3, 2 * s3, 201)
    fits = {kind: fit_parabola(c).curvature / expected - 1
            for kind, c in (("k03", k_curve), ("sigma3", s_curve))}
    ok = pointwise <= 1e-6 and all(abs(v) <= 0.01 for v in fits.values())
    _report(5, ok, f"k03 curve max dev {pointwise:.1e} (tol 1e-6), auto-window fit rel err "
                   f"k03 {fits['k03']:+.2%}, sigma3 {fits['sigma3']:+.2%} (tol 1%)")


def test_criterion_6_mixed_closed_forms():
    rng = np.random.default_rng(34)
    worst = 0.0
    for _ in range(100):
        alpha, theta = rng.uniform(0, math.pi, 2)
        delta = rng.uniform(-1, 1)
        mix = PolarizedMixture(alpha, theta, rng.uniform(0, 2 * math.pi))
        worst = max(
            worst,
            abs(delta_p11_dof_mixed(mix.family("alpha"), alpha, delta)
                - polarized_case_a(alpha, delta)),
            abs(delta_p11_dof_mixed(mix.family("theta"), theta, delta)
                - polarized_case_b(alpha, delta)))
    unpolarized = max(
        abs(delta_p11_dof_mixed(PolarizedMixture(math.pi / 4, t).family("theta"), t, d))
        for t, d in rng.uniform(-1, 1, (20, 2)))
    exact = all(
        p11_mixed(DensityMatrix.maximally_mixed(n), DensityMatrix.maximally_mixed(n))
        == (1 - 1 / n) / 2 for n in (2, 3, 4, 8))
    ok = worst <= 1e-12 and unpolarized <= 1e-12 and exact
    _report(6, ok, f"closed forms vs traces {worst:.1e} (tol 1e-12), alpha = pi/4 "
                   f"{unpolarized:.1e} (tol 1e-12), maximally mixed exact: {exact}")


def test_criterion_7_first_order_vanishes():
    rng = np.random.default_rng(28)
    worst = 0.0
    for _ in range(20):
        alpha, theta, phi = rng.uniform(0, math.pi, 3)
        fam = PolarizedMixture(alpha, theta, phi).family("theta")
        worst = max(worst, abs(first_order_term(fam, theta)))
    mix = PolarizedMixture(0.3, 0.7, 0.2)
    grid = np.linspace(-0.05, 0.05, 101)
    dip = np.array([delta_p11_dof_mixed(mix.family("theta"), 0.7, d) for d in grid])
    curve = DipCurve("theta", grid, dip, np.full(grid.size, 1e-16))
    linear = abs(fit_parabola(curve, window=0.05).b)
    ok = worst <= 1e-8 and linear <= 1e-8
    _report(7, ok, f"max |Tr[rho drho/dtheta]| {worst:.1e} (tol 1e-8), fitted linear "
                   f"coefficient {linear:.1e} (tol 1e-8)")


def test_criterion_8_exact_variation():
    rng = np.random.default_rng(2)
    worst, done = 0.0, 0
    while done < 200:
        wp = random_packet(rng)
        kind = DOF_KINDS[rng.integers(len(DOF_KINDS))]
        try:
            shifted = apply_dof(wp, kind, rng.uniform(-1, 1) * natural_scale(wp, kind))
        except ValueError:
            continue
        d, alpha = perturbation_parameters(wp, shifted)
        worst = max(worst, abs(delta_p11_exact(d, alpha) - p11_pure(wp, shifted).probability))
        done += 1
    _report(8, worst <= 1e-12, f"max |exact formula - direct| {worst:.1e} over 200 triples "
                               f"(tol 1e-12)")


def test_criterion_9_engine_equivalence():
    rng = np.random.default_rng(9)
    worst_ratio, worst_diff = 0.0, 0.0
    for i in range(100):
        a = random_packet(rng, smax=0.15)
        if i % 2:
            b = random_packet(rng, smax=0.15)
        else:
            kind = DOF_KINDS[rng.integers(len(DOF_KINDS))]
            try:
                b = apply_dof(a, kind, rng.normal() * natural_scale(a, kind))
            except ValueError:
                b = random_packet(rng, smax=0.15)
        pa, pq = p11_pure(a, b), p11_pure(a, b, "quadrature")
        diff = abs(pa.probability - pq.probability)
        tol = max(1e-4, pa.error_estimate, pq.error_estimate)
        worst_ratio = max(worst_ratio, diff / tol)
        worst_diff = max(worst_diff, diff)
    _report(9, worst_ratio <= 1.0, f"max |analytic - quadrature| {worst_diff:.1e} over 100 "
                                   f"pairs, worst fraction of tolerance {worst_ratio:.2f}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
