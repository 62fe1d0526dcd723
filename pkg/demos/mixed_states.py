"""Partially polarized photons.

A mixture cos^2(a)|psi><psi| + sin^2(a)|psi_perp><psi_perp| never reaches a
zero coincidence rate even against itself: P11 = (1 - purity)/2. Rotating
the polarization axis of one photon costs cos^2(2a), and the fully mixed
state (a = pi/4) does not notice the rotation at all. Changing the weights
instead has a non-vanishing first-order term unless a sits at 0 or pi/4.
"""

import math

import numpy as np

from homrate import PolarizedMixture, p11_mixed, polarized_case_b, purity, rate_mixed

for alpha in (0.0, math.pi / 12, math.pi / 6, math.pi / 4):
    mix = PolarizedMixture(alpha, theta=0.3)
    rho = mix.density_matrix()
    r = rate_mixed(mix.family("theta"), 0.3)
    print(f"alpha {alpha:6.4f}: purity {purity(rho):.4f}, P11 self {p11_mixed(rho, rho):.4f}, "
          f"R_theta {r.value:.6f} (cos^2 2a = {math.cos(2 * alpha) ** 2:.6f})"
          f"{', degenerate' if r.degenerate else ''}")

print()
mix = PolarizedMixture(0.4, theta=0.3)
for delta in np.linspace(0.0, math.pi / 2, 5):
    dp = p11_mixed(mix.density_matrix(), mix.family("theta")(0.3 + delta)) \
        - p11_mixed(mix.density_matrix(), mix.density_matrix())
    print(f"dtheta {delta:6.4f}: dP11 {dp:.6f}, closed form {polarized_case_b(0.4, delta):.6f}")

weights = rate_mixed(PolarizedMixture(0.3).family("alpha"), 0.3, strict=False)
print(f"\nweight variation at a = 0.3: first-order term {weights.first_order:+.4f}")
