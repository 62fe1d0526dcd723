"""Polarization rates beyond the paraxial limit.

In the paraxial limit a rotation of the polarization angle theta costs a
rate of exactly 1. An elliptical transverse profile tilts the local
polarization basis differently along the two axes, which shifts the rate by
(sigma1^2 - sigma2^2)/(2 k0^2) cos(2 theta). The relative phase phi1 only
matters for non-trivial theta.
"""

import math

from homrate import GaussianWavePacket, rate

print(f"{'theta':>8} {'R_theta':>12} {'expansion':>12} {'R_phi1':>12} {'expansion':>12}")
for theta in (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8):
    wp = GaussianWavePacket(k0=(0, 0, 1.0), sigma=(0.1, 0.05, 0.1), theta=theta)
    cols = []
    for kind in ("theta", "phi1"):
        cols += [rate(wp, kind, engine="quadrature").value, rate(wp, kind, "closed_form").value]
    print(f"{theta:8.4f} " + " ".join(f"{v:12.8f}" for v in cols))
