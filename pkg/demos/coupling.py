"""Coupled transverse widths make the width rate blow up.

With an off-diagonal entry in the inverse covariance the packet is a tilted
ellipse, and changing one width also changes the tilt. The rate for sigma1
grows like 1/(1 - rho^2)^2 and diverges as the coupling approaches the edge
of normalizability.
"""

import numpy as np

from homrate import GaussianWavePacket, rate

s1, s2 = 0.05, 0.08
print(f"{'rho':>6} {'finite diff':>14} {'closed form':>14} {'rel dev':>10}")
for rho in np.linspace(0.0, 0.95, 9):
    s12 = None if rho == 0 else s1 * s2 / rho
    wp = GaussianWavePacket(k0=(0, 0, 1.0), sigma=(s1, s2, 0.1), sigma12=s12)
    fd = rate(wp, "sigma1").value
    cf = rate(wp, "sigma1", "closed_form").value
    print(f"{rho:6.3f} {fd:14.6f} {cf:14.6f} {abs(fd / cf - 1):10.1e}")
