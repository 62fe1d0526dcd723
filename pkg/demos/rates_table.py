"""Rates of distinguishability for a single Gaussian packet.

Each degree of freedom gets its rate three ways: the closed form, the
curvature of the coincidence probability, and the norm of the derivative of
the wave function. Shifting the central wave vector or the width of the
packet is cheap along narrow axes and expensive along wide ones; positions
behave the other way round, and the products R_k0n * R_r0n stay at 1/4.
"""

from homrate import GaussianWavePacket, rate

packet = GaussianWavePacket(k0=(0.0, 0.0, 1.0), sigma=(0.05, 0.08, 0.1))

print(f"{'dof':>7} {'closed form':>14} {'finite diff':>14} {'derivative':>14}")
for kind in [f"{p}{n}" for n in (1, 2, 3) for p in ("k0", "sigma", "r0")]:
    row = [rate(packet, kind, m).value
           for m in ("closed_form", "finite_difference", "derivative_form")]
    print(f"{kind:>7} " + " ".join(f"{v:14.8g}" for v in row))

print()
for n in (1, 2, 3):
    prod = rate(packet, f"k0{n}").value * rate(packet, f"r0{n}").value
    print(f"R_k0{n} * R_r0{n} = {prod:.12f}")
