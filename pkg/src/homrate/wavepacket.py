"""Gaussian single-photon wave packets.

A photon is described by the spectral amplitude

    ψ_s(k) = ε_s(k) γ(k - k0),    s = 1, 2,

where γ is a normalized complex Gaussian in wave-vector space and ε_s is the
normalized projection of a uniform Jones vector ``p`` onto the transverse
polarization basis attached to ``k``. Natural units (ħ = c = 1) are used
throughout; lengths are measured in the inverse units of ``k0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .quadrature import ConvergenceError, QuadratureSpec, gaussian_rule

DOF_KINDS = (
    "k01", "k02", "k03",
    "sigma1", "sigma2", "sigma3", "sigma12",
    "r01", "r02", "r03",
    "theta", "phi1", "phi2",
)

#: packets wider than this fraction of |k0| trigger a ParaxialWarning
PARAXIAL_WARN = 0.3
#: distance from the polar axis (in units of |k|) below which the basis is singular
AXIS_TOL = 1e-12

_MIRROR = np.diag([-1.0, 1.0, 1.0])


class ParaxialWarning(UserWarning):
    """The packet is broad compared to its central wavenumber."""


def _vec3(value, name):
    arr = tuple(float(x) for x in value)
    if len(arr) != 3:
        raise ValueError(f"{name} must have 3 components, got {len(arr)}")
    if not all(math.isfinite(x) for x in arr):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class GaussianWavePacket:
    """Parameters of one Gaussian photon.

    ``sigma12`` couples the 1 and 2 wave-vector axes through the off-diagonal
    entry ``-1/sigma12`` of the inverse covariance ``V``; ``None`` means
    uncoupled. ``mirrored`` marks a packet produced by :func:`parity_invert`,
    whose polarization projection is taken at the reflected wave vector.
    """

    k0: tuple = (0.0, 0.0, 1.0)
    sigma: tuple = (0.05, 0.05, 0.05)
    sigma12: float | None = None
    r0: tuple = (0.0, 0.0, 0.0)
    theta: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0
    mirrored: bool = False

    def __post_init__(self):
        object.__setattr__(self, "k0", _vec3(self.k0, "k0"))
        object.__setattr__(self, "sigma", _vec3(self.sigma, "sigma"))
        object.__setattr__(self, "r0", _vec3(self.r0, "r0"))
        for name in ("theta", "phi1", "phi2"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "mirrored", bool(self.mirrored))

        kmag = self.k0_norm
        for i, s in enumerate(self.sigma, start=1):
            if not s > 0:
                raise ValueError(f"sigma{i} must be positive, got {s}")
            if s >= kmag:
                raise ValueError(
                    f"sigma{i} = {s} is not below |k0| = {kmag}; "
                    "the packet is neither collimated nor quasi-monochromatic")
        if max(self.sigma) > PARAXIAL_WARN * kmag:
            warnings.warn(
                f"max(sigma)/|k0| = {max(self.sigma) / kmag:.3g} exceeds "
                f"{PARAXIAL_WARN}; paraxial expansions degrade",
                ParaxialWarning, stacklevel=3)

        if self.sigma12 is not None:
            s12 = float(self.sigma12)
            if not math.isfinite(s12):
                raise ValueError("sigma12 must be finite or None")
            s1, s2 = self.sigma[0], self.sigma[1]
            if not s12 * s12 > (s1 * s2) ** 2:
                raise ValueError(
                    f"sigma12 = {s12} violates sigma12^2 > sigma1^2 sigma2^2 "
                    "(inverse covariance not positive definite)")
            object.__setattr__(self, "sigma12", s12)

    @property
    def k0_norm(self) -> float:
        return math.sqrt(sum(x * x for x in self.k0))

    @property
    def rho(self) -> float:
        """Coupling coefficient σ1σ2/σ12 (0 when uncoupled)."""
        if self.sigma12 is None:
            return 0.0
        return self.sigma[0] * self.sigma[1] / self.sigma12

    @property
    def inverse_covariance(self) -> np.ndarray:
        v = np.diag([1.0 / s ** 2 for s in self.sigma])
        if self.sigma12 is not None:
            v[0, 1] = v[1, 0] = -1.0 / self.sigma12
        return v

    @property
    def jones(self) -> np.ndarray:
        """Jones vector p = (cosϑ e^{iφ1}, sinϑ e^{iφ2}, 0)."""
        return np.array([
            math.cos(self.theta) * np.exp(1j * self.phi1),
            math.sin(self.theta) * np.exp(1j * self.phi2),
            0.0,
        ])

    def value(self, kind: str) -> float:
        kind = dof_kind(kind)
        if kind[0] in "kr":
            vec = self.k0 if kind[0] == "k" else self.r0
            return vec[int(kind[-1]) - 1]
        if kind == "sigma12":
            if self.sigma12 is None:
                raise ValueError("sigma12 is undefined for an uncoupled packet")
            return self.sigma12
        if kind.startswith("sigma"):
            return self.sigma[int(kind[-1]) - 1]
        return getattr(self, kind)


@dataclass(frozen=True)
class DofSelector:
    """One real parameter of a packet, and its current value."""

    kind: str
    value: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", dof_kind(self.kind))

    @classmethod
    def of(cls, wp: GaussianWavePacket, kind: str) -> "DofSelector":
        return cls(kind, wp.value(kind))


def dof_kind(f) -> str:
    kind = f.kind if isinstance(f, DofSelector) else str(f)
    if kind not in DOF_KINDS:
        raise ValueError(f"unknown degree of freedom {kind!r}; expected one of {DOF_KINDS}")
    return kind


def apply_dof(wp: GaussianWavePacket, f, delta: float) -> GaussianWavePacket:
    """Return ``wp`` with the selected parameter shifted by ``delta``.

    Raises ValueError if the shifted packet is invalid (non-positive width,
    loss of positive definiteness, ...).
    """
    kind = dof_kind(f)
    delta = float(delta)
    if delta == 0.0:
        return wp
    if kind[0] in "kr":
        name = "k0" if kind[0] == "k" else "r0"
        vec = list(getattr(wp, name))
        vec[int(kind[-1]) - 1] += delta
        return replace(wp, **{name: tuple(vec)})
    if kind == "sigma12":
        return replace(wp, sigma12=wp.value("sigma12") + delta)
    if kind.startswith("sigma"):
        sig = list(wp.sigma)
        sig[int(kind[-1]) - 1] += delta
        return replace(wp, sigma=tuple(sig))
    return replace(wp, **{kind: getattr(wp, kind) + delta})


def parity_invert(wp: GaussianWavePacket) -> GaussianWavePacket:
    """Reflect the packet through the plane normal to axis 1.

    The result's spectral amplitude at ``k`` equals the original's at
    ``(-k1, k2, k3)``: k01, r01 and sigma12 change sign and the polarization
    projection is evaluated at the reflected wave vector. The Jones vector
    itself is left untouched.
    """
    k0 = (-wp.k0[0], wp.k0[1], wp.k0[2])
    r0 = (-wp.r0[0], wp.r0[1], wp.r0[2])
    s12 = None if wp.sigma12 is None else -wp.sigma12
    return replace(wp, k0=k0, r0=r0, sigma12=s12, mirrored=not wp.mirrored)


def scalar_amplitude(wp: GaussianWavePacket, q) -> np.ndarray:
    """Normalized Gaussian γ(q) = det(V)^{1/4} π^{-3/4} exp(-i q·r0 - q·Vq/2)."""
    q = np.asarray(q, dtype=float)
    v = wp.inverse_covariance
    norm = np.linalg.det(v) ** 0.25 / math.pi ** 0.75
    quad = np.einsum("...i,ij,...j->...", q, v, q)
    return norm * np.exp(-1j * (q @ np.asarray(wp.r0)) - 0.5 * quad)


def polarization_basis(k) -> tuple[np.ndarray, np.ndarray]:
    """Spherical transverse basis (θ̂, φ̂) with polar axis 3.

    On the polar axis the azimuth defaults to 0, i.e. e1 -> ±x̂, e2 -> ŷ.
    """
    k = np.asarray(k, dtype=float)
    rho = np.hypot(k[..., 0], k[..., 1])
    kmag = np.hypot(rho, k[..., 2])
    on_axis = rho == 0.0
    safe = np.where(on_axis, 1.0, rho)
    cp = np.where(on_axis, 1.0, k[..., 0] / safe)
    sp = np.where(on_axis, 0.0, k[..., 1] / safe)
    ct, st = k[..., 2] / kmag, rho / kmag
    e1 = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e2 = np.stack([-sp, cp, np.zeros_like(cp)], axis=-1)
    return e1, e2


def polarization_factors(p, k) -> np.ndarray:
    """ε_s(k) = e_s(k)·p / sqrt(1 - |p·k̂|²), shape (..., 2)."""
    k = np.asarray(k, dtype=float)
    e1, e2 = polarization_basis(k)
    khat = k / np.linalg.norm(k, axis=-1, keepdims=True)
    proj = np.abs(khat @ p) ** 2
    norm = np.sqrt(1.0 - proj)
    return np.stack([e1 @ p, e2 @ p], axis=-1) / norm[..., None]


def amplitudes(wp: GaussianWavePacket, k) -> np.ndarray:
    """ψ_s(k) for both helicity indices, vectorized over leading axes of ``k``."""
    k = np.asarray(k, dtype=float)
    kpol = k @ _MIRROR if wp.mirrored else k
    gamma = scalar_amplitude(wp, k - np.asarray(wp.k0))
    return polarization_factors(wp.jones, kpol) * gamma[..., None]


def spectral_amplitude(wp: GaussianWavePacket, k, s: int) -> complex:
    """ψ_s(k) at a single wave vector; ``s`` is 1 or 2."""
    if s not in (1, 2):
        raise ValueError("helicity index s must be 1 or 2")
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise ValueError("k must be a 3-vector")
    kmag = float(np.linalg.norm(k))
    if kmag == 0.0:
        raise ValueError("the polarization basis is undefined at k = 0")
    if math.hypot(k[0], k[1]) <= AXIS_TOL * kmag:
        raise ValueError("k is parallel to the polar axis; the spherical basis is singular there")
    return complex(amplitudes(wp, k)[s - 1])


def self_rule(wp: GaussianWavePacket, n: int):
    """Quadrature nodes matched to |γ|² of a single packet."""
    return gaussian_rule(wp.k0, np.linalg.inv(2.0 * wp.inverse_covariance), n)


def norm_squared(wp: GaussianWavePacket, quad: QuadratureSpec | None = None) -> float:
    """Σ_s ∫ |ψ_s|² d³k by brute-force quadrature."""
    quad = quad or QuadratureSpec()
    k, w = self_rule(wp, quad.nodes_per_axis)
    return float(np.sum(w * np.sum(np.abs(amplitudes(wp, k)) ** 2, axis=-1)))


def mean_energy_ratio(wp: GaussianWavePacket, quad: QuadratureSpec | None = None) -> float:
    """Mean photon energy over ħω0, i.e. ⟨|k|⟩ / |k0| under |γ|²."""
    quad = quad or QuadratureSpec()
    values = []
    for n in quad.resolutions():
        k, w = self_rule(wp, n)
        dens = np.abs(scalar_amplitude(wp, k - np.asarray(wp.k0))) ** 2
        values.append(float(np.sum(w * dens * np.linalg.norm(k, axis=-1))) / wp.k0_norm)
    err = abs(values[0] - values[-1])
    if err > quad.atol:
        raise ConvergenceError(f"energy quadrature unsettled (error {err:.2e})", err)
    return values[0]


def packet_from_dict(data: Mapping) -> GaussianWavePacket:
    """Build a packet from the JSON descriptor.

    Required keys: k0, sigma, r0, theta, phi1, phi2; ``sigma12`` is optional
    (null means uncoupled).
    """
    required = ("k0", "sigma", "r0", "theta", "phi1", "phi2")
    missing = [key for key in required if key not in data]
    if missing:
        raise ValueError(f"packet descriptor is missing {missing}")
    unknown = set(data) - set(required) - {"sigma12", "mirrored"}
    if unknown:
        raise ValueError(f"packet descriptor has unknown keys {sorted(unknown)}")
    return GaussianWavePacket(
        k0=data["k0"], sigma=data["sigma"], sigma12=data.get("sigma12"),
        r0=data["r0"], theta=data["theta"], phi1=data["phi1"], phi2=data["phi2"],
        mirrored=data.get("mirrored", False),
    )


def packet_to_dict(wp: GaussianWavePacket) -> dict:
    out = {
        "k0": list(wp.k0), "sigma": list(wp.sigma), "sigma12": wp.sigma12,
        "r0": list(wp.r0), "theta": wp.theta, "phi1": wp.phi1, "phi2": wp.phi2,
    }
    if wp.mirrored:
        out["mirrored"] = True
    return out
