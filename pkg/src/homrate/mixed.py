"""Coincidence probabilities for photons in statistical mixtures.

States live in a finite orthonormal mode basis and are represented by their
density matrices. Two kinds of variation are distinguished:

* case a, the statistical weights change while the eigenbasis is kept
  (:func:`delta_p11_weights`);
* case b, a parameter of the modes changes while the weights are kept
  (:func:`delta_p11_dof_mixed`, :func:`rate_mixed`).

:class:`PolarizedMixture` is the exactly solvable two-mode example of a
partially polarized beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .rate import _D1, _exact_step, second_derivative, taylor_coefficients

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
FIRST_ORDER_TOL = 1e-8

_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix.

    The stored matrix is symmetrized after validation so that traces of
    products are real to working precision.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"density matrix must be square and non-empty, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix entries must be finite")
        asym = np.max(np.abs(m - m.conj().T))
        if asym > HERMITIAN_TOL:
            raise ValueError(f"density matrix is not Hermitian (deviation {asym:.2e})")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lowest = np.linalg.eigvalsh(m)[0]
        if lowest < -PSD_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lowest:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        """Projector onto the normalized ``vector``."""
        v = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("state vector must be non-zero")
        v = v / norm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        if int(n) != n or n < 1:
            raise ValueError("dimension must be a positive integer")
        return cls(np.eye(int(n)) / n)

    @classmethod
    def from_weights(cls, weights, basis=None) -> "DensityMatrix":
        """Σ_n w_n |Φ_n⟩⟨Φ_n| with the Φ_n the columns of ``basis`` (default: identity)."""
        w = _check_weights(weights)
        if basis is None:
            return cls(np.diag(w).astype(complex))
        u = np.asarray(basis, dtype=complex)
        if u.shape != (w.size, w.size):
            raise ValueError("basis must be a square matrix matching the weights")
        if np.max(np.abs(u.conj().T @ u - np.eye(w.size))) > HERMITIAN_TOL:
            raise ValueError("basis columns must be orthonormal")
        return cls((u * w) @ u.conj().T)


def _matrix(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _trace_product(a, b) -> float:
    # Tr[AB] for Hermitian A, B, without forming the product
    return float(np.real(np.sum(a * b.T)))


def purity(rho: DensityMatrix) -> float:
    """Tr[ρ²]."""
    m = _matrix(rho)
    return _trace_product(m, m)


def p11_mixed(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    """(1 - Tr[ρ_A ρ_B]) / 2."""
    a, b = _matrix(rho_a), _matrix(rho_b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return 0.5 * (1.0 - _trace_product(a, b))


@dataclass(frozen=True)
class PolarizedMixture:
    """cos²α |Ψ⟩⟨Ψ| + sin²α |Ψ⊥⟩⟨Ψ⊥| in the (x, y) polarization basis.

    |Ψ⟩ = cosϑ|x⟩ + sinϑ e^{iφ}|y⟩ and |Ψ⊥⟩ = -sinϑ e^{-iφ}|x⟩ + cosϑ|y⟩.
    """

    alpha: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "theta", "phi"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)

    def states(self) -> tuple[np.ndarray, np.ndarray]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        ph = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array([c, s * ph]), np.array([-s * ph.conjugate(), c])

    @property
    def weights(self) -> np.ndarray:
        return np.array([math.cos(self.alpha) ** 2, math.sin(self.alpha) ** 2])

    def density_matrix(self) -> DensityMatrix:
        psi, perp = self.states()
        w = self.weights
        return DensityMatrix(w[0] * np.outer(psi, psi.conj()) + w[1] * np.outer(perp, perp.conj()))

    def family(self, name: str) -> Callable[[float], DensityMatrix]:
        """f ↦ ρ with parameter ``name`` (alpha, theta or phi) set to f."""
        if name not in ("alpha", "theta", "phi"):
            raise ValueError(f"unknown mixture parameter {name!r}")
        return lambda f: PolarizedMixture(**{**self.__dict__, name: f}).density_matrix()


def polarized_case_a(alpha: float, dalpha: float) -> float:
    """ΔP₁,₁ when α -> α + δα: ¼ sin δα [sin δα + sin(4α + δα)]."""
    return 0.25 * math.sin(dalpha) * (math.sin(dalpha) + math.sin(4.0 * alpha + dalpha))


def polarized_case_b(alpha: float, dtheta: float) -> float:
    """ΔP₁,₁ when ϑ -> ϑ + δϑ: ½ cos²2α sin²δϑ."""
    return 0.5 * math.cos(2.0 * alpha) ** 2 * math.sin(dtheta) ** 2


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0 or not np.all(np.isfinite(w)):
        raise ValueError("weights must be a non-empty finite vector")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if abs(w.sum() - 1.0) > TRACE_TOL:
        raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
    return w


def delta_p11_weights(weights, dw, max_order: int | None = None) -> float:
    """ΔP₁,₁ when the weights change to (w + δw)/(1 + Σδw) in a fixed eigenbasis.

    With ``max_order=None`` the exact change is returned. Otherwise the
    perturbation series ½ Σ δw_n (Tr ρ² - w_n) [1 - Σδw + (Σδw)² - ...] is
    summed through total order ``max_order`` in δw.
    """
    w = _check_weights(weights)
    d = np.asarray(dw, dtype=float).ravel()
    if d.shape != w.shape or not np.all(np.isfinite(d)):
        raise ValueError("dw must be a finite vector matching the weights")
    total = d.sum()
    if not 1.0 + total > 0:
        raise ValueError("1 + sum(dw) must be positive")
    if np.any(w + d < 0):
        raise ValueError("perturbed weights must be non-negative")
    lead = 0.5 * float(np.dot(d, np.dot(w, w) - w))
    if max_order is None:
        return lead / (1.0 + total)
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    return lead * sum((-total) ** j for j in range(max_order))


def delta_p11_dof_mixed(family: Callable[[float], DensityMatrix], f0: float, df: float) -> float:
    """Exact P₁,₁[ρ(f0), ρ(f0+df)] - P₁,₁[ρ(f0), ρ(f0)].

    Evaluated as -½ Tr[ρ δρ] with δρ formed entrywise, which avoids the
    cancellation between the two probabilities. Raises ValueError if
    Tr[δρ] departs from 0 by more than 1e-12.
    """
    rho = _matrix(family(f0))
    drho = _matrix(family(f0 + _exact_step(f0, df))) - rho
    tr = np.trace(drho).real
    if abs(tr) > TRACE_TOL:
        raise ValueError(f"family does not preserve the trace (Tr δρ = {tr:.2e})")
    return -0.5 * _trace_product(rho, drho)


@dataclass(frozen=True)
class MixedRateResult:
    value: float
    first_order: float  # ⟨∂ρ/∂f⟩
    error_estimate: float
    degenerate: bool = False


def _step(f0: float, scale: float, order: int) -> float:
    base = max(abs(f0), scale)
    return 2.0 ** round(math.log2(base * _EPS ** (1.0 / (order + 2))))


def first_order_term(family: Callable[[float], DensityMatrix], f0: float,
                     scale: float = 1.0) -> float:
    """⟨∂ρ/∂f⟩ = Tr[ρ ∂ρ/∂f] at f0 by a 5-point central difference."""
    rho = _matrix(family(f0))
    h = _exact_step(f0, _step(f0, scale, 4))
    vals = [_trace_product(rho, _matrix(family(f0 + _exact_step(f0, j * h)))) for j in (-2, -1, 1, 2)]
    return float(_D1[0] * vals[0] + _D1[1] * vals[1] + _D1[3] * vals[2] + _D1[4] * vals[3]) / h


def rate_mixed(family: Callable[[float], DensityMatrix], f0: float, scale: float = 1.0,
               strict: bool = True) -> MixedRateResult:
    """R_f[ρ] = -½ ⟨∂²ρ/∂f²⟩ at f0.

    ``scale`` is the natural scale of f. The first-order term ⟨∂ρ/∂f⟩ is
    returned alongside; with ``strict`` a value above 1e-8 raises ValueError
    since the quadratic rate is then not the leading behaviour. A family
    whose matrices do not move at all returns exactly 0 with ``degenerate``
    set.
    """
    rho = _matrix(family(f0))
    h = _exact_step(f0, _step(f0, scale, 6))
    probe = [_matrix(family(f0 + _exact_step(f0, j * h))) for j in (-1, 1)]
    if all(np.max(np.abs(m - rho)) <= 16 * _EPS for m in probe):
        return MixedRateResult(0.0, 0.0, 0.0, degenerate=True)

    first = first_order_term(family, f0, scale)
    if strict and abs(first) > FIRST_ORDER_TOL:
        raise ValueError(f"first-order term <dρ/df> = {first:.3e} does not vanish")

    def overlap(delta):
        return _trace_product(rho, _matrix(family(f0 + _exact_step(f0, delta))))

    d2, err = second_derivative(overlap, h, scale, 4 * _EPS, "mixture")
    return MixedRateResult(-0.5 * d2, first, 0.5 * err)


def mixed_series(family: Callable[[float], DensityMatrix], f0: float, max_order: int = 4,
                 step: float = 0.01) -> np.ndarray:
    """Taylor coefficients [c_1, ..., c_max_order] of δf ↦ ΔP₁,₁ for a mixture family."""
    coef = taylor_coefficients(lambda d: delta_p11_dof_mixed(family, f0, d), step, max_order)
    return coef[1:]


def perturbation_linear_term(rho: DensityMatrix, delta_rho) -> float:
    """½ (Tr[ρ²] Tr[δρ] - Tr[ρ δρ]), the leading term of ΔP₁,₁ for ρ_B ∝ ρ + δρ."""
    m, d = _matrix(rho), np.asarray(delta_rho, dtype=complex)
    return 0.5 * (purity(rho) * np.trace(d).real - _trace_product(m, d))


def density_from_dict(data: Mapping) -> DensityMatrix:
    """Build a density matrix from its JSON descriptor.

    Accepted forms: ``{"entries": [[[re, im], ...], ...]}`` (row-major),
    ``{"alpha": .., "theta": .., "phi": ..}`` and ``{"maximally_mixed": N}``.
    """
    keys = set(data)
    if keys == {"entries"}:
        rows = data["entries"]
        try:
            m = np.array([[complex(re, im) for re, im in row] for row in rows])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"entries must be rows of [re, im] pairs: {exc}") from None
        return DensityMatrix(m)
    if keys and keys <= {"alpha", "theta", "phi"} and "alpha" in keys:
        return mixture_from_dict(data).density_matrix()
    if keys == {"maximally_mixed"}:
        return DensityMatrix.maximally_mixed(data["maximally_mixed"])
    raise ValueError(f"unrecognized density-matrix descriptor with keys {sorted(keys)}")


def mixture_from_dict(data: Mapping) -> PolarizedMixture:
    unknown = set(data) - {"alpha", "theta", "phi"}
    if unknown or "alpha" not in data:
        raise ValueError("mixture descriptor needs alpha and optionally theta, phi")
    return PolarizedMixture(data["alpha"], data.get("theta", 0.0), data.get("phi", 0.0))


def density_to_dict(rho: DensityMatrix) -> dict:
    return {"entries": [[[float(z.real), float(z.imag)] for z in row] for row in rho.entries]}
