"""Tensor-product Gauss-Hermite rules adapted to a 3D Gaussian envelope."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class ConvergenceError(RuntimeError):
    """A numerical estimate did not settle within its tolerance."""

    def __init__(self, message: str, error_estimate: float = float("nan")):
        super().__init__(message)
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of the brute-force quadrature.

    Nodes are placed on the Gaussian envelope of the integrand (its mean and
    covariance), so ``nodes_per_axis`` is the only resolution knob. The same
    integral is repeated with ``check_nodes`` per axis; the difference is the
    reported error estimate and must stay below ``atol``.
    """

    nodes_per_axis: int = 40
    check_nodes: int | None = 60
    atol: float = 1e-6

    def __post_init__(self):
        if self.nodes_per_axis < 8:
            raise ValueError("nodes_per_axis must be >= 8")
        if self.check_nodes is not None and self.check_nodes < 8:
            raise ValueError("check_nodes must be >= 8")
        if not self.atol > 0:
            raise ValueError("atol must be positive")

    def resolutions(self) -> tuple[int, ...]:
        if self.check_nodes is None or self.check_nodes == self.nodes_per_axis:
            return (self.nodes_per_axis,)
        return (self.nodes_per_axis, self.check_nodes)


@lru_cache(maxsize=32)
def _scaled_hermgauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    # weights multiplied by exp(x^2) so the rule integrates plain functions
    x, w = np.polynomial.hermite.hermgauss(n)
    return x, w * np.exp(x * x)


def gaussian_rule(mean, cov, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``∫ g(k) d³k`` with g concentrated like N(mean, cov).

    Returns ``(k, w)`` with ``k`` of shape (n**3, 3) such that
    ``sum(w * g(k))`` approximates the integral of ``g`` over R³. The rule
    is exact for ``g = polynomial × exp(-(k-mean)ᵀ cov⁻¹ (k-mean) / 2)`` up to
    degree 2n-1 per axis.
    """
    mean = np.asarray(mean, dtype=float)
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    x, w = _scaled_hermgauss(n)
    grid = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    weights = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
    nodes = mean + np.sqrt(2.0) * grid @ chol.T
    jac = 2.0 ** 1.5 * np.prod(np.diag(chol))
    return nodes, weights * jac
