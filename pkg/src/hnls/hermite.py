"""1D/2D Hermite functions, Gauss-Hermite quadrature and spectral transforms.

Conventions
-----------
* ``psi_k`` are the L2-orthonormal Hermite functions,
  ``(-d^2/dx^2 + x^2) psi_k = (2k+1) psi_k``, ``psi_0 = pi**-0.25 * exp(-x^2/2)``.
* A 2D field is expanded over tensor products ``psi_k1 (x) psi_k2`` on the
  triangular truncation ``k1 + k2 <= n_max`` and stored packed, in
  lexicographic ``(k1, k2)`` order.
* Quadrature rules carry *modified* weights ``w_j`` such that
  ``sum_j w_j f(x_j) ~= integral f`` for Schwartz-class ``f``; the rule with
  ``weight_scale = s`` is exact whenever ``f = p(x) exp(-s x^2)`` with
  ``deg p <= 2Q - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class HermiteError(ValueError):
    """Raised for invalid quadrature/basis/transform requests."""


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite nodes with modified (weight-free) weights."""

    nodes: np.ndarray
    weights: np.ndarray
    weight_scale: int

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray) -> complex | float:
        """1D integral of point values sampled on the nodes."""
        return np.tensordot(self.weights, values, axes=(0, 0))

    def integrate_2d(self, values: np.ndarray):
        """Tensor-grid integral; `values[j, l]` sampled at `(x_j, x_l)`."""
        return self.weights @ values @ self.weights


def _orthonormal_hermite_values(K: int, x: np.ndarray) -> np.ndarray:
    """Table psi_k(x) for k < K by the normalized three-term recurrence."""
    out = np.empty((K, len(x)))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if K > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(2, K):
        out[k] = x * np.sqrt(2.0 / k) * out[k - 1] - np.sqrt((k - 1) / k) * out[k - 2]
    return out


def gauss_hermite_rule(Q: int, weight_scale: int = 1) -> QuadratureRule:
    """Q-point Gauss-Hermite rule, exact against the weight exp(-scale*x^2).

    Nodes come from the Golub-Welsch eigenproblem for the Jacobi matrix of
    the Hermite polynomials; the modified weights are computed through the
    Christoffel function ``w_j = 1 / sum_{k<Q} psi_k(x_j)^2``, which stays
    finite for any Q (no exp(x^2) blowup).
    """
    if Q < 1:
        raise HermiteError(f"Gauss-Hermite rule needs Q >= 1, got Q={Q}")
    if weight_scale not in (1, 2):
        raise HermiteError(f"weight_scale must be 1 or 2, got {weight_scale}")
    if Q == 1:
        nodes = np.array([0.0])
    else:
        jacobi = np.diag(np.sqrt(np.arange(1, Q) / 2.0), 1)
        nodes = np.linalg.eigvalsh(jacobi + jacobi.T)
        nodes = 0.5 * (nodes - nodes[::-1])  # enforce exact symmetry
    if not np.all(np.isfinite(nodes)):
        raise HermiteError(f"node computation failed to converge for Q={Q}")
    table = _orthonormal_hermite_values(Q, nodes)
    weights = 1.0 / np.sum(table * table, axis=0)
    if weight_scale == 2:
        nodes = nodes / np.sqrt(2.0)
        weights = weights / np.sqrt(2.0)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, weight_scale=weight_scale)


# ---------------------------------------------------------------------------
# basis tables


@dataclass(frozen=True)
class BasisTable:
    """psi_k evaluated on the nodes of a quadrature rule; shape (K, Q)."""

    K: int
    rule: QuadratureRule
    values: np.ndarray

    @property
    def Q(self) -> int:
        return self.rule.size


def eval_basis(K: int, rule: QuadratureRule) -> BasisTable:
    """Tabulate the first K orthonormal Hermite functions on `rule`."""
    if K < 1:
        raise HermiteError(f"basis size must be >= 1, got K={K}")
    values = _orthonormal_hermite_values(K, rule.nodes)
    bad = np.argwhere(~np.isfinite(values))
    if len(bad):
        k, j = bad[0]
        raise HermiteError(f"basis recurrence over/underflowed at (k={k}, j={j})")
    values.setflags(write=False)
    return BasisTable(K=K, rule=rule, values=values)


def eval_basis_at(K: int, x: np.ndarray) -> np.ndarray:
    """psi_k at arbitrary points (no quadrature attached); shape (K, len(x))."""
    return _orthonormal_hermite_values(K, np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# spectral fields on the triangle k1 + k2 <= n_max


@lru_cache(maxsize=64)
def triangle_index(n_max: int):
    """(k1, k2, n) index arrays in lexicographic (k1, k2) order."""
    k1, k2 = [], []
    for a in range(n_max + 1):
        for b in range(n_max + 1 - a):
            k1.append(a)
            k2.append(b)
    k1 = np.array(k1, dtype=np.intp)
    k2 = np.array(k2, dtype=np.intp)
    n = k1 + k2
    for arr in (k1, k2, n):
        arr.setflags(write=False)
    return k1, k2, n


def triangle_size(n_max: int) -> int:
    return (n_max + 1) * (n_max + 2) // 2


@dataclass
class SpectralField:
    """Complex Hermite coefficients c[k1, k2] on the triangle k1+k2 <= n_max."""

    n_max: int
    coeffs: np.ndarray  # packed, lexicographic (k1, k2)

    def __post_init__(self):
        if self.coeffs.shape != (triangle_size(self.n_max),):
            raise HermiteError(
                f"packed coefficient length {self.coeffs.shape} does not match "
                f"n_max={self.n_max}"
            )

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n_max: int) -> "SpectralField":
        return cls(n_max, np.zeros(triangle_size(n_max), dtype=complex))

    @classmethod
    def from_matrix(cls, mat: np.ndarray, n_max: int) -> "SpectralField":
        k1, k2, _ = triangle_index(n_max)
        return cls(n_max, np.ascontiguousarray(mat[k1, k2], dtype=complex))

    @classmethod
    def mode(cls, n_max: int, k1: int, k2: int, amplitude: complex = 1.0):
        u = cls.zero(n_max)
        u.set_coeff(k1, k2, amplitude)
        return u

    @classmethod
    def ground_state(cls, n_max: int) -> "SpectralField":
        return cls.mode(n_max, 0, 0, 1.0)

    # -- indexing ----------------------------------------------------------

    @property
    def index(self):
        return triangle_index(self.n_max)

    def to_matrix(self) -> np.ndarray:
        k1, k2, _ = self.index
        mat = np.zeros((self.n_max + 1, self.n_max + 1), dtype=complex)
        mat[k1, k2] = self.coeffs
        return mat

    def coeff(self, k1: int, k2: int) -> complex:
        return self.coeffs[self._pos(k1, k2)]

    def set_coeff(self, k1: int, k2: int, value: complex) -> None:
        self.coeffs[self._pos(k1, k2)] = value

    def _pos(self, k1: int, k2: int) -> int:
        if k1 < 0 or k2 < 0 or k1 + k2 > self.n_max:
            raise HermiteError(f"({k1},{k2}) outside triangle n_max={self.n_max}")
        # row k1 starts after sum_{a<k1} (n_max + 1 - a)
        return k1 * (self.n_max + 1) - k1 * (k1 - 1) // 2 + k2

    # -- algebra -----------------------------------------------------------

    def copy(self) -> "SpectralField":
        return SpectralField(self.n_max, self.coeffs.copy())

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if other.n_max != self.n_max:
            raise HermiteError("truncation mismatch in field addition")
        return SpectralField(self.n_max, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if other.n_max != self.n_max:
            raise HermiteError("truncation mismatch in field subtraction")
        return SpectralField(self.n_max, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.n_max, self.coeffs * scalar)

    __rmul__ = __mul__

    def conj_coeffs(self) -> "SpectralField":
        return SpectralField(self.n_max, np.conj(self.coeffs))

    def l2_norm(self) -> float:
        """Parseval: L2 norm from the packed coefficients."""
        return float(np.linalg.norm(self.coeffs))

    def truncate(self, n_max: int) -> "SpectralField":
        """Project to a smaller (or embed in a larger) triangle."""
        if n_max == self.n_max:
            return self.copy()
        out = SpectralField.zero(n_max)
        k1s, k2s, ns = self.index
        keep = ns <= n_max
        k1o, k2o, _ = out.index
        # positions of the kept coefficients in the target packing
        pos = k1s[keep] * (n_max + 1) - k1s[keep] * (k1s[keep] - 1) // 2 + k2s[keep]
        out.coeffs[pos] = self.coeffs[keep]
        return out

    def eval_at(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """Pointwise values at arbitrary (x1[i], x2[i]) pairs."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        K = self.n_max + 1
        b1 = eval_basis_at(K, x1)
        b2 = eval_basis_at(K, x2)
        k1, k2, _ = self.index
        return np.einsum("c,ci,ci->i", self.coeffs, b1[k1], b2[k2])


@dataclass
class PhysicalField:
    """Grid values `values[j, l] = u(x_j, x_l)` on a tensor quadrature grid."""

    values: np.ndarray
    rule: QuadratureRule

    def __post_init__(self):
        q = self.rule.size
        if self.values.shape != (q, q):
            raise HermiteError(
                f"grid shape {self.values.shape} does not match rule size {q}"
            )
        if not np.all(np.isfinite(self.values)):
            raise HermiteError("physical field contains non-finite entries")

    def l2_norm_sq(self) -> float:
        return float(np.real(self.rule.integrate_2d(np.abs(self.values) ** 2)))


# ---------------------------------------------------------------------------
# transforms


def to_physical(u: SpectralField, basis: BasisTable) -> PhysicalField:
    """Synthesis u(x_j, x_l); two tensorized matrix passes, O(K*Q*(K+Q))."""
    if basis.K <= u.n_max:
        raise HermiteError(
            f"basis size K={basis.K} too small for n_max={u.n_max} (need K > n_max)"
        )
    C = u.to_matrix()
    B = basis.values[: u.n_max + 1]
    values = B.T @ C @ B
    return PhysicalField(values=values, rule=basis.rule)


def to_spectral(f: PhysicalField, basis: BasisTable, n_max: int) -> SpectralField:
    """Analysis c[k1,k2] = sum_{j,l} w_j w_l f(x_j,x_l) psi_k1(x_j) psi_k2(x_l)."""
    if f.rule is not basis.rule and not np.array_equal(f.rule.nodes, basis.rule.nodes):
        raise HermiteError("physical field and basis table use different rules")
    if basis.K <= n_max:
        raise HermiteError(f"basis size K={basis.K} too small for n_max={n_max}")
    B = basis.values[: n_max + 1]
    w = basis.rule.weights
    mat = (B * w) @ f.values @ (B * w).T
    return SpectralField.from_matrix(mat, n_max)
