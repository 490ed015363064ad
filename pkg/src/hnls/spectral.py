"""Spectral operators of A = -Laplacian + |x|^2 on the Hermite triangle.

Eigenvalues 2n+2, eigenprojectors on total degree n, sharp Littlewood-Paley
blocks over dyadic eigenvalue windows, fractional powers A^{s/2}, harmonic
Sobolev norms, and the comparison against classical Sobolev / moment norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hnls.hermite import (
    BasisTable,
    HermiteError,
    PhysicalField,
    QuadratureRule,
    SpectralField,
    eval_basis,
    eval_basis_at,
    gauss_hermite_rule,
    to_physical,
    to_spectral,
    triangle_index,
)


def eigenvalue(n: int) -> int:
    """Eigenvalue of A on the degree-n eigenspace."""
    return 2 * n + 2


def project_pi_n(u: SpectralField, n: int) -> SpectralField:
    """Orthogonal projector on total Hermite degree n."""
    out = SpectralField.zero(u.n_max)
    _, _, deg = u.index
    mask = deg == n
    out.coeffs[mask] = u.coeffs[mask]
    return out


@dataclass(frozen=True)
class DyadicBlock:
    """Littlewood-Paley block: degrees n with 2n+2 in [N^2, 4N^2)."""

    N: int
    indices: tuple

    @property
    def n_min(self) -> int:
        return self.indices[0]

    @property
    def n_max(self) -> int:
        return self.indices[-1]


def is_dyadic(N: int) -> bool:
    return N >= 1 and (N & (N - 1)) == 0


@lru_cache(maxsize=64)
def dyadic_block(N: int) -> DyadicBlock:
    if not is_dyadic(N):
        raise HermiteError(f"Littlewood-Paley label must be a power of two, got {N}")
    lo, hi = N * N, 4 * N * N
    indices = tuple(n for n in range((hi - 2) // 2 + 1) if lo <= 2 * n + 2 < hi)
    return DyadicBlock(N=N, indices=indices)


def littlewood_paley(u: SpectralField, N: int) -> SpectralField:
    """Sharp dyadic localization Delta_N u."""
    block = dyadic_block(N)
    out = SpectralField.zero(u.n_max)
    _, _, deg = u.index
    mask = (2 * deg + 2 >= N * N) & (2 * deg + 2 < 4 * N * N)
    out.coeffs[mask] = u.coeffs[mask]
    return out


def dyadic_labels(n_max: int):
    """All dyadic N whose block intersects degrees 0..n_max."""
    labels = []
    N = 1
    while N * N <= 2 * n_max + 2:
        labels.append(N)
        N *= 2
    return labels


def apply_power_A(u: SpectralField, s: float) -> SpectralField:
    """A^{s/2}: multiply the degree-n coefficients by (2n+2)^{s/2}."""
    _, _, deg = u.index
    factors = (2.0 * deg + 2.0) ** (s / 2.0)
    return SpectralField(u.n_max, u.coeffs * factors)


def norm_hs(u: SpectralField, s: float) -> float:
    """Harmonic Sobolev norm ||A^{s/2} u||_{L^2}."""
    _, _, deg = u.index
    return float(np.sqrt(np.sum((2.0 * deg + 2.0) ** s * np.abs(u.coeffs) ** 2)))


# ---------------------------------------------------------------------------
# exact ladder actions (x multiplication and d/dx on Hermite coefficients)
#
#   x  psi_k = sqrt((k+1)/2) psi_{k+1} + sqrt(k/2) psi_{k-1}
#   d/dx psi_k = -sqrt((k+1)/2) psi_{k+1} + sqrt(k/2) psi_{k-1}


def _apply_ladder(u: SpectralField, axis: int, sign_up: float) -> SpectralField:
    """sign_up * sqrt((k+1)/2) shift-up + sqrt(k/2) shift-down on one axis."""
    K = u.n_max + 1
    mat = u.to_matrix()
    padded = np.zeros((K + 1, K + 1), dtype=complex)
    padded[:K, :K] = mat
    m = np.moveaxis(padded, axis, 0)
    out = np.zeros_like(m)
    k = np.arange(K)
    out[1 : K + 1] += (sign_up * np.sqrt((k + 1) / 2.0))[:, None] * m[:K]
    out[: K - 1] += np.sqrt(k[1:] / 2.0)[:, None] * m[1:K]
    out = np.moveaxis(out, 0, axis)
    return SpectralField.from_matrix(out, u.n_max + 1)


def op_mult_x(u: SpectralField, axis: int) -> SpectralField:
    """Multiplication by the coordinate x_axis (exact; degree grows by one)."""
    return _apply_ladder(u, axis, +1.0)


def op_dx(u: SpectralField, axis: int) -> SpectralField:
    """Partial derivative along x_axis (exact; degree grows by one)."""
    return _apply_ladder(u, axis, -1.0)


def op_laplacian(u: SpectralField) -> SpectralField:
    """Delta u = |x|^2 u - A u (exact; degree grows by two)."""
    xsq = op_mult_x(op_mult_x(u, 0), 0) + op_mult_x(op_mult_x(u, 1), 1)
    au = apply_power_A(u, 2.0).truncate(u.n_max + 2)
    return xsq - au


def grad_norm_sq(u: SpectralField) -> float:
    """||grad u||^2 via the exact ladder derivative."""
    return op_dx(u, 0).l2_norm() ** 2 + op_dx(u, 1).l2_norm() ** 2


def moment_x_norm_sq(u: SpectralField) -> float:
    """|| |x| u ||^2 via the exact ladder multiplication."""
    return op_mult_x(u, 0).l2_norm() ** 2 + op_mult_x(u, 1).l2_norm() ** 2


def op_mult_angle(u: SpectralField, pad: int = 16):
    """Multiplication by <x> = sqrt(1 + |x|^2), through physical space.

    <x> is not polynomial, so the product leaves any finite triangle; the
    result is projected onto degree n_max + pad on a scale-1 grid and the
    norm carried beyond n_max + 1 is returned as a measurable tail.
    """
    n_big = u.n_max + pad
    basis = _scale1_basis(n_big + 1)
    f = to_physical(u.truncate(n_big), basis)
    x = basis.rule.nodes
    angle = np.sqrt(1.0 + x[:, None] ** 2 + x[None, :] ** 2)
    prod = to_spectral(PhysicalField(f.values * angle, basis.rule), basis, n_big)
    _, _, deg = prod.index
    tail = float(np.linalg.norm(prod.coeffs[deg > u.n_max + 1]))
    return prod.truncate(u.n_max + 1), tail


@lru_cache(maxsize=32)
def _scale1_rule(Q: int) -> QuadratureRule:
    return gauss_hermite_rule(Q, 1)


@lru_cache(maxsize=32)
def _scale1_basis(K: int) -> BasisTable:
    # Q = 2K + 8 keeps polynomial integrands up to degree ~2K+8 exact
    return eval_basis(K, _scale1_rule(2 * K + 8))


# ---------------------------------------------------------------------------
# classical (flat Sobolev + moment) norms and the equivalence ratios


@dataclass(frozen=True)
class BoxSpec:
    """Uniform sampling box [-L, L]^2 for the Fourier-multiplier norm."""

    L: float = 12.0
    points: int = 512


@dataclass(frozen=True)
class NormReport:
    harmonic: float
    fourier: float
    moment: float
    ratio_low: float
    ratio_high: float


def sample_uniform(u: SpectralField, box: BoxSpec) -> np.ndarray:
    """Field values on the uniform box grid (endpoint-exclusive)."""
    x = -box.L + 2.0 * box.L * np.arange(box.points) / box.points
    B = eval_basis_at(u.n_max + 1, x)
    return B.T @ u.to_matrix() @ B


def fourier_norm_sq(u: SpectralField, s: float, box: BoxSpec) -> float:
    """||D^s u||^2 by FFT of the uniform samples on [-L, L]^2."""
    P, L = box.points, box.L
    vals = sample_uniform(u, box)
    boundary = max(
        np.max(np.abs(vals[0, :])),
        np.max(np.abs(vals[:, 0])),
    )
    peak = np.max(np.abs(vals))
    if peak > 0 and boundary > 1e-12 * peak:
        raise HermiteError(
            f"box L={L} too small: boundary magnitude {boundary:.3e} "
            f"exceeds 1e-12 of peak {peak:.3e}"
        )
    dx = 2.0 * L / P
    fhat = np.fft.fft2(vals) * dx * dx
    xi = 2.0 * np.pi * np.fft.fftfreq(P, d=dx)
    xi_sq = xi[:, None] ** 2 + xi[None, :] ** 2
    dxi = 2.0 * np.pi / (2.0 * L)
    return float(np.sum(xi_sq**s * np.abs(fhat) ** 2) * dxi * dxi / (2.0 * np.pi) ** 2)


def moment_norm_sq(u: SpectralField, s: float) -> float:
    """||<x>^s u||^2 by Gauss-Hermite quadrature (exact for integer s)."""
    basis = _scale1_basis(u.n_max + 1 + int(np.ceil(s)) + 2)
    f = to_physical(u, basis)
    x = basis.rule.nodes
    w = (1.0 + x[:, None] ** 2 + x[None, :] ** 2) ** s
    return float(np.real(basis.rule.integrate_2d(w * np.abs(f.values) ** 2)))


def classical_norms(u: SpectralField, s: float, box: BoxSpec = BoxSpec()) -> NormReport:
    """Harmonic vs Fourier-multiplier vs moment norms, with both ratios."""
    if s < 0:
        raise HermiteError(f"classical_norms needs s >= 0, got s={s}")
    harmonic = norm_hs(u, s)
    fourier = float(np.sqrt(fourier_norm_sq(u, s, box)))
    moment = float(np.sqrt(moment_norm_sq(u, s)))
    flat_sq = fourier**2 + moment**2
    ratio_low = harmonic**2 / flat_sq if flat_sq > 0 else np.inf
    ratio_high = flat_sq / harmonic**2 if harmonic > 0 else np.inf
    return NormReport(harmonic, fourier, moment, ratio_low, ratio_high)


def operator_bound_ratio(v: SpectralField, L: str, level: int) -> float:
    """||L v||_{H^{level-1}} / ||v||_{H^{level}} for L in {dx1, dx2, angle}."""
    if v.l2_norm() == 0.0:
        raise HermiteError("operator_bound_ratio needs a nonzero field")
    if level not in (1, 2):
        raise HermiteError(f"level must be 1 or 2, got {level}")
    if L in ("dx1", "dx2"):
        lv = op_dx(v, 0 if L == "dx1" else 1)
    elif L == "angle":
        lv, _tail = op_mult_angle(v)
    else:
        raise HermiteError(f"unknown operator tag {L!r}")
    return norm_hs(lv, float(level - 1)) / norm_hs(v, float(level))
