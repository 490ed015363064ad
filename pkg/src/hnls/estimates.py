"""Verification lab for the dispersive estimates of the linear flow.

Contents: the interaction virial functional with the 1D convex weight rho_M
and its first/second time-derivative identities, the bilinear space-time
estimate over dyadic blocks, a local elliptic pointwise constant, L^4
space-time norms, and a discrete X^{s,b}-type diagnostic.

All linear evolutions use the exact phases e^{it(2n+2)}, so the only error
sources are spatial quadrature and finite differencing in time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hnls.hermite import (
    HermiteError,
    SpectralField,
    eval_basis_at,
    gauss_hermite_rule,
)
from hnls.dynamics import propagate_linear
from hnls.rng import SplitMix64, derive_seed
from hnls.spectral import (
    apply_power_A,
    dyadic_block,
    grad_norm_sq,
    littlewood_paley,
    moment_x_norm_sq,
    op_dx,
    op_laplacian,
    op_mult_x,
)


# ---------------------------------------------------------------------------
# convex interaction weight rho_M


def rho_weight(z, M: float):
    """(rho_M, rho_M', rho_M'') at z; even extension, quadratic cap |z|<=1/M."""
    if M <= 0:
        raise HermiteError(f"weight parameter M must be positive, got {M}")
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    inner = az < 1.0 / M
    val = np.where(inner, 0.5 * M * z * z + 0.5 / M, az)
    d1 = np.where(inner, M * z, np.sign(z))
    d2 = np.where(inner, M, 0.0)
    # mean value on the C^1 kink, so trapezoid sums see the average
    edge = az == 1.0 / M
    d2 = d2 + np.where(edge, 0.5 * M, 0.0)
    return val, d1, d2


# ---------------------------------------------------------------------------
# marginal reduction of the interaction functional
#
#   I_rho(t) = int int |u(x)|^2 rho_M(x_1 - y_1) |v(y)|^2 dx dy
#
# depends on u, v only through their x_1-marginals:
#   I_rho = int rho_M(z) C(z) dz,  C(z) = int m_u(x) m_v(x - z) dx.
# The x-correlation is a trapezoid sum of a smooth rapidly-decaying function
# (spectrally accurate); the z-integral uses Gauss-Legendre panels split at
# the weight's kinks +-1/M, so no quadrature node ever straddles a kink.


@dataclass
class Marginals:
    """x_1-marginals of a 2D field: mass, momentum, gradient, Laplacian."""

    m: np.ndarray  # int |w|^2 dx2
    p: np.ndarray  # int Im(d1 wbar * w) dx2
    g: np.ndarray  # int |d1 w|^2 dx2
    q: np.ndarray  # int Delta(|w|^2) dx2  (= marginal of 2Re(wbar d1^2 w) + 2|d1 w|^2)


def _swap_axes(u: SpectralField) -> SpectralField:
    return SpectralField.from_matrix(u.to_matrix().T, u.n_max)


def marginals(u: SpectralField, x1: np.ndarray, axis: int = 1) -> Marginals:
    """Marginals along the chosen axis at arbitrary x1 points (x2 exact)."""
    if axis == 2:
        u = _swap_axes(u)
    elif axis != 1:
        raise HermiteError(f"axis must be 1 or 2, got {axis}")
    d1u = op_dx(u, 0)
    d11u = op_dx(d1u, 0)
    K = d11u.n_max + 1
    rule = gauss_hermite_rule(K + 2, 1)
    B2 = eval_basis_at(K, rule.nodes)
    B1 = eval_basis_at(K, np.asarray(x1, dtype=float))

    def synth(f: SpectralField) -> np.ndarray:
        mat = np.zeros((K, K), dtype=complex)
        mat[: f.n_max + 1, : f.n_max + 1] = f.to_matrix()
        return B1.T @ mat @ B2

    W = synth(u.truncate(d11u.n_max))
    W1 = synth(d1u.truncate(d11u.n_max))
    W11 = synth(d11u)
    w = rule.weights
    m = np.abs(W) ** 2 @ w
    p = np.imag(np.conj(W1) * W) @ w
    g = np.abs(W1) ** 2 @ w
    q = (2.0 * np.real(np.conj(W) * W11) + 2.0 * np.abs(W1) ** 2) @ w
    return Marginals(m=np.real(m), p=np.real(p), g=np.real(g), q=np.real(q))


class InteractionQuad:
    """Quadrature bundle for z-integrals against rho_M, rho', rho'', z rho'."""

    def __init__(
        self,
        M: float,
        L: float = 9.0,
        points: int = 720,
        n_gl: int = 48,
        z_max: float | None = None,
    ):
        if M <= 0:
            raise HermiteError(f"weight parameter M must be positive, got {M}")
        self.M = float(M)
        self.L = float(L)
        self.P = int(points)
        self.x = -L + 2.0 * L * np.arange(self.P) / self.P
        self.h = 2.0 * L / self.P
        if z_max is None:
            z_max = 2.0 * L
        edge = min(1.0 / M, z_max)
        gl_nodes, gl_w = np.polynomial.legendre.leggauss(n_gl)
        zs, ws = [], []
        for a, b in ((-z_max, -edge), (-edge, edge), (edge, z_max)):
            if b <= a:
                continue
            zs.append(0.5 * (b - a) * gl_nodes + 0.5 * (a + b))
            ws.append(0.5 * (b - a) * gl_w)
        self.z = np.concatenate(zs)
        self.zw = np.concatenate(ws)
        rho, d1, d2 = rho_weight(self.z, M)
        self.w_rho = self.zw * rho
        self.w_d1 = self.zw * d1
        self.w_d2 = self.zw * d2
        self.w_zd1 = self.zw * self.z * d1
        # shifted evaluation points x_a - z_k, flattened (nz, P)
        self.shifted = (self.x[None, :] - self.z[:, None]).ravel()

    def pair(self, f: np.ndarray, g_shifted: np.ndarray, weight: np.ndarray) -> float:
        """int W(z) [ h sum_a f(x_a) g(x_a - z) ] dz for one weight channel."""
        corr = self.h * (g_shifted.reshape(len(self.z), self.P) @ f)
        return float(weight @ corr)


def _virial_tables(u: SpectralField, v: SpectralField, iq: InteractionQuad, axis: int):
    mu = marginals(u, iq.x, axis)
    mv = marginals(v, iq.shifted, axis)
    return mu, mv


def interaction_I(u: SpectralField, v: SpectralField, iq: InteractionQuad, axis: int = 1):
    """Value of I_rho for the weight rho_M(x_axis - y_axis)."""
    mu = marginals(u, iq.x, axis)
    mv = marginals(v, iq.shifted, axis)
    return iq.pair(mu.m, mv.m, iq.w_rho)


def virial_first_rhs(mu: Marginals, mv: Marginals, iq: InteractionQuad) -> float:
    """dI/dt = 2 iint rho' [p_u m_v - m_u p_v]."""
    return 2.0 * (iq.pair(mu.p, mv.m, iq.w_d1) - iq.pair(mu.m, mv.p, iq.w_d1))


def virial_second_rhs(mu: Marginals, mv: Marginals, iq: InteractionQuad) -> float:
    """d2I/dt2 as the I + ... + VI decomposition reduced to marginals."""
    out = 4.0 * (iq.pair(mu.g, mv.m, iq.w_d2) + iq.pair(mu.m, mv.g, iq.w_d2))
    out -= iq.pair(mu.q, mv.m, iq.w_d2) + iq.pair(mu.m, mv.q, iq.w_d2)
    out -= 8.0 * iq.pair(mu.p, mv.p, iq.w_d2)
    out -= 4.0 * iq.pair(mu.m, mv.m, iq.w_zd1)
    return out


@dataclass
class VirialReport:
    """Residuals of the first/second virial identities along the linear flow."""

    times: np.ndarray
    first_residual: np.ndarray
    second_residual: np.ndarray
    i_values: np.ndarray
    first_scale: float  # max |dI/dt| encountered, for relative readings
    second_scale: float
    refinement_ok: bool | None = None


def virial_residuals(
    u0: SpectralField,
    v0: SpectralField,
    M: float,
    T: float,
    dt: float,
    n_samples: int = 8,
    iq: InteractionQuad | None = None,
    axis: int = 1,
) -> VirialReport:
    """Central-difference checks of the two virial identities (linear mode)."""
    if iq is None:
        iq = InteractionQuad(M)
    times = np.linspace(0.0, T, n_samples)
    r1, r2, ivals = [], [], []
    s1 = s2 = 0.0
    for t in times:
        mu, mv = _virial_tables(propagate_linear(u0, t), propagate_linear(v0, t), iq, axis)
        i0 = iq.pair(mu.m, mv.m, iq.w_rho)
        ip = interaction_I(propagate_linear(u0, t + dt), propagate_linear(v0, t + dt), iq, axis)
        im = interaction_I(propagate_linear(u0, t - dt), propagate_linear(v0, t - dt), iq, axis)
        rhs1 = virial_first_rhs(mu, mv, iq)
        rhs2 = virial_second_rhs(mu, mv, iq)
        r1.append((ip - im) / (2.0 * dt) - rhs1)
        r2.append((ip - 2.0 * i0 + im) / dt**2 - rhs2)
        ivals.append(i0)
        s1 = max(s1, abs(rhs1))
        s2 = max(s2, abs(rhs2))
    return VirialReport(
        times=times,
        first_residual=np.array(r1),
        second_residual=np.array(r2),
        i_values=np.array(ivals),
        first_scale=s1,
        second_scale=s2,
    )


# ---------------------------------------------------------------------------
# bilinear space-time estimate over dyadic blocks


def random_block_field(N: int, n_max: int, stream: SplitMix64) -> SpectralField:
    """Unit-L2 field with i.i.d. complex Gaussian coefficients on Delta_N."""
    block = dyadic_block(N)
    if not block.indices or block.n_max > n_max:
        raise HermiteError(
            f"block N={N} not resolvable at n_max={n_max} "
            f"(needs n_max >= {block.n_max})"
        )
    u = SpectralField.zero(n_max)
    _, _, deg = u.index
    mask = np.isin(deg, block.indices)
    u.coeffs[mask] = stream.complex_normals(int(mask.sum()))
    norm = u.l2_norm()
    if norm == 0.0:
        raise HermiteError("degenerate zero draw")
    return u * (1.0 / norm)


def _degree_slices(u: SpectralField, basis_values: np.ndarray, transform=None):
    """Grid synthesis of each Pi_n u with nonzero content; {n: (Q, Q) array}."""
    _, _, deg = u.index
    out = {}
    for n in np.unique(deg[np.abs(u.coeffs) > 0]):
        part = SpectralField.zero(u.n_max)
        mask = deg == n
        part.coeffs[mask] = u.coeffs[mask]
        fields = [part] if transform is None else transform(part)
        B = basis_values
        out[int(n)] = [
            B[: f.n_max + 1].T @ f.to_matrix() @ B[: f.n_max + 1] for f in fields
        ]
    return out


def _pair_gram(slices_u: dict, slices_v: dict, weights: np.ndarray):
    """Frequencies a = n + m and Gram matrix G_ab = <h_a, h_b> of h_a = sum u_n v_m."""
    acc = {}
    for n, fu in slices_u.items():
        for m, fv in slices_v.items():
            a = n + m
            prod = sum(x * y for x, y in zip(fu, fv)) if len(fu) == len(fv) else None
            if prod is None:
                raise HermiteError("slice component mismatch")
            acc[a] = acc.get(a, 0) + prod
    freqs = np.array(sorted(acc), dtype=float)
    H = np.stack([(acc[int(a)] * weights[:, None] * weights[None, :]).ravel() for a in freqs])
    Hraw = np.stack([acc[int(a)].ravel() for a in freqs])
    G = H @ Hraw.conj().T
    return freqs, G


def _simpson_weights(n_nodes: int, h: float) -> np.ndarray:
    if n_nodes < 3 or n_nodes % 2 == 0:
        raise HermiteError("Simpson rule needs an odd node count >= 3")
    w = np.ones(n_nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def bilinear_value(u: SpectralField, v: SpectralField, T: float, dt_max: float) -> float:
    """int_0^T ||u(t) v(t)||_{L2}^2 dt along the linear flow (Simpson in time)."""
    if T == 0.0:
        return 0.0
    K = u.n_max + v.n_max + 2
    rule = gauss_hermite_rule(K + 4, 2)
    B = eval_basis_at(K, rule.nodes)
    su = _degree_slices(u, B)
    sv = _degree_slices(v, B)
    freqs, G = _pair_gram(su, sv, rule.weights)
    n_int = int(np.ceil(T / dt_max))
    if n_int % 2 == 1:
        n_int += 1
    t = np.linspace(0.0, T, n_int + 1)
    Z = np.exp(2j * np.outer(t, freqs))
    F = np.real(np.einsum("ka,ab,kb->k", Z, G, np.conj(Z), optimize=True))
    return float(_simpson_weights(n_int + 1, T / n_int) @ F)


@dataclass
class RatioCell:
    """One (N, M) cell of the bilinear ratio table."""

    N: int
    M: int
    T: float
    trials: int
    seed: int
    max_ratio: float
    median_ratio: float


def bilinear_ratio(
    N: int,
    M: int,
    T: float,
    trials: int,
    seed: int,
    n_max: int | None = None,
) -> RatioCell:
    """Empirical max/median of  int ||u_N v_M||^2 dt / (M N^{-1})  over trials."""
    if n_max is None:
        n_max = 2 * max(N, M) ** 2 - 1
    dt_max = np.pi / (64.0 * max(N, M) ** 2)
    ratios = []
    for trial in range(trials):
        stream = SplitMix64(derive_seed(seed, N, M, trial))
        uN = random_block_field(N, n_max, stream)
        vM = random_block_field(M, n_max, stream)
        value = bilinear_value(uN, vM, T, dt_max)
        ratios.append(value / (M / N))
    ratios = np.array(ratios)
    return RatioCell(
        N=N,
        M=M,
        T=T,
        trials=trials,
        seed=seed,
        max_ratio=float(np.max(ratios)),
        median_ratio=float(np.median(ratios)),
    )


# ---------------------------------------------------------------------------
# local elliptic pointwise constant


def elliptic_constant(
    phi: SpectralField,
    lam: float,
    x: tuple,
    n_radial: int = 32,
    n_angular: int = 64,
) -> float:
    """|phi(x)|^2 / (lam^-2 int_ball |A phi|^2 + lam^2 int_ball |phi|^2).

    Ball radius 1/lam around x; integrals by Gauss-Legendre (radial) times
    trapezoid (angular) on pointwise Hermite evaluations.
    """
    if lam < 1.0:
        raise HermiteError(f"elliptic constant defined for lam >= 1, got {lam}")
    aphi = apply_power_A(phi, 2.0)
    r_nodes, r_weights = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 / lam * (r_nodes + 1.0)
    wr = 0.5 / lam * r_weights
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    wt = 2.0 * np.pi / n_angular
    X = x[0] + np.outer(r, np.cos(theta))
    Y = x[1] + np.outer(r, np.sin(theta))
    pv = phi.eval_at(X.ravel(), Y.ravel()).reshape(n_radial, n_angular)
    av = aphi.eval_at(X.ravel(), Y.ravel()).reshape(n_radial, n_angular)
    i_phi = float((wr * r) @ np.sum(np.abs(pv) ** 2, axis=1) * wt)
    i_aphi = float((wr * r) @ np.sum(np.abs(av) ** 2, axis=1) * wt)
    denom = i_aphi / lam**2 + i_phi * lam**2
    if denom < 1e-300:
        raise HermiteError("elliptic denominator vanishes: point too far out")
    center = abs(phi.eval_at(np.array([x[0]]), np.array([x[1]]))[0]) ** 2
    return float(center / denom)


def h2_identity(f: SpectralField):
    """lhs = int |Delta f|^2 + |x|^4 |f|^2 + 2 |x|^2 |grad f|^2, rhs = int |A f|^2 + 4|f|^2.

    Returns (lhs, rhs, relative error); all pieces through exact ladders.
    """
    lap = op_laplacian(f)
    xsq_f = op_mult_x(op_mult_x(f, 0), 0) + op_mult_x(op_mult_x(f, 1), 1)
    lhs = lap.l2_norm() ** 2 + xsq_f.l2_norm() ** 2
    lhs += 2.0 * (moment_x_norm_sq(op_dx(f, 0)) + moment_x_norm_sq(op_dx(f, 1)))
    rhs = apply_power_A(f, 2.0).l2_norm() ** 2 + 4.0 * f.l2_norm() ** 2
    return lhs, rhs, abs(lhs - rhs) / max(rhs, 1e-300)


# ---------------------------------------------------------------------------
# L^4 space-time norms along the linear flow


def _time_kernel(freq_diff: np.ndarray, T: float) -> np.ndarray:
    """int_0^T e^{2 i t k} dt, elementwise in k."""
    out = np.empty(freq_diff.shape, dtype=complex)
    zero = freq_diff == 0
    out[zero] = T
    k = freq_diff[~zero]
    out[~zero] = (np.exp(2j * T * k) - 1.0) / (2j * k)
    return out


def strichartz_l4(
    u0: SpectralField,
    T: float,
    gradient: bool = False,
    block_label: int | None = None,
):
    """||u||_{L^4((0,T); L^4)} (or of grad u) for the exact linear flow.

    Returns (value, ratio); ratio is value / ||u0|| or value / (M ||u0||)
    with M the data's dyadic block label when the gradient flag is set.
    """
    if gradient and block_label is None:
        raise HermiteError("gradient ratio needs the data's dyadic block label M")
    if T == 0.0:
        return 0.0, 0.0
    K = 2 * (u0.n_max + 1) + 2
    rule = gauss_hermite_rule(2 * K + 4, 2)
    B = eval_basis_at(K, rule.nodes)
    transform = (lambda f: [op_dx(f, 0), op_dx(f, 1)]) if gradient else None
    slices = _degree_slices(u0, B, transform)
    # |w(t)|^2 = sum_d e^{2itd} rho_d with rho_d = sum_{n-n'=d} w_n conj(w_n')
    acc = {}
    for n, fn in slices.items():
        for m, fm in slices.items():
            d = n - m
            prod = sum(a * np.conj(b) for a, b in zip(fn, fm))
            acc[d] = acc.get(d, 0) + prod
    freqs = np.array(sorted(acc), dtype=float)
    w2 = rule.weights[:, None] * rule.weights[None, :]
    H = np.stack([(acc[int(d)] * w2).ravel() for d in freqs])
    Hraw = np.stack([acc[int(d)].ravel() for d in freqs])
    G = H @ Hraw.conj().T
    kern = _time_kernel(freqs[:, None] - freqs[None, :], T)
    total = float(np.real(np.sum(G * kern)))
    value = max(total, 0.0) ** 0.25
    base = u0.l2_norm()
    ratio = value / (block_label * base) if gradient else value / base
    return value, ratio


# ---------------------------------------------------------------------------
# discrete X^{s,b} diagnostic


def xsb_discrete(traj, s: float, b: float, window: str = "hann") -> float:
    """Windowed discrete X^{s,b}-type norm of a recorded trajectory.

    Temporal transform convention: a linear solution of mode degree n has its
    mass at tau = -(2n+2), the minimum of the weight <tau + 2n+2>^{2b}.
    """
    if window != "hann":
        raise HermiteError(f"only the hann window is supported, got {window!r}")
    snaps = traj.snapshots
    times = np.asarray(traj.times, dtype=float)
    if len(snaps) < 2:
        raise HermiteError("xsb_discrete needs at least 2 snapshots")
    dts = np.diff(times)
    if np.max(np.abs(dts - dts[0])) > 1e-12 * max(abs(dts[0]), 1e-300):
        raise HermiteError("xsb_discrete needs uniformly spaced stamps")
    dt = float(dts[0])
    P = len(snaps)
    C = np.stack([u.coeffs for u in snaps])  # (P, nc)
    win = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(P) / P)  # periodic hann
    Cw = C * win[:, None]
    # hat c(tau_l) = dt * sum_j c_j e^{+i tau_l t_j}
    chat = dt * P * np.fft.ifft(Cw, axis=0)
    tau = 2.0 * np.pi * np.fft.fftfreq(P, d=dt)
    _, _, deg = snaps[0].index
    lam = 2.0 * deg + 2.0
    weight = (1.0 + (tau[:, None] + lam[None, :]) ** 2) ** b
    total = np.sum(lam[None, :] ** s * weight * np.abs(chat) ** 2) / (P * dt)
    return float(np.sqrt(total))
