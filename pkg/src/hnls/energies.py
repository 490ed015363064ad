"""Modified energies E_k = 1/2 ||dt^k A u||^2 + S_{2k+2} and fluxes R_{2k+2}.

For a solution of  i du/dt + A u + sign u|u|^2 = 0  the functionals below
satisfy  d/dt E_k = R_{2k+2}  for k in {0, 1}.  Writing s = sign, with
F_i = 2 dt(|u|^2) di u + 2 u ut di ubar:

  S_2 = s * [ sum_i ( int |di u|^2 |u|^2 + 1/2 Re int u^2 (di ubar)^2 )
              + 1/4 int |x|^2 |u|^4 ]
  R_2 = s * sum_i [ int |di u|^2 dt(|u|^2) + 1/2 Re int dt(u^2) (di ubar)^2 ]

  S_4 = s * [ sum_i ( int |dt di u|^2 |u|^2 + 1/2 Re int u^2 (dt di ubar)^2
                      + Re int F_i dt di ubar )
              + int |x|^2 |ut|^2 |u|^2 + 1/2 Re int |x|^2 u^2 (ut bar)^2 ]
  R_4 = s * [ sum_i ( int |dt di u|^2 dt(|u|^2)
                      + 1/2 Re int dt(u^2) (dt di ubar)^2
                      + Re int dt(F_i) dt di ubar )
              + int |x|^2 |ut|^2 dt(|u|^2)
              + 1/2 Re int |x|^2 dt(u^2) (ut bar)^2 ]

All time derivatives are eliminated through the equation (dt_power), every
integrand is then a 4-field product times 1 or |x|^2, and the scale-2
Gauss-Hermite grid integrates those exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hnls.hermite import (
    BasisTable,
    HermiteError,
    PhysicalField,
    SpectralField,
    eval_basis,
    gauss_hermite_rule,
    to_physical,
    to_spectral,
)
from hnls.dynamics import StepContext, nonlinear_cubic
from hnls.spectral import apply_power_A, norm_hs, op_dx


def dt_power(u: SpectralField, h: int, sign: int, ctx: StepContext | None = None):
    """Time derivative dt^h u expressed through the equation, h in {1, 2}."""
    if h not in (1, 2):
        raise HermiteError(f"dt_power supports h in {{1, 2}}, got {h}")
    if ctx is None:
        ctx = StepContext(u.n_max)
    au = apply_power_A(u, 2.0)
    ut = 1j * (au.coeffs + sign * nonlinear_cubic(u, 1, ctx).coeffs)
    ut = SpectralField(u.n_max, ut)
    if h == 1:
        return ut
    # dt(u|u|^2) = 2|u|^2 ut + u^2 conj(ut), projected on the triangle
    f = to_physical(u, ctx.basis)
    g = to_physical(ut, ctx.basis)
    mixed = 2.0 * np.abs(f.values) ** 2 * g.values + f.values**2 * np.conj(g.values)
    nl = to_spectral(PhysicalField(mixed, ctx.basis.rule), ctx.basis, u.n_max)
    utt = 1j * (apply_power_A(ut, 2.0).coeffs + sign * nl.coeffs)
    return SpectralField(u.n_max, utt)


# ---------------------------------------------------------------------------
# evaluation grid: scale-2, large enough for 4 ladder-raised factors + |x|^2


@lru_cache(maxsize=16)
def _energy_basis(K: int) -> BasisTable:
    # per-axis polynomial degree of the integrands is <= 4K + 2
    return eval_basis(K, gauss_hermite_rule(2 * K + 4, 2))


@dataclass
class _Fields:
    """Grid values of u and its derived fields on the energy grid."""

    u: np.ndarray
    ut: np.ndarray
    utt: np.ndarray
    du: list  # [d1 u, d2 u]
    dut: list  # [d1 ut, d2 ut]
    xsq: np.ndarray
    basis: BasisTable


def _prepare(u: SpectralField, k: int, sign: int) -> _Fields:
    if k not in (0, 1):
        raise HermiteError(f"modified energies support k in {{0, 1}}, got {k}")
    ctx = StepContext(u.n_max)
    basis = _energy_basis(u.n_max + 2)
    ut = dt_power(u, 1, sign, ctx)
    utt = dt_power(u, 2, sign, ctx) if k == 1 else None
    x = basis.rule.nodes
    return _Fields(
        u=to_physical(u.truncate(u.n_max + 1), basis).values,
        ut=to_physical(ut.truncate(u.n_max + 1), basis).values,
        utt=to_physical(utt.truncate(u.n_max + 1), basis).values if k == 1 else None,
        du=[to_physical(op_dx(u, i), basis).values for i in (0, 1)],
        dut=[to_physical(op_dx(ut, i), basis).values for i in (0, 1)],
        xsq=x[:, None] ** 2 + x[None, :] ** 2,
        basis=basis,
    )


def _integrate(fl: _Fields, values: np.ndarray) -> float:
    return float(np.real(fl.basis.rule.integrate_2d(values)))


def _s_r_k0(fl: _Fields):
    u = fl.u
    dt_absu2 = 2.0 * np.real(np.conj(u) * fl.ut)
    dt_u2 = 2.0 * u * fl.ut
    s = 0.25 * _integrate(fl, fl.xsq * np.abs(u) ** 4)
    r = 0.0
    for du in fl.du:
        s += _integrate(fl, np.abs(du) ** 2 * np.abs(u) ** 2)
        s += 0.5 * _integrate(fl, u**2 * np.conj(du) ** 2)
        r += _integrate(fl, np.abs(du) ** 2 * dt_absu2)
        r += 0.5 * _integrate(fl, dt_u2 * np.conj(du) ** 2)
    return s, r


def _s_r_k1(fl: _Fields):
    u, ut, utt = fl.u, fl.ut, fl.utt
    dt_absu2 = 2.0 * np.real(np.conj(u) * ut)
    dt_u2 = 2.0 * u * ut
    dtt_absu2 = 2.0 * np.abs(ut) ** 2 + 2.0 * np.real(np.conj(u) * utt)
    s = _integrate(fl, fl.xsq * np.abs(ut) ** 2 * np.abs(u) ** 2)
    s += 0.5 * _integrate(fl, fl.xsq * u**2 * np.conj(ut) ** 2)
    r = _integrate(fl, fl.xsq * np.abs(ut) ** 2 * dt_absu2)
    r += 0.5 * _integrate(fl, fl.xsq * dt_u2 * np.conj(ut) ** 2)
    for du, dut in zip(fl.du, fl.dut):
        f_i = 2.0 * dt_absu2 * du + 2.0 * u * ut * np.conj(du)
        dt_f_i = (
            2.0 * dtt_absu2 * du
            + 2.0 * dt_absu2 * dut
            + 2.0 * ut**2 * np.conj(du)
            + 2.0 * u * utt * np.conj(du)
            + 2.0 * u * ut * np.conj(dut)
        )
        s += _integrate(fl, np.abs(dut) ** 2 * np.abs(u) ** 2)
        s += 0.5 * _integrate(fl, u**2 * np.conj(dut) ** 2)
        s += _integrate(fl, f_i * np.conj(dut))
        r += _integrate(fl, np.abs(dut) ** 2 * dt_absu2)
        r += 0.5 * _integrate(fl, dt_u2 * np.conj(dut) ** 2)
        r += _integrate(fl, dt_f_i * np.conj(dut))
    return s, r


def s_energy(u: SpectralField, k: int, sign: int) -> float:
    """Correction term S_{2k+2}(u); vanishes in the linear mode."""
    if sign == 0:
        _prepare_validate(k)
        return 0.0
    fl = _prepare(u, k, sign)
    s, _ = _s_r_k0(fl) if k == 0 else _s_r_k1(fl)
    return sign * s


def r_term(u: SpectralField, k: int, sign: int) -> float:
    """Flux R_{2k+2}(u); vanishes in the linear mode."""
    if sign == 0:
        _prepare_validate(k)
        return 0.0
    fl = _prepare(u, k, sign)
    _, r = _s_r_k0(fl) if k == 0 else _s_r_k1(fl)
    return sign * r


def _prepare_validate(k: int):
    if k not in (0, 1):
        raise HermiteError(f"modified energies support k in {{0, 1}}, got {k}")


@dataclass(frozen=True)
class EnergyReport:
    """E = kinetic + S by construction."""

    k: int
    kinetic: float
    S: float
    R: float

    @property
    def E(self) -> float:
        return self.kinetic + self.S


def energy_report(u: SpectralField, k: int, sign: int) -> EnergyReport:
    """Modified energy of order k with its flux, evaluated on one state."""
    _prepare_validate(k)
    if k == 0:
        kin = 0.5 * norm_hs(u, 2.0) ** 2
    else:
        ut = dt_power(u, 1, sign)
        kin = 0.5 * norm_hs(ut, 2.0) ** 2
    if sign == 0:
        return EnergyReport(k=k, kinetic=kin, S=0.0, R=0.0)
    fl = _prepare(u, k, sign)
    s, r = _s_r_k0(fl) if k == 0 else _s_r_k1(fl)
    return EnergyReport(k=k, kinetic=kin, S=sign * s, R=sign * r)


@dataclass
class ResidualReport:
    """Pointwise and integrated defects of d/dt E_k = R_{2k+2}."""

    times: np.ndarray  # interior stamps (central differencing)
    residual: np.ndarray  # dE/dt - R at interior stamps
    energy: np.ndarray  # E at every stamp
    flux: np.ndarray  # R at every stamp
    integrated: float  # E(T) - E(0) - int_0^T R dt (trapezoid)

    @property
    def normalized_integrated(self) -> float:
        scale = np.max(np.abs(self.energy))
        return abs(self.integrated) / scale if scale > 0 else 0.0


def identity_residual(traj, k: int, sign: int) -> ResidualReport:
    """Check d/dt E_k = R_{2k+2} along a recorded trajectory."""
    snaps = traj.snapshots
    times = np.asarray(traj.times, dtype=float)
    if len(snaps) < 3:
        raise HermiteError("identity_residual needs at least 3 recorded snapshots")
    reports = [energy_report(u, k, sign) for u in snaps]
    energy = np.array([rep.E for rep in reports])
    flux = np.array([rep.R for rep in reports])
    dE = (energy[2:] - energy[:-2]) / (times[2:] - times[:-2])
    residual = dE - flux[1:-1]
    trapezoid = getattr(np, "trapezoid", np.trapz)
    integrated = energy[-1] - energy[0] - float(trapezoid(flux, times))
    return ResidualReport(
        times=times[1:-1],
        residual=residual,
        energy=energy,
        flux=flux,
        integrated=integrated,
    )
