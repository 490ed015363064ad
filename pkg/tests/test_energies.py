"""Time-derivative recursion, correction/flux functionals, and the identity."""

import numpy as np
import pytest

from hnls.dynamics import EvolutionConfig, evolve
from hnls.energies import (
    dt_power,
    energy_report,
    identity_residual,
    r_term,
    s_energy,
)
from hnls.hermite import HermiteError, SpectralField
from hnls.rng import SplitMix64
from hnls.spectral import norm_hs

from oracles import brute_s_r, random_field


class TestDtPower:
    def test_linear_ground_state(self):
        g = SpectralField.ground_state(6)
        ut = dt_power(g, 1, 0)
        assert np.max(np.abs(ut.coeffs - 2j * g.coeffs)) <= 1e-14

    def test_zero_field(self):
        for h in (1, 2):
            assert dt_power(SpectralField.zero(6), h, 1).l2_norm() == 0.0

    def test_unsupported_order(self):
        with pytest.raises(HermiteError):
            dt_power(SpectralField.ground_state(4), 3, 1)

    @pytest.mark.parametrize("h", [1, 2])
    def test_central_difference_oracle(self, h):
        u = random_field(10, SplitMix64(1), decay=2.0)
        delta = 1e-4
        cfg = EvolutionConfig(n_max=10, dt=delta, sign=1)
        fwd = evolve(u, cfg, 1).final
        bwd = evolve(u, EvolutionConfig(n_max=10, dt=-delta, sign=1), 1).final
        if h == 1:
            approx = (fwd.coeffs - bwd.coeffs) / (2.0 * delta)
        else:
            approx = (fwd.coeffs - 2.0 * u.coeffs + bwd.coeffs) / delta**2
        exact = dt_power(u, h, 1).coeffs
        rel = np.max(np.abs(approx - exact)) / np.max(np.abs(exact))
        assert rel <= 1e-6


class TestSAndR:
    def test_zero_field(self):
        for k in (0, 1):
            assert s_energy(SpectralField.zero(6), k, 1) == 0.0
            assert r_term(SpectralField.zero(6), k, 1) == 0.0

    def test_linear_mode_vanishes(self):
        u = random_field(8, SplitMix64(2))
        for k in (0, 1):
            assert s_energy(u, k, 0) == 0.0
            assert r_term(u, k, 0) == 0.0

    def test_unsupported_k(self):
        with pytest.raises(HermiteError):
            s_energy(SpectralField.ground_state(4), 2, 1)

    @pytest.mark.parametrize("k", [0, 1])
    @pytest.mark.parametrize("sign", [1, -1])
    def test_brute_force_oracle(self, k, sign):
        for j in range(3):
            u = random_field(8, SplitMix64(40 + j), decay=1.5)
            s_ref, r_ref = brute_s_r(u, k, sign)
            s_got = s_energy(u, k, sign)
            r_got = r_term(u, k, sign)
            scale = max(abs(s_ref), abs(r_ref), 1e-12)
            assert abs(s_got - s_ref) / scale <= 1e-6
            assert abs(r_got - r_ref) / scale <= 1e-6

    def test_report_consistency(self):
        u = random_field(8, SplitMix64(3))
        rep = energy_report(u, 0, 1)
        assert rep.E == rep.kinetic + rep.S
        assert rep.kinetic == pytest.approx(0.5 * norm_hs(u, 2.0) ** 2, rel=1e-14)


class TestIdentityResidual:
    def _traj(self, u0, dt, n, record_every=1, sign=1):
        return evolve(
            u0,
            EvolutionConfig(n_max=u0.n_max, dt=dt, sign=sign),
            n,
            record_every=record_every,
            record_snapshots=True,
        )

    def test_zero_trajectory(self):
        traj = self._traj(SpectralField.zero(6), 1e-2, 4)
        rep = identity_residual(traj, 0, 1)
        assert np.max(np.abs(rep.residual)) == 0.0
        assert rep.normalized_integrated == 0.0

    def test_linear_mode_conserved(self):
        u0 = random_field(8, SplitMix64(4), decay=2.0)
        traj = self._traj(u0, 1e-2, 20, sign=0)
        rep = identity_residual(traj, 0, 0)
        assert np.max(np.abs(rep.flux)) == 0.0
        assert np.max(np.abs(rep.energy - rep.energy[0])) <= 1e-12 * abs(rep.energy[0])

    def test_too_few_stamps(self):
        traj = self._traj(SpectralField.ground_state(4), 1e-2, 1)
        with pytest.raises(HermiteError):
            identity_residual(traj, 0, 1)

    @pytest.mark.parametrize("k", [0, 1])
    def test_residual_refines_second_order(self, k):
        u0 = random_field(8, SplitMix64(5), decay=2.0)
        res = []
        for dt in (2e-3, 1e-3):
            traj = self._traj(u0, dt, int(round(0.1 / dt)), record_every=2)
            rep = identity_residual(traj, k, 1)
            res.append(rep.normalized_integrated)
        assert res[0] / res[1] >= 3.0
        assert res[1] <= 1e-4
