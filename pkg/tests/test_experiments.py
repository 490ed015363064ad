"""Experiment drivers, exponent fitting, and the command line interface."""

import math
import os

import numpy as np
import pytest

from hnls import cli
from hnls import experiments as ex
from hnls.config import ConfigError, parse_config
from hnls.hermite import HermiteError
from hnls.spectral import eigenvalue


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestFitExponent:
    def test_exact_power_law(self):
        t = np.linspace(1.0, 20.0, 40)
        p, err = ex.fit_exponent(t, 3.0 * t**0.75)
        assert p == pytest.approx(0.75, abs=1e-10)
        assert err <= 1e-10

    def test_constant_series(self):
        t = np.linspace(1.0, 9.0, 16)
        p, _ = ex.fit_exponent(t, np.full_like(t, 2.5))
        assert p == pytest.approx(0.0, abs=1e-12)

    def test_oscillating_power_law(self):
        t = np.linspace(1.0, 50.0, 200)
        p, err = ex.fit_exponent(t, t ** (2.0 / 3.0) * (1.0 + 0.01 * np.sin(t)))
        assert p == pytest.approx(2.0 / 3.0, abs=0.02)

    def test_preconditions(self):
        with pytest.raises(HermiteError):
            ex.fit_exponent([1, 2, 3], [1, 2, 3])
        t = np.linspace(1.0, 2.0, 10)
        with pytest.raises(HermiteError):
            ex.fit_exponent(t, -np.ones(10))
        with pytest.raises(HermiteError):
            ex.fit_exponent(t - 1.0, np.ones(10))


class TestInitialData:
    def test_families(self):
        g = ex.initial_data({"family": "ground"}, 8, 0)
        assert g.coeff(0, 0) == 1.0
        m = ex.initial_data({"family": "mode", "mode_k1": "2", "mode_k2": "1"}, 8, 0)
        assert m.coeff(2, 1) == 1.0
        r = ex.initial_data({"family": "random-smooth", "decay": "2.0"}, 8, 42)
        assert r.l2_norm() == pytest.approx(1.0, rel=1e-12)
        d = ex.initial_data({"family": "dyadic", "block_N": "2"}, 8, 42)
        _, _, deg = d.index
        assert np.all(np.abs(d.coeffs[(deg < 1) | (deg > 6)]) == 0.0)

    def test_reproducible(self):
        cfg = {"family": "random-smooth"}
        a = ex.initial_data(cfg, 8, 7)
        b = ex.initial_data(cfg, 8, 7)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_unknown_family(self):
        with pytest.raises(ConfigError):
            ex.initial_data({"family": "bogus"}, 8, 0)


class TestDrivers:
    def test_bilinear_merge_order_independent(self, tmp_path):
        texts = ["N_list = 1 2\nM_list = 1\ntrials = 2\nT = 0.5",
                 "N_list = 2 1\nM_list = 1\ntrials = 2\nT = 0.5"]
        blobs = []
        for j, text in enumerate(texts):
            out = tmp_path / f"o{j}"
            rec = ex.run_bilinear(parse_config(text), out, seed=3)
            # rows must be merged by (N, M) regardless of grid order
            body = (out / "bilinear_ratios.csv").read_text().splitlines()[1:]
            blobs.append(body)
        assert blobs[0] == blobs[1]

    def test_worker_count_env(self, monkeypatch):
        monkeypatch.setenv("HNLS_THREADS", "3")
        assert ex.worker_count() == 3
        monkeypatch.setenv("HNLS_THREADS", "zero")
        with pytest.raises(ConfigError):
            ex.worker_count()

    def test_growth_bound_exponent(self):
        assert ex.growth_bound_exponent(1) == pytest.approx(2.0 / 3.0)
        assert ex.growth_bound_exponent(2) == pytest.approx(2.0)

    def test_growth_run_and_resume_identical(self, tmp_path):
        cfg = parse_config(
            "T = 0.2\nn_max = 10\ndt = 0.001\nfamily = random-smooth\n"
            "decay = 3.0\nrecord_every = 20\ncheckpoint_every = 100\n"
        )
        rec = ex.run_growth(cfg, tmp_path / "full", seed=11)
        assert rec.checkpoint_paths[0].endswith("step_00000100.ckpt")
        rec2 = ex.run_growth(cfg, tmp_path / "resumed", seed=11,
                             resume=rec.checkpoint_paths[0])
        full = (tmp_path / "full" / "observables.csv").read_text().splitlines()
        res = (tmp_path / "resumed" / "observables.csv").read_text().splitlines()
        assert full[-1] == res[-1]  # byte-identical final stamp

    def test_resume_config_mismatch(self, tmp_path):
        cfg = parse_config("T = 0.05\nn_max = 8\ndt = 0.001\nfamily = ground\n"
                           "checkpoint_every = 20\nrecord_every = 10\n")
        rec = ex.run_growth(cfg, tmp_path / "a", seed=0)
        other = parse_config("T = 0.05\nn_max = 8\ndt = 0.001\nfamily = ground\n"
                             "checkpoint_every = 20\nrecord_every = 10\nextra = 1\n")
        with pytest.raises(ConfigError):
            ex.run_growth(other, tmp_path / "b", seed=0, resume=rec.checkpoint_paths[0])


class TestCli:
    def test_equivalence_pass(self, tmp_path, capsys):
        cfgp = write_cfg(tmp_path, "count = 5\nn_max = 8\n")
        code = cli.main(["equivalence", "--config", str(cfgp), "--out", str(tmp_path / "o")])
        out = capsys.readouterr().out
        assert code == 0
        assert "verdict: PASS" in out
        assert "config_hash:" in out

    def test_verdict_fail_exit_code(self, tmp_path):
        # coarse dt makes the virial differencing residual exceed tolerance
        cfgp = write_cfg(tmp_path, "pairs = 1\nn_max = 8\nT = 0.2\ndt = 0.05\n"
                                   "samples = 2\nvirial_tol = 1e-9\n")
        code = cli.main(["virial", "--config", str(cfgp), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_missing_config_error(self, tmp_path):
        code = cli.main(["simulate", "--config", str(tmp_path / "nope.cfg")])
        assert code == 1

    def test_bad_key_error(self, tmp_path):
        cfgp = write_cfg(tmp_path, "count = five\n")
        code = cli.main(["equivalence", "--config", str(cfgp), "--out", str(tmp_path / "o")])
        assert code == 1

    def test_resume_only_for_simulate(self, tmp_path):
        cfgp = write_cfg(tmp_path, "count = 5\n")
        code = cli.main(["equivalence", "--config", str(cfgp), "--resume", "x.ckpt"])
        assert code == 1
