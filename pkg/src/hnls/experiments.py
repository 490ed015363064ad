"""Experiment drivers: growth runs, sweeps, fits, and verdicts.

Every driver takes a flat config dict (see hnls.config), writes hash-stamped
CSV output into an output directory, and returns a RunRecord whose verdict
(if any) maps to the CLI exit code.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hnls import config as cfgmod
from hnls import io as iomod
from hnls.config import ConfigError
from hnls.dynamics import EvolutionConfig, StepContext, evolve, hamiltonian
from hnls.energies import energy_report, identity_residual
from hnls.estimates import (
    InteractionQuad,
    bilinear_ratio,
    elliptic_constant,
    h2_identity,
    random_block_field,
    virial_residuals,
    xsb_discrete,
)
from hnls.hermite import HermiteError, SpectralField
from hnls.rng import SplitMix64, derive_seed
from hnls.spectral import (
    BoxSpec,
    classical_norms,
    fourier_norm_sq,
    moment_norm_sq,
    norm_hs,
)


def worker_count() -> int:
    env = os.environ.get("HNLS_THREADS", "")
    if env.strip():
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"HNLS_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError(f"HNLS_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# initial data families


def initial_data(cfg: dict, n_max: int, seed: int) -> SpectralField:
    family = cfgmod.get_str(cfg, "family", "ground")
    amplitude = cfgmod.get_float(cfg, "amplitude", 1.0)
    if family == "ground":
        u = SpectralField.ground_state(n_max)
    elif family == "mode":
        k1 = cfgmod.get_int(cfg, "mode_k1")
        k2 = cfgmod.get_int(cfg, "mode_k2")
        u = SpectralField.mode(n_max, k1, k2)
    elif family == "random-smooth":
        decay = cfgmod.get_float(cfg, "decay", 2.0)
        degree_cap = cfgmod.get_int(cfg, "degree_cap", n_max)
        stream = SplitMix64(derive_seed(seed, 1))
        u = SpectralField.zero(n_max)
        _, _, deg = u.index
        mask = deg <= degree_cap
        draw = stream.complex_normals(int(mask.sum()))
        u.coeffs[mask] = draw * (2.0 * deg[mask] + 2.0) ** (-decay)
        norm = u.l2_norm()
        if norm == 0.0:
            raise HermiteError("degenerate zero draw for random-smooth data")
        u = u * (1.0 / norm)
    elif family == "dyadic":
        N = cfgmod.get_int(cfg, "block_N")
        u = random_block_field(N, n_max, SplitMix64(derive_seed(seed, 2)))
    else:
        raise ConfigError(f"unknown initial data family {family!r}")
    return u * amplitude


# ---------------------------------------------------------------------------
# exponent fitting


def fit_exponent(times, values):
    """Least-squares slope of log y against log t, with its standard error."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(t) < 8:
        raise HermiteError(f"fit_exponent needs >= 8 samples, got {len(t)}")
    if np.any(t <= 0):
        raise HermiteError("fit_exponent needs strictly positive times")
    if np.any(y <= 0):
        raise HermiteError("fit_exponent needs strictly positive values")
    lx, ly = np.log(t), np.log(y)
    lx_c = lx - lx.mean()
    sxx = float(np.sum(lx_c**2))
    slope = float(np.sum(lx_c * ly) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    dof = len(t) - 2
    stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx)) if dof > 0 else 0.0
    return slope, stderr


def growth_bound_exponent(k: int) -> float:
    return 2.0 * (2 * k - 1) / 3.0


@dataclass
class RunRecord:
    kind: str
    config_hash: int
    csv_paths: list = field(default_factory=list)
    checkpoint_paths: list = field(default_factory=list)
    exponent: float | None = None
    exponent_stderr: float | None = None
    verdict: str | None = None  # "PASS" / "FAIL" / None
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0


# ---------------------------------------------------------------------------
# growth / simulate


def run_growth(cfg: dict, out_dir, seed: int, resume=None) -> RunRecord:
    start = time.time()
    chash = cfgmod.config_hash(cfg)
    n_max = cfgmod.get_int(cfg, "n_max", 32)
    dt = cfgmod.get_float(cfg, "dt", 1e-3)
    sign = cfgmod.get_int(cfg, "sign", 1)
    T = cfgmod.get_float(cfg, "T")
    record_every = cfgmod.get_int(cfg, "record_every", 500)
    k = cfgmod.get_int(cfg, "k", 1)
    order = cfgmod.get_int(cfg, "order", 2)
    track = cfgmod.get_bool(cfg, "growth_track", True)
    econf = EvolutionConfig(n_max=n_max, dt=dt, sign=sign, order=order)

    if resume is not None:
        u0, header = iomod.checkpoint_load(resume)
        if header["config_hash"] != f"{chash:016x}":
            raise ConfigError(
                f"checkpoint was produced by config {header['config_hash']}, "
                f"not the supplied one ({chash:016x})"
            )
        if header["n_max"] != n_max or header["sign"] != sign:
            raise ConfigError("checkpoint resolution/sign does not match config")
        t0 = float(header["t"])
    else:
        u0 = initial_data(cfg, n_max, seed)
        t0 = 0.0

    n_steps = int(round((T - t0) / dt))
    if n_steps < 0:
        raise ConfigError(f"resume time {t0} is already past T={T}")
    ctx = StepContext(n_max)
    traj = evolve(u0, econf, n_steps, record_every=record_every, ctx=ctx,
                  t0=t0, record_snapshots=True)

    ckpt_every = cfgmod.get_int(cfg, "checkpoint_every", 0)
    os.makedirs(out_dir, exist_ok=True)
    mid_ckpts = []
    if ckpt_every > 0:
        for j, (t, u) in enumerate(zip(traj.times, traj.snapshots)):
            steps_done = j * record_every
            if steps_done and steps_done % ckpt_every == 0 and steps_done < n_steps:
                p = os.path.join(out_dir, f"step_{steps_done:08d}.ckpt")
                iomod.checkpoint_save(p, u, float(t), dt, sign, chash)
                mid_ckpts.append(p)

    box = BoxSpec()
    rows = []
    h2k_series = []
    for t, u in zip(traj.times, traj.snapshots):
        row = {
            "t": t,
            "mass": u.l2_norm() ** 2,
            "hamiltonian": hamiltonian(u, sign, ctx),
            "h1": norm_hs(u, 1.0),
            "h2": norm_hs(u, 2.0),
            "h4": norm_hs(u, 4.0),
        }
        if track:
            row["d2k_norm"] = float(np.sqrt(fourier_norm_sq(u, 2.0 * k, box)))
            row["moment2k"] = float(np.sqrt(moment_norm_sq(u, 2.0 * k)))
        rows.append(row)
        h2k_series.append(norm_hs(u, 2.0 * k))

    csv_path = os.path.join(out_dir, "observables.csv")
    iomod.write_observables_csv(csv_path, rows, chash)
    ckpt_path = os.path.join(out_dir, "final.ckpt")
    iomod.checkpoint_save(ckpt_path, traj.final, float(traj.times[-1]), dt, sign, chash)

    record = RunRecord(kind="simulate", config_hash=chash,
                       csv_paths=[csv_path],
                       checkpoint_paths=mid_ckpts + [ckpt_path])
    if track and sign != 0:
        times = np.asarray(traj.times)
        vals = np.asarray(h2k_series)
        half = times >= 0.5 * times[-1]
        if int(half.sum()) >= 8:
            slope, stderr = fit_exponent(times[half], vals[half])
            record.exponent = slope
            record.exponent_stderr = stderr
            bound = growth_bound_exponent(k)
            # pointwise check: smallest constant on the first half must keep
            # covering the second half (25% slack for oscillation)
            angle_t = np.sqrt(1.0 + times**2)
            c_first = float(np.max(vals[~half] / angle_t[~half] ** bound))
            pointwise_ok = bool(np.all(vals[half] <= 1.25 * c_first * angle_t[half] ** bound))
            exponent_ok = slope <= bound + 0.1
            record.verdict = "PASS" if (exponent_ok and pointwise_ok) else "FAIL"
            record.details = {
                "bound_exponent": bound,
                "pointwise_constant": c_first,
                "pointwise_ok": pointwise_ok,
                "exponent_ok": exponent_ok,
                "tail_max": traj.tail_max,
            }
    record.elapsed = time.time() - start
    return record


# ---------------------------------------------------------------------------
# bilinear sweep


def run_bilinear(cfg: dict, out_dir, seed: int) -> RunRecord:
    start = time.time()
    chash = cfgmod.config_hash(cfg)
    N_list = cfgmod.get_int_list(cfg, "N_list", [1, 2, 4, 8])
    M_list = cfgmod.get_int_list(cfg, "M_list", [1])
    T = cfgmod.get_float(cfg, "T", float(np.pi))
    trials = cfgmod.get_int(cfg, "trials", 50)
    cells = [(N, M) for N in N_list for M in M_list]

    def one(cell):
        N, M = cell
        return bilinear_ratio(N, M, T, trials, seed)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(one, cells))
    results.sort(key=lambda c: (c.N, c.M))
    rows = [
        {
            "N": c.N,
            "M": c.M,
            "T": c.T,
            "trials": c.trials,
            "seed": str(c.seed),
            "max_ratio": c.max_ratio,
            "median_ratio": c.median_ratio,
        }
        for c in results
    ]
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "bilinear_ratios.csv")
    iomod.write_table_csv(
        csv_path,
        ["N", "M", "T", "trials", "seed", "max_ratio", "median_ratio"],
        rows,
        chash,
    )
    record = RunRecord(kind="bilinear", config_hash=chash, csv_paths=[csv_path])
    if len(N_list) > 1 and len(set(M_list)) == 1:
        per_n = {}
        for c in results:
            per_n[c.N] = max(per_n.get(c.N, 0.0), c.max_ratio)
        Ns = np.array(sorted(per_n), dtype=float)
        slope = float(np.polyfit(np.log(Ns), np.log([per_n[int(n)] for n in Ns]), 1)[0])
        record.details["slope"] = slope
        record.verdict = "PASS" if slope <= 0.1 else "FAIL"
    record.elapsed = time.time() - start
    return record


# ---------------------------------------------------------------------------
# virial residual sweep


def run_virial(cfg: dict, out_dir, seed: int) -> RunRecord:
    start = time.time()
    chash = cfgmod.config_hash(cfg)
    n_max = cfgmod.get_int(cfg, "n_max", 12)
    M_weight = cfgmod.get_float(cfg, "M_weight", 1.0)
    T = cfgmod.get_float(cfg, "T", 1.0)
    dt = cfgmod.get_float(cfg, "dt", 1e-3)
    pairs = cfgmod.get_int(cfg, "pairs", 10)
    # steep spectral decay keeps the pairs smooth and spatially localized, so
    # the differencing error dt^2/12 * sum(omega^4 a_omega) stays small
    decay = cfgmod.get_float(cfg, "decay", 5.0)
    tol = cfgmod.get_float(cfg, "virial_tol", 1e-6)
    n_samples = cfgmod.get_int(cfg, "samples", 3)
    iq = InteractionQuad(M_weight)

    def draw(stream):
        u = SpectralField.zero(n_max)
        _, _, deg = u.index
        u.coeffs[:] = stream.complex_normals(len(u.coeffs))
        u.coeffs *= (2.0 * deg + 2.0) ** (-decay)
        return u * (1.0 / u.l2_norm())

    rows = []
    worst1 = worst2 = 0.0
    for j in range(pairs):
        stream = SplitMix64(derive_seed(seed, 3, j))
        u0, v0 = draw(stream), draw(stream)
        rep = virial_residuals(u0, v0, M_weight, T, dt, n_samples=n_samples, iq=iq)
        r1 = float(np.max(np.abs(rep.first_residual)))
        r2 = float(np.max(np.abs(rep.second_residual)))
        worst1, worst2 = max(worst1, r1), max(worst2, r2)
        rows.append({"pair": j, "first_residual": r1, "second_residual": r2,
                     "first_scale": rep.first_scale, "second_scale": rep.second_scale})
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "virial_residuals.csv")
    iomod.write_table_csv(
        csv_path,
        ["pair", "first_residual", "second_residual", "first_scale", "second_scale"],
        rows,
        chash,
    )
    verdict = "PASS" if max(worst1, worst2) <= tol else "FAIL"
    return RunRecord(kind="virial", config_hash=chash, csv_paths=[csv_path],
                     verdict=verdict,
                     details={"worst_first": worst1, "worst_second": worst2},
                     elapsed=time.time() - start)


# ---------------------------------------------------------------------------
# elliptic constant sweep + H^2 identity


def run_elliptic(cfg: dict, out_dir, seed: int) -> RunRecord:
    start = time.time()
    chash = cfgmod.config_hash(cfg)
    n_max = cfgmod.get_int(cfg, "n_max", 12)
    lam_max = cfgmod.get_int(cfg, "lambda_max", 64)
    extent = cfgmod.get_float(cfg, "grid_extent", 2.0)
    grid_n = cfgmod.get_int(cfg, "grid_points", 5)
    bound = cfgmod.get_float(cfg, "elliptic_bound", 10.0)
    id_fields = cfgmod.get_int(cfg, "identity_fields", 100)
    id_tol = cfgmod.get_float(cfg, "identity_tol", 1e-8)

    lams = []
    lam = 1
    while lam <= lam_max:
        lams.append(float(lam))
        lam *= 2
    pts = np.linspace(-extent, extent, grid_n)
    phis = {
        "ground": SpectralField.ground_state(n_max),
        "mixed": SpectralField.mode(n_max, 2, 1) + 0.5 * SpectralField.mode(n_max, 0, 3),
    }
    rows, worst = [], 0.0
    for name, phi in phis.items():
        for lam in lams:
            for x1 in pts:
                for x2 in pts:
                    c = elliptic_constant(phi, lam, (float(x1), float(x2)))
                    worst = max(worst, c)
                    rows.append({"phi": name, "lambda": lam, "x1": float(x1),
                                 "x2": float(x2), "constant": c})
    worst_id = 0.0
    for j in range(id_fields):
        stream = SplitMix64(derive_seed(seed, 4, j))
        f = SpectralField(n_max, stream.complex_normals(len(SpectralField.zero(n_max).coeffs)))
        worst_id = max(worst_id, h2_identity(f)[2])
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "elliptic_constants.csv")
    iomod.write_table_csv(csv_path, ["phi", "lambda", "x1", "x2", "constant"], rows, chash)
    verdict = "PASS" if (worst <= bound and worst_id <= id_tol) else "FAIL"
    return RunRecord(kind="elliptic", config_hash=chash, csv_paths=[csv_path],
                     verdict=verdict,
                     details={"max_constant": worst, "max_identity_residual": worst_id},
                     elapsed=time.time() - start)


# ---------------------------------------------------------------------------
# modified-energy identity check


def run_energy_check(cfg: dict, out_dir, seed: int) -> RunRecord:
    start = time.time()
    chash = cfgmod.config_hash(cfg)
    n_max = cfgmod.get_int(cfg, "n_max", 16)
    dt = cfgmod.get_float(cfg, "dt", 1e-3)
    sign = cfgmod.get_int(cfg, "sign", 1)
    T = cfgmod.get_float(cfg, "T", 0.2)
    k = cfgmod.get_int(cfg, "k", 1)
    record_every = cfgmod.get_int(cfg, "record_every", 2)
    tol = cfgmod.get_float(cfg, "energy_tol", 1e-4)
    u0 = initial_data(cfg, n_max, seed)
    econf = EvolutionConfig(n_max=n_max, dt=dt, sign=sign)
    traj = evolve(u0, econf, int(round(T / dt)), record_every=record_every,
                  record_snapshots=True)
    rep = identity_residual(traj, k, sign)
    rows = []
    for j, t in enumerate(traj.times):
        row = {"t": t, "E_mod": rep.energy[j], "R_term": rep.flux[j]}
        er = energy_report(traj.snapshots[j], k, sign)
        row["S_term"] = er.S
        if 0 < j < len(traj.times) - 1:
            row["residual"] = rep.residual[j - 1]
        rows.append(row)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "energy_identity.csv")
    iomod.write_observables_csv(csv_path, rows, chash)
    verdict = "PASS" if rep.normalized_integrated <= tol else "FAIL"
    return RunRecord(kind="energy-check", config_hash=chash, csv_paths=[csv_path],
                     verdict=verdict,
                     details={"normalized_integrated": rep.normalized_integrated},
                     elapsed=time.time() - start)


# ---------------------------------------------------------------------------
# norm-equivalence sampling


def run_equivalence(cfg: dict, out_dir, seed: int) -> RunRecord:
    start = time.time()
    chash = cfgmod.config_hash(cfg)
    n_max = cfgmod.get_int(cfg, "n_max", 12)
    count = cfgmod.get_int(cfg, "count", 100)
    s_list = cfgmod.get_int_list(cfg, "s_list", [1, 2])
    bound = cfgmod.get_float(cfg, "ratio_bound", 10.0)
    decay = cfgmod.get_float(cfg, "decay", 1.0)
    rows, worst = [], 0.0
    for j in range(count):
        stream = SplitMix64(derive_seed(seed, 5, j))
        u = SpectralField.zero(n_max)
        _, _, deg = u.index
        u.coeffs[:] = stream.complex_normals(len(u.coeffs))
        u.coeffs *= (2.0 * deg + 2.0) ** (-decay)
        u = u * (1.0 / u.l2_norm())
        for s in s_list:
            rep = classical_norms(u, float(s))
            worst = max(worst, rep.ratio_low, rep.ratio_high)
            rows.append({"field": j, "s": s, "harmonic": rep.harmonic,
                         "fourier": rep.fourier, "moment": rep.moment,
                         "ratio_low": rep.ratio_low, "ratio_high": rep.ratio_high})
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "equivalence_ratios.csv")
    iomod.write_table_csv(
        csv_path,
        ["field", "s", "harmonic", "fourier", "moment", "ratio_low", "ratio_high"],
        rows,
        chash,
    )
    verdict = "PASS" if worst <= bound else "FAIL"
    return RunRecord(kind="equivalence", config_hash=chash, csv_paths=[csv_path],
                     verdict=verdict, details={"worst_ratio": worst},
                     elapsed=time.time() - start)


# ---------------------------------------------------------------------------
# discrete X^{s,b} diagnostic


def run_xsb(cfg: dict, out_dir, seed: int) -> RunRecord:
    start = time.time()
    chash = cfgmod.config_hash(cfg)
    n_max = cfgmod.get_int(cfg, "n_max", 8)
    dt = cfgmod.get_float(cfg, "dt", float(2.0 * np.pi / 256))
    steps = cfgmod.get_int(cfg, "steps", 255)
    sign = cfgmod.get_int(cfg, "sign", 0)
    s = cfgmod.get_float(cfg, "s", 1.0)
    b = cfgmod.get_float(cfg, "b", 0.3)
    u0 = initial_data(cfg, n_max, seed)
    econf = EvolutionConfig(n_max=n_max, dt=dt, sign=sign)
    traj = evolve(u0, econf, steps, record_every=1, record_snapshots=True)
    value = xsb_discrete(traj, s, b)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "xsb_value.csv")
    iomod.write_table_csv(csv_path, ["s", "b", "value"],
                          [{"s": s, "b": b, "value": value}], chash)
    return RunRecord(kind="xsb", config_hash=chash, csv_paths=[csv_path],
                     details={"value": value}, elapsed=time.time() - start)
