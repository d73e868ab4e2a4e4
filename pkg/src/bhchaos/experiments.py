"""Experiment drivers: one function per experiment id, CSV + JSON output.

Every run is deterministic for a fixed config and seed; the sidecar
records the config hash, the seeds actually used, package versions, and
wall time, so any table can be traced back to its exact inputs.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .basis import LatticeParams, assemble_hamiltonian, build_basis
from .config import RunConfig, config_hash
from .dynamics import autocorrelation, cbs_experiment, otoc_multisector
from .errors import ConfigError, NumericError
from .meanfield import (
    complex_coords,
    fixed_point,
    lyapunov_benettin,
    real_coords,
    stability_exponents,
)
from .propagate import diagonalize
from .rwm import (
    SpectralWindow,
    exact_covariance,
    normalized_correlator,
    semiclassical_covariance,
    window_count,
)
from .spectral import (
    disorder_realizations,
    form_factor,
    goe_form_factor,
    ramp_slope,
    unfold,
)
from .states import coherent_state
from .twa import twa_return_probability

__all__ = ["ResultTable", "run", "write_tables"]


@dataclass
class ResultTable:
    name: str
    columns: list
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.size and self.rows.shape[1] != len(self.columns):
            raise ValueError(
                f"row width {self.rows.shape[1]} does not match {len(self.columns)} columns"
            )

    def write(self, out_dir):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{self.name}.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([f"{x:.17g}" for x in row])
        meta_path = out_dir / f"{self.name}.meta.json"
        with open(meta_path, "w") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
        return csv_path, meta_path


def _base_metadata(cfg: RunConfig, seed):
    return {
        "config_hash": config_hash(cfg.raw) if cfg.raw else None,
        "experiment": cfg.experiment,
        "seeds": [int(seed)],
        "versions": {
            "package": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }


def _resolve_threads(threads):
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, threads)


# ---------------------------------------------------------------------------
# autocorr: exact return probability vs phase-space ensemble


def run_autocorr(cfg: RunConfig, seed, threads):
    o = cfg.options
    b = np.asarray(o.center, dtype=complex)
    if len(b) != cfg.lattice.L:
        raise ConfigError("autocorr center length must equal lattice.L")
    times = np.linspace(0.0, o.t_max, o.n_times)
    state = coherent_state(b, k_sigma=o.k_sigma)
    if o.weight_floor > 0:
        state, _ = state.restrict(o.weight_floor)
    _, c_exact = autocorrelation(cfg.lattice, state, times, tol=o.tol, threads=threads)
    twa = twa_return_probability(cfg.lattice, b, times, o.n_samples, seed=seed,
                                 substeps=o.substeps)
    rows = np.column_stack([times, c_exact.values.real, twa.return_probability])
    meta = _base_metadata(cfg, seed)
    meta.update({
        "nbar": float(np.sum(np.abs(b) ** 2)),
        "n_samples": o.n_samples,
        "truncated_weight": state.truncated_weight,
        "twa_stderr_max": float(np.max(twa.return_stderr)),
    })
    return [ResultTable("autocorr", ["t", "C_exact", "C_twa"], rows, meta)]


# ---------------------------------------------------------------------------
# cbs: return-probability enhancement vs gauge phase


def run_cbs(cfg: RunConfig, seed, threads):
    o = cfg.options
    results = cbs_experiment(
        cfg.lattice, o.n_total, list(o.initial_state), list(o.phi_values),
        t_window=tuple(o.t_window), n_times=o.n_times, shell_width=o.shell_width,
    )
    rows = np.array([[r.phi, r.g, r.background, r.n_window_times] for r in results])
    meta = _base_metadata(cfg, seed)
    meta.update({
        "n_shell": results[0].n_shell,
        "drift": [r.drift for r in results],
        "warnings": sum((r.warnings for r in results), []),
    })
    return [ResultTable("cbs", ["phi", "g", "background", "n_window_times"], rows, meta)]


# ---------------------------------------------------------------------------
# rwm: exact vs semiclassical eigenvector covariance


def occupation_ball(basis, seed_state, radius):
    states = basis.states.astype(int)
    seed_state = np.asarray(seed_state, dtype=int)
    mask = (np.abs(states - seed_state) <= radius).all(axis=1)
    return states[mask]


def run_rwm(cfg: RunConfig, seed, threads):
    o = cfg.options
    basis = build_basis(cfg.lattice.L, o.n_total)
    H = assemble_hamiltonian(basis, cfg.lattice)
    spec = diagonalize(H, want_vectors=True)
    center = float(np.median(spec.energies)) if o.center == "median" else float(o.center)
    window = SpectralWindow(center=center, eta=o.eta)
    ball = occupation_ball(basis, o.seed_state, o.ball_radius)
    if len(ball) < 2:
        raise ConfigError("occupation ball holds fewer than 2 states")
    R_sc = semiclassical_covariance(ball, center, cfg.lattice, window,
                                    q_max=o.q_max, dos_mc=o.n_mc_dos, seed=seed)
    g_sc, warns_sc = normalized_correlator(R_sc)
    meta = _base_metadata(cfg, seed)
    meta.update({
        "window_center": center,
        "eta": o.eta,
        "n_ball": int(len(ball)),
        "states_in_window": window_count(spec, window),
        "rho_cl": R_sc.meta["rho_cl"],
        "q_max": o.q_max,
        "warnings": warns_sc,
    })
    iu, ju = np.triu_indices(len(ball), k=1)
    if o.compare_exact:
        R_ex = exact_covariance(spec, window, ball, basis)
        g_ex, warns_ex = normalized_correlator(R_ex)
        pearson = float(np.corrcoef(g_ex[iu, ju].real, g_sc[iu, ju])[0, 1])
        meta["pearson"] = pearson
        meta["warnings"] = meta["warnings"] + warns_ex
        rows = np.column_stack([iu, ju, g_ex[iu, ju].real, g_sc[iu, ju]])
        cols = ["i", "j", "g_exact", "g_semiclassical"]
    else:
        rows = np.column_stack([iu, ju, g_sc[iu, ju]])
        cols = ["i", "j", "g_semiclassical"]
    return [ResultTable("rwm", cols, rows, meta)]


# ---------------------------------------------------------------------------
# otoc: commutator growth, instability rate, and saturation


def run_otoc(cfg: RunConfig, seed, threads):
    o = cfg.options
    b = np.asarray(o.center, dtype=complex)
    if len(b) != cfg.lattice.L:
        raise ConfigError("otoc center length must equal lattice.L")
    nbar = float(np.sum(np.abs(b) ** 2))
    if o.times:
        times = np.concatenate([[0.0], np.asarray(o.times, dtype=float)])
    else:
        times = np.arange(0.0, o.t_max + 0.5 * o.dt, o.dt)
    state = coherent_state(b, k_sigma=o.k_sigma)
    series, _, dropped = otoc_multisector(
        cfg.lattice, state, times, sites=tuple(o.sites), tol=o.tol,
        method=o.method, weight_floor=o.weight_floor, threads=threads,
    )
    c = series.values

    # instability rate at the stationary field configuration
    guess = np.asarray(o.fixed_point_guess, dtype=complex) if o.fixed_point_guess else b
    psi_fp, mu = fixed_point(cfg.lattice, guess, float(np.sum(np.abs(guess) ** 2)))
    exponents = stability_exponents(cfg.lattice, psi_fp, mu)
    lam_exact = float(np.max(exponents.real))
    ben = lyapunov_benettin(cfg.lattice, psi_fp, o.benettin_time,
                            n_blocks=o.n_blocks, seed=seed)
    lam = ben.value
    if lam <= 0:
        raise NumericError("tangent growth rate is not positive at the reference point")

    t_e = float(np.log(nbar) / lam)
    fit_lo, fit_hi = 1.0 / lam, t_e
    msk = (times > fit_lo) & (times < fit_hi) & (c > 0)
    if msk.sum() < 3:
        raise NumericError("fewer than 3 usable points in the growth-fit window")
    slope, icept = np.polyfit(times[msk], np.log(c[msk]), 1)

    late = c[times >= 0.75 * times[-1]]
    plateau = float(late.mean())
    onset_idx = np.argmax(c >= 0.5 * plateau)
    t_onset = float(times[onset_idx])
    half1 = c[(times >= 0.5 * times[-1]) & (times < 0.75 * times[-1])]
    stationarity = abs(half1.mean() - plateau) / plateau if plateau > 0 else np.inf

    rows = np.column_stack([times, c, c / nbar**2])
    meta = _base_metadata(cfg, seed)
    meta.update({
        "nbar": nbar,
        "dropped_weight": dropped,
        "lambda_benettin": lam,
        "lambda_benettin_err": ben.error,
        "lambda_exact": lam_exact,
        "fit_window": [float(fit_lo), float(fit_hi)],
        "slope": float(slope),
        "t_ehrenfest": float(t_e),
        "t_onset": t_onset,
        "plateau": plateau,
        "stationarity": float(stationarity),
    })
    return [ResultTable("otoc", ["t", "C_raw", "C_per_particle"], rows, meta)]


# ---------------------------------------------------------------------------
# spectra: disorder-ensemble form factor against the closed form


def run_spectra(cfg: RunConfig, seed, threads):
    o = cfg.options
    basis = build_basis(cfg.lattice.L, o.n_total)
    eps_rows = disorder_realizations(cfg.lattice.L, cfg.lattice.J, o.n_realizations,
                                     seed=seed, scale=o.eps_scale)
    ensemble = []
    for row in eps_rows:
        p = replace(cfg.lattice, eps=tuple(row))
        H = assemble_hamiltonian(basis, p)
        dense = H.toarray() if hasattr(H, "toarray") else np.asarray(H)
        ensemble.append(unfold(np.linalg.eigvalsh(dense), sigma=o.sigma, trim=o.trim))
    tau = np.arange(o.tau_min, o.tau_max + 0.5 * o.dtau, o.dtau)
    K_band = form_factor(ensemble, tau, smooth_width=o.smooth_band)
    K_ramp = form_factor(ensemble, tau, smooth_width=o.smooth_ramp)
    K_ref = goe_form_factor(tau)
    band = (tau >= 0.2) & (tau <= 2.0)
    meta = _base_metadata(cfg, seed)
    meta.update({
        "dim": len(basis),
        "n_realizations": o.n_realizations,
        "max_dev_band": float(np.max(np.abs(K_band[band] - K_ref[band]))) if band.any() else None,
        "ramp_slope": ramp_slope(tau, K_ramp),
        "symmetry_resolution": (
            "lattice symmetries split by on-site disorder "
            f"uniform(-{o.eps_scale}J, {o.eps_scale}J), {o.n_realizations} realizations"
        ),
    })
    rows = np.column_stack([tau, K_band, K_ramp, K_ref])
    return [ResultTable("spectra", ["tau", "K_band", "K_ramp", "K_goe"], rows, meta)]


# ---------------------------------------------------------------------------
# lyapunov: largest tangent-growth rate of the mean-field flow


def run_lyapunov(cfg: RunConfig, seed, threads):
    o = cfg.options
    psi0 = np.asarray(o.psi0, dtype=complex)
    if len(psi0) != cfg.lattice.L:
        raise ConfigError("lyapunov psi0 length must equal lattice.L")
    meta = _base_metadata(cfg, seed)
    if o.polish_fixed_point:
        psi0, mu = fixed_point(cfg.lattice, psi0, float(np.sum(np.abs(psi0) ** 2)))
        exponents = stability_exponents(cfg.lattice, psi0, mu)
        meta["lambda_exact"] = float(np.max(exponents.real))
        meta["mu"] = float(mu)
    est = lyapunov_benettin(cfg.lattice, psi0, o.t_total, renorm_dt=o.renorm_dt,
                            n_blocks=o.n_blocks, seed=seed)
    meta.update({
        "lambda": est.value,
        "stderr": est.error,
        "drift": est.drift,
        "t_total": o.t_total,
        "warnings": est.warnings,
    })
    rows = np.column_stack([np.arange(len(est.block_values)), est.block_values])
    return [ResultTable("lyapunov", ["block", "lambda_block"], rows, meta)]


_RUNNERS = {
    "autocorr": run_autocorr,
    "cbs": run_cbs,
    "rwm": run_rwm,
    "otoc": run_otoc,
    "spectra": run_spectra,
    "lyapunov": run_lyapunov,
}


def run(cfg: RunConfig, seed=None, threads=None):
    """Execute the experiment and return its tables (not yet written)."""
    seed = cfg.seed if seed is None else seed
    threads = _resolve_threads(cfg.threads if threads is None else threads)
    t0 = time.perf_counter()
    tables = _RUNNERS[cfg.experiment](cfg, seed, threads)
    wall = time.perf_counter() - t0
    for t in tables:
        t.metadata["wall_time_s"] = round(wall, 3)
    return tables


def write_tables(tables, out_dir):
    return [t.write(out_dir) for t in tables]
