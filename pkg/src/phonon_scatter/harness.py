"""Configuration-driven experiments with reproducible reports.

Configs are JSON trees; named presets are config fragments merged key by
key (explicit keys win, nested dicts merge recursively).  Every runner
validates the full config against the module preconditions before any
compute starts, echoes the config into its report, and emits CSV tables
whose bytes depend only on (config, seed).

Experiments
-----------
coefficients     scattering table, identity checks, PV-vs-resolvent oracle
scattering       deterministic packet run(s), energy fractions vs the table
convergence      scattering with an N sweep and monotonicity check
production       thermal ensemble from vacuum, wedge plateaus vs absorb*T
equilibrium      Gibbs start, stationarity of the spectral energy density
transport_check  closed-form residuals and the transform-pair consistency
"""

from __future__ import annotations

import copy
import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import (EnsembleNoise, ThermostatParams, dump_snapshots, run_direct,
                       site_coordinates, wave_field, wave_field_hat)
from .errors import ConfigError, InvalidRunError
from .kinetics import (CosineBumpSquaredProfile, LimitSolution, SeparableInitialData,
                       boundary_residual, equilibrium_initial_data,
                       laplace_fourier_limit, laplace_fourier_numeric, limit_wigner,
                       transport_residual)
from .lattice import DispersionRelation, kernel_from_spec
from .memory import MemoryKernel
from .packets import WavePacketSpec, gibbs_ensemble, init_rng, sample_initial
from .scattering import build_table, nu_laplace_limit
from .wigner import (production_profile, scattering_fractions, wavenumber_grid,
                     wigner_estimate)

EXPERIMENTS = ("coefficients", "scattering", "convergence", "production",
               "equilibrium", "transport_check")

SEAM_GUARD_FRACTION = 1e-6

PRESETS: dict[str, dict] = {
    "nn_unpinned": {"kernel": "nn_unpinned"},
    "nn_pinned": {"kernel": "nn_pinned(1.0)"},
    "default_table": {"table": {"n_k": 512, "delta_excl": 0.02}},
    "default_packet": {
        "packet": {"x_center": -0.2, "k_center": 0.25, "width": 0.1,
                   "envelope": "cosine", "phase_random": True},
    },
}


def _deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve_config(config: dict) -> dict:
    """Apply presets, then fill experiment-independent defaults."""
    merged: dict = {}
    for name in config.get("presets", []):
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        merged = _deep_merge(merged, PRESETS[name])
    merged = _deep_merge(merged, {k: v for k, v in config.items() if k != "presets"})
    merged.setdefault("gamma", 1.0)
    merged.setdefault("temperature", 0.0)
    merged.setdefault("seed", 0)
    merged.setdefault("threads", 1)
    merged.setdefault("table", {"n_k": 512, "delta_excl": 0.02})
    return merged


@dataclass
class Check:
    name: str
    measured: float
    target: float
    tolerance: float
    passed: bool

    @classmethod
    def leq(cls, name: str, measured: float, bound: float) -> "Check":
        return cls(name, float(measured), float(bound), float(bound),
                   bool(measured <= bound))

    @classmethod
    def within(cls, name: str, measured: float, target: float, tol: float) -> "Check":
        return cls(name, float(measured), float(target), float(tol),
                   bool(abs(measured - target) <= tol))


@dataclass
class RunReport:
    experiment: str
    config: dict
    checks: list[Check] = field(default_factory=list)
    invalid: bool = False
    notes: list[str] = field(default_factory=list)
    wall_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.invalid and all(c.passed for c in self.checks)

    def add(self, check: Check) -> None:
        self.checks.append(check)

    def manifest(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "passed": self.passed,
            "invalid_run": self.invalid,
            "notes": self.notes,
            "checks": [vars(c) for c in self.checks],
            "wall_seconds": round(self.wall_seconds, 3),
        }


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _build_stage(cfg: dict):
    kernel = kernel_from_spec(cfg.get("kernel", "nn_unpinned"))
    disp = DispersionRelation(kernel)
    return kernel, disp


def _validate_lattice(cfg: dict, disp) -> None:
    N = cfg.get("N")
    _require(isinstance(N, int) and N > 0 and not (N & (N - 1)),
             "N must be a positive power of two")
    dt = cfg.get("dt")
    _require(isinstance(dt, (int, float)) and dt > 0, "dt must be positive")
    _require(dt * disp.omega_max < 0.5,
             f"dt*omega_max = {dt * disp.omega_max:.3f} violates the stability margin 0.5")
    _require(cfg.get("t_macro", 0) > 0, "t_macro must be positive")


# -- experiment: coefficients -------------------------------------------------

def run_coefficients(cfg: dict, outdir: Path) -> RunReport:
    cfg = resolve_config(cfg)
    report = RunReport("coefficients", cfg)
    t0 = time.perf_counter()
    kernel, disp = _build_stage(cfg)
    tcfg = cfg["table"]
    gamma = float(cfg["gamma"])
    table = build_table(disp, gamma, n_k=int(tcfg["n_k"]),
                        delta_excl=float(tcfg["delta_excl"]))
    report.add(Check.leq("sum_identity_max_residual", table.max_sum_residual, 1e-8))
    report.add(Check.leq("re_nu_identity_max_residual", table.max_renu_residual, 1e-6))
    # evenness of nu under k -> -k: the filtered grid is negation-symmetric,
    # so reversal pairs each k with -k
    assert np.allclose(table.k_grid, -table.k_grid[::-1], atol=1e-14)
    even_res = float(np.max(np.abs(table.nu - table.nu[::-1])))
    report.add(Check.leq("nu_evenness_max_residual", even_res, 1e-10))
    # PV vs resolvent boundary-value oracle
    stride = int(cfg.get("cross_oracle_stride", 1))
    mcfg = cfg.get("memory", {})
    mk = MemoryKernel(disp, gamma, dt=float(mcfg.get("dt", 1e-3)),
                      horizon=float(mcfg.get("horizon", 0.5)))
    sel = np.arange(table.k_grid.size)[::stride]
    diffs = np.array([abs(nu_laplace_limit(mk, float(table.k_grid[i])) - table.nu[i])
                      for i in sel])
    report.add(Check.leq("nu_cross_oracle_max_diff", float(diffs.max()), 1e-3))
    table.export_csv(outdir / "coefficients.csv")
    (outdir / "coefficients.gp").write_text(
        "# gnuplot layout for coefficients.csv\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 'k'\nset ylabel 'probability'\n"
        "plot 'coefficients.csv' using 1:5 with lines, "
        "'' using 1:6 with lines, '' using 1:4 with lines\n")
    report.wall_seconds = time.perf_counter() - t0
    return report


# -- experiment: scattering / convergence ------------------------------------

def _seam_energy_fraction(psi: np.ndarray, total: float) -> float:
    N = psi.shape[-1]
    seam = np.abs(site_coordinates(N)) >= N // 2 - N // 8
    return float(np.sum(np.abs(psi[..., seam]) ** 2) / total)


def _one_scattering_run(cfg: dict, kernel, disp, N: int):
    pcfg = cfg["packet"]
    spec = WavePacketSpec(x_center=float(pcfg["x_center"]),
                          k_center=float(pcfg["k_center"]),
                          width=float(pcfg["width"]),
                          envelope=pcfg.get("envelope", "cosine"),
                          phase_random=bool(pcfg.get("phase_random", True)))
    state = sample_initial(spec, N, disp, rng=init_rng(int(cfg["seed"])),
                           delta_excl=float(cfg["table"]["delta_excl"]))
    psi0 = wave_field(state.p, state.q, disp)
    total0 = float(np.sum(np.abs(psi0) ** 2))
    e0 = total0 / N
    params = ThermostatParams(float(cfg["gamma"]), 0.0)
    dt = float(cfg["dt"])
    n_steps = int(round(float(cfg["t_macro"]) * N / dt))
    guard_every = max(1, n_steps // 8)
    seam_max = 0.0

    def snap(p, q):
        nonlocal seam_max
        seam_max = max(seam_max, _seam_energy_fraction(wave_field(p, q, disp), total0))
        return None

    run_direct(state.p, state.q, kernel, disp, params, dt, n_steps,
               snapshot_every=guard_every, snapshot_fn=snap)
    psi = wave_field(state.p, state.q, disp)
    if seam_max > SEAM_GUARD_FRACTION:
        raise InvalidRunError(
            f"wraparound guard tripped: seam energy fraction {seam_max:.2e} "
            f"exceeds {SEAM_GUARD_FRACTION:.0e} at N={N}"
        )
    fr = scattering_fractions(psi, disp, spec.k_center, e0,
                              window_halfwidth=float(cfg.get("window_halfwidth", 0.1)))
    return spec, fr, seam_max, state


def run_scattering(cfg: dict, outdir: Path, sweep: bool = False) -> RunReport:
    cfg = resolve_config(cfg)
    name = "convergence" if sweep else "scattering"
    report = RunReport(name, cfg)
    t0 = time.perf_counter()
    _require(float(cfg["temperature"]) == 0.0,
             "scattering experiments are zero-temperature")
    kernel, disp = _build_stage(cfg)
    Ns = [int(n) for n in cfg.get("sweep_N", [cfg.get("N")])] if sweep else [int(cfg["N"])]
    for N in Ns:
        _validate_lattice({**cfg, "N": N}, disp)
    tcfg = cfg["table"]
    table = build_table(disp, float(cfg["gamma"]), n_k=int(tcfg["n_k"]),
                        delta_excl=float(tcfg["delta_excl"]))
    tol = float(cfg.get("fraction_tolerance", 0.05))
    rows = []
    errors = []
    for N in Ns:
        try:
            spec, fr, seam, state = _one_scattering_run(cfg, kernel, disp, N)
        except InvalidRunError as exc:
            report.invalid = True
            report.notes.append(str(exc))
            break
        kc = spec.k_center
        if cfg.get("dump_state"):
            dump_snapshots(outdir / f"state_N{N}.bin", [(state.p, state.q)],
                           dt=float(cfg["dt"]),
                           times=[float(cfg["t_macro"]) * N],
                           seed=int(cfg["seed"]), kernel_name=kernel.name)
        targets = (float(table.p_plus_at(kc)), float(table.p_minus_at(kc)),
                   float(table.absorb_at(kc)))
        measured = (fr.transmitted, fr.reflected, fr.absorbed)
        err = max(abs(m - t) for m, t in zip(measured, targets))
        errors.append(err)
        rows.append([N, *(f"{v:.8f}" for v in measured), *(f"{v:.8f}" for v in targets),
                     f"{err:.8f}", f"{seam:.3e}"])
        for label, m, t in zip(("transmitted", "reflected", "absorbed"),
                               measured, targets):
            report.add(Check.within(f"{label}_fraction_N{N}", m, t, tol))
    if sweep and len(errors) == len(Ns) and len(errors) > 1:
        slack = float(cfg.get("sweep_slack", 0.2))
        growth = max(errors[i + 1] / max(errors[i], 1e-300)
                     for i in range(len(errors) - 1))
        report.add(Check.leq("sweep_error_growth", growth, 1.0 + slack))
    _write_csv(outdir / f"{name}.csv",
               ["N", "transmitted", "reflected", "absorbed",
                "p_plus", "p_minus", "absorb", "max_error", "seam_fraction"],
               rows)
    report.wall_seconds = time.perf_counter() - t0
    return report


# -- thermal ensembles ---------------------------------------------------------

def run_thermal_ensemble(kernel, disp, params: ThermostatParams, N: int, dt: float,
                         n_steps: int, n_paths: int, seed0: int, threads: int = 1,
                         gibbs_temperature: float | None = None,
                         snapshot_every: int = 0, snapshot_fn=None):
    """Integrate n_paths thermostatted chains, chunked across a worker pool.

    Initial conditions are zero (vacuum) or Gibbs at `gibbs_temperature`;
    path i draws its noise from the Philox key seed0 + i regardless of
    chunking, and the initial-condition stream is disjoint from the noise
    keys, so results do not depend on the thread count.  Returns the final
    (p, q) arrays, plus per-chunk snapshot lists in path order.
    """
    threads = max(1, int(threads))
    bounds = np.linspace(0, n_paths, threads + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    p_out = np.empty((n_paths, N))
    q_out = np.empty((n_paths, N))
    snaps: dict[int, list] = {}

    def work(bounds_pair):
        a, b = bounds_pair
        m = b - a
        if gibbs_temperature is None:
            p = np.zeros((m, N))
            q = np.zeros((m, N))
        else:
            p, q = gibbs_ensemble(N, disp, gibbs_temperature, seed0, range(a, b))
        noise = EnsembleNoise(seed0 + a, m, dt) if (
            params.gamma > 0 and params.temperature > 0) else None
        traj = run_direct(p, q, kernel, disp, params, dt, n_steps, noise=noise,
                          snapshot_every=snapshot_every,
                          snapshot_fn=(None if snapshot_fn is None
                                       else (lambda pp, qq: snapshot_fn(pp, qq))))
        return a, b, p, q, ([] if traj is None else traj.snapshots)

    if threads == 1:
        results = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    for a, b, p, q, s in results:
        p_out[a:b] = p
        q_out[a:b] = q
        snaps[a] = s
    ordered_snaps = [snaps[a] for a, _ in chunks]
    return p_out, q_out, ordered_snaps


# -- experiment: production ----------------------------------------------------

def run_production(cfg: dict, outdir: Path) -> RunReport:
    cfg = resolve_config(cfg)
    report = RunReport("production", cfg)
    t0 = time.perf_counter()
    T = float(cfg["temperature"])
    _require(T > 0, "production requires temperature > 0")
    kernel, disp = _build_stage(cfg)
    _validate_lattice(cfg, disp)
    N = int(cfg["N"])
    M = int(cfg.get("ensemble", {}).get("paths", 1000))
    _require(M >= 1, "ensemble.paths must be >= 1")
    tcfg = cfg["table"]
    table = build_table(disp, float(cfg["gamma"]), n_k=int(tcfg["n_k"]),
                        delta_excl=float(tcfg["delta_excl"]))
    dt = float(cfg["dt"])
    t_macro = float(cfg["t_macro"])
    n_steps = int(round(t_macro * N / dt))
    params = ThermostatParams(float(cfg["gamma"]), T)
    p, q, _ = run_thermal_ensemble(kernel, disp, params, N, dt, n_steps, M,
                                   int(cfg["seed"]), threads=int(cfg["threads"]))
    psi = wave_field(p, q, disp)
    band = tuple(cfg.get("k_band", (0.15, 0.35)))
    bins, warnings = production_profile(psi, disp, table, T, t_macro,
                                        k_band=band,
                                        n_bins=int(cfg.get("n_bins", 8)),
                                        min_samples=int(cfg.get("min_samples", 1000)))
    report.notes.extend(warnings)
    ratio_tol = float(cfg.get("plateau_ratio_tolerance", 0.1))
    rows = []
    for b in bins:
        ratio = b.estimate / b.prediction if b.prediction else float("nan")
        report.add(Check.within(f"plateau_ratio_k{b.k_mid:.3f}", ratio, 1.0, ratio_tol))
        rows.append([f"{b.k_lo:.5f}", f"{b.k_hi:.5f}", f"{b.estimate:.8f}",
                     f"{b.stderr:.2e}", f"{b.prediction:.8f}", f"{ratio:.5f}"])
    _write_csv(outdir / "production.csv",
               ["k_lo", "k_hi", "wedge_density", "stderr", "absorb_T", "ratio"], rows)
    report.wall_seconds = time.perf_counter() - t0
    return report


# -- experiment: equilibrium ----------------------------------------------------

def run_equilibrium(cfg: dict, outdir: Path) -> RunReport:
    cfg = resolve_config(cfg)
    report = RunReport("equilibrium", cfg)
    t0 = time.perf_counter()
    T = float(cfg["temperature"])
    _require(T > 0, "equilibrium requires temperature > 0")
    kernel, disp = _build_stage(cfg)
    _validate_lattice(cfg, disp)
    N = int(cfg["N"])
    M = int(cfg.get("ensemble", {}).get("paths", 200))
    dt = float(cfg["dt"])
    n_steps = int(round(float(cfg["t_macro"]) * N / dt))
    n_records = int(cfg.get("records", 5))
    stride = max(1, n_steps // n_records)
    params = ThermostatParams(float(cfg["gamma"]), T)

    def snap(p, q):
        return wave_field_hat(p, q, disp)

    p, q, snaps = run_thermal_ensemble(kernel, disp, params, N, dt, n_steps, M,
                                       int(cfg["seed"]), threads=int(cfg["threads"]),
                                       gibbs_temperature=T,
                                       snapshot_every=stride, snapshot_fn=snap)
    n_snaps = min(len(s) for s in snaps)
    delta = float(cfg["table"]["delta_excl"])
    k = wavenumber_grid(N)
    keep = disp.distance_to_stationary(k) > delta
    if disp.kind == "acoustic":
        keep &= np.abs(k) > delta
    edges = np.linspace(-0.5, 0.5, int(cfg.get("n_bins", 40)) + 1)
    rows = []
    worst = 0.0
    eps = 1.0 / N
    for snap_idx in range(n_snaps):
        psi_hat = np.concatenate([s[snap_idx] for s in snaps], axis=0)
        density = 0.5 * eps * np.abs(psi_hat) ** 2  # per path, per mode
        for lo, hi in zip(edges[:-1], edges[1:]):
            sel = keep & (k >= lo) & (k < hi)
            if sel.sum() < 3:
                continue
            # bin-average per path first: the paths are independent, the
            # modes within a path are not (shared thermostat noise)
            per_path = density[:, sel].mean(axis=1)
            mean = float(per_path.mean())
            stderr = float(per_path.std(ddof=1)) / np.sqrt(per_path.size)
            dev = abs(mean - T) / max(stderr, 1e-300)
            worst = max(worst, dev)
            rows.append([snap_idx, f"{lo:.4f}", f"{hi:.4f}", f"{mean:.6f}",
                         f"{stderr:.2e}", f"{dev:.3f}"])
    report.add(Check.leq("stationarity_worst_sigma", worst, 3.0))
    _write_csv(outdir / "equilibrium.csv",
               ["record", "k_lo", "k_hi", "mean_density", "stderr", "sigmas"], rows)
    # final-record spectral density on the raw grid, with the constant limit
    final_hat = np.concatenate([s[n_snaps - 1] for s in snaps], axis=0)
    est = wigner_estimate(final_hat, eps, eta_max=0)
    est.export_csv(outdir / "wigner_eta0.csv", limit=lambda k: T)
    report.wall_seconds = time.perf_counter() - t0
    return report


# -- experiment: transport_check -------------------------------------------------

def run_transport_check(cfg: dict, outdir: Path) -> RunReport:
    cfg = resolve_config(cfg)
    report = RunReport("transport_check", cfg)
    t0 = time.perf_counter()
    kernel, disp = _build_stage(cfg)
    tcfg = cfg["table"]
    gamma = float(cfg["gamma"])
    # the closed-form residual checks need a nonzero production term
    T = float(cfg.get("temperature", 1.0))
    if T == 0.0:
        T = 1.0
    table = build_table(disp, gamma, n_k=int(tcfg["n_k"]),
                        delta_excl=float(tcfg["delta_excl"]))
    prof = CosineBumpSquaredProfile(center=float(cfg.get("profile_center", -0.3)),
                                    width=float(cfg.get("profile_width", 0.25)))
    spectral = lambda k: 0.6 + 0.4 * np.cos(2 * np.pi * np.asarray(k, dtype=float))
    data = SeparableInitialData(prof, spectral)
    sol = LimitSolution.from_separable(data, table, temperature=T, disp=disp)
    sol_eq = LimitSolution(w0=equilibrium_initial_data(T), table=table,
                           temperature=T, disp=disp)
    ks = [float(v) for v in cfg.get("check_wavenumbers", (0.25, 0.3))]
    rows = []
    worst_boundary = 0.0
    worst_eq = 0.0
    worst_transport = 0.0
    for k in ks:
        rb = boundary_residual(sol, 1.0, k)
        rq = boundary_residual(sol_eq, 1.0, k)
        worst_boundary = max(worst_boundary, rb, rq)
        xs = np.linspace(-1.0, 1.0, 81)
        eq_dev = float(np.max(np.abs(limit_wigner(sol_eq, 2.0, xs, k) - T)))
        worst_eq = max(worst_eq, eq_dev)
        for x in (0.1, -0.1):
            worst_transport = max(worst_transport, transport_residual(sol, 1.0, x, k))
        rows.append([f"{k:.4f}", f"{rb:.3e}", f"{rq:.3e}", f"{eq_dev:.3e}"])
    report.add(Check.leq("boundary_residual_max", worst_boundary, 1e-12))
    report.add(Check.leq("equilibrium_invariance_max", worst_eq, 1e-12))
    report.add(Check.leq("transport_fd_residual_max", worst_transport, 1e-6))
    spots = cfg.get("transform_spots", [[1.0, 2.0, 0.25]])
    worst_pair = 0.0
    for lam, eta, k in spots:
        an = laplace_fourier_limit(sol, float(lam), float(eta), float(k))
        num = laplace_fourier_numeric(sol, float(lam), float(eta), float(k))
        worst_pair = max(worst_pair, abs(an - num))
        rows.append([f"spot({lam},{eta},{k})", f"{abs(an - num):.3e}", "", ""])
    report.add(Check.leq("transform_pair_max_diff", worst_pair, 1e-3))
    _write_csv(outdir / "transport_check.csv",
               ["k_or_spot", "boundary_residual", "equilibrium_boundary_residual",
                "equilibrium_deviation"], rows)
    report.wall_seconds = time.perf_counter() - t0
    return report


RUNNERS = {
    "coefficients": run_coefficients,
    "scattering": lambda cfg, out: run_scattering(cfg, out, sweep=False),
    "convergence": lambda cfg, out: run_scattering(cfg, out, sweep=True),
    "production": run_production,
    "equilibrium": run_equilibrium,
    "transport_check": run_transport_check,
}


def run_experiment(config: dict, outdir) -> RunReport:
    """Dispatch a validated config to its experiment runner."""
    experiment = config.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {EXPERIMENTS}, got {experiment!r}"
        )
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    report = RUNNERS[experiment](config, outdir)
    with (outdir / "manifest.json").open("w") as fh:
        json.dump(report.manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report
