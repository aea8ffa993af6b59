#!/usr/bin/env python3
"""Equilibrium is a fixed point: Gibbs in, Gibbs out.

Sampling (p, q) from the Gibbs measure at the thermostat's own temperature
and letting the dynamics run must keep the spectral energy density pinned
at T for every wavenumber: the thermostat's absorption and production
balance exactly.  This is the statistical counterpart of the coefficient
identity p+ + p- + absorb = 1.

Run:  python demos/05_equilibrium_stationarity.py
Output: demos/out/equilibrium.csv + console summary
"""

import csv
from pathlib import Path

import numpy as np

from phonon_scatter import (DispersionRelation, ThermostatParams, gibbs_ensemble,
                            nn_unpinned, wavenumber_grid, wigner_estimate)
from phonon_scatter.dynamics import EnsembleNoise, run_direct, wave_field_hat

OUT = Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    ker = nn_unpinned()
    disp = DispersionRelation(ker)
    N, M, T = 256, 150, 1.0
    dt = 0.05
    p, q = gibbs_ensemble(N, disp, T, seed0=21, path_ids=range(M))
    est0 = wigner_estimate(wave_field_hat(p, q, disp), 1.0 / N, eta_max=0)
    run_direct(p, q, ker, disp, ThermostatParams(1.0, T), dt,
               int(round(400.0 / dt)), noise=EnsembleNoise(21, M, dt))
    est1 = wigner_estimate(wave_field_hat(p, q, disp), 1.0 / N, eta_max=0)
    k = wavenumber_grid(N)
    keep = np.abs(np.abs(k) - 0.25) < 0.2  # stay clear of band edges
    r0, r1 = est0.row(0).real, est1.row(0).real
    print(f"initial row: mean {r0[keep].mean():.4f} (target {T})")
    print(f"after t=400: mean {r1[keep].mean():.4f}, "
          f"max |dev|/se = "
          f"{np.max(np.abs(r1[keep]-T)/np.maximum(est1.row_stderr(0)[keep], 1e-12)):.2f}")
    with (OUT / "equilibrium.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "density_initial", "density_final", "stderr_final"])
        for i in np.argsort(k):
            w.writerow([f"{k[i]:.6f}", f"{r0[i]:.6f}", f"{r1[i]:.6f}",
                        f"{est1.row_stderr(0)[i]:.2e}"])
    print(f"wrote {OUT/'equilibrium.csv'}")


if __name__ == "__main__":
    main()
