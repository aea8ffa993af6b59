import numpy as np
import pytest
from scipy.stats import kstest

from phonon_scatter import (ChainState, ConfigError, CouplingKernel,
                            DispersionRelation, EnsembleNoise, HorizonError,
                            MemoryKernel, NoisePath, ThermostatParams,
                            UnsupportedBranchError, energy_balance_residual,
                            nn_unpinned, p0_volterra, psi_spectral_mild, run_direct,
                            site_coordinates, state_from_wave_field, step_direct,
                            wave_field, wave_field_hat)


def _random_state(N, scale=0.1, seed=7):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(N) * scale, rng.standard_normal(N) * scale


def _packet_field(N, xc, kc, w):
    eps = 1.0 / N
    y = site_coordinates(N)
    x = eps * y - xc
    env = np.where(np.abs(x) <= w, np.cos(np.pi * np.clip(x, -w, w) / (2 * w)) ** 2, 0.0)
    return np.sqrt(eps) * env * np.exp(2j * np.pi * kc * y)


def test_noise_reproducible_and_normal():
    a = NoisePath(42, 0.01).increments(1000)
    b = NoisePath(42, 0.01).increments(1000)
    assert np.array_equal(a, b)
    draws = NoisePath(7, 1.0).increments(100_000)
    assert kstest(draws, "norm").pvalue > 0.01


def test_ensemble_noise_per_path_keys():
    ens = EnsembleNoise(100, 3, 0.01)
    block = ens.block(50)
    for i in range(3):
        assert np.array_equal(block[:, i], NoisePath(100 + i, 0.01).increments(50))


def test_trajectory_determinism(disp_unpinned):
    ker = nn_unpinned()
    results = []
    for _ in range(2):
        p, q = np.zeros(64), np.zeros(64)
        noise = NoisePath(11, 0.02)
        run_direct(p, q, ker, disp_unpinned, ThermostatParams(1.0, 0.5), 0.02, 500,
                   noise=noise)
        results.append((p.copy(), q.copy()))
    assert np.array_equal(results[0][0], results[1][0])
    assert np.array_equal(results[0][1], results[1][1])


def test_stability_precondition(disp_unpinned):
    p, q = np.zeros(32), np.zeros(32)
    with pytest.raises(ConfigError):
        run_direct(p, q, nn_unpinned(), disp_unpinned, ThermostatParams(), 0.3, 1)


def test_energy_conservation_free(disp_unpinned):
    # the shadow-energy oscillation scales like (dt*omega_max)^2/8, so the
    # 1e-6 relative bound over 1e5 steps needs dt <= ~5e-4 at omega_max = 2
    ker = nn_unpinned()
    p, q = _random_state(256)
    st = ChainState(256, p, q)
    E0 = st.energy(ker)
    traj = run_direct(st.p, st.q, ker, disp_unpinned, ThermostatParams(0.0, 0.0),
                      dt=5e-4, n_steps=100_000, record=True)
    assert np.max(np.abs(traj.energies - E0)) / E0 < 1e-6
    assert energy_balance_residual(traj, ThermostatParams(0.0, 0.0)) < 1e-6


def test_energy_balance_residual_tight_at_small_dt(disp_unpinned):
    ker = nn_unpinned()
    p, q = _random_state(64)
    traj = run_direct(p, q, ker, disp_unpinned, ThermostatParams(0.0, 0.0),
                      dt=2e-5, n_steps=2000, record=True)
    assert energy_balance_residual(traj, ThermostatParams(0.0, 0.0)) < 1e-8


def test_damped_energy_monotone(disp_unpinned):
    ker = nn_unpinned()
    p, q = _random_state(128)
    params = ThermostatParams(1.0, 0.0)
    traj = run_direct(p, q, ker, disp_unpinned, params, dt=2e-3, n_steps=5000,
                      record=True)
    assert np.max(np.diff(traj.energies)) < 5e-8  # non-increasing up to roundoff
    res = energy_balance_residual(traj, params)
    assert res < 50 * traj.dt


def test_residual_first_order_in_dt(disp_unpinned):
    ker = nn_unpinned()
    vals = []
    for dt in (4e-3, 2e-3):
        p, q = _random_state(128)
        traj = run_direct(p, q, ker, disp_unpinned, ThermostatParams(1.0, 0.0),
                          dt=dt, n_steps=int(round(8.0 / dt)), record=True)
        vals.append(energy_balance_residual(traj, ThermostatParams(1.0, 0.0)))
    assert vals[1] < 0.7 * vals[0]


def test_single_site_thermalization():
    # isolated pinned oscillator with thermostat: stationary E[p^2] = T
    ker = CouplingKernel({0: 1.0}, decay_constant=2.0)
    disp = DispersionRelation(ker)
    M, T = 10_000, 0.8
    p = np.zeros((M, 1))
    q = np.zeros((M, 1))
    run_direct(p, q, ker, disp, ThermostatParams(1.5, T), dt=0.05, n_steps=2000,
               noise=EnsembleNoise(3, M, 0.05))
    se = np.std(p[:, 0] ** 2, ddof=1) / np.sqrt(M)
    assert abs(np.mean(p**2) - T) < 3 * se + 0.01 * T  # 3 SE plus dt bias allowance


def test_strong_order_under_path_refinement(disp_unpinned):
    ker = nn_unpinned()
    T, gamma = 0.5, 1.0
    dt_f = 1e-3
    n_f = 4000
    fine = NoisePath(21, dt_f).increments(n_f)
    p_f, q_f = _random_state(64, seed=5)
    run_direct(p_f, q_f, ker, disp_unpinned, ThermostatParams(gamma, T), dt_f, n_f,
               noise=fine.copy())
    errs = []
    for fac in (2, 4):
        dw = fine.reshape(-1, fac).sum(axis=1)
        p_c, q_c = _random_state(64, seed=5)
        run_direct(p_c, q_c, ker, disp_unpinned, ThermostatParams(gamma, T),
                   dt_f * fac, n_f // fac, noise=dw)
        errs.append(np.sqrt(np.sum((p_c - p_f) ** 2) + np.sum((q_c - q_f) ** 2)))
    assert errs[1] / errs[0] > 1.8  # halving dt contracts the strong error


def test_wave_field_identities(disp_unpinned):
    ker = nn_unpinned()
    p, q = _random_state(128)
    psi = wave_field(p, np.zeros(128), disp_unpinned)
    np.testing.assert_allclose(psi, 1j * p, atol=1e-12)
    st = ChainState(128, p, q)
    psi = wave_field(p, q, disp_unpinned)
    assert np.sum(np.abs(psi) ** 2) == pytest.approx(st.energy(ker), rel=1e-10)
    psi_hat = wave_field_hat(p, q, disp_unpinned)
    assert np.sum(np.abs(psi_hat) ** 2) / 128 == pytest.approx(st.energy(ker), rel=1e-10)


def test_local_energy_conserved_until_interface(disp_unpinned):
    # packet far from site 0: with strong damping present, total energy
    # stays put until the support reaches the thermostat
    ker = nn_unpinned()
    N = 512
    psi0 = _packet_field(N, -0.25, 0.25, 0.05)
    p, q = state_from_wave_field(psi0, disp_unpinned)
    E0 = float(np.sum(np.abs(wave_field(p, q, disp_unpinned)) ** 2))
    params = ThermostatParams(5.0, 0.0)
    # front needs ~ (0.25-0.05-margin)*N / v_max steps*dt to arrive
    dt = 5e-3
    n_safe = int(0.12 * N / 1.0 / dt)
    run_direct(p, q, ker, disp_unpinned, params, dt, n_safe)
    E_mid = float(np.sum(np.abs(wave_field(p, q, disp_unpinned)) ** 2))
    assert abs(E_mid - E0) / E0 < 1e-6
    run_direct(p, q, ker, disp_unpinned, params, dt, int(0.4 * N / dt / 1.0))
    E_after = float(np.sum(np.abs(wave_field(p, q, disp_unpinned)) ** 2))
    assert E_after < 0.9 * E0  # the interface has been doing work


def test_state_roundtrip_packet(disp_unpinned):
    psi0 = _packet_field(256, -0.1, 0.25, 0.1)
    p, q = state_from_wave_field(psi0, disp_unpinned)
    psi1 = wave_field(p, q, disp_unpinned)
    assert np.max(np.abs(psi1 - psi0)) < 1e-6  # DC mode drop only


def test_p0_volterra_trivial_cases(disp_unpinned, mk_unpinned_g1):
    N = 128
    zeros = np.zeros(N, dtype=complex)
    t, p0 = p0_volterra(zeros, mk_unpinned_g1, 2.0)
    assert np.all(p0 == 0.0)
    mk0 = MemoryKernel(disp_unpinned, 0.0, dt=1e-3, horizon=2.0)
    psi0 = np.fft.fft(_packet_field(N, -0.05, 0.25, 0.1))
    from phonon_scatter import p0_free
    t, p0 = p0_volterra(psi0, mk0, 2.0)
    np.testing.assert_allclose(p0, p0_free(psi0, disp_unpinned, t), atol=1e-14)
    with pytest.raises(UnsupportedBranchError):
        p0_volterra(psi0, mk_unpinned_g1, 1.0, temperature=0.5)
    with pytest.raises(HorizonError):
        p0_volterra(psi0, mk_unpinned_g1, 100.0)


def test_p0_cross_solver(disp_unpinned):
    ker = nn_unpinned()
    N = 256
    dt = 2e-3
    t_end = 50.0
    mk = MemoryKernel(disp_unpinned, 1.0, dt=dt, horizon=t_end)
    psi0 = _packet_field(N, -0.05, 0.25, 0.12)
    p, q = state_from_wave_field(psi0, disp_unpinned)
    psi0_hat = wave_field_hat(p, q, disp_unpinned)
    traj = run_direct(p, q, ker, disp_unpinned, ThermostatParams(1.0, 0.0), dt,
                      int(round(t_end / dt)), record=True)
    t, p0 = p0_volterra(psi0_hat, mk, t_end)
    sup = np.max(np.abs(p0[: traj.p0_at_ou.shape[0]] - traj.p0_at_ou))
    assert sup < 5 * dt


def test_mild_route_trivial_cases(disp_unpinned, mk_unpinned_g1):
    N = 128
    psi0_hat = np.fft.fft(_packet_field(N, -0.05, 0.25, 0.1))
    mk0 = MemoryKernel(disp_unpinned, 0.0, dt=1e-3, horizon=2.0)
    om = np.asarray(disp_unpinned.omega(np.arange(N) / N))
    out = psi_spectral_mild(psi0_hat, mk0, 1.5)
    np.testing.assert_allclose(out, np.exp(-1.5j * om) * psi0_hat, atol=1e-12)
    out0 = psi_spectral_mild(psi0_hat, mk_unpinned_g1, 0.0)
    np.testing.assert_allclose(out0, psi0_hat, atol=1e-14)
    with pytest.raises(UnsupportedBranchError):
        psi_spectral_mild(psi0_hat, mk_unpinned_g1, 1.0, temperature=1.0)


def test_cross_solver_field_contracts(disp_unpinned):
    ker = nn_unpinned()
    N = 128
    t_end = 5.0
    psi0 = _packet_field(N, -0.05, 0.25, 0.12)
    rels = []
    for dt in (4e-3, 2e-3):
        mk = MemoryKernel(disp_unpinned, 1.0, dt=dt, horizon=t_end)
        p, q = state_from_wave_field(psi0, disp_unpinned)
        psi0_hat = wave_field_hat(p, q, disp_unpinned)
        run_direct(p, q, ker, disp_unpinned, ThermostatParams(1.0, 0.0), dt,
                   int(round(t_end / dt)))
        direct = wave_field_hat(p, q, disp_unpinned)
        mild = psi_spectral_mild(psi0_hat, mk, t_end)
        rels.append(np.linalg.norm(mild - direct) / np.linalg.norm(direct))
    assert rels[0] < 10 * 4e-3
    assert rels[0] / rels[1] >= 1.8


def test_step_direct_wrapper(disp_unpinned):
    st = ChainState.zeros(64)
    st.p[3] = 1.0
    step_direct(st, nn_unpinned(), disp_unpinned, ThermostatParams(), 0.01)
    assert st.t_micro == pytest.approx(0.01)


def test_chain_state_validation():
    with pytest.raises(ConfigError):
        ChainState(48, np.zeros(48), np.zeros(48))  # not a power of two
    with pytest.raises(ConfigError):
        ChainState(64, np.zeros(32), np.zeros(64))
