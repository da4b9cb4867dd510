import math

import numpy as np
import pytest
import scipy.sparse as sp

from spinboson import (
    Boundary,
    DimensionError,
    EdCache,
    ModelParams,
    ProbeParams,
    TruncationSpec,
    ValidationError,
    build_hamiltonian,
    build_hamiltonian_parts,
    cache_key,
    coherent_state,
    ed_ground,
    evolve,
    ground_state,
    hilbert_dim,
    site_operators,
    spectroscopy_experiment,
)

OPEN2 = ModelParams(omega=1.0, omega0=0.7, g=0.25, n_sites=2, boundary=Boundary.OPEN)
SMALL = TruncationSpec(n_max=1)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def _dense_oracle(params, n_max, probe=None, n_max_probe=None):
    """Independent dense construction: spins and cavities interleaved
    (spin_0, cav_0, spin_1, cav_1, ..., cav_N for an open chain), probe
    cavity last."""
    n = params.n_sites
    n_cav = n + 1 if params.boundary is Boundary.OPEN else n
    nl = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, nl)), 1)
    dims = []
    for i in range(n):
        dims += [2, nl]
    dims += [nl] * (n_cav - n)
    if probe is not None:
        dims.append((n_max_probe or n_max) + 1)

    def embed(op, pos):
        out = np.ones((1, 1))
        for p, d in enumerate(dims):
            out = np.kron(out, op if p == pos else np.eye(d))
        return out

    spin_pos = [2 * i for i in range(n)]
    cav_pos = [2 * i + 1 for i in range(n)] + list(range(2 * n, 2 * n + n_cav - n))
    h = np.zeros((np.prod(dims), np.prod(dims)))
    num = a.T @ a
    x = a + a.T
    for i in range(n):
        h += 0.5 * params.omega0 * embed(SZ, spin_pos[i])
    for c in range(n_cav):
        h += params.omega * embed(num, cav_pos[c])
    for i in range(n):
        right = (i + 1) % n_cav
        xi = embed(x, cav_pos[i])
        xr = embed(x, cav_pos[right])
        h += params.g * embed(SX, spin_pos[i]) @ (xi - xr)
    if probe is not None:
        ap = np.diag(np.sqrt(np.arange(1, dims[-1])), 1)
        h += probe.omega_p * embed(ap.T @ ap, len(dims) - 1)
        h += probe.g_p * embed(SX, spin_pos[0]) @ embed(ap + ap.T, len(dims) - 1)
    return h


def test_hilbert_dim():
    assert hilbert_dim(OPEN2, SMALL) == 2 ** 2 * 2 ** 3
    assert hilbert_dim(OPEN2, TruncationSpec(n_max=1, n_max_probe=2),
                       with_probe=True) == 32 * 3
    ring = ModelParams(omega=1.0, omega0=0.7, g=0.25, n_sites=2)
    assert hilbert_dim(ring, SMALL) == 2 ** 2 * 2 ** 2


def test_hamiltonian_matches_dense_oracle():
    h = build_hamiltonian(OPEN2, SMALL).toarray()
    oracle = _dense_oracle(OPEN2, 1)
    assert np.max(np.abs(h - oracle)) < 1e-12


def test_hamiltonian_with_probe_matches_dense_oracle():
    probe = ProbeParams(omega_p=0.3, g_p=0.05, alpha_p=1.0)
    trunc = TruncationSpec(n_max=1, n_max_probe=2)
    h = build_hamiltonian(OPEN2, trunc, probe).toarray()
    oracle = _dense_oracle(OPEN2, 1, probe=probe, n_max_probe=2)
    assert np.max(np.abs(h - oracle)) < 1e-12


def test_periodic_hamiltonian_spectrum():
    ring = ModelParams(omega=1.0, omega0=0.7, g=0.25, n_sites=2)
    h = build_hamiltonian(ring, SMALL).toarray()
    oracle = _dense_oracle(ring, 1)
    assert np.linalg.eigvalsh(h) == pytest.approx(np.linalg.eigvalsh(oracle),
                                                  abs=1e-12)


def test_parts_sum_to_hamiltonian_and_split_is_diagonal():
    diag, coupling = build_hamiltonian_parts(OPEN2, SMALL)
    h = build_hamiltonian(OPEN2, SMALL)
    assert np.max(np.abs((sp.diags(diag) + coupling - h).toarray())) < 1e-14
    assert np.all(coupling.diagonal() == 0.0)


def test_zero_coupling_exact():
    params = ModelParams(omega=1.0, omega0=0.7, g=0.0, n_sites=2,
                         boundary=Boundary.OPEN)
    res = ed_ground(params, SMALL, sweep=False)
    assert res.gs_energy == pytest.approx(-0.7, abs=1e-12)
    assert res.photon_number == pytest.approx((0.0,) * 3, abs=1e-12)
    assert res.sigma_z == pytest.approx((-1.0, -1.0), abs=1e-12)


def test_sparse_and_dense_paths_agree():
    params = ModelParams(omega=1.0, omega0=0.5, g=0.3, n_sites=2,
                         boundary=Boundary.OPEN)
    h = build_hamiltonian(params, TruncationSpec(n_max=2))  # dim 216 > 128
    evals_sparse, _ = ground_state(h, n_levels=1)
    evals_dense = np.linalg.eigvalsh(h.toarray())
    assert evals_sparse[0] == pytest.approx(evals_dense[0], abs=1e-10)


def test_dim_cap_enforced():
    trunc = TruncationSpec(n_max=6, dim_cap=100)
    with pytest.raises(DimensionError):
        build_hamiltonian(OPEN2, trunc)
    with pytest.raises(DimensionError):
        site_operators(OPEN2, trunc)


def test_z2_degeneracy_flag():
    deg = ModelParams(omega=1.0, omega0=0.0, g=0.5, n_sites=2)
    res = ed_ground(deg, TruncationSpec(n_max=4), sweep=False)
    assert res.z2_degenerate
    split = ModelParams(omega=1.0, omega0=0.3, g=0.5, n_sites=2)
    res2 = ed_ground(split, TruncationSpec(n_max=4), sweep=False)
    assert not res2.z2_degenerate


def test_truncation_sweep_monotone_and_converged():
    params = ModelParams(omega=1.0, omega0=0.3, g=0.4, n_sites=2)
    res = ed_ground(params, TruncationSpec(n_max=3, convergence_tol=1e-5))
    energies = [e for _, e in res.truncation_report]
    assert len(energies) >= 2
    # enlarging the variational space can only lower the ground energy
    assert all(e2 <= e1 + 1e-12 for e1, e2 in zip(energies, energies[1:]))
    assert abs(energies[-1] - energies[-2]) < 1e-5
    assert res.trunc.n_max == res.truncation_report[-1][0]


def test_order_parameters_reflect_symmetry():
    # with an unbroken Z2 the site expectations vanish but the correlator
    # order parameter does not
    params = ModelParams(omega=1.0, omega0=0.3, g=0.5, n_sites=2)
    res = ed_ground(params, TruncationSpec(n_max=6), sweep=False)
    assert abs(res.sigma_x[0]) < 1e-8
    assert abs(res.photon_x[0]) < 1e-8
    assert res.spin_order > 0.5
    assert res.cavity_order > 0.3


def test_coherent_state_properties():
    alpha = 1.3
    psi = coherent_state(alpha, 30)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
    n_op = np.arange(30)
    assert float(n_op @ (np.abs(psi) ** 2)) == pytest.approx(alpha ** 2, rel=1e-10)
    a = np.diag(np.sqrt(np.arange(1, 30)), 1)
    assert np.vdot(psi, a @ psi) == pytest.approx(alpha, rel=1e-10)
    with pytest.raises(ValidationError):
        coherent_state(3.0, 5)  # truncation too small


def test_evolve_free_cavity_coherent_state():
    # a free cavity keeps a coherent state coherent: <x(t)> = 2a cos(w t)
    n_levels, alpha, omega = 24, 0.9, 1.3
    h = sp.diags(omega * np.arange(n_levels)).tocsr()
    a = sp.diags(np.sqrt(np.arange(1, n_levels)), 1)
    x = (a + a.T).tocsr()
    psi0 = coherent_state(alpha, n_levels)
    t = np.linspace(0.0, 20.0, 201)
    for method in ("exact", "krylov"):
        traj = evolve(psi0, h, t, {"x": x}, method=method)
        assert traj.method == method
        assert traj.expectations["x"] == pytest.approx(
            2 * alpha * np.cos(omega * t), abs=1e-7)
        assert traj.max_norm_drift <= 1e-8


def test_evolve_methods_agree_and_conserve_energy():
    params = ModelParams(omega=1.0, omega0=0.5, g=0.3, n_sites=2,
                         boundary=Boundary.OPEN)
    trunc = TruncationSpec(n_max=2)
    h = build_hamiltonian(params, trunc)
    dim = h.shape[0]
    rng = np.random.default_rng(3)
    psi0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    psi0 /= np.linalg.norm(psi0)
    t = np.linspace(0.0, 5.0, 51)
    obs = {"h": h}
    tr_exact = evolve(psi0, h, t, obs, method="exact")
    tr_krylov = evolve(psi0, h, t, obs, method="krylov")
    e0 = tr_exact.expectations["h"][0]
    assert tr_exact.expectations["h"] == pytest.approx(np.full(t.size, e0), abs=1e-9)
    assert tr_krylov.expectations["h"] == pytest.approx(tr_exact.expectations["h"],
                                                        abs=1e-7)
    assert np.linalg.norm(tr_krylov.final_state - tr_exact.final_state) < 1e-6


def test_trotter_third_order():
    params = ModelParams(omega=1.0, omega0=0.5, g=0.3, n_sites=2,
                         boundary=Boundary.OPEN)
    trunc = TruncationSpec(n_max=2)
    h = build_hamiltonian(params, trunc)
    parts = build_hamiltonian_parts(params, trunc)
    dim = h.shape[0]
    rng = np.random.default_rng(5)
    psi0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    psi0 /= np.linalg.norm(psi0)
    t_final = 2.0
    errors, dts = [], (0.2, 0.1, 0.05)
    ref = evolve(psi0, h, np.array([0.0, t_final]), method="exact").final_state
    for dt in dts:
        t = np.linspace(0.0, t_final, int(round(t_final / dt)) + 1)
        tr = evolve(psi0, h, t, method="trotter", trotter_parts=parts)
        errors.append(np.linalg.norm(tr.final_state - ref))
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.3)


def test_evolve_validation():
    h = sp.diags(np.arange(4.0)).tocsr()
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    with pytest.raises(ValidationError):
        evolve(2 * psi, h, np.linspace(0, 1, 5))
    with pytest.raises(ValidationError):
        evolve(psi, h, np.array([0.0, 0.1, 0.15]))
    with pytest.raises(ValidationError):
        evolve(psi, h, np.linspace(0, 1, 5), method="magic")
    with pytest.raises(ValidationError):
        evolve(psi, h, np.linspace(0, 1, 5), method="trotter")


def test_spectroscopy_experiment_decoupled_probe_is_flat():
    # with g_p = 0 the chain stays in its ground state, so the cavity
    # quadrature signals are constant and no finite-frequency peak appears
    params = ModelParams(omega=1.0, omega0=2.0, g=0.15, n_sites=2,
                         boundary=Boundary.OPEN)
    probe = ProbeParams(omega_p=0.9, g_p=0.0, alpha_p=0.1)
    trunc = TruncationSpec(n_max=2, n_max_probe=3)
    t = np.arange(0.0, 60.0, 0.5)
    nus = np.linspace(0.2, 1.4, 121)
    res = spectroscopy_experiment(params, probe, trunc, t, nus)
    raw = np.asarray(res.metadata["raw_signal"])
    assert np.max(np.abs(raw - raw[:, :1])) < 1e-10
    assert np.max(res.amplitude) < 1e-8
    assert res.metadata["engine"] == "ed"


def test_spectroscopy_experiment_requires_open_chain():
    probe = ProbeParams(omega_p=0.9, g_p=0.01, alpha_p=1.0)
    with pytest.raises(ValidationError):
        spectroscopy_experiment(ModelParams(omega=1.0, omega0=2.0, g=0.15,
                                            n_sites=2), probe, SMALL,
                                np.linspace(0, 10, 21), [0.5])


def test_cache_round_trip(tmp_path):
    cache = EdCache(tmp_path / "cache")
    key = cache_key(OPEN2.to_dict(), SMALL.to_dict(), 400.0, 0.5)
    assert cache.load(key) is None
    payload = {"signal": [[1.0, 2.0]], "t_final": 400.0}
    cache.store(key, payload)
    assert cache.load(key) == payload
    # key is stable across calls and sensitive to inputs
    assert key == cache_key(OPEN2.to_dict(), SMALL.to_dict(), 400.0, 0.5)
    assert key != cache_key(OPEN2.to_dict(), SMALL.to_dict(), 400.0, 0.25)


def test_truncation_spec_validation():
    with pytest.raises(ValidationError):
        TruncationSpec(n_max=0)
    with pytest.raises(ValidationError):
        TruncationSpec(n_max=2, n_max_probe=0)
    with pytest.raises(ValidationError):
        TruncationSpec(n_max=2, convergence_tol=0.0)
    t = TruncationSpec(n_max=2)
    assert t.n_max_probe == 2
    assert t.with_n_max(3).n_max == 3
    assert t.with_n_max(3).n_max_probe == 2
