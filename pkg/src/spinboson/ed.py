"""Exact diagonalisation of small chains with truncated photon spaces.

The Hilbert space is laid out site-major: (spin_1, cavity_1, spin_2,
cavity_2, ...).  Open chains carry one extra cavity at the end so every
qubit sits between two cavities; a probe cavity, when present, is
appended last and couples to qubit 1.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh, expm_multiply

from .core import Boundary, CouplingPattern, ModelParams
from .errors import ConvergenceError, DimensionError, ValidationError
from .spectroscopy import ProbeParams, SpectroscopyResult, sine_time_fourier

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class TruncationSpec:
    """Photon-number truncation: each cavity keeps n_max + 1 Fock levels.

    convergence_tol controls the automatic n_max sweep of ed_ground.
    """

    n_max: int = 6
    n_max_probe: int = None
    convergence_tol: float = 1e-6
    dim_cap: int = 2_000_000

    def __post_init__(self):
        if self.n_max < 1:
            raise ValidationError("n_max", f"must be >= 1, got {self.n_max}")
        if self.n_max_probe is None:
            object.__setattr__(self, "n_max_probe", self.n_max)
        if self.n_max_probe < 1:
            raise ValidationError("n_max_probe", f"must be >= 1, got {self.n_max_probe}")
        if not (self.convergence_tol > 0):
            raise ValidationError("convergence_tol", "must be > 0")

    def with_n_max(self, n_max):
        return TruncationSpec(n_max, self.n_max_probe, self.convergence_tol, self.dim_cap)

    def to_dict(self):
        return {"n_max": self.n_max, "n_max_probe": self.n_max_probe,
                "convergence_tol": self.convergence_tol, "dim_cap": self.dim_cap}


def _annihilator(n_levels):
    return sp.diags(np.sqrt(np.arange(1, n_levels)), 1, format="csr")


def _subsystem_dims(params, trunc, with_probe):
    n = params.n_sites
    n_cav = n if params.boundary is Boundary.PERIODIC else n + 1
    dims = []
    for i in range(n):
        dims.append(2)
        dims.append(trunc.n_max + 1)
    for _ in range(n_cav - n):
        dims.append(trunc.n_max + 1)
    if with_probe:
        dims.append(trunc.n_max_probe + 1)
    return dims, n_cav


def _spin_pos(i):
    return 2 * i


def _cavity_pos(i, n_sites):
    return 2 * i + 1 if i < n_sites else 2 * n_sites


def _embed(op, pos, dims):
    left = int(np.prod(dims[:pos], dtype=np.int64))
    right = int(np.prod(dims[pos + 1:], dtype=np.int64))
    return sp.kron(sp.identity(left, format="csr"),
                   sp.kron(sp.csr_matrix(op), sp.identity(right, format="csr"), format="csr"),
                   format="csr")


def hilbert_dim(params, trunc, with_probe=False):
    dims, _ = _subsystem_dims(params, trunc, with_probe)
    return int(np.prod(dims, dtype=np.int64))


def site_operators(params: ModelParams, trunc: TruncationSpec, with_probe=False):
    """Embedded sigma^x_i, sigma^z_i, a_i and x_i = a_i + a_i^dag operators."""
    dims, n_cav = _subsystem_dims(params, trunc, with_probe)
    dim = int(np.prod(dims, dtype=np.int64))
    if dim > trunc.dim_cap:
        raise DimensionError(dim, trunc.dim_cap)
    n = params.n_sites
    ops = {"sx": [], "sz": [], "a": [], "x": [], "n": []}
    for i in range(n):
        ops["sx"].append(_embed(_SX, _spin_pos(i), dims))
        ops["sz"].append(_embed(_SZ, _spin_pos(i), dims))
    for i in range(n_cav):
        a = _annihilator(trunc.n_max + 1)
        ai = _embed(a, _cavity_pos(i, n), dims)
        ops["a"].append(ai)
        ops["x"].append(ai + ai.conj().T)
        ops["n"].append(_embed(a.conj().T @ a, _cavity_pos(i, n), dims))
    if with_probe:
        ap = _embed(_annihilator(trunc.n_max_probe + 1), len(dims) - 1, dims)
        ops["a_probe"] = ap
        ops["x_probe"] = ap + ap.conj().T
        ops["n_probe"] = ap.conj().T @ ap
    return ops


def build_hamiltonian_parts(params: ModelParams, trunc: TruncationSpec,
                            probe: ProbeParams = None):
    """(diagonal energies, sparse coupling part); their sum is H.

    The local spin and photon terms are diagonal in the Fock/sigma^z
    basis, so the split is exact and is what the Trotter propagator uses.
    """
    dims, n_cav = _subsystem_dims(params, trunc, probe is not None)
    dim = int(np.prod(dims, dtype=np.int64))
    if dim > trunc.dim_cap:
        raise DimensionError(dim, trunc.dim_cap)
    n = params.n_sites
    ops = site_operators(params, trunc, with_probe=probe is not None)

    diag = np.zeros(dim)
    for i in range(n):
        diag += 0.5 * params.omega0 * ops["sz"][i].diagonal().real
    for i in range(n_cav):
        diag += params.omega * ops["n"][i].diagonal().real
    if probe is not None:
        diag += probe.omega_p * ops["n_probe"].diagonal().real

    sign = -1.0 if params.coupling_pattern is CouplingPattern.ANTIFERROMAGNETIC else 1.0
    coupling = sp.csr_matrix((dim, dim))
    for i in range(n):
        right = (i + 1) % n_cav if params.boundary is Boundary.PERIODIC else i + 1
        bond = ops["x"][i] + sign * ops["x"][right]
        coupling = coupling + params.g * (ops["sx"][i] @ bond)
    if probe is not None and probe.g_p != 0.0:
        coupling = coupling + probe.g_p * (ops["sx"][0] @ ops["x_probe"])
    return diag, coupling.tocsr()


def build_hamiltonian(params, trunc, probe=None):
    diag, coupling = build_hamiltonian_parts(params, trunc, probe)
    return (sp.diags(diag) + coupling).tocsr()


def ground_state(h, n_levels=1, seed=7):
    """Lowest eigenpairs with a deterministic start vector and a residual
    check of 1e-10 relative to the operator norm."""
    dim = h.shape[0]
    if dim <= max(4 * n_levels, 128):
        dense = np.linalg.eigh(h.toarray() if sp.issparse(h) else h)
        evals, evecs = dense[0][:n_levels], dense[1][:, :n_levels]
    else:
        v0 = np.random.default_rng(seed).standard_normal(dim)
        evals, evecs = eigsh(h, k=n_levels, which="SA", v0=v0)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
    hnorm = max(float(np.abs(h).sum(axis=1).max()), 1.0)
    for k in range(n_levels):
        res = np.linalg.norm(h @ evecs[:, k] - evals[k] * evecs[:, k])
        if res > 1e-10 * hnorm:
            raise ConvergenceError(
                f"eigenpair {k} residual {res:.2e} exceeds 1e-10 * |H| = {1e-10 * hnorm:.2e}")
    return evals, evecs


@dataclass(frozen=True)
class EdResult:
    """Ground-state data of one exactly diagonalised chain."""

    gs_energy: float
    low_spectrum: tuple
    z2_degenerate: bool
    sigma_x: tuple
    sigma_z: tuple
    photon_a: tuple          # <a_i> (complex)
    photon_x: tuple          # <a_i + a_i^dag>
    photon_number: tuple
    spin_order: float        # sqrt|<sx_i sx_j>| at maximal separation
    cavity_order: float      # sqrt|<x_i x_j>| / 2 at maximal separation
    truncation_report: tuple  # ((n_max, energy), ...) from the sweep
    params: ModelParams
    trunc: TruncationSpec


def _order_pair(params):
    """Indices of the most separated spin pair (even separation on a ring,
    so the staggered pattern does not flip sign)."""
    n = params.n_sites
    if params.boundary is Boundary.PERIODIC:
        sep = n // 2 if (n // 2) % 2 == 0 else n // 2 - 1
        sep = max(sep, 1)
    else:
        sep = n - 1 if (n - 1) % 2 == 0 else n - 2
        sep = max(sep, 1)
    return 0, sep


def ed_ground(params: ModelParams, trunc: TruncationSpec, n_levels=4,
              sweep=True, max_sweeps=6) -> EdResult:
    """Ground-state properties at converged truncation.

    When sweep is on, n_max is raised by one until the ground energy
    changes by less than convergence_tol (or max_sweeps is exhausted).
    """
    report = []
    current = trunc
    h = build_hamiltonian(params, current)
    n_levels = min(n_levels, h.shape[0] - 1)
    evals, evecs = ground_state(h, n_levels=n_levels)
    report.append((current.n_max, float(evals[0])))
    if sweep:
        for _ in range(max_sweeps):
            bigger = current.with_n_max(current.n_max + 1)
            try:
                h2 = build_hamiltonian(params, bigger)
            except DimensionError:
                break
            evals2, evecs2 = ground_state(h2, n_levels=min(n_levels, h2.shape[0] - 1))
            report.append((bigger.n_max, float(evals2[0])))
            converged = abs(evals2[0] - evals[0]) < trunc.convergence_tol
            current, h, evals, evecs = bigger, h2, evals2, evecs2
            if converged:
                break

    psi = evecs[:, 0]
    ops = site_operators(params, current)

    def expect(op):
        return complex(np.vdot(psi, op @ psi))

    sx = tuple(expect(o).real for o in ops["sx"])
    sz = tuple(expect(o).real for o in ops["sz"])
    pa = tuple(expect(o) for o in ops["a"])
    px = tuple(expect(o).real for o in ops["x"])
    pn = tuple(expect(o).real for o in ops["n"])

    i, j = _order_pair(params)
    spin_order = math.sqrt(abs(expect(ops["sx"][i] @ ops["sx"][j])))
    cavity_order = 0.5 * math.sqrt(abs(expect(ops["x"][i] @ ops["x"][j])))

    gap = evals[1] - evals[0] if len(evals) > 1 else math.inf
    return EdResult(
        gs_energy=float(evals[0]),
        low_spectrum=tuple(float(e) for e in evals),
        z2_degenerate=bool(gap < 1e-8),
        sigma_x=sx, sigma_z=sz, photon_a=pa, photon_x=px, photon_number=pn,
        spin_order=spin_order, cavity_order=cavity_order,
        truncation_report=tuple(report), params=params, trunc=current,
    )


# --- time evolution ------------------------------------------------------

# third-order Ruth splitting coefficients for exp(dt (A + B))
_RUTH_A = (7.0 / 24.0, 3.0 / 4.0, -1.0 / 24.0)
_RUTH_B = (2.0 / 3.0, -2.0 / 3.0, 1.0)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    expectations: dict        # name -> real array over times
    final_state: np.ndarray
    max_norm_drift: float
    method: str


def _check_uniform(times):
    t = np.asarray(times, dtype=float)
    if t.size < 2:
        raise ValidationError("times", "need at least two time points")
    dt = np.diff(t)
    if np.any(dt <= 0) or (dt.max() - dt.min()) > 1e-9 * dt.max():
        raise ValidationError("times", "time grid must be uniform and increasing")
    return t, float(dt[0])


def evolve(psi0, h, times, observables=None, method="auto",
           trotter_parts=None, substeps=1) -> Trajectory:
    """Propagate psi0 over a uniform time grid, recording expectations.

    method: 'exact' (dense eigendecomposition, dim <= 4096), 'krylov'
    (sparse exp(-iH dt) action per step), 'trotter' (third-order split
    using trotter_parts = (diagonal, coupling)), or 'auto'.
    """
    t, dt = _check_uniform(times)
    observables = observables or {}
    dim = h.shape[0]
    if method == "auto":
        method = "exact" if dim <= 4096 else "krylov"

    psi = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValidationError("psi0", "initial state must be normalised")

    records = {name: np.empty(t.size) for name in observables}
    drift = 0.0

    def record(idx, state):
        for name, op in observables.items():
            records[name][idx] = np.real(np.vdot(state, op @ state))

    if method == "exact":
        if dim > 4096:
            raise DimensionError(dim, 4096)
        evals, evecs = np.linalg.eigh(h.toarray() if sp.issparse(h) else h)
        coeff = evecs.conj().T @ psi
        for idx, ti in enumerate(t):
            state = evecs @ (np.exp(-1j * evals * (ti - t[0])) * coeff)
            record(idx, state)
        psi = state
    elif method == "krylov":
        record(0, psi)
        step_op = (-1j * dt) * h.tocsc()
        for idx in range(1, t.size):
            psi = expm_multiply(step_op, psi)
            drift = max(drift, abs(np.linalg.norm(psi) - 1.0))
            record(idx, psi)
    elif method == "trotter":
        if trotter_parts is None:
            raise ValidationError("trotter_parts", "trotter method needs the (diagonal, coupling) split")
        diag, coupling = trotter_parts
        coupling = coupling.tocsc()
        sub = dt / substeps
        phase_a = [np.exp(-1j * c * sub * diag) for c in _RUTH_A]
        ops_b = [(-1j * d * sub) * coupling for d in _RUTH_B]
        record(0, psi)
        for idx in range(1, t.size):
            for _ in range(substeps):
                for pa, ob in zip(phase_a, ops_b):
                    psi = pa * psi
                    psi = expm_multiply(ob, psi)
            drift = max(drift, abs(np.linalg.norm(psi) - 1.0))
            record(idx, psi)
    else:
        raise ValidationError("method", f"unknown evolution method {method!r}")

    if drift > 1e-8:
        raise ConvergenceError(f"unitarity drift {drift:.2e} exceeds 1e-8")
    return Trajectory(t, records, psi, drift, method)


def coherent_state(alpha, n_levels):
    """Truncated coherent state; rejects truncations losing > 1e-8 weight."""
    n = np.arange(n_levels)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amps = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(complex(alpha)) - 0.5 * log_fact) \
        if alpha != 0 else np.eye(n_levels)[0].astype(complex)
    deficit = 1.0 - float(np.linalg.norm(amps) ** 2)
    if deficit > 1e-8:
        raise ValidationError(
            "n_max_probe", f"coherent state loses {deficit:.2e} weight; raise the truncation")
    return amps / np.linalg.norm(amps)


def spectroscopy_experiment(params: ModelParams, probe: ProbeParams,
                            trunc: TruncationSpec, times, nu_values,
                            method="auto") -> SpectroscopyResult:
    """Real-time probe experiment: prepare system ground state x coherent
    probe, evolve, record cavity quadratures <x_j(t)> (and <sigma^x_j(t)>)
    on the first n_sites cavities, and transform to the
    momentum-frequency surface."""
    if params.boundary is not Boundary.OPEN:
        raise ValidationError("boundary", "the probe experiment runs on an open chain")
    times, dt = _check_uniform(times)
    h_sys = build_hamiltonian(params, trunc)
    _, evecs = ground_state(h_sys)
    psi_sys = evecs[:, 0].astype(complex)
    psi_probe = coherent_state(probe.alpha_p, trunc.n_max_probe + 1)
    psi0 = np.kron(psi_sys, psi_probe)

    h = build_hamiltonian(params, trunc, probe)
    ops = site_operators(params, trunc, with_probe=True)
    observables = {f"x{j}": ops["x"][j] for j in range(params.n_sites)}
    observables.update({f"sx{j}": ops["sx"][j] for j in range(params.n_sites)})

    traj = evolve(psi0, h, times, observables, method=method,
                  trotter_parts=build_hamiltonian_parts(params, trunc, probe)
                  if method == "trotter" else None)

    signal = np.vstack([traj.expectations[f"x{j}"] for j in range(params.n_sites)])
    spins = np.vstack([traj.expectations[f"sx{j}"] for j in range(params.n_sites)])
    meta = {"engine": "ed", "params": params.to_dict(), "trunc": trunc.to_dict(),
            "probe": {"omega_p": probe.omega_p, "g_p": probe.g_p, "alpha_p": probe.alpha_p},
            "t_final": float(times[-1]), "dt": float(dt), "method": traj.method,
            "raw_signal": signal.tolist(), "raw_spin_signal": spins.tolist()}
    return sine_time_fourier(signal, times, nu_values, metadata=meta)


# --- result cache ---------------------------------------------------------

def cache_key(*parts):
    """Stable hash of JSON-serialisable inputs (params, truncation, ...)."""
    blob = json.dumps(parts, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


class EdCache:
    """Tiny on-disk store of ED outputs keyed by parameter hashes."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key):
        return self.directory / f"{key}.json"

    def load(self, key):
        path = self._path(key)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def store(self, key, payload):
        self._path(key).write_text(json.dumps(payload, sort_keys=True))
