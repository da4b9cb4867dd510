"""Variational polaron ground state.

Displacing each cavity conditionally on the neighbouring spins maps the
model onto a transverse-field Ising chain with exchange J = 2 g^2 / omega
and exponentially renormalised field h_tilde = h exp(-4 (g/omega)^2),
plus a constant -N J released by the displacement itself.  The critical
line is lam = h_tilde / J = 1, i.e.

    omega0 / omega = 4 (g/omega)^2 exp(4 (g/omega)^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Boundary, CouplingPattern, DerivedScales, ModelParams, derive_scales, momentum_grid
from .errors import ValidationError
from .ising import ising_gs_energy, ising_magnetization


@dataclass(frozen=True)
class AnsatzGroundState:
    """Variational ground state in the displaced frame.

    ``ising_energy`` is the Ising-chain part -sum_q eps_q(J, h_tilde);
    ``energy`` additionally contains the displacement constant -N J.
    """

    energy: float
    ising_energy: float
    h_tilde: float
    lam: float
    ordered: bool
    scales: DerivedScales
    pattern: CouplingPattern
    n_sites: int


def ansatz_ground_state(params: ModelParams) -> AnsatzGroundState:
    if params.boundary is not Boundary.PERIODIC:
        raise ValidationError("boundary", "the variational ground state assumes a periodic chain")
    scales = derive_scales(params)
    grid = momentum_grid(params.n_sites, params.boundary)
    e_ising = ising_gs_energy(scales.j, scales.h_tilde, grid)
    energy = e_ising - params.n_sites * scales.j
    return AnsatzGroundState(
        energy=energy,
        ising_energy=e_ising,
        h_tilde=scales.h_tilde,
        lam=scales.lam,
        ordered=scales.lam < 1.0,
        scales=scales,
        pattern=params.coupling_pattern,
        n_sites=params.n_sites,
    )


def ansatz_critical_omega0(g_over_omega: float) -> float:
    """Critical omega0/omega at fixed g/omega."""
    x2 = 4.0 * g_over_omega * g_over_omega
    return x2 * math.exp(x2)


def ansatz_critical_g(omega0_over_omega: float, tol: float = 1e-10) -> float:
    """Critical g/omega at fixed omega0/omega, by bisection.

    The map x -> 4 x^2 exp(4 x^2) is strictly increasing, so the root is
    unique.
    """
    if omega0_over_omega <= 0:
        raise ValidationError("omega0_over_omega", "must be > 0 to have a critical coupling")
    lo, hi = 0.0, 1.0
    while ansatz_critical_omega0(hi) < omega0_over_omega:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ansatz_critical_omega0(mid) < omega0_over_omega:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ansatz_polarizations(state: AnsatzGroundState, site: int):
    """(<sigma^x>, <a>) at a site: spins lock to staggered order below
    lam = 1 and the cavities lock in with amplitude (2g/omega) times the
    Ising order parameter."""
    mag = ising_magnetization(state.lam)
    sign = (-1) ** site if state.pattern is CouplingPattern.ANTIFERROMAGNETIC else 1
    sx = sign * mag
    a = -sign * (2.0 * state.scales.g / state.scales.omega) * mag
    return sx, a
