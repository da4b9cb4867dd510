"""Excitation bands of the three analytic theories and critical-exponent fits.

All three theories produce, at each momentum q, a lower (matter-like) and
an upper (photon-like) branch:

* spin-wave: fluctuations on top of the adiabatic mean field, obtained as
  the square roots of the eigenvalues of a 2x2 stability matrix;
* dispersive: free fermion band 2 sqrt((J cos q + h)^2 + (J sin q)^2)
  next to a flat photon line at omega;
* ansatz: the polaron Ising band eps_q hybridised with a weakly dressed
  photon band through g_q = h_tilde (2g/omega)(1 - e^{-iq})(u_q + v_q^*).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import DerivedScales, ModelParams, derive_scales, momentum_grid
from .errors import FitError, ValidationError
from .ising import bogoliubov_mode
from .meanfield import mf_critical_omega0
from .polaron import ansatz_critical_omega0


class Theory(str, Enum):
    SPIN_WAVE = "spin_wave"
    DISPERSIVE = "dispersive"
    ANSATZ = "ansatz"


class BlockConvention(str, Enum):
    # photon dispersion omega + 4 h_tilde (2g/omega)^2 sin^2(q/2)
    MAIN_TEXT = "main_text"
    # photon dispersion omega + 4 h_tilde (2g/omega)^2 cos q, with the
    # dropped anomalous pairing xi_q exposed for inspection
    LINEARIZED = "linearized"


def _psd_band_pair(a: float, c: float, b: complex, label: str):
    """Square roots of the eigenvalues of [[a, b], [b*, c]], sorted.

    Tiny negative eigenvalues from rounding are clamped; genuinely
    negative ones mean the expansion point is unstable.
    """
    half_sum = 0.5 * (a + c)
    half_diff = 0.5 * (a - c)
    rad = math.hypot(half_diff, abs(b))
    lo, hi = half_sum - rad, half_sum + rad
    scale = max(abs(a), abs(c), abs(b), 1e-300)
    if lo < -1e-12 * scale:
        raise ValidationError(label, f"stability matrix has negative eigenvalue {lo}")
    lo = max(lo, 0.0)
    return math.sqrt(lo), math.sqrt(hi)


def sw_bands(q: float, scales: DerivedScales):
    """Spin-wave branches (eps_minus, eps_plus) at momentum q."""
    omega, g = scales.omega, scales.g
    lam = scales.lam_mf
    if lam <= 1.0:
        delta = 4.0 * scales.j_mf
        g_sw = -g * lam
    else:
        delta = 2.0 * scales.h
        g_sw = -g
    gq = 2.0 * g_sw * math.sqrt(omega * delta) * (1.0 - cmath.exp(-1j * q))
    return _psd_band_pair(omega * omega, delta * delta, gq, "sw_bands")


def dispersive_bands(q: float, scales: DerivedScales):
    """Dispersive-regime branches: free fermion band and flat photon line."""
    j, h = scales.j, scales.h
    fermion = 2.0 * math.hypot(j * math.cos(q) + h, j * math.sin(q))
    lo, hi = sorted((fermion, scales.omega))
    return lo, hi


@dataclass(frozen=True)
class QuasiparticleBlock:
    """One-momentum 2x2 hybridisation block of the polaron theory.

    xi_q is the anomalous photon pairing dropped from the block; it is
    nonzero only under the linearized convention and is exposed so its
    smallness can be checked.
    """

    q: float
    omega_q: float
    eps_q: float
    g_q: complex
    xi_q: complex
    convention: BlockConvention


def ansatz_block(q, scales: DerivedScales, convention=BlockConvention.MAIN_TEXT) -> QuasiparticleBlock:
    convention = BlockConvention(convention)
    omega, g = scales.omega, scales.g
    two_g = 2.0 * g / omega
    mode = bogoliubov_mode(q, scales.j, scales.h_tilde)
    g_q = scales.h_tilde * two_g * (1.0 - cmath.exp(-1j * q)) * (mode.u_q + mode.v_q.conjugate())
    shift = 4.0 * scales.h_tilde * two_g * two_g
    if convention is BlockConvention.MAIN_TEXT:
        omega_q = omega + shift * math.sin(0.5 * q) ** 2
        xi_q = 0j
    else:
        omega_q = omega + shift * math.cos(q)
        xi_q = -scales.h_tilde * two_g * two_g * cmath.exp(1j * q)
    return QuasiparticleBlock(q, omega_q, mode.eps_q, g_q, xi_q, convention)


def ansatz_bands(q, scales, convention=BlockConvention.MAIN_TEXT, clamp=True):
    """Hybridised polaron branches (eps_minus, eps_plus) at momentum q.

    Near the critical point at q ~ pi the 2x2 closed form can dip below
    zero; by default the lower branch is clamped at 0 there (the mode has
    gone soft and the quadratic expansion is no longer reliable).
    """
    block = ansatz_block(q, scales, convention)
    half_sum = 0.5 * (block.omega_q + block.eps_q)
    rad = math.hypot(0.5 * (block.omega_q - block.eps_q), abs(block.g_q))
    lo, hi = half_sum - rad, half_sum + rad
    if clamp:
        lo = max(lo, 0.0)
    return lo, hi


@dataclass(frozen=True)
class BandPoint:
    q: float
    eps_minus: float
    eps_plus: float


@dataclass(frozen=True)
class BandScan:
    theory: Theory
    points: tuple
    params: ModelParams
    convention: BlockConvention = BlockConvention.MAIN_TEXT
    soft_clamped: bool = False

    def __post_init__(self):
        for p in self.points:
            if not (p.eps_plus >= p.eps_minus >= 0.0):
                raise ValidationError("band_scan", f"band ordering violated at q={p.q}")

    def to_csv(self):
        lines = ["q,eps_minus,eps_plus,theory"]
        for p in self.points:
            lines.append(
                f"{p.q:.17g},{p.eps_minus:.17g},{p.eps_plus:.17g},{self.theory.value}"
            )
        return "\n".join(lines) + "\n"


def band_scan(params: ModelParams, theory, qs=None, convention=BlockConvention.MAIN_TEXT) -> BandScan:
    """Evaluate one theory's bands on a momentum grid (defaults to the
    grid matching the chain geometry)."""
    theory = Theory(theory)
    scales = derive_scales(params)
    if qs is None:
        qs = momentum_grid(params.n_sites, params.boundary).values
    points = []
    clamped = False
    for q in qs:
        if theory is Theory.SPIN_WAVE:
            lo, hi = sw_bands(q, scales)
        elif theory is Theory.DISPERSIVE:
            lo, hi = dispersive_bands(q, scales)
        else:
            raw_lo, hi = ansatz_bands(q, scales, convention, clamp=False)
            lo = max(raw_lo, 0.0)
            clamped = clamped or raw_lo < 0.0
        points.append(BandPoint(float(q), lo, hi))
    return BandScan(theory, tuple(points), params, BlockConvention(convention), clamped)


# --- critical exponents -------------------------------------------------

_CRITICAL_LINE = {
    Theory.SPIN_WAVE: mf_critical_omega0,
    Theory.DISPERSIVE: lambda x: 4.0 * x * x,
    Theory.ANSATZ: ansatz_critical_omega0,
}

_CONTROL_PARAM = {
    Theory.SPIN_WAVE: "lam_mf",
    Theory.DISPERSIVE: "lam_d",
    Theory.ANSATZ: "lam",
}


@dataclass(frozen=True)
class ExponentFit:
    theory: Theory
    z: float
    z_nu: float
    diagnostics: dict = field(default_factory=dict)


def critical_params(theory, g_over_omega, lam=1.0, n_sites=2, omega=1.0) -> ModelParams:
    """ModelParams with the given theory's control parameter set to lam."""
    theory = Theory(theory)
    omega0 = lam * _CRITICAL_LINE[theory](g_over_omega) * omega
    return ModelParams(omega=omega, omega0=omega0, g=g_over_omega * omega, n_sites=n_sites)


def make_critical_path(theory, g_over_omega, n_points=25, closest=1e-4, farthest=1e-1):
    """Approach path lam -> 1 from below, log-spaced in (1 - lam)."""
    deltas = np.logspace(math.log10(farthest), math.log10(closest), n_points)
    return [critical_params(theory, g_over_omega, lam=1.0 - d) for d in deltas]


def _gap_at(theory, scales, q):
    if theory is Theory.SPIN_WAVE:
        return sw_bands(q, scales)[0]
    if theory is Theory.DISPERSIVE:
        return dispersive_bands(q, scales)[0]
    return ansatz_bands(q, scales)[0]


def fit_exponents(params_path, theory, dq_window=(1e-3, 1e-1), dq_points=17) -> ExponentFit:
    """Least-squares estimates of the gap exponents.

    z_nu comes from the q = pi gap along the supplied approach path
    (which must stay on one side of the transition, span at least two
    decades in |1 - lam| and carry at least eight points per decade);
    z comes from the momentum dependence of the gap on the critical line
    at the path's coupling strength.
    """
    theory = Theory(theory)
    scales_path = [derive_scales(p) for p in params_path]
    dist = np.array([1.0 - getattr(s, _CONTROL_PARAM[theory]) for s in scales_path])
    if np.any(dist == 0.0) or (np.any(dist > 0) and np.any(dist < 0)):
        raise FitError("approach path must stay strictly on one side of the transition")
    dist = np.abs(dist)
    decades = math.log10(dist.max() / dist.min())
    if decades < 2.0 - 1e-9:
        raise FitError(f"approach path spans only {decades:.2f} decades; need >= 2")
    if len(dist) / decades < 8.0 - 1e-9:
        raise FitError("approach path has fewer than 8 points per decade")

    gaps = np.array([_gap_at(theory, s, math.pi) for s in scales_path])
    if np.any(gaps <= 0.0):
        raise FitError("gap closed (or clamped to zero) inside the fit window")
    z_nu, c0 = np.polyfit(np.log(dist), np.log(gaps), 1)

    g_over_omega = scales_path[-1].g / scales_path[-1].omega
    crit = derive_scales(critical_params(theory, g_over_omega))
    dqs = np.logspace(math.log10(dq_window[0]), math.log10(dq_window[1]), dq_points)
    qgaps = np.array([_gap_at(theory, crit, math.pi - dq) for dq in dqs])
    if np.any(qgaps <= 0.0):
        raise FitError("critical-line gap vanished inside the momentum window")
    z, c1 = np.polyfit(np.log(dqs), np.log(qgaps), 1)

    diag = {
        "n_points": len(dist),
        "decades": decades,
        "gap_prefactor": math.exp(c0),
        "q_prefactor": math.exp(c1),
    }
    return ExponentFit(theory, float(z), float(z_nu), diag)
