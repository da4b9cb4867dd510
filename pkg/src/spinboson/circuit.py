"""Lumped-element circuit parameters -> effective model parameters.

A qubit capacitively loaded by z resonators sees each resonator's
capacitance renormalised according to

    1 / (2 C_tilde) = 1 / (2 C) + z / C_g,

which shifts the resonator frequency and impedance before the coupling
is evaluated.  Galvanic (flux-qubit style) couplings bypass the loading
entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy.constants import e as _E_CHARGE, hbar as _HBAR

from .core import ModelParams
from .errors import ValidationError


class QubitType(str, Enum):
    CHARGE = "charge"    # capacitive coupling; loading applies
    FLUX = "flux"        # galvanic coupling; no capacitive loading


@dataclass(frozen=True)
class CircuitParams:
    """SI-unit circuit values: capacitances in F, inductance in H,
    Josephson energy in J.  z is the lattice coordination number
    (resonators per qubit)."""

    c: float          # resonator capacitance
    l: float          # resonator inductance
    c_g: float        # coupling capacitance (may be inf: decoupled)
    c_qb: float       # qubit capacitance (carried, not consumed by the map)
    e_j: float        # Josephson energy; |E_J| sets the qubit splitting
    z: int = 2
    qubit_type: QubitType = QubitType.CHARGE

    def __post_init__(self):
        for name in ("c", "l", "c_g", "c_qb"):
            v = getattr(self, name)
            if not (v > 0):
                raise ValidationError(name, f"must be > 0, got {v}")
        if not (self.e_j > 0 and math.isfinite(self.e_j)):
            raise ValidationError("e_j", f"must be finite and > 0, got {self.e_j}")
        if self.z < 1:
            raise ValidationError("z", f"must be >= 1, got {self.z}")
        if not isinstance(self.qubit_type, QubitType):
            object.__setattr__(self, "qubit_type", QubitType(self.qubit_type))


@dataclass(frozen=True)
class EffectiveModel:
    """Loaded-resonator scales in SI angular frequencies, plus the
    dimensionless ratios the lattice model consumes."""

    omega_tilde: float     # loaded resonator frequency, rad/s
    z_tilde: float         # loaded resonator impedance, Ohm
    g_tilde: float         # qubit-resonator coupling, rad/s
    omega0: float          # qubit splitting, rad/s
    c_tilde: float         # loaded capacitance, F

    @property
    def g_rel(self):
        return self.g_tilde / self.omega_tilde

    @property
    def omega0_ratio(self):
        return self.omega0 / self.omega_tilde

    def to_model_params(self, n_sites, **kwargs) -> ModelParams:
        """Dimensionless model with the loaded resonator as the unit."""
        return ModelParams(omega=1.0, omega0=self.omega0_ratio,
                           g=self.g_rel, n_sites=n_sites, **kwargs)


def renormalize_circuit(circuit: CircuitParams) -> EffectiveModel:
    if circuit.qubit_type is QubitType.FLUX or math.isinf(circuit.c_g):
        c_tilde = circuit.c
    else:
        c_tilde = circuit.c * circuit.c_g / (circuit.c_g + 2.0 * circuit.z * circuit.c)
    omega_tilde = 1.0 / math.sqrt(circuit.l * c_tilde)
    z_tilde = math.sqrt(circuit.l / c_tilde)
    if math.isinf(circuit.c_g):
        g_tilde = 0.0
    else:
        g_tilde = _E_CHARGE / (circuit.c_g * math.sqrt(2.0 * z_tilde * _HBAR))
    return EffectiveModel(omega_tilde, z_tilde, g_tilde, abs(circuit.e_j) / _HBAR, c_tilde)


def critical_cavity_frequency(g_rel: float, tol=1e-10) -> float:
    """Cavity frequency (units of omega0) putting a qubit of splitting
    omega0 exactly on the ordering transition, at fixed coupling
    g = g_rel * omega0.

    Solves 4 r exp(4 r^2) = 1 / g_rel for r = g / omega_tilde (strictly
    increasing, so bisection suffices) and returns omega_tilde / omega0
    = g_rel / r.
    """
    if not (g_rel > 0 and math.isfinite(g_rel)):
        raise ValidationError("g_rel", f"must be finite and > 0, got {g_rel}")
    target = 1.0 / g_rel

    def f(r):
        return 4.0 * r * math.exp(4.0 * r * r)

    lo, hi = 0.0, 1.0
    while f(hi) < target:
        hi *= 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    return g_rel / r
