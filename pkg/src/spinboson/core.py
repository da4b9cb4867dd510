"""Model definition, derived energy scales and momentum grids.

The system is a 1D chain of two-level emitters, each coupled to the
difference of the photon fields of its two neighbouring cavities:

    H = (omega0/2) sum_i sigma^z_i + omega sum_i a_i^dag a_i
        + g sum_i sigma^x_i (a_i - a_{i+1} + h.c.)          (antiferro pattern)

All analytic machinery downstream works with a handful of derived scales
(effective Ising coupling, transverse fields, dimensionless control
parameters) which are collected here in one place.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from enum import Enum

from .errors import ValidationError


class CouplingPattern(str, Enum):
    ANTIFERROMAGNETIC = "antiferromagnetic"
    FERROMAGNETIC = "ferromagnetic"


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class GridConvention(str, Enum):
    # Antiperiodic (fermion-parity even) momenta on a ring; half zone only,
    # the -q partners are accounted for analytically.
    PERIODIC_HALF_BZ = "periodic_half_bz"
    # Standing-wave momenta of an open chain.
    OPEN_SINE = "open_sine"


@dataclass(frozen=True)
class ModelParams:
    """Bare model parameters. Frequencies share one energy unit; g >= 0."""

    omega: float
    omega0: float
    g: float
    n_sites: int
    coupling_pattern: CouplingPattern = CouplingPattern.ANTIFERROMAGNETIC
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValidationError("omega", f"must be finite and > 0, got {self.omega}")
        if not (self.omega0 >= 0 and math.isfinite(self.omega0)):
            raise ValidationError("omega0", f"must be finite and >= 0, got {self.omega0}")
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise ValidationError("g", f"must be finite and >= 0, got {self.g}")
        if not (isinstance(self.n_sites, int) and self.n_sites >= 2):
            raise ValidationError("n_sites", f"must be an integer >= 2, got {self.n_sites}")
        if not isinstance(self.coupling_pattern, CouplingPattern):
            object.__setattr__(self, "coupling_pattern", CouplingPattern(self.coupling_pattern))
        if not isinstance(self.boundary, Boundary):
            object.__setattr__(self, "boundary", Boundary(self.boundary))

    def to_dict(self):
        d = asdict(self)
        d["coupling_pattern"] = self.coupling_pattern.value
        d["boundary"] = self.boundary.value
        return d

    @classmethod
    def from_dict(cls, d):
        known = {"omega", "omega0", "g", "n_sites", "coupling_pattern", "boundary"}
        extra = set(d) - known
        if extra:
            raise ValidationError("params", f"unknown keys {sorted(extra)}")
        try:
            kwargs = dict(d)
            if "coupling_pattern" in kwargs:
                kwargs["coupling_pattern"] = CouplingPattern(kwargs["coupling_pattern"])
            if "boundary" in kwargs:
                kwargs["boundary"] = Boundary(kwargs["boundary"])
            return cls(**kwargs)
        except (ValueError, TypeError) as exc:
            raise ValidationError("params", str(exc)) from exc

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class DerivedScales:
    """Effective low-energy scales of the model.

    j        : Ising exchange of the polaron picture, 2 g^2 / omega
    j_mf     : exchange of the adiabatic (mean-field) picture, 4 g^2 / omega
    h        : bare transverse field, omega0 / 2
    h_tilde  : polaron-renormalised field, h * exp(-4 (g/omega)^2)
    lam      : h_tilde / j      (polaron control parameter)
    lam_mf   : h / (2 j_mf)     (mean-field control parameter)
    lam_d    : h / j            (dispersive control parameter)

    At g = 0 the exchanges vanish and the control parameters are +inf
    (deep paramagnet); this is flagged rather than raised.
    """

    omega: float
    omega0: float
    g: float
    j: float
    j_mf: float
    h: float
    h_tilde: float
    lam: float
    lam_mf: float
    lam_d: float

    @property
    def deep_paramagnet(self):
        return math.isinf(self.lam)


def derive_scales(params: ModelParams) -> DerivedScales:
    """Compute all derived energy scales from the bare parameters."""
    omega, omega0, g = params.omega, params.omega0, params.g
    j = 2.0 * g * g / omega
    j_mf = 2.0 * j
    h = 0.5 * omega0
    h_tilde = h * math.exp(-4.0 * (g / omega) ** 2)
    if j > 0.0:
        lam = h_tilde / j
        lam_mf = h / (2.0 * j_mf)
        lam_d = h / j
    else:
        lam = lam_mf = lam_d = math.inf
    return DerivedScales(omega, omega0, g, j, j_mf, h, h_tilde, lam, lam_mf, lam_d)


@dataclass(frozen=True)
class MomentumGrid:
    """A set of momenta in (0, pi], sorted and duplicate-free."""

    values: tuple
    convention: GridConvention

    def __post_init__(self):
        vals = tuple(float(q) for q in self.values)
        if any(not (0.0 < q <= math.pi + 1e-15) for q in vals):
            raise ValidationError("momentum_grid", "momenta must lie in (0, pi]")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("momentum_grid", "momenta must be strictly increasing")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def momentum_grid(n_sites: int, boundary: Boundary = Boundary.PERIODIC) -> MomentumGrid:
    """Positive-momentum grid matching the chain geometry.

    Periodic chains use the antiperiodic half zone q = pi (2m - 1) / N,
    m = 1 .. N/2 (even N required; the antiperiodic sector pairs +q with
    -q).  Open chains use the sine grid q = pi m / (N + 1), m = 1 .. N.
    """
    boundary = Boundary(boundary)
    if boundary is Boundary.PERIODIC:
        if n_sites % 2 != 0:
            raise ValidationError(
                "n_sites", "periodic half-zone grid requires an even number of sites"
            )
        qs = [math.pi * (2 * m - 1) / n_sites for m in range(1, n_sites // 2 + 1)]
        return MomentumGrid(tuple(qs), GridConvention.PERIODIC_HALF_BZ)
    qs = [math.pi * m / (n_sites + 1) for m in range(1, n_sites + 1)]
    return MomentumGrid(tuple(qs), GridConvention.OPEN_SINE)
