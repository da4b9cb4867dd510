import math

import numpy as np
import pytest
from scipy.optimize import minimize

from spinboson import (
    CouplingPattern,
    ModelParams,
    ValidationError,
    derive_scales,
    mf_critical_omega0,
    mf_polarizations,
    solve_mf,
    solve_mf_params,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def _variational_energy_per_site(omega, omega0, g):
    """Independent numerical minimization of the product-state energy.

    The trial state is a uniform coherent state (amplitude alpha, staggered
    sign) times a spin rotated by theta from the field axis.  The energy per
    site is assembled from explicit 2x2 matrices rather than the closed-form
    expressions under test.
    """
    h = 0.5 * omega0

    def energy(x):
        theta, alpha = x
        phi = theta + 0.5 * math.pi
        psi = np.array([math.cos(phi / 2.0), math.sin(phi / 2.0)])
        sz = psi @ SZ @ psi
        sx = psi @ SX @ psi
        return omega * alpha ** 2 + h * sz + 4.0 * g * alpha * sx

    best = None
    for theta0 in np.linspace(-0.5 * math.pi, 0.5 * math.pi, 41):
        for alpha0 in np.linspace(-2.0 * g / omega - 0.2, 2.0 * g / omega + 0.2, 21):
            res = minimize(energy, [theta0, alpha0], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
            if best is None or res.fun < best:
                best = res.fun
    return best


@pytest.mark.parametrize("omega,omega0,g", [
    (1.0, 0.3, 0.5),     # deep in the ordered phase
    (1.0, 1.0, 0.5),     # at lam_mf = 0.5
    (1.0, 5.0, 0.5),     # paramagnet (critical omega0 is 4 here)
    (1.0, 2.0, math.sqrt(2.0) / 2.0),  # exactly critical, lam_mf = 1
    (2.0, 0.8, 0.6),
])
def test_energy_against_grid_oracle(omega, omega0, g):
    params = ModelParams(omega=omega, omega0=omega0, g=g, n_sites=4)
    sol = solve_mf_params(params)
    oracle = _variational_energy_per_site(omega, omega0, g)
    assert sol.energy_per_site == pytest.approx(oracle, abs=1e-6)


def test_ordered_solution_values():
    sc = derive_scales(ModelParams(omega=1.0, omega0=0.5, g=0.5, n_sites=4))
    sol = solve_mf(sc, 4)
    lam_mf = sc.lam_mf
    assert sol.ordered
    assert math.sin(sol.theta0) == pytest.approx(lam_mf, rel=1e-12)
    assert sol.alpha0 == pytest.approx((2 * 0.5 / 1.0) * math.sqrt(1 - lam_mf ** 2),
                                       rel=1e-12)
    expected = -(sc.h * lam_mf + sc.j_mf * (1 - lam_mf ** 2))
    assert sol.energy_per_site == pytest.approx(expected, rel=1e-12)
    assert sol.energy == pytest.approx(4 * expected, rel=1e-12)


def test_paramagnetic_solution():
    sc = derive_scales(ModelParams(omega=1.0, omega0=5.0, g=0.5, n_sites=4))
    sol = solve_mf(sc, 4)
    assert not sol.ordered
    assert sol.alpha0 == 0.0
    assert sol.theta0 == pytest.approx(0.5 * math.pi)
    assert sol.energy_per_site == pytest.approx(-sc.h, rel=1e-12)


def test_alpha_zero_iff_not_ordered():
    for omega0 in (0.1, 1.0, 3.999, 4.0, 4.001, 8.0):
        sc = derive_scales(ModelParams(omega=1.0, omega0=omega0, g=0.5, n_sites=4))
        sol = solve_mf(sc, 4)
        assert (sol.alpha0 == 0.0) == (not sol.ordered)


def test_polarizations_staggering():
    params = ModelParams(omega=1.0, omega0=0.5, g=0.5, n_sites=6)
    sc = derive_scales(params)
    sol = solve_mf(sc, 6)
    sx0, a0 = mf_polarizations(sol, sc, 0)
    sx1, a1 = mf_polarizations(sol, sc, 1)
    assert sx0 == pytest.approx(-sx1)
    assert a0 == pytest.approx(-a1)
    assert abs(sx0) == pytest.approx(math.cos(sol.theta0), rel=1e-12)
    assert abs(a0) == pytest.approx(sol.alpha0, rel=1e-12)
    # spin and cavity displacement on the same site oppose each other (g > 0)
    assert sx0 * a0 < 0


def test_ferromagnetic_pattern_uniform():
    sc = derive_scales(ModelParams(omega=1.0, omega0=0.5, g=0.5, n_sites=6,
                                   coupling_pattern=CouplingPattern.FERROMAGNETIC))
    sol = solve_mf(sc, 6, pattern=CouplingPattern.FERROMAGNETIC)
    sx0, a0 = mf_polarizations(sol, sc, 0)
    sx1, a1 = mf_polarizations(sol, sc, 1)
    assert sx0 == pytest.approx(sx1)
    assert a0 == pytest.approx(a1)


def test_critical_line():
    assert mf_critical_omega0(0.25) == pytest.approx(1.0, rel=1e-12)
    for x in (0.05, 0.2, 0.5):
        omega0_c = mf_critical_omega0(x)
        sc = derive_scales(ModelParams(omega=1.0, omega0=omega0_c, g=x, n_sites=4))
        assert sc.lam_mf == pytest.approx(1.0, rel=1e-12)
        assert not solve_mf(sc, 4).ordered  # boundary is paramagnetic


def test_critical_omega0_rejects_nonpositive():
    with pytest.raises(ValidationError):
        mf_critical_omega0(0.0)
