from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate, special

from capsule_em.oracles.bounds import BoundGeometry, efficiency_bound, solve_mode
from capsule_em.oracles.circuit import circuit_s11, resonant_capacitance
from capsule_em.oracles.mie import ConvergenceError, mie_lossy_sphere, rayleigh_absorption
from capsule_em.oracles.propagation import plane_wave_attenuation
from capsule_em.oracles.special import spherical_hankel, spherical_jn, spherical_yn

# ⌀100 mm GI_avg sphere at 434 MHz; independent arbitrary-precision series (mpmath
# Bessel functions, 15 extra terms)
MIE_GI100_EXT = 0.00661014105996
MIE_GI100_ABS = 0.00536781603667


def test_planewave_lossless():
    pc = plane_wave_attenuation(4.0, 0.0, 1e9)
    assert pc.alpha == 0.0
    assert pc.beta == pytest.approx(2 * math.pi * 1e9 * 2.0 / 299792458.0, rel=1e-9)
    assert math.isinf(pc.skin_depth)


def test_planewave_good_conductor():
    pc = plane_wave_attenuation(1.0, 1e7, 1e6)
    assert pc.alpha / pc.beta == pytest.approx(1.0, rel=1e-6)


def test_planewave_st_against_complex_wavenumber():
    from scipy.constants import epsilon_0, mu_0

    w = 2 * math.pi * 434e6
    k = w * np.sqrt(mu_0 * epsilon_0 * complex(67.2, -1.01 / (w * epsilon_0)))
    pc = plane_wave_attenuation(67.2, 1.01, 434e6)
    assert pc.alpha == pytest.approx(-k.imag, rel=1e-12)
    assert pc.beta == pytest.approx(k.real, rel=1e-12)


def test_planewave_monotone_in_sigma():
    a = [plane_wave_attenuation(60.0, s, 434e6) for s in (0.1, 0.5, 1.0, 2.0)]
    assert all(x.alpha < y.alpha and x.beta < y.beta for x, y in zip(a, a[1:]))


def test_spherical_functions_real():
    x = 3.7
    n = np.arange(8)
    assert np.allclose(spherical_jn(7, x), special.spherical_jn(n, x), rtol=1e-12, atol=1e-15)
    assert np.allclose(spherical_yn(7, x), special.spherical_yn(n, x), rtol=1e-12)


def test_spherical_functions_complex():
    z = complex(2.5, 1.8)
    mp.mp.dps = 30
    for n in range(6):
        ref = complex(mp.sqrt(mp.pi / (2 * mp.mpc(z))) * mp.besselj(n + 0.5, mp.mpc(z)))
        assert spherical_jn(5, z)[n] == pytest.approx(ref, rel=1e-10)
        ref_h = complex(mp.sqrt(mp.pi / (2 * mp.mpc(z))) * mp.hankel1(n + 0.5, mp.mpc(z)))
        assert spherical_hankel(5, z)[n] == pytest.approx(ref_h, rel=1e-10)


def test_mie_gi_sphere_reference():
    r = mie_lossy_sphere(0.05, 63.0, 1.02, 434e6)
    assert r.extinction == pytest.approx(MIE_GI100_EXT, rel=1e-9)
    assert r.absorption == pytest.approx(MIE_GI100_ABS, rel=1e-9)


def test_mie_lossless_absorbs_nothing():
    r = mie_lossy_sphere(0.05, 10.0, 0.0, 434e6)
    assert abs(r.absorption) <= 1e-10 * r.extinction


def test_mie_rayleigh_limit():
    r = mie_lossy_sphere(1e-3, 63.0, 1.02, 434e6)
    assert r.absorption == pytest.approx(rayleigh_absorption(1e-3, 63.0, 1.02, 434e6), rel=0.01)


def test_mie_stable_under_extra_terms():
    a = mie_lossy_sphere(0.05, 63.0, 1.02, 434e6)
    b = mie_lossy_sphere(0.05, 63.0, 1.02, 434e6, n_terms=a.n_terms + 5)
    assert b.extinction == pytest.approx(a.extinction, rel=1e-6)


def test_mie_truncation_error():
    with pytest.raises(ConvergenceError) as exc:
        mie_lossy_sphere(0.3, 63.0, 1.02, 2.45e9, n_terms=2)
    assert exc.value.residual > 1e-6


def test_circuit_trivial():
    f = np.linspace(300e6, 500e6, 5)
    C = resonant_capacitance(20e-9, 434e6)
    assert abs(circuit_s11(50.0, 20e-9, C, 50.0, 434e6)) < 1e-12
    assert np.allclose(np.abs(circuit_s11(0.0, 20e-9, C, 50.0, f)), 1.0)


def test_circuit_formula():
    f = 400e6
    z = 10 + 1j * 2 * math.pi * f * 20e-9 + 1 / (1j * 2 * math.pi * f * 5e-12)
    assert circuit_s11(10, 20e-9, 5e-12, 50, f) == pytest.approx((z - 50) / (z + 50))


def test_bound_lossless_is_one():
    g = BoundGeometry()
    assert efficiency_bound("electric", g, 63.0, 0.0, 434e6) == 1.0
    assert efficiency_bound("magnetic", g, 63.0, 0.0, 434e6) == 1.0


@pytest.mark.parametrize("kind", ["electric", "magnetic"])
def test_bound_monotone_in_sigma(kind):
    g = BoundGeometry()
    vals = [efficiency_bound(kind, g, 63.0, s, 434e6) for s in (1e-4, 0.01, 0.1, 0.5, 1.02, 2.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert 0 < vals[-1] < vals[0] <= 1


def test_bound_tends_to_one():
    assert efficiency_bound("magnetic", BoundGeometry(), 63.0, 1e-7, 434e6) > 0.999


@pytest.mark.parametrize("kind", ["electric", "magnetic"])
def test_bound_flux_matches_dissipation_quadrature(kind):
    # flux difference between the source and phantom surfaces equals the
    # integrated loss density; adaptive quadrature, tightened tolerance agrees
    sol = solve_mode(kind, BoundGeometry(), 63.0, 1.02, 434e6)
    loss, _ = integrate.quad(sol.loss_density, sol.a, sol.rp, limit=400, epsrel=1e-10)
    loss2, _ = integrate.quad(sol.loss_density, sol.a, sol.rp, limit=800, epsrel=1e-12)
    assert loss == pytest.approx(loss2, rel=1e-8)
    assert sol.flux(sol.a) - sol.flux(sol.rp) == pytest.approx(loss, rel=1e-6)


def test_bound_geometry_invariants():
    with pytest.raises(ValueError):
        BoundGeometry(T=0.0)
    with pytest.raises(ValueError):
        BoundGeometry(Rc=60.0)
