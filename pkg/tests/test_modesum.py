from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from abwave.kernel import KernelPoint, free_sine_kernel, kernel_sine
from abwave.modesum import (
    ConvergenceError,
    SpectralSymbol,
    fwt_symbol,
    heat_mode_closed_form,
    heat_symbol,
    kernel_modesum,
    legendre_p_integral,
    legendre_q_integral,
    macdonald_residual,
    mode_kernel,
    sine_symbol,
)
from abwave.spectrum import FluxField


def heat_oracle(nu, tau, r1, r2):
    return float(mp.exp(-(r1 ** 2 + r2 ** 2) / (4 * tau)) * mp.besseli(nu, r1 * r2 / (2 * tau)) / (2 * tau))


# --- single mode -----------------------------------------------------------

@pytest.mark.parametrize("nu", [0.5, 1.3])
@pytest.mark.parametrize("tau", [0.25, 1.0])
def test_heat_mode_matches_closed_form(nu, tau):
    r1, r2 = 1.0, 1.0
    ref = heat_oracle(nu, tau, r1, r2)
    assert abs(heat_mode_closed_form(nu, tau, r1, r2) - ref) <= 1e-13 * ref
    val = mode_kernel(heat_symbol(tau), nu, r1, r2).value
    assert abs(val - ref) <= 1e-6 * ref


def test_damped_heat_converges_monotonically():
    tau, nu = 0.5, 0.5
    damped_heat = SpectralSymbol(lambda rho: np.exp(-tau * rho ** 2), "gaussian", 0.0, True, 0.0, "heat-damped")
    res = mode_kernel(damped_heat, nu, 1.0, 1.0, eps_list=(0.1, 0.05, 0.025))
    ref = heat_oracle(nu, tau, 1.0, 1.0)
    err = [abs(v - ref) for v in res.damped]
    assert err[0] >= err[1] >= err[2]
    assert abs(res.value - ref) <= 1e-6 * ref


def test_sine_half_order_exact():
    # J_{1/2} is elementary; the integral reduces to Dirichlet integrals equal to pi/4
    val = mode_kernel(sine_symbol(0.5), 0.5, 1.0, 1.0)
    assert abs(val.value - 0.5) <= 1e-6
    assert val.spread < 1e-4


def test_fwt_region_one_vanishes():
    val = mode_kernel(fwt_symbol(0.75, 0.3), 0.7, 1.0, 2.0).value
    assert abs(val) <= 1e-6


def test_mode_kernel_symmetric_in_radii():
    F = sine_symbol(1.3)
    a = mode_kernel(F, 2.3, 0.7, 1.1).value
    b = mode_kernel(F, 2.3, 1.1, 0.7).value
    assert abs(a - b) <= 1e-8


def test_mode_kernel_argument_checks():
    with pytest.raises(ValueError):
        mode_kernel(sine_symbol(1.0), -0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        fwt_symbol(0.75 + 0.1j, 1.0)
    with pytest.raises(ConvergenceError):
        mode_kernel(sine_symbol(1.0), 0.5, 1.0, 1.0, eps_list=(0.8, 0.4), tol=1e-14, raise_on_spread=True)


def test_symbol_decay_metadata():
    for F in (sine_symbol(1.0), fwt_symbol(0.6, 2.0), heat_symbol(0.3)):
        assert F.check_decay()


# --- angular sum -----------------------------------------------------------

def test_free_kernel_from_mode_sum():
    A = FluxField.constant(0.0)
    p = KernelPoint(1.5, 1.0, 0.7, 1.2, 0.2)
    ref = free_sine_kernel(p.t, p.r1, p.r2, p.theta_bar)
    res = kernel_modesum(sine_symbol(p.t), p, A, k_max=60, rungs=4)
    assert abs(res.value - ref) <= 5e-3 * abs(ref)


_WRAP_CACHE: dict = {}


@pytest.mark.parametrize("theta_bar", [0.1, math.pi / 2, math.pi, 3 * math.pi / 2])
def test_wrap_structure_behind_front(theta_bar):
    A = FluxField.constant(0.0)
    p = KernelPoint(3.0, 1.0, theta_bar + 0.3, 0.8, 0.3)
    res = kernel_modesum(sine_symbol(3.0), p, A, mode_cache=_WRAP_CACHE)
    ref = kernel_sine(None, p, A).total
    assert abs(abs(res.value) - abs(ref)) <= 5e-3 * abs(ref)


def test_half_flux_matches_closed_form_behind_front():
    A = FluxField.constant(0.3)
    p = KernelPoint(3.0, 1.0, 1.2, 0.8, 0.2)
    res = kernel_modesum(sine_symbol(3.0), p, A)
    ref = kernel_sine(None, p, A).total
    assert res.summation == "plain"
    assert abs(res.value - ref) <= 5e-3 * abs(ref)


def test_flux_shift_identity():
    p = KernelPoint(3.0, 1.0, 1.1, 0.9, 0.3)
    F = sine_symbol(3.0)
    store = {}
    a = kernel_modesum(F, p, FluxField.constant(0.3), k_max=20, k_cap=20, mode_cache=store)
    b = kernel_modesum(F, p, FluxField.constant(1.3), k_max=20, k_cap=20, mode_cache=store)
    # reindex: the alpha + 1 sum over |k| <= K equals the alpha sum over -K+1 <= j <= K+1
    ks = np.array([m[0] for m in a.modes])
    vals = {round(m[1], 12): m[2] for m in a.modes + b.modes}
    th = p.theta_bar
    base = sum(vals[round(abs(j + 0.3), 12)] * np.exp(-1j * j * th) for j in ks + 1) / (2 * math.pi)
    assert abs(b.value - np.exp(1j * th) * base) <= 1e-14


def test_mode_cache_reused():
    p = KernelPoint(3.0, 1.0, 1.1, 0.9, 0.3)
    store = {}
    kernel_modesum(sine_symbol(3.0), p, FluxField.constant(0.3), mode_cache=store)
    n = len(store)
    q = KernelPoint(3.0, 1.0, 2.0, 0.9, 0.1)
    kernel_modesum(sine_symbol(3.0), q, FluxField.constant(0.3), mode_cache=store)
    assert len(store) == n


def test_tail_error_raised():
    p = KernelPoint(1.5, 1.0, 0.7, 1.2, 0.2)
    with pytest.raises(ConvergenceError):
        kernel_modesum(heat_symbol(1e-3), p, FluxField.constant(0.3), k_max=2, k_cap=2, raise_on_tail=True)
    with pytest.raises(ValueError):
        kernel_modesum(sine_symbol(1.0), p, FluxField.constant(0.3), k_max=0)


# --- Macdonald -------------------------------------------------------------

def test_macdonald_region_one():
    r = macdonald_residual(0.75, 0.5, 0.3, 1.0, 2.0)
    assert r.regime == "I" and r.residual <= 1e-6


def test_macdonald_p_branch():
    r = macdonald_residual(0.75, 0.5, 1.5, 1.0, 1.0)
    assert r.regime == "II" and r.residual <= 1e-4


def test_macdonald_q_branch():
    r = macdonald_residual(0.75, 0.5, 3.0, 1.0, 1.0)
    assert r.regime == "III" and r.residual <= 1e-4


def test_legendre_representations_against_mpmath():
    mu_star, lam, theta = -0.25, 0.5, 1.1
    ref = float(mp.legenp(lam, mu_star, mp.cos(theta), type=2))
    assert abs(legendre_p_integral(mu_star, lam, theta) - ref) <= 1e-9 * abs(ref)
    x = 1.7
    ref_q = complex(mp.legenq(lam, mu_star, mp.cosh(x), type=3))
    val = legendre_q_integral(mu_star, lam, x)
    assert abs(val - ref_q) <= 1e-9 * abs(ref_q)


def test_legendre_preconditions():
    with pytest.raises(ValueError):
        legendre_p_integral(0.6, 0.5, 1.0)
    with pytest.raises(ValueError):
        legendre_q_integral(0.3, -2.0, 1.0)
