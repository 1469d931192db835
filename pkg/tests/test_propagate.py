from __future__ import annotations

import math

import numpy as np
import pytest

from scipy.integrate import quad

from abwave.kernel import beta1, free_sine_kernel
from abwave.modesum import mode_kernel, fwt_symbol, sine_symbol
from abwave.propagate import (
    PropagationRequest,
    ResolutionWarning,
    apply_propagator,
    free_sine_solution,
    lp_norm,
    operator_norm_probe,
    radial_mode_kernel,
    random_band_limited_field,
    schur_diffractive,
    schur_diffractive_sup,
    schur_lightcone,
    spectral_symbol_values,
)
from abwave.spectrum import FluxField, PolarField, angular_coefficients, eigenfunction, radial_grid

A0 = FluxField.constant(0.0)
A3 = FluxField.constant(0.3)


def gaussian(n_r=96, n_theta=8, r_max=14.0):
    return PolarField.on_grid(lambda r, th: np.exp(-r ** 2 / 2) + 0 * th, n_r=n_r, n_theta=n_theta, r_max=r_max)


def rel_l2(u, v):
    return lp_norm(u.with_values(u.values - v.values), 2) / lp_norm(v, 2)


# --- radial kernels --------------------------------------------------------

@pytest.mark.parametrize("kind", ["sine", "fwt"])
@pytest.mark.parametrize("r1, r2", [(1.0, 1.2), (0.4, 0.6)])
def test_radial_kernel_matches_mode_oracle(kind, r1, r2):
    t = 1.5
    F = sine_symbol(t) if kind == "sine" else fwt_symbol(0.75, t)
    for nu in (0.3, 1.7):
        cf = radial_mode_kernel(kind, t, r1, r2, [nu], 0.75 if kind == "fwt" else None)[0, 0]
        ref = mode_kernel(F, nu, r1, r2).value
        assert abs(cf - ref) <= 1e-5 * abs(ref)


def test_radial_kernel_free_integer_modes():
    # for alpha = 0 the modes are the Fourier cosine coefficients of the free kernel
    t, r1, r2 = 1.5, 1.0, 1.2
    b = beta1(t, r1, r2)
    assert abs(free_sine_kernel(t, r1, r2, 0.3) * 2 * math.pi
               * math.sqrt(t * t - r1 * r1 - r2 * r2 + 2 * r1 * r2 * math.cos(0.3)) - 1) <= 1e-14

    def smooth(th, nu):
        # kernel times sqrt(beta1 - th); the square-root edge is carried by the quadrature weight
        gap = b - th
        q = 1 / (2 * r1 * r2 * math.sin(b)) if gap < 1e-14 else gap / (t * t - r1 * r1 - r2 * r2 + 2 * r1 * r2 * math.cos(th))
        return math.sqrt(q) * math.cos(nu * th) / (2 * math.pi)

    for nu in (0, 2):
        direct = 2 * quad(smooth, 0, b, args=(nu,), weight="alg", wvar=(0, -0.5), epsabs=1e-13, epsrel=1e-12)[0]
        cf = radial_mode_kernel("sine", t, r1, r2, [nu])[0, 0]
        assert abs(cf - direct) <= 1e-10 * abs(cf)


def test_spectral_symbol_values():
    rho = np.array([0.5, 1.0, 3.0])
    assert np.allclose(spectral_symbol_values("sine", 2.0, rho), np.sin(2 * rho) / rho)
    half = spectral_symbol_values("fwt", 2.0, rho, 0.5)
    assert np.allclose(half, np.sin(2 * rho) / (2 * rho), atol=1e-12)


# --- propagation -----------------------------------------------------------

@pytest.mark.parametrize("path", ["kernel", "modesum"])
@pytest.mark.parametrize("t", [0.5, 2.0])
def test_free_gaussian_evolution(path, t):
    g = gaussian()
    u = apply_propagator(PropagationRequest("sine", t, A0, g, path))
    ref = g.with_values(np.repeat(free_sine_solution(t, g.r_nodes)[:, None], g.n_theta, axis=1))
    assert rel_l2(u, ref) <= 1e-4


def test_small_time_limit():
    g = gaussian()
    t = 1e-3
    u = apply_propagator(PropagationRequest("sine", t, A3, g))
    assert rel_l2(u, g.with_values(t * g.values)) <= 1e-3


def test_fwt_half_is_scaled_sine():
    rng = np.random.default_rng(1)
    g = random_band_limited_field(rng, A3, k_band=3, n_r=80, n_theta=8, r_max=48, sigma=4)
    t = 1.7
    u = apply_propagator(PropagationRequest("sine", t, A3, g))
    v = apply_propagator(PropagationRequest("fwt", t, A3, g, w=0.5))
    assert rel_l2(v.with_values(t * v.values), u) <= 1e-8


def test_linearity():
    rng = np.random.default_rng(2)
    f = random_band_limited_field(rng, A3, k_band=3, n_r=64, n_theta=8, r_max=48, sigma=4)
    g = random_band_limited_field(rng, A3, k_band=3, n_r=64, n_theta=8, r_max=48, sigma=4)
    a, b = 0.7 - 0.2j, -1.3
    req = lambda h: PropagationRequest("fwt", 1.2, A3, h, w=0.75 + 0.25j)
    lhs = apply_propagator(req(f.with_values(a * f.values + b * g.values))).values
    rhs = a * apply_propagator(req(f)).values + b * apply_propagator(req(g)).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * np.max(np.abs(rhs))


@pytest.mark.parametrize("path", ["kernel", "modesum"])
def test_mode_diagonality(path):
    A = FluxField.constant(0.4)
    k = 2
    nu = abs(k + A.flux)
    # r^nu h(r^2) radial profile, smooth at the origin for this mode
    g = PolarField.on_grid(lambda r, th: (r ** 2 / (r ** 2 + 25)) ** (nu / 2) * (np.exp(-((r - 5) / 2) ** 2) + np.exp(-((r + 5) / 2) ** 2))
                           * eigenfunction(th, k, A), n_r=128, n_theta=16, r_max=30)
    u = apply_propagator(PropagationRequest("sine", 1.5, A, g, path))
    c = angular_coefficients(u, A, 7)
    main = np.max(np.abs(c[k]))
    leak = max(np.max(np.abs(c[j])) for j in c if j != k)
    assert main > 0.1 and leak <= 1e-10 * main


def test_paths_agree():
    rng = np.random.default_rng(3)
    g = random_band_limited_field(rng, A3, k_band=4, n_r=128, n_theta=16, r_max=72, sigma=6)
    for kind, w in (("sine", None), ("fwt", 0.75)):
        a = apply_propagator(PropagationRequest(kind, 2.0, A3, g, "kernel", w))
        b = apply_propagator(PropagationRequest(kind, 2.0, A3, g, "modesum", w))
        assert rel_l2(a, b) <= 1e-2


def test_request_validation():
    g = gaussian(n_r=16)
    with pytest.raises(ValueError):
        PropagationRequest("cos", 1.0, A0, g)
    with pytest.raises(ValueError):
        PropagationRequest("sine", -1.0, A0, g)
    with pytest.raises(ValueError):
        PropagationRequest("fwt", 1.0, A0, g, w=1.2)
    with pytest.raises(ValueError):
        PropagationRequest("fwt", 1.0, A0, g)
    with pytest.raises(ValueError):
        PropagationRequest("sine", 1.0, A0, g, path="fft")
    assert PropagationRequest("sine", 1.0, A0, g, "kernel").path == "closed-form-kernel"
    assert PropagationRequest("sine", 1.0, A0, g, k_max=2).modes == 2


def test_undecayed_input_warns():
    r, w = radial_grid(16, 2.0)
    g = PolarField(r, w, np.ones((16, 8)), 2.0)
    with pytest.warns(ResolutionWarning):
        apply_propagator(PropagationRequest("sine", 0.5, A0, g))


# --- norms -----------------------------------------------------------------

def test_lp_norm_examples():
    r, w = radial_grid(32, 1.0)
    disk = PolarField(r, w, np.ones((32, 8)), 1.0)
    assert abs(lp_norm(disk, 2) - math.sqrt(math.pi)) <= 1e-3
    c = PolarField(r, w, np.full((32, 8), -2.5 + 0j), 1.0)
    assert lp_norm(c, math.inf) == 2.5
    g = gaussian(n_r=32)
    for p in (1, 2, 4, math.inf):
        assert abs(lp_norm(g.with_values(-3j * g.values), p) - 3 * lp_norm(g, p)) <= 1e-13 * lp_norm(g, p)
    with pytest.raises(ValueError):
        lp_norm(g, 0.5)


# --- Schur integrals -------------------------------------------------------

@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 7.0])
def test_schur_lightcone_exact(t):
    assert abs(schur_lightcone(t) - 2 * math.pi * t) <= 1e-8 * 2 * math.pi * t


def test_schur_diffractive_empty_region():
    assert schur_diffractive(2.0, 2.0) == 0.0
    assert schur_diffractive(2.0, 3.0) == 0.0


@pytest.mark.parametrize("sigma", [0.6, 0.75, 0.9])
def test_schur_scaling_slopes(sigma):
    ts = np.array([0.5, 1.0, 2.0, 4.0, 8.0])
    for fn in (lambda t: schur_lightcone(t, sigma), lambda t: schur_diffractive_sup(t, sigma)):
        v = np.array([fn(t) for t in ts])
        slope = np.polyfit(np.log(ts), np.log(v), 1)[0]
        assert abs(slope - 2 * (1 - sigma)) <= 0.02


def test_schur_diffractive_against_closed_form():
    # at r1 = 0 the diffractive integral is the light-cone one
    assert abs(schur_diffractive(3.0, 0.0, 0.75) - schur_lightcone(3.0, 0.75)) <= 1e-9 * schur_lightcone(3.0, 0.75)


# --- probes ----------------------------------------------------------------

def test_probe_deterministic_and_bounded_by_symbol():
    kw = {"k_band": 3, "n_r": 96, "n_theta": 8, "r_max": 72, "sigma": 6}
    a = operator_norm_probe("fwt", 1.0, 2, trials=2, seed=7, w=0.75, field_kwargs=kw)
    b = operator_norm_probe("fwt", 1.0, 2, trials=2, seed=7, w=0.75, field_kwargs=kw)
    assert a == b
    rho = np.linspace(1e-6, 50, 5001)
    sup = np.max(np.abs(spectral_symbol_values("fwt", 1.0, rho, 0.75)))
    assert 0 < a <= sup + 1e-6


def test_probe_radial_mode_matches_single_field():
    # a phi_0-mode Gaussian probe reproduces the radial-only ratio
    A = FluxField.constant(0.5)
    g = PolarField.on_grid(lambda r, th: np.exp(-((r - 20) / 6) ** 2) * eigenfunction(th, 0, A),
                           n_r=96, n_theta=8, r_max=72)
    u = apply_propagator(PropagationRequest("sine", 2.0, A, g, k_max=0))
    ratio = lp_norm(u, 2) / lp_norm(g, 2)
    c = angular_coefficients(u, A, 3)
    radial = math.sqrt(np.sum(u.r_weights * np.abs(c[0]) ** 2)) / math.sqrt(np.sum(g.r_weights * np.abs(
        angular_coefficients(g, A, 0)[0]) ** 2))
    assert abs(ratio - radial) <= 1e-12 * radial
